#!/usr/bin/env python3
"""Generate the denoising init fixtures used by the acceptance binary.

Noisy observations come from the C++ CLI so the noise stream matches
`patchreg synthesize`; the init is BM3D (pip package `bm3d`) run on them.

    python3 tools/make_fixtures.py --cli build/tools/patchreg
"""
import argparse
import pathlib
import subprocess

import bm3d
import numpy as np


def read_pfm(path):
    with open(path, "rb") as f:
        assert f.readline().strip() == b"Pf"
        w, h = map(int, f.readline().split())
        scale = float(f.readline())
        dt = "<f4" if scale < 0 else ">f4"
        data = np.frombuffer(f.read(w * h * 4), dtype=dt).reshape(h, w)
    return np.flipud(data).astype(np.float64)


def write_pfm(path, img):
    h, w = img.shape
    with open(path, "wb") as f:
        f.write(b"Pf\n%d %d\n-1.0\n" % (w, h))
        f.write(np.flipud(img).astype("<f4").tobytes())


def main():
    root = pathlib.Path(__file__).resolve().parent.parent
    ap = argparse.ArgumentParser()
    ap.add_argument("--cli", default=str(root / "build/tools/patchreg"))
    ap.add_argument("--out", default=str(root / "tests/data/fixtures"))
    ap.add_argument("--images", default="cameraman256,lena512")
    ap.add_argument("--sigmas", default="50,75,100")
    ap.add_argument("--seeds", default="1")
    args = ap.parse_args()

    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name in args.images.split(","):
        clean = root / "tests/data" / f"{name}.png"
        for sigma in map(int, args.sigmas.split(",")):
            for seed in map(int, args.seeds.split(",")):
                stem = out / f"{name}_s{sigma}_seed{seed}"
                noisy = stem.with_name(stem.name + "_noisy.pfm")
                subprocess.run([args.cli, "synthesize", "--preset", f"gauss-{sigma}",
                                "--seed", str(seed), "--clean", str(clean),
                                "--out", str(noisy)], check=True)
                y = read_pfm(noisy)
                init = bm3d.bm3d(y, sigma_psd=sigma / 255.0)
                write_pfm(stem.with_name(stem.name + "_init.pfm"), init)
                print(stem.name, flush=True)


if __name__ == "__main__":
    main()
