"""Regenerate the shipped benchmark corpus (deterministic synthetic images).

The corpus stands in for the natural-image crops used in the synthetic-noise
ablation: piecewise-smooth luminance with correlated chroma, quantized to
8-bit PPM.  Re-running this script reproduces the files byte-identically.
"""

import argparse
from pathlib import Path

import numpy as np

from mcwnnm import ImagePlanes, image_write


def natural_image(seed: int, size: int = 128) -> ImagePlanes:
    """Seeded smooth test image with luminance structure and soft chroma."""
    rng = np.random.default_rng(seed)

    def smooth(scale):
        f = rng.normal(size=(size, size))
        ky = np.fft.fftfreq(size)[:, None]
        kx = np.fft.fftfreq(size)[None, :]
        g = np.exp(-2 * (np.pi * scale) ** 2 * (ky ** 2 + kx ** 2))
        out = np.real(np.fft.ifft2(np.fft.fft2(f) * g))
        return out / (np.abs(out).max() + 1e-12)

    L = 0.7 * smooth(6) + 0.3 * smooth(2)
    a = 0.3 * smooth(8)
    b = 0.3 * smooth(8)
    img = np.stack([L + a, L + b, L - 0.5 * (a + b)])
    img = (img - img.min()) / (img.max() - img.min()) * 220 + 15
    return ImagePlanes(img)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", type=Path,
                    default=Path(__file__).resolve().parent.parent / "corpus")
    ap.add_argument("--size", type=int, default=128)
    ap.add_argument("--count", type=int, default=3)
    args = ap.parse_args()

    args.out_dir.mkdir(parents=True, exist_ok=True)
    for i in range(args.count):
        path = args.out_dir / f"img{i + 1:02d}.ppm"
        image_write(path, natural_image(seed=11 + i, size=args.size))
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
