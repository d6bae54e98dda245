"""Command-line interface: single-image denoising and the benchmark harness."""

from __future__ import annotations

import argparse
import re
import sys
import time
import zlib
from pathlib import Path

import numpy as np

from .admm import AdmmConfig
from .denoiser import VARIANTS, DenoiseConfig, denoise, preset_config
from .image import ChannelSigmas, ImageError, ImagePlanes, add_awgn, estimate_sigmas, psnr
from .imageio import image_read, image_write
from .report import RunRecord, cfg_snapshot, format_table, write_report


def _parse_sigmas(text: str) -> ChannelSigmas:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("sigmas must be three values: r,g,b")
    try:
        return ChannelSigmas(*(float(p) for p in parts))
    except (ValueError, ImageError) as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _parse_crop(text: str):
    m = re.fullmatch(r"(\d+)x(\d+)\+(\d+)\+(\d+)", text)
    if m is None:
        raise argparse.ArgumentTypeError("crop must look like HxW+row+col")
    return tuple(int(g) for g in m.groups())


def _apply_crop(img: ImagePlanes, crop) -> ImagePlanes:
    h, w, r, c = crop
    if r + h > img.height or c + w > img.width:
        raise ImageError(f"crop {h}x{w}+{r}+{c} exceeds image "
                         f"{img.height}x{img.width}")
    return ImagePlanes(img.planes[:, r:r + h, c:c + w])


def _add_param_args(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--variant", choices=VARIANTS, default="mcwnnm")
    sp.add_argument("--preset", choices=("synthetic", "real"), default="synthetic")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--crop", type=_parse_crop, default=None,
                    help="crop HxW+row+col applied after reading")
    sp.add_argument("--resigma", choices=("fixed", "reestimate"), default=None)
    sp.add_argument("--p", type=int, default=None)
    sp.add_argument("--M", type=int, default=None)
    sp.add_argument("--window", type=int, default=None)
    sp.add_argument("--stride", type=int, default=None)
    sp.add_argument("--K1", type=int, default=None)
    sp.add_argument("--K2", type=int, default=None)
    sp.add_argument("--mu", type=float, default=None)
    sp.add_argument("--rho0", type=float, default=None)
    sp.add_argument("--eq13-verbatim", action="store_true")
    sp.add_argument("--report", type=Path, default=None)


def _build_config(args, variant: str) -> DenoiseConfig:
    cfg = preset_config(variant, args.preset)
    admm_over = {}
    for name, key in (("K1", "K1"), ("mu", "mu"), ("rho0", "rho0")):
        v = getattr(args, name)
        if v is not None:
            admm_over[key] = v
    if args.eq13_verbatim:
        admm_over["eq13_verbatim"] = True
    if admm_over:
        cfg = DenoiseConfig(**{**_asdict_shallow(cfg),
                               "admm": AdmmConfig(**{**_asdict_shallow(cfg.admm),
                                                     **admm_over})})
    over = {}
    for name in ("p", "M", "window", "stride", "K2", "resigma"):
        v = getattr(args, name)
        if v is not None:
            over[name] = v
    if over:
        cfg = DenoiseConfig(**{**_asdict_shallow(cfg), **over})
    return cfg


def _asdict_shallow(obj) -> dict:
    import dataclasses
    return {f.name: getattr(obj, f.name) for f in dataclasses.fields(obj)}


def _cmd_denoise(args) -> int:
    try:
        img = image_read(args.inp)
    except (ImageError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.crop:
        img = _apply_crop(img, args.crop)
    sigmas = args.sigmas if args.sigmas is not None else estimate_sigmas(img)
    cfg = _build_config(args, args.variant)

    t0 = time.perf_counter()
    out = denoise(img, sigmas, cfg)
    dt = time.perf_counter() - t0
    if args.clip:
        out = ImagePlanes(np.clip(out.planes, 0.0, 255.0))
    image_write(args.out, out)

    if args.report:
        rec = RunRecord(image=Path(args.inp).name, variant=args.variant,
                        sigmas=sigmas.as_tuple(), input_psnr=psnr(img, img),
                        output_psnr=psnr(img, out), seed=args.seed,
                        cfg=cfg_snapshot(cfg), wall_time=dt)
        write_report(args.report, [rec])
    print(f"wrote {args.out} ({dt:.1f} s, variant {args.variant})")
    return 0


def _image_seed(root_seed: int, name: str) -> int:
    # corpus reordering must not change per-image noise
    return root_seed ^ zlib.crc32(name.encode())


def _cmd_bench(args) -> int:
    corpus = Path(args.corpus)
    files = sorted(p for p in corpus.iterdir()
                   if p.suffix.lower() in (".ppm", ".pnm", ".png"))
    if not files:
        print(f"error: no images found in {corpus}", file=sys.stderr)
        return 1
    variants = args.variants.split(",")
    for v in variants:
        if v not in VARIANTS:
            print(f"error: unknown variant {v!r}", file=sys.stderr)
            return 2

    records = []
    for path in files:
        try:
            clean = image_read(path)
        except (ImageError, OSError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        if args.crop:
            clean = _apply_crop(clean, args.crop)
        seed = _image_seed(args.seed, path.name)
        noisy = add_awgn(clean, args.sigmas, seed)
        if args.clip:
            noisy = ImagePlanes(np.clip(noisy.planes, 0.0, 255.0))
        in_psnr = psnr(clean, noisy)
        for variant in variants:
            cfg = _build_config(args, variant)
            t0 = time.perf_counter()
            out = denoise(noisy, args.sigmas, cfg)
            dt = time.perf_counter() - t0
            records.append(RunRecord(
                image=path.name, variant=variant, sigmas=args.sigmas.as_tuple(),
                input_psnr=in_psnr, output_psnr=psnr(clean, out), seed=seed,
                cfg=cfg_snapshot(cfg), wall_time=dt))
            if args.out_dir:
                out_dir = Path(args.out_dir)
                out_dir.mkdir(parents=True, exist_ok=True)
                image_write(out_dir / f"{path.stem}_{variant}{path.suffix}", out)

    records.sort(key=lambda r: (r.image, r.variant))
    if args.report:
        write_report(args.report, records)
    print(format_table(records))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mcwnnm",
        description="Channel-weighted low-rank color image denoiser")
    sub = parser.add_subparsers(dest="command", required=True)

    d = sub.add_parser("denoise", help="denoise a single image")
    d.add_argument("--in", dest="inp", required=True, type=Path)
    d.add_argument("--out", required=True, type=Path)
    d.add_argument("--sigmas", type=_parse_sigmas, default=None,
                   help="per-channel noise levels r,g,b")
    d.add_argument("--estimate", action="store_true",
                   help="estimate noise levels from the input")
    d.add_argument("--clip", action="store_true",
                   help="clamp the output to [0, 255] (always applied on write)")
    _add_param_args(d)
    d.set_defaults(func=_cmd_denoise)

    b = sub.add_parser("bench", help="synthetic-noise benchmark over a corpus")
    b.add_argument("--corpus", required=True, type=Path,
                   help="directory of clean images")
    b.add_argument("--sigmas", type=_parse_sigmas, default=None,
                   help="per-channel noise levels r,g,b to inject")
    b.add_argument("--variants", default="mcwnnm",
                   help="comma-separated list of variants to run")
    b.add_argument("--clip", action="store_true",
                   help="clamp noisy images to [0, 255] before denoising")
    b.add_argument("--out-dir", type=Path, default=None,
                   help="write denoised images here")
    _add_param_args(b)
    b.set_defaults(func=_cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.sigmas is None:
        if args.command == "bench" or not args.estimate:
            parser.error("sigmas required (pass --sigmas r,g,b"
                         + ("" if args.command == "bench" else " or --estimate")
                         + ")")
    try:
        return args.func(args)
    except (ImageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
