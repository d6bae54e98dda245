"""8-bit RGB image file I/O: binary PPM (P6) and PNG truecolor.

Reading converts losslessly to float planes; writing rounds half away from
zero and clamps to [0, 255].
"""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np

from .image import ImageError, ImagePlanes


def _quantize(img: ImagePlanes) -> np.ndarray:
    # round half away from zero; values are nonnegative after clamping
    clipped = np.clip(img.planes, 0.0, 255.0)
    return np.floor(clipped + 0.5).astype(np.uint8)


def _read_ppm(path: Path) -> ImagePlanes:
    data = path.read_bytes()
    if not data.startswith(b"P6"):
        raise ImageError(f"{path}: not a binary PPM (P6) file")
    # header: magic, width, height, maxval; '#' comments allowed
    pos, fields = 2, []
    while len(fields) < 3:
        m = re.compile(rb"\s*(#[^\n]*\n|\s)*(\d+)").match(data, pos)
        if m is None:
            raise ImageError(f"{path}: malformed PPM header")
        fields.append(int(m.group(2)))
        pos = m.end()
    w, h, maxval = fields
    if maxval != 255:
        raise ImageError(f"{path}: unsupported PPM maxval {maxval}, want 255")
    pos += 1  # single whitespace byte after maxval
    raster = data[pos:pos + w * h * 3]
    if len(raster) != w * h * 3:
        raise ImageError(f"{path}: truncated PPM raster")
    rgb = np.frombuffer(raster, dtype=np.uint8).reshape(h, w, 3)
    return ImagePlanes(rgb.transpose(2, 0, 1).astype(np.float64))


def _write_ppm(path: Path, img: ImagePlanes) -> None:
    rgb = _quantize(img).transpose(1, 2, 0)
    header = f"P6\n{img.width} {img.height}\n255\n".encode()
    path.write_bytes(header + rgb.tobytes())


def _read_png(path: Path) -> ImagePlanes:
    from PIL import Image

    with path.open("rb") as fh:
        header = fh.read(25)
    # IHDR bit depth lives at offset 24; Pillow would quietly downconvert
    if len(header) == 25 and header[24] != 8:
        raise ImageError(f"{path}: unsupported PNG bit depth {header[24]}; "
                         "only 8-bit truecolor (RGB) is supported")
    with Image.open(path) as im:
        if im.mode != "RGB":
            raise ImageError(
                f"{path}: unsupported PNG mode {im.mode!r}; "
                "only 8-bit truecolor (RGB) is supported")
        rgb = np.asarray(im, dtype=np.uint8)
    return ImagePlanes(rgb.transpose(2, 0, 1).astype(np.float64))


def _write_png(path: Path, img: ImagePlanes) -> None:
    from PIL import Image

    rgb = _quantize(img).transpose(1, 2, 0)
    Image.fromarray(rgb, mode="RGB").save(path, format="PNG")


def image_read(path) -> ImagePlanes:
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix in (".ppm", ".pnm"):
        return _read_ppm(path)
    if suffix == ".png":
        return _read_png(path)
    raise ImageError(f"{path}: unsupported image format {suffix!r}; "
                     "use .ppm or .png")


def image_write(path, img: ImagePlanes) -> None:
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix in (".ppm", ".pnm"):
        _write_ppm(path, img)
    elif suffix == ".png":
        _write_png(path, img)
    else:
        raise ImageError(f"{path}: unsupported image format {suffix!r}; "
                         "use .ppm or .png")
