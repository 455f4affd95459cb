"""
Image decoding, encoding and resizing.

Images are float32 arrays `[H, W, 3]` with values in [0, 1]. PNG (and whatever else Pillow reads)
goes through Pillow; binary PPM (P6) and PGM (P5) are parsed here so the formats round-trip
without a codec.
"""

from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from sepvote.errors import ImageDecodeError, ShapeError

NETPBM_MAGIC = (b"P5", b"P6")


def _netpbm_header(raw: bytes, path: Path) -> tuple[bytes, int, int, int, int]:
    """Parse magic, width, height and maxval; return them with the raster offset."""
    tokens: list[bytes] = []
    pos = 0
    while len(tokens) < 4:
        while pos < len(raw) and raw[pos : pos + 1].isspace():
            pos += 1
        if pos < len(raw) and raw[pos : pos + 1] == b"#":
            while pos < len(raw) and raw[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ImageDecodeError(f"Truncated header in {path}")
        tokens.append(raw[start:pos])
    # Exactly one whitespace byte separates the header from the raster.
    pos += 1
    magic = tokens[0]
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError as err:
        raise ImageDecodeError(f"Malformed header in {path}: {err}") from err
    if width < 1 or height < 1 or not 0 < maxval < 65536:
        raise ImageDecodeError(f"Invalid dimensions or maxval in {path}")
    return magic, width, height, maxval, pos


def _decode_netpbm(raw: bytes, path: Path) -> np.ndarray:
    magic, width, height, maxval, offset = _netpbm_header(raw, path)
    channels = 3 if magic == b"P6" else 1
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype(np.uint8)
    expected = width * height * channels * dtype.itemsize
    raster = raw[offset : offset + expected]
    if len(raster) < expected:
        raise ImageDecodeError(f"Truncated raster in {path}: {len(raster)} of {expected} bytes")
    values = np.frombuffer(raster, dtype=dtype).reshape(height, width, channels)
    if np.any(values > maxval):
        raise ImageDecodeError(f"Sample above maxval {maxval} in {path}")
    image = values.astype(np.float32) / np.float32(maxval)
    return np.repeat(image, 3, axis=2) if channels == 1 else image


def _decode_pillow(path: Path) -> np.ndarray:
    try:
        with Image.open(path) as img:
            img.load()
            if img.mode in ("I;16", "I;16B", "I"):
                arr = np.asarray(img, dtype=np.float32) / np.float32(65535)
                arr = arr[:, :, None]
            else:
                arr = np.asarray(img.convert("RGB"), dtype=np.float32) / np.float32(255)
    except UnidentifiedImageError as err:
        raise ImageDecodeError(f"Unsupported image format: {path}") from err
    except (OSError, SyntaxError, ValueError) as err:
        raise ImageDecodeError(f"Cannot decode {path}: {err}") from err
    if arr.shape[2] == 1:
        arr = np.repeat(arr, 3, axis=2)
    return np.ascontiguousarray(np.clip(arr, 0.0, 1.0))


def decode_image(path: str | Path) -> np.ndarray:
    """
    Read an image as `[H, W, 3]` float32 values in [0, 1].

    Grayscale sources are replicated to three channels.

    Raises:
        ImageDecodeError: The file is missing, truncated or in an unsupported format.
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as err:
        raise ImageDecodeError(f"Cannot read {path}: {err}") from err
    if raw[:2] in NETPBM_MAGIC:
        return _decode_netpbm(raw, path)
    return _decode_pillow(path)


def quantize(image: np.ndarray) -> np.ndarray:
    """Round [0, 1] values to uint8."""
    return np.clip(np.rint(np.asarray(image, dtype=np.float64) * 255.0), 0, 255).astype(np.uint8)


def encode_image(image: np.ndarray, path: str | Path) -> Path:
    """
    Write `[H, W, 3]` values in [0, 1] as 8-bit PPM (`.ppm`) or through Pillow (any other suffix).

    Raises:
        ValueError: The array is not `[H, W, 3]`.
    """
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[2] != 3:
        raise ShapeError(f"Expected an [H, W, 3] image, got {image.shape}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pixels = quantize(image)
    if path.suffix.lower() == ".ppm":
        h, w = pixels.shape[:2]
        path.write_bytes(b"P6\n%d %d\n255\n" % (w, h) + pixels.tobytes())
    else:
        Image.fromarray(pixels).save(path)
    return path


def _sample_positions(source: int, target: int) -> np.ndarray:
    if target == 1:
        return np.array([(source - 1) / 2.0])
    return np.linspace(0.0, source - 1, target)


def resize_bilinear(image: np.ndarray, target: int) -> np.ndarray:
    """
    Bilinear resize to `[target, target, C]` with corner pixel centres aligned.

    Output pixel i samples source coordinate i * (H - 1) / (target - 1).

    Raises:
        ValueError: The source is smaller than 2x2 or `target` is below 1.
    """
    image = np.asarray(image)
    if image.ndim != 3:
        raise ShapeError(f"Expected an [H, W, C] image, got {image.shape}")
    h, w = image.shape[:2]
    if h < 2 or w < 2:
        raise ShapeError(f"Cannot resize a degenerate {h}x{w} image")
    if target < 1:
        raise ShapeError(f"Target side must be at least 1, got {target}")
    if (h, w) == (target, target):
        return image.copy()

    src = image.astype(np.float64)
    ys, xs = _sample_positions(h, target), _sample_positions(w, target)
    y0 = np.floor(ys).astype(np.int64)
    x0 = np.floor(xs).astype(np.int64)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    wy = (ys - y0)[:, None, None]
    wx = (xs - x0)[None, :, None]

    top = src[y0][:, x0] * (1 - wx) + src[y0][:, x1] * wx
    bottom = src[y1][:, x0] * (1 - wx) + src[y1][:, x1] * wx
    return (top * (1 - wy) + bottom * wy).astype(image.dtype)
