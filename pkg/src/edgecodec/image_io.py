"""Raster image containers and binary PNM (P5/P6) file I/O.

Images are stored row-major, channel-interleaved, 8 bits per sample.
Only maxval 255 is supported; anything else is a parse error.
"""

import numpy as np

from .errors import (
    PnmHeaderError,
    PnmMaxvalError,
    PnmTruncatedError,
    UnsupportedPnmError,
)

# BT.601 luma weights for the color-to-gray conversion.
_LUMA_R = 0.299
_LUMA_G = 0.587
_LUMA_B = 0.114


class RasterImage:
    """8-bit raster image with 1 (gray) or 3 (RGB) channels."""

    def __init__(self, samples: np.ndarray):
        samples = np.asarray(samples)
        if samples.dtype != np.uint8:
            raise ValueError(f"samples must be uint8, got {samples.dtype}")
        if samples.ndim == 2:
            samples = samples[:, :, np.newaxis]
        if samples.ndim != 3 or samples.shape[2] not in (1, 3):
            raise ValueError(f"bad sample shape {samples.shape}")
        if samples.shape[0] < 1 or samples.shape[1] < 1:
            raise ValueError("image must be at least 1x1")
        self.samples = samples

    @property
    def height(self) -> int:
        return self.samples.shape[0]

    @property
    def width(self) -> int:
        return self.samples.shape[1]

    @property
    def channels(self) -> int:
        return self.samples.shape[2]

    @classmethod
    def blank(cls, width: int, height: int, channels: int = 3, value: int = 0) -> "RasterImage":
        return cls(np.full((height, width, channels), value, dtype=np.uint8))

    def __eq__(self, other) -> bool:
        if not isinstance(other, RasterImage):
            return NotImplemented
        return self.samples.shape == other.samples.shape and np.array_equal(
            self.samples, other.samples
        )

    def __repr__(self) -> str:
        return f"RasterImage({self.width}x{self.height}x{self.channels})"


class BinaryMap:
    """Boolean pixel map aligned with an image grid."""

    def __init__(self, bits: np.ndarray):
        bits = np.asarray(bits)
        if bits.dtype != np.bool_:
            raise ValueError(f"bits must be bool, got {bits.dtype}")
        if bits.ndim != 2 or bits.shape[0] < 1 or bits.shape[1] < 1:
            raise ValueError(f"bad map shape {bits.shape}")
        self.bits = bits

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @classmethod
    def blank(cls, width: int, height: int) -> "BinaryMap":
        return cls(np.zeros((height, width), dtype=np.bool_))

    def count(self) -> int:
        return int(self.bits.sum())

    def __eq__(self, other) -> bool:
        if not isinstance(other, BinaryMap):
            return NotImplemented
        return self.bits.shape == other.bits.shape and np.array_equal(self.bits, other.bits)

    def __repr__(self) -> str:
        return f"BinaryMap({self.width}x{self.height}, {self.count()} set)"


def to_grayscale(img: RasterImage) -> RasterImage:
    """BT.601 luma conversion, rounded to the nearest integer.

    1-channel input is returned unchanged, so the conversion is idempotent.
    """
    if img.channels == 1:
        return img
    rgb = img.samples.astype(np.float64)
    luma = _LUMA_R * rgb[:, :, 0] + _LUMA_G * rgb[:, :, 1] + _LUMA_B * rgb[:, :, 2]
    gray = np.floor(luma + 0.5).astype(np.uint8)
    return RasterImage(gray)


def _next_token(data: bytes, pos: int) -> tuple[bytes, int]:
    # Skip whitespace and '#' comment lines, then collect one token.
    n = len(data)
    while pos < n:
        c = data[pos]
        if c in b" \t\r\n\v\f":
            pos += 1
        elif c == 0x23:  # '#'
            while pos < n and data[pos] not in b"\r\n":
                pos += 1
        else:
            break
    if pos >= n:
        raise PnmHeaderError("header ended early")
    start = pos
    while pos < n and data[pos] not in b" \t\r\n\v\f":
        pos += 1
    return data[start:pos], pos


def _parse_dim(token: bytes, what: str) -> int:
    try:
        value = int(token)
    except ValueError:
        raise PnmHeaderError(f"non-numeric {what}: {token!r}") from None
    if value < 1:
        raise PnmHeaderError(f"{what} must be positive, got {value}")
    return value


def load_image(path) -> RasterImage:
    """Read a binary P5 (gray) or P6 (RGB) file."""
    with open(path, "rb") as fh:
        data = fh.read()
    magic = data[:2]
    if magic not in (b"P5", b"P6"):
        raise UnsupportedPnmError(f"unsupported magic {magic!r}")
    channels = 1 if magic == b"P5" else 3
    token, pos = _next_token(data, 2)
    width = _parse_dim(token, "width")
    token, pos = _next_token(data, pos)
    height = _parse_dim(token, "height")
    token, pos = _next_token(data, pos)
    try:
        maxval = int(token)
    except ValueError:
        raise PnmHeaderError(f"non-numeric maxval: {token!r}") from None
    if maxval != 255:
        raise PnmMaxvalError(f"only maxval 255 supported, got {maxval}")
    # Exactly one whitespace byte separates the header from the payload.
    if pos >= len(data) or data[pos] not in b" \t\r\n\v\f":
        raise PnmHeaderError("missing whitespace before payload")
    pos += 1
    need = width * height * channels
    payload = data[pos : pos + need]
    if len(payload) < need:
        raise PnmTruncatedError(f"payload has {len(payload)} of {need} bytes")
    samples = np.frombuffer(payload, dtype=np.uint8).reshape(height, width, channels)
    return RasterImage(samples.copy())


def save_image(img: RasterImage, path) -> None:
    """Write a binary P5 or P6 file with a single whitespace after each header field."""
    magic = b"P5" if img.channels == 1 else b"P6"
    header = magic + b"\n%d %d\n255\n" % (img.width, img.height)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(img.samples.tobytes())
