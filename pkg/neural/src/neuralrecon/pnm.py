"""Minimal binary PNM reading.

This package consumes the codec's exported planes (E.pgm, M.pgm, C.ppm)
and ground-truth P6 images purely as files; it deliberately has no code
dependency on the codec itself. Only the subset of PNM we actually
receive is supported: binary P5/P6, maxval 255, '#' comments.
"""

import numpy as np


class PnmError(ValueError):
    pass


def _tokens(data: bytes):
    """Yield header tokens, skipping whitespace and # comments, then the
    offset where the raster starts."""
    i = 0
    out = []
    while len(out) < 4:
        while i < len(data) and data[i : i + 1].isspace():
            i += 1
        if i >= len(data):
            raise PnmError("truncated header")
        if data[i : i + 1] == b"#":
            while i < len(data) and data[i] != 0x0A:
                i += 1
            continue
        j = i
        while j < len(data) and not data[j : j + 1].isspace():
            j += 1
        out.append(data[i:j])
        i = j
    return out, i + 1  # single whitespace byte separates header from raster


def load_pnm(path) -> np.ndarray:
    """Read a P5 or P6 file as (h, w) or (h, w, 3) uint8."""
    with open(path, "rb") as fh:
        data = fh.read()
    (magic, w_tok, h_tok, maxval_tok), offset = _tokens(data)
    if magic not in (b"P5", b"P6"):
        raise PnmError(f"unsupported magic {magic!r}")
    try:
        w, h, maxval = int(w_tok), int(h_tok), int(maxval_tok)
    except ValueError as exc:
        raise PnmError(f"non-numeric header field: {exc}") from None
    if w < 1 or h < 1:
        raise PnmError(f"bad bounds {w}x{h}")
    if maxval != 255:
        raise PnmError(f"only maxval 255 is supported, got {maxval}")
    channels = 3 if magic == b"P6" else 1
    need = w * h * channels
    raster = data[offset : offset + need]
    if len(raster) != need:
        raise PnmError(f"raster needs {need} bytes, have {len(raster)}")
    arr = np.frombuffer(raster, dtype=np.uint8)
    if channels == 1:
        return arr.reshape(h, w)
    return arr.reshape(h, w, 3)


def save_pnm(arr: np.ndarray, path) -> None:
    """Write (h, w) uint8 as P5 or (h, w, 3) as P6."""
    arr = np.ascontiguousarray(arr, dtype=np.uint8)
    if arr.ndim == 2:
        magic = b"P5"
        h, w = arr.shape
    elif arr.ndim == 3 and arr.shape[2] == 3:
        magic = b"P6"
        h, w = arr.shape[:2]
    else:
        raise PnmError(f"unsupported array shape {arr.shape}")
    with open(path, "wb") as fh:
        fh.write(magic + b"\n%d %d\n255\n" % (w, h))
        fh.write(arr.tobytes())
