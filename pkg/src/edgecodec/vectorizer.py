"""Pixel chains to vector paths: tracing, fitting, and a compact byte format.

Chains are traced deterministically from a thinned edge map, split at
junction pixels, then fitted with straight lines and cubic segments under a
max-squared-error tolerance (corner pixels are split first). The resulting
drawing serializes to a byte stream of op markers and zigzag varint deltas.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    CoordinateRangeError,
    PathStructureError,
    PathTruncatedError,
    UnknownMarkerError,
    VarintOverflowError,
)
from .image_io import BinaryMap

MARKER_MOVE = 0x4D
MARKER_LINE = 0x4C
MARKER_CURVE = 0x43

DEFAULT_FIT_TOL = 4.0

# Corner pre-split: direction change measured over this many pixels each way.
CORNER_WINDOW = 4
CORNER_ANGLE_DEG = 60.0

# Varints longer than this cannot hold a valid coordinate delta.
_MAX_VARINT_BYTES = 5

# 8-neighborhood in raster order (dx, dy).
_N8 = ((-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1))


@dataclass(frozen=True)
class Move:
    x: int
    y: int


@dataclass(frozen=True)
class Line:
    x: int
    y: int


@dataclass(frozen=True)
class Curve:
    xa: int
    ya: int
    xb: int
    yb: int
    xt: int
    yt: int


PathOp = Move | Line | Curve

# A pixel chain is an ordered list of (x, y) tuples; consecutive entries are
# 8-adjacent and nothing repeats except first == last on a closed chain.
PixelChain = list[tuple[int, int]]


@dataclass
class VectorDrawing:
    width: int
    height: int
    ops: list

    def __post_init__(self):
        if not 1 <= self.width <= 65535 or not 1 <= self.height <= 65535:
            raise ValueError(f"bad drawing bounds {self.width}x{self.height}")
        self.validate()

    def validate(self):
        prev_move = False
        for i, op in enumerate(self.ops):
            if i == 0 and not isinstance(op, Move):
                raise ValueError("drawing must start with a Move")
            if isinstance(op, Move):
                if prev_move:
                    raise ValueError(f"consecutive Move ops at index {i}")
                prev_move = True
                coords = ((op.x, op.y),)
            else:
                prev_move = False
                if isinstance(op, Line):
                    coords = ((op.x, op.y),)
                else:
                    coords = ((op.xa, op.ya), (op.xb, op.yb), (op.xt, op.yt))
            for x, y in coords:
                if not (0 <= x < self.width and 0 <= y < self.height):
                    raise ValueError(f"coordinate ({x}, {y}) outside {self.width}x{self.height}")
        if self.ops and isinstance(self.ops[-1], Move):
            raise ValueError("trailing Move op")

    def op_counts(self) -> tuple[int, int, int]:
        """(moves, lines, curves)"""
        m = sum(1 for op in self.ops if isinstance(op, Move))
        l = sum(1 for op in self.ops if isinstance(op, Line))
        c = sum(1 for op in self.ops if isinstance(op, Curve))
        return m, l, c


# --- chain tracing ---


def trace_chains(m: BinaryMap) -> list[PixelChain]:
    """Split a thinned map into pixel chains.

    Adjacency is corner-reduced: a diagonal link is ignored whenever a set
    4-neighbor bridges the same two pixels, so the pixels beside a crossing
    do not read as extra junctions. Junction pixels (3 or more reduced
    neighbors) terminate chains; each belongs to exactly one chain,
    whichever reaches it first. Scan order: row-major endpoints, then
    junctions, then leftover cycles. Closed chains repeat their first pixel
    at the end. Isolated pixels are dropped.
    """
    bits = m.bits
    ys, xs = np.nonzero(bits)
    if len(xs) == 0:
        return []
    pixels = set(zip(xs.tolist(), ys.tolist()))

    def reduced_neighbors(p):
        x, y = p
        out = []
        for dx, dy in _N8:
            q = (x + dx, y + dy)
            if q not in pixels:
                continue
            if dx and dy and ((x + dx, y) in pixels or (x, y + dy) in pixels):
                continue
            out.append(q)
        return out

    nbrs = {p: reduced_neighbors(p) for p in pixels}
    degree = {p: len(n) for p, n in nbrs.items()}
    visited = set()
    chains: list[PixelChain] = []

    def walk(start: tuple[int, int]) -> PixelChain:
        chain = [start]
        visited.add(start)
        cur = start
        while True:
            if degree[cur] >= 3 and len(chain) > 1:
                break
            nxt = None
            for q in nbrs[cur]:
                if q not in visited:
                    nxt = q
                    break
            if nxt is None:
                break
            visited.add(nxt)
            chain.append(nxt)
            cur = nxt
        return chain

    ordered = sorted(pixels, key=lambda p: (p[1], p[0]))
    endpoints = [p for p in ordered if degree[p] == 1]
    junctions = [p for p in ordered if degree[p] >= 3]

    for p in endpoints:
        if p not in visited:
            chains.append(walk(p))

    for j in junctions:
        if j not in visited:
            chains.append(walk(j))
        while True:
            arm = next((q for q in nbrs[j] if q not in visited), None)
            if arm is None:
                break
            chains.append(walk(arm))

    for p in ordered:
        if p not in visited and degree[p] > 0:
            chain = walk(p)
            # Leftovers are pure cycles; mark closure explicitly.
            if len(chain) > 2:
                chain.append(chain[0])
            chains.append(chain)

    return chains


# --- cubic helpers ---


def _bezier_point(ctrl: np.ndarray, t):
    u = 1.0 - t
    return (
        np.multiply.outer(u * u * u, ctrl[0])
        + np.multiply.outer(3.0 * u * u * t, ctrl[1])
        + np.multiply.outer(3.0 * u * t * t, ctrl[2])
        + np.multiply.outer(t * t * t, ctrl[3])
    )


def _bezier_d1(ctrl: np.ndarray, t):
    u = 1.0 - t
    return (
        np.multiply.outer(3.0 * u * u, ctrl[1] - ctrl[0])
        + np.multiply.outer(6.0 * u * t, ctrl[2] - ctrl[1])
        + np.multiply.outer(3.0 * t * t, ctrl[3] - ctrl[2])
    )


def _bezier_d2(ctrl: np.ndarray, t):
    u = 1.0 - t
    return np.multiply.outer(6.0 * u, ctrl[2] - 2.0 * ctrl[1] + ctrl[0]) + np.multiply.outer(
        6.0 * t, ctrl[3] - 2.0 * ctrl[2] + ctrl[1]
    )


def _chord_params(pts: np.ndarray) -> np.ndarray:
    d = np.sqrt(((pts[1:] - pts[:-1]) ** 2).sum(axis=1))
    u = np.concatenate(([0.0], np.cumsum(d)))
    total = u[-1]
    if total <= 0:
        return np.linspace(0.0, 1.0, len(pts))
    return u / total


def _refit_params(ctrl: np.ndarray, pts: np.ndarray, u: np.ndarray) -> np.ndarray:
    # One Newton step pulling each parameter toward its closest curve point.
    b = _bezier_point(ctrl, u)
    d1 = _bezier_d1(ctrl, u)
    d2 = _bezier_d2(ctrl, u)
    diff = b - pts
    num = (diff * d1).sum(axis=1)
    den = (d1 * d1).sum(axis=1) + (diff * d2).sum(axis=1)
    ok = np.abs(den) > 1e-12
    step = np.where(ok, num / np.where(ok, den, 1.0), 0.0)
    return np.clip(u - step, 0.0, 1.0)


def _fit_cubic_ctrl(pts: np.ndarray, u: np.ndarray) -> np.ndarray | None:
    n = len(pts)
    v0, v3 = pts[0], pts[-1]
    b1 = 3.0 * u * (1.0 - u) ** 2
    b2 = 3.0 * u * u * (1.0 - u)
    rhs = pts - np.outer((1.0 - u) ** 3, v0) - np.outer(u**3, v3)
    a11 = float((b1 * b1).sum())
    a12 = float((b1 * b2).sum())
    a22 = float((b2 * b2).sum())
    det = a11 * a22 - a12 * a12
    if abs(det) < 1e-9:
        return None
    r1 = b1 @ rhs
    r2 = b2 @ rhs
    p1 = (a22 * r1 - a12 * r2) / det
    p2 = (a11 * r2 - a12 * r1) / det
    return np.array([v0, p1, p2, v3])


def _seg_sq_err(ctrl: np.ndarray, pts: np.ndarray, u: np.ndarray) -> tuple[float, int]:
    diff = _bezier_point(ctrl, u) - pts
    err = (diff * diff).sum(axis=1)
    idx = int(err.argmax())
    return float(err[idx]), idx


def _point_segment_sq(pts: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0:
        d = pts - a
        return (d * d).sum(axis=1)
    t = np.clip((pts - a) @ ab / denom, 0.0, 1.0)
    proj = a + np.outer(t, ab)
    d = pts - proj
    return (d * d).sum(axis=1)


def _corner_splits(pts: np.ndarray) -> list[int]:
    n = len(pts)
    if n < 3:
        return []
    w = CORNER_WINDOW
    angles = np.zeros(n)
    for i in range(1, n - 1):
        a = max(0, i - w)
        b = min(n - 1, i + w)
        v1 = pts[i] - pts[a]
        v2 = pts[b] - pts[i]
        n1 = math.hypot(v1[0], v1[1])
        n2 = math.hypot(v2[0], v2[1])
        if n1 == 0 or n2 == 0:
            continue
        cr = v1[0] * v2[1] - v1[1] * v2[0]
        dt = v1[0] * v2[0] + v1[1] * v2[1]
        angles[i] = abs(math.degrees(math.atan2(cr, dt)))
    flagged = angles > CORNER_ANGLE_DEG
    splits = []
    i = 1
    while i < n - 1:
        if flagged[i]:
            j = i
            while j + 1 < n - 1 and flagged[j + 1]:
                j += 1
            run = angles[i : j + 1]
            splits.append(i + int(run.argmax()))
            i = j + 1
        i += 1
    return splits


def _clamp_ctrl(ctrl: np.ndarray, width: int, height: int) -> np.ndarray:
    q = np.floor(ctrl + 0.5)
    q[:, 0] = np.clip(q[:, 0], 0, width - 1)
    q[:, 1] = np.clip(q[:, 1], 0, height - 1)
    return q


def _fit_segment(pts: np.ndarray, tol: float, width: int, height: int, out: list):
    """Append Line/Curve ops covering pts (first point assumed already placed)."""
    n = len(pts)
    if n <= 2:
        out.append(Line(int(pts[-1][0]), int(pts[-1][1])))
        return
    line_err = _point_segment_sq(pts[1:-1], pts[0], pts[-1]).max()
    if line_err <= tol:
        out.append(Line(int(pts[-1][0]), int(pts[-1][1])))
        return
    split_at = None
    if n >= 4:
        u = _chord_params(pts)
        ctrl = _fit_cubic_ctrl(pts, u)
        if ctrl is not None:
            for _ in range(2):
                u = _refit_params(ctrl, pts, u)
                refit = _fit_cubic_ctrl(pts, u)
                if refit is None:
                    break
                ctrl = refit
            # Error is judged on the integer-quantized curve actually emitted.
            q = _clamp_ctrl(ctrl, width, height)
            uq = _refit_params(q, pts, u)
            err, idx = _seg_sq_err(q, pts, uq)
            if err <= tol:
                out.append(
                    Curve(int(q[1][0]), int(q[1][1]), int(q[2][0]), int(q[2][1]),
                          int(q[3][0]), int(q[3][1]))
                )
                return
            split_at = idx
    if split_at is None or not 0 < split_at < n - 1:
        split_at = n // 2
    _fit_segment(pts[: split_at + 1], tol, width, height, out)
    _fit_segment(pts[split_at:], tol, width, height, out)


def fit_paths(
    chains: list[PixelChain], width: int, height: int, tol: float = DEFAULT_FIT_TOL
) -> VectorDrawing:
    """Fit each chain with Move + Line/Curve ops within max squared error tol.

    Lines are preferred wherever they meet the tolerance. Corner pixels
    (direction change above 60 degrees across a 4-pixel window) become hard
    split points. Chains with fewer than two distinct pixels emit nothing.
    Closed chains end with an op back to their first pixel.
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    ops: list = []
    for chain in chains:
        if len(set(chain)) < 2:
            continue
        pts = np.array(chain, dtype=np.float64)
        splits = [0] + _corner_splits(pts) + [len(pts) - 1]
        splits = sorted(set(splits))
        ops.append(Move(chain[0][0], chain[0][1]))
        for a, b in zip(splits[:-1], splits[1:]):
            _fit_segment(pts[a : b + 1], tol, width, height, ops)
    return VectorDrawing(width, height, ops)


# --- byte serialization ---


def _zigzag(n: int) -> int:
    return n * 2 if n >= 0 else -n * 2 - 1


def _unzigzag(z: int) -> int:
    return z >> 1 if z % 2 == 0 else -(z + 1) // 2


def _put_varint(buf: bytearray, value: int):
    while True:
        b = value & 0x7F
        value >>= 7
        if value:
            buf.append(b | 0x80)
        else:
            buf.append(b)
            return


def _get_varint(data: bytes, pos: int) -> tuple[int, int]:
    value = 0
    shift = 0
    for i in range(_MAX_VARINT_BYTES):
        if pos >= len(data):
            raise PathTruncatedError(f"stream ends inside a varint at offset {pos}")
        b = data[pos]
        pos += 1
        value |= (b & 0x7F) << shift
        if not b & 0x80:
            return value, pos
        shift += 7
    raise VarintOverflowError(f"varint exceeds {_MAX_VARINT_BYTES} bytes at offset {pos}")


def serialize_params(d: VectorDrawing) -> bytes:
    """Serialize ops to marker bytes plus zigzag varint coordinate deltas.

    Line and Curve coordinates are deltas from the current point; Move is a
    delta from the previous Move target (the first Move is absolute).
    """
    d.validate()
    buf = bytearray()
    cur = None
    prev_move = None
    for op in d.ops:
        if isinstance(op, Move):
            buf.append(MARKER_MOVE)
            if prev_move is None:
                _put_varint(buf, _zigzag(op.x))
                _put_varint(buf, _zigzag(op.y))
            else:
                _put_varint(buf, _zigzag(op.x - prev_move[0]))
                _put_varint(buf, _zigzag(op.y - prev_move[1]))
            prev_move = (op.x, op.y)
            cur = (op.x, op.y)
        elif isinstance(op, Line):
            buf.append(MARKER_LINE)
            _put_varint(buf, _zigzag(op.x - cur[0]))
            _put_varint(buf, _zigzag(op.y - cur[1]))
            cur = (op.x, op.y)
        else:
            buf.append(MARKER_CURVE)
            for x, y in ((op.xa, op.ya), (op.xb, op.yb), (op.xt, op.yt)):
                _put_varint(buf, _zigzag(x - cur[0]))
                _put_varint(buf, _zigzag(y - cur[1]))
            cur = (op.xt, op.yt)
    return bytes(buf)


def deserialize_params(data: bytes, width: int, height: int) -> VectorDrawing:
    """Inverse of serialize_params; rejects malformed streams with typed errors."""
    ops: list = []
    pos = 0
    cur = None
    prev_move = None
    last_was_move = False

    def coord(base, pos):
        z, pos = _get_varint(data, pos)
        value = base + _unzigzag(z)
        return value, pos

    def check(x, y):
        if not (0 <= x < width and 0 <= y < height):
            raise CoordinateRangeError(f"coordinate ({x}, {y}) outside {width}x{height}")

    while pos < len(data):
        marker = data[pos]
        pos += 1
        if marker == MARKER_MOVE:
            if last_was_move:
                raise PathStructureError(f"consecutive Move ops at offset {pos - 1}")
            bx, by = prev_move if prev_move is not None else (0, 0)
            x, pos = coord(bx, pos)
            y, pos = coord(by, pos)
            check(x, y)
            ops.append(Move(x, y))
            prev_move = (x, y)
            cur = (x, y)
            last_was_move = True
        elif marker == MARKER_LINE:
            if cur is None:
                raise PathStructureError("Line before any Move")
            x, pos = coord(cur[0], pos)
            y, pos = coord(cur[1], pos)
            check(x, y)
            ops.append(Line(x, y))
            cur = (x, y)
            last_was_move = False
        elif marker == MARKER_CURVE:
            if cur is None:
                raise PathStructureError("Curve before any Move")
            xa, pos = coord(cur[0], pos)
            ya, pos = coord(cur[1], pos)
            xb, pos = coord(cur[0], pos)
            yb, pos = coord(cur[1], pos)
            xt, pos = coord(cur[0], pos)
            yt, pos = coord(cur[1], pos)
            for x, y in ((xa, ya), (xb, yb), (xt, yt)):
                check(x, y)
            ops.append(Curve(xa, ya, xb, yb, xt, yt))
            cur = (xt, yt)
            last_was_move = False
        else:
            raise UnknownMarkerError(f"unknown marker 0x{marker:02X} at offset {pos - 1}")
    if last_was_move:
        raise PathStructureError("stream ends on a Move op")
    return VectorDrawing(width, height, ops)


def to_svg(d: VectorDrawing) -> str:
    """Debug export: one path element with M/L/C commands."""
    parts = []
    for op in d.ops:
        if isinstance(op, Move):
            parts.append(f"M {op.x} {op.y}")
        elif isinstance(op, Line):
            parts.append(f"L {op.x} {op.y}")
        else:
            parts.append(f"C {op.xa} {op.ya} {op.xb} {op.yb} {op.xt} {op.yt}")
    path = " ".join(parts)
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{d.width}" height="{d.height}" '
        f'viewBox="0 0 {d.width} {d.height}">\n'
        f'  <path d="{path}" fill="none" stroke="black" stroke-width="1"/>\n'
        f"</svg>\n"
    )
