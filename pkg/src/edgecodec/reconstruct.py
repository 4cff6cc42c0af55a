"""Drawing rasterization and classical color reconstruction.

Rasterization must be pixel-identical on the encoder and decoder: integer
Bresenham for lines, adaptive midpoint subdivision (flatness 0.25 px) for
curves, with a fixed tie rounding rule when flattened points are snapped to
the grid (x rounds half right, y rounds half toward smaller values).

Reconstruction solves a per-channel discrete Laplace system: sample pixels
are held fixed, borders are zero-flux, and 4-neighbor links touching an
edge pixel get conductance edge_conductance. Components that positive
links connect to no sample are filled with the mean of all samples, or a
fixed gray when there are none.
"""

import os
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .image_io import BinaryMap, RasterImage, save_image
from .vectorizer import Curve, Line, Move, VectorDrawing

FLATNESS = 0.25

_CROSS = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=np.int32)

_MAX_SPLIT_DEPTH = 24


@dataclass
class ReconParams:
    max_iterations: int = 5000
    tolerance: float = 1e-4
    edge_conductance: float = 0.0
    fallback_gray: int = 128

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if self.tolerance <= 0:
            raise ValueError(f"tolerance must be positive, got {self.tolerance}")
        if not 0.0 <= self.edge_conductance <= 1.0:
            raise ValueError(f"edge_conductance must be in [0, 1], got {self.edge_conductance}")
        if not 0 <= self.fallback_gray <= 255:
            raise ValueError(f"fallback_gray must be a byte, got {self.fallback_gray}")


def _bresenham(x0: int, y0: int, x1: int, y1: int, bits: np.ndarray):
    dx = abs(x1 - x0)
    dy = -abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    x, y = x0, y0
    while True:
        bits[y, x] = True
        if x == x1 and y == y1:
            return
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x += sx
        if e2 <= dx:
            err += dx
            y += sy


def _snap(x: float, y: float) -> tuple[int, int]:
    # x ties round right (+x), y ties round toward smaller y.
    return int(np.floor(x + 0.5)), int(np.ceil(y - 0.5))


def _flat_enough(p0, p1, p2, p3) -> bool:
    cx = p3[0] - p0[0]
    cy = p3[1] - p0[1]
    norm = (cx * cx + cy * cy) ** 0.5
    if norm == 0:
        d1 = ((p1[0] - p0[0]) ** 2 + (p1[1] - p0[1]) ** 2) ** 0.5
        d2 = ((p2[0] - p0[0]) ** 2 + (p2[1] - p0[1]) ** 2) ** 0.5
        return max(d1, d2) <= FLATNESS
    d1 = abs((p1[0] - p0[0]) * cy - (p1[1] - p0[1]) * cx) / norm
    d2 = abs((p2[0] - p0[0]) * cy - (p2[1] - p0[1]) * cx) / norm
    return max(d1, d2) <= FLATNESS


def _flatten(p0, p1, p2, p3, depth: int, out: list):
    if depth >= _MAX_SPLIT_DEPTH or _flat_enough(p0, p1, p2, p3):
        out.append(p3)
        return
    # de Casteljau split at t = 0.5
    m01 = ((p0[0] + p1[0]) / 2, (p0[1] + p1[1]) / 2)
    m12 = ((p1[0] + p2[0]) / 2, (p1[1] + p2[1]) / 2)
    m23 = ((p2[0] + p3[0]) / 2, (p2[1] + p3[1]) / 2)
    m012 = ((m01[0] + m12[0]) / 2, (m01[1] + m12[1]) / 2)
    m123 = ((m12[0] + m23[0]) / 2, (m12[1] + m23[1]) / 2)
    mid = ((m012[0] + m123[0]) / 2, (m012[1] + m123[1]) / 2)
    _flatten(p0, m01, m012, mid, depth + 1, out)
    _flatten(mid, m123, m23, p3, depth + 1, out)


def rasterize(d: VectorDrawing) -> BinaryMap:
    """1-pixel strokes of every Line and Curve op."""
    bits = np.zeros((d.height, d.width), dtype=np.bool_)
    cur = None
    for op in d.ops:
        if isinstance(op, Move):
            cur = (op.x, op.y)
        elif isinstance(op, Line):
            _bresenham(cur[0], cur[1], op.x, op.y, bits)
            cur = (op.x, op.y)
        else:
            pts: list = []
            _flatten(
                (float(cur[0]), float(cur[1])),
                (float(op.xa), float(op.ya)),
                (float(op.xb), float(op.yb)),
                (float(op.xt), float(op.yt)),
                0,
                pts,
            )
            px, py = cur
            for p in pts:
                nx, ny = _snap(p[0], p[1])
                if (nx, ny) != (px, py):
                    _bresenham(px, py, nx, ny, bits)
                    px, py = nx, ny
            if (px, py) != (op.xt, op.yt):
                _bresenham(px, py, op.xt, op.yt, bits)
            cur = (op.xt, op.yt)
    return BinaryMap(bits)


def build_mask_color(
    positions: list[tuple[int, int]], colors: np.ndarray, width: int, height: int
) -> tuple[BinaryMap, RasterImage]:
    """Scatter (position, color) pairs into a mask map and a color plane."""
    if len(positions) != len(colors):
        raise ValueError(f"{len(positions)} positions vs {len(colors)} colors")
    mask = np.zeros((height, width), dtype=np.bool_)
    plane = np.zeros((height, width, 3), dtype=np.uint8)
    for (x, y), rgb in zip(positions, colors):
        if not (0 <= x < width and 0 <= y < height):
            raise ValueError(f"position ({x}, {y}) outside {width}x{height}")
        mask[y, x] = True
        plane[y, x] = rgb
    return BinaryMap(mask), RasterImage(plane)


def _link_weights(edge: np.ndarray, conduct: float):
    h, w = edge.shape
    # weight of the link to the neighbor in each direction; 0 past borders
    right = np.zeros((h, w))
    right[:, :-1] = np.where(edge[:, :-1] | edge[:, 1:], conduct, 1.0)
    left = np.zeros((h, w))
    left[:, 1:] = right[:, :-1]
    down = np.zeros((h, w))
    down[:-1, :] = np.where(edge[:-1, :] | edge[1:, :], conduct, 1.0)
    up = np.zeros((h, w))
    up[1:, :] = down[:-1, :]
    return up, down, left, right


def _components(edge: np.ndarray, conduct: float) -> np.ndarray:
    h, w = edge.shape
    if conduct > 0:
        return np.zeros((h, w), dtype=np.int64)
    labels, n = ndimage.label(~edge, structure=_CROSS)
    comp = labels.astype(np.int64)
    # each edge pixel is isolated under zero-conductance links
    k = int(edge.sum())
    comp[edge] = np.arange(n + 1, n + 1 + k)
    return comp


def diffuse_reconstruct(
    edges: BinaryMap, mask: BinaryMap, colors: RasterImage, params: ReconParams | None = None
) -> RasterImage:
    """Fill unknown pixels by iterating the weighted-mean (Laplace) update.

    Gauss-Seidel with a fixed checkerboard sweep (even parity cells first),
    stopping when the largest per-pixel update on the 0..1 scale drops
    below tolerance or after max_iterations. Output at sample pixels equals
    the sample color exactly.
    """
    if params is None:
        params = ReconParams()
    if colors.channels != 3:
        raise ValueError("colors must be 3-channel")
    h, w = edges.height, edges.width
    if (mask.height, mask.width) != (h, w) or (colors.height, colors.width) != (h, w):
        raise ValueError("edges, mask, and colors must share bounds")
    edge = edges.bits
    samp = mask.bits
    up, down, left, right = _link_weights(edge, params.edge_conductance)
    wsum = up + down + left + right

    comp = _components(edge, params.edge_conductance)
    ncomp = int(comp.max()) + 1
    samp_flat = comp[samp]
    have = np.zeros(ncomp, dtype=np.bool_)
    have[samp_flat] = True
    any_samples = bool(samp.any())

    yy, xx = np.indices((h, w))
    par0 = (xx + yy) % 2 == 0

    out = np.zeros((h, w, 3), dtype=np.uint8)
    for ch in range(3):
        vals = colors.samples[:, :, ch].astype(np.float64) / 255.0
        if any_samples:
            fallback = float(vals[samp].mean())
        else:
            fallback = params.fallback_gray / 255.0

        u = np.full((h, w), fallback)
        if any_samples:
            sums = np.bincount(samp_flat, weights=vals[samp], minlength=ncomp)
            counts = np.bincount(samp_flat, minlength=ncomp)
            warm = np.where(counts > 0, sums / np.maximum(counts, 1), fallback)
            u = warm[comp]
        u[samp] = vals[samp]

        frozen = ~have[comp]  # no sample reachable: keep the fill value
        free = ~samp & ~frozen & (wsum > 0)
        if free.any():
            den = np.where(free, wsum, 1.0)
            for _ in range(params.max_iterations):
                worst = 0.0
                for parity in (par0, ~par0):
                    act = free & parity
                    num = np.zeros((h, w))
                    num[1:, :] += up[1:, :] * u[:-1, :]
                    num[:-1, :] += down[:-1, :] * u[1:, :]
                    num[:, 1:] += left[:, 1:] * u[:, :-1]
                    num[:, :-1] += right[:, :-1] * u[:, 1:]
                    nxt = num / den
                    delta = np.abs(nxt - u)[act]
                    if delta.size:
                        worst = max(worst, float(delta.max()))
                    u[act] = nxt[act]
                if worst < params.tolerance:
                    break
        out[:, :, ch] = np.clip(np.floor(u * 255.0 + 0.5), 0, 255).astype(np.uint8)
    return RasterImage(out)


def export_emc(edges: BinaryMap, mask: BinaryMap, colors: RasterImage, directory) -> None:
    """Write E.pgm, M.pgm (255 = set) and C.ppm into directory."""
    os.makedirs(directory, exist_ok=True)
    e_img = RasterImage((edges.bits.astype(np.uint8)) * 255)
    m_img = RasterImage((mask.bits.astype(np.uint8)) * 255)
    save_image(e_img, os.path.join(directory, "E.pgm"))
    save_image(m_img, os.path.join(directory, "M.pgm"))
    save_image(colors, os.path.join(directory, "C.ppm"))
