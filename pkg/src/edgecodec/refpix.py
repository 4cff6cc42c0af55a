"""Reference pixel placement: positions derived from decoded geometry only.

Both endpoints of the pipeline run these rules on the same drawing, so the
color stream needs no position side information. Lines get a pair of points
straddling the midpoint; curves get one point on the inner (concave) side
of the contact point, where the curve tangent runs parallel to its chord.

All rounding rules here are part of the format: changing any of them breaks
position agreement between encoder and decoder.
"""

import math
from dataclasses import dataclass

import numpy as np

from .image_io import BinaryMap, RasterImage
from .vectorizer import Curve, Line, Move, VectorDrawing


@dataclass(frozen=True)
class SamplingParams:
    """Geometry constants for reference point derivation."""

    offset_d: int = 2
    min_segment_len: float = 4.0
    collision_search: int = 3

    def __post_init__(self):
        if self.offset_d < 1:
            raise ValueError(f"offset_d must be >= 1, got {self.offset_d}")
        if self.min_segment_len < 0:
            raise ValueError(f"min_segment_len must be >= 0, got {self.min_segment_len}")
        if self.collision_search < 0:
            raise ValueError(f"collision_search must be >= 0, got {self.collision_search}")


@dataclass(frozen=True)
class RefSample:
    """A sampling position plus the axis/direction it was offset along."""

    x: int
    y: int
    axis: tuple[int, int]  # unit step: (0, 1) vertical or (1, 0) horizontal
    direction: int  # +1 or -1 along axis


def _round_half_up(v: float) -> int:
    return int(math.floor(v + 0.5))


def _round_half_down(v: float) -> int:
    return int(math.ceil(v - 0.5))


def line_ref_points(
    p0: tuple[int, int], p1: tuple[int, int], params: SamplingParams
) -> list[RefSample]:
    """Midpoint pair for a line segment; empty if the segment is too short.

    Segments closer to horizontal (angle < 45 degrees) get a vertically
    offset pair, others a horizontal pair; ties go horizontal. The minus
    offset point comes first. Offset-axis coordinates round half away from
    the segment; the shared coordinate rounds half up.
    """
    if p0 == p1:
        raise ValueError("degenerate segment")
    dx = p1[0] - p0[0]
    dy = p1[1] - p0[1]
    if math.hypot(dx, dy) < params.min_segment_len:
        return []
    mx = (p0[0] + p1[0]) / 2.0
    my = (p0[1] + p1[1]) / 2.0
    alpha = math.degrees(math.atan2(abs(dy), abs(dx)))
    d = params.offset_d
    if alpha < 45.0:
        axis = (0, 1)
        x = _round_half_up(mx)
        return [
            RefSample(x, _round_half_down(my - d), axis, -1),
            RefSample(x, _round_half_up(my + d), axis, +1),
        ]
    axis = (1, 0)
    y = _round_half_up(my)
    return [
        RefSample(_round_half_down(mx - d), y, axis, -1),
        RefSample(_round_half_up(mx + d), y, axis, +1),
    ]


def curve_contact_point(
    ps: tuple[int, int],
    pa: tuple[int, int],
    pb: tuple[int, int],
    pt: tuple[int, int],
) -> tuple[float, tuple[float, float]]:
    """Parameter and point where the curve tangent is parallel to the chord.

    Solves cross(B'(t), pt - ps) = 0, a quadratic in t; roots are filtered
    to [0, 1] and the one nearest 0.5 wins (smaller t on a tie). Degenerate
    cases fall back to t = 0.5.
    """
    dx = pt[0] - ps[0]
    dy = pt[1] - ps[1]

    def crs(vx, vy):
        return vx * dy - vy * dx

    ca = crs(pa[0] - ps[0], pa[1] - ps[1])
    cb = crs(pb[0] - pa[0], pb[1] - pa[1])
    cc = crs(pt[0] - pb[0], pt[1] - pb[1])
    a = ca - 2 * cb + cc
    b = 2 * (cb - ca)
    c = ca

    roots = []
    if a == 0:
        if b != 0:
            roots.append(-c / b)
    else:
        disc = b * b - 4 * a * c
        if disc >= 0:
            sq = math.sqrt(disc)
            # stable form: avoid cancellation between -b and the radical
            q = -0.5 * (b + math.copysign(sq, b)) if b != 0 else 0.5 * sq
            roots.append(q / a)
            if q != 0:
                roots.append(c / q)
            else:
                roots.append(-q / a)
    eps = 1e-9
    valid = sorted(min(max(r, 0.0), 1.0) for r in roots if -eps <= r <= 1.0 + eps)
    if valid:
        t = min(valid, key=lambda r: (abs(r - 0.5), r))
    else:
        t = 0.5

    u = 1.0 - t
    bx = (
        u * u * u * ps[0]
        + 3 * u * u * t * pa[0]
        + 3 * u * t * t * pb[0]
        + t * t * t * pt[0]
    )
    by = (
        u * u * u * ps[1]
        + 3 * u * u * t * pa[1]
        + 3 * u * t * t * pb[1]
        + t * t * t * pt[1]
    )
    return t, (bx, by)


def curve_ref_point(
    ps: tuple[int, int],
    pa: tuple[int, int],
    pb: tuple[int, int],
    pt: tuple[int, int],
    params: SamplingParams,
) -> RefSample | None:
    """Single inner-side sample for a curve, or None for degenerate input.

    The offset axis follows the tangent angle at the contact point (near
    horizontal tangent: vertical axis, ties horizontal); the direction is
    the sign of the chord-midpoint component along that axis, + on zero.
    The moved coordinate rounds toward the chosen direction (floor for -,
    ceil for +); the other coordinate rounds half up.
    """
    if ps == pt:
        return None
    t, (qx, qy) = curve_contact_point(ps, pa, pb, pt)
    u = 1.0 - t
    tx = 3 * (
        u * u * (pa[0] - ps[0]) + 2 * u * t * (pb[0] - pa[0]) + t * t * (pt[0] - pb[0])
    )
    ty = 3 * (
        u * u * (pa[1] - ps[1]) + 2 * u * t * (pb[1] - pa[1]) + t * t * (pt[1] - pb[1])
    )
    beta = math.degrees(math.atan2(abs(ty), abs(tx))) if (tx or ty) else 0.0
    axis = (0, 1) if beta < 45.0 else (1, 0)
    cmx = (ps[0] + pt[0]) / 2.0
    cmy = (ps[1] + pt[1]) / 2.0
    comp = (cmx - qx) * axis[0] + (cmy - qy) * axis[1]
    direction = -1 if comp < 0 else +1
    d = params.offset_d
    vx = qx + direction * d * axis[0]
    vy = qy + direction * d * axis[1]
    if direction < 0:
        rx = int(math.floor(vx)) if axis[0] else _round_half_up(vx)
        ry = int(math.floor(vy)) if axis[1] else _round_half_up(vy)
    else:
        rx = int(math.ceil(vx)) if axis[0] else _round_half_up(vx)
        ry = int(math.ceil(vy)) if axis[1] else _round_half_up(vy)
    return RefSample(rx, ry, axis, direction)


def _resolve(
    cand: RefSample, edges: np.ndarray, width: int, height: int, search: int
) -> tuple[int, int] | None:
    x, y = cand.x, cand.y
    if not (0 <= x < width and 0 <= y < height):
        return None
    if not edges[y, x]:
        return (x, y)
    for step in range(1, search + 1):
        nx = x + cand.direction * step * cand.axis[0]
        ny = y + cand.direction * step * cand.axis[1]
        if not (0 <= nx < width and 0 <= ny < height):
            return None
        if not edges[ny, nx]:
            return (nx, ny)
    return None


def sample_positions(
    d: VectorDrawing, edge_map: BinaryMap, params: SamplingParams | None = None
) -> list[tuple[int, int]]:
    """Ordered reference positions for a drawing.

    edge_map must be the rasterization of d. Candidates landing on an edge
    pixel move outward along their offset axis up to collision_search
    pixels; unresolvable or out-of-bounds candidates are dropped, and only
    the first occurrence of a duplicate position is kept.
    """
    if params is None:
        params = SamplingParams()
    if edge_map.width != d.width or edge_map.height != d.height:
        raise ValueError("edge map bounds do not match the drawing")
    edges = edge_map.bits
    out: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    cur = None
    for op in d.ops:
        cands: list[RefSample] = []
        if isinstance(op, Move):
            cur = (op.x, op.y)
        elif isinstance(op, Line):
            tgt = (op.x, op.y)
            if cur != tgt:
                cands = line_ref_points(cur, tgt, params)
            cur = tgt
        else:
            tgt = (op.xt, op.yt)
            sample = curve_ref_point(cur, (op.xa, op.ya), (op.xb, op.yb), tgt, params)
            if sample is not None:
                cands = [sample]
            cur = tgt
        for cand in cands:
            spot = _resolve(cand, edges, d.width, d.height, params.collision_search)
            if spot is not None and spot not in seen:
                seen.add(spot)
                out.append(spot)
    return out


def gather_colors(img: RasterImage, positions: list[tuple[int, int]]) -> np.ndarray:
    """RGB triples at the given positions, shape (n, 3) uint8."""
    if img.channels != 3:
        raise ValueError("gather_colors needs a 3-channel image")
    out = np.zeros((len(positions), 3), dtype=np.uint8)
    for i, (x, y) in enumerate(positions):
        if not (0 <= x < img.width and 0 <= y < img.height):
            raise ValueError(f"position ({x}, {y}) outside image")
        out[i] = img.samples[y, x]
    return out
