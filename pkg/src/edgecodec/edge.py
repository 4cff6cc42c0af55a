"""Edge map extraction: gradient detector, skeleton thinning, component pruning.

The detector is a classic Canny pipeline: Gaussian smoothing, Sobel
gradients, non-maximum suppression along the quantized gradient direction,
then hysteresis growth from strong seeds through weak pixels.

Gradient magnitude is reported on a 0..255 scale: the Sobel response is
divided by its DC row gain (4), so an ideal axis-aligned step of height h
measures roughly h/2 after the sigma=1.4 smoothing spreads it.
"""

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .image_io import BinaryMap, RasterImage, to_grayscale

GAUSSIAN_SIGMA = 1.4

# Full 3x3 kernels don't fit on anything smaller than this; such inputs
# produce an empty map rather than an error.
MIN_EDGE_DIM = 8

_SOBEL_X = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=np.float64)
_SOBEL_Y = np.array([[-1, -2, -1], [0, 0, 0], [1, 2, 1]], dtype=np.float64)

_EIGHT = np.ones((3, 3), dtype=np.int32)


@dataclass
class EdgeParams:
    """Detector thresholds (0..255 gradient scale) and pruning floor."""

    low_threshold: float = 40.0
    high_threshold: float = 100.0
    min_component_pixels: int = 10

    def __post_init__(self):
        if not 0 <= self.low_threshold <= self.high_threshold:
            raise ValueError(
                f"need 0 <= low <= high, got {self.low_threshold}, {self.high_threshold}"
            )
        if self.min_component_pixels < 1:
            raise ValueError(f"min_component_pixels must be >= 1, got {self.min_component_pixels}")


def _nms(mag: np.ndarray, gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    """Keep only pixels that peak across their gradient direction.

    Ties break toward the earlier pixel in raster order: strictly greater
    than the preceding neighbor, greater-or-equal than the following one.
    """
    theta = np.degrees(np.arctan2(gy, gx)) % 180.0
    sector = np.zeros(mag.shape, dtype=np.int8)
    sector[(theta >= 22.5) & (theta < 67.5)] = 1
    sector[(theta >= 67.5) & (theta < 112.5)] = 2
    sector[(theta >= 112.5) & (theta < 157.5)] = 3

    pad = np.pad(mag, 1, mode="constant", constant_values=-1.0)
    keep = np.zeros(mag.shape, dtype=np.bool_)
    # Offsets (dx, dy) point toward the later pixel in raster order.
    for sec, (dx, dy) in enumerate(((1, 0), (1, 1), (0, 1), (-1, 1))):
        prev = pad[1 - dy : pad.shape[0] - 1 - dy, 1 - dx : pad.shape[1] - 1 - dx]
        nxt = pad[1 + dy : pad.shape[0] - 1 + dy, 1 + dx : pad.shape[1] - 1 + dx]
        keep |= (sector == sec) & (mag > prev) & (mag >= nxt)
    return keep & (mag > 0)


def detect_edges(img: RasterImage, params: EdgeParams | None = None) -> BinaryMap:
    """Detect edges on the luma plane of img.

    Invariant to adding a constant to all samples (up to clipping), since
    only gradients enter the decision.
    """
    if params is None:
        params = EdgeParams()
    gray = to_grayscale(img)
    h, w = gray.height, gray.width
    if min(h, w) < MIN_EDGE_DIM:
        return BinaryMap.blank(w, h)
    plane = gray.samples[:, :, 0].astype(np.float64)
    smooth = ndimage.gaussian_filter(plane, sigma=GAUSSIAN_SIGMA, mode="reflect")
    gx = ndimage.convolve(smooth, _SOBEL_X, mode="reflect")
    gy = ndimage.convolve(smooth, _SOBEL_Y, mode="reflect")
    mag = np.hypot(gx, gy) / 4.0

    ridge = _nms(mag, gx, gy)
    strong = ridge & (mag >= params.high_threshold)
    weak = ridge & (mag >= params.low_threshold)
    edges = ndimage.binary_propagation(strong, structure=_EIGHT, mask=weak)
    return BinaryMap(edges)


def prune_components(m: BinaryMap, min_pixels: int) -> BinaryMap:
    """Drop 8-connected components with fewer than min_pixels pixels."""
    if min_pixels < 1:
        raise ValueError(f"min_pixels must be >= 1, got {min_pixels}")
    if min_pixels == 1:
        return BinaryMap(m.bits.copy())
    labels, n = ndimage.label(m.bits, structure=_EIGHT)
    if n == 0:
        return BinaryMap(m.bits.copy())
    sizes = np.bincount(labels.ravel())
    keep = sizes >= min_pixels
    keep[0] = False
    return BinaryMap(keep[labels])


# Offsets of the 8-neighborhood in raster order; bit i of a neighborhood
# code corresponds to _N8[i].
_N8 = ((-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1))

# Bits of the 4-neighbors within _N8 order.
_FOUR_BITS = (1 << 1) | (1 << 3) | (1 << 4) | (1 << 6)


def _redundant_lut() -> np.ndarray:
    """Truth table over 8-neighbor codes: safe-to-delete skeleton pixels.

    A pixel is redundant when its set neighbors form one 8-connected
    cluster among themselves (removal cannot disconnect), there are at
    least two of them (endpoints and isolated pixels stay), and at least
    one 4-neighbor is background (removal cannot open a hole).
    """
    lut = np.zeros(256, dtype=np.bool_)
    for code in range(256):
        offs = [_N8[i] for i in range(8) if code >> i & 1]
        if len(offs) < 2 or code & _FOUR_BITS == _FOUR_BITS:
            continue
        seen = {offs[0]}
        stack = [offs[0]]
        while stack:
            cx, cy = stack.pop()
            for o in offs:
                if o not in seen and max(abs(o[0] - cx), abs(o[1] - cy)) == 1:
                    seen.add(o)
                    stack.append(o)
        lut[code] = len(seen) == len(offs)
    return lut


_REDUNDANT = _redundant_lut()


def _live_code(img: np.ndarray, y: int, x: int) -> int:
    h, w = img.shape
    code = 0
    for i, (dx, dy) in enumerate(_N8):
        ny, nx = y + dy, x + dx
        if 0 <= ny < h and 0 <= nx < w and img[ny, nx]:
            code |= 1 << i
    return code


def _staircase_pass(img: np.ndarray) -> bool:
    """Delete redundant pixels sequentially in raster order.

    Non-maximum suppression and Zhang-Suen both leave two-pixel corners
    on shallow diagonals (the Zhang-Suen transition count sees two arcs
    there, so it keeps them). Those extra pixels read as fake junctions
    downstream, so they are peeled here. Sequential application keeps
    the result deterministic: of two mutually redundant pixels the one
    earlier in raster order goes first, after which the other usually
    stops being redundant.
    """
    removed = False
    for y, x in np.argwhere(img == 1):
        if _REDUNDANT[_live_code(img, y, x)]:
            img[y, x] = 0
            removed = True
    return removed


# Ring index of each _N8 offset in Zhang-Suen order: P2 = north, then
# clockwise (P2..P9). Maps a neighborhood code bit to its ring position.
_RING_FROM_N8 = {(0, -1): 0, (1, -1): 1, (1, 0): 2, (1, 1): 3,
                 (0, 1): 4, (-1, 1): 5, (-1, 0): 6, (-1, -1): 7}


def _zs_deletable(code: int, second: bool) -> bool:
    ring = [0] * 8
    for i, off in enumerate(_N8):
        if code >> i & 1:
            ring[_RING_FROM_N8[off]] = 1
    b = sum(ring)
    if not 2 <= b <= 6:
        return False
    a = sum(ring[i] == 0 and ring[(i + 1) % 8] == 1 for i in range(8))
    if a != 1:
        return False
    p2, p4, p6, p8 = ring[0], ring[2], ring[4], ring[6]
    if second:
        return p2 * p4 * p8 == 0 and p2 * p6 * p8 == 0
    return p2 * p4 * p6 == 0 and p4 * p6 * p8 == 0


def _zs_flags(img: np.ndarray, second: bool) -> np.ndarray:
    # Zhang-Suen deletability of every pixel against the frozen map.
    p = np.pad(img, 1, mode="constant")
    p2 = p[:-2, 1:-1]
    p3 = p[:-2, 2:]
    p4 = p[1:-1, 2:]
    p5 = p[2:, 2:]
    p6 = p[2:, 1:-1]
    p7 = p[2:, :-2]
    p8 = p[1:-1, :-2]
    p9 = p[:-2, :-2]
    ring = (p2, p3, p4, p5, p6, p7, p8, p9)
    b = sum(n.astype(np.int32) for n in ring)
    a = np.zeros(img.shape, dtype=np.int32)
    for i in range(8):
        a += ((ring[i] == 0) & (ring[(i + 1) % 8] == 1)).astype(np.int32)
    if second:
        cond = (p2 * p4 * p8 == 0) & (p2 * p6 * p8 == 0)
    else:
        cond = (p2 * p4 * p6 == 0) & (p4 * p6 * p8 == 0)
    return (img == 1) & (b >= 2) & (b <= 6) & (a == 1) & cond


def _zs_stage(img: np.ndarray, second: bool) -> bool:
    # One Zhang-Suen sub-iteration. Candidates are flagged simultaneously
    # against the frozen map (textbook form, keeps the erosion balanced),
    # then deleted in raster order with a live recheck. Pure simultaneous
    # deletion erases isolated 2x2 blocks outright; the live recheck keeps
    # every component alive because its last two pixels fail B >= 2.
    removed = False
    for y, x in np.argwhere(_zs_flags(img, second)):
        if img[y, x] and _zs_deletable(_live_code(img, y, x), second):
            img[y, x] = 0
            removed = True
    return removed


def thin(m: BinaryMap) -> BinaryMap:
    """Zhang-Suen thinning plus staircase cleanup, to a 1-pixel skeleton.

    Pixels outside the map count as background. The loop runs the two
    Zhang-Suen sub-iterations and the sequential redundant-pixel pass to
    a joint fixpoint, so the result is idempotent and every component
    stays connected.
    """
    img = m.bits.astype(np.uint8)
    while True:
        changed = False
        # Zhang-Suen runs to its own fixpoint first so thick regions erode
        # evenly from both sides before the cleanup touches anything.
        while _zs_stage(img, second=False) | _zs_stage(img, second=True):
            changed = True
        if _staircase_pass(img):
            changed = True
        if not changed:
            break
    return BinaryMap(img.astype(np.bool_))
