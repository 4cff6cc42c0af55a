"""Rate and fidelity metrics plus CSV reporting.

psnr/ssim operate on full images; nme/ced operate on landmark sets. All of
them are exact, deterministic kernels so results can serve as regression
anchors.
"""

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .image_io import RasterImage

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03
SSIM_L = 255.0


@dataclass
class LandmarkSet:
    """2D points plus the distance used to normalize localization error."""

    points: np.ndarray  # (n, 2) float
    normalization_distance: float

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64)
        if self.points.ndim != 2 or self.points.shape[1] != 2:
            raise ValueError(f"points must be (n, 2), got {self.points.shape}")
        if self.normalization_distance <= 0:
            raise ValueError("normalization_distance must be positive")


def bpp(byte_count: int, width: int, height: int) -> float:
    """Bits per pixel of a payload over a width x height image."""
    if width < 1 or height < 1:
        raise ValueError(f"bad bounds {width}x{height}")
    if byte_count < 0:
        raise ValueError(f"negative byte count {byte_count}")
    return 8.0 * byte_count / (width * height)


def psnr(a: RasterImage, b: RasterImage) -> float:
    """Peak signal-to-noise ratio in dB; math.inf for identical images."""
    if a.samples.shape != b.samples.shape:
        raise ValueError(f"shape mismatch {a.samples.shape} vs {b.samples.shape}")
    diff = a.samples.astype(np.float64) - b.samples.astype(np.float64)
    mse = float((diff * diff).mean())
    if mse == 0:
        return math.inf
    return 10.0 * math.log10(255.0 * 255.0 / mse)


def _ssim_plane(x: np.ndarray, y: np.ndarray) -> float:
    c1 = (SSIM_K1 * SSIM_L) ** 2
    c2 = (SSIM_K2 * SSIM_L) ** 2
    radius = SSIM_WINDOW // 2
    truncate = radius / SSIM_SIGMA

    def g(img):
        return ndimage.gaussian_filter(img, sigma=SSIM_SIGMA, truncate=truncate)

    mx = g(x)
    my = g(y)
    mxx = g(x * x)
    myy = g(y * y)
    mxy = g(x * y)
    vx = mxx - mx * mx
    vy = myy - my * my
    cov = mxy - mx * my
    num = (2 * mx * my + c1) * (2 * cov + c2)
    den = (mx * mx + my * my + c1) * (vx + vy + c2)
    smap = num / den
    valid = smap[radius:-radius, radius:-radius]
    return float(valid.mean())


def ssim(a: RasterImage, b: RasterImage) -> float:
    """Mean structural similarity over an 11x11 Gaussian window (sigma 1.5).

    Channels are scored independently and averaged. Both dimensions must be
    at least the window size.
    """
    if a.samples.shape != b.samples.shape:
        raise ValueError(f"shape mismatch {a.samples.shape} vs {b.samples.shape}")
    if min(a.width, a.height) < SSIM_WINDOW:
        raise ValueError(f"image smaller than the {SSIM_WINDOW}px window")
    scores = []
    for ch in range(a.channels):
        x = a.samples[:, :, ch].astype(np.float64)
        y = b.samples[:, :, ch].astype(np.float64)
        scores.append(_ssim_plane(x, y))
    return float(np.mean(scores))


def nme(pred: LandmarkSet, gt: LandmarkSet) -> float:
    """Mean landmark distance divided by the ground truth normalization."""
    if len(pred.points) != len(gt.points):
        raise ValueError(f"{len(pred.points)} vs {len(gt.points)} landmarks")
    if len(gt.points) == 0:
        raise ValueError("empty landmark sets")
    d = np.sqrt(((pred.points - gt.points) ** 2).sum(axis=1))
    return float(d.mean() / gt.normalization_distance)


def ced(errors, threshold: float) -> float:
    """Fraction of errors at or below threshold; 0.0 for an empty list."""
    errors = list(errors)
    if threshold < 0:
        raise ValueError(f"negative threshold {threshold}")
    if not errors:
        return 0.0
    return sum(1 for e in errors if e <= threshold) / len(errors)


def metrics_csv(rows: list[dict]) -> str:
    """Render (name, bpp, psnr, ssim, nme) rows as CSV text.

    Missing nme values stay blank; infinite psnr renders as "inf".
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["name", "bpp", "psnr", "ssim", "nme"])
    for row in rows:
        nme_v = row.get("nme")
        writer.writerow(
            [
                row["name"],
                f"{row['bpp']:.6f}",
                "inf" if math.isinf(row["psnr"]) else f"{row['psnr']:.4f}",
                f"{row['ssim']:.6f}",
                "" if nme_v is None else f"{nme_v:.6f}",
            ]
        )
    return buf.getvalue()
