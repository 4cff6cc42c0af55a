"""Training objectives.

All image tensors here live on the unit scale: float, shape (N, C, H, W),
values in [0, 1]. The reconstruction term mixes a pixel L1 with a
structural term, the perceptual term compares activations of a frozen
randomly-initialized feature extractor, and the adversarial pair is a
hinge objective with a configurable margin.
"""

import dataclasses
import math

import torch
import torch.nn as nn
import torch.nn.functional as F

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


@dataclasses.dataclass(frozen=True)
class LossConfig:
    pixel_weight: float = 100.0       # on mean |output - target|
    structure_weight: float = 0.0     # on 1 - SSIM; 1000 enables it
    perceptual_weight: float = 1.0    # on extractor-feature MSE
    margin: float = 10.0              # hinge margin for the critic

    def __post_init__(self):
        for name in ("pixel_weight", "structure_weight", "perceptual_weight"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {v}")
        if not math.isfinite(self.margin) or self.margin <= 0:
            raise ValueError(f"margin must be finite and > 0, got {self.margin}")


def _gaussian_window(channels: int, device, dtype) -> torch.Tensor:
    half = SSIM_WINDOW // 2
    coords = torch.arange(-half, half + 1, device=device, dtype=dtype)
    g = torch.exp(-(coords ** 2) / (2.0 * SSIM_SIGMA ** 2))
    g = g / g.sum()
    window = g[:, None] * g[None, :]
    return window.expand(channels, 1, SSIM_WINDOW, SSIM_WINDOW).contiguous()


def ssim_unit(a: torch.Tensor, b: torch.Tensor) -> torch.Tensor:
    """Mean SSIM between two unit-scale batches, differentiable."""
    if a.shape != b.shape or a.ndim != 4:
        raise ValueError(f"need matching (N,C,H,W) tensors, got {tuple(a.shape)} vs {tuple(b.shape)}")
    if a.shape[2] < SSIM_WINDOW or a.shape[3] < SSIM_WINDOW:
        raise ValueError(f"images must be at least {SSIM_WINDOW}px on each side")
    c = a.shape[1]
    win = _gaussian_window(c, a.device, a.dtype)
    mu_a = F.conv2d(a, win, groups=c)
    mu_b = F.conv2d(b, win, groups=c)
    mu_aa = mu_a * mu_a
    mu_bb = mu_b * mu_b
    mu_ab = mu_a * mu_b
    var_a = F.conv2d(a * a, win, groups=c) - mu_aa
    var_b = F.conv2d(b * b, win, groups=c) - mu_bb
    cov = F.conv2d(a * b, win, groups=c) - mu_ab
    c1 = SSIM_K1 ** 2
    c2 = SSIM_K2 ** 2
    num = (2 * mu_ab + c1) * (2 * cov + c2)
    den = (mu_aa + mu_bb + c1) * (var_a + var_b + c2)
    return (num / den).mean()


def reconstruction_parts(output: torch.Tensor, target: torch.Tensor,
                         cfg: LossConfig) -> tuple[torch.Tensor, torch.Tensor]:
    """(weighted pixel term, weighted structure term); structure is 0 when disabled."""
    if output.shape != target.shape:
        raise ValueError(f"shape mismatch: {tuple(output.shape)} vs {tuple(target.shape)}")
    pixel = cfg.pixel_weight * (output - target).abs().mean()
    if cfg.structure_weight > 0:
        structure = cfg.structure_weight * (1.0 - ssim_unit(output, target))
    else:
        structure = output.new_zeros(())
    return pixel, structure


def reconstruction_loss(output: torch.Tensor, target: torch.Tensor,
                        cfg: LossConfig) -> torch.Tensor:
    """pixel_weight * mean|output-target| + structure_weight * (1 - SSIM)."""
    pixel, structure = reconstruction_parts(output, target, cfg)
    return pixel + structure


class FeatureExtractor(nn.Module):
    """Frozen random-weight CNN; its activations define the perceptual space."""

    def __init__(self, seed: int = 0):
        super().__init__()
        gen = torch.Generator().manual_seed(seed)
        self.conv1 = nn.Conv2d(3, 8, 3, stride=2, padding=1)
        self.conv2 = nn.Conv2d(8, 16, 3, stride=2, padding=1)
        with torch.no_grad():
            for p in self.parameters():
                p.copy_(torch.randn(p.shape, generator=gen) * 0.2)
        for p in self.parameters():
            p.requires_grad_(False)
        self.eval()

    def forward(self, x: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        f1 = F.relu(self.conv1(x))
        f2 = F.relu(self.conv2(f1))
        return f1, f2

    def train(self, mode: bool = True):
        # stays frozen regardless of the surrounding training loop
        return super().train(False)


def build_extractor(seed: int = 0) -> FeatureExtractor:
    return FeatureExtractor(seed)


def perceptual_loss(output: torch.Tensor, target: torch.Tensor,
                    extractor: FeatureExtractor, cfg: LossConfig) -> torch.Tensor:
    """perceptual_weight * mean feature-map MSE under the frozen extractor."""
    if extractor is None:
        raise ValueError("perceptual loss needs a feature extractor; build one with build_extractor()")
    if output.shape != target.shape:
        raise ValueError(f"shape mismatch: {tuple(output.shape)} vs {tuple(target.shape)}")
    feats_out = extractor(output)
    with torch.no_grad():
        feats_tgt = extractor(target)
    terms = [F.mse_loss(fo, ft) for fo, ft in zip(feats_out, feats_tgt)]
    return cfg.perceptual_weight * torch.stack(terms).mean()


def adversarial_losses(real_scores: torch.Tensor, fake_scores: torch.Tensor,
                       cfg: LossConfig) -> tuple[torch.Tensor, torch.Tensor]:
    """Hinge pair (generator_loss, critic_loss) from per-sample critic scores.

    The critic pushes real scores above +margin and fake scores below
    -margin; the generator pulls fake scores up. At all-zero scores the
    critic loss is exactly 2 * margin and the generator loss is 0.
    """
    m = cfg.margin
    gen_loss = -fake_scores.mean()
    critic_loss = F.relu(m + fake_scores).mean() + F.relu(m - real_scores).mean()
    return gen_loss, critic_loss
