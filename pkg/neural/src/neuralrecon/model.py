"""Generator and discriminator for reconstruction from codec exports.

The generator is a small encoder-decoder with skip connections. Its two
variants differ only in the first convolution's input width: 5 channels
when the sparse colors and sample mask ride along with the edge plane
(concatenated as edges, colors, mask), 1 channel for the edges-only
ablation. Output is always a 3-channel image at the input resolution,
squashed to [0, 1].

The discriminator scores image/edge/mask triples patch-wise and reduces
to one scalar per sample.
"""

import torch
import torch.nn as nn

GEN_INPUT_FULL = 5  # edges(1) + colors(3) + mask(1)
GEN_INPUT_EDGES_ONLY = 1
DISC_INPUT = 5  # image(3) + edges(1) + mask(1)


def generator_input(edges: torch.Tensor, colors: torch.Tensor,
                    mask: torch.Tensor) -> torch.Tensor:
    return torch.cat([edges, colors, mask], dim=1)


def discriminator_input(image: torch.Tensor, edges: torch.Tensor,
                        mask: torch.Tensor) -> torch.Tensor:
    return torch.cat([image, edges, mask], dim=1)


def _down(cin, cout):
    return nn.Sequential(
        nn.Conv2d(cin, cout, 4, stride=2, padding=1),
        nn.LeakyReLU(0.2, inplace=True),
    )


def _up(cin, cout):
    return nn.Sequential(
        nn.ConvTranspose2d(cin, cout, 4, stride=2, padding=1),
        nn.ReLU(inplace=True),
    )


class Generator(nn.Module):
    """Encoder-decoder with skips; in_channels is 5 (full) or 1 (edges only)."""

    def __init__(self, in_channels: int = GEN_INPUT_FULL, width: int = 16):
        super().__init__()
        if in_channels not in (GEN_INPUT_FULL, GEN_INPUT_EDGES_ONLY):
            raise ValueError(f"in_channels must be 5 or 1, got {in_channels}")
        if width < 1:
            raise ValueError("width must be positive")
        self.in_channels = in_channels
        w = width
        self.enc1 = _down(in_channels, w)       # /2
        self.enc2 = _down(w, 2 * w)             # /4
        self.enc3 = _down(2 * w, 4 * w)         # /8
        self.mid = nn.Sequential(
            nn.Conv2d(4 * w, 4 * w, 3, padding=1),
            nn.ReLU(inplace=True),
        )
        self.dec3 = _up(4 * w, 2 * w)
        self.dec2 = _up(2 * w + 2 * w, w)       # skip from enc2
        self.dec1 = _up(w + w, w)               # skip from enc1
        self.head = nn.Conv2d(w, 3, 3, padding=1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x.ndim != 4 or x.shape[1] != self.in_channels:
            raise ValueError(f"expected (N,{self.in_channels},H,W), got {tuple(x.shape)}")
        if x.shape[2] % 8 or x.shape[3] % 8:
            raise ValueError("spatial size must be a multiple of 8")
        e1 = self.enc1(x)
        e2 = self.enc2(e1)
        e3 = self.enc3(e2)
        d3 = self.dec3(self.mid(e3))
        d2 = self.dec2(torch.cat([d3, e2], dim=1))
        d1 = self.dec1(torch.cat([d2, e1], dim=1))
        return (torch.tanh(self.head(d1)) + 1.0) / 2.0


class PatchDiscriminator(nn.Module):
    """Patch critic over image+edges+mask; forward returns one score per sample."""

    def __init__(self, width: int = 16):
        super().__init__()
        w = width
        self.net = nn.Sequential(
            _down(DISC_INPUT, w),
            _down(w, 2 * w),
            _down(2 * w, 4 * w),
            nn.Conv2d(4 * w, 1, 3, padding=1),
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x.ndim != 4 or x.shape[1] != DISC_INPUT:
            raise ValueError(f"expected (N,{DISC_INPUT},H,W), got {tuple(x.shape)}")
        patches = self.net(x)
        return patches.mean(dim=(1, 2, 3))
