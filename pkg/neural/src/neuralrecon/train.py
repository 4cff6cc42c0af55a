"""Adversarial training loop and its CLI.

One step alternates a critic update on detached generator output with a
generator update on the combined objective (reconstruction + perceptual
+ adversarial). Every logged loss must stay finite; a non-finite value
aborts the run with the offending term named.

Run as a module:

    python3 -m neuralrecon --manifest data/manifest.json --out runs/a
"""

import argparse
import csv
import dataclasses
import math
import pathlib

import torch

from .data import batch_tensors, load_manifest
from .losses import (LossConfig, adversarial_losses, build_extractor,
                     perceptual_loss, reconstruction_parts)
from .model import (GEN_INPUT_EDGES_ONLY, GEN_INPUT_FULL, Generator,
                    PatchDiscriminator, discriminator_input, generator_input)

LOG_FIELDS = ("step", "recon", "recon_pixel", "recon_structure",
              "perceptual", "gen_adv", "gen_total", "critic", "psnr")


class TrainingDiverged(RuntimeError):
    pass


@dataclasses.dataclass(frozen=True)
class TrainConfig:
    steps: int = 2000
    lr_generator: float = 2e-3
    lr_critic: float = 1e-3
    seed: int = 0
    log_every: int = 25
    edges_only: bool = False
    width: int = 16

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if self.lr_generator <= 0 or self.lr_critic <= 0:
            raise ValueError("learning rates must be positive")
        if self.log_every < 1:
            raise ValueError("log_every must be >= 1")


def psnr01(a: torch.Tensor, b: torch.Tensor) -> float:
    """PSNR in dB between unit-scale tensors; inf for identical inputs."""
    mse = float(((a - b) ** 2).mean())
    if mse == 0.0:
        return math.inf
    return -10.0 * math.log10(mse)


def _check_finite(logs: dict) -> None:
    for name, value in logs.items():
        if not math.isfinite(value):
            raise TrainingDiverged(f"loss term '{name}' became {value}; aborting")


def train_step(generator, critic, opt_g, opt_c, batch, loss_cfg: LossConfig,
               extractor) -> dict:
    """One critic update then one generator update; returns the logged losses."""
    edges, colors, mask, target = batch
    if generator.in_channels == GEN_INPUT_EDGES_ONLY:
        gen_in = edges
    else:
        gen_in = generator_input(edges, colors, mask)

    # critic sees the current generator frozen
    with torch.no_grad():
        fake = generator(gen_in)
    opt_c.zero_grad()
    real_scores = critic(discriminator_input(target, edges, mask))
    fake_scores = critic(discriminator_input(fake, edges, mask))
    _, critic_loss = adversarial_losses(real_scores, fake_scores, loss_cfg)
    critic_loss.backward()
    opt_c.step()

    opt_g.zero_grad()
    output = generator(gen_in)
    pixel, structure = reconstruction_parts(output, target, loss_cfg)
    recon = pixel + structure
    perc = perceptual_loss(output, target, extractor, loss_cfg)
    gen_adv, _ = adversarial_losses(
        real_scores.detach(), critic(discriminator_input(output, edges, mask)),
        loss_cfg)
    gen_total = recon + perc + gen_adv
    gen_total.backward()
    opt_g.step()

    logs = {
        "recon": float(recon.detach()),
        "recon_pixel": float(pixel.detach()),
        "recon_structure": float(structure.detach()),
        "perceptual": float(perc.detach()),
        "gen_adv": float(gen_adv.detach()),
        "gen_total": float(gen_total.detach()),
        "critic": float(critic_loss.detach()),
    }
    _check_finite(logs)
    logs["psnr"] = psnr01(output.detach(), target)
    return logs


def fit(records, loss_cfg: LossConfig, train_cfg: TrainConfig,
        out_dir) -> dict:
    """Train on a batch of records; write checkpoints and a CSV log.

    Returns the last step's logged losses.
    """
    out_dir = pathlib.Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    torch.manual_seed(train_cfg.seed)

    in_channels = GEN_INPUT_EDGES_ONLY if train_cfg.edges_only else GEN_INPUT_FULL
    generator = Generator(in_channels, width=train_cfg.width)
    critic = PatchDiscriminator(width=train_cfg.width)
    extractor = build_extractor(train_cfg.seed)
    opt_g = torch.optim.Adam(generator.parameters(), lr=train_cfg.lr_generator,
                             betas=(0.5, 0.999))
    opt_c = torch.optim.Adam(critic.parameters(), lr=train_cfg.lr_critic,
                             betas=(0.5, 0.999))

    batch = batch_tensors(records) if not torch.is_tensor(records[0]) else records
    rows = []
    logs = {}
    for step in range(1, train_cfg.steps + 1):
        try:
            logs = train_step(generator, critic, opt_g, opt_c, batch,
                              loss_cfg, extractor)
        except TrainingDiverged as exc:
            raise TrainingDiverged(f"step {step}: {exc}") from None
        if step % train_cfg.log_every == 0 or step == train_cfg.steps:
            rows.append({"step": step, **logs})

    with open(out_dir / "train_log.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=LOG_FIELDS)
        writer.writeheader()
        writer.writerows(rows)
    torch.save(generator.state_dict(), out_dir / "generator.pt")
    torch.save(critic.state_dict(), out_dir / "critic.pt")
    return logs


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="neuralrecon",
        description="Train the reconstruction generator on codec exports.")
    parser.add_argument("--manifest", required=True, help="dataset manifest JSON")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--steps", type=int, default=2000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--width", type=int, default=16)
    parser.add_argument("--structure-weight", type=float, default=0.0,
                        help="weight on the (1 - SSIM) term; 0 disables it")
    parser.add_argument("--edges-only", action="store_true",
                        help="train the 1-channel input variant")
    args = parser.parse_args(argv)

    try:
        records = load_manifest(args.manifest)
        loss_cfg = LossConfig(structure_weight=args.structure_weight)
        train_cfg = TrainConfig(steps=args.steps, seed=args.seed,
                                width=args.width, edges_only=args.edges_only)
        logs = fit(records, loss_cfg, train_cfg, args.out)
    except (ValueError, OSError, TrainingDiverged) as exc:
        print(f"error: {exc}")
        return 1
    print(f"done: {args.steps} steps, final psnr {logs['psnr']:.2f} dB, "
          f"log and checkpoints in {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
