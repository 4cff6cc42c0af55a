"""Acceptance checks for the learned reconstruction package.

Each test prints one [PASS]/[FAIL] line; run with -s to see them.
"""

import csv
import pathlib
import time

import pytest
import torch

from neuralrecon import (GEN_INPUT_EDGES_ONLY, GEN_INPUT_FULL, Generator,
                         LossConfig, TrainConfig, adversarial_losses, fit,
                         generator_input, load_manifest, reconstruction_loss)

DATA = pathlib.Path(__file__).parent / "data"


def _report(name: str, ok: bool, detail: str) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


def test_secondary_1_loss_arithmetic():
    cfg = LossConfig()
    zeros = torch.zeros(8)
    gen_zero, critic_zero = adversarial_losses(zeros, zeros, cfg)
    real = torch.full((8,), cfg.margin)
    fake = torch.full((8,), -cfg.margin)
    _, critic_sat = adversarial_losses(real, fake, cfg)
    img = torch.rand(1, 3, 32, 32, generator=torch.Generator().manual_seed(0))
    recon_id = float(reconstruction_loss(img, img, LossConfig(structure_weight=1000.0)))

    ok = (float(critic_zero) == 20.0 and float(gen_zero) == 0.0
          and float(critic_sat) == 0.0 and abs(recon_id) < 1e-9)
    _report("SECONDARY-1 loss arithmetic", ok,
            f"critic at zero scores = {float(critic_zero)} (want 20), "
            f"saturated = {float(critic_sat)} (want 0), "
            f"recon identity = {recon_id:.2e}")


def _finite_diff(fn, x, h=1e-6):
    grad = torch.zeros_like(x)
    flat, gflat = x.reshape(-1), grad.reshape(-1)
    for i in range(flat.numel()):
        orig = float(flat[i])
        flat[i] = orig + h
        hi = float(fn(x))
        flat[i] = orig - h
        lo = float(fn(x))
        flat[i] = orig
        gflat[i] = (hi - lo) / (2 * h)
    return grad


def test_secondary_2_gradient_check():
    worst = 0.0
    cases = [
        (LossConfig(structure_weight=0.0), (1, 3, 4, 4)),
        (LossConfig(structure_weight=1000.0), (1, 1, 12, 12)),
    ]
    for cfg, shape in cases:
        gen = torch.Generator().manual_seed(99)
        target = torch.rand(shape, generator=gen, dtype=torch.float64)
        output = (target + 0.05
                  + 0.1 * torch.rand(shape, generator=gen, dtype=torch.float64))
        output = output.clamp(max=1.0).requires_grad_(True)
        reconstruction_loss(output, target, cfg).backward()
        numeric = _finite_diff(lambda x: reconstruction_loss(x, target, cfg),
                               output.detach().clone())
        rel = float((output.grad - numeric).norm() / numeric.norm())
        worst = max(worst, rel)
    _report("SECONDARY-2 gradient check", worst < 1e-3,
            f"worst relative error {worst:.2e} over {len(cases)} toy tensors (limit 1e-3)")


def test_secondary_3_shape_contracts():
    torch.manual_seed(0)
    gen5 = Generator(GEN_INPUT_FULL, width=8)
    gen1 = Generator(GEN_INPUT_EDGES_ONLY, width=8)
    edges = torch.rand(2, 1, 64, 48)
    colors = torch.rand(2, 3, 64, 48)
    mask = torch.rand(2, 1, 64, 48)
    with torch.no_grad():
        out5 = gen5(generator_input(edges, colors, mask))
        out1 = gen1(edges)
    ok = out5.shape == (2, 3, 64, 48) and out1.shape == (2, 3, 64, 48)
    _report("SECONDARY-3 shape contracts", ok,
            f"5ch -> {tuple(out5.shape)}, 1ch -> {tuple(out1.shape)} "
            "(want 3-channel at input resolution)")


def test_secondary_4_single_image_overfit(tmp_path):
    records = load_manifest(DATA / "manifest.json")
    steps = 2000
    t0 = time.time()
    fit(records, LossConfig(), TrainConfig(steps=steps, seed=0, log_every=50),
        tmp_path)
    elapsed = time.time() - t0
    with open(tmp_path / "train_log.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    best = max(float(r["psnr"]) for r in rows)
    final = float(rows[-1]["psnr"])
    ok = best >= 25.0 and elapsed < 600.0
    _report("SECONDARY-4 single-image overfit", ok,
            f"best {best:.2f} dB, final {final:.2f} dB within {steps} steps "
            f"in {elapsed:.0f}s (want >= 25 dB, < 600s)")
