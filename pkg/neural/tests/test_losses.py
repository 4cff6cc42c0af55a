import math

import numpy as np
import pytest
import torch

from neuralrecon import (LossConfig, adversarial_losses, build_extractor,
                         perceptual_loss, reconstruction_loss,
                         reconstruction_parts, ssim_unit)


def _rand_pair(seed, shape=(1, 3, 32, 32), dtype=torch.float64):
    gen = torch.Generator().manual_seed(seed)
    a = torch.rand(shape, generator=gen, dtype=dtype)
    b = torch.rand(shape, generator=gen, dtype=dtype)
    return a, b


class TestLossConfig:
    def test_defaults(self):
        cfg = LossConfig()
        assert cfg.pixel_weight == 100.0
        assert cfg.structure_weight == 0.0
        assert cfg.perceptual_weight == 1.0
        assert cfg.margin == 10.0

    @pytest.mark.parametrize("field", ["pixel_weight", "structure_weight",
                                       "perceptual_weight"])
    def test_negative_weight_rejected(self, field):
        with pytest.raises(ValueError):
            LossConfig(**{field: -1.0})

    def test_zero_weights_allowed(self):
        LossConfig(pixel_weight=0.0, structure_weight=0.0, perceptual_weight=0.0)

    @pytest.mark.parametrize("bad", [0.0, -10.0, math.nan])
    def test_margin_must_be_positive(self, bad):
        with pytest.raises(ValueError):
            LossConfig(margin=bad)

    def test_nan_weight_rejected(self):
        with pytest.raises(ValueError):
            LossConfig(pixel_weight=math.nan)


class TestAdversarial:
    def test_zero_scores_critic_pays_twice_the_margin(self):
        zeros = torch.zeros(4)
        gen_loss, critic_loss = adversarial_losses(zeros, zeros, LossConfig())
        assert float(critic_loss) == 20.0
        assert float(gen_loss) == 0.0

    def test_saturation_at_margin_is_exact(self):
        cfg = LossConfig()
        real = torch.full((3,), cfg.margin)
        fake = torch.full((3,), -cfg.margin)
        gen_loss, critic_loss = adversarial_losses(real, fake, cfg)
        assert float(critic_loss) == 0.0
        assert float(gen_loss) == cfg.margin

    def test_beyond_margin_stays_saturated(self):
        cfg = LossConfig()
        real = torch.tensor([cfg.margin + 5.0])
        fake = torch.tensor([-cfg.margin - 7.0])
        _, critic_loss = adversarial_losses(real, fake, cfg)
        assert float(critic_loss) == 0.0

    def test_generator_loss_decreases_as_fake_scores_rise(self):
        cfg = LossConfig()
        losses = [float(adversarial_losses(torch.zeros(1), torch.tensor([s]), cfg)[0])
                  for s in (-5.0, 0.0, 3.0, 12.0)]
        assert losses == sorted(losses, reverse=True)
        assert losses[0] == 5.0

    def test_critic_loss_never_negative(self):
        gen = torch.Generator().manual_seed(7)
        cfg = LossConfig()
        for _ in range(50):
            real = torch.randn(6, generator=gen) * 30
            fake = torch.randn(6, generator=gen) * 30
            _, critic_loss = adversarial_losses(real, fake, cfg)
            assert float(critic_loss) >= 0.0

    def test_custom_margin(self):
        zeros = torch.zeros(2)
        _, critic_loss = adversarial_losses(zeros, zeros, LossConfig(margin=2.5))
        assert float(critic_loss) == 5.0


def _ssim_oracle(a: np.ndarray, b: np.ndarray) -> float:
    # direct windowed form: Gaussian-weighted moments per 11x11 patch
    win, sigma = 11, 1.5
    half = win // 2
    ax = np.arange(-half, half + 1, dtype=np.float64)
    g = np.exp(-(ax ** 2) / (2 * sigma ** 2))
    g /= g.sum()
    w = np.outer(g, g)
    c1, c2 = 0.01 ** 2, 0.03 ** 2
    h, wd = a.shape
    vals = []
    for y in range(h - win + 1):
        for x in range(wd - win + 1):
            pa = a[y:y + win, x:x + win]
            pb = b[y:y + win, x:x + win]
            mu_a = (w * pa).sum()
            mu_b = (w * pb).sum()
            va = (w * pa * pa).sum() - mu_a ** 2
            vb = (w * pb * pb).sum() - mu_b ** 2
            cov = (w * pa * pb).sum() - mu_a * mu_b
            vals.append(((2 * mu_a * mu_b + c1) * (2 * cov + c2))
                        / ((mu_a ** 2 + mu_b ** 2 + c1) * (va + vb + c2)))
    return float(np.mean(vals))


class TestSsim:
    def test_identity_is_one(self):
        a, _ = _rand_pair(1)
        assert float(ssim_unit(a, a)) == pytest.approx(1.0, abs=1e-9)

    def test_matches_window_oracle(self):
        rng = np.random.default_rng(11)
        a_np = rng.random((16, 16))
        b_np = np.clip(a_np + rng.normal(0, 0.2, (16, 16)), 0, 1)
        a = torch.from_numpy(a_np)[None, None]
        b = torch.from_numpy(b_np)[None, None]
        assert float(ssim_unit(a, b)) == pytest.approx(_ssim_oracle(a_np, b_np), abs=1e-9)

    def test_symmetric(self):
        a, b = _rand_pair(2)
        assert float(ssim_unit(a, b)) == pytest.approx(float(ssim_unit(b, a)), abs=1e-12)

    def test_noise_scores_below_identity(self):
        a, b = _rand_pair(3)
        assert float(ssim_unit(a, b)) < 0.5

    def test_too_small_rejected(self):
        a = torch.rand(1, 1, 8, 8)
        with pytest.raises(ValueError):
            ssim_unit(a, a)

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            ssim_unit(torch.rand(1, 1, 16, 16), torch.rand(1, 3, 16, 16))


class TestReconstruction:
    def test_zero_at_identity(self):
        a, _ = _rand_pair(4)
        cfg = LossConfig(structure_weight=1000.0)
        assert float(reconstruction_loss(a, a, cfg)) == pytest.approx(0.0, abs=1e-9)

    def test_constant_offset_is_pixel_weight_times_offset(self):
        target, _ = _rand_pair(5)
        target = target * 0.8  # leave headroom so +0.1 stays on the unit scale
        output = target + 0.1
        cfg = LossConfig(structure_weight=0.0)
        assert float(reconstruction_loss(output, target, cfg)) == pytest.approx(10.0, abs=1e-9)

    def test_structure_only_noise_is_bounded_by_twice_the_weight(self):
        a, b = _rand_pair(6)
        cfg = LossConfig(pixel_weight=0.0, structure_weight=1000.0)
        val = float(reconstruction_loss(a, b, cfg))
        assert 0.0 < val <= 2000.0

    def test_parts_sum_to_loss(self):
        a, b = _rand_pair(7)
        cfg = LossConfig(structure_weight=1000.0)
        pixel, structure = reconstruction_parts(a, b, cfg)
        assert float(pixel + structure) == pytest.approx(float(reconstruction_loss(a, b, cfg)))
        assert float(structure) > 0.0

    def test_structure_part_zero_when_disabled(self):
        a, b = _rand_pair(8, shape=(1, 3, 4, 4))
        # 4x4 is below the SSIM window: must still work with the term disabled
        pixel, structure = reconstruction_parts(a, b, LossConfig(structure_weight=0.0))
        assert float(structure) == 0.0
        assert float(pixel) > 0.0

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            reconstruction_loss(torch.rand(1, 3, 16, 16), torch.rand(1, 3, 16, 17),
                                LossConfig())


def _finite_diff_grad(fn, x: torch.Tensor, h: float = 1e-6) -> torch.Tensor:
    grad = torch.zeros_like(x)
    flat = x.reshape(-1)
    gflat = grad.reshape(-1)
    for i in range(flat.numel()):
        orig = float(flat[i])
        flat[i] = orig + h
        hi = float(fn(x))
        flat[i] = orig - h
        lo = float(fn(x))
        flat[i] = orig
        gflat[i] = (hi - lo) / (2 * h)
    return grad


def _grad_check(cfg: LossConfig, shape) -> float:
    gen = torch.Generator().manual_seed(55)
    target = torch.rand(shape, generator=gen, dtype=torch.float64)
    # keep |output - target| away from 0 so the L1 term is smooth locally
    output = (target + 0.05 + 0.1 * torch.rand(shape, generator=gen, dtype=torch.float64))
    output = output.clamp(max=1.0).requires_grad_(True)

    loss = reconstruction_loss(output, target, cfg)
    loss.backward()
    analytic = output.grad.clone()

    numeric = _finite_diff_grad(
        lambda x: reconstruction_loss(x, target, cfg), output.detach().clone())
    return float((analytic - numeric).norm() / numeric.norm())


class TestGradients:
    def test_pixel_term_matches_finite_differences_on_4x4(self):
        rel = _grad_check(LossConfig(structure_weight=0.0), (1, 3, 4, 4))
        assert rel < 1e-3

    def test_full_loss_matches_finite_differences_with_ssim(self):
        rel = _grad_check(LossConfig(structure_weight=1000.0), (1, 1, 12, 12))
        assert rel < 1e-3


class TestPerceptual:
    def test_zero_at_identity(self):
        a, _ = _rand_pair(9, dtype=torch.float32)
        ext = build_extractor(0)
        assert float(perceptual_loss(a, a, ext, LossConfig())) == 0.0

    def test_never_negative(self):
        ext = build_extractor(0)
        for seed in range(5):
            a, b = _rand_pair(100 + seed, dtype=torch.float32)
            assert float(perceptual_loss(a, b, ext, LossConfig())) >= 0.0

    def test_decreases_along_interpolation_toward_target(self):
        ext = build_extractor(3)
        start, target = _rand_pair(10, dtype=torch.float32)
        cfg = LossConfig()
        vals = []
        for t in (0.0, 0.5, 0.9):
            x = start + t * (target - start)
            vals.append(float(perceptual_loss(x, target, ext, cfg)))
        assert vals[0] > vals[1] > vals[2] > 0.0

    def test_weight_scales_linearly(self):
        a, b = _rand_pair(11, dtype=torch.float32)
        ext = build_extractor(0)
        one = float(perceptual_loss(a, b, ext, LossConfig(perceptual_weight=1.0)))
        three = float(perceptual_loss(a, b, ext, LossConfig(perceptual_weight=3.0)))
        assert three == pytest.approx(3.0 * one, rel=1e-6)

    def test_extractor_is_frozen_and_seeded(self):
        ext_a = build_extractor(5)
        ext_b = build_extractor(5)
        ext_c = build_extractor(6)
        for p in ext_a.parameters():
            assert not p.requires_grad
        ext_a.train()  # must stay in eval mode
        assert not ext_a.training
        a, b = _rand_pair(12, dtype=torch.float32)
        cfg = LossConfig()
        same = (float(perceptual_loss(a, b, ext_a, cfg)),
                float(perceptual_loss(a, b, ext_b, cfg)))
        assert same[0] == same[1]
        assert float(perceptual_loss(a, b, ext_c, cfg)) != same[0]

    def test_missing_extractor_rejected(self):
        a, b = _rand_pair(13, dtype=torch.float32)
        with pytest.raises(ValueError, match="extractor"):
            perceptual_loss(a, b, None, LossConfig())

    def test_shape_mismatch_rejected(self):
        ext = build_extractor(0)
        with pytest.raises(ValueError):
            perceptual_loss(torch.rand(1, 3, 16, 16), torch.rand(1, 3, 32, 32),
                            ext, LossConfig())
