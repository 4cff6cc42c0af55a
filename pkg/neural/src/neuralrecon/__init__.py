"""Learned reconstruction of images from exported edge/color codec planes."""

from .data import ManifestError, Record, batch_tensors, load_manifest
from .losses import (FeatureExtractor, LossConfig, adversarial_losses,
                     build_extractor, perceptual_loss, reconstruction_loss,
                     reconstruction_parts, ssim_unit)
from .model import (DISC_INPUT, GEN_INPUT_EDGES_ONLY, GEN_INPUT_FULL,
                    Generator, PatchDiscriminator, discriminator_input,
                    generator_input)
from .pnm import PnmError, load_pnm, save_pnm
from .train import TrainConfig, TrainingDiverged, fit, psnr01, train_step

__all__ = [
    "DISC_INPUT",
    "FeatureExtractor",
    "GEN_INPUT_EDGES_ONLY",
    "GEN_INPUT_FULL",
    "Generator",
    "LossConfig",
    "ManifestError",
    "PatchDiscriminator",
    "PnmError",
    "Record",
    "TrainConfig",
    "TrainingDiverged",
    "adversarial_losses",
    "batch_tensors",
    "build_extractor",
    "discriminator_input",
    "fit",
    "generator_input",
    "load_manifest",
    "load_pnm",
    "perceptual_loss",
    "psnr01",
    "reconstruction_loss",
    "reconstruction_parts",
    "save_pnm",
    "ssim_unit",
    "train_step",
]
