"""Two-layer image codec: vectorized edge base layer plus a sparse
reference-color enhancement layer with decoder-derived positions."""

from .bitstream import CodedImage, decode, encode, pack, unpack
from .edge import EdgeParams, detect_edges, prune_components, thin
from .errors import CodecError
from .image_io import BinaryMap, RasterImage, load_image, save_image, to_grayscale
from .metrics import LandmarkSet, bpp, ced, nme, psnr, ssim
from .ppm import PpmConfig, ppm_compress, ppm_decompress
from .reconstruct import ReconParams, diffuse_reconstruct, export_emc, rasterize
from .refpix import RefSample, SamplingParams, gather_colors, sample_positions
from .vectorizer import (
    Curve,
    Line,
    Move,
    VectorDrawing,
    deserialize_params,
    fit_paths,
    serialize_params,
    to_svg,
    trace_chains,
)

__all__ = [
    "BinaryMap",
    "CodecError",
    "CodedImage",
    "Curve",
    "EdgeParams",
    "LandmarkSet",
    "Line",
    "Move",
    "PpmConfig",
    "RasterImage",
    "ReconParams",
    "RefSample",
    "SamplingParams",
    "VectorDrawing",
    "bpp",
    "ced",
    "decode",
    "deserialize_params",
    "detect_edges",
    "diffuse_reconstruct",
    "encode",
    "export_emc",
    "fit_paths",
    "gather_colors",
    "load_image",
    "nme",
    "pack",
    "ppm_compress",
    "ppm_decompress",
    "prune_components",
    "psnr",
    "rasterize",
    "sample_positions",
    "save_image",
    "serialize_params",
    "ssim",
    "thin",
    "to_grayscale",
    "to_svg",
    "trace_chains",
    "unpack",
]

__version__ = "0.1.0"
