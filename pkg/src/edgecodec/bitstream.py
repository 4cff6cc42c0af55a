"""Container format tying the layers together.

Layout (big endian):

    magic "VCMF" | version u8 | flags u8 | width u16 | height u16 |
    base_len u32 | base bytes | [enh_len u32 | enh bytes]

flags bit 0 marks the enhancement layer; other bits must be zero. The base
payload is the compressed serialized drawing; the enhancement payload is
compressed RGB triples whose positions the decoder re-derives from the
decoded drawing, so no position bits are ever stored.

Constants that the decoder needs to reproduce encoder behavior (sampling
geometry, compressor orders) are fixed properties of format version 1, not
header fields.
"""

import struct
from dataclasses import dataclass

import numpy as np

from .edge import EdgeParams, detect_edges, prune_components, thin
from .errors import (
    BadMagicError,
    CorruptStreamError,
    LengthMismatchError,
    StreamTruncatedError,
    VersionError,
)
from .image_io import BinaryMap, RasterImage
from .ppm import PpmConfig, ppm_compress, ppm_decompress
from .reconstruct import ReconParams, build_mask_color, diffuse_reconstruct, rasterize
from .refpix import SamplingParams, gather_colors, sample_positions
from .vectorizer import DEFAULT_FIT_TOL, deserialize_params, fit_paths, serialize_params, trace_chains

MAGIC = b"VCMF"
VERSION = 1
FLAG_ENHANCEMENT = 0x01

# Fixed for format version 1.
BASE_PPM = PpmConfig(max_order=3)
ENH_PPM = PpmConfig(max_order=1)
FORMAT_SAMPLING = SamplingParams()

_HEADER = struct.Struct(">4sBBHHI")


@dataclass
class CodedImage:
    width: int
    height: int
    base: bytes
    enh: bytes | None = None
    version: int = VERSION

    def __post_init__(self):
        if not 1 <= self.width <= 65535 or not 1 <= self.height <= 65535:
            raise ValueError(f"bad bounds {self.width}x{self.height}")
        if len(self.base) > 0xFFFFFFFF or (self.enh is not None and len(self.enh) > 0xFFFFFFFF):
            raise ValueError("payload too large for a u32 length")

    @property
    def flags(self) -> int:
        return FLAG_ENHANCEMENT if self.enh is not None else 0


def encode(
    img: RasterImage,
    with_color: bool = True,
    edge_params: EdgeParams | None = None,
    fit_tol: float = DEFAULT_FIT_TOL,
) -> CodedImage:
    """Run the full pipeline: edges, thinning, pruning, tracing, fitting,
    serialization, compression, and optionally the color layer."""
    if img.channels != 3:
        raise ValueError("encode needs a 3-channel image")
    if img.width > 65535 or img.height > 65535:
        raise ValueError("image too large for u16 header bounds")
    if edge_params is None:
        edge_params = EdgeParams()
    edges = detect_edges(img, edge_params)
    skeleton = thin(edges)
    pruned = prune_components(skeleton, edge_params.min_component_pixels)
    chains = trace_chains(pruned)
    drawing = fit_paths(chains, img.width, img.height, fit_tol)
    base = ppm_compress(serialize_params(drawing), BASE_PPM)
    enh = None
    if with_color:
        raster = rasterize(drawing)
        positions = sample_positions(drawing, raster, FORMAT_SAMPLING)
        colors = gather_colors(img, positions)
        enh = ppm_compress(colors.tobytes(), ENH_PPM)
    return CodedImage(img.width, img.height, base, enh)


def pack(c: CodedImage) -> bytes:
    if c.version != VERSION:
        raise VersionError(f"cannot pack version {c.version}")
    out = bytearray()
    out += _HEADER.pack(MAGIC, c.version, c.flags, c.width, c.height, len(c.base))
    out += c.base
    if c.enh is not None:
        out += struct.pack(">I", len(c.enh))
        out += c.enh
    return bytes(out)


def unpack(data: bytes) -> CodedImage:
    if len(data) < _HEADER.size:
        raise StreamTruncatedError(f"header needs {_HEADER.size} bytes, have {len(data)}")
    magic, version, flags, width, height, base_len = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise BadMagicError(f"bad magic {magic!r}")
    if version != VERSION:
        raise VersionError(f"unsupported version {version}")
    if flags & ~FLAG_ENHANCEMENT:
        raise VersionError(f"unknown flag bits 0x{flags:02X}")
    if width < 1 or height < 1:
        raise LengthMismatchError(f"bad bounds {width}x{height}")
    pos = _HEADER.size
    if len(data) < pos + base_len:
        raise StreamTruncatedError("base payload cut short")
    base = data[pos : pos + base_len]
    pos += base_len
    enh = None
    if flags & FLAG_ENHANCEMENT:
        if len(data) < pos + 4:
            raise StreamTruncatedError("missing enhancement length")
        (enh_len,) = struct.unpack_from(">I", data, pos)
        pos += 4
        if len(data) < pos + enh_len:
            raise StreamTruncatedError("enhancement payload cut short")
        enh = data[pos : pos + enh_len]
        pos += enh_len
    if pos != len(data):
        raise LengthMismatchError(f"{len(data) - pos} trailing bytes")
    return CodedImage(width, height, base, enh)


def decode(
    c: CodedImage,
    mode: str = "classical",
    recon_params: ReconParams | None = None,
):
    """Decode to an image ("classical") or an (edges, mask, colors) bundle
    ("export"). Reference positions are re-derived from the decoded drawing."""
    if mode not in ("classical", "export"):
        raise ValueError(f"unknown decode mode {mode!r}")
    serialized = ppm_decompress(c.base, BASE_PPM)
    drawing = deserialize_params(serialized, c.width, c.height)
    edges = rasterize(drawing)
    if c.enh is not None:
        positions = sample_positions(drawing, edges, FORMAT_SAMPLING)
        blob = ppm_decompress(c.enh, ENH_PPM)
        if len(blob) != 3 * len(positions):
            raise CorruptStreamError(
                f"enhancement holds {len(blob)} bytes for {len(positions)} positions"
            )
        colors = np.frombuffer(blob, dtype=np.uint8).reshape(-1, 3)
        mask, plane = build_mask_color(positions, colors, c.width, c.height)
    else:
        mask = BinaryMap.blank(c.width, c.height)
        plane = RasterImage.blank(c.width, c.height, 3)
    if mode == "export":
        return edges, mask, plane
    return diffuse_reconstruct(edges, mask, plane, recon_params)
