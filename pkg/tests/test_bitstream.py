import pathlib
import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from edgecodec import CodedImage, decode, encode, pack, unpack
from edgecodec.errors import (
    BadMagicError,
    CorruptStreamError,
    LengthMismatchError,
    StreamTruncatedError,
    VersionError,
)
from edgecodec.bitstream import BASE_PPM, ENH_PPM
from edgecodec.ppm import ppm_compress, ppm_decompress

from _synth import FACE_PARAMS, FLAT_PARAMS, SHAPE_PARAMS, face_like, piecewise_constant, shape_scene

DATA = pathlib.Path(__file__).parent / "data"


# ---------------------------------------------------------------------------
# pack / unpack


def test_header_layout_frozen():
    got = pack(CodedImage(2, 3, b"AB"))
    assert got == b"VCMF" + bytes([1, 0]) + struct.pack(">HHI", 2, 3, 2) + b"AB"


def test_header_layout_with_enhancement():
    got = pack(CodedImage(2, 3, b"AB", enh=b"xyz"))
    want = b"VCMF" + bytes([1, 1]) + struct.pack(">HHI", 2, 3, 2) + b"AB"
    want += struct.pack(">I", 3) + b"xyz"
    assert got == want


@given(
    w=st.integers(1, 65535),
    h=st.integers(1, 65535),
    base=st.binary(max_size=64),
    enh=st.one_of(st.none(), st.binary(max_size=64)),
)
@settings(max_examples=120, deadline=None)
def test_pack_unpack_identity(w, h, base, enh):
    c = CodedImage(w, h, base, enh)
    back = unpack(pack(c))
    assert (back.width, back.height, back.base, back.enh) == (w, h, base, enh)


def test_unpack_rejects_bad_magic():
    blob = bytearray(pack(CodedImage(4, 4, b"x")))
    blob[:4] = b"JUNK"
    with pytest.raises(BadMagicError):
        unpack(bytes(blob))


def test_unpack_rejects_bad_version():
    blob = bytearray(pack(CodedImage(4, 4, b"x")))
    blob[4] = 9
    with pytest.raises(VersionError):
        unpack(bytes(blob))


def test_unpack_rejects_unknown_flags():
    blob = bytearray(pack(CodedImage(4, 4, b"x")))
    blob[5] = 0x82
    with pytest.raises(VersionError):
        unpack(bytes(blob))


def test_unpack_rejects_zero_bounds():
    blob = bytearray(pack(CodedImage(4, 4, b"x")))
    blob[6:8] = b"\x00\x00"
    with pytest.raises(LengthMismatchError):
        unpack(bytes(blob))


def test_unpack_truncation_points():
    full = pack(CodedImage(4, 4, b"abcdef", enh=b"123"))
    for cut in range(len(full)):
        with pytest.raises((StreamTruncatedError, LengthMismatchError)):
            unpack(full[:cut])


def test_unpack_rejects_trailing_bytes():
    with pytest.raises(LengthMismatchError):
        unpack(pack(CodedImage(4, 4, b"x")) + b"\x00")


def test_coded_image_validation():
    with pytest.raises(ValueError):
        CodedImage(0, 4, b"")
    with pytest.raises(ValueError):
        CodedImage(4, 70000, b"")
    with pytest.raises(VersionError):
        pack(CodedImage(4, 4, b"", version=2))


# ---------------------------------------------------------------------------
# encode


def test_encode_requires_rgb():
    from edgecodec import RasterImage

    with pytest.raises(ValueError):
        encode(RasterImage(np.zeros((8, 8, 1), dtype=np.uint8)))


def test_encode_is_deterministic():
    img = shape_scene(0)
    a = pack(encode(img, edge_params=SHAPE_PARAMS))
    b = pack(encode(img, edge_params=SHAPE_PARAMS))
    assert a == b


def test_constant_image_has_empty_drawing():
    from edgecodec import RasterImage

    img = RasterImage(np.full((32, 32, 3), 77, dtype=np.uint8))
    c = encode(img, with_color=True)
    assert ppm_decompress(c.base, BASE_PPM) == b""
    edges, mask, plane = decode(c, mode="export")
    assert not edges.bits.any()
    assert not mask.bits.any()


def test_without_color_layer():
    img = shape_scene(2)
    c = encode(img, with_color=False, edge_params=SHAPE_PARAMS)
    assert c.enh is None
    assert c.flags == 0
    back = unpack(pack(c))
    assert back.enh is None


def test_color_stream_is_three_bytes_per_position():
    img = face_like(1)
    c = encode(img, with_color=True, edge_params=FACE_PARAMS)
    edges, mask, plane = decode(c, mode="export")
    n = int(mask.bits.sum())
    assert n > 0
    blob = ppm_decompress(c.enh, ENH_PPM)
    assert len(blob) == 3 * n


# ---------------------------------------------------------------------------
# decode


def test_decode_rejects_unknown_mode():
    c = encode(piecewise_constant(1), edge_params=FLAT_PARAMS)
    with pytest.raises(ValueError):
        decode(c, mode="magic")


def test_decode_detects_color_count_mismatch():
    img = piecewise_constant(1)
    c = encode(img, with_color=True, edge_params=FLAT_PARAMS)
    tampered = CodedImage(c.width, c.height, c.base, ppm_compress(b"1234", ENH_PPM))
    with pytest.raises(CorruptStreamError):
        decode(tampered)


def test_export_positions_never_on_edges():
    c = encode(shape_scene(3), edge_params=SHAPE_PARAMS)
    edges, mask, plane = decode(c, mode="export")
    assert not (edges.bits & mask.bits).any()


def test_classical_round_trip_close_on_flat_scene():
    from edgecodec import psnr

    img = piecewise_constant(1)
    c = encode(img, edge_params=FLAT_PARAMS)
    rec = decode(unpack(pack(c)))
    assert psnr(rec, img) > 40.0


# ---------------------------------------------------------------------------
# golden fixtures


def test_golden_face_stream_stable():
    want = (DATA / "face00.vcmf").read_bytes()
    got = pack(encode(face_like(0), with_color=True, edge_params=FACE_PARAMS))
    assert got == want


def test_golden_base_only_stream_stable():
    want = (DATA / "shapes01_base.vcmf").read_bytes()
    got = pack(encode(shape_scene(1), with_color=False, edge_params=SHAPE_PARAMS))
    assert got == want


def test_golden_streams_decode():
    c = unpack((DATA / "face00.vcmf").read_bytes())
    edges, mask, plane = decode(c, mode="export")
    assert edges.bits.any() and mask.bits.any()
    c2 = unpack((DATA / "shapes01_base.vcmf").read_bytes())
    img = decode(c2)
    assert img.samples.shape == (256, 256, 3)
