import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from edgecodec import BinaryMap, RasterImage, load_image, save_image, to_grayscale
from edgecodec.errors import (
    PnmHeaderError,
    PnmMaxvalError,
    PnmTruncatedError,
    UnsupportedPnmError,
)


def test_raster_image_shape_and_props():
    img = RasterImage(np.zeros((4, 6, 3), dtype=np.uint8))
    assert (img.width, img.height, img.channels) == (6, 4, 3)


def test_raster_image_rejects_bad_channel_count():
    with pytest.raises(ValueError):
        RasterImage(np.zeros((4, 6, 2), dtype=np.uint8))


def test_raster_image_rejects_non_uint8():
    with pytest.raises(ValueError):
        RasterImage(np.zeros((4, 6, 3), dtype=np.float64))


def test_blank_is_zero_filled():
    img = RasterImage.blank(5, 3, 1)
    assert img.width == 5 and img.height == 3 and img.channels == 1
    assert not img.samples.any()


def test_binary_map_count():
    bits = np.zeros((3, 3), dtype=bool)
    bits[1, 1] = bits[0, 2] = True
    assert BinaryMap(bits).count() == 2


# Luma weights 0.299/0.587/0.114, rounded half up.
@pytest.mark.parametrize(
    "rgb,expected",
    [
        ((255, 255, 255), 255),
        ((0, 0, 0), 0),
        ((255, 0, 0), 76),  # 76.245 rounds down
        ((0, 255, 0), 150),  # 149.685 rounds up
        ((0, 0, 255), 29),  # 29.07
    ],
)
def test_to_grayscale_values(rgb, expected):
    img = RasterImage(np.full((1, 1, 3), rgb, dtype=np.uint8))
    assert to_grayscale(img).samples[0, 0, 0] == expected


def test_to_grayscale_passthrough_on_single_channel():
    img = RasterImage(np.full((2, 2, 1), 7, dtype=np.uint8))
    out = to_grayscale(img)
    assert out.channels == 1
    assert np.array_equal(out.samples, img.samples)


def test_load_p6_minimal(tmp_path):
    p = tmp_path / "a.ppm"
    p.write_bytes(b"P6 2 1 255 " + bytes([1, 2, 3, 4, 5, 6]))
    img = load_image(p)
    assert (img.width, img.height, img.channels) == (2, 1, 3)
    assert img.samples[0, 1].tolist() == [4, 5, 6]


def test_load_p5_single_gray(tmp_path):
    p = tmp_path / "a.pgm"
    p.write_bytes(b"P5 1 1 255 \x80")
    img = load_image(p)
    assert img.channels == 1
    assert img.samples[0, 0, 0] == 128


def test_load_skips_header_comments(tmp_path):
    p = tmp_path / "a.pgm"
    p.write_bytes(b"P5\n# a comment\n1 1\n# more\n255\n\x10")
    assert load_image(p).samples[0, 0, 0] == 16


def test_load_rejects_p7(tmp_path):
    p = tmp_path / "a.pnm"
    p.write_bytes(b"P7 1 1 255 \x00")
    with pytest.raises(UnsupportedPnmError):
        load_image(p)


def test_load_rejects_wide_maxval(tmp_path):
    p = tmp_path / "a.pgm"
    p.write_bytes(b"P5 1 1 65535 \x00\x00")
    with pytest.raises(PnmMaxvalError):
        load_image(p)


def test_load_rejects_short_payload(tmp_path):
    p = tmp_path / "a.ppm"
    p.write_bytes(b"P6 2 2 255 " + b"\x00" * 11)
    with pytest.raises(PnmTruncatedError):
        load_image(p)


def test_load_rejects_garbage_header(tmp_path):
    p = tmp_path / "a.pgm"
    p.write_bytes(b"P5 x 1 255 \x00")
    with pytest.raises(PnmHeaderError):
        load_image(p)


@pytest.mark.parametrize("channels,magic", [(1, b"P5"), (3, b"P6")])
def test_save_picks_format_by_channels(tmp_path, channels, magic):
    img = RasterImage(np.full((2, 2, channels), 9, dtype=np.uint8))
    p = tmp_path / "out.pnm"
    save_image(img, p)
    assert p.read_bytes().startswith(magic)


@settings(max_examples=40, deadline=None)
@given(
    w=st.integers(1, 9),
    h=st.integers(1, 9),
    c=st.sampled_from([1, 3]),
    seed=st.integers(0, 2**31 - 1),
)
def test_save_load_round_trip(tmp_path_factory, w, h, c, seed):
    rng = np.random.default_rng(seed)
    img = RasterImage(rng.integers(0, 256, size=(h, w, c), dtype=np.uint8))
    p = tmp_path_factory.mktemp("io") / "rt.pnm"
    save_image(img, p)
    back = load_image(p)
    assert back == img
