import struct

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gridvec.features import (color_histogram, extract_patch, feature_matrix, hog,
                              read_feature_file, write_feature_file)
from gridvec.ingest import FormatError, GrayImage, Image, to_gray
from oracles import hog_reference


def rgb(rng, h, w):
    return Image(rng.integers(0, 256, (h, w, 3), dtype=np.uint8))


def test_center_patch(rng):
    img = rgb(rng, 64, 64)
    p = extract_patch(img, (32, 32))
    assert np.array_equal(p.pixels, img.pixels[16:48, 16:48])


def test_corner_patch_is_clamped(rng):
    img = rgb(rng, 64, 80)
    assert np.array_equal(extract_patch(img, (0, 0)).pixels, img.pixels[:32, :32])
    assert np.array_equal(extract_patch(img, (79, 63)).pixels, img.pixels[32:, 48:])


def test_gray_patch_kind(rng):
    g = GrayImage(rng.random((40, 40)))
    p = extract_patch(g, (20, 20), side=8)
    assert isinstance(p, GrayImage) and p.values.shape == (8, 8)


def test_patch_larger_than_image(rng):
    with pytest.raises(ValueError):
        extract_patch(rgb(rng, 20, 40), (10, 10))


@settings(max_examples=80, deadline=None)
@given(st.integers(32, 90), st.integers(32, 90), st.floats(-50, 150), st.floats(-50, 150),
       st.sampled_from([8, 16, 32]))
def test_patch_stays_inside(h, w, cx, cy, side):
    img = GrayImage(np.arange(h * w, dtype=float).reshape(h, w))
    p = extract_patch(img, (cx, cy), side).values
    assert p.shape == (side, side)
    y0, x0 = divmod(int(p[0, 0]), w)
    assert 0 <= x0 <= w - side and 0 <= y0 <= h - side
    assert np.array_equal(p, img.values[y0:y0 + side, x0:x0 + side])


def test_pixel_budget_independent_of_image_size(rng):
    for h, w in ((96, 96), (200, 310)):
        coords = rng.uniform(0, min(h, w), size=(25, 2))
        total = sum(extract_patch(rgb(rng, h, w), c).pixels[:, :, 0].size for c in coords)
        assert total == 25 * 32 * 32


def test_pixel_reduction_claim():
    kept = 25 * 32 * 32
    full = 438 * 640
    assert (kept, full) == (25_600, 280_320)
    assert round(1 - kept / full, 4) == 0.9087


def test_uniform_histogram():
    h = color_histogram(Image(np.full((32, 32, 3), 128, np.uint8)))
    assert h.shape == (512,)
    assert h.max() == 1.0 and np.count_nonzero(h) == 1
    assert h[(4 * 8 + 4) * 8 + 4] == 1.0


def test_two_color_histogram():
    px = np.zeros((32, 32, 3), np.uint8)
    px[:16, :, 0] = 255
    px[16:, :, 2] = 255
    h = color_histogram(Image(px))
    assert h[(7 * 8 + 0) * 8 + 0] == 0.5
    assert h[(0 * 8 + 0) * 8 + 7] == 0.5
    assert np.count_nonzero(h) == 2


def test_histogram_counting_oracle(rng):
    img = rgb(rng, 32, 32)
    bins = 6
    expected = np.zeros(bins ** 3)
    for r, g, b in img.pixels.reshape(-1, 3).tolist():
        i = [min(v * bins // 256, bins - 1) for v in (r, g, b)]
        expected[(i[0] * bins + i[1]) * bins + i[2]] += 1
    expected /= 1024
    got = color_histogram(img, bins)
    assert np.allclose(got, expected, atol=1e-9, rtol=0)
    assert got.sum() == pytest.approx(1.0, abs=1e-9)


def test_histogram_needs_rgb():
    with pytest.raises(ValueError):
        color_histogram(Image(np.zeros((8, 8, 1), np.uint8)))


def test_hog_constant_is_zero(backend):
    d = hog(GrayImage(np.full((32, 32), 0.4)))
    assert d.shape == (324,) and not d.any()


def test_hog_vertical_edge(backend):
    g = np.zeros((32, 32))
    g[:, 16:] = 1.0
    d = hog(GrayImage(g)).reshape(9, 4, 9)
    assert np.argmax(d.sum(axis=(0, 1))) == 0


def test_hog_reference_loop(backend, rng):
    patch = rng.random((32, 32))
    got = hog(GrayImage(patch))
    assert np.allclose(got, hog_reference(patch), atol=1e-6, rtol=0)
    blocks = got.reshape(9, 36)
    assert np.all(np.linalg.norm(blocks, axis=1) <= 1 + 1e-6)


def test_hog_from_color_patch(rng, backend):
    img = rgb(rng, 16, 16)
    assert np.allclose(hog(img), hog(to_gray(img)))


def test_hog_cell_divisibility():
    with pytest.raises(ValueError):
        hog(GrayImage(np.zeros((30, 30))))


def test_single_node_matrix(rng):
    img = rgb(rng, 40, 40)
    m = feature_matrix(img, [(20, 20)])
    assert m.shape == (1, 512)
    assert np.array_equal(m[0], color_histogram(extract_patch(img, (20, 20))))


def test_grid_matrix_shape_and_norm(rng):
    img = rgb(rng, 120, 150)
    coords = rng.uniform(0, 120, size=(25, 2))
    m = feature_matrix(img, coords)
    assert m.shape == (25, 512)
    assert np.allclose(m.sum(axis=1), 1.0, atol=1e-9)
    assert np.array_equal(m, feature_matrix(img, coords))


def test_hog_matrix(rng):
    img = rgb(rng, 64, 64)
    assert feature_matrix(img, [(10, 10), (40, 50)], "hog").shape == (2, 324)


def test_unknown_extractor(rng):
    with pytest.raises(ValueError):
        feature_matrix(rgb(rng, 40, 40), [(1, 1)], "sift")


def test_fgv1_minimal():
    data = write_feature_file(np.array([[42.0]]))
    assert data[:4] == b"FGV1"
    assert struct.unpack("<II", data[4:12]) == (1, 1)
    assert len(data) == 12 + 4
    assert read_feature_file(data).tolist() == [[42.0]]


def test_fgv1_round_trip(rng):
    m = rng.standard_normal((25, 512)).astype(np.float32)
    back = read_feature_file(write_feature_file(m))
    assert back.tobytes() == m.tobytes()


def test_fgv1_errors():
    header = b"FGV1" + struct.pack("<II", 3, 4)
    with pytest.raises(FormatError):
        read_feature_file(header + bytes(8))
    with pytest.raises(FormatError):
        read_feature_file(b"FGV2" + header[4:] + bytes(48))
    with pytest.raises(FormatError):
        read_feature_file(b"FGV")
    with pytest.raises(FormatError):
        read_feature_file(header + bytes(48), expected_rows=25)
    with pytest.raises(ValueError):
        write_feature_file(np.array([[np.nan]]))
