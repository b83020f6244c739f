import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from PIL import Image

from lungtex.errors import DataError
from lungtex.imaging import (GrayImage, HefParams, decode_image, equalize_hist, filtered_spectrum,
                             forward_dft, hef_filter, hef_transfer, inverse_dft, load_image,
                             minmax, quantize, write_pgm)

from oracles import naive_dft2

unit_images = arrays(np.float64, st.tuples(st.integers(1, 12), st.integers(1, 12)),
                     elements=st.floats(0.0, 1.0))


def test_load_constant_png(tmp_path):
    p = tmp_path / "c.png"
    Image.fromarray(np.full((4, 4), 128, dtype=np.uint8), mode="L").save(p)
    img = load_image(p)
    assert img.shape == (4, 4)
    assert np.all(img.pixels == 128 / 255)


def test_missing_file(tmp_path):
    with pytest.raises(DataError, match="file not found"):
        load_image(tmp_path / "nope.png")


def test_16bit_pgm_single_hot_pixel(tmp_path):
    vals = np.zeros((5, 7), dtype=np.int64)
    vals[2, 3] = 65535
    p = tmp_path / "hot.pgm"
    write_pgm(p, vals, maxval=65535)
    img = load_image(p)
    want = np.zeros((5, 7))
    want[2, 3] = 1.0
    assert np.array_equal(img.pixels, want)


def test_16bit_png_via_pillow(tmp_path):
    vals = np.zeros((3, 3), dtype=np.uint16)
    vals[1, 1] = 65535
    buf = io.BytesIO()
    Image.fromarray(vals).save(buf, format="PNG")
    img = decode_image(buf.getvalue())
    assert img.pixels[1, 1] == 1.0 and img.pixels.sum() == 1.0


def test_rejects_garbage_and_bad_values():
    with pytest.raises(DataError, match="unsupported format"):
        decode_image(b"not an image at all")
    with pytest.raises(DataError):
        GrayImage(np.array([[0.5, np.nan]]))
    with pytest.raises(DataError):
        GrayImage(np.array([[1.5]]))
    with pytest.raises(DataError):
        GrayImage(np.zeros((0, 3)))


def test_image_is_immutable():
    img = GrayImage(np.zeros((2, 2)))
    with pytest.raises(ValueError):
        img.pixels[0, 0] = 1.0


def test_quantize_examples():
    assert np.all(quantize(GrayImage(np.zeros((3, 3))), 100).bins == 0)
    assert quantize(GrayImage(np.array([[0.0, 1.0]])), 2).bins.tolist() == [[0, 1]]
    ramp = np.arange(256, dtype=np.float64).reshape(16, 16) / 255.0
    q = quantize(GrayImage(ramp), 100)
    want = [min(int(np.floor(v * 100)), 99) for v in ramp.ravel()]
    assert q.bins.ravel().tolist() == want


@given(unit_images, st.integers(2, 256))
def test_quantize_monotone(x, levels):
    q = quantize(GrayImage(x), levels).bins.ravel()
    v = x.ravel()
    order = np.argsort(v, kind="stable")
    assert np.all(np.diff(q[order]) >= 0)
    assert q.min() >= 0 and q.max() < levels


def test_minmax_constant_is_zero():
    assert np.array_equal(minmax(np.full((3, 3), 0.4)), np.zeros((3, 3)))


def test_hef_constant_image():
    out = hef_filter(GrayImage(np.full((9, 13), 0.3)), HefParams(a=1, b=1, equalize=False))
    assert np.all(out.pixels == 0.0)


def test_hef_identity_when_b_zero():
    rng = np.random.default_rng(0)
    for shape in ((32, 32), (31, 45), (7, 100)):
        x = rng.random(shape)
        x[0, 0], x[-1, -1] = 0.0, 1.0
        out = hef_filter(GrayImage(x), HefParams(a=1, b=0, equalize=False))
        assert np.max(np.abs(out.pixels - x)) <= 1e-9


def test_hef_impulse_against_naive_dft():
    x = np.zeros((32, 32))
    x[16, 16] = 1.0
    params = HefParams(a=0.5, b=2.0, d0=0.125, equalize=False)
    got = filtered_spectrum(GrayImage(x), params)
    H = hef_transfer((32, 32), params)
    want = naive_dft2(x) * H
    assert np.max(np.abs(got - want)) <= 1e-9
    # a unit impulse has a flat spectrum of magnitude 1/N
    assert np.allclose(np.abs(got), H / (32 * 32), atol=1e-12)


def test_dft_round_trip():
    rng = np.random.default_rng(1)
    for shape in ((256, 256), (17, 31), (1, 5), (100, 3)):
        x = rng.random(shape)
        assert np.max(np.abs(inverse_dft(forward_dft(x), shape) - x)) <= 1e-9


@settings(max_examples=40, deadline=None)
@given(unit_images, st.floats(0, 2), st.floats(0, 4), st.floats(0.01, 0.5), st.booleans())
def test_hef_always_finite_and_in_range(x, a, b, d0, eq):
    out = hef_filter(GrayImage(x), HefParams(a, b, d0, eq)).pixels
    assert np.all(np.isfinite(out)) and out.min() >= 0 and out.max() <= 1


def test_equalize_examples():
    x = np.full((4, 4), 0.2)
    x.ravel()[4:] = 0.8
    out = equalize_hist(GrayImage(x)).pixels
    assert set(np.round(np.unique(out), 12)) == {0.25, 1.0}
    assert np.allclose(out[x == 0.2], 0.25) and np.allclose(out[x == 0.8], 1.0)

    const = equalize_hist(GrayImage(np.full((5, 5), 0.6))).pixels
    assert np.unique(const).size == 1

    uniform = (np.arange(256) + 0.5).reshape(16, 16) / 256
    out = equalize_hist(GrayImage(uniform)).pixels
    assert np.max(np.abs(out - uniform)) <= 1 / 256
