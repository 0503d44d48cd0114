import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from dualbeam.beam import AstigmaticBeam, beam_geometry, intensity_at, propagate
from dualbeam.errors import DomainError, EstimationError
from dualbeam.profile import (
    BinaryMask,
    IntensityImage,
    border_frame,
    cross_section,
    estimate_noise,
    illuminated_mask,
    iou,
    load_image,
    pixel_centers,
    read_pgm,
    render_intensity,
    write_mask_pgm,
    write_pgm,
)


def elliptic(w1=20e-6, w2=10e-6, power=1e-3):
    lam = 500e-9
    return AstigmaticBeam(lam, power, 1j * math.pi * w1 ** 2 / lam, 1j * math.pi * w2 ** 2 / lam, 1.0, 1.0)


def test_render_conserves_power():
    b = propagate(AstigmaticBeam(450e-9, 2e-3, 1j * 1.5e-5, 1j * 2e-6, 1.0, 1.3), 1e-3)
    g = beam_geometry(b)
    span = 8 * max(g.w1, g.w2)
    pitch = span / 200
    img = render_intensity(b, 201, 201, pitch)
    assert img.values.sum() * pitch ** 2 == pytest.approx(b.power, rel=1e-2)


def test_circular_beam_rotation_symmetric():
    img = render_intensity(elliptic(15e-6, 15e-6), 64, 64, 1e-6)
    np.testing.assert_allclose(np.rot90(img.values), img.values, rtol=1e-12)


def test_elliptic_half_max_contour_ratio():
    w1, w2 = 30e-6, 12e-6
    pitch = 0.05e-6
    img = render_intensity(elliptic(w1, w2), 2001, 1001, pitch)
    peak = img.values.max()
    row = cross_section(img, "horizontal", 500)
    col = cross_section(img, "vertical", 1000)
    # half-max half-width per axis, interpolated between pixels
    x = pixel_centers(2001, pitch)
    y = pixel_centers(1001, pitch)
    hx = np.interp(0.5 * peak, row[1000:][::-1], x[1000:][::-1])
    hy = np.interp(0.5 * peak, col[500:][::-1], y[500:][::-1])
    assert hx / hy == pytest.approx(w1 / w2, rel=1e-4)
    assert hx == pytest.approx(w1 * math.sqrt(math.log(2) / 2), rel=1e-4)


def test_render_axes_and_center():
    img = render_intensity(elliptic(), 41, 21, 1e-6)
    assert (img.height, img.width) == (21, 41)
    assert np.unravel_index(img.values.argmax(), img.values.shape) == (10, 20)
    row = cross_section(img, "horizontal", 10)
    assert row.argmax() == 20
    np.testing.assert_allclose(row, intensity_at(elliptic(), pixel_centers(41, 1e-6), 0.0), rtol=1e-15)


def test_cross_section_linear():
    a = render_intensity(elliptic(20e-6, 10e-6), 30, 20, 1e-6)
    b = render_intensity(elliptic(8e-6, 14e-6, 3e-3), 30, 20, 1e-6)
    s = IntensityImage(a.values + b.values, 1e-6)
    np.testing.assert_allclose(
        cross_section(s, "vertical", 7), cross_section(a, "vertical", 7) + cross_section(b, "vertical", 7), rtol=1e-15
    )


@pytest.mark.parametrize("axis, pos", [("horizontal", 20), ("vertical", -1), ("diagonal", 0)])
def test_cross_section_bounds(axis, pos):
    img = IntensityImage(np.zeros((20, 30)))
    with pytest.raises(DomainError):
        cross_section(img, axis, pos)


def test_image_invariants():
    with pytest.raises(DomainError):
        IntensityImage(np.zeros((1, 5)))
    with pytest.raises(DomainError):
        IntensityImage(-np.ones((3, 3)))
    with pytest.raises(DomainError):
        IntensityImage(np.full((3, 3), np.nan))


def test_zero_image_empty_mask():
    assert illuminated_mask(IntensityImage(np.zeros((8, 8))), 0.0, 1.0).area == 0


def test_k_zero_marks_positive_pixels():
    v = np.array([[0.0, 1e-300, 2.0], [0.0, 0.0, 5.0]])
    m = illuminated_mask(IntensityImage(v), 0.0, 1.0, k=0)
    np.testing.assert_array_equal(m.values, v > 0)


def test_mask_area_shrinks_with_k():
    rng = np.random.default_rng(4)
    spot = render_intensity(elliptic(20e-6, 12e-6), 100, 80, 1e-6).values
    img = IntensityImage(spot / spot.max() * 1000 + 50 + rng.normal(0, 5, spot.shape).clip(-50))
    areas = [illuminated_mask(img, k=k).area for k in (0, 1, 3, 5, 10, 50)]
    assert all(a >= b for a, b in zip(areas, areas[1:]))
    assert areas[0] > areas[-1] > 0


def test_border_frame_and_noise():
    sel = border_frame((20, 30))
    assert sel[:2].all() and sel[-2:].all() and sel[:, :3].all() and sel[:, -3:].all()
    assert not sel[2:-2, 3:-3].any()
    v = np.full((20, 30), 100.0)
    v[sel] = np.tile([1.0, 3.0], sel.sum() // 2)
    mean, sd = estimate_noise(IntensityImage(v))
    assert (mean, sd) == (2.0, 1.0)


def test_noise_estimation_errors():
    with pytest.raises(EstimationError):
        estimate_noise(IntensityImage(np.ones((10, 10))))
    with pytest.raises(EstimationError):
        # 3x3 frame has only 8 pixels
        illuminated_mask(IntensityImage(np.arange(9.0).reshape(3, 3)))


def test_iou_examples():
    a = np.zeros((6, 6), bool)
    a[1:5, 1:5] = True
    half = a.copy()
    half[1:3] = False
    other = np.zeros_like(a)
    other[5, 5] = True
    A = BinaryMask(a)
    assert iou(A, A) == 1.0
    assert iou(A, BinaryMask(other)) == 0.0
    assert iou(A, BinaryMask(half)) == 0.5
    assert iou(BinaryMask(np.zeros((2, 2))), BinaryMask(np.zeros((2, 2)))) == 0.0
    with pytest.raises(DomainError):
        iou(A, BinaryMask(np.zeros((5, 6))))


masks = arrays(bool, (5, 7))


@given(masks, masks)
def test_iou_properties(a, b):
    A, B = BinaryMask(a), BinaryMask(b)
    v = iou(A, B)
    assert v == iou(B, A)
    assert 0 <= v <= 1
    assert (v == 1) == (bool(a.any()) and np.array_equal(a, b))
    # adding a pixel to both never lowers the overlap
    extra = np.zeros_like(a)
    extra[2, 3] = True
    assert iou(BinaryMask(a | extra), BinaryMask(b | extra)) >= v


@given(arrays(float, (6, 6), elements=st.floats(0, 1e3)), st.floats(0.1, 100), st.floats(-5, 5))
def test_mask_invariant_under_affine_rescale(v, scale, shift):
    img = IntensityImage(v)
    base = illuminated_mask(img, 200.0, 10.0)
    # positive affine map of values and statistics alike
    off = abs(shift) * 10
    moved = illuminated_mask(IntensityImage(v * scale + off), 200.0 * scale + off, 10.0 * scale)
    thr = 230.0
    ambiguous = np.isclose(v, thr, rtol=1e-9)
    np.testing.assert_array_equal(base.values[~ambiguous], moved.values[~ambiguous])


def test_pgm_roundtrip(tmp_path):
    v = np.arange(12, dtype=float).reshape(3, 4) * 5000
    p = tmp_path / "a.pgm"
    write_pgm(p, v)
    data = p.read_bytes()
    assert data.startswith(b"P5\n4 3\n65535\n")
    assert len(data) == len(b"P5\n4 3\n65535\n") + 24
    assert data[-2:] == (55000).to_bytes(2, "big")
    np.testing.assert_array_equal(read_pgm(p), v)
    np.testing.assert_array_equal(load_image(p).values, v)


def test_mask_pgm(tmp_path):
    p = tmp_path / "m.pgm"
    write_mask_pgm(p, BinaryMask([[True, False], [False, True]]))
    np.testing.assert_array_equal(read_pgm(p), [[65535, 0], [0, 65535]])


def test_eight_bit_pgm(tmp_path):
    p = tmp_path / "b.pgm"
    p.write_bytes(b"P5\n# comment\n2 2\n255\n" + bytes([0, 10, 200, 255]))
    np.testing.assert_array_equal(read_pgm(p), [[0, 10], [200, 255]])


def test_text_matrix(tmp_path):
    p = tmp_path / "m.txt"
    p.write_text("1 2 3\n4 5 6\n")
    img = load_image(p, pixel_pitch=2e-6)
    assert img.values.shape == (2, 3) and img.pixel_pitch == 2e-6


def test_not_pgm(tmp_path):
    p = tmp_path / "x.pgm"
    p.write_bytes(b"P2\n1 1\n255\n0\n")
    with pytest.raises(DomainError):
        read_pgm(p)
