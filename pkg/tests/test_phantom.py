import numpy as np
import pytest

from ctdegrad.phantom import ellipse_coverage, make_ellipse_phantom, make_phantom


def test_ellipse_coverage_area_and_range():
    cov = ellipse_coverage((64, 64), (31.5, 31.5), (20.0, 12.0))
    assert cov.shape == (64, 64)
    assert cov.min() >= 0.0 and cov.max() <= 1.0
    # total coverage approximates the ellipse area
    assert cov.sum() == pytest.approx(np.pi * 20.0 * 12.0, rel=0.01)
    # deep interior is fully covered, far exterior untouched
    assert cov[31, 31] == 1.0
    assert cov[0, 0] == 0.0
    # boundary pixels are fractional
    frac = (cov > 0.0) & (cov < 1.0)
    assert frac.any()


def test_ellipse_coverage_rotation():
    a = ellipse_coverage((64, 64), (31.5, 31.5), (18.0, 6.0), angle_rad=0.0)
    b = ellipse_coverage((64, 64), (31.5, 31.5), (18.0, 6.0), angle_rad=np.pi / 2)
    # quarter turn swaps the axes
    np.testing.assert_allclose(b, a.T, atol=1e-12)
    assert a.sum() == pytest.approx(b.sum(), rel=1e-9)
    with pytest.raises(ValueError):
        ellipse_coverage((64, 64), (31.5, 31.5), (0.0, 5.0))
    with pytest.raises(ValueError):
        ellipse_coverage((64, 64), (31.5, 31.5), (5.0, 5.0), supersample=0)


def test_ellipse_coverage_off_grid():
    cov = ellipse_coverage((32, 32), (-100.0, -100.0), (5.0, 5.0))
    assert cov.sum() == 0.0


def test_make_ellipse_phantom():
    img = make_ellipse_phantom(128)
    assert img.shape == (128, 128)
    assert img.values[64, 64] == pytest.approx(40.0)
    assert img.values[0, 0] == -1000.0
    with pytest.raises(ValueError):
        make_ellipse_phantom(16)


def test_make_phantom_determinism():
    a = make_phantom(96, 7)
    b = make_phantom(96, 7)
    np.testing.assert_array_equal(a.values, b.values)
    c = make_phantom(96, 8)
    assert not np.array_equal(a.values, c.values)


def test_make_phantom_population_properties():
    for seed in range(12):
        img = make_phantom(96, seed)
        vals = img.values
        assert vals.min() >= -1000.0 and vals.max() <= 400.0
        body = vals > -500.0
        # body occupies a plausible fraction of the grid
        assert 0.25 < body.mean() < 0.60
        # body stays inside the inscribed reconstruction circle
        rr = np.hypot(*(np.mgrid[0:96, 0:96] - 47.5))
        assert not body[rr > 47.5].any()
        # contains air-like low-density inclusions (lung-band values
        # well below soft tissue but above open air)
        assert ((vals > -900.0) & (vals < -450.0)).sum() > 400
        with np.errstate(all="raise"):
            assert np.isfinite(vals).all()


def test_make_phantom_accepts_generator():
    rng = np.random.default_rng(5)
    a = make_phantom(64, rng)
    b = make_phantom(64, np.random.default_rng(5))
    np.testing.assert_array_equal(a.values, b.values)
    with pytest.raises(ValueError):
        make_phantom(8, 1)
