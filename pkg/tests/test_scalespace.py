"""Kernel construction and separable derivative layer oracles."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import ndimage

from quasiquadnet import (build_stack, derivatives, make_kernel,
                          normalize_derivative, smooth)
from quasiquadnet.scalespace import SIGMA_MIN


def test_kernel_radius_follows_truncation():
    for sigma, trunc in ((0.5, 4.0), (1.0, 4.0), (2.5, 8.0), (10.0, 3.0)):
        k = make_kernel(sigma, 0, trunc)
        assert k.radius == int(np.ceil(trunc * sigma))
        assert len(k.taps) == 2 * k.radius + 1


def test_kernel_sums_are_exact():
    for sigma in (0.5, 0.7, 1.0, 3.0, 17.0):
        assert abs(make_kernel(sigma, 0).taps.sum() - 1.0) < 1e-15
        assert abs(make_kernel(sigma, 1).taps.sum()) < 1e-15
        assert abs(make_kernel(sigma, 2).taps.sum()) < 1e-15


def test_kernel_symmetry():
    for sigma in (0.8, 2.0):
        g0 = make_kernel(sigma, 0).taps
        g1 = make_kernel(sigma, 1).taps
        g2 = make_kernel(sigma, 2).taps
        assert np.array_equal(g0, g0[::-1])
        assert np.array_equal(g1, -g1[::-1])
        assert np.array_equal(g2, g2[::-1])


def test_kernel_rejects_bad_arguments():
    with pytest.raises(ValueError):
        make_kernel(0.1)
    with pytest.raises(ValueError):
        make_kernel(SIGMA_MIN - 1e-9)
    with pytest.raises(ValueError):
        make_kernel(1.0, order=3)
    with pytest.raises(ValueError):
        make_kernel(1.0, trunc_mult=0.0)


def test_smooth_impulse_is_separable_kernel():
    n = 41
    img = np.zeros((n, n))
    img[n // 2, n // 2] = 1.0
    s = 2.25
    out = smooth(img, s)
    g = make_kernel(np.sqrt(s), 0).taps
    r = (len(g) - 1) // 2
    expect = np.outer(g, g)
    got = out[n // 2 - r:n // 2 + r + 1, n // 2 - r:n // 2 + r + 1]
    assert np.max(np.abs(got - expect)) < 1e-15


def test_smooth_special_cases():
    img = np.arange(12.0).reshape(3, 4)
    out = smooth(img, 0.0)
    assert np.array_equal(out, img)
    assert out is not img
    with pytest.raises(ValueError):
        smooth(img, -1.0)


def test_derivatives_match_dense_convolution():
    # direct 2-D convolution with outer-product kernels is the ground truth
    rng = np.random.default_rng(11)
    img = rng.standard_normal((24, 24))
    s = 2.0
    entry = derivatives(img, s)
    g0 = make_kernel(np.sqrt(s), 0).taps
    g1 = make_kernel(np.sqrt(s), 1).taps
    g2 = make_kernel(np.sqrt(s), 2).taps
    pairs = {
        'L': (g0, g0), 'Lx': (g0, g1), 'Ly': (g1, g0),
        'Lxx': (g0, g2), 'Lxy': (g1, g1), 'Lyy': (g2, g0),
    }
    for name, (ky, kx) in pairs.items():
        dense = ndimage.convolve(img, np.outer(ky, kx), mode='mirror')
        got = getattr(entry, name)
        assert np.max(np.abs(got - dense)) < 1e-12, name


def test_semigroup_of_smoothing():
    # two-stage smoothing equals single-stage at the summed scale; the
    # deviation is pure sampling error and shrinks fast with scale
    rng = np.random.default_rng(5)
    img = rng.standard_normal((64, 64))
    for s1 in (1.0, 4.0, 16.0):
        for s2 in (1.0, 4.0, 16.0):
            once = smooth(img, s1 + s2)
            twice = smooth(smooth(img, s1), s2)
            band = int(np.ceil(4.0 * np.sqrt(s1 + s2)))
            band = min(band, 24)
            inner = (slice(band, 64 - band), slice(band, 64 - band))
            err = np.max(np.abs(once[inner] - twice[inner]))
            assert err < 1e-3, (s1, s2, err)
    once = smooth(img, 8.0, trunc_mult=8.0)
    twice = smooth(smooth(img, 4.0, trunc_mult=8.0), 4.0, trunc_mult=8.0)
    assert np.max(np.abs(once - twice)) < 1e-10


def test_smoothed_impulse_matches_continuous_gaussian():
    # at s = 9 the sampled and renormalized kernel tracks the continuous
    # profile to better than 1e-6 relative out to twice the spread
    n = 121
    s = 9.0
    img = np.zeros((n, n))
    img[n // 2, n // 2] = 1.0
    out = smooth(img, s, trunc_mult=8.0)
    y, x = np.mgrid[0:n, 0:n].astype(np.float64)
    r2 = (y - n // 2) ** 2 + (x - n // 2) ** 2
    expect = np.exp(-r2 / (2.0 * s)) / (2.0 * np.pi * s)
    mask = r2 <= (2.0 * np.sqrt(s)) ** 2
    rel = np.abs(out[mask] - expect[mask]) / expect[mask]
    assert np.max(rel) < 1e-6


def test_blob_second_derivative_closed_form():
    # smoothing a gaussian blob adds scales, so L_xx at the centre is
    # -1 / (2 pi (s + s0)^2)
    n = 161
    s0, s = 16.0, 9.0
    y, x = np.mgrid[0:n, 0:n].astype(np.float64)
    r2 = (y - n // 2) ** 2 + (x - n // 2) ** 2
    blob = np.exp(-r2 / (2.0 * s0)) / (2.0 * np.pi * s0)
    entry = derivatives(blob, s, trunc_mult=6.0)
    expect = -1.0 / (2.0 * np.pi * (s + s0) ** 2)
    got = entry.Lxx[n // 2, n // 2]
    assert abs(got - expect) / abs(expect) < 1e-4
    assert abs(entry.Lyy[n // 2, n // 2] - expect) / abs(expect) < 1e-4
    assert abs(entry.Lxy[n // 2, n // 2]) < 1e-10


def test_ramp_derivative_is_unit():
    n = 64
    xx = np.tile(np.arange(n, dtype=np.float64), (n, 1))
    s = 4.0
    entry = derivatives(xx, s, trunc_mult=8.0)
    r = int(np.ceil(8.0 * np.sqrt(s)))
    inner = (slice(r, n - r), slice(r, n - r))
    assert np.max(np.abs(entry.Lx[inner] - 1.0)) < 1e-9
    assert np.max(np.abs(entry.Ly[inner])) < 1e-9
    entry_t = derivatives(xx.T, s, trunc_mult=8.0)
    assert np.max(np.abs(entry_t.Ly[inner] - 1.0)) < 1e-9


def test_polynomial_second_derivatives():
    n = 72
    y, x = np.mgrid[0:n, 0:n].astype(np.float64)
    s = 2.5
    r = int(np.ceil(8.0 * np.sqrt(s)))
    inner = (slice(r, n - r), slice(r, n - r))
    e_xy = derivatives(x * y, s, trunc_mult=8.0)
    assert np.max(np.abs(e_xy.Lxy[inner] - 1.0)) < 1e-6
    e_xx = derivatives(x * x, s, trunc_mult=8.0)
    assert np.max(np.abs(e_xx.Lxx[inner] - 2.0)) < 1e-6
    assert np.max(np.abs(e_xx.Lyy[inner])) < 1e-6


def test_smoothed_impulse_width_follows_scale():
    # second moment of the smoothing kernel equals the scale parameter
    for s in (1.0, 4.0, 9.0):
        g = make_kernel(np.sqrt(s), 0, trunc_mult=6.0).taps
        x = np.arange(len(g), dtype=np.float64) - (len(g) - 1) / 2
        var = float(np.sum(g * x * x))
        assert abs(var - s) / s < 1e-3


def test_normalize_derivative_powers():
    v = 3.0
    assert normalize_derivative(v, 4.0, 1) == v * 2.0
    assert normalize_derivative(v, 4.0, 2) == v * 4.0
    assert normalize_derivative(v, 4.0, 2, gamma=0.5) == v * 2.0
    assert normalize_derivative(v, 4.0, 0) == v


def test_build_stack_orders_and_validates():
    rng = np.random.default_rng(2)
    img = rng.standard_normal((32, 32))
    stack = build_stack(img, (1.0, 2.0, 4.0))
    assert stack.scales == (1.0, 2.0, 4.0)
    solo = derivatives(img, 2.0)
    assert np.array_equal(stack.entries[1].Lx, solo.Lx)
    with pytest.raises(ValueError):
        build_stack(img, (2.0, 1.0))
    with pytest.raises(ValueError):
        build_stack(img, ())


@settings(max_examples=25, deadline=None)
@given(s=st.floats(0.25, 50.0), c=st.floats(-10.0, 10.0))
def test_smooth_preserves_constants(s, c):
    img = np.full((20, 20), c)
    out = smooth(img, s)
    assert np.max(np.abs(out - c)) < 1e-12 * max(1.0, abs(c))


@settings(max_examples=15, deadline=None)
@given(s=st.floats(0.25, 25.0))
def test_smooth_is_linear(s):
    rng = np.random.default_rng(9)
    a = rng.standard_normal((16, 16))
    b = rng.standard_normal((16, 16))
    lhs = smooth(a + 2.0 * b, s)
    rhs = smooth(a, s) + 2.0 * smooth(b, s)
    assert np.max(np.abs(lhs - rhs)) < 1e-12
