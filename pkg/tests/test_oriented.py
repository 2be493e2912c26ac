"""Steered directional derivatives and the oriented quadrature measure."""

import numpy as np
import pytest

from quasiquadnet import (OrientationSet, QuadratureParams, derivatives,
                          oriented_qq, oriented_qq_image, oriented_qq_rotated,
                          post_smooth, quasi_quadrature_signal, rotate90,
                          scale_response_curve, smooth, steer)
from quasiquadnet.oriented import directional_kernel

P0 = QuadratureParams()


def _noise(shape=(64, 64), seed=0, s=2.0):
    rng = np.random.default_rng(seed)
    return smooth(rng.standard_normal(shape), s)


def test_orientation_set_angles():
    angles = OrientationSet(8).angles
    assert len(angles) == 8
    assert angles[0] == 0.0
    assert np.allclose(angles, np.arange(8) * np.pi / 8)
    assert max(angles) < np.pi
    with pytest.raises(ValueError):
        OrientationSet(0)


def test_steering_at_axis_angles_is_exact():
    entry = derivatives(_noise(), 4.0)
    lphi, lphiphi = steer(entry, 0.0)
    assert np.array_equal(lphi, entry.Lx)
    assert np.array_equal(lphiphi, entry.Lxx)
    lphi, lphiphi = steer(entry, np.pi / 2)
    assert np.max(np.abs(lphi - entry.Ly)) < 1e-15
    assert np.max(np.abs(lphiphi - entry.Lyy)) < 1e-15


def test_steering_antiperiodicity():
    entry = derivatives(_noise(seed=5), 2.0)
    for phi in (0.3, 1.1, 2.9):
        l1a, l2a = steer(entry, phi)
        l1b, l2b = steer(entry, phi + np.pi)
        assert np.max(np.abs(l1a + l1b)) < 1e-12
        assert np.max(np.abs(l2a - l2b)) < 1e-12


def test_steering_energy_is_rotation_invariant():
    # first-order energy: L_phi^2 + L_{phi+pi/2}^2 == Lx^2 + Ly^2
    entry = derivatives(_noise(seed=2), 3.0)
    base = entry.Lx ** 2 + entry.Ly ** 2
    for phi in (0.2, 0.9, 2.2):
        a, _ = steer(entry, phi)
        b, _ = steer(entry, phi + np.pi / 2)
        assert np.max(np.abs(a * a + b * b - base)) < 1e-12


def test_oriented_qq_is_pi_periodic_and_nonnegative():
    entry = derivatives(_noise(seed=7), 5.0)
    for phi in (0.0, 0.7, 1.9):
        q1 = oriented_qq(entry, phi, P0)
        q2 = oriented_qq(entry, phi + np.pi, P0)
        assert np.all(q1 >= 0.0)
        assert np.max(np.abs(q1 - q2)) < 1e-12


def test_steered_path_matches_rotated_kernel_oracle():
    img = _noise((72, 72), seed=3)
    s = 4.0
    for phi in (np.pi / 8, 3 * np.pi / 8, 1.0):
        fast = oriented_qq_image(img, phi, s, P0, trunc_mult=8.0)
        dense = oriented_qq_rotated(img, phi, s, P0, trunc_mult=8.0)
        scale = np.max(np.abs(dense))
        assert np.max(np.abs(fast - dense)) / scale < 1e-6


def test_directional_kernel_reduces_to_axis_derivatives():
    s = 2.25
    k1 = directional_kernel(0.0, s, 1, trunc_mult=4.0)
    r = (k1.shape[0] - 1) // 2
    y, x = np.mgrid[-r:r + 1, -r:r + 1].astype(np.float64)
    g = np.exp(-(x * x + y * y) / (2 * s)) / (2 * np.pi * s)
    assert np.max(np.abs(k1 - (-x / s) * g)) < 1e-15
    k2 = directional_kernel(np.pi / 2, s, 2, trunc_mult=4.0)
    assert np.max(np.abs(k2 - (y * y - s) / (s * s) * g)) < 1e-15


def test_blob_centre_matches_response_curves():
    # the oriented 2-D pipeline on normalized blob inputs reproduces the
    # 1-D closed forms at the centre pixel, order by order
    n = 129
    c = n // 2
    s0, s = 16.0, 16.0
    y, x = np.mgrid[0:n, 0:n].astype(np.float64) - c
    g = np.exp(-(x * x + y * y) / (2 * s0)) / (2 * np.pi * s0)
    inputs = {
        0: g,
        1: np.sqrt(s0) * (-x / s0) * g,
        2: s0 * (x * x - s0) / (s0 * s0) * g,
    }
    for order, img in inputs.items():
        q = oriented_qq_image(img, 0.0, s, P0, trunc_mult=6.0)
        want = scale_response_curve(order, s0, np.array([s]), P0)[0]
        assert abs(q[c, c] - want) / want < 2e-3, order


def test_quarter_turn_reindexes_steering():
    img = _noise((48, 48), seed=9)
    s = 4.0
    for phi in (0.0, np.pi / 8, 1.2):
        a = oriented_qq_image(rotate90(img, 1), phi, s, P0)
        b = rotate90(oriented_qq_image(img, phi - np.pi / 2, s, P0), 1)
        assert np.max(np.abs(a - b)) < 1e-9


def test_rowwise_image_reduces_to_signal_pipeline():
    # an image constant along y behaves like independent rows
    rng = np.random.default_rng(21)
    row = np.convolve(rng.standard_normal(128), np.ones(5) / 5.0, 'same')
    img = np.tile(row, (64, 1))
    s = 6.0
    q2d = oriented_qq_image(img, 0.0, s, P0)
    q1d = quasi_quadrature_signal(row, s, P0)
    assert np.max(np.abs(q2d[32] - q1d)) < 1e-12


def test_post_smooth_behaviour():
    q = np.abs(_noise(seed=4)) + 0.5
    out = post_smooth(q, 0.0)
    assert np.array_equal(out, q)
    assert out is not q
    out = post_smooth(q, 4.0)
    assert out.shape == q.shape
    assert np.all(out >= 0.0)
    const = post_smooth(np.full((16, 16), 2.0), 3.0)
    assert np.max(np.abs(const - 2.0)) < 1e-12
