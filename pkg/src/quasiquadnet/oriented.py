"""Oriented quasi quadrature over 2-D images.

Directional derivatives at any angle are steered from the five base partials
(first and second order) of one scale-space entry:

    L_phi     = cos(phi) * Lx + sin(phi) * Ly
    L_phiphi  = cos(phi)**2 * Lxx + 2*cos(phi)*sin(phi) * Lxy + sin(phi)**2 * Lyy

which is exact for Gaussian-derivative responses, so one derivative pass per
scale serves every orientation.  The oriented measure then mirrors the 1-D
definition with the isotropic smoothing variance in both terms:

    Q_phi = sqrt((s * L_phi**2 + C * s**2 * L_phiphi**2) / s**gamma).

A rotated-kernel path (dense convolution with sampled directional-derivative
kernels) is kept alongside as an independent oracle for the steering identity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import convolve

from .quad1d import QuadratureParams
from .scalespace import TRUNC_DEFAULT, StackEntry, derivatives, smooth


@dataclass(frozen=True)
class OrientationSet:
    """num_orientations angles evenly covering the half-circle [0, pi)."""

    num_orientations: int

    def __post_init__(self):
        if self.num_orientations < 1:
            raise ValueError('need at least one orientation (got %s)'
                             % self.num_orientations)

    @property
    def angles(self) -> tuple[float, ...]:
        m = self.num_orientations
        return tuple(i * math.pi / m for i in range(m))


def steer(entry: StackEntry, phi: float) -> tuple[np.ndarray, np.ndarray]:
    """First and second directional derivatives at angle phi (un-normalized)."""
    c, s = math.cos(phi), math.sin(phi)
    lphi = c * entry.Lx + s * entry.Ly
    lphiphi = c * c * entry.Lxx + 2.0 * c * s * entry.Lxy + s * s * entry.Lyy
    return lphi, lphiphi


def quadrature_of_normalized(nd1: np.ndarray, nd2: np.ndarray,
                             second_order_weight: float) -> np.ndarray:
    """Quadrature from already gamma-normalized directional derivatives."""
    return np.sqrt(nd1 * nd1 + second_order_weight * nd2 * nd2)


def normalized_steered(entry: StackEntry, phi: float,
                       gamma: float) -> tuple[np.ndarray, np.ndarray]:
    """Steered derivatives scaled by s**((1-gamma)/2) and s**(1-gamma/2).

    These are exactly the two terms whose squares the oriented measure sums,
    and the quantities the texture descriptor reduces.
    """
    lphi, lphiphi = steer(entry, phi)
    s = entry.s
    return (s ** ((1.0 - gamma) / 2.0) * lphi,
            s ** (1.0 - gamma / 2.0) * lphiphi)


def oriented_qq(entry: StackEntry, phi: float,
                params: QuadratureParams = QuadratureParams()) -> np.ndarray:
    """Oriented quasi quadrature map at angle phi from one derivative entry."""
    nd1, nd2 = normalized_steered(entry, phi, params.gamma)
    return quadrature_of_normalized(nd1, nd2, params.second_order_weight)


def post_smooth(q: np.ndarray, s_int: float,
                trunc_mult: float = TRUNC_DEFAULT) -> np.ndarray:
    """Smooth the squared measure at integration scale s_int, then re-root.

    s_int == 0 returns a copy.  Values stay non-negative, constants are
    preserved, and spatial maxima can only shrink.
    """
    if s_int < 0:
        raise ValueError('integration scale must be >= 0 (got %s)' % s_int)
    if s_int == 0:
        return np.array(q, dtype=np.float64, copy=True)
    sq = smooth(np.asarray(q, dtype=np.float64) ** 2, s_int, trunc_mult)
    return np.sqrt(np.maximum(sq, 0.0))


# ---------------------------------------------------------------------------
# Rotated-kernel oracle path
# ---------------------------------------------------------------------------

def directional_kernel(phi: float, s: float, order: int,
                       trunc_mult: float = TRUNC_DEFAULT) -> np.ndarray:
    """Sample the closed-form directional Gaussian-derivative kernel.

    order 1:  -u/s * g(x, y; s)
    order 2:  (u**2 - s)/s**2 * g(x, y; s)      with u = x*cos(phi)+y*sin(phi)

    Returned on a square grid of radius ceil(trunc_mult*sqrt(s)), raw sampled
    values (no renormalization).
    """
    if order not in (1, 2):
        raise ValueError('directional kernel order must be 1 or 2 (got %s)'
                         % order)
    if s <= 0:
        raise ValueError('scale s must be > 0 (got %s)' % s)
    radius = int(math.ceil(trunc_mult * math.sqrt(s)))
    k = np.arange(-radius, radius + 1, dtype=np.float64)
    xx = k[None, :]
    yy = k[:, None]
    g = np.exp(-(xx * xx + yy * yy) / (2.0 * s)) / (2.0 * math.pi * s)
    u = xx * math.cos(phi) + yy * math.sin(phi)
    if order == 1:
        return -u / s * g
    return (u * u - s) / (s * s) * g


def oriented_qq_rotated(img: np.ndarray, phi: float, s: float,
                        params: QuadratureParams = QuadratureParams(),
                        trunc_mult: float = TRUNC_DEFAULT) -> np.ndarray:
    """Oracle route: dense 2-D convolution with rotated derivative kernels."""
    img = np.asarray(img, dtype=np.float64)
    lphi = convolve(img, directional_kernel(phi, s, 1, trunc_mult),
                    mode='mirror')
    lphiphi = convolve(img, directional_kernel(phi, s, 2, trunc_mult),
                       mode='mirror')
    g = params.gamma
    nd1 = s ** ((1.0 - g) / 2.0) * lphi
    nd2 = s ** (1.0 - g / 2.0) * lphiphi
    return quadrature_of_normalized(nd1, nd2, params.second_order_weight)


def oriented_qq_image(img: np.ndarray, phi: float, s: float,
                      params: QuadratureParams = QuadratureParams(),
                      trunc_mult: float = TRUNC_DEFAULT) -> np.ndarray:
    """Convenience: derivative pass at scale s, then oriented_qq."""
    return oriented_qq(derivatives(img, s, trunc_mult), phi, params)
