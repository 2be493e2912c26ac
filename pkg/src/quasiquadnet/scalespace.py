"""Gaussian scale space on sampled images.

Kernels are sampled Gaussians and sampled Gaussian derivatives, renormalized
so that discrete moment conditions hold exactly: order 0 sums to one, orders
1 and 2 sum to zero.  The scale parameter s is the kernel variance, so
sigma = sqrt(s).  Smoothing and differentiation are separable 1-D passes, with
borders extended by mirroring without repeating the edge sample.

Images are float64 arrays indexed [y, x].  Derivatives are returned
un-normalized; gamma-normalization is applied at read time through
normalize_derivative().
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import convolve1d

SIGMA_MIN = 0.5
TRUNC_DEFAULT = 4.0


@dataclass(frozen=True)
class GaussianKernel:
    """Sampled 1-D Gaussian derivative kernel.

    taps[i] is the weight at offset i - radius, i.e. taps covers the offsets
    -radius .. +radius.  Convolving a signal with taps approximates smoothing
    with variance sigma**2 followed by `order` differentiations.
    """

    sigma: float
    order: int
    trunc_mult: float
    taps: np.ndarray = field(repr=False)

    @property
    def radius(self) -> int:
        return (len(self.taps) - 1) // 2


def make_kernel(sigma: float, order: int = 0,
                trunc_mult: float = TRUNC_DEFAULT) -> GaussianKernel:
    """Sample a Gaussian (derivative) kernel at integer offsets.

    The support is cut at radius ceil(trunc_mult * sigma).  The order-0 kernel
    is renormalized to unit sum; orders 1 and 2 are corrected to zero sum by
    subtracting the mean weight, so constants are annihilated exactly.
    """
    if sigma < SIGMA_MIN:
        raise ValueError('sigma must be >= %.2f (got %s)' % (SIGMA_MIN, sigma))
    if order not in (0, 1, 2):
        raise ValueError('derivative order must be 0, 1 or 2 (got %s)' % order)
    if trunc_mult <= 0:
        raise ValueError('trunc_mult must be positive (got %s)' % trunc_mult)

    radius = int(math.ceil(trunc_mult * sigma))
    s = sigma * sigma
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    g = np.exp(-x * x / (2.0 * s)) / math.sqrt(2.0 * math.pi * s)

    if order == 0:
        taps = g / g.sum()
    elif order == 1:
        # antisymmetrizing cancels any summation bias exactly, so the
        # zero-sum property holds without disturbing the odd symmetry
        taps = -x / s * g
        taps = 0.5 * (taps - taps[::-1])
    else:
        taps = (x * x - s) / (s * s) * g
        taps = taps - taps.mean()

    return GaussianKernel(sigma=float(sigma), order=order,
                          trunc_mult=float(trunc_mult), taps=taps)


def _conv_sep(img: np.ndarray, taps_x: np.ndarray, taps_y: np.ndarray) -> np.ndarray:
    """Separable convolution, x pass then y pass, mirrored borders."""
    tmp = convolve1d(img, taps_x, axis=1, mode='mirror')
    return convolve1d(tmp, taps_y, axis=0, mode='mirror')


def smooth(img: np.ndarray, s: float,
           trunc_mult: float = TRUNC_DEFAULT) -> np.ndarray:
    """Smooth an image to scale (variance) s >= 0.

    s == 0 returns an unshared copy of the input.
    """
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError('expected a 2-D image, got shape %s' % (img.shape,))
    if s < 0:
        raise ValueError('scale s must be >= 0 (got %s)' % s)
    if s == 0:
        return img.copy()
    g0 = make_kernel(math.sqrt(s), 0, trunc_mult).taps
    return _conv_sep(img, g0, g0)


@dataclass(frozen=True)
class StackEntry:
    """Scale-space partial derivatives of one image at one scale.

    All planes are un-normalized derivatives of the smoothed image; apply
    normalize_derivative() for gamma-normalized values.
    """

    s: float
    L: np.ndarray = field(repr=False)
    Lx: np.ndarray = field(repr=False)
    Ly: np.ndarray = field(repr=False)
    Lxx: np.ndarray = field(repr=False)
    Lxy: np.ndarray = field(repr=False)
    Lyy: np.ndarray = field(repr=False)


def derivatives(img: np.ndarray, s: float,
                trunc_mult: float = TRUNC_DEFAULT) -> StackEntry:
    """Smoothed image and its five partials up to order 2 at scale s.

    Each output plane is one separable convolution with the appropriate
    sampled-kernel pair; the x passes are shared across planes.
    """
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError('expected a 2-D image, got shape %s' % (img.shape,))
    if s <= 0:
        raise ValueError('derivative scale s must be > 0 (got %s)' % s)
    sigma = math.sqrt(s)
    g0 = make_kernel(sigma, 0, trunc_mult).taps
    g1 = make_kernel(sigma, 1, trunc_mult).taps
    g2 = make_kernel(sigma, 2, trunc_mult).taps

    t0 = convolve1d(img, g0, axis=1, mode='mirror')
    t1 = convolve1d(img, g1, axis=1, mode='mirror')
    t2 = convolve1d(img, g2, axis=1, mode='mirror')

    return StackEntry(
        s=float(s),
        L=convolve1d(t0, g0, axis=0, mode='mirror'),
        Ly=convolve1d(t0, g1, axis=0, mode='mirror'),
        Lyy=convolve1d(t0, g2, axis=0, mode='mirror'),
        Lx=convolve1d(t1, g0, axis=0, mode='mirror'),
        Lxy=convolve1d(t1, g1, axis=0, mode='mirror'),
        Lxx=convolve1d(t2, g0, axis=0, mode='mirror'),
    )


def normalize_derivative(value, s: float, order: int, gamma: float = 1.0):
    """Scale-normalize a derivative value: multiply by s**(order*gamma/2).

    order is the total differentiation order of `value`; gamma = 1 gives the
    classical normalization, gamma = 0 leaves values untouched.
    """
    if order < 0:
        raise ValueError('order must be >= 0 (got %s)' % order)
    if s <= 0:
        raise ValueError('scale s must be > 0 (got %s)' % s)
    if order == 0 or gamma == 0.0:
        return np.asarray(value, dtype=np.float64) * 1.0
    return np.asarray(value, dtype=np.float64) * s ** (order * gamma / 2.0)


@dataclass(frozen=True)
class ScaleSpaceStack:
    """Derivative entries of one image at strictly increasing scales."""

    entries: tuple[StackEntry, ...]

    @property
    def scales(self) -> tuple[float, ...]:
        return tuple(e.s for e in self.entries)


def build_stack(img: np.ndarray, scales,
                trunc_mult: float = TRUNC_DEFAULT) -> ScaleSpaceStack:
    """Compute derivative entries at each requested scale.

    Scales must be strictly increasing and positive.  Every entry is computed
    from the raw input (no incremental smoothing), so entries are independent.
    """
    scales = [float(s) for s in scales]
    if not scales:
        raise ValueError('need at least one scale')
    if any(s <= 0 for s in scales):
        raise ValueError('scales must be positive: %s' % (scales,))
    if any(b <= a for a, b in zip(scales, scales[1:])):
        raise ValueError('scales must be strictly increasing: %s' % (scales,))
    return ScaleSpaceStack(entries=tuple(
        derivatives(img, s, trunc_mult) for s in scales))
