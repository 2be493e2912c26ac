"""Quasi quadrature along one dimension.

The measure combines the squared first- and second-order scale-normalized
derivatives of a smoothed signal into one phase-insensitive response,

    Q = sqrt((s * Lx**2 + C * s**2 * Lxx**2) / s**gamma),

where s is the smoothing variance, C weights the second-order term against
the first-order term and gamma couples the two normalization exponents
(gamma = 0 gives maximal scale invariance of the peak response).

Besides the discrete pipeline this module carries the closed-form analysis
for rotationally symmetric Gaussian-derivative probes: the response-at-center
curves over scale, their analytic argmax, and the ripple-minimizing choice of
C.  The probe underlying the closed forms is a symmetric 2-D Gaussian
(derivative) blob measured along one axis through its center; it separates
into the 1-D pipeline times an exact transverse factor 1/sqrt(2*pi*(s+s0)),
which is how blob_response_discrete() realizes it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import convolve1d

from .scalespace import TRUNC_DEFAULT, make_kernel

#: ripple-minimizing second-order weight at s == s0
C_DEFAULT = 8.0 / 11.0


@dataclass(frozen=True)
class QuadratureParams:
    """Weights of the quadrature measure.

    second_order_weight is the C factor above; gamma the normalization
    coupling (first order uses exponent 1-gamma, second order 1-gamma/2).
    """

    second_order_weight: float = C_DEFAULT
    gamma: float = 0.0

    def __post_init__(self):
        if self.second_order_weight <= 0:
            raise ValueError('second_order_weight must be > 0 (got %s)'
                             % self.second_order_weight)


def quasi_quadrature_1d(lx, lxx, s: float,
                        params: QuadratureParams = QuadratureParams()):
    """Pointwise quadrature of un-normalized derivative values at scale s."""
    if s <= 0:
        raise ValueError('scale s must be > 0 (got %s)' % s)
    lx = np.asarray(lx, dtype=np.float64)
    lxx = np.asarray(lxx, dtype=np.float64)
    c = params.second_order_weight
    e = s * lx * lx + c * s * s * lxx * lxx
    return np.sqrt(e / s ** params.gamma)


def quasi_quadrature_signal(f, s: float,
                            params: QuadratureParams = QuadratureParams(),
                            trunc_mult: float = TRUNC_DEFAULT) -> np.ndarray:
    """Discrete pipeline on a 1-D signal: derivative kernels, then quadrature."""
    f = np.asarray(f, dtype=np.float64)
    if f.ndim != 1:
        raise ValueError('expected a 1-D signal, got shape %s' % (f.shape,))
    sigma = math.sqrt(s) if s > 0 else 0.0
    if s <= 0:
        raise ValueError('scale s must be > 0 (got %s)' % s)
    g1 = make_kernel(sigma, 1, trunc_mult).taps
    g2 = make_kernel(sigma, 2, trunc_mult).taps
    lx = convolve1d(f, g1, mode='mirror')
    lxx = convolve1d(f, g2, mode='mirror')
    return quasi_quadrature_1d(lx, lxx, s, params)


# ---------------------------------------------------------------------------
# Choice of the second-order weight C
# ---------------------------------------------------------------------------

def optimal_C(s: float, s0: float) -> float:
    """Ripple-minimizing C for a Gaussian blob of variance s0 probed at s.

    Minimizes the spatial oscillation of Q**2 along the blob; equals
    4*(s + s0)/(11*s), i.e. 8/11 at s == s0.
    """
    if s <= 0 or s0 <= 0:
        raise ValueError('s and s0 must be > 0 (got s=%s, s0=%s)' % (s, s0))
    return 4.0 * (s + s0) / (11.0 * s)


def optimal_C_numeric(s: float, s0: float, gamma: float = 0.0,
                      x_max: float = 20.0, step: float = 1e-3,
                      c_max: float = 2.0, tol: float = 1e-8) -> float:
    """Numeric counterpart of optimal_C.

    Builds the closed-form Q**2 profile of a Gaussian blob input (variance
    s0, probed at scale s), integrates the squared spatial derivative of
    Q**2 by the trapezoid rule on x in [-x_max, x_max], and golden-section
    searches C in [0, c_max] for the minimum ripple.

    Q**2 is linear in C, Q**2 = a(x) + C*b(x) with

        a = K * g2 * x**2 * t**2,    b = K * g2 * s * (t - x**2)**2,

    t = s + s0, g2 the squared Gaussian density at variance t and
    K = s**(1-gamma)/t**4; the analytic x-derivatives of a and b feed the
    integrand directly.
    """
    if s <= 0 or s0 <= 0:
        raise ValueError('s and s0 must be > 0 (got s=%s, s0=%s)' % (s, s0))
    t = s + s0
    x = np.arange(-x_max, x_max + step / 2, step)
    g2 = np.exp(-x * x / t) / (2.0 * math.pi * t)
    dg2 = -2.0 * x / t * g2
    K = s ** (1.0 - gamma) / t ** 4
    da = K * (dg2 * x * x * t * t + g2 * 2.0 * x * t * t)
    db = K * s * (dg2 * (t - x * x) ** 2 + g2 * 2.0 * (t - x * x) * (-2.0 * x))

    def ripple(c: float) -> float:
        d = da + c * db
        return float(np.trapezoid(d * d, dx=step))

    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    lo, hi = 0.0, c_max
    c1 = hi - invphi * (hi - lo)
    c2 = lo + invphi * (hi - lo)
    f1, f2 = ripple(c1), ripple(c2)
    while hi - lo > tol:
        if f1 < f2:
            hi, c2, f2 = c2, c1, f1
            c1 = hi - invphi * (hi - lo)
            f1 = ripple(c1)
        else:
            lo, c1, f1 = c1, c2, f2
            c2 = lo + invphi * (hi - lo)
            f2 = ripple(c2)
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Response-over-scale analysis for Gaussian-derivative blob probes
# ---------------------------------------------------------------------------

def scale_response_curve(input_order: int, s0: float, s_values,
                         params: QuadratureParams = QuadratureParams()):
    """Closed-form quadrature response at the center of a blob probe.

    The probe is a rotationally symmetric 2-D Gaussian-derivative of order
    input_order (0, 1 or 2) and variance s0, scale-normalized with exponent
    input_order/2, measured along its derivative axis.  Returns the response
    at each scale in s_values:

        order 0:  sqrt(C) * s**(1-gamma/2)        / (2*pi*(s+s0)**2)
        order 1:  sqrt(s0) * s**((1-gamma)/2)     / (2*pi*(s+s0)**2)
        order 2:  3*sqrt(C) * s0 * s**(1-gamma/2) / (2*pi*(s+s0)**3)
    """
    if input_order not in (0, 1, 2):
        raise ValueError('input_order must be 0, 1 or 2 (got %s)' % input_order)
    if s0 <= 0:
        raise ValueError('s0 must be > 0 (got %s)' % s0)
    s = np.asarray(s_values, dtype=np.float64)
    if np.any(s <= 0):
        raise ValueError('all scales must be > 0')
    c = params.second_order_weight
    g = params.gamma
    two_pi = 2.0 * math.pi
    if input_order == 0:
        return math.sqrt(c) * s ** (1.0 - g / 2.0) / (two_pi * (s + s0) ** 2)
    if input_order == 1:
        return math.sqrt(s0) * s ** ((1.0 - g) / 2.0) / (two_pi * (s + s0) ** 2)
    return 3.0 * math.sqrt(c) * s0 * s ** (1.0 - g / 2.0) / (two_pi * (s + s0) ** 3)


def argmax_over_scale(input_order: int, s0: float, gamma: float = 0.0) -> float:
    """Scale at which the response curve peaks, in closed form.

        order 0:  s0 * (2 - gamma) / (2 + gamma)
        order 1:  s0 * (1 - gamma) / (3 + gamma)
        order 2:  s0 * (2 - gamma) / (4 + gamma)

    Raises ValueError when gamma lies outside the open interval where an
    interior maximum exists (e.g. gamma >= 2 for order 0).
    """
    if s0 <= 0:
        raise ValueError('s0 must be > 0 (got %s)' % s0)
    if input_order == 0:
        lo, hi, num, den = -2.0, 2.0, 2.0 - gamma, 2.0 + gamma
    elif input_order == 1:
        lo, hi, num, den = -3.0, 1.0, 1.0 - gamma, 3.0 + gamma
    elif input_order == 2:
        lo, hi, num, den = -4.0, 2.0, 2.0 - gamma, 4.0 + gamma
    else:
        raise ValueError('input_order must be 0, 1 or 2 (got %s)' % input_order)
    if not lo < gamma < hi:
        raise ValueError('no scale maximum for order %d at gamma=%s '
                         '(needs %g < gamma < %g)' % (input_order, gamma, lo, hi))
    return s0 * num / den


def blob_response_discrete(input_order: int, s0: float, s: float,
                           params: QuadratureParams = QuadratureParams(),
                           trunc_mult: float = TRUNC_DEFAULT) -> float:
    """Discrete realization of scale_response_curve at one scale.

    Samples the 1-D factor of the separable blob probe (the scale-normalized
    Gaussian derivative of order input_order at variance s0), runs the
    discrete 1-D pipeline at scale s, takes the center value, and multiplies
    by the probe's exact transverse factor 1/sqrt(2*pi*(s+s0)).
    """
    if input_order not in (0, 1, 2):
        raise ValueError('input_order must be 0, 1 or 2 (got %s)' % input_order)
    if s0 <= 0 or s <= 0:
        raise ValueError('s and s0 must be > 0 (got s=%s, s0=%s)' % (s, s0))
    radius = int(math.ceil(trunc_mult * math.sqrt(s)
                           + (trunc_mult + 2.0) * math.sqrt(s0)))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    g = np.exp(-x * x / (2.0 * s0)) / math.sqrt(2.0 * math.pi * s0)
    if input_order == 0:
        f = g
    elif input_order == 1:
        f = math.sqrt(s0) * (-x / s0) * g
    else:
        f = s0 * (x * x - s0) / (s0 * s0) * g
    q = quasi_quadrature_signal(f, s, params, trunc_mult)
    transverse = 1.0 / math.sqrt(2.0 * math.pi * (s + s0))
    return float(q[radius]) * transverse
