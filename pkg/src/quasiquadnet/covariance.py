"""Property checks: the network's behaviour under rescaling and rotation.

Scale: downsample the input by 1/S, divide every base sigma by S (so all
layer scale levels drop by S^2), rebuild, and compare each layer map
against the original network sampled at the geometrically corresponding
positions.  With a nonzero gamma offset the maps pick up a factor
S^(gamma * layer) per quadrature stage, which is divided out before
comparison.  Agreement is measured by a symmetric relative L1 deviation
per channel, over an interior window clear of boundary effects.

Rotation: quarter turns permute the orientation channels by
turns * M / 2 positions (the angle grid covers the half-circle), and the
maps themselves rotate.  Mirror boundary handling commutes with quarter
turns, so agreement is machine precision and is reported as a max
absolute difference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import ndimage

from .cascade import NetworkConfig, build_network, config_hash
from .imagecore import resample, rotate90
from .scalespace import SIGMA_MIN


@dataclass(frozen=True)
class LayerDeviation:
    """Per-layer agreement figures for one base sigma."""

    base_sigma: float
    layer: int
    n_channels: int
    band: int
    mean_deviation: float
    max_deviation: float


@dataclass(frozen=True)
class CovarianceReport:
    transform: str
    config_hash: str
    tolerance: float
    passed: bool
    layers: tuple[LayerDeviation, ...]


def report_to_json(report: CovarianceReport) -> dict:
    return {
        'transform': report.transform,
        'config_hash': report.config_hash,
        'tolerance': report.tolerance,
        'passed': bool(report.passed),
        'layers': [
            {
                'base_sigma': d.base_sigma,
                'layer': d.layer,
                'n_channels': d.n_channels,
                'band': d.band,
                'mean_deviation': d.mean_deviation,
                'max_deviation': d.max_deviation,
            }
            for d in report.layers
        ],
    }


def _relative_l1(a: np.ndarray, b: np.ndarray) -> float:
    num = float(np.sum(np.abs(a - b)))
    den = 0.5 * float(np.sum(np.abs(a) + np.abs(b)))
    # zero-sum kernels leave a ~1e-18 residue on constant regions; both
    # sides at that noise floor means the channel pair agrees
    if den <= 1e-12 * a.size:
        return 0.0
    return num / den


def check_scale_covariance(img: np.ndarray, cfg: NetworkConfig,
                           factor: float = 2.0, tol: float = 0.05,
                           threads: int = 1) -> CovarianceReport:
    """Compare the network of a 1/factor downsampled image against the
    original network, layer by layer, for every configured base sigma.

    factor > 1 shrinks the input.  The downsampled run needs base sigmas
    of at least SIGMA_MIN after division by factor; too-fine configs are
    rejected up front.
    """
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError('expected a single 2-D plane')
    if factor <= 0:
        raise ValueError('factor must be positive (got %s)' % factor)
    small_sigmas = tuple(s / factor for s in cfg.base_sigmas)
    if min(small_sigmas) < SIGMA_MIN:
        raise ValueError(
            'base sigma %.4g / factor %.4g falls below the sigma floor %.2f'
            % (min(cfg.base_sigmas), factor, SIGMA_MIN))
    cfg_small = replace(cfg, base_sigmas=small_sigmas)

    small = resample(img, 1.0 / factor, method='bilinear')
    hs, ws = small.shape
    devs: list[LayerDeviation] = []
    for sigma, sigma_s in zip(cfg.base_sigmas, small_sigmas):
        big_layers = build_network(img, cfg, sigma, threads=threads)
        small_layers = build_network(small, cfg_small, sigma_s,
                                     threads=threads)
        # one conservative window for all layers: deepest accumulated
        # smoothing on the small side, capped at a quarter of the frame
        acc = sum(cfg_small.layer_scale(j, sigma_s)
                  for j in range(1, cfg.num_layers + 1))
        band = min(int(math.ceil(3.0 * math.sqrt(acc))), min(hs, ws) // 4)
        ys = np.arange(band, hs - band, dtype=np.float64)
        xs = np.arange(band, ws - band, dtype=np.float64)
        if not len(ys) or not len(xs):
            raise ValueError('image too small for this configuration: no '
                             'interior left after a border of %d' % band)
        # centre-aligned coordinate map into the original frame
        by = (ys + 0.5) * factor - 0.5
        bx = (xs + 0.5) * factor - 0.5
        grid = np.meshgrid(by, bx, indexing='ij')
        for k in range(cfg.num_layers + 1):
            gain = factor ** (-k * cfg.gamma)
            per_channel = []
            for key in sorted(small_layers[k].channels):
                a = small_layers[k].channels[key][band:hs - band,
                                                  band:ws - band] * gain
                big = big_layers[k].channels[key]
                b = ndimage.map_coordinates(big, grid, order=1,
                                            mode='nearest')
                per_channel.append(_relative_l1(a, b))
            devs.append(LayerDeviation(
                base_sigma=sigma, layer=k,
                n_channels=len(per_channel), band=band,
                mean_deviation=float(np.mean(per_channel)),
                max_deviation=float(np.max(per_channel))))
    passed = all(d.max_deviation <= tol for d in devs)
    return CovarianceReport(transform='scale:%g' % factor,
                            config_hash=config_hash(cfg), tolerance=tol,
                            passed=passed, layers=tuple(devs))


def _shift_tuple(key: tuple[int, ...], shift: int, m: int) -> tuple[int, ...]:
    return tuple((i - shift) % m for i in key)


def check_rotation_covariance(img: np.ndarray, cfg: NetworkConfig,
                              quarter_turns: int = 1, tol: float = 1e-9,
                              threads: int = 1) -> CovarianceReport:
    """Compare the network of a quarter-turned image against the turned
    maps of the original network with orientation channels shifted by
    quarter_turns * M / 2.

    Requires quarter_turns * M to be even, otherwise the turned angle grid
    does not land on itself.
    """
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError('expected a single 2-D plane')
    q = int(quarter_turns) % 4
    m = cfg.num_orientations
    if (q * m) % 2 != 0:
        raise ValueError('quarter turn by %d does not map %d orientations '
                         'onto themselves' % (q, m))
    shift = (q * m // 2) % m
    rot = rotate90(img, q)
    devs: list[LayerDeviation] = []
    for sigma in cfg.base_sigmas:
        base_layers = build_network(img, cfg, sigma, threads=threads)
        rot_layers = build_network(rot, cfg, sigma, threads=threads)
        for k in range(cfg.num_layers + 1):
            per_channel = []
            for key in sorted(rot_layers[k].channels):
                got = rot_layers[k].channels[key]
                src = base_layers[k].channels[_shift_tuple(key, shift, m)]
                want = rotate90(src, q)
                per_channel.append(float(np.max(np.abs(got - want))))
            devs.append(LayerDeviation(
                base_sigma=sigma, layer=k,
                n_channels=len(per_channel), band=0,
                mean_deviation=float(np.mean(per_channel)),
                max_deviation=float(np.max(per_channel))))
    passed = all(d.max_deviation <= tol for d in devs)
    return CovarianceReport(transform='rot:%d' % q,
                            config_hash=config_hash(cfg), tolerance=tol,
                            passed=passed, layers=tuple(devs))
