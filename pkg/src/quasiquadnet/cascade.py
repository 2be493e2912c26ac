"""Hierarchical cascade of oriented quasi quadrature layers.

Layer 0 is the smoothed input at the base scale s0 = base_sigma**2.  Layer k
(k >= 1) applies the oriented measure at scale s_k = s0 * ratio**(2*(k-1))
to every channel of the previous layer, once per orientation, so channels are
addressed by tuples of orientation indices (newest last).  The first layer
differentiates the raw input at s1 = s0, i.e. it reads the same scale-space
representation that layer 0 stores; deeper layers smooth the previous layer's
raw channel maps from scratch at their own scale.

Channel tuples are capped at a sliding window of the max_tuple_len most
recent orientations: once parents carry a full-length tuple, they are summed
over their oldest orientation index before the next expansion, which keeps
the channel count at num_orientations**max_tuple_len and makes the deeper
layers insensitive to orientation history beyond the window.
"""

from __future__ import annotations

import hashlib
import json
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .imagecore import save_pgm
from .oriented import (OrientationSet, normalized_steered, post_smooth,
                       quadrature_of_normalized)
from .quad1d import C_DEFAULT
from .scalespace import SIGMA_MIN, TRUNC_DEFAULT, derivatives, smooth


@dataclass(frozen=True)
class NetworkConfig:
    """Architecture and measure parameters of the cascade.

    base_sigmas lists the base smoothing sigmas of the parallel network
    copies (the descriptor concatenates one block per entry);
    level_scale_ratio is the sigma ratio between consecutive layers.
    """

    num_orientations: int = 8
    max_tuple_len: int = 2
    num_layers: int = 4
    level_scale_ratio: float = 2.0
    base_sigmas: tuple[float, ...] = (1.0, 2.0, 4.0, 8.0)
    second_order_weight: float = C_DEFAULT
    gamma: float = 0.0
    post_smooth_ratio: float = 0.0
    trunc_mult: float = TRUNC_DEFAULT

    def __post_init__(self):
        object.__setattr__(self, 'base_sigmas',
                           tuple(float(v) for v in self.base_sigmas))
        if self.num_orientations < 1:
            raise ValueError('num_orientations must be >= 1 (got %s)'
                             % self.num_orientations)
        if self.max_tuple_len < 1:
            raise ValueError('max_tuple_len must be >= 1 (got %s)'
                             % self.max_tuple_len)
        if self.num_layers < 1:
            raise ValueError('num_layers must be >= 1 (got %s)'
                             % self.num_layers)
        if self.level_scale_ratio <= 1.0:
            raise ValueError('level_scale_ratio must be > 1 (got %s)'
                             % self.level_scale_ratio)
        if not self.base_sigmas:
            raise ValueError('base_sigmas must not be empty')
        if any(v < SIGMA_MIN for v in self.base_sigmas):
            raise ValueError('base sigmas must be >= %.2f (got %s)'
                             % (SIGMA_MIN, (self.base_sigmas,)))
        if any(b <= a for a, b in zip(self.base_sigmas, self.base_sigmas[1:])):
            raise ValueError('base_sigmas must be strictly increasing')
        if self.second_order_weight <= 0:
            raise ValueError('second_order_weight must be > 0 (got %s)'
                             % self.second_order_weight)
        if self.post_smooth_ratio < 0:
            raise ValueError('post_smooth_ratio must be >= 0 (got %s)'
                             % self.post_smooth_ratio)
        if self.trunc_mult <= 0:
            raise ValueError('trunc_mult must be > 0 (got %s)'
                             % self.trunc_mult)

    def layer_scale(self, k: int, base_sigma: float) -> float:
        """Smoothing variance used by layer k (k >= 1)."""
        if k < 1:
            raise ValueError('layer index must be >= 1 (got %s)' % k)
        return base_sigma ** 2 * self.level_scale_ratio ** (2 * (k - 1))

    def channel_count(self, k: int) -> int:
        """Number of channels of layer k: M**min(k, max_tuple_len)."""
        if k < 0:
            raise ValueError('layer index must be >= 0 (got %s)' % k)
        return self.num_orientations ** min(k, self.max_tuple_len)

    def to_dict(self) -> dict:
        d = asdict(self)
        d['base_sigmas'] = list(self.base_sigmas)
        return d

    @staticmethod
    def from_dict(d: dict) -> 'NetworkConfig':
        known = {f for f in NetworkConfig.__dataclass_fields__}
        extra = set(d) - known
        if extra:
            raise ValueError('unknown config fields: %s' % sorted(extra))
        kwargs = dict(d)
        if 'base_sigmas' in kwargs:
            kwargs['base_sigmas'] = tuple(kwargs['base_sigmas'])
        return NetworkConfig(**kwargs)


def config_hash(cfg: NetworkConfig) -> str:
    """Stable hex digest of the effective configuration."""
    blob = json.dumps(cfg.to_dict(), sort_keys=True, separators=(',', ':'))
    return hashlib.sha256(blob.encode('ascii')).hexdigest()


@dataclass(frozen=True)
class LayerMaps:
    """Channel maps of one layer, keyed by orientation-index tuples."""

    layer: int
    scale: float
    channels: dict[tuple[int, ...], np.ndarray] = field(repr=False)

    @property
    def arity(self) -> int:
        return len(next(iter(self.channels)))


def pool_orientations(layer: LayerMaps) -> LayerMaps:
    """Sum channel maps over the oldest orientation index of each tuple.

    The result keys are the input tuples minus their first entry; summation
    runs in ascending index order, so the output is independent of how the
    input dict happens to be ordered.
    """
    if layer.arity == 0:
        raise ValueError('channel tuples are empty, nothing to pool')
    pooled: dict[tuple[int, ...], np.ndarray] = {}
    for t in sorted(layer.channels):
        rest = t[1:]
        if rest in pooled:
            pooled[rest] = pooled[rest] + layer.channels[t]
        else:
            pooled[rest] = layer.channels[t].copy()
    return LayerMaps(layer=layer.layer, scale=layer.scale, channels=pooled)


def _parallel_map(fn, items, threads: int) -> list:
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def build_network(img: np.ndarray, cfg: NetworkConfig, base_sigma: float,
                  collect=None, threads: int = 1) -> list[LayerMaps]:
    """Build layers 0..num_layers of the cascade for one base sigma.

    Returns [F0, F1, ..., FL].  When given, collect(k, child_tuple, nd1,
    nd2, q, s_k) is called once per new channel in deterministic order
    (layers ascending, tuples lexicographic) with the gamma-normalized
    steered derivative planes and the channel map; the texture descriptor
    uses this to reduce planes without storing them.
    """
    img = np.ascontiguousarray(img, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError('expected a 2-D image, got shape %s' % (img.shape,))
    if base_sigma < SIGMA_MIN:
        raise ValueError('base_sigma must be >= %.2f (got %s)'
                         % (SIGMA_MIN, base_sigma))
    s0 = base_sigma ** 2
    deepest_sigma = base_sigma * cfg.level_scale_ratio ** (cfg.num_layers - 1)
    radius = int(math.ceil(cfg.trunc_mult * deepest_sigma))
    if min(img.shape) < 2 * radius:
        warnings.warn('image %s is smaller than twice the kernel radius %d at '
                      'the coarsest layer scale; border effects reach the '
                      'whole image and interior bands are capped'
                      % (img.shape, radius))

    angles = OrientationSet(cfg.num_orientations).angles
    layers = [LayerMaps(layer=0, scale=s0, channels={(): smooth(
        img, s0, cfg.trunc_mult)})]

    for k in range(1, cfg.num_layers + 1):
        sk = cfg.layer_scale(k, base_sigma)
        if k == 1:
            parents = {(): img}
        else:
            parents = layers[k - 1].channels
            if len(next(iter(parents))) == cfg.max_tuple_len:
                parents = pool_orientations(layers[k - 1]).channels

        def expand(item, sk=sk):
            ptuple, plane = item
            entry = derivatives(plane, sk, cfg.trunc_mult)
            out = []
            for i, phi in enumerate(angles):
                nd1, nd2 = normalized_steered(entry, phi, cfg.gamma)
                q = quadrature_of_normalized(nd1, nd2,
                                             cfg.second_order_weight)
                if cfg.post_smooth_ratio > 0:
                    q = post_smooth(q, cfg.post_smooth_ratio * sk,
                                    cfg.trunc_mult)
                out.append((ptuple + (i,), nd1, nd2, q))
            return out

        channels: dict[tuple[int, ...], np.ndarray] = {}
        for group in _parallel_map(expand, sorted(parents.items()), threads):
            for ctuple, nd1, nd2, q in group:
                channels[ctuple] = q
                if collect is not None:
                    collect(k, ctuple, nd1, nd2, q, sk)
        layers.append(LayerMaps(layer=k, scale=sk, channels=channels))
    return layers


def dump_maps(layers: list[LayerMaps], outdir, prefix: str = 'map') -> dict:
    """Write every channel map as a normalized 16-bit PGM for inspection.

    Returns a manifest dict mapping each written file to its layer, tuple and
    the [min, max] range that was rescaled onto [0, 1].
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    entries = []
    for lm in layers:
        for t in sorted(lm.channels):
            plane = lm.channels[t]
            name = '%s_L%d_%s.pgm' % (prefix, lm.layer,
                                      '-'.join(str(i) for i in t) or 'base')
            save_pgm(plane, outdir / name, bits=16, normalize=True)
            entries.append({
                'file': name,
                'layer': lm.layer,
                'scale': lm.scale,
                'tuple': list(t),
                'range': [float(plane.min()), float(plane.max())],
            })
    return {'prefix': prefix, 'maps': entries}
