"""Mean-reduced texture descriptors, nearest-neighbour classification and
benchmark plumbing.

The descriptor reduces every channel transition of the cascade to five
numbers: spatial means of the signed gamma-normalized first and second
steered derivatives, of their absolute values, and of the quadrature map
itself (the next layer's channel).  Means are taken over interior pixels,
excluding a border band of ceil(3 * accumulated sigma) capped at a quarter
of the smaller image dimension so coarse configurations remain usable on
small images.

Index order of the flat vector: colour plane (grey, or L/U/V), then base
sigma as listed in the config, then layer, then orientation tuple in
lexicographic order, then feature.  Note one sign convention: orientation
angles live on the half-circle [0, pi), so when a rotation wraps an
orientation index past it, the signed first-derivative mean flips sign
(the other four features are unchanged).
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cascade import NetworkConfig, _parallel_map, build_network, config_hash
from .imagecore import ColourImage, ImagePlane, load_image, rgb_to_luv

FEATURES = ('deriv1', 'deriv1_abs', 'deriv2', 'deriv2_abs', 'quad')

_LUMA = (0.2126729, 0.7151522, 0.0721750)


@dataclass(frozen=True)
class Descriptor:
    """Flat descriptor vector plus provenance."""

    values: np.ndarray = field(repr=False)
    config_hash: str = ''
    colour: str = 'grey'
    source: str = ''

    def __len__(self) -> int:
        return len(self.values)


def descriptor_length(cfg: NetworkConfig, colour: str = 'grey') -> int:
    """Closed-form length: planes * |base_sigmas| * 5 * sum_k channels(k)."""
    per_sigma = len(FEATURES) * sum(
        cfg.channel_count(k) for k in range(1, cfg.num_layers + 1))
    planes = 3 if colour == 'luv' else 1
    return planes * len(cfg.base_sigmas) * per_sigma


def layout_entries(cfg: NetworkConfig, colour: str = 'grey'):
    """Yield (plane, base_sigma, layer, orientation_tuple, feature) in index order."""
    planes = ('L', 'U', 'V') if colour == 'luv' else ('grey',)
    m = cfg.num_orientations
    for plane in planes:
        for sigma in cfg.base_sigmas:
            for k in range(1, cfg.num_layers + 1):
                arity = min(k, cfg.max_tuple_len)
                for t in itertools.product(range(m), repeat=arity):
                    for f in FEATURES:
                        yield plane, sigma, k, t, f


def transition_band(cfg: NetworkConfig, base_sigma: float, k: int,
                    shape: tuple[int, int]) -> int:
    """Interior border exclusion for the layer-k transition planes.

    Band = ceil(3 * sqrt(accumulated variance through layers 1..k)), capped
    at a quarter of the smaller dimension.
    """
    acc = sum(cfg.layer_scale(j, base_sigma) for j in range(1, k + 1))
    band = int(math.ceil(3.0 * math.sqrt(acc)))
    return min(band, min(shape) // 4)


def _grey_plane(image, colour: str) -> list[np.ndarray]:
    if isinstance(image, np.ndarray):
        image = ImagePlane(data=np.asarray(image, dtype=np.float64))
    if colour == 'grey':
        if isinstance(image, ImagePlane):
            return [image.data]
        if isinstance(image, ColourImage):
            if image.space != 'rgb':
                raise ValueError('grey descriptor needs rgb or grey input, '
                                 'got %r' % image.space)
            lin = [np.clip(p, 0.0, 1.0) for p in image.planes]
            lin = [np.where(c <= 0.04045, c / 12.92,
                            ((c + 0.055) / 1.055) ** 2.4) for c in lin]
            return [sum(w * c for w, c in zip(_LUMA, lin))]
        raise ValueError('unsupported image object %r' % type(image))
    if colour == 'luv':
        if isinstance(image, ImagePlane):
            raise ValueError('luv descriptor needs a colour image')
        if image.space == 'rgb':
            image = rgb_to_luv(image)
        if image.space != 'luv':
            raise ValueError('unsupported colourspace %r' % image.space)
        return list(image.planes)
    raise ValueError("colour must be 'grey' or 'luv' (got %r)" % colour)


def compute_descriptor(image, cfg: NetworkConfig, colour: str = 'grey',
                       threads: int = 1, source: str = '') -> Descriptor:
    """Mean-reduced descriptor of one image under one configuration.

    `image` may be an ImagePlane, a ColourImage or a raw 2-D array.  With
    colour='grey' a colour input is reduced to linear luminance first; with
    colour='luv' the three converted planes are described independently and
    concatenated.
    """
    planes = _grey_plane(image, colour)
    blocks = []
    for plane in planes:
        if min(plane.shape) < 8:
            raise ValueError('image too small after border exclusion: %s'
                             % (plane.shape,))
        h, w = plane.shape
        for sigma in cfg.base_sigmas:
            bands = {k: transition_band(cfg, sigma, k, (h, w))
                     for k in range(1, cfg.num_layers + 1)}
            acc: list[float] = []

            def reduce_channel(k, _tuple, nd1, nd2, q, _s, _acc=acc,
                               _bands=bands):
                b = _bands[k]
                win = (slice(b, h - b), slice(b, w - b))
                _acc.append(float(nd1[win].mean()))
                _acc.append(float(np.abs(nd1[win]).mean()))
                _acc.append(float(nd2[win].mean()))
                _acc.append(float(np.abs(nd2[win]).mean()))
                _acc.append(float(q[win].mean()))

            build_network(plane, cfg, sigma, collect=reduce_channel,
                          threads=threads)
            blocks.append(np.asarray(acc))
    values = np.concatenate(blocks)
    expect = descriptor_length(cfg, colour)
    if len(values) != expect:
        raise AssertionError('descriptor length %d != expected %d'
                             % (len(values), expect))
    return Descriptor(values=values, config_hash=config_hash(cfg),
                      colour=colour, source=source)


# ---------------------------------------------------------------------------
# Persistence: raw float64 vector + JSON sidecar
# ---------------------------------------------------------------------------

def save_descriptor(desc: Descriptor, path, cfg: NetworkConfig | None = None) -> Path:
    """Write `<path>.qqd` (little-endian float64) and `<path>.qqd.json`.

    Returns the data file path.  The sidecar records length, ordering rule,
    feature names and the config hash (plus the full config when given), so
    a vector can be decoded without re-deriving the layout.
    """
    path = Path(path)
    if path.suffix != '.qqd':
        path = path.with_name(path.name + '.qqd')
    path.write_bytes(desc.values.astype('<f8').tobytes())
    sidecar = {
        'format': 'qqd-1',
        'dtype': 'float64',
        'byte_order': 'little',
        'length': int(len(desc.values)),
        'colour': desc.colour,
        'config_hash': desc.config_hash,
        'source': desc.source,
        'features': list(FEATURES),
        'index_order': 'colour plane, then base sigma, then layer, then '
                       'orientation tuple (lexicographic), then feature',
        'sign_note': 'signed first-derivative means flip sign when an '
                     'orientation index wraps past the half-circle',
    }
    if cfg is not None:
        sidecar['config'] = cfg.to_dict()
    Path(str(path) + '.json').write_text(
        json.dumps(sidecar, indent=2, sort_keys=True) + '\n')
    return path


def load_descriptor(path) -> Descriptor:
    path = Path(path)
    meta = json.loads(Path(str(path) + '.json').read_text())
    if meta.get('format') != 'qqd-1':
        raise ValueError('not a qqd-1 sidecar: %s.json' % path)
    raw = path.read_bytes()
    if len(raw) != meta['length'] * 8:
        raise ValueError('descriptor size mismatch in %s: %d bytes for '
                         'length %d' % (path, len(raw), meta['length']))
    values = np.frombuffer(raw, dtype='<f8').astype(np.float64)
    return Descriptor(values=values, config_hash=meta.get('config_hash', ''),
                      colour=meta.get('colour', 'grey'),
                      source=meta.get('source', ''))


# ---------------------------------------------------------------------------
# Nearest-neighbour classification
# ---------------------------------------------------------------------------

def _standardize(train: np.ndarray, other: np.ndarray):
    mu = train.mean(axis=0)
    sd = train.std(axis=0)
    sd = np.maximum(sd, 1e-12)
    return (train - mu) / sd, (other - mu) / sd


def _squared_distances(queries: np.ndarray, refs: np.ndarray) -> np.ndarray:
    qq = np.einsum('ij,ij->i', queries, queries)
    rr = np.einsum('ij,ij->i', refs, refs)
    d2 = qq[:, None] + rr[None, :] - 2.0 * queries @ refs.T
    return np.maximum(d2, 0.0)


def nnc_classify(train_x: np.ndarray, train_y, test_x: np.ndarray,
                 metric: str = 'euclidean') -> np.ndarray:
    """Nearest-neighbour labels for test_x given labeled training rows.

    Metrics: 'euclidean', or 'euclidean_standardized' which z-scores every
    dimension by the training mean/std (std floored at 1e-12).  Exact
    distance ties resolve to the lowest training row index.
    """
    train_x = np.asarray(train_x, dtype=np.float64)
    test_x = np.asarray(test_x, dtype=np.float64)
    train_y = np.asarray(train_y)
    if train_x.ndim != 2 or test_x.ndim != 2:
        raise ValueError('descriptor matrices must be 2-D')
    if train_x.shape[0] != len(train_y):
        raise ValueError('train_x rows (%d) != labels (%d)'
                         % (train_x.shape[0], len(train_y)))
    if train_x.shape[1] != test_x.shape[1]:
        raise ValueError('dimension mismatch: train %d vs test %d'
                         % (train_x.shape[1], test_x.shape[1]))
    if metric == 'euclidean_standardized':
        train_x, test_x = _standardize(train_x, test_x)
    elif metric != 'euclidean':
        raise ValueError('unknown metric %r' % metric)
    d2 = _squared_distances(test_x, train_x)
    return train_y[np.argmin(d2, axis=1)]


# ---------------------------------------------------------------------------
# Dataset ingestion and splits
# ---------------------------------------------------------------------------

_IMG_SUFFIXES = ('.png', '.ppm', '.pgm')
_SCALE_RE = re.compile(r'scale_(\d+)')
_POSE_RE = re.compile(r'im_(\d+)')


@dataclass(frozen=True)
class DatasetItem:
    path: str
    label: str
    sample: str
    scale: int | None = None
    pose: int | None = None


@dataclass(frozen=True)
class LabeledDataset:
    items: tuple[DatasetItem, ...]
    classes: tuple[str, ...]
    layout: str

    def labels(self) -> np.ndarray:
        index = {c: i for i, c in enumerate(self.classes)}
        return np.array([index[it.label] for it in self.items])


def ingest_dataset(root, layout: str) -> LabeledDataset:
    """Scan a directory tree into a labeled dataset.

    layout 'kthtips2b': root/<class>/sample_<letter>/<name with scale_N and
    im_N>.  layout 'flat_dirs': root/<class>/<image files>, no sample or
    scale structure.
    """
    root = Path(root)
    if not root.is_dir():
        raise ValueError('dataset root %s is not a directory' % root)
    classes = sorted(p.name for p in root.iterdir() if p.is_dir())
    if not classes:
        raise ValueError('no class directories under %s' % root)
    items: list[DatasetItem] = []
    if layout == 'kthtips2b':
        for cls in classes:
            for sdir in sorted((root / cls).iterdir()):
                if not sdir.is_dir() or not sdir.name.startswith('sample_'):
                    continue
                sample = sdir.name[len('sample_'):]
                for f in sorted(sdir.iterdir()):
                    if f.suffix.lower() not in _IMG_SUFFIXES:
                        continue
                    ms = _SCALE_RE.search(f.name)
                    mp = _POSE_RE.search(f.name)
                    items.append(DatasetItem(
                        path=str(f), label=cls, sample=sample,
                        scale=int(ms.group(1)) if ms else None,
                        pose=int(mp.group(1)) if mp else None))
    elif layout == 'flat_dirs':
        for cls in classes:
            for f in sorted((root / cls).iterdir()):
                if f.suffix.lower() in _IMG_SUFFIXES:
                    items.append(DatasetItem(path=str(f), label=cls,
                                             sample=f.stem))
    else:
        raise ValueError("layout must be 'kthtips2b' or 'flat_dirs' "
                         '(got %r)' % layout)
    if not items:
        raise ValueError('no images found under %s (layout %s)'
                         % (root, layout))
    return LabeledDataset(items=tuple(items), classes=tuple(classes),
                          layout=layout)


TRAIN_SCALES = (2, 4, 6, 8, 10)
TEST_SCALES = (3, 5, 7, 9)


def make_splits(ds: LabeledDataset, split: str, seed: int = 0):
    """Index splits [(name, train_idx, test_idx), ...] for a dataset.

    'sample_holdout' holds out each physical sample in turn; 'scale_split'
    trains on relative scales (2, 4, 6, 8, 10) and tests on (3, 5, 7, 9);
    'random_half' is one seeded 50/50 split stratified per class; 'loo' is
    handled by the benchmark driver as all-pairs leave-one-out.
    """
    n = len(ds.items)
    idx = np.arange(n)
    if split == 'sample_holdout':
        samples = sorted({it.sample for it in ds.items})
        if len(samples) < 2:
            raise ValueError('sample_holdout needs at least two samples')
        out = []
        for s in samples:
            test = np.array([i for i in idx if ds.items[i].sample == s])
            train = np.array([i for i in idx if ds.items[i].sample != s])
            out.append(('holdout_%s' % s, train, test))
        return out
    if split == 'scale_split':
        if any(it.scale is None for it in ds.items):
            raise ValueError('scale_split needs scale labels on every item')
        train = np.array([i for i in idx if ds.items[i].scale in TRAIN_SCALES])
        test = np.array([i for i in idx if ds.items[i].scale in TEST_SCALES])
        if not len(train) or not len(test):
            raise ValueError('scale_split produced an empty side')
        return [('scale_split', train, test)]
    if split == 'random_half':
        rng = np.random.default_rng(seed)
        train_parts, test_parts = [], []
        for cls in ds.classes:
            members = np.array([i for i in idx if ds.items[i].label == cls])
            rng.shuffle(members)
            cut = (len(members) + 1) // 2
            train_parts.append(members[:cut])
            test_parts.append(members[cut:])
        return [('random_half_seed%d' % seed,
                 np.sort(np.concatenate(train_parts)),
                 np.sort(np.concatenate(test_parts)))]
    if split == 'loo':
        return [('loo', None, None)]
    raise ValueError('unknown split %r' % split)


# ---------------------------------------------------------------------------
# Benchmark driver
# ---------------------------------------------------------------------------

def _descriptor_matrix(ds: LabeledDataset, cfg: NetworkConfig, colour: str,
                       threads: int, cache_dir) -> np.ndarray:
    chash = config_hash(cfg)
    cache = Path(cache_dir) if cache_dir else None
    if cache:
        cache.mkdir(parents=True, exist_ok=True)

    def one(item: DatasetItem) -> np.ndarray:
        if cache:
            key = hashlib.sha256(('%s|%s|%s' % (item.path, chash, colour))
                                 .encode()).hexdigest()[:24]
            f = cache / (key + '.qqd')
            if f.exists():
                return load_descriptor(f).values
        img = load_image(item.path)
        desc = compute_descriptor(img, cfg, colour=colour,
                                  source=item.path)
        if cache:
            save_descriptor(desc, f, cfg)
        return desc.values

    rows = _parallel_map(one, list(ds.items), threads)
    return np.vstack(rows)


def _confusion(n_classes: int, true_y: np.ndarray,
               pred_y: np.ndarray) -> list[list[int]]:
    m = np.zeros((n_classes, n_classes), dtype=int)
    np.add.at(m, (true_y, pred_y), 1)
    return m.tolist()


def run_benchmark(ds: LabeledDataset, cfg: NetworkConfig, split: str,
                  metric: str = 'euclidean', colour: str = 'grey',
                  seed: int = 0, threads: int = 1,
                  cache_dir=None) -> dict:
    """Descriptor + nearest-neighbour accuracy over the requested splits.

    Returns a JSON-ready report (byte-identical across reruns for the same
    inputs and seed).  With split='loo' and a standardized metric, the
    z-scoring statistics come from the full set rather than per-held-out-item
    retraining.
    """
    x = _descriptor_matrix(ds, cfg, colour, threads, cache_dir)
    y = ds.labels()
    nc = len(ds.classes)
    results = []
    if split == 'loo':
        xs = x
        if metric == 'euclidean_standardized':
            xs, _ = _standardize(x, x)
        elif metric != 'euclidean':
            raise ValueError('unknown metric %r' % metric)
        d2 = _squared_distances(xs, xs)
        np.fill_diagonal(d2, np.inf)
        pred = y[np.argmin(d2, axis=1)]
        results.append({
            'name': 'loo', 'n_train': len(y) - 1, 'n_test': len(y),
            'accuracy': float(np.mean(pred == y)),
            'confusion': _confusion(nc, y, pred),
        })
    else:
        for name, train, test in make_splits(ds, split, seed):
            pred = nnc_classify(x[train], y[train], x[test], metric)
            results.append({
                'name': name, 'n_train': int(len(train)),
                'n_test': int(len(test)),
                'accuracy': float(np.mean(pred == y[test])),
                'confusion': _confusion(nc, y[test], pred),
            })
    return {
        'config_hash': config_hash(cfg),
        'layout': ds.layout,
        'split': split,
        'metric': metric,
        'colour': colour,
        'seed': seed,
        'classes': list(ds.classes),
        'n_images': len(ds.items),
        'descriptor_length': int(x.shape[1]),
        'splits': results,
        'mean_accuracy': float(np.mean([r['accuracy'] for r in results])),
    }
