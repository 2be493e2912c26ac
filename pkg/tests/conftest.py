"""Shared fixtures: deterministic images, a small labeled corpus, and the
acceptance summary printed at the end of the run."""

import os
from pathlib import Path

import numpy as np
import pytest

import quasiquadnet as qq

DATA_DIR = Path(qq.__file__).parent / 'data'

_ACCEPTANCE: list[tuple[str, str, str]] = []


@pytest.fixture
def acceptance():
    """Recorder for acceptance criteria; one summary line per criterion."""

    def record(name: str, ok: bool, detail: str = ''):
        _ACCEPTANCE.append((name, 'PASS' if ok else 'FAIL', detail))
        assert ok, '%s [%s]' % (name, detail)

    return record


@pytest.fixture
def acceptance_skip():
    def record(name: str, reason: str):
        _ACCEPTANCE.append((name, 'SKIP', reason))
        pytest.skip(reason)

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.section('acceptance criteria')
    for name, status, detail in _ACCEPTANCE:
        suffix = ' (%s)' % detail if detail else ''
        terminalreporter.write_line('%s: %s%s' % (name, status, suffix))


def unit_range(a: np.ndarray) -> np.ndarray:
    lo, hi = float(a.min()), float(a.max())
    return (a - lo) / (hi - lo)


@pytest.fixture
def smooth_noise():
    """Factory for reproducible band-limited test images in [0, 1]."""

    def make(shape=(96, 96), sigma2=4.0, seed=0):
        rng = np.random.default_rng(seed)
        return unit_range(qq.smooth(rng.standard_normal(shape), sigma2))

    return make


@pytest.fixture
def data_dir():
    return DATA_DIR


@pytest.fixture(scope='session')
def texture_a():
    return qq.load_image(DATA_DIR / 'texture_a.pgm').data


@pytest.fixture(scope='session')
def texture_b():
    return qq.load_image(DATA_DIR / 'texture_b.pgm').data


def build_corpus(root, n_per_class=6, size=64, seed=42):
    """Three visually distinct texture classes in flat_dirs layout."""
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    for cls in ('blobs', 'diag', 'horiz'):
        d = Path(root) / cls
        d.mkdir(parents=True, exist_ok=True)
        for i in range(n_per_class):
            noise = rng.standard_normal((size, size))
            if cls == 'blobs':
                img = qq.smooth(noise, 4.0)
            elif cls == 'horiz':
                img = 0.6 * np.sin(yy * 2 * np.pi / 9
                                   + rng.uniform(0, 2 * np.pi)) \
                    + 1.5 * qq.smooth(noise, 2.0)
            else:
                img = 0.6 * np.sin((xx + yy) * 2 * np.pi / 12
                                   + rng.uniform(0, 2 * np.pi)) \
                    + 1.5 * qq.smooth(noise, 2.0)
            qq.save_pgm(unit_range(img), d / ('%s_%02d.pgm' % (cls, i)),
                        bits=16)


@pytest.fixture(scope='session')
def corpus_root(tmp_path_factory):
    root = tmp_path_factory.mktemp('corpus')
    build_corpus(root)
    return root


@pytest.fixture(scope='session')
def kth_root():
    """Real dataset root, if the environment provides one."""
    return os.environ.get('QUASIQUADNET_KTHTIPS2B_ROOT')
