#!/usr/bin/env python3
"""Regenerate the two bundled test textures.

Both are 256x256 16-bit PGMs, fully deterministic, synthesized at double
resolution and downsampled so they carry little energy near the Nyquist
limit (rescaling checks assume reasonably band-limited input).

texture_a: isotropic multi-octave smoothed noise.
texture_b: oriented gratings, smooth blobs and a global gradient over a
noise floor, so orientation-selective channels get distinct content.

Run from the repository root after installing the package:
    python tools/make_bundled_images.py
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from quasiquadnet import resample, save_pgm, smooth

SIZE = 256
OUTDIR = Path(__file__).resolve().parents[1] / 'src' / 'quasiquadnet' / 'data'


def _to_unit(a: np.ndarray) -> np.ndarray:
    lo, hi = float(a.min()), float(a.max())
    return 0.02 + 0.96 * (a - lo) / (hi - lo)


def texture_a(n: int = SIZE) -> np.ndarray:
    rng = np.random.default_rng(20240517)
    big = np.zeros((2 * n, 2 * n))
    for octave, sigma in enumerate((2.0, 6.0, 18.0, 54.0)):
        noise = rng.standard_normal((2 * n, 2 * n))
        layer = smooth(noise, sigma * sigma)
        big += layer * (2.2 ** octave) / max(float(np.std(layer)), 1e-12)
    return _to_unit(resample(big, 0.5, method='bilinear'))


def texture_b(n: int = SIZE) -> np.ndarray:
    rng = np.random.default_rng(911013)
    m = 2 * n
    yy, xx = np.mgrid[0:m, 0:m].astype(np.float64)
    img = 0.35 * (xx + yy) / (2 * m)

    def window(cy, cx, radius):
        return np.exp(-((yy - cy) ** 2 + (xx - cx) ** 2) / (2 * radius ** 2))

    # oriented gratings in gaussian windows, wavelengths well above the
    # final-resolution pixel pitch
    gratings = ((0.15, 110, 110, 70, 24.0), (0.55, 120, 390, 60, 30.0),
                (0.90, 370, 140, 80, 36.0), (1.35, 360, 380, 65, 26.0),
                (0.00, 250, 250, 55, 40.0))
    for theta, cy, cx, radius, wavelength in gratings:
        phase = (xx * np.cos(theta) + yy * np.sin(theta)) \
            * (2.0 * np.pi / wavelength)
        img += 0.8 * window(cy, cx, radius) * np.sin(phase)

    for cy, cx, radius, amp in ((60, 430, 22, 1.0), (450, 60, 30, -0.9),
                                (440, 440, 18, 0.8), (70, 250, 14, -0.7)):
        img += amp * window(cy, cx, radius)

    img += 0.25 * smooth(rng.standard_normal((m, m)), 9.0)
    img = smooth(img, 2.0)
    return _to_unit(resample(img, 0.5, method='bilinear'))


def main() -> None:
    OUTDIR.mkdir(parents=True, exist_ok=True)
    for name, make in (('texture_a.pgm', texture_a),
                       ('texture_b.pgm', texture_b)):
        save_pgm(make(), OUTDIR / name, bits=16)
        print('wrote', OUTDIR / name)


if __name__ == '__main__':
    main()
