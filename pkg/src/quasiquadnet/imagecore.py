"""Image buffers, file IO, colour conversion and geometric helpers.

All pixel data is carried as float64 numpy arrays indexed [y, x] with
intensities nominally in [0, 1].  Greyscale images load as an ImagePlane;
colour images load as a ColourImage of three planes plus a colourspace tag.

Supported file formats: PGM (P2/P5), PPM (P3/P6) and PNG (8- or 16-bit,
greyscale or RGB).  PNG images with an alpha channel are rejected.  Sixteen-bit
samples are divided by the file's maxval (65535 for PNG), eight-bit samples by
the header maxval, so every loaded plane lands in [0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class ImagePlane:
    """Single-channel float64 image."""

    data: np.ndarray = field(repr=False)

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape


@dataclass(frozen=True)
class ColourImage:
    """Three-channel float64 image with a colourspace tag ('rgb' or 'luv')."""

    planes: tuple[np.ndarray, np.ndarray, np.ndarray] = field(repr=False)
    space: str = 'rgb'

    @property
    def shape(self) -> tuple[int, int]:
        return self.planes[0].shape


def _as_plane(data) -> np.ndarray:
    a = np.ascontiguousarray(data, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError('expected a 2-D plane, got shape %s' % (a.shape,))
    return a


# ---------------------------------------------------------------------------
# PNM (PGM / PPM) reading and writing
# ---------------------------------------------------------------------------

_PNM_MAGICS = {b'P2': ('grey', False), b'P5': ('grey', True),
               b'P3': ('rgb', False), b'P6': ('rgb', True)}


def _pnm_header_tokens(buf: bytes, count: int) -> tuple[list[int], int]:
    """Read `count` whitespace-separated integers, skipping '#' comments.

    Returns the values and the offset one byte past the last header token's
    trailing whitespace byte (PNM binary rasters start exactly there).
    """
    vals: list[int] = []
    i = 0
    n = len(buf)
    while len(vals) < count:
        while i < n and buf[i:i + 1].isspace():
            i += 1
        if i < n and buf[i:i + 1] == b'#':
            while i < n and buf[i] not in (0x0a, 0x0d):
                i += 1
            continue
        j = i
        while j < n and not buf[j:j + 1].isspace():
            j += 1
        tok = buf[i:j]
        if not tok:
            raise ValueError('truncated PNM header')
        if not tok.isdigit():
            raise ValueError('bad PNM header token %r' % tok)
        vals.append(int(tok))
        i = j
        if len(vals) == count:
            if i >= n:
                raise ValueError('truncated PNM file (no raster)')
            i += 1  # exactly one whitespace byte separates header and raster
    return vals, i


def _read_pnm(buf: bytes):
    magic = buf[:2]
    kind, binary = _PNM_MAGICS[magic]
    (width, height, maxval), raster_off = _pnm_header_tokens(buf[2:], 3)
    raster_off += 2
    if width <= 0 or height <= 0:
        raise ValueError('bad PNM dimensions %dx%d' % (width, height))
    if not 0 < maxval < 65536:
        raise ValueError('bad PNM maxval %d' % maxval)

    nchan = 3 if kind == 'rgb' else 1
    count = width * height * nchan
    if binary:
        dtype = np.dtype('>u2') if maxval > 255 else np.dtype('u1')
        raw = buf[raster_off:raster_off + count * dtype.itemsize]
        if len(raw) < count * dtype.itemsize:
            raise ValueError('truncated PNM raster')
        vals = np.frombuffer(raw, dtype=dtype).astype(np.float64)
    else:
        toks = buf[raster_off - 1:].split()
        if len(toks) < count:
            raise ValueError('truncated PNM raster')
        vals = np.array([int(t) for t in toks[:count]], dtype=np.float64)
    if vals.max(initial=0.0) > maxval:
        raise ValueError('PNM sample exceeds maxval %d' % maxval)

    vals /= float(maxval)
    if kind == 'grey':
        return ImagePlane(data=vals.reshape(height, width))
    rgb = vals.reshape(height, width, 3)
    return ColourImage(planes=(rgb[:, :, 0].copy(), rgb[:, :, 1].copy(),
                               rgb[:, :, 2].copy()), space='rgb')


def save_pgm(data, path, bits: int = 16, normalize: bool = False) -> None:
    """Write a plane as binary PGM (P5), quantized to 8 or 16 bits.

    With normalize=True the plane is min-max rescaled to [0, 1] first
    (useful for debug dumps of signed or unbounded maps); otherwise values
    are clipped to [0, 1].
    """
    a = _as_plane(data)
    if bits not in (8, 16):
        raise ValueError('bits must be 8 or 16 (got %s)' % bits)
    if normalize:
        lo, hi = float(a.min()), float(a.max())
        a = (a - lo) / (hi - lo) if hi > lo else np.zeros_like(a)
    a = np.clip(a, 0.0, 1.0)
    maxval = (1 << bits) - 1
    q = np.rint(a * maxval)
    header = b'P5\n%d %d\n%d\n' % (a.shape[1], a.shape[0], maxval)
    body = q.astype('>u2' if bits == 16 else 'u1').tobytes()
    Path(path).write_bytes(header + body)


# ---------------------------------------------------------------------------
# PNG reading (via OpenCV; Pillow mishandles 16-bit PNGs)
# ---------------------------------------------------------------------------

def _read_png(path: Path):
    import cv2

    arr = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if arr is None:
        raise ValueError('unreadable PNG file: %s' % path)
    if arr.dtype == np.uint8:
        denom = 255.0
    elif arr.dtype == np.uint16:
        denom = 65535.0
    else:
        raise ValueError('unsupported PNG sample type %s in %s'
                         % (arr.dtype, path))
    if arr.ndim == 2:
        return ImagePlane(data=arr.astype(np.float64) / denom)
    if arr.ndim == 3 and arr.shape[2] == 3:
        bgr = arr.astype(np.float64) / denom
        return ColourImage(planes=(bgr[:, :, 2].copy(), bgr[:, :, 1].copy(),
                                   bgr[:, :, 0].copy()), space='rgb')
    raise ValueError('unsupported channel layout (%s channels) in %s'
                     % (arr.shape[2] if arr.ndim == 3 else arr.ndim, path))


def load_image(path):
    """Load a PGM/PPM/PNG file as an ImagePlane or ColourImage.

    The format is detected from the file's magic bytes, not its extension.
    """
    path = Path(path)
    try:
        buf = path.read_bytes()
    except OSError as exc:
        raise ValueError('cannot read image file %s: %s' % (path, exc))
    if buf[:2] in _PNM_MAGICS:
        return _read_pnm(buf)
    if buf[:8] == b'\x89PNG\r\n\x1a\n':
        return _read_png(path)
    raise ValueError('unrecognized image format in %s' % path)


# ---------------------------------------------------------------------------
# Colour conversion: sRGB -> CIE 1976 L*u*v*, rescaled to [0, 1]
# ---------------------------------------------------------------------------

_SRGB_TO_XYZ = np.array([
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
])
_WHITE = _SRGB_TO_XYZ @ np.ones(3)
_UN = 4.0 * _WHITE[0] / (_WHITE[0] + 15.0 * _WHITE[1] + 3.0 * _WHITE[2])
_VN = 9.0 * _WHITE[1] / (_WHITE[0] + 15.0 * _WHITE[1] + 3.0 * _WHITE[2])

L_RANGE = (0.0, 100.0)
UV_RANGE = (-134.0, 220.0)


def _srgb_linear(c: np.ndarray) -> np.ndarray:
    return np.where(c <= 0.04045, c / 12.92, ((c + 0.055) / 1.055) ** 2.4)


def rgb_to_luv(img: ColourImage) -> ColourImage:
    """Convert sRGB (D65) in [0,1] to rescaled CIE 1976 L*u*v* planes.

    L* in [0, 100] maps to [0, 1]; u*, v* in [-134, 220] map to [0, 1].
    Achromatic inputs give u* = v* = 0 exactly (mid-range after rescaling).
    Out-of-gamut results are clipped.
    """
    if img.space != 'rgb':
        raise ValueError("expected an 'rgb' image, got %r" % img.space)
    r, g, b = (np.clip(_as_plane(p), 0.0, 1.0) for p in img.planes)
    lin = np.stack([_srgb_linear(c) for c in (r, g, b)])
    X = np.tensordot(_SRGB_TO_XYZ[0], lin, axes=1)
    Y = np.tensordot(_SRGB_TO_XYZ[1], lin, axes=1)
    Z = np.tensordot(_SRGB_TO_XYZ[2], lin, axes=1)

    yr = Y / _WHITE[1]
    delta3 = (6.0 / 29.0) ** 3
    Lstar = np.where(yr > delta3, 116.0 * np.cbrt(yr) - 16.0,
                     (29.0 / 3.0) ** 3 * yr)

    denom = X + 15.0 * Y + 3.0 * Z
    safe = denom > 0
    up = np.where(safe, 4.0 * X / np.where(safe, denom, 1.0), _UN)
    vp = np.where(safe, 9.0 * Y / np.where(safe, denom, 1.0), _VN)
    ustar = 13.0 * Lstar * (up - _UN)
    vstar = 13.0 * Lstar * (vp - _VN)

    lo, hi = UV_RANGE
    planes = (
        np.clip(Lstar / L_RANGE[1], 0.0, 1.0),
        np.clip((ustar - lo) / (hi - lo), 0.0, 1.0),
        np.clip((vstar - lo) / (hi - lo), 0.0, 1.0),
    )
    return ColourImage(planes=planes, space='luv')


# ---------------------------------------------------------------------------
# Resampling and quarter-turn rotation
# ---------------------------------------------------------------------------

def _interp_matrix(n_in: int, n_out: int, factor: float,
                   method: str) -> np.ndarray:
    """Rows of interpolation weights mapping n_in samples to n_out.

    Output sample j reads the input at (j + 0.5)/factor - 0.5 (pixel areas
    aligned edge to edge), with source indices clamped at the borders.
    Methods: 'bilinear' (2 taps) and 'bicubic' (Catmull-Rom, 4 taps).
    """
    src = (np.arange(n_out, dtype=np.float64) + 0.5) / factor - 0.5
    base = np.floor(src).astype(np.int64)
    t = src - base
    W = np.zeros((n_out, n_in))
    if method == 'bilinear':
        offs_w = [(0, 1.0 - t), (1, t)]
    elif method == 'bicubic':
        t2, t3 = t * t, t * t * t
        offs_w = [
            (-1, -0.5 * t3 + t2 - 0.5 * t),
            (0, 1.5 * t3 - 2.5 * t2 + 1.0),
            (1, -1.5 * t3 + 2.0 * t2 + 0.5 * t),
            (2, 0.5 * t3 - 0.5 * t2),
        ]
    else:
        raise ValueError("resample method must be 'bilinear' or 'bicubic' "
                         '(got %r)' % method)
    rows = np.arange(n_out)
    for off, w in offs_w:
        cols = np.clip(base + off, 0, n_in - 1)
        np.add.at(W, (rows, cols), w)
    return W


def resample(data, factor: float, method: str = 'bilinear') -> np.ndarray:
    """Resample a plane by a uniform factor (>1 upsamples, <1 downsamples).

    Output dimensions are round(dim * factor), at least 1.  factor == 1.0
    reproduces the input exactly for both methods.
    """
    a = _as_plane(data)
    if factor <= 0:
        raise ValueError('factor must be positive (got %s)' % factor)
    h, w = a.shape
    oh = max(1, int(round(h * factor)))
    ow = max(1, int(round(w * factor)))
    Wy = _interp_matrix(h, oh, factor, method)
    Wx = _interp_matrix(w, ow, factor, method)
    return Wy @ a @ Wx.T


def rotate90(data, quarter_turns: int = 1) -> np.ndarray:
    """Rotate a plane by quarter_turns * 90 degrees.

    One positive quarter turn is the +pi/2 rotation in the (x right, y down)
    image frame, i.e. the +x axis maps onto +y.  Any integer number of turns
    is accepted; the result is always a fresh array.
    """
    a = _as_plane(data)
    return np.rot90(a, k=-int(quarter_turns)).copy()
