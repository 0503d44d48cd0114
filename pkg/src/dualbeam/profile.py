"""Illumination-profile analytics: rendered images, thresholded masks, overlap.

Images are plain 2D numpy arrays wrapped with their pixel pitch.  File
formats handled here:

* binary PGM (``P5``), 16-bit big-endian samples (8-bit files with
  ``maxval < 256`` are also read);
* whitespace-delimited text matrices, one image row per line.

Masks are written as 16-bit P5 files with 0 (off) / 65535 (on).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Literal, Optional

import numpy as np

from .beam import AstigmaticBeam, intensity_at
from .errors import DomainError, EstimationError

BORDER_FRACTION = 0.10
MIN_BORDER_PIXELS = 16


@dataclass(frozen=True)
class IntensityImage:
    values: np.ndarray  # shape (height, width), row-major
    pixel_pitch: float = 1.0

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] < 2 or v.shape[1] < 2:
            raise DomainError(f"image must be 2D and at least 2x2, got shape {v.shape}")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise DomainError("image values must be finite and non-negative")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class BinaryMask:
    values: np.ndarray  # bool, shape (height, width)

    def __post_init__(self):
        v = np.array(self.values, dtype=bool)
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def area(self) -> int:
        return int(self.values.sum())


def pixel_centers(n: int, pitch: float) -> np.ndarray:
    """Coordinates of ``n`` pixel centers, symmetric about zero."""
    return (np.arange(n) - (n - 1) / 2.0) * pitch


def render_intensity(beam: AstigmaticBeam, width: int, height: int, pixel_pitch: float) -> IntensityImage:
    """Sample the beam irradiance at pixel centers, beam axis at the image center.

    Axis 1 of the beam runs along image columns (x), axis 2 along rows (y).
    """
    if width < 2 or height < 2 or not pixel_pitch > 0:
        raise DomainError("grid must be at least 2x2 with a positive pitch")
    x = pixel_centers(width, pixel_pitch)
    y = pixel_centers(height, pixel_pitch)
    return IntensityImage(intensity_at(beam, x[None, :], y[:, None]), pixel_pitch)


def border_frame(shape: tuple[int, int]) -> np.ndarray:
    """Boolean selector of the outer 10 % of each dimension."""
    h, w = shape
    bh = max(1, math.ceil(BORDER_FRACTION * h))
    bw = max(1, math.ceil(BORDER_FRACTION * w))
    sel = np.zeros(shape, dtype=bool)
    sel[:bh, :] = sel[-bh:, :] = True
    sel[:, :bw] = sel[:, -bw:] = True
    return sel


def estimate_noise(img: IntensityImage) -> tuple[float, float]:
    """Mean and standard deviation of the image border frame."""
    frame = img.values[border_frame(img.values.shape)]
    if frame.size < MIN_BORDER_PIXELS:
        raise EstimationError(f"border frame has {frame.size} pixels, need >= {MIN_BORDER_PIXELS}")
    sd = float(frame.std())
    if sd == 0:
        raise EstimationError("border frame is constant; supply noise statistics explicitly")
    return float(frame.mean()), sd


def illuminated_mask(
    img: IntensityImage,
    noise_mean: Optional[float] = None,
    noise_sd: Optional[float] = None,
    k: float = 3.0,
) -> BinaryMask:
    """Pixels brighter than ``noise_mean + k * noise_sd``.

    If either statistic is omitted both are estimated from the border frame.
    """
    if noise_mean is None or noise_sd is None:
        noise_mean, noise_sd = estimate_noise(img)
    return BinaryMask(img.values > noise_mean + k * noise_sd)


def iou(a: BinaryMask, b: BinaryMask) -> float:
    """Intersection over union; 0 when both masks are empty."""
    if a.values.shape != b.values.shape:
        raise DomainError(f"mask shapes differ: {a.values.shape} vs {b.values.shape}")
    union = np.count_nonzero(a.values | b.values)
    if union == 0:
        return 0.0
    return np.count_nonzero(a.values & b.values) / union


def cross_section(img: IntensityImage, axis: Literal["horizontal", "vertical"], position: int) -> np.ndarray:
    """One image row (``horizontal``) or column (``vertical``)."""
    if axis == "horizontal":
        n = img.height
    elif axis == "vertical":
        n = img.width
    else:
        raise DomainError(f"axis must be 'horizontal' or 'vertical', got {axis!r}")
    if not 0 <= position < n:
        raise DomainError(f"position {position} out of bounds [0, {n})")
    return img.values[position, :].copy() if axis == "horizontal" else img.values[:, position].copy()


# -- file I/O ---------------------------------------------------------------

_PGM_HEADER = re.compile(rb"P5\s+(?:#[^\n]*\n\s*)*(\d+)\s+(?:#[^\n]*\n\s*)*(\d+)\s+(?:#[^\n]*\n\s*)*(\d+)\s")


def read_pgm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    m = _PGM_HEADER.match(data)
    if not m:
        raise DomainError(f"{path}: not a binary (P5) PGM file")
    w, h, maxval = (int(g) for g in m.groups())
    dtype = ">u2" if maxval > 255 else "u1"
    pixels = np.frombuffer(data, dtype=dtype, count=w * h, offset=m.end())
    return pixels.reshape(h, w).astype(float)


def write_pgm(path, values) -> None:
    """Write a 16-bit big-endian P5 file; values are rounded and clipped to [0, 65535]."""
    v = np.clip(np.rint(np.asarray(values, dtype=float)), 0, 65535).astype(">u2")
    h, w = v.shape
    Path(path).write_bytes(b"P5\n%d %d\n65535\n" % (w, h) + v.tobytes())


def write_mask_pgm(path, mask: BinaryMask) -> None:
    write_pgm(path, mask.values.astype(float) * 65535)


def load_image(path, pixel_pitch: float = 1.0) -> IntensityImage:
    """Read a P5 PGM or a text matrix, chosen by the file's magic bytes."""
    with open(path, "rb") as fh:
        magic = fh.read(2)
    values = read_pgm(path) if magic == b"P5" else np.loadtxt(path, ndmin=2)
    return IntensityImage(values, pixel_pitch)
