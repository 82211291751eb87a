"""Frequency-domain texture descriptors of degraded slices.

All spectra are computed on the mean-subtracted image so the DC bin
carries nothing; energy statistics exclude DC explicitly. Frequencies
are in cycles per sample along each axis, so the radial Nyquist range
is [0, sqrt(2)/2] and "high frequency" means beyond half-Nyquist,
|f| > 0.25.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import Image

NUM_RADIAL_BINS = 8
NUM_ANGULAR_BINS = 8
HF_CUTOFF_CYCLES = 0.25  # half of the axis Nyquist 0.5


def _values(img) -> np.ndarray:
    arr = img.values if isinstance(img, Image) else np.asarray(img, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D image, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("image must be finite")
    return np.asarray(arr, dtype=np.float64)


def _freq_grids(shape) -> tuple[np.ndarray, np.ndarray]:
    fr = np.fft.fftfreq(shape[0])[:, None]
    fc = np.fft.fftfreq(shape[1])[None, :]
    return np.broadcast_to(fr, shape), np.broadcast_to(fc, shape)


def log_magnitude_spectrum(img) -> np.ndarray:
    """log(1 + |F|) of the mean-subtracted image, DC at the center."""

    vals = _values(img)
    spec = np.fft.fft2(vals - vals.mean())
    return np.fft.fftshift(np.log1p(np.abs(spec)))


def hf_energy_ratio(img) -> float:
    """Fraction of non-DC spectral energy beyond half-Nyquist.

    A flat (constant) image has no energy anywhere and returns 0. White
    noise puts energy uniformly over the frequency square, giving a
    ratio near 1 - pi * 0.25^2 ~ 0.80; pure Nyquist stripes give 1.
    """

    vals = _values(img)
    spec = np.fft.fft2(vals - vals.mean())
    energy = np.abs(spec) ** 2
    fr, fc = _freq_grids(vals.shape)
    radius = np.hypot(fr, fc)
    non_dc = radius > 0.0
    total = float(energy[non_dc].sum())
    if total == 0.0:
        return 0.0
    high = float(energy[non_dc & (radius > HF_CUTOFF_CYCLES)].sum())
    return high / total


@dataclass(frozen=True)
class SpectralDescriptor:
    """17-value spectral shape summary of one slice.

    Eight radial-band energy fractions (equal-width bands over the
    radial frequency range), eight angular-sector energy fractions
    (half-turn sectors; a spectrum's point symmetry makes the full
    turn redundant), and the high-frequency energy ratio. Fractions
    each sum to 1 for any image with non-zero contrast.
    """

    radial: np.ndarray
    angular: np.ndarray
    hf_ratio: float

    def as_list(self) -> list[float]:
        return [float(v) for v in self.radial] + [
            float(v) for v in self.angular
        ] + [float(self.hf_ratio)]


def spectral_descriptor(img) -> SpectralDescriptor:
    vals = _values(img)
    spec = np.fft.fft2(vals - vals.mean())
    energy = np.abs(spec) ** 2
    fr, fc = _freq_grids(vals.shape)
    radius = np.hypot(fr, fc)
    non_dc = radius > 0.0
    total = float(energy[non_dc].sum())

    max_radius = np.sqrt(2.0) * 0.5
    r_edges = np.linspace(0.0, max_radius, NUM_RADIAL_BINS + 1)
    r_idx = np.clip(
        np.digitize(radius, r_edges) - 1, 0, NUM_RADIAL_BINS - 1
    )
    angles = np.mod(np.arctan2(fc, fr), np.pi)
    a_idx = np.clip(
        (angles / (np.pi / NUM_ANGULAR_BINS)).astype(np.int64),
        0,
        NUM_ANGULAR_BINS - 1,
    )

    radial = np.zeros(NUM_RADIAL_BINS)
    angular = np.zeros(NUM_ANGULAR_BINS)
    if total > 0.0:
        e = np.where(non_dc, energy, 0.0)
        radial = np.bincount(
            r_idx.ravel(), weights=e.ravel(), minlength=NUM_RADIAL_BINS
        ) / total
        angular = np.bincount(
            a_idx.ravel(), weights=e.ravel(), minlength=NUM_ANGULAR_BINS
        ) / total
    high = 0.0
    if total > 0.0:
        high = float(energy[non_dc & (radius > HF_CUTOFF_CYCLES)].sum()) / total
    return SpectralDescriptor(radial=radial, angular=angular, hf_ratio=high)
