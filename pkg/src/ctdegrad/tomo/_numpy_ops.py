"""Pure-NumPy projection kernels.

Reference implementation of the ray-marching forward projector and the
linear-interpolation backprojector. The compiled extension implements
the same sampling scheme point for point; the two are interchangeable
up to floating-point summation order.

Conventions shared by both backends:

* Physical coordinates: x grows with columns, y grows with rows, the
  rotation center is the origin.
* A view at angle theta integrates along the direction
  (-sin theta, cos theta); the detector coordinate of a point is
  t = x cos theta + y sin theta.
* The line integral is a Riemann sum of bilinearly interpolated samples
  at pixel-pitch spacing, times the step length. Samples outside the
  grid contribute zero.
"""

import numpy as np


def _ray_steps(num_detectors: int, det_spacing: float, px_spacing: float) -> np.ndarray:
    # March far enough to cross everything the detector row can see.
    coverage = num_detectors * det_spacing
    count = int(np.ceil(coverage / px_spacing)) + 1
    return (np.arange(count, dtype=np.float64) - (count - 1) / 2.0) * px_spacing


def _bilinear(grid: np.ndarray, rowf: np.ndarray, colf: np.ndarray) -> np.ndarray:
    """Bilinear samples of grid at fractional coordinates, zero outside."""

    h, w = grid.shape
    r0 = np.floor(rowf).astype(np.int64)
    c0 = np.floor(colf).astype(np.int64)
    fr = rowf - r0
    fc = colf - c0
    out = np.zeros(rowf.shape, dtype=np.float64)
    for dr, dc, weight in (
        (0, 0, (1.0 - fr) * (1.0 - fc)),
        (0, 1, (1.0 - fr) * fc),
        (1, 0, fr * (1.0 - fc)),
        (1, 1, fr * fc),
    ):
        rr = r0 + dr
        cc = c0 + dc
        inside = (rr >= 0) & (rr < h) & (cc >= 0) & (cc < w)
        vals = grid[np.clip(rr, 0, h - 1), np.clip(cc, 0, w - 1)]
        out += np.where(inside, weight * vals, 0.0)
    return out


def forward_project(
    grid: np.ndarray,
    angles_rad: np.ndarray,
    num_detectors: int,
    det_spacing: float,
    px_spacing: float,
    center_row: float,
    center_col: float,
) -> np.ndarray:
    grid = np.ascontiguousarray(grid, dtype=np.float64)
    taus = _ray_steps(num_detectors, det_spacing, px_spacing)
    ts = (
        np.arange(num_detectors, dtype=np.float64) - (num_detectors - 1) / 2.0
    ) * det_spacing
    sino = np.empty((len(angles_rad), num_detectors), dtype=np.float64)
    for v, theta in enumerate(angles_rad):
        cos_t = np.cos(theta)
        sin_t = np.sin(theta)
        x = ts[:, None] * cos_t - taus[None, :] * sin_t
        y = ts[:, None] * sin_t + taus[None, :] * cos_t
        colf = x / px_spacing + center_col
        rowf = y / px_spacing + center_row
        sino[v] = _bilinear(grid, rowf, colf).sum(axis=1) * px_spacing
    return sino


def back_project(
    filtered: np.ndarray,
    angles_rad: np.ndarray,
    height: int,
    width: int,
    det_spacing: float,
    px_spacing: float,
    center_row: float,
    center_col: float,
) -> np.ndarray:
    filtered = np.ascontiguousarray(filtered, dtype=np.float64)
    num_det = filtered.shape[1]
    xs = (np.arange(width, dtype=np.float64) - center_col) * px_spacing
    ys = (np.arange(height, dtype=np.float64) - center_row) * px_spacing
    out = np.zeros((height, width), dtype=np.float64)
    for v, theta in enumerate(angles_rad):
        t = xs[None, :] * np.cos(theta) + ys[:, None] * np.sin(theta)
        u = t / det_spacing + (num_det - 1) / 2.0
        u0 = np.floor(u).astype(np.int64)
        frac = u - u0
        row = filtered[v]
        left = np.where(
            (u0 >= 0) & (u0 < num_det), row[np.clip(u0, 0, num_det - 1)], 0.0
        )
        right = np.where(
            (u0 + 1 >= 0) & (u0 + 1 < num_det),
            row[np.clip(u0 + 1, 0, num_det - 1)],
            0.0,
        )
        out += (1.0 - frac) * left + frac * right
    return out * (np.pi / len(angles_rad))
