# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled projection kernels.

Same sampling scheme as ctdegrad.tomo._numpy_ops; see that module for
the geometric conventions. Kept branch-for-branch equivalent so the two
backends agree to summation-order rounding.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport ceil, cos, floor, sin

cnp.import_array()


cdef inline double _bilinear(const double[:, ::1] grid, double rowf, double colf,
                             Py_ssize_t h, Py_ssize_t w) noexcept nogil:
    cdef Py_ssize_t r0 = <Py_ssize_t>floor(rowf)
    cdef Py_ssize_t c0 = <Py_ssize_t>floor(colf)
    cdef double fr = rowf - r0
    cdef double fc = colf - c0
    cdef double acc = 0.0
    if 0 <= r0 < h:
        if 0 <= c0 < w:
            acc += (1.0 - fr) * (1.0 - fc) * grid[r0, c0]
        if 0 <= c0 + 1 < w:
            acc += (1.0 - fr) * fc * grid[r0, c0 + 1]
    if 0 <= r0 + 1 < h:
        if 0 <= c0 < w:
            acc += fr * (1.0 - fc) * grid[r0 + 1, c0]
        if 0 <= c0 + 1 < w:
            acc += fr * fc * grid[r0 + 1, c0 + 1]
    return acc


def forward_project(grid, angles_rad, int num_detectors, double det_spacing,
                    double px_spacing, double center_row, double center_col):
    cdef double[:, ::1] g = np.ascontiguousarray(grid, dtype=np.float64)
    cdef double[::1] angles = np.ascontiguousarray(angles_rad, dtype=np.float64)
    cdef Py_ssize_t h = g.shape[0]
    cdef Py_ssize_t w = g.shape[1]
    cdef Py_ssize_t num_views = angles.shape[0]
    cdef double coverage = num_detectors * det_spacing
    cdef Py_ssize_t num_steps = <Py_ssize_t>ceil(coverage / px_spacing) + 1
    out_arr = np.empty((num_views, num_detectors), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t v, j, k
    cdef double theta, cos_t, sin_t, t, tau, x, y, acc
    cdef double det_half = (num_detectors - 1) / 2.0
    cdef double step_half = (num_steps - 1) / 2.0
    with nogil:
        for v in range(num_views):
            theta = angles[v]
            cos_t = cos(theta)
            sin_t = sin(theta)
            for j in range(num_detectors):
                t = (j - det_half) * det_spacing
                acc = 0.0
                for k in range(num_steps):
                    tau = (k - step_half) * px_spacing
                    x = t * cos_t - tau * sin_t
                    y = t * sin_t + tau * cos_t
                    acc += _bilinear(g, y / px_spacing + center_row,
                                     x / px_spacing + center_col, h, w)
                out[v, j] = acc * px_spacing
    return out_arr


def back_project(filtered, angles_rad, int height, int width, double det_spacing,
                 double px_spacing, double center_row, double center_col):
    cdef double[:, ::1] f = np.ascontiguousarray(filtered, dtype=np.float64)
    cdef double[::1] angles = np.ascontiguousarray(angles_rad, dtype=np.float64)
    cdef Py_ssize_t num_views = angles.shape[0]
    cdef Py_ssize_t num_det = f.shape[1]
    out_arr = np.zeros((height, width), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t v, r, c
    cdef Py_ssize_t u0
    cdef double theta, cos_t, sin_t, x, y, u, frac, acc
    cdef double det_half = (num_det - 1) / 2.0
    cdef double weight = np.pi / num_views
    with nogil:
        for v in range(num_views):
            theta = angles[v]
            cos_t = cos(theta)
            sin_t = sin(theta)
            for r in range(height):
                y = (r - center_row) * px_spacing
                for c in range(width):
                    x = (c - center_col) * px_spacing
                    u = (x * cos_t + y * sin_t) / det_spacing + det_half
                    u0 = <Py_ssize_t>floor(u)
                    frac = u - u0
                    acc = 0.0
                    if 0 <= u0 < num_det:
                        acc += (1.0 - frac) * f[v, u0]
                    if 0 <= u0 + 1 < num_det:
                        acc += frac * f[v, u0 + 1]
                    out[r, c] += acc
    out_arr *= weight
    return out_arr
