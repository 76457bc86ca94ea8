# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled steering kernels; same contract as ``polarce._steering_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, cos, sin

cnp.import_array()


def steering_matrix(offsets, theta, inv_r, double wavenumber):
    cdef const double[::1] a = np.ascontiguousarray(offsets, dtype=np.float64)
    cdef const double[::1] t = np.ascontiguousarray(theta, dtype=np.float64)
    cdef const double[::1] u = np.ascontiguousarray(inv_r, dtype=np.float64)
    cdef Py_ssize_t n_ant = a.shape[0]
    cdef Py_ssize_t n_col = t.shape[0]
    out = np.empty((n_ant, n_col), dtype=np.complex128)
    cdef double complex[:, ::1] b = out
    cdef double norm = 1.0 / sqrt(<double>n_ant)
    cdef Py_ssize_t i, j
    cdef double au, s, phase
    with nogil:
        for i in range(n_ant):
            for j in range(n_col):
                au = a[i] * u[j]
                s = sqrt(1.0 + au * (au - 2.0 * t[j]))
                phase = -wavenumber * a[i] * (au - 2.0 * t[j]) / (1.0 + s)
                b[i, j] = norm * (cos(phase) + 1j * sin(phase))
    return out


def steering_with_derivatives(offsets, theta, inv_r, double wavenumber):
    cdef const double[::1] a = np.ascontiguousarray(offsets, dtype=np.float64)
    cdef const double[::1] t = np.ascontiguousarray(theta, dtype=np.float64)
    cdef const double[::1] u = np.ascontiguousarray(inv_r, dtype=np.float64)
    cdef Py_ssize_t n_ant = a.shape[0]
    cdef Py_ssize_t n_col = t.shape[0]
    out_b = np.empty((n_ant, n_col), dtype=np.complex128)
    out_dt = np.empty((n_ant, n_col), dtype=np.complex128)
    out_du = np.empty((n_ant, n_col), dtype=np.complex128)
    cdef double complex[:, ::1] b = out_b
    cdef double complex[:, ::1] dt = out_dt
    cdef double complex[:, ::1] du = out_du
    cdef double norm = 1.0 / sqrt(<double>n_ant)
    cdef Py_ssize_t i, j
    cdef double ai, au, tj, s, phase, g_t, g_u
    cdef double complex v, mjk
    mjk = -1j * wavenumber
    with nogil:
        for i in range(n_ant):
            ai = a[i]
            for j in range(n_col):
                tj = t[j]
                au = ai * u[j]
                s = sqrt(1.0 + au * (au - 2.0 * tj))
                phase = -wavenumber * ai * (au - 2.0 * tj) / (1.0 + s)
                g_t = -ai / s
                g_u = ai * ai * (1.0 + tj * (au - 2.0 * tj) / (1.0 + s)) / (s * (1.0 + s))
                v = norm * (cos(phase) + 1j * sin(phase))
                b[i, j] = v
                dt[i, j] = mjk * g_t * v
                du[i, j] = mjk * g_u * v
    return out_b, out_dt, out_du
