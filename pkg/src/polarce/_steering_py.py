"""Pure-numpy steering kernels (fallback for the compiled ``_steering`` module).

All kernels are written in terms of the inverse distance ``u = 1/r`` so that
``u = 0`` (a plane wave) is an ordinary point of the parametrisation.  The
path-length excess of antenna ``n`` over the array centre is

    r_n - r = (s - 1) / u,   s = sqrt(1 + a u (a u - 2 theta)),   a = delta_n d

which is evaluated as ``a (a u - 2 theta) / (1 + s)`` to avoid cancellation.
"""

import numpy as np


def path_excess(offsets, theta, inv_r):
    """Return ``r_n - r`` as an ``(N, L)`` array."""
    a = np.asarray(offsets, dtype=float)[:, None]
    t = np.asarray(theta, dtype=float)[None, :]
    u = np.asarray(inv_r, dtype=float)[None, :]
    au = a * u
    s = np.sqrt(1.0 + au * (au - 2.0 * t))
    return a * (au - 2.0 * t) / (1.0 + s)


def steering_matrix(offsets, theta, inv_r, wavenumber):
    """Unit-norm near-field steering vectors, one column per (theta, inv_r)."""
    n = len(offsets)
    excess = path_excess(offsets, theta, inv_r)
    return np.exp(-1j * wavenumber * excess) / np.sqrt(n)


def steering_with_derivatives(offsets, theta, inv_r, wavenumber):
    """Steering matrix and its column derivatives w.r.t. angle and inverse distance.

    Returns ``(B, dB_dtheta, dB_dinv_r)``, each ``(N, L)`` complex.
    """
    n = len(offsets)
    a = np.asarray(offsets, dtype=float)[:, None]
    t = np.asarray(theta, dtype=float)[None, :]
    u = np.asarray(inv_r, dtype=float)[None, :]
    au = a * u
    s = np.sqrt(1.0 + au * (au - 2.0 * t))
    excess = a * (au - 2.0 * t) / (1.0 + s)
    d_theta = -a / s
    d_inv_r = a * a * (1.0 + t * (au - 2.0 * t) / (1.0 + s)) / (s * (1.0 + s))
    b = np.exp(-1j * wavenumber * excess) / np.sqrt(n)
    scale = -1j * wavenumber
    return b, scale * d_theta * b, scale * d_inv_r * b
