"""Uniform linear array geometry, steering vectors and multicarrier channels."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels

SPEED_OF_LIGHT = 2.998e8


@dataclass(frozen=True)
class ArrayGeometry:
    """An ``N``-element uniform linear array centred at the origin.

    Element ``n`` sits at ``delta_n * d`` along the array axis with
    ``delta_n = (2n - N + 1) / 2``.
    """

    num_antennas: int
    wavelength: float
    spacing: float | None = None

    def __post_init__(self):
        if self.num_antennas < 2:
            raise ValueError("an array needs at least 2 antennas")
        if not (self.wavelength > 0 and math.isfinite(self.wavelength)):
            raise ValueError("wavelength must be positive and finite")
        if self.spacing is None:
            object.__setattr__(self, "spacing", self.wavelength / 2)
        if not (self.spacing > 0 and math.isfinite(self.spacing)):
            raise ValueError("antenna spacing must be positive and finite")

    @classmethod
    def from_frequency(cls, num_antennas: int, carrier_frequency: float,
                       spacing: float | None = None) -> "ArrayGeometry":
        return cls(num_antennas, SPEED_OF_LIGHT / carrier_frequency, spacing)

    @property
    def carrier_frequency(self) -> float:
        return SPEED_OF_LIGHT / self.wavelength

    @property
    def wavenumber(self) -> float:
        return 2 * math.pi / self.wavelength

    @property
    def offsets(self) -> np.ndarray:
        """Dimensionless element offsets ``delta_n``."""
        n = np.arange(self.num_antennas)
        return (2 * n - self.num_antennas + 1) / 2

    @property
    def positions(self) -> np.ndarray:
        """Element coordinates along the array axis in meters."""
        return self.offsets * self.spacing

    @property
    def aperture(self) -> float:
        return self.num_antennas * self.spacing


@dataclass(frozen=True)
class PathParam:
    """One propagation path.  ``distance = inf`` marks a plane-wave path."""

    gain: complex
    angle: float
    distance: float

    def __post_init__(self):
        if not abs(self.angle) <= 1:
            raise ValueError(f"spatial angle {self.angle} outside [-1, 1]")
        if not self.distance > 0 or math.isnan(self.distance):
            raise ValueError(f"path distance must be positive, got {self.distance}")

    @property
    def is_far_field(self) -> bool:
        return math.isinf(self.distance)


@dataclass(frozen=True)
class FrequencyGrid:
    """``M`` subcarriers spread symmetrically inside ``[f_c - B/2, f_c + B/2]``."""

    num_subcarriers: int
    bandwidth: float
    carrier_frequency: float

    def __post_init__(self):
        if self.num_subcarriers < 1:
            raise ValueError("need at least one subcarrier")
        if self.bandwidth < 0:
            raise ValueError("bandwidth must be non-negative")

    @property
    def frequencies(self) -> np.ndarray:
        m = np.arange(1, self.num_subcarriers + 1)
        mm = self.num_subcarriers
        return self.carrier_frequency + self.bandwidth * (2 * m - mm - 1) / (2 * mm)

    @property
    def wavenumbers(self) -> np.ndarray:
        return 2 * np.pi * self.frequencies / SPEED_OF_LIGHT


@dataclass
class ChannelRealization:
    geometry: ArrayGeometry
    grid: FrequencyGrid
    paths: list[PathParam]
    H: np.ndarray = field(repr=False)


def _check_angle(theta):
    theta = np.asarray(theta, dtype=float)
    if not np.all(np.isfinite(theta)):
        raise ValueError("angle must be finite")
    if np.any(np.abs(theta) > 1):
        raise ValueError("spatial angle must lie in [-1, 1]")
    return theta


def element_distance(geom: ArrayGeometry, n, theta, r):
    """Distance from element ``n`` to a source at spatial angle ``theta``, range ``r``."""
    n = np.asarray(n)
    theta = np.asarray(theta, dtype=float)
    r = np.asarray(r, dtype=float)
    if not (np.all(np.isfinite(theta)) and np.all(np.isfinite(r))):
        raise ValueError("element_distance needs finite angle and distance")
    if np.any(r <= 0):
        raise ValueError("distance must be positive")
    if np.any((n < 0) | (n >= geom.num_antennas)):
        raise ValueError("antenna index out of range")
    a = geom.offsets[n] * geom.spacing
    # same quantity as sqrt(r^2 + a^2 - 2 r theta a), written to stay positive
    return np.sqrt((r - theta * a) ** 2 + (1 - theta**2) * a**2)


def far_steering(geom: ArrayGeometry, theta: float) -> np.ndarray:
    """Plane-wave steering vector ``exp(j pi n theta) / sqrt(N)``."""
    theta = float(_check_angle(theta))
    n = np.arange(geom.num_antennas)
    return np.exp(1j * np.pi * n * theta) / np.sqrt(geom.num_antennas)


def far_steering_matrix(geom: ArrayGeometry, thetas) -> np.ndarray:
    thetas = _check_angle(np.atleast_1d(thetas))
    n = np.arange(geom.num_antennas)[:, None]
    return np.exp(1j * np.pi * n * thetas[None, :]) / np.sqrt(geom.num_antennas)


def near_steering(geom: ArrayGeometry, theta: float, r: float) -> np.ndarray:
    """Spherical-wave steering vector, phases referenced to the array centre.

    ``r = inf`` returns :func:`far_steering` (whose phase reference is element 0).
    """
    theta = float(_check_angle(theta))
    r = float(r)
    if math.isnan(r) or r <= 0:
        raise ValueError("distance must be positive")
    if math.isinf(r):
        return far_steering(geom, theta)
    return kernels.steering_matrix(geom.positions, [theta], [1.0 / r],
                                   geom.wavenumber)[:, 0]


def steering_matrix(geom: ArrayGeometry, thetas, inv_r) -> np.ndarray:
    """Columns ``b(theta_l, 1/inv_r_l)``; ``inv_r = 0`` gives the centred plane wave.

    Unlike :func:`near_steering` this never switches to the element-0 phase
    reference, so it is smooth in ``inv_r`` down to zero.
    """
    thetas = _check_angle(np.atleast_1d(thetas))
    inv_r = np.atleast_1d(np.asarray(inv_r, dtype=float))
    if np.any(inv_r < 0) or not np.all(np.isfinite(inv_r)):
        raise ValueError("inverse distances must be finite and non-negative")
    return kernels.steering_matrix(geom.positions, thetas, inv_r, geom.wavenumber)


def rayleigh_distance(geom: ArrayGeometry) -> float:
    return 2 * geom.aperture**2 / geom.wavelength


def fresnel_validity_bound(geom: ArrayGeometry) -> float:
    """Range beyond which the second-order (Fresnel) phase model is accurate."""
    return 0.5 * math.sqrt(geom.aperture**3 / geom.wavelength)


def path_steering_matrix(geom: ArrayGeometry, paths: Sequence[PathParam]) -> np.ndarray:
    """One steering column per path, plane waves for infinite-distance paths."""
    cols = np.empty((geom.num_antennas, len(paths)), dtype=complex)
    for i, p in enumerate(paths):
        cols[:, i] = near_steering(geom, p.angle, p.distance)
    return cols


def synthesize_channel(geom: ArrayGeometry, grid: FrequencyGrid,
                       paths: Sequence[PathParam]) -> ChannelRealization:
    """Build the ``N x M`` channel ``sqrt(N/L) sum_l g_l exp(-j k_m r_l) b_l``.

    The bulk-delay phase of plane-wave paths is dropped (set to 1).
    """
    paths = list(paths)
    if not paths:
        raise ValueError("need at least one path")
    n_paths = len(paths)
    steer = path_steering_matrix(geom, paths)
    gains = np.array([p.gain for p in paths], dtype=complex)
    dist = np.array([p.distance for p in paths])
    k = grid.wavenumbers
    phase = np.ones((n_paths, k.size), dtype=complex)
    near = np.isfinite(dist)
    phase[near] = np.exp(-1j * np.outer(dist[near], k))
    H = math.sqrt(geom.num_antennas / n_paths) * steer @ (gains[:, None] * phase)
    return ChannelRealization(geom, grid, paths, H)


def sample_random_paths(rng: np.random.Generator, num_paths: int,
                        angle_range=(-math.sqrt(3) / 2, math.sqrt(3) / 2),
                        distance_range=(5.0, 10.0)) -> list[PathParam]:
    """Draw i.i.d. paths: uniform angle and range, CN(0, 1) gain."""
    if num_paths < 1:
        raise ValueError("need at least one path")
    lo, hi = angle_range
    if not (-1 <= lo <= hi <= 1):
        raise ValueError(f"invalid angle range {angle_range}")
    rlo, rhi = distance_range
    if not (0 < rlo <= rhi):
        raise ValueError(f"invalid distance range {distance_range}")
    theta = rng.uniform(lo, hi, num_paths)
    r = rng.uniform(rlo, rhi, num_paths)
    g = (rng.standard_normal(num_paths) + 1j * rng.standard_normal(num_paths)) / math.sqrt(2)
    return [PathParam(complex(gi), float(ti), float(ri)) for gi, ti, ri in zip(g, theta, r)]
