"""Polar-domain dictionaries and their coherence analysis.

The polar dictionary samples angles uniformly and inverse distances
uniformly along "distance rings" ``(1 - theta^2) / r = s / Z``, where the
threshold distance ``Z`` follows from the target adjacent-ring coherence.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import special

from .array_channel import (
    ArrayGeometry,
    far_steering_matrix,
    fresnel_validity_bound,
    steering_matrix,
)


def _nonneg(beta):
    beta = np.asarray(beta, dtype=float)
    if np.any(beta < 0) or np.any(np.isnan(beta)):
        raise ValueError("Fresnel integrals are only defined here for beta >= 0")
    return beta


def fresnel_c(beta):
    """Fresnel cosine integral ``int_0^beta cos(pi t^2 / 2) dt``."""
    s, c = special.fresnel(_nonneg(beta))
    return c if np.ndim(c) else float(c)


def fresnel_s(beta):
    """Fresnel sine integral ``int_0^beta sin(pi t^2 / 2) dt``."""
    s, c = special.fresnel(_nonneg(beta))
    return s if np.ndim(s) else float(s)


def g_magnitude(beta):
    """``|C(beta) + j S(beta)| / beta``, with the limit 1 at ``beta = 0``."""
    beta = _nonneg(beta)
    s, c = special.fresnel(beta)
    with np.errstate(divide="ignore", invalid="ignore"):
        g = np.where(beta > 0, np.hypot(c, s) / np.where(beta > 0, beta, 1.0), 1.0)
    return g if np.ndim(g) else float(g)


def coherence_exact(b1, b2) -> float:
    b1 = np.asarray(b1)
    b2 = np.asarray(b2)
    if b1.shape != b2.shape:
        raise ValueError(f"length mismatch: {b1.shape} vs {b2.shape}")
    return float(abs(np.vdot(b1, b2)))


def coherence_approx_same_ring(theta_p, theta_q, num_antennas: int):
    """Dirichlet-kernel coherence of two columns on the same distance ring."""
    x = 0.5 * np.pi * (np.asarray(theta_q, dtype=float) - np.asarray(theta_p, dtype=float))
    num = np.sin(num_antennas * x)
    den = num_antennas * np.sin(x)
    small = np.abs(den) < 1e-300
    with np.errstate(divide="ignore", invalid="ignore"):
        val = np.abs(np.where(small, 1.0, num / np.where(small, 1.0, den)))
    return val if np.ndim(val) else float(val)


def beta_parameter(geom: ArrayGeometry, theta, r_p, r_q):
    """Fresnel argument for two columns on the same angle; ``inf`` ranges allowed."""
    r_p = np.asarray(r_p, dtype=float)
    r_q = np.asarray(r_q, dtype=float)
    if np.any(r_p <= 0) or np.any(r_q <= 0):
        raise ValueError("distances must be positive")
    n, d, lam = geom.num_antennas, geom.spacing, geom.wavelength
    theta = np.asarray(theta, dtype=float)
    return np.sqrt(n**2 * d**2 * (1 - theta**2) / (2 * lam) * np.abs(1 / r_p - 1 / r_q))


def coherence_approx_same_angle(geom: ArrayGeometry, theta, r_p, r_q):
    return g_magnitude(beta_parameter(geom, theta, r_p, r_q))


@dataclass(frozen=True)
class DictionaryConfig:
    geometry: ArrayGeometry
    beta: float = 1.2
    rho_min: float = 3.0

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        if not self.rho_min > 0:
            raise ValueError("rho_min must be positive")

    @property
    def threshold_distance(self) -> float:
        g = self.geometry
        return g.num_antennas**2 * g.spacing**2 / (2 * g.wavelength * self.beta**2)

    @property
    def target_coherence(self) -> float:
        return g_magnitude(self.beta)


@dataclass(frozen=True)
class PolarDictionary:
    """Dictionary matrix plus per-column ``(ring, angle, distance)`` metadata.

    Column ``s * N + n`` is angle ``n`` on ring ``s``; ring-0 columns of the
    non-uniform design are plane waves (``distance = inf``).
    """

    W: np.ndarray = field(repr=False)
    ring: np.ndarray = field(repr=False)
    angle: np.ndarray = field(repr=False)
    distance: np.ndarray = field(repr=False)
    num_rings: int
    geometry: ArrayGeometry
    config: DictionaryConfig | None = None
    kind: str = "polar"

    @property
    def num_columns(self) -> int:
        return self.W.shape[1]

    @property
    def inv_distance(self) -> np.ndarray:
        return 1.0 / self.distance

    def column_metadata(self) -> list[dict]:
        return [{"index": i, "ring": int(s), "angle": float(t), "distance": float(r)}
                for i, (s, t, r) in enumerate(zip(self.ring, self.angle, self.distance))]


def grid_angles(num_antennas: int) -> np.ndarray:
    n = np.arange(num_antennas)
    return (2 * n - num_antennas + 1) / num_antennas


def build_angular_dictionary(geom: ArrayGeometry) -> np.ndarray:
    """The unitary DFT dictionary ``F = [a(theta_0), ..., a(theta_{N-1})]``."""
    return far_steering_matrix(geom, grid_angles(geom.num_antennas))


def build_polar_dictionary(config: DictionaryConfig) -> PolarDictionary:
    geom = config.geometry
    n_ant = geom.num_antennas
    z = config.threshold_distance
    thetas = grid_angles(n_ant)
    blocks = [build_angular_dictionary(geom)]
    dists = [np.full(n_ant, np.inf)]
    s = 1
    while z / s >= config.rho_min:
        r = z * (1 - thetas**2) / s
        blocks.append(steering_matrix(geom, thetas, 1.0 / r))
        dists.append(r)
        s += 1
    return PolarDictionary(
        W=np.hstack(blocks),
        ring=np.repeat(np.arange(s), n_ant),
        angle=np.tile(thetas, s),
        distance=np.concatenate(dists),
        num_rings=s,
        geometry=geom,
        config=config,
    )


def uniform_dictionary(geom: ArrayGeometry, num_rings: int, rho_min: float,
                       rho_max: float) -> PolarDictionary:
    """Same angles, but ``S`` distances spaced uniformly in ``[rho_min, rho_max)``."""
    if num_rings < 1:
        raise ValueError("need at least one ring")
    if not rho_max > rho_min > 0:
        raise ValueError("need 0 < rho_min < rho_max")
    n_ant = geom.num_antennas
    thetas = grid_angles(n_ant)
    radii = rho_min + np.arange(num_rings) / num_rings * (rho_max - rho_min)
    blocks = [steering_matrix(geom, thetas, np.full(n_ant, 1.0 / r)) for r in radii]
    return PolarDictionary(
        W=np.hstack(blocks),
        ring=np.repeat(np.arange(num_rings), n_ant),
        angle=np.tile(thetas, num_rings),
        distance=np.repeat(radii, n_ant),
        num_rings=num_rings,
        geometry=geom,
        kind="uniform",
    )


@dataclass
class CoherenceReport:
    max_coherence: float
    target_coherence: float | None
    ring_pairs: list[tuple[int, int]]
    adjacent_ring_exact: list[list[float]]
    adjacent_ring_approx: list[list[float]]
    adjacent_ring_valid: list[list[bool]]
    adjacent_angle_exact: list[list[float]]
    adjacent_angle_approx: list[list[float]]

    @property
    def ring_approx_error(self) -> np.ndarray:
        """``|exact - approx|`` for adjacent rings, NaN where the approximation is out of range."""
        ex = np.asarray(self.adjacent_ring_exact, dtype=float).reshape(len(self.ring_pairs), -1)
        ap = np.asarray(self.adjacent_ring_approx, dtype=float).reshape(ex.shape)
        ok = np.asarray(self.adjacent_ring_valid, dtype=bool).reshape(ex.shape)
        return np.where(ok, np.abs(ex - ap), np.nan)

    @property
    def angle_approx_error(self) -> np.ndarray:
        ex = np.asarray(self.adjacent_angle_exact, dtype=float)
        return np.abs(ex - np.asarray(self.adjacent_angle_approx, dtype=float))

    def to_json(self) -> str:
        return json.dumps(asdict(self))

    @classmethod
    def from_json(cls, text: str) -> "CoherenceReport":
        data = json.loads(text)
        data["ring_pairs"] = [tuple(p) for p in data["ring_pairs"]]
        return cls(**data)


def audit_coherence(dictionary: PolarDictionary) -> CoherenceReport:
    """Exact vs. closed-form coherences between neighbouring dictionary columns."""
    geom = dictionary.geometry
    n_ant = geom.num_antennas
    W = dictionary.W
    gram = np.abs(W.conj().T @ W)
    np.fill_diagonal(gram, 0.0)
    bound = fresnel_validity_bound(geom)

    blocks = [W[:, s * n_ant:(s + 1) * n_ant] for s in range(dictionary.num_rings)]
    dist = dictionary.distance.reshape(dictionary.num_rings, n_ant)
    thetas = dictionary.angle[:n_ant]

    pairs, ring_ex, ring_ap, ring_ok = [], [], [], []
    for s in range(dictionary.num_rings - 1):
        ex = np.abs(np.sum(blocks[s].conj() * blocks[s + 1], axis=0))
        ap = coherence_approx_same_angle(geom, thetas, dist[s], dist[s + 1])
        ok = ((dist[s] > bound) | np.isinf(dist[s])) & ((dist[s + 1] > bound) | np.isinf(dist[s + 1]))
        pairs.append((s, s + 1))
        ring_ex.append(ex.tolist())
        ring_ap.append(np.atleast_1d(ap).tolist())
        ring_ok.append(ok.tolist())

    ang_ex, ang_ap = [], []
    for blk in blocks:
        ang_ex.append(np.abs(np.sum(blk[:, :-1].conj() * blk[:, 1:], axis=0)).tolist())
        ang_ap.append(np.atleast_1d(coherence_approx_same_ring(thetas[:-1], thetas[1:], n_ant)).tolist())

    target = dictionary.config.target_coherence if dictionary.config is not None else None
    return CoherenceReport(
        max_coherence=float(gram.max()) if gram.size > 1 else 0.0,
        target_coherence=target,
        ring_pairs=pairs,
        adjacent_ring_exact=ring_ex,
        adjacent_ring_approx=ring_ap,
        adjacent_ring_valid=ring_ok,
        adjacent_angle_exact=ang_ex,
        adjacent_angle_approx=ang_ap,
    )
