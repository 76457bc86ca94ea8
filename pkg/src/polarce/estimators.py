"""On-grid (P-SOMP) and off-grid (P-SIGW) channel estimators plus baselines.

Every estimator works on a whitened :class:`~polarce.observation.PilotObservation`
(it is whitened on demand) and returns an :class:`EstimationResult` holding
the ``N x M`` channel estimate.
"""

from __future__ import annotations

import logging
import time
import warnings
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import kernels
from .array_channel import ArrayGeometry, PathParam, path_steering_matrix
from .observation import PilotObservation, whiten
from .polar_dictionary import (
    PolarDictionary,
    build_angular_dictionary,
    grid_angles,
    uniform_dictionary,
)

log = logging.getLogger(__name__)

RCOND = 1e-10


@dataclass
class EstimationResult:
    H_hat: np.ndarray = field(repr=False)
    method: str
    angles: np.ndarray
    inv_distances: np.ndarray
    gains: np.ndarray | None = field(default=None, repr=False)
    support: np.ndarray | None = None
    wall_time: float = 0.0
    objective_trace: list[float] | None = None
    residual_norms: list[float] | None = None

    @property
    def distances(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return 1.0 / np.asarray(self.inv_distances, dtype=float)


class RankDeficiencyWarning(UserWarning):
    pass


def _lstsq(A, B):
    x, _, rank, _ = np.linalg.lstsq(A, B, rcond=RCOND)
    if rank < A.shape[1]:
        warnings.warn(f"least-squares system is rank deficient ({rank} < {A.shape[1]})",
                      RankDeficiencyWarning, stacklevel=3)
    return x


def angular_polar_dictionary(geom: ArrayGeometry) -> PolarDictionary:
    """The DFT dictionary wrapped as a single (far-field) ring."""
    n = geom.num_antennas
    return PolarDictionary(
        W=build_angular_dictionary(geom),
        ring=np.zeros(n, dtype=int),
        angle=grid_angles(n),
        distance=np.full(n, np.inf),
        num_rings=1,
        geometry=geom,
        kind="angular",
    )


def p_somp(obs: PilotObservation, dictionary: PolarDictionary, num_paths: int,
           method: str = "p_somp") -> EstimationResult:
    """Simultaneous OMP over a (polar) dictionary with a support shared by all subcarriers."""
    start = time.perf_counter()
    Ybar, Psi = whiten(obs, dictionary.W)
    rows, q = Psi.shape
    if num_paths < 1 or num_paths > q or num_paths > rows:
        raise ValueError(f"cannot select {num_paths} atoms from a {rows}x{q} sensing matrix")

    R = Ybar
    support: list[int] = []
    residual_norms = [float(np.linalg.norm(R))]
    coef = np.zeros((0, Ybar.shape[1]), dtype=complex)
    for _ in range(num_paths):
        gamma = Psi.conj().T @ R
        energy = np.einsum("pm,pm->p", gamma.real, gamma.real) + np.einsum(
            "pm,pm->p", gamma.imag, gamma.imag)
        energy[support] = -np.inf
        support.append(int(np.argmax(energy)))
        coef = _lstsq(Psi[:, support], Ybar)
        R = Ybar - Psi[:, support] @ coef
        residual_norms.append(float(np.linalg.norm(R)))

    idx = np.array(support)
    H_hat = dictionary.W[:, idx] @ coef
    return EstimationResult(
        H_hat=H_hat,
        method=method,
        angles=dictionary.angle[idx].copy(),
        inv_distances=dictionary.inv_distance[idx].copy(),
        gains=coef,
        support=idx,
        wall_time=time.perf_counter() - start,
        residual_norms=residual_norms,
    )


class MLObjective:
    """Concentrated likelihood ``L(theta, u) = -Tr(Ybar^H P Ybar)`` with ``u = 1/r``.

    ``P`` projects onto the span of ``sensing @ b(theta_l, 1/u_l)``, where
    ``sensing = D^{-1} A`` is the whitened combiner.
    """

    def __init__(self, geom: ArrayGeometry, sensing: np.ndarray, Ybar: np.ndarray):
        self.geom = geom
        self.sensing = sensing
        self.Ybar = Ybar
        self._pos = geom.positions
        self._k = geom.wavenumber

    def steering(self, theta, inv_r):
        return kernels.steering_matrix(self._pos, np.asarray(theta, float),
                                       np.asarray(inv_r, float), self._k)

    def gains(self, theta, inv_r):
        Psi = self.sensing @ self.steering(theta, inv_r)
        return np.linalg.lstsq(Psi, self.Ybar, rcond=RCOND)[0]

    def value(self, theta, inv_r) -> float:
        Psi = self.sensing @ self.steering(theta, inv_r)
        G = np.linalg.lstsq(Psi, self.Ybar, rcond=RCOND)[0]
        return -float(np.vdot(self.Ybar, Psi @ G).real)

    def gradients(self, theta, inv_r):
        """Return ``(dL/dtheta, dL/du)`` as real vectors.

        Product rule on ``P = Psi (Psi^H Psi)^{-1} Psi^H`` where only column
        ``l`` of ``Psi`` depends on ``theta_l`` / ``u_l``:

            dL = -2 Re[ e_l^T G Ybar^H v_l ] + 2 Re[ e_l^T G G^H Psi^H v_l ]

        with ``G = Psi^+ Ybar`` and ``v_l = D^{-1} A db_l``.  The first term
        collects the outer two product-rule terms (they are conjugates), the
        second the derivative of the inverse Gram matrix.
        """
        B, dB_t, dB_u = kernels.steering_with_derivatives(
            self._pos, np.asarray(theta, float), np.asarray(inv_r, float), self._k)
        Psi = self.sensing @ B
        G = np.linalg.lstsq(Psi, self.Ybar, rcond=RCOND)[0]
        fitted = Psi @ G
        out = []
        for dB in (dB_t, dB_u):
            V = self.sensing @ dB
            outer = np.einsum("lm,ml->l", G, self.Ybar.conj().T @ V)
            inner = np.einsum("lm,ml->l", G, fitted.conj().T @ V)
            out.append(-2 * outer.real + 2 * inner.real)
        return out[0], out[1]


def _inv_r(r):
    with np.errstate(divide="ignore"):
        return 1.0 / np.atleast_1d(np.asarray(r, dtype=float))


def ml_objective(geom, theta, r, Ybar, sensing) -> float:
    """Concentrated ML objective at angles ``theta`` and ranges ``r`` (``inf`` allowed)."""
    return MLObjective(geom, sensing, Ybar).value(np.atleast_1d(theta), _inv_r(r))


def gradient_theta(geom, theta, r, Ybar, sensing) -> np.ndarray:
    return MLObjective(geom, sensing, Ybar).gradients(np.atleast_1d(theta), _inv_r(r))[0]


def gradient_inv_r(geom, theta, r, Ybar, sensing) -> np.ndarray:
    """Gradient with respect to the inverse distances ``1/r``."""
    return MLObjective(geom, sensing, Ybar).gradients(np.atleast_1d(theta), _inv_r(r))[1]


@dataclass(frozen=True)
class ArmijoParams:
    c1: float = 1e-4
    shrink: float = 0.5
    max_halvings: int = 30


def _armijo_block(f, x0, f0, grad, step0, project, params):
    """Backtracking along the normalised steepest-descent direction.

    ``step0`` is the largest coordinate move tried.  Returns the new point
    and its objective; falls back to ``(x0, f0)`` when no step is accepted.
    """
    scale = np.max(np.abs(grad))
    if not np.isfinite(scale) or scale == 0:
        return x0, f0
    direction = -grad / scale
    t = step0
    for _ in range(params.max_halvings + 1):
        x = project(x0 + t * direction)
        fx = f(x)
        if fx <= f0 + params.c1 * float(grad @ (x - x0)) and fx <= f0:
            return x, fx
        t *= params.shrink
    return x0, f0


def p_sigw(obs: PilotObservation, dictionary: PolarDictionary, num_paths: int,
           num_iter: int = 10, *, refine_distance: bool = True,
           rho_min: float | None = None, step_theta: float | None = None,
           step_inv_r: float | None = None, armijo: ArmijoParams = ArmijoParams(),
           method: str = "p_sigw") -> EstimationResult:
    """Gridless refinement of a P-SOMP solution by alternating gradient steps.

    Each iteration takes an Armijo step in the angles, then in the inverse
    distances (skipped when ``refine_distance`` is false), then refits the
    gains by least squares.
    """
    if num_iter < 0:
        raise ValueError("num_iter must be non-negative")
    start = time.perf_counter()
    init = p_somp(obs, dictionary, num_paths, method=method)
    geom = dictionary.geometry
    objective = MLObjective(geom, obs.sensing, obs.Ybar)

    theta = init.angles.astype(float)
    u = init.inv_distances.astype(float)
    if not refine_distance:
        u = np.zeros_like(u)
    value = objective.value(theta, u)
    trace = [value]
    if num_iter == 0:
        return replace(init, objective_trace=trace, wall_time=time.perf_counter() - start)

    if rho_min is None:
        rho_min = dictionary.config.rho_min if dictionary.config is not None else None
    if step_theta is None:
        step_theta = 2.0 / geom.num_antennas
    if step_inv_r is None:
        if dictionary.config is not None:
            step_inv_r = 1.0 / dictionary.config.threshold_distance
        else:
            finite = dictionary.inv_distance[dictionary.inv_distance > 0]
            step_inv_r = float(np.min(finite)) if finite.size else 0.0

    def clip_theta(t):
        return np.clip(t, -1.0, 1.0)

    for _ in range(num_iter):
        g_theta, _ = objective.gradients(theta, u)
        theta, value = _armijo_block(lambda t: objective.value(t, u), theta, value,
                                     g_theta, step_theta, clip_theta, armijo)
        if refine_distance and step_inv_r > 0:
            # ring radius r / (1 - theta^2) must stay above rho_min
            if rho_min is not None:
                u_max = 1.0 / (rho_min * np.maximum(1.0 - theta**2, 1e-2))
            else:
                u_max = np.full_like(u, np.inf)
            _, g_u = objective.gradients(theta, u)
            u, value = _armijo_block(lambda x: objective.value(theta, x), u, value, g_u,
                                     step_inv_r, lambda x: np.clip(x, 0.0, u_max), armijo)
        trace.append(value)

    B = objective.steering(theta, u)
    G = objective.gains(theta, u)
    return EstimationResult(
        H_hat=B @ G,
        method=method,
        angles=theta,
        inv_distances=u,
        gains=G,
        support=init.support,
        wall_time=time.perf_counter() - start,
        objective_trace=trace,
        residual_norms=init.residual_norms,
    )


def sw_omp_baseline(obs: PilotObservation, geom: ArrayGeometry, num_paths: int) -> EstimationResult:
    """Angular-domain simultaneous OMP (P-SOMP run on the DFT dictionary)."""
    return p_somp(obs, angular_polar_dictionary(geom), num_paths, method="sw_omp")


def ss_sigw_baseline(obs: PilotObservation, geom: ArrayGeometry, num_paths: int,
                     num_iter: int = 10) -> EstimationResult:
    """Angle-only gridless refinement with every path held in the far field."""
    res = p_sigw(obs, angular_polar_dictionary(geom), num_paths, num_iter,
                 refine_distance=False, method="ss_sigw")
    if num_iter == 0:
        res.method = "ss_sigw"
    return res


def ls_baseline(obs: PilotObservation) -> EstimationResult:
    """Minimum-norm least squares on the whitened pilots, no sparsity prior."""
    start = time.perf_counter()
    Ybar, _ = whiten(obs)
    H_hat = np.linalg.lstsq(obs.sensing, Ybar, rcond=RCOND)[0]
    return EstimationResult(H_hat, "ls", np.empty(0), np.empty(0),
                            wall_time=time.perf_counter() - start)


def genie_ls(obs: PilotObservation, geom: ArrayGeometry,
             true_paths: Sequence[PathParam]) -> EstimationResult:
    """Gain-only least squares with the true angles and distances known."""
    start = time.perf_counter()
    Ybar, _ = whiten(obs)
    Wt = path_steering_matrix(geom, true_paths)
    G = _lstsq(obs.sensing @ Wt, Ybar)
    angles = np.array([p.angle for p in true_paths])
    inv_r = _inv_r([p.distance for p in true_paths])
    return EstimationResult(Wt @ G, "genie_ls", angles, inv_r, gains=G,
                            wall_time=time.perf_counter() - start)


__all__ = [
    "EstimationResult",
    "MLObjective",
    "ArmijoParams",
    "RankDeficiencyWarning",
    "angular_polar_dictionary",
    "p_somp",
    "p_sigw",
    "ml_objective",
    "gradient_theta",
    "gradient_inv_r",
    "sw_omp_baseline",
    "ss_sigw_baseline",
    "ls_baseline",
    "genie_ls",
    "uniform_dictionary",
]
