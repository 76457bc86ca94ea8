"""Hybrid-combining pilot model and noise pre-whitening."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .array_channel import ChannelRealization

log = logging.getLogger(__name__)

REGULARIZATION = 1e-10


@dataclass(frozen=True)
class Combiner:
    """Per-slot analog combiners ``A_p`` stored as a ``(P, N_RF, N)`` array."""

    blocks: np.ndarray = field(repr=False)

    @property
    def pilot_length(self) -> int:
        return self.blocks.shape[0]

    @property
    def num_rf(self) -> int:
        return self.blocks.shape[1]

    @property
    def num_antennas(self) -> int:
        return self.blocks.shape[2]

    @property
    def matrix(self) -> np.ndarray:
        """Row-stacked ``(P*N_RF, N)`` observation matrix."""
        p, k, n = self.blocks.shape
        return self.blocks.reshape(p * k, n)


def generate_combiner(rng: np.random.Generator, pilot_length: int, num_rf: int,
                      num_antennas: int) -> Combiner:
    if min(pilot_length, num_rf, num_antennas) < 1:
        raise ValueError("combiner dimensions must be positive")
    signs = rng.integers(0, 2, size=(pilot_length, num_rf, num_antennas)) * 2 - 1
    return Combiner(signs / math.sqrt(num_antennas))


@dataclass(frozen=True)
class Whitener:
    """Block-diagonal lower Cholesky factor ``D`` with ``D D^H = blkdiag(A_p A_p^H)``."""

    blocks: np.ndarray = field(repr=False)

    @property
    def D(self) -> np.ndarray:
        p, k, _ = self.blocks.shape
        out = np.zeros((p * k, p * k), dtype=self.blocks.dtype)
        for i in range(p):
            out[i * k:(i + 1) * k, i * k:(i + 1) * k] = self.blocks[i]
        return out

    def solve(self, X: np.ndarray) -> np.ndarray:
        """``D^{-1} X`` by block-wise forward substitution."""
        p, k, _ = self.blocks.shape
        X = np.asarray(X)
        shape = X.shape
        Xb = X.reshape(p, k, -1)
        out = np.empty(Xb.shape, dtype=np.result_type(X.dtype, self.blocks.dtype))
        for i in range(p):
            out[i] = solve_triangular(self.blocks[i], Xb[i], lower=True)
        return out.reshape(shape)

    def apply(self, X: np.ndarray) -> np.ndarray:
        """``D X``."""
        p, k, _ = self.blocks.shape
        X = np.asarray(X)
        Xb = X.reshape(p, k, -1)
        return np.matmul(self.blocks, Xb).reshape(X.shape)


def noise_covariance(comb: Combiner) -> np.ndarray:
    """Block-diagonal covariance ``blkdiag(A_p A_p^H)`` of the combined noise (unit sigma^2)."""
    p, k, _ = comb.blocks.shape
    C = np.zeros((p * k, p * k))
    for i, A_p in enumerate(comb.blocks):
        C[i * k:(i + 1) * k, i * k:(i + 1) * k] = A_p @ A_p.conj().T
    return C


def build_whitener(comb: Combiner) -> Whitener:
    grams = np.matmul(comb.blocks, np.swapaxes(comb.blocks.conj(), 1, 2))
    factors = np.empty_like(grams)
    for i, g in enumerate(grams):
        try:
            factors[i] = np.linalg.cholesky(g)
        except np.linalg.LinAlgError:
            log.warning("combiner block %d is singular; regularising by %g", i, REGULARIZATION)
            factors[i] = np.linalg.cholesky(g + REGULARIZATION * np.eye(g.shape[0]))
    return Whitener(factors)


@dataclass
class PilotObservation:
    combiner: Combiner
    Y: np.ndarray = field(repr=False)
    noise_var: float
    whitener: Whitener | None = field(default=None, repr=False)
    Ybar: np.ndarray | None = field(default=None, repr=False)
    sensing: np.ndarray | None = field(default=None, repr=False)

    @property
    def is_whitened(self) -> bool:
        return self.Ybar is not None

    def whitened_dictionary(self, W: np.ndarray) -> np.ndarray:
        """``D^{-1} A W``."""
        if self.sensing is None:
            raise RuntimeError("observation has not been whitened")
        return self.sensing @ W


def observe(channel: ChannelRealization | np.ndarray, comb: Combiner, noise_var: float,
            rng: np.random.Generator) -> PilotObservation:
    """Received pilots ``Y = A H + [A_p n_p]`` with antenna noise ``CN(0, noise_var I)``."""
    H = channel.H if isinstance(channel, ChannelRealization) else np.asarray(channel)
    if H.ndim != 2 or H.shape[0] != comb.num_antennas:
        raise ValueError(f"channel shape {H.shape} does not match {comb.num_antennas} antennas")
    if noise_var < 0:
        raise ValueError("noise variance must be non-negative")
    Y = comb.matrix @ H
    if noise_var > 0:
        p, n, m = comb.pilot_length, comb.num_antennas, H.shape[1]
        noise = rng.standard_normal((p, n, m)) + 1j * rng.standard_normal((p, n, m))
        noise *= math.sqrt(noise_var / 2)
        Y = Y + np.matmul(comb.blocks, noise).reshape(p * comb.num_rf, m)
    return PilotObservation(comb, Y, float(noise_var))


def whiten(obs: PilotObservation, W: np.ndarray | None = None):
    """Whiten ``obs`` in place; returns ``(Ybar, Psi_bar)`` (``Psi_bar`` None without ``W``)."""
    if obs.whitener is None:
        obs.whitener = build_whitener(obs.combiner)
    if obs.Ybar is None:
        obs.Ybar = obs.whitener.solve(obs.Y)
        obs.sensing = obs.whitener.solve(obs.combiner.matrix)
    psi = obs.whitened_dictionary(W) if W is not None else None
    return obs.Ybar, psi
