"""Monte-Carlo NMSE campaigns.

A campaign runs ``trials`` independent trials at each sweep value.  Each
trial draws one channel, one combiner and one noise realisation from a seed
derived only from ``(master seed, trial index)``, and every method is scored
on that same observation, so method comparisons are paired.
"""

from __future__ import annotations

import hashlib
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from ..array_channel import (
    ArrayGeometry,
    ChannelRealization,
    PathParam,
    sample_random_paths,
    synthesize_channel,
)
from ..estimators import (
    EstimationResult,
    genie_ls,
    ls_baseline,
    p_sigw,
    p_somp,
    ss_sigw_baseline,
    sw_omp_baseline,
)
from ..observation import PilotObservation, generate_combiner, observe, whiten
from ..polar_dictionary import (
    DictionaryConfig,
    PolarDictionary,
    build_polar_dictionary,
    uniform_dictionary,
)
from .config import ConfigError, ExperimentConfig
from .records import ResultRecord, canonical, nmse, read_records, to_db, write_records

log = logging.getLogger(__name__)


def trial_seed(master_seed: int, trial: int) -> int:
    ss = np.random.SeedSequence([int(master_seed), int(trial)])
    return int(ss.generate_state(1, np.uint64)[0])


@lru_cache(maxsize=16)
def polar_dictionary(config: DictionaryConfig) -> PolarDictionary:
    return build_polar_dictionary(config)


@lru_cache(maxsize=16)
def cached_uniform_dictionary(geom: ArrayGeometry, rings: int, rho_min: float,
                              rho_max: float) -> PolarDictionary:
    return uniform_dictionary(geom, rings, rho_min, rho_max)


@dataclass
class TrialData:
    seed: int
    paths: list[PathParam]
    channel: ChannelRealization
    obs: PilotObservation

    def checksum(self) -> str:
        """Digest of the received pilots, to check that methods share an observation."""
        return hashlib.sha256(np.ascontiguousarray(self.obs.Y).tobytes()).hexdigest()


def simulate_trial(cfg: ExperimentConfig, seed: int) -> TrialData:
    """Draw paths, channel, combiner and noise for one trial from ``seed``."""
    path_ss, comb_ss, noise_ss = np.random.SeedSequence(seed).spawn(3)
    geom = cfg.geometry
    paths = sample_random_paths(np.random.default_rng(path_ss), cfg.num_paths,
                                cfg.angle_range, cfg.distance_range)
    channel = synthesize_channel(geom, cfg.grid, paths)
    comb = generate_combiner(np.random.default_rng(comb_ss), cfg.pilot_length, cfg.num_rf,
                             cfg.num_antennas)
    obs = observe(channel, comb, cfg.noise_var, np.random.default_rng(noise_ss))
    whiten(obs)
    return TrialData(seed, paths, channel, obs)


def run_method(method: str, cfg: ExperimentConfig, data: TrialData) -> EstimationResult:
    geom = cfg.geometry
    L = cfg.num_detect
    if method == "p_somp":
        return p_somp(data.obs, polar_dictionary(cfg.dictionary_config), L)
    if method == "p_sigw":
        return p_sigw(data.obs, polar_dictionary(cfg.dictionary_config), L, cfg.num_iter)
    if method == "sw_omp":
        return sw_omp_baseline(data.obs, geom, L)
    if method == "ss_sigw":
        return ss_sigw_baseline(data.obs, geom, L, cfg.num_iter)
    if method == "ls":
        return ls_baseline(data.obs)
    if method == "genie_ls":
        return genie_ls(data.obs, geom, data.paths)
    if method == "p_somp_uniform":
        d = cached_uniform_dictionary(geom, cfg.uniform_rings, cfg.rho_min, cfg.rho_max)
        res = p_somp(data.obs, d, L)
        res.method = "p_somp_uniform"
        return res
    raise ConfigError(f"unknown method {method!r}")


def run_point(cfg: ExperimentConfig, sweep_value: float, trial: int,
              methods=None) -> list[ResultRecord]:
    """Score every method on one shared trial; failures become NMSE = 1 records."""
    point = cfg.at(sweep_value)
    seed = trial_seed(cfg.seed, trial)
    data = simulate_trial(point, seed)
    out = []
    for method in methods or cfg.resolved_methods():
        start = time.perf_counter()
        try:
            res = run_method(method, point, data)
            err, val, trace = None, nmse(data.channel.H, res.H_hat), res.objective_trace
            if not math.isfinite(val):
                err, val = "non-finite NMSE", 1.0
        except Exception as exc:  # one bad trial must not abort the campaign
            log.warning("%s failed at %s=%s trial %d: %s", method, cfg.sweep, sweep_value,
                        trial, exc)
            err, val, trace = f"{type(exc).__name__}: {exc}", 1.0, None
        wall = (time.perf_counter() - start) * 1e3
        out.append(ResultRecord(method, cfg.sweep, float(sweep_value), trial, seed, val,
                                to_db(val), wall, error=err, trace=trace))
    return out


def _run_point_star(args):
    return run_point(*args)


@dataclass
class SummaryRow:
    method: str
    sweep_value: float
    trials: int
    mean_nmse: float
    mean_nmse_db: float
    ci_low_db: float
    ci_high_db: float


def bootstrap_ci(values, rng, resamples: int = 1000, level: float = 0.95):
    """Percentile bootstrap interval of the mean, returned in dB."""
    v = np.asarray(values, dtype=float)
    if v.size < 2:
        m = to_db(float(v.mean()))
        return m, m
    idx = rng.integers(0, v.size, size=(resamples, v.size))
    means = v[idx].mean(axis=1)
    lo, hi = np.quantile(means, [(1 - level) / 2, (1 + level) / 2])
    return to_db(float(lo)), to_db(float(hi))


def summarize(records, seed: int = 0) -> list[SummaryRow]:
    """Mean NMSE per (method, sweep value), averaged in linear scale."""
    groups: dict[tuple[str, float], list[float]] = {}
    for r in records:
        groups.setdefault((r.method, r.sweep_value), []).append(r.nmse_linear)
    rng = np.random.default_rng(seed)
    rows = []
    for (method, value), vals in sorted(groups.items()):
        mean = float(np.mean(vals))
        lo, hi = bootstrap_ci(vals, rng)
        rows.append(SummaryRow(method, value, len(vals), mean, to_db(mean), lo, hi))
    return rows


@dataclass
class CampaignResult:
    records: list[ResultRecord]
    summary: list[SummaryRow]
    failures: list[ResultRecord] = field(default_factory=list)
    outputs: dict[str, Path] = field(default_factory=dict)

    def mean_db(self, method: str, value: float) -> float:
        for row in self.summary:
            if row.method == method and row.sweep_value == value:
                return row.mean_nmse_db
        raise KeyError((method, value))


def run_campaign(cfg: ExperimentConfig, out: str | Path | None = None, *,
                 workers: int | None = None, svg: bool = True) -> CampaignResult:
    """Run (or resume) a campaign, streaming records to ``out`` when given.

    Rows already present in ``out`` for the same ``(method, value, trial)``
    are not recomputed.  Alongside the CSV, writes ``<stem>.summary.csv``,
    one ``<stem>.<method>.series.csv`` per method, an optional SVG plot and,
    for iteration sweeps, ``<stem>.traces.csv``.
    """
    values = cfg.resolved_values()
    methods = cfg.resolved_methods()
    if not values:
        raise ConfigError("sweep has no values")
    for v in values:  # validate every point before any work
        try:
            point = cfg.at(v)
            point.dictionary_config, point.grid
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"{cfg.sweep}={v}: {exc}") from exc
    workers = workers or cfg.workers

    out = Path(out) if out else None
    existing = read_records(out) if out else []
    if existing:
        done = {r.key for r in existing}
    else:
        done = set()
        if out:
            out.parent.mkdir(parents=True, exist_ok=True)
            with out.open("w", newline="", encoding="utf-8") as fh:
                write_records([], fh)

    records = list(existing)
    failures = []
    traces = []
    pool = ProcessPoolExecutor(workers) if workers > 1 else None
    try:
        for value in values:
            jobs = []
            for trial in range(cfg.trials):
                todo = [m for m in methods if (m, float(value), trial) not in done]
                if todo:
                    jobs.append((cfg, value, trial, tuple(todo)))
            if not jobs:
                continue
            results = pool.map(_run_point_star, jobs) if pool else map(_run_point_star, jobs)
            chunk = canonical(r for batch in results for r in batch)
            failures.extend(r for r in chunk if r.error)
            traces.extend(r for r in chunk if r.trace is not None)
            records.extend(chunk)
            if out:
                with out.open("a", newline="", encoding="utf-8") as fh:
                    write_records(chunk, fh, header=False)
            log.info("%s=%s done (%d trials)", cfg.sweep, value, len(jobs))
    finally:
        if pool:
            pool.shutdown()

    records = canonical(records)
    summary = summarize(records, cfg.seed)
    result = CampaignResult(records, summary, failures)
    if out:
        from .plots import write_outputs

        tmp = out.with_suffix(out.suffix + ".tmp")
        with tmp.open("w", newline="", encoding="utf-8") as fh:
            write_records(records, fh)
        tmp.replace(out)
        result.outputs = write_outputs(out, cfg, summary, traces, svg=svg)
        result.outputs["records"] = out
    return result
