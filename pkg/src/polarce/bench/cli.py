"""Command-line entry point: ``polarce <subcommand> [options]``.

Exit codes: 0 success, 2 configuration error, 3 some trials failed.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from ..polar_dictionary import audit_coherence
from .campaign import polar_dictionary, run_campaign
from .config import ConfigError, load_config
from .plots import envelope_is_monotone, coherence_plot, write_coherence_plot

EXIT_OK, EXIT_CONFIG, EXIT_PARTIAL = 0, 2, 3

SWEEP_COMMANDS = {
    "sweep-distance": "distance",
    "sweep-snr": "snr",
    "sweep-pilots": "pilots",
    "sweep-beta": "beta",
    "trace-iterations": "iterations",
    "ablate-sampling": "sampling",
}


def _csv_list(text: str, conv=str):
    return tuple(conv(x.strip()) for x in text.split(",") if x.strip())


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="key = value config file")
    p.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
    p.add_argument("--trials", type=int, help="Monte-Carlo trials per sweep value")
    p.add_argument("--methods", type=_csv_list, help="comma-separated method tags")
    p.add_argument("--out", type=Path, help="output path")
    p.add_argument("--paper-scale", action="store_true",
                   help="N=256, M=256, 200 trials instead of the desk-scale profile")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="polarce", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, sweep in SWEEP_COMMANDS.items():
        p = sub.add_parser(name, help=f"Monte-Carlo NMSE sweep over {sweep}")
        _common(p)
        p.add_argument("--values", type=lambda s: _csv_list(s, float),
                       help="comma-separated sweep values (default: built-in grid)")
        p.add_argument("--workers", type=int, help="worker processes")
        p.add_argument("--no-svg", action="store_true", help="skip the SVG rendering")
    p = sub.add_parser("coherence-plot", help="|G(beta)| over beta in [0, 10]")
    _common(p)
    p.add_argument("--step", type=float, default=0.01)
    p = sub.add_parser("audit-dictionary", help="build the polar dictionary and audit its coherence")
    _common(p)
    return parser


def _load(args, **extra):
    if args.seed is not None and not 0 <= args.seed < 2**64:
        raise ConfigError("--seed must fit in an unsigned 64-bit integer")
    return load_config(args.config, paper_scale=args.paper_scale, seed=args.seed,
                       trials=args.trials, methods=args.methods, **extra)


def _cmd_sweep(args) -> int:
    cfg = _load(args, sweep=SWEEP_COMMANDS[args.command], values=args.values,
                workers=args.workers)
    out = args.out or Path(f"{args.command}.csv")
    result = run_campaign(cfg, out, svg=not args.no_svg)
    for row in result.summary:
        print(f"{row.method:>15s}  {cfg.sweep}={row.sweep_value:<10.4g} "
              f"NMSE {row.mean_nmse_db:8.2f} dB  [{row.ci_low_db:.2f}, {row.ci_high_db:.2f}]")
    if result.failures:
        print(f"{len(result.failures)} trial(s) failed; see log", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def _cmd_coherence(args) -> int:
    out = args.out or Path("coherence.csv")
    if args.step <= 0:
        raise ConfigError("--step must be positive")
    write_coherence_plot(out, 10.0, args.step)
    beta, g = coherence_plot(10.0, args.step)
    print(f"wrote {out}; envelope monotone: {envelope_is_monotone(beta, g)}")
    return EXIT_OK


def _json_float(x: float):
    return None if math.isinf(x) else float(x)


def _cmd_audit(args) -> int:
    cfg = _load(args)
    d = polar_dictionary(cfg.dictionary_config)
    out = args.out or Path("dictionary.npy")
    out = out.with_suffix(".npy")
    out.parent.mkdir(parents=True, exist_ok=True)
    np.save(out, d.W)
    g = d.geometry
    meta = {
        "num_antennas": g.num_antennas,
        "wavelength": g.wavelength,
        "spacing": g.spacing,
        "beta": cfg.beta,
        "rho_min": cfg.rho_min,
        "threshold_distance": cfg.dictionary_config.threshold_distance,
        "num_rings": d.num_rings,
        "num_columns": d.num_columns,
        "columns": [{"ring": int(s), "angle": float(t), "distance": _json_float(r)}
                    for s, t, r in zip(d.ring, d.angle, d.distance)],
    }
    out.with_suffix(".json").write_text(json.dumps(meta, indent=1))
    report = audit_coherence(d)
    out.with_suffix(".audit.json").write_text(report.to_json())
    print(f"S = {d.num_rings}, Q = {d.num_columns}, max coherence {report.max_coherence:.4f} "
          f"(target {report.target_coherence:.4f})")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command in SWEEP_COMMANDS:
            return _cmd_sweep(args)
        if args.command == "coherence-plot":
            return _cmd_coherence(args)
        return _cmd_audit(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
