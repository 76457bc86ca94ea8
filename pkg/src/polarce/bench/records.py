"""Result records and their CSV encoding."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

CSV_COLUMNS = ("method", "sweep_name", "sweep_value", "trial", "seed",
               "nmse_linear", "nmse_db", "wall_ms")


def nmse(H, H_hat) -> float:
    """``||H - H_hat||_F^2 / ||H||_F^2``."""
    import numpy as np

    H = np.asarray(H)
    H_hat = np.asarray(H_hat)
    if H.shape != H_hat.shape:
        raise ValueError(f"shape mismatch {H.shape} vs {H_hat.shape}")
    return float(np.linalg.norm(H - H_hat) ** 2 / np.linalg.norm(H) ** 2)


def to_db(x: float) -> float:
    return 10 * math.log10(x) if x > 0 else -math.inf


@dataclass
class ResultRecord:
    method: str
    sweep_name: str
    sweep_value: float
    trial: int
    seed: int
    nmse_linear: float
    nmse_db: float
    wall_ms: float
    error: str | None = field(default=None, compare=False)
    trace: list[float] | None = field(default=None, compare=False, repr=False)

    @property
    def key(self) -> tuple[str, float, int]:
        return (self.method, self.sweep_value, self.trial)

    def row(self) -> list[str]:
        return [self.method, self.sweep_name, repr(float(self.sweep_value)), str(self.trial),
                str(self.seed), repr(float(self.nmse_linear)), repr(float(self.nmse_db)),
                repr(float(self.wall_ms))]

    @classmethod
    def from_row(cls, row: dict) -> "ResultRecord":
        return cls(
            method=row["method"],
            sweep_name=row["sweep_name"],
            sweep_value=float(row["sweep_value"]),
            trial=int(row["trial"]),
            seed=int(row["seed"]),
            nmse_linear=float(row["nmse_linear"]),
            nmse_db=float(row["nmse_db"]),
            wall_ms=float(row["wall_ms"]),
        )


def write_records(records: Iterable[ResultRecord], stream, header: bool = True) -> None:
    w = csv.writer(stream, lineterminator="\n")
    if header:
        w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow(r.row())


def emit_csv(records: Iterable[ResultRecord]) -> str:
    buf = io.StringIO()
    write_records(records, buf)
    return buf.getvalue()


def parse_csv(text: str) -> list[ResultRecord]:
    return list(iter_records(io.StringIO(text)))


def iter_records(stream) -> Iterator[ResultRecord]:
    reader = csv.DictReader(stream)
    if reader.fieldnames is None:
        return
    missing = set(CSV_COLUMNS) - set(reader.fieldnames)
    if missing:
        raise ValueError(f"CSV is missing columns {sorted(missing)}")
    for row in reader:
        yield ResultRecord.from_row(row)


def read_records(path: str | Path) -> list[ResultRecord]:
    path = Path(path)
    if not path.exists() or path.stat().st_size == 0:
        return []
    with path.open(newline="", encoding="utf-8") as fh:
        return list(iter_records(fh))


def canonical(records: Iterable[ResultRecord]) -> list[ResultRecord]:
    return sorted(records, key=lambda r: r.key)
