"""Observed experiments, empirical populations and isotone imputation."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from causalboot.ecdf import StepCdf

# provenance labels for PotentialPopulation.origin_w
OBSERVED_CONTROL = 0
OBSERVED_TREATED = 1


class SampleError(ValueError):
    """Invalid experimental sample (bad stratum sizes or outcomes)."""


class CsvFormatError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


@dataclass(frozen=True, eq=False)
class ObservedSample:
    """Realized outcomes ``y`` and binary treatments ``w`` for n units."""

    y: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float).ravel()
        w_raw = np.asarray(self.w).ravel()
        if y.shape != w_raw.shape:
            raise SampleError("y and w must have equal length")
        if not np.all(np.isin(w_raw, (0, 1))):
            raise SampleError("treatment indicators must be 0 or 1")
        if not np.all(np.isfinite(y)):
            raise SampleError("non-finite outcome")
        w = w_raw.astype(np.int8)
        n1 = int(w.sum())
        if n1 < 2 or w.size - n1 < 2:
            raise SampleError(
                f"each stratum needs at least 2 units (n0={w.size - n1}, n1={n1})"
            )
        y.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "w", w)

    @classmethod
    def from_strata(cls, control, treated) -> "ObservedSample":
        control = np.asarray(control, dtype=float).ravel()
        treated = np.asarray(treated, dtype=float).ravel()
        y = np.concatenate([control, treated])
        w = np.concatenate([np.zeros(control.size, int), np.ones(treated.size, int)])
        return cls(y, w)

    @classmethod
    def from_csv(cls, path) -> "ObservedSample":
        """Read a ``y,w`` CSV. Errors carry the offending 1-based line number."""
        text = Path(path).read_text(encoding="utf-8")
        rows = csv.reader(text.splitlines())
        ys, ws = [], []
        for lineno, row in enumerate(rows, start=1):
            if lineno == 1:
                if [c.strip() for c in row] != ["y", "w"]:
                    raise CsvFormatError("expected header 'y,w'", lineno)
                continue
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise CsvFormatError(f"expected 2 fields, got {len(row)}", lineno)
            try:
                y = float(row[0])
            except ValueError:
                raise CsvFormatError(f"bad outcome {row[0]!r}", lineno) from None
            if not np.isfinite(y):
                raise CsvFormatError("non-finite outcome", lineno)
            if row[1].strip() not in ("0", "1"):
                raise CsvFormatError(f"bad treatment {row[1]!r}", lineno)
            ys.append(y)
            ws.append(int(row[1]))
        if not ys:
            raise CsvFormatError("no data rows", 1)
        return cls(np.array(ys), np.array(ws))

    @property
    def n(self) -> int:
        return self.y.size

    @property
    def n1(self) -> int:
        return int(self.w.sum())

    @property
    def n0(self) -> int:
        return self.n - self.n1

    @property
    def p(self) -> float:
        return self.n1 / self.n

    @property
    def control(self) -> np.ndarray:
        return self.y[self.w == 0]

    @property
    def treated(self) -> np.ndarray:
        return self.y[self.w == 1]

    def stratum_cdfs(self) -> tuple[StepCdf, StepCdf]:
        return StepCdf.from_sample(self.control), StepCdf.from_sample(self.treated)


@dataclass(frozen=True, eq=False)
class PotentialPopulation:
    """N units carrying both potential outcomes."""

    y0: np.ndarray
    y1: np.ndarray
    origin_w: np.ndarray | None = field(default=None)

    def __post_init__(self):
        y0 = np.asarray(self.y0, dtype=float).ravel()
        y1 = np.asarray(self.y1, dtype=float).ravel()
        if y0.shape != y1.shape:
            raise ValueError("y0 and y1 must have equal length")
        if y0.size < 4:
            raise ValueError("population needs at least 4 units")
        if not (np.all(np.isfinite(y0)) and np.all(np.isfinite(y1))):
            raise ValueError("non-finite outcome")
        y0.setflags(write=False)
        y1.setflags(write=False)
        object.__setattr__(self, "y0", y0)
        object.__setattr__(self, "y1", y1)
        if self.origin_w is not None:
            ow = np.asarray(self.origin_w, dtype=np.int8).ravel()
            ow.setflags(write=False)
            object.__setattr__(self, "origin_w", ow)

    @property
    def N(self) -> int:
        return self.y0.size

    @property
    def tau(self) -> float:
        """Population average treatment effect."""
        return float(np.mean(self.y1) - np.mean(self.y0))

    def realize(self, w) -> ObservedSample:
        """Observed sample produced by assignment vector ``w`` (n = N)."""
        w = np.asarray(w)
        return ObservedSample(np.where(w == 1, self.y1, self.y0), w)


def replica_counts(n_w: int, N_w: int) -> np.ndarray:
    """M_j = ceil(j N_w / n_w) - ceil((j-1) N_w / n_w), j = 1..n_w."""
    ceils = np.array([_ceil_div(j * N_w, n_w) for j in range(n_w + 1)], dtype=np.int64)
    return np.diff(ceils)


def replicate_to_population(s: ObservedSample, N: int):
    """Per-stratum sorted values and replica counts for an N-unit population.

    Returns ``((values0, counts0), (values1, counts1))``.
    """
    N = int(N)
    if N < s.n:
        raise ValueError("population smaller than sample")
    N0 = _ceil_div(s.n0 * N, s.n)
    N1 = N - N0
    v0 = np.sort(s.control)
    v1 = np.sort(s.treated)
    return (v0, replica_counts(s.n0, N0)), (v1, replica_counts(s.n1, N1))


def impute_isotone(s: ObservedSample, N: int | None = None) -> PotentialPopulation:
    """Rank-matched imputation of the missing potential outcome of every unit.

    The j-th smallest control (ties broken by position) has rank j / n0 and
    receives ``y1 = Q1(j / n0)``; treated units symmetrically get
    ``y0 = Q0(j / n1)``. Without ties j / n0 equals F0(y), the observed
    stratum ECDF at the unit's outcome. All replicas of a unit share its
    imputed value.
    """
    N = s.n if N is None else int(N)
    (v0, m0), (v1, m1) = replicate_to_population(s, N)
    F0, F1 = s.stratum_cdfs()
    rank0 = np.arange(1, s.n0 + 1) / s.n0
    rank1 = np.arange(1, s.n1 + 1) / s.n1
    y0 = np.concatenate([np.repeat(v0, m0), np.repeat(F0.quantile(rank1), m1)])
    y1 = np.concatenate([np.repeat(F1.quantile(rank0), m0), np.repeat(v1, m1)])
    origin = np.concatenate(
        [np.full(int(m0.sum()), OBSERVED_CONTROL), np.full(int(m1.sum()), OBSERVED_TREATED)]
    )
    return PotentialPopulation(y0, y1, origin)


def population_marginals(p: PotentialPopulation) -> tuple[StepCdf, StepCdf]:
    return StepCdf.from_sample(p.y0), StepCdf.from_sample(p.y1)
