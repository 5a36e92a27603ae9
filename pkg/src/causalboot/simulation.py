"""Monte Carlo designs and the coverage harness.

Every replication samples the potential outcomes of an N-unit population,
observes all of it (n = N) under one complete randomization, and checks
whether each method's interval covers that population's own average
effect. Replication ``r`` draws only from ``SeedSpec(seed, r)``, so the
report does not depend on how replications are spread over workers.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from causalboot.bootstrap import DegenerateBootstrapError, MethodSpec
from causalboot.estimators import randomization_cov_exact, randomization_cov_kernel
from causalboot.inference import SUB_ASSIGNMENT, SUB_POPULATION, infer
from causalboot.population import PotentialPopulation
from causalboot.resampling import SeedSpec, as_generator, batch_permutations, complete_randomization

KINDS = ("design1", "design2", "design3", "design4", "gaussian_coupling", "scale_mixture")
_DEFAULT_SIZES = {"design1": (100, 100), "design2": (100, 100), "design3": (20, 20), "design4": (20, 20)}
COUPLING_VARIANCES = (0.5, 2.0)


@dataclass(frozen=True)
class DesignSpec:
    kind: str
    n0: int = 0
    n1: int = 0
    rho: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown design {self.kind!r}")
        if self.kind in _DEFAULT_SIZES and (self.n0, self.n1) == (0, 0):
            n0, n1 = _DEFAULT_SIZES[self.kind]
            object.__setattr__(self, "n0", n0)
            object.__setattr__(self, "n1", n1)
        if self.n0 < 2 or self.n1 < 2:
            raise ValueError("each stratum needs at least 2 units")
        if self.kind == "gaussian_coupling" and self.rho not in (-1, 0, 1):
            raise ValueError("rho must be -1, 0 or 1")

    @property
    def N(self) -> int:
        return self.n0 + self.n1

    @property
    def token(self) -> str:
        if self.kind == "gaussian_coupling":
            return f"coupling:{self.rho}:{self.n0}:{self.n1}"
        if self.kind == "scale_mixture":
            return f"mixture:{self.n0}:{self.n1}"
        return self.kind[-1]

    @classmethod
    def parse(cls, token: str) -> "DesignSpec":
        """Parse ``1``-``4``, ``coupling:RHO:N0:N1`` or ``mixture:N0:N1``."""
        token = token.strip()
        if token in ("1", "2", "3", "4"):
            return cls(f"design{token}")
        parts = token.split(":")
        try:
            if parts[0] == "coupling" and len(parts) == 4:
                return cls("gaussian_coupling", int(parts[2]), int(parts[3]), int(parts[1]))
            if parts[0] == "mixture" and len(parts) == 3:
                return cls("scale_mixture", int(parts[1]), int(parts[2]))
        except ValueError:
            pass
        raise ValueError(f"unknown design {token!r}")

    @property
    def population_variances(self) -> tuple[float, float]:
        """Design variances of Y(0) and Y(1)."""
        return {
            "design1": (1.0, 1.0),
            "design2": (1.0, 0.0),
            "design3": (1.0, 0.0),
            "design4": (2.5, 0.0),
            "gaussian_coupling": COUPLING_VARIANCES,
            "scale_mixture": (0.0, 2.5),
        }[self.kind]


def _standardize(x, var):
    x = x - x.mean()
    sd = x.std(ddof=1)
    return x * (math.sqrt(var) / sd) if sd > 0 else x


def draw_population(d: DesignSpec, seed, exact_moments: bool = False) -> PotentialPopulation:
    """Draw N = n0 + n1 units from the design's law.

    With ``exact_moments`` the random margin(s) are recentred and rescaled
    so that their (N - 1)-denominator variances equal the design values.
    """
    rng = as_generator(seed)
    N = d.N
    z = rng.standard_normal(N)
    if d.kind in ("design1", "design2", "design3"):
        y0 = z
    elif d.kind == "design4":
        wide = rng.random(N) < 0.1
        y0 = np.where(wide, 4.0, 1.0) * z
    elif d.kind == "scale_mixture":
        wide = rng.random(N) < 0.1
        y1 = np.where(wide, 4.0, 1.0) * z
        if exact_moments:
            y1 = _standardize(y1, 2.5)
        return PotentialPopulation(np.zeros(N), y1)
    else:
        v0, v1 = COUPLING_VARIANCES
        z1 = {1: z, -1: -z, 0: rng.standard_normal(N)}[d.rho]
        if exact_moments:
            z = _standardize(z, 1.0)
            z1 = _standardize(z1, 1.0) if d.rho == 0 else np.sign(d.rho) * z
        return PotentialPopulation(math.sqrt(v0) * z, math.sqrt(v1) * z1)
    if exact_moments:
        y0 = _standardize(y0, d.population_variances[0])
    y1 = y0.copy() if d.kind == "design1" else np.zeros(N)
    return PotentialPopulation(y0, y1)


@dataclass(frozen=True)
class MethodCoverage:
    method: str
    coverage: float
    median_se: float
    hits: int
    valid: int
    failed: int
    skipped_draws: int


@dataclass(frozen=True)
class CoverageReport:
    design: str
    reps: int
    B: int
    level: float
    seed: int
    fisher_M: int
    rows: list = field(default_factory=list)
    design_params: dict = field(default_factory=dict)

    def row(self, method: str) -> MethodCoverage:
        for r in self.rows:
            if r.method == method:
                return r
        raise KeyError(method)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["method", "coverage", "median_se", "hits", "valid", "failed", "skipped_draws"])
        for r in self.rows:
            writer.writerow(
                [r.method, _fmt(r.coverage), _fmt(r.median_se), r.hits, r.valid, r.failed, r.skipped_draws]
            )
        return buf.getvalue()

    def to_json(self) -> str:
        payload = {
            "design": self.design,
            "design_params": self.design_params,
            "methods": [r.method for r in self.rows],
            "reps": self.reps,
            "B": self.B,
            "level": self.level,
            "seed": self.seed,
            "fisher_M": self.fisher_M,
            "rows": [
                {k: (_fmt(v) if isinstance(v, float) else v) for k, v in asdict(r).items()}
                for r in self.rows
            ],
        }
        return json.dumps(payload, indent=2) + "\n"


def _fmt(x: float) -> float:
    """Round to 6 significant digits (stable text output)."""
    return float(f"{x:.6g}")


def _replicate(args):
    d, methods, B, level, root, fisher_M, r = args
    seed = SeedSpec(root, r)
    pop = draw_population(d, seed.generator(SUB_POPULATION))
    w = complete_randomization(d.N, d.n1, seed.generator(SUB_ASSIGNMENT))
    s = pop.realize(w)
    specs = [m if m.B == B else MethodSpec(m.variance, m.flavor, m.pivotal, m.assignment_mode, B) for m in methods]
    tau = pop.tau
    out = []
    try:
        res = infer(s, specs, d.N, level, seed, fisher_M)
    except DegenerateBootstrapError:
        res = None
    for m in specs:
        if res is None:
            out.append((0, math.nan, 0))
            continue
        mr = res[m.name]
        out.append((int(mr.ci.contains(tau)), mr.ci.implied_se, mr.skipped))
    return out


def _replicate_block(args):
    d, methods, B, level, root, fisher_M, start, stop = args
    return [_replicate((d, methods, B, level, root, fisher_M, r)) for r in range(start, stop)]


def default_threads() -> int:
    env = os.environ.get("CAUSAL_BOOT_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def run_coverage(
    d: DesignSpec,
    methods,
    reps: int = 5000,
    B: int = 999,
    level: float = 0.95,
    seed: int = 0,
    threads: int | None = None,
    fisher_M: int = 999,
) -> CoverageReport:
    """Coverage rate and median implied s.e. of each method over ``reps`` draws."""
    if reps < 1:
        raise ValueError("reps must be at least 1")
    methods = [MethodSpec.from_name(m) if isinstance(m, str) else m for m in methods]
    threads = default_threads() if threads is None else max(1, int(threads))
    if threads == 1:
        per_rep = [_replicate((d, methods, B, level, seed, fisher_M, r)) for r in range(reps)]
    else:
        block = max(1, math.ceil(reps / (threads * 8)))
        jobs = [
            (d, methods, B, level, seed, fisher_M, start, min(start + block, reps))
            for start in range(0, reps, block)
        ]
        with ProcessPoolExecutor(max_workers=threads) as pool:
            per_rep = [rec for chunk in pool.map(_replicate_block, jobs) for rec in chunk]
    rows = []
    for j, m in enumerate(methods):
        hits = np.array([rec[j][0] for rec in per_rep])
        ses = np.array([rec[j][1] for rec in per_rep])
        valid = ~np.isnan(ses)
        n_valid = int(valid.sum())
        rows.append(
            MethodCoverage(
                method=m.name,
                coverage=float(hits[valid].mean()) if n_valid else math.nan,
                median_se=float(np.median(ses[valid])) if n_valid else math.nan,
                hits=int(hits[valid].sum()),
                valid=n_valid,
                failed=reps - n_valid,
                skipped_draws=int(sum(rec[j][2] for rec in per_rep)),
            )
        )
    return CoverageReport(d.token, reps, B, level, seed, fisher_M, rows, asdict(d))


@dataclass(frozen=True)
class KernelCheck:
    max_abs_dev: float
    max_z: float
    empirical: tuple
    theoretical: tuple
    mc_se: tuple


def _cov_with_se(X, Y):
    xc = X - X.mean(axis=0)
    yc = Y - Y.mean(axis=0)
    prods = xc[:, :, None] * yc[:, None, :]
    R = X.shape[0]
    cov = prods.sum(axis=0) / (R - 1)
    se = prods.std(axis=0, ddof=1) / math.sqrt(R)
    return cov, se


def kernel_check(p: PotentialPopulation, n0: int, n1: int, grid0, grid1, reps: int, seed, exact=False):
    """Simulated n * Cov of the randomized stratum ECDFs against the kernel.

    Each draw samples n = n0 + n1 of the N units and treats n1 of them.
    Compares to the limiting kernel, or to the exact finite-population
    covariances when ``exact`` is set.
    """
    rng = as_generator(seed)
    n = n0 + n1
    g0 = np.asarray(grid0, dtype=float)
    g1 = np.asarray(grid1, dtype=float)
    I0 = (p.y0[:, None] <= g0[None, :]).astype(float)
    I1 = (p.y1[:, None] <= g1[None, :]).astype(float)
    perm = batch_permutations(rng, reps, p.N)
    F0 = I0[perm[:, n1:n]].mean(axis=1)
    F1 = I1[perm[:, :n1]].mean(axis=1)
    emp = []
    ses = []
    for X, Y in ((F0, F0), (F0, F1), (F1, F1)):
        c, se = _cov_with_se(X, Y)
        emp.append(n * c)
        ses.append(n * se)
    if exact:
        theo = randomization_cov_exact(p, n0, n1, g0, g1)
    else:
        theo = randomization_cov_kernel(p, n1 / n, n / p.N, g0, g1)
    devs = [np.abs(e - t) for e, t in zip(emp, theo)]
    zs = [np.where(se > 0, dv / np.where(se > 0, se, 1), np.where(dv > 1e-12, np.inf, 0.0)) for dv, se in zip(devs, ses)]
    return KernelCheck(
        max_abs_dev=float(max(dv.max() for dv in devs)),
        max_z=float(max(z.max() for z in zs)),
        empirical=tuple(emp),
        theoretical=tuple(theo),
        mc_se=tuple(ses),
    )
