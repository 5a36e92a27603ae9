"""Causal and classical bootstraps of the studentized difference in means."""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist

import numpy as np

from causalboot.estimators import batch_stats
from causalboot.population import ObservedSample, impute_isotone
from causalboot.resampling import as_generator, batch_permutations

VARIANCES = ("neyman", "agl")
FLAVORS = ("standard", "causal", "none", "fisher")
ASSIGNMENT_MODES = ("complete", "bernoulli")

# cap on (replications x units) materialized at once
_CHUNK_CELLS = 2_000_000


class DegenerateBootstrapError(RuntimeError):
    pass


@dataclass(frozen=True)
class MethodSpec:
    """One row of the inference-method matrix.

    ``flavor='none'`` is analytic Gaussian inference, ``'fisher'`` inverts
    the randomization test. ``pivotal=False`` with a bootstrap flavor means
    a Gaussian interval using the bootstrap variance of the estimates.
    """

    variance: str = "agl"
    flavor: str = "causal"
    pivotal: bool = True
    assignment_mode: str = "complete"
    B: int = 999

    def __post_init__(self):
        if self.variance not in VARIANCES:
            raise ValueError(f"unknown variance estimator {self.variance!r}")
        if self.flavor not in FLAVORS:
            raise ValueError(f"unknown bootstrap flavor {self.flavor!r}")
        if self.assignment_mode not in ASSIGNMENT_MODES:
            raise ValueError(f"unknown assignment mode {self.assignment_mode!r}")
        if self.pivotal and self.flavor in ("none", "fisher"):
            raise ValueError("pivotal intervals need a bootstrap flavor")
        if self.B < 1:
            raise ValueError("B must be at least 1")

    @property
    def name(self) -> str:
        if self.flavor == "fisher":
            return "fisher"
        if self.flavor == "none":
            return f"{self.variance}-gauss"
        prefix = "sboot" if self.flavor == "standard" else "cboot"
        base = f"{prefix}-gauss" if not self.pivotal else f"{prefix}-pivotal-{self.variance}"
        if self.flavor == "causal" and self.assignment_mode == "bernoulli":
            base += "-bernoulli"
        return base

    @classmethod
    def from_name(cls, name: str, **kw) -> "MethodSpec":
        if name.endswith("-bernoulli"):
            kw["assignment_mode"] = "bernoulli"
            name = name[: -len("-bernoulli")]
        parts = name.split("-")
        if name == "fisher":
            return cls(variance="neyman", flavor="fisher", pivotal=False, **kw)
        if len(parts) == 2 and parts[1] == "gauss" and parts[0] in VARIANCES:
            return cls(variance=parts[0], flavor="none", pivotal=False, **kw)
        flavors = {"sboot": "standard", "cboot": "causal"}
        if len(parts) == 2 and parts[1] == "gauss" and parts[0] in flavors:
            return cls(variance="neyman", flavor=flavors[parts[0]], pivotal=False, **kw)
        if len(parts) == 3 and parts[0] in flavors and parts[1] == "pivotal":
            return cls(variance=parts[2], flavor=flavors[parts[0]], pivotal=True, **kw)
        raise ValueError(f"unknown method {name!r}")


METHOD_NAMES = (
    "neyman-gauss",
    "agl-gauss",
    "sboot-gauss",
    "cboot-gauss",
    "fisher",
    "sboot-pivotal-neyman",
    "sboot-pivotal-agl",
    "cboot-pivotal-neyman",
    "cboot-pivotal-agl",
)


@dataclass(frozen=True)
class TDrawSet:
    """Studentized bootstrap draws.

    ``tau_star`` holds every replication whose strata were both large
    enough; ``t`` only those that could also be studentized, so
    ``len(t) == B - skipped``.
    """

    t: np.ndarray
    tau_star: np.ndarray
    skipped: int


@dataclass(frozen=True)
class ConfidenceInterval:
    lo: float
    hi: float
    level: float
    implied_se: float
    degenerate: bool = False

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError("interval bounds out of order")

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi


@dataclass(frozen=True)
class RawDraws:
    """Per-replication estimates before studentization (NaN = degenerate strata)."""

    tau: np.ndarray
    v_neyman: np.ndarray
    v_agl: np.ndarray

    def tdraws(self, tau_hat: float, variance: str) -> TDrawSet:
        v = self.v_neyman if variance == "neyman" else self.v_agl
        valid = ~np.isnan(self.tau)
        ok = valid & (v > 0)
        B = self.tau.size
        skipped = int(B - ok.sum())
        if skipped > B / 2:
            raise DegenerateBootstrapError("degenerate bootstrap population")
        t = (self.tau[ok] - tau_hat) / np.sqrt(v[ok])
        return TDrawSet(t=t, tau_star=self.tau[valid], skipped=skipped)


def _grouped_stats(units, treated, y0, y1, N):
    """Batch statistics for rows with varying numbers of treated units."""
    B, n = units.shape
    tau = np.full(B, np.nan)
    v_ney = np.full(B, np.nan)
    v_agl = np.full(B, np.nan)
    counts = treated.sum(axis=1)
    for k in np.unique(counts):
        if k < 2 or n - k < 2:
            continue
        rows = np.flatnonzero(counts == k)
        order = np.argsort(~treated[rows], axis=1, kind="stable")
        u = np.take_along_axis(units[rows], order, axis=1)
        tau[rows], v_ney[rows], v_agl[rows] = batch_stats(y0[u[:, k:]], y1[u[:, :k]], N)
    return tau, v_ney, v_agl


def _chunks(B, cells_per_row):
    step = max(1, min(B, _CHUNK_CELLS // max(cells_per_row, 1)))
    for start in range(0, B, step):
        yield min(step, B - start)


def causal_draws(s: ObservedSample, N: int, B: int, seed, assignment_mode="complete"):
    """Resample the isotone-imputed population B times."""
    rng = as_generator(seed)
    pop = impute_isotone(s, N)
    n, n1 = s.n, s.n1
    parts = []
    for size in _chunks(B, pop.N):
        perm = batch_permutations(rng, size, pop.N)
        if assignment_mode == "complete":
            parts.append(batch_stats(pop.y0[perm[:, n1:n]], pop.y1[perm[:, :n1]], pop.N))
        else:
            units = perm[:, :n]
            treated = rng.random((size, n)) < s.p
            parts.append(_grouped_stats(units, treated, pop.y0, pop.y1, pop.N))
    return RawDraws(*(np.concatenate(col) for col in zip(*parts)))


def standard_draws(s: ObservedSample, B: int, seed, N: float | None = None):
    """I.i.d. resampling of (y, w) pairs; N only enters the AGL studentizer."""
    rng = as_generator(seed)
    N = s.n if N is None else N
    parts = []
    for size in _chunks(B, s.n):
        idx = rng.integers(0, s.n, size=(size, s.n))
        parts.append(_grouped_stats(idx, s.w[idx] == 1, s.y, s.y, N))
    return RawDraws(*(np.concatenate(col) for col in zip(*parts)))


def causal_bootstrap(s: ObservedSample, N: int, spec: MethodSpec, seed) -> TDrawSet:
    if spec.flavor != "causal":
        raise ValueError("spec.flavor must be 'causal'")
    raw = causal_draws(s, N, spec.B, seed, spec.assignment_mode)
    return raw.tdraws(float(np.mean(s.treated) - np.mean(s.control)), spec.variance)


def standard_bootstrap(s: ObservedSample, spec: MethodSpec, seed, N=None) -> TDrawSet:
    if spec.flavor != "standard":
        raise ValueError("spec.flavor must be 'standard'")
    raw = standard_draws(s, spec.B, seed, N)
    return raw.tdraws(float(np.mean(s.treated) - np.mean(s.control)), spec.variance)


def variance_from_draws(d: TDrawSet, n: int | None = None) -> float:
    """Sample variance (ddof=1) of the bootstrap point estimates."""
    if d.tau_star.size < 2:
        raise ValueError("need at least 2 bootstrap draws")
    return float(np.var(d.tau_star, ddof=1))


def z_crit(level: float) -> float:
    return NormalDist().inv_cdf(0.5 + level / 2)


def confidence_interval(
    tau_hat: float, sigma_hat: float, n: int, d: TDrawSet | None, level: float = 0.95
) -> ConfidenceInterval:
    """Equal-tailed interval from t-draws, or Gaussian when ``d`` is None."""
    if not 0 < level < 1:
        raise ValueError("level must lie in (0, 1)")
    if sigma_hat < 0:
        raise ValueError("sigma_hat must be nonnegative")
    alpha = (1 - level) / 2
    if d is None:
        c_lo, c_hi = -z_crit(level), z_crit(level)
    else:
        if d.t.size == 0:
            raise ValueError("empty bootstrap draw set")
        c_lo, c_hi = np.quantile(d.t, [alpha, 1 - alpha], method="inverted_cdf")
    scale = sigma_hat / math.sqrt(n)
    lo = tau_hat - scale * float(c_hi)
    hi = tau_hat - scale * float(c_lo)
    return ConfidenceInterval(lo, hi, level, (hi - lo) / (2 * z_crit(level)))
