"""Run any set of inference methods on one sample, sharing bootstrap draws."""

from __future__ import annotations

import math
from dataclasses import dataclass

from causalboot.bootstrap import (
    ConfidenceInterval,
    MethodSpec,
    RawDraws,
    causal_draws,
    confidence_interval,
    standard_draws,
    variance_from_draws,
)
from causalboot.estimators import agl_variance, ate_estimate, neyman_variance
from causalboot.fisher import fisher_ci
from causalboot.population import ObservedSample
from causalboot.resampling import SeedSpec

# substreams of a replication's SeedSpec
SUB_POPULATION, SUB_ASSIGNMENT, SUB_CAUSAL, SUB_STANDARD, SUB_FISHER = range(5)


@dataclass(frozen=True)
class MethodResult:
    method: str
    tau_hat: float
    sigma_hat: float
    ci: ConfidenceInterval
    skipped: int = 0


def analytic_sigma(s: ObservedSample, variance: str, N) -> float:
    v = neyman_variance(s).v if variance == "neyman" else agl_variance(s, N).v
    return math.sqrt(s.n * v)


def infer(
    s: ObservedSample,
    methods,
    N=None,
    level: float = 0.95,
    seed: SeedSpec = SeedSpec(),
    fisher_M=999,
) -> dict[str, MethodResult]:
    """Intervals for every method in ``methods`` (MethodSpec objects).

    Methods with the same bootstrap flavor, B and assignment mode share one
    set of draws, so adding a row never changes the others' results.
    """
    N = s.n if N is None else N
    tau_hat = ate_estimate(s)
    draws: dict[tuple, RawDraws] = {}
    out = {}
    for spec in methods:
        if spec.flavor == "fisher":
            ci = fisher_ci(s, level, M=fisher_M, seed=seed.generator(SUB_FISHER))
            out[spec.name] = MethodResult(spec.name, tau_hat, ci.implied_se * math.sqrt(s.n), ci)
            continue
        if spec.flavor == "none":
            sigma = analytic_sigma(s, spec.variance, N)
            ci = confidence_interval(tau_hat, sigma, s.n, None, level)
            out[spec.name] = MethodResult(spec.name, tau_hat, sigma, ci)
            continue
        key = (spec.flavor, spec.B, spec.assignment_mode)
        if key not in draws:
            if spec.flavor == "causal":
                draws[key] = causal_draws(
                    s, N, spec.B, seed.generator(SUB_CAUSAL), spec.assignment_mode
                )
            else:
                draws[key] = standard_draws(s, spec.B, seed.generator(SUB_STANDARD), N)
        d = draws[key].tdraws(tau_hat, spec.variance)
        if spec.pivotal:
            sigma = analytic_sigma(s, spec.variance, N)
            ci = confidence_interval(tau_hat, sigma, s.n, d, level)
        else:
            sigma = math.sqrt(s.n * variance_from_draws(d))
            ci = confidence_interval(tau_hat, sigma, s.n, None, level)
        out[spec.name] = MethodResult(spec.name, tau_hat, sigma, ci, d.skipped)
    return out
