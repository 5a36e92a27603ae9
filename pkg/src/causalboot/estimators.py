"""Point estimate and variance quantities for the difference in means.

Conventions
-----------
Sample variances use ``n_w - 1`` denominators. The comonotone (isotone)
covariance bound is computed exactly from the stratum ECDFs and the
lower bound on the treatment-effect variance is

    S01_lower = k0 * (s0^2 - c_iso) + k1 * (s1^2 - c_iso),  k_w = n_w / (n_w - 1)

where ``s_w^2`` are 1/n_w-normalized variances and ``c_iso`` the isotone
covariance. This equals ``S0^2 + S1^2 - (k0 + k1) * c_iso`` and vanishes
exactly when the two stratum distributions coincide.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from causalboot.ecdf import StepCdf, refinement
from causalboot.population import ObservedSample, PotentialPopulation


@dataclass(frozen=True)
class VarianceBreakdown:
    s2_0: float
    s2_1: float
    s2_01: float
    v: float
    sigma_h: float | None = None
    clamped: bool = False

    @property
    def se(self) -> float:
        return math.sqrt(self.v)


def ate_estimate(s: ObservedSample) -> float:
    return float(np.mean(s.treated) - np.mean(s.control))


def true_randomization_variance(
    p: PotentialPopulation, n0: int, n1: int
) -> VarianceBreakdown:
    """Exact variance of the difference in means over sampling n0 + n1 of N
    units and completely randomizing n1 of them to treatment."""
    if n0 < 1 or n1 < 1:
        raise ValueError("n0 and n1 must be positive")
    if n0 + n1 > p.N:
        raise ValueError("sample larger than population")
    s2_0 = float(np.var(p.y0, ddof=1))
    s2_1 = float(np.var(p.y1, ddof=1))
    s2_01 = float(np.var(p.y1 - p.y0, ddof=1))
    v = s2_0 / n0 + s2_1 / n1 - s2_01 / p.N
    return VarianceBreakdown(s2_0, s2_1, s2_01, v)


def neyman_variance(s: ObservedSample) -> VarianceBreakdown:
    s2_0 = float(np.var(s.control, ddof=1))
    s2_1 = float(np.var(s.treated, ddof=1))
    return VarianceBreakdown(s2_0, s2_1, 0.0, s2_0 / s.n0 + s2_1 / s.n1)


def _effect_variance_lower(F0: StepCdf, F1: StepCdf, n0: int, n1: int):
    lengths, q0, q1 = refinement(F0, F1)
    c0 = q0 - F0.mean()
    c1 = q1 - F1.mean()
    d = c0 - c1
    # (s0^2 - c_iso) and (s1^2 - c_iso), integrated on the common refinement
    a0 = float(np.sum(lengths * c0 * d))
    a1 = -float(np.sum(lengths * c1 * d))
    sigma_h = float(np.sum(lengths * c0 * c1))
    k0 = n0 / (n0 - 1)
    k1 = n1 / (n1 - 1)
    return k0 * a0 + k1 * a1, sigma_h


def agl_variance(s: ObservedSample, N: float | None = None) -> VarianceBreakdown:
    """Sharp-bound variance estimate: Neyman minus the estimated lower bound
    on the treatment-effect variance over N."""
    N = s.n if N is None else N
    if N < s.n:
        raise ValueError("population smaller than sample")
    ney = neyman_variance(s)
    F0, F1 = s.stratum_cdfs()
    s2_01, sigma_h = _effect_variance_lower(F0, F1, s.n0, s.n1)
    clamped = False
    if s2_01 < 0:
        s2_01, clamped = 0.0, True
    v = ney.v - s2_01 / N
    if v < 0:
        v, clamped = 0.0, True
    return VarianceBreakdown(ney.s2_0, ney.s2_1, s2_01, v, sigma_h, clamped)


def sigma_bound(s: ObservedSample, q: float = 1.0) -> float:
    """Studentizer for sqrt(n) (tau_hat - tau): sqrt(n * V_AGL(N = n / q))."""
    if not 0 < q <= 1:
        raise ValueError("q must lie in (0, 1]")
    return math.sqrt(s.n * agl_variance(s, s.n / q).v)


def fisher_implicit_variance(s: ObservedSample) -> float:
    """Randomization variance implied by a constant-effect sharp null."""
    s2_0 = float(np.var(s.control, ddof=1))
    s2_1 = float(np.var(s.treated, ddof=1))
    pooled = (s.n0 * s2_0 + s.n1 * s2_1) / s.n
    return pooled * (1 / s.n1 + 1 / s.n0)


# ---------------------------------------------------------------------------
# covariance kernel of the randomized stratum ECDFs


def _grid_indicators(y, grid):
    return (np.asarray(y)[:, None] <= np.asarray(grid, dtype=float)[None, :]).astype(float)


def _kernel_pieces(p: PotentialPopulation, grid0, grid1):
    A0 = _grid_indicators(p.y0, grid0)
    A1 = _grid_indicators(p.y1, grid1)
    N = p.N
    F0 = A0.mean(axis=0)
    F1 = A1.mean(axis=0)
    F00 = A0.T @ A0 / N  # F0(min(y, y'))
    F11 = A1.T @ A1 / N
    F01 = A0.T @ A1 / N
    return (
        F00 - np.outer(F0, F0),
        F01 - np.outer(F0, F1),
        F11 - np.outer(F1, F1),
    )


def randomization_cov_kernel(
    p: PotentialPopulation, prop: float, q: float, grid0, grid1
):
    """Limiting kernel of n * Cov of (F0_hat, F1_hat) on the given grids.

    Returns ``(H00, H01, H11)`` with shapes (g0, g0), (g0, g1), (g1, g1).
    """
    if not 0 < prop < 1:
        raise ValueError("propensity must lie in (0, 1)")
    if not 0 < q <= 1:
        raise ValueError("q must lie in (0, 1]")
    C00, C01, C11 = _kernel_pieces(p, grid0, grid1)
    return (1 / (1 - prop) - q) * C00, -q * C01, (1 / prop - q) * C11


def randomization_cov_exact(p: PotentialPopulation, n0: int, n1: int, grid0, grid1):
    """Exact finite-population n * Cov of (F0_hat, F1_hat).

    Sampling n = n0 + n1 of N units and assigning n1 of them to treatment
    leaves every unit control, treated or unsampled with uniform
    probability over arrangements, which gives

        n Cov(F0(y), F0(y'))  = n (N - n0) / (n0 (N - 1)) * (F0(y ^ y') - F0 F0')
        n Cov(F0(y0), F1(y1)) = -n / (N - 1) * (F01 - F0 F1)
        n Cov(F1(y), F1(y'))  = n (N - n1) / (n1 (N - 1)) * (F1(y ^ y') - F1 F1')
    """
    N = p.N
    n = n0 + n1
    if n > N:
        raise ValueError("sample larger than population")
    C00, C01, C11 = _kernel_pieces(p, grid0, grid1)
    return (
        n * (N - n0) / (n0 * (N - 1)) * C00,
        -n / (N - 1) * C01,
        n * (N - n1) / (n1 * (N - 1)) * C11,
    )


# ---------------------------------------------------------------------------
# batched estimators: one row per replication, fixed stratum sizes


@lru_cache(maxsize=256)
def refinement_plan(n0: int, n1: int):
    """Refinement cells of the grids {j/n0} and {k/n1} in integer arithmetic.

    Returns ``(lengths, idx0, idx1)``: cell lengths and the order-statistic
    indices of the sorted control/treated rows constant on each cell.
    """
    d = n0 * n1
    marks = np.union1d(np.arange(1, n0 + 1) * n1, np.arange(1, n1 + 1) * n0)
    lengths = np.diff(marks, prepend=0) / d
    idx0 = -(-marks // n1) - 1
    idx1 = -(-marks // n0) - 1
    for arr in (lengths, idx0, idx1):
        arr.setflags(write=False)
    return lengths, idx0, idx1


def batch_stats(ctrl: np.ndarray, trt: np.ndarray, N: float):
    """Difference in means and both variance estimates for each row.

    ``ctrl`` has shape (B, n0) and ``trt`` shape (B, n1). Returns
    ``(tau, v_neyman, v_agl)`` arrays of length B.
    """
    n0 = ctrl.shape[1]
    n1 = trt.shape[1]
    m0 = ctrl.mean(axis=1)
    m1 = trt.mean(axis=1)
    c0 = np.sort(ctrl, axis=1) - m0[:, None]
    c1 = np.sort(trt, axis=1) - m1[:, None]
    s2_0 = np.sum(c0**2, axis=1) / (n0 - 1)
    s2_1 = np.sum(c1**2, axis=1) / (n1 - 1)
    v_ney = s2_0 / n0 + s2_1 / n1
    lengths, idx0, idx1 = refinement_plan(n0, n1)
    q0 = c0[:, idx0]
    q1 = c1[:, idx1]
    d = q0 - q1
    a0 = (q0 * d) @ lengths
    a1 = -((q1 * d) @ lengths)
    s2_01 = np.maximum(n0 / (n0 - 1) * a0 + n1 / (n1 - 1) * a1, 0.0)
    v_agl = np.maximum(v_ney - s2_01 / N, 0.0)
    return m1 - m0, v_ney, v_agl
