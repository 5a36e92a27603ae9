"""Fisher randomization test of constant-shift sharp nulls and its inversion.

Under the null ``Y_i(1) = Y_i(0) + tau0`` the difference in means for a
re-randomized assignment ``W*`` is affine in ``tau0``:

    tau*(W*, tau0) = a(W*) + tau0 * b(W*)

with ``a`` the naive difference in observed outcomes and ``b`` the share
of swapped units. Computing ``(a, b)`` once per reference assignment lets
the whole inversion grid reuse the same permutations.
"""

from __future__ import annotations

import itertools
import math
import warnings

import numpy as np

from causalboot.bootstrap import ConfidenceInterval, z_crit
from causalboot.estimators import ate_estimate, fisher_implicit_variance
from causalboot.population import ObservedSample
from causalboot.resampling import as_generator, batch_permutations

EXHAUSTIVE = "exhaustive"
MAX_EXHAUSTIVE = 10**6
# relative slack when comparing test statistics, so exact ties count as extreme
_TIE_RTOL = 1e-9


class InfeasibleExhaustiveError(ValueError):
    pass


def _reference_assignments(s: ObservedSample, M, seed) -> np.ndarray:
    """Boolean (R, n) treated-indicator matrix of the reference set."""
    n, n1 = s.n, s.n1
    if M == EXHAUSTIVE:
        if math.comb(n, n1) > MAX_EXHAUSTIVE:
            raise InfeasibleExhaustiveError(
                f"C({n},{n1}) assignments exceed the exhaustive limit"
            )
        out = np.zeros((math.comb(n, n1), n), dtype=bool)
        for r, combo in enumerate(itertools.combinations(range(n), n1)):
            out[r, list(combo)] = True
        return out
    M = int(M)
    if M < 1:
        raise ValueError("M must be at least 1")
    rng = as_generator(seed)
    perm = batch_permutations(rng, M, n)
    out = np.zeros((M + 1, n), dtype=bool)
    np.put_along_axis(out[:M], perm[:, :n1], True, axis=1)
    out[M] = s.w == 1  # observed assignment always in the reference set
    return out


def _affine_coefficients(s: ObservedSample, assign: np.ndarray):
    w = s.w.astype(float)
    x = assign.astype(float)
    n1, n0 = s.n1, s.n0
    a = (x @ s.y) / n1 - ((1.0 - x) @ s.y) / n0
    b = (x @ (1.0 - w)) / n1 + ((1.0 - x) @ w) / n0
    return a, b


def fisher_pvalues(s: ObservedSample, tau0s, M=EXHAUSTIVE, seed=0) -> np.ndarray:
    """Two-sided p-values for each null shift in ``tau0s`` (shared reference set)."""
    tau0s = np.atleast_1d(np.asarray(tau0s, dtype=float))
    a, b = _affine_coefficients(s, _reference_assignments(s, M, seed))
    tau_hat = ate_estimate(s)
    obs = np.abs(tau_hat - tau0s)
    ref = np.abs(a[None, :] + tau0s[:, None] * (b[None, :] - 1.0))
    scale = np.maximum(np.abs(s.y).max() + np.abs(tau0s), 1.0)
    extreme = ref >= (obs - _TIE_RTOL * scale)[:, None]
    return extreme.mean(axis=1)


def fisher_test(s: ObservedSample, tau0: float, M=EXHAUSTIVE, seed=0) -> float:
    """p-value of the sharp null that every unit's effect equals ``tau0``.

    ``M`` is either ``"exhaustive"`` (all C(n, n1) assignments) or a number
    of random complete randomizations, to which the observed assignment is
    added.
    """
    return float(fisher_pvalues(s, [tau0], M, seed)[0])


def fisher_ci(
    s: ObservedSample,
    level: float = 0.95,
    step: float | None = None,
    M=999,
    seed=0,
    points: int = 401,
    half_width_se: float = 6.0,
) -> ConfidenceInterval:
    """Invert the test over a grid centred at the estimate.

    The grid spans ``tau_hat +/- half_width_se`` implied standard errors with
    ``points`` nodes, or spacing ``step`` when given. The returned interval
    runs from the smallest to the largest non-rejected node.
    """
    if not 0 < level < 1:
        raise ValueError("level must lie in (0, 1)")
    tau_hat = ate_estimate(s)
    half = half_width_se * math.sqrt(fisher_implicit_variance(s))
    if step is None:
        grid = np.linspace(tau_hat - half, tau_hat + half, points)
    else:
        if step <= 0:
            raise ValueError("grid step must be positive")
        k = int(math.floor(half / step))
        grid = tau_hat + step * np.arange(-k, k + 1)
    pvals = fisher_pvalues(s, grid, M, seed)
    keep = np.flatnonzero(pvals > 1 - level)
    z = z_crit(level)
    if keep.size == 0:
        warnings.warn("Fisher inversion rejected every grid point", RuntimeWarning)
        return ConfidenceInterval(tau_hat, tau_hat, level, 0.0, degenerate=True)
    if keep[-1] - keep[0] + 1 != keep.size:
        warnings.warn("non-rejection set is not an interval on the grid", RuntimeWarning)
    lo, hi = float(grid[keep[0]]), float(grid[keep[-1]])
    return ConfidenceInterval(lo, hi, level, (hi - lo) / (2 * z))
