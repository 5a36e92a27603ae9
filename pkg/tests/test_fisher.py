import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from causalboot.estimators import fisher_implicit_variance
from causalboot.fisher import (
    EXHAUSTIVE,
    InfeasibleExhaustiveError,
    fisher_ci,
    fisher_pvalues,
    fisher_test,
)
from causalboot.population import ObservedSample


def brute_pvalue(y, w, tau0):
    """Direct imputation of the sharp-null table, all assignments, rational arithmetic."""
    y = [Fraction(v) for v in y]
    n, n1 = len(y), sum(w)
    y0 = [y[i] - tau0 if w[i] else y[i] for i in range(n)]
    y1 = [y0[i] + tau0 for i in range(n)]

    def dim(assign):
        t = sum(y1[i] for i in range(n) if assign[i]) / n1
        c = sum(y0[i] for i in range(n) if not assign[i]) / (n - n1)
        return t - c

    obs = abs(dim(w) - tau0)
    hits = total = 0
    for combo in itertools.combinations(range(n), n1):
        a = [1 if i in combo else 0 for i in range(n)]
        hits += abs(dim(a) - tau0) >= obs
        total += 1
    return Fraction(hits, total)


def test_two_by_two_example():
    s = ObservedSample.from_strata([0, 0], [1, 1])
    assert fisher_test(s, 0.0, EXHAUSTIVE) == pytest.approx(2 / 6, abs=1e-15)


def test_constant_strata_at_estimate():
    s = ObservedSample.from_strata([3, 3, 3], [5, 5])
    assert fisher_test(s, 2.0, EXHAUSTIVE) == 1.0


def test_unit_order_invariance():
    s = ObservedSample.from_strata([0.3, 1.2, -0.7, 2.2], [1.0, 2.5, 0.1])
    perm = np.random.default_rng(1).permutation(s.n)
    t = ObservedSample(s.y[perm], s.w[perm])
    for tau0 in (-1.0, 0.0, 0.8, 2.5):
        assert fisher_test(s, tau0, EXHAUSTIVE) == fisher_test(t, tau0, EXHAUSTIVE)


@pytest.mark.parametrize("seed", range(12))
def test_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    n0, n1 = rng.integers(2, 5, size=2)
    y = rng.integers(-4, 5, n0 + n1)
    w = np.array([0] * n0 + [1] * n1)
    rng.shuffle(w)
    s = ObservedSample(y, w)
    for tau0 in (-2, -0.5, 0, 1, 3):
        p = fisher_test(s, tau0, EXHAUSTIVE)
        assert p == pytest.approx(float(brute_pvalue(y.tolist(), w.tolist(), Fraction(tau0))), abs=1e-12)


def test_exhaustive_pvalues_on_lattice():
    s = ObservedSample.from_strata([0.1, 2.3, 1.7, 4.0], [1.1, 3.3, 0.2])
    total = math.comb(7, 3)
    for p in fisher_pvalues(s, np.linspace(-3, 5, 33), EXHAUSTIVE):
        assert abs(p * total - round(p * total)) < 1e-9


def test_monte_carlo_includes_observed():
    s = ObservedSample.from_strata(np.arange(10.0), np.arange(10.0) + 100)
    p = fisher_test(s, 0.0, M=99, seed=3)
    assert p >= 1 / 100
    assert p == pytest.approx(1 / 100)


def test_exhaustive_infeasible():
    s = ObservedSample.from_strata(np.arange(20.0), np.arange(20.0))
    with pytest.raises(InfeasibleExhaustiveError):
        fisher_test(s, 0.0, EXHAUSTIVE)


def test_validity_constant_effect_population():
    rng = np.random.default_rng(8)
    y0 = rng.normal(size=8).round(2)
    tau = 0.7
    n1 = 3
    ps = []
    for combo in itertools.combinations(range(8), n1):
        w = np.zeros(8, int)
        w[list(combo)] = 1
        ps.append(fisher_test(ObservedSample(y0 + tau * w, w), tau, EXHAUSTIVE))
    ps = np.array(ps)
    for alpha in np.unique(ps):
        assert np.mean(ps <= alpha) <= alpha + 1e-12


def test_ci_contains_estimate_for_constant_effect():
    s = ObservedSample.from_strata([0.0, 1.0, 2.5, 3.0, -1.0], [2.0, 3.0, 4.5, 5.0, 1.0])
    ci = fisher_ci(s, M=EXHAUSTIVE)
    assert ci.contains(2.0)


def test_ci_shift_equivariance():
    rng = np.random.default_rng(4)
    y, w = rng.normal(size=30), np.repeat([0, 1], 15)
    a = fisher_ci(ObservedSample(y, w), M=199, seed=5)
    b = fisher_ci(ObservedSample(y + 1.5 * w, w), M=199, seed=5)
    assert b.lo == pytest.approx(a.lo + 1.5, abs=1e-9)
    assert b.hi == pytest.approx(a.hi + 1.5, abs=1e-9)


def test_ci_refinement_oracle():
    # Design-II-like tiny sample: zeros in the treated stratum
    s = ObservedSample.from_strata([-1.1, 0.4, 1.3, 0.2, -0.3], [0.0, 0.0, 0.0, 0.0])
    step = 0.05
    ci = fisher_ci(s, step=step, M=EXHAUSTIVE)
    fine = fisher_ci(s, step=step / 10, M=EXHAUSTIVE)
    assert abs(ci.lo - fine.lo) <= step
    assert abs(ci.hi - fine.hi) <= step
    # every kept node of the fine scan lies inside the coarse interval widened by one step
    half = 6 * math.sqrt(fisher_implicit_variance(s))
    grid = np.arange(-half, half, step / 10) + (s.treated.mean() - s.control.mean())
    p = fisher_pvalues(s, grid, EXHAUSTIVE)
    kept = grid[p > 0.05]
    assert kept.min() >= ci.lo - step and kept.max() <= ci.hi + step


def test_ci_spans_grid_when_nothing_is_rejectable():
    # C(4, 2) = 6 assignments: the smallest p-value 2/6 exceeds 1 - level
    s = ObservedSample.from_strata([0.0, 1.0], [5.0, 6.0])
    ci = fisher_ci(s, level=0.95, M=EXHAUSTIVE)
    half = 6 * math.sqrt(fisher_implicit_variance(s))
    assert not ci.degenerate
    assert (ci.lo, ci.hi) == pytest.approx((5.0 - half, 5.0 + half))


def test_ci_errors():
    s = ObservedSample.from_strata([0.0, 1.0, 2.0], [5.0, 6.0, 3.0])
    with pytest.raises(ValueError):
        fisher_ci(s, step=0.0)
    with pytest.raises(ValueError):
        fisher_ci(s, level=1.0)
