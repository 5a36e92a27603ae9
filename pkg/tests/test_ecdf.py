from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from causalboot.ecdf import EmptyStratumError, StepCdf, iso_product_moment

samples = st.lists(st.integers(-20, 20), min_size=1, max_size=12)


def rational_iso_moment(xs, ys):
    """Exact integral of Q_x(u) Q_y(u) over (0, 1] with rational breakpoints."""
    xs, ys = sorted(xs), sorted(ys)
    nx, ny = len(xs), len(ys)
    breaks = sorted({Fraction(j, nx) for j in range(1, nx + 1)} | {Fraction(k, ny) for k in range(1, ny + 1)})
    total, prev = Fraction(0), Fraction(0)
    for b in breaks:
        # Q(u) = x_(ceil(u n)) is constant on (prev, b]
        qx = xs[-(-b.numerator * nx // b.denominator) - 1]
        qy = ys[-(-b.numerator * ny // b.denominator) - 1]
        total += (b - prev) * qx * qy
        prev = b
    return total


def test_from_sample_merges_ties():
    F = StepCdf.from_sample([1, 2, 2, 5])
    assert F.values.tolist() == [1, 2, 5]
    assert F.weights.tolist() == [0.25, 0.5, 0.25]
    assert F.cum[-1] == 1.0


def test_point_mass_and_permutation_invariance():
    F = StepCdf.from_sample([7])
    assert F.values.tolist() == [7] and F.weights.tolist() == [1.0]
    assert StepCdf.from_sample([3, 1, 2]) == StepCdf.from_sample([1, 2, 3])


def test_from_sample_errors():
    with pytest.raises(EmptyStratumError, match="empty stratum"):
        StepCdf.from_sample([])
    with pytest.raises(ValueError, match="non-finite outcome"):
        StepCdf.from_sample([1.0, np.inf])


def test_eval_examples():
    F = StepCdf.from_sample([1, 2, 3])
    assert F.eval(2) == pytest.approx(2 / 3)
    assert F.eval(0.5) == 0.0
    assert F.eval(3) == 1.0
    assert F.eval(1e9) == 1.0


def test_quantile_examples():
    F = StepCdf.from_sample([10, 20, 30])
    assert F.quantile(2 / 3) == 20
    assert F.quantile(1.0) == 30
    assert F.quantile(1e-9) == 10
    for bad in (0.0, -0.1, 1.0000001):
        with pytest.raises(ValueError, match="quantile level out of range"):
            F.quantile(bad)


def test_iso_product_moment_examples():
    F02 = StepCdf.from_sample([0, 2])
    assert iso_product_moment(F02, StepCdf.from_sample([1, 3])) == pytest.approx(3.0, abs=1e-15)
    assert iso_product_moment(F02, StepCdf.from_sample([1, 1, 3])) == pytest.approx(7 / 3, abs=1e-15)
    assert iso_product_moment(StepCdf.from_sample([4]), StepCdf.from_sample([-2.5])) == -10.0


@given(samples)
def test_galois_pair(xs):
    F = StepCdf.from_sample(xs)
    for y in F.values:
        assert F.quantile(F.eval(y)) == y
    for y in np.linspace(min(xs) - 1, max(xs) + 1, 17):
        if F.eval(y) > 0:
            assert F.quantile(F.eval(y)) <= y


@given(samples, st.floats(1e-9, 1.0))
def test_quantile_is_generalized_inverse(xs, u):
    F = StepCdf.from_sample(xs)
    q = F.quantile(u)
    assert F.eval(q) >= u - 1e-15
    below = F.values[F.values < q]
    assert below.size == 0 or F.eval(below.max()) < u


@given(samples)
def test_self_moment_is_second_moment(xs):
    F = StepCdf.from_sample(xs)
    direct = np.mean(np.square(np.asarray(xs, float)))
    assert iso_product_moment(F, F) == pytest.approx(direct, abs=1e-12 * max(1.0, direct))


@settings(max_examples=200)
@given(samples, samples)
def test_iso_moment_matches_rational_oracle(xs, ys):
    F0, F1 = StepCdf.from_sample(xs), StepCdf.from_sample(ys)
    exact = rational_iso_moment(xs, ys)
    assert iso_product_moment(F0, F1) == pytest.approx(float(exact), abs=1e-10)


@given(samples, samples)
def test_comonotone_covariance_nonnegative(xs, ys):
    F0, F1 = StepCdf.from_sample(xs), StepCdf.from_sample(ys)
    assert iso_product_moment(F0, F1) - F0.mean() * F1.mean() >= -1e-10


@given(st.integers(1, 15), st.data())
def test_equal_size_sorted_pairs(n, data):
    xs = data.draw(st.lists(st.floats(-50, 50), min_size=n, max_size=n, unique=True))
    ys = data.draw(st.lists(st.floats(-50, 50), min_size=n, max_size=n, unique=True))
    brute = np.mean(np.sort(xs) * np.sort(ys))
    got = iso_product_moment(StepCdf.from_sample(xs), StepCdf.from_sample(ys))
    assert got == pytest.approx(brute, rel=1e-12, abs=1e-9)
