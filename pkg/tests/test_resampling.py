import itertools

import numpy as np
import pytest

from causalboot.resampling import (
    SeedSpec,
    batch_permutations,
    bernoulli_assignment,
    complete_randomization,
    sample_without_replacement,
)


def test_sample_without_replacement_edges():
    assert sample_without_replacement(5, 5, 0).tolist() == [0, 1, 2, 3, 4]
    assert sample_without_replacement(5, 0, 0).size == 0
    with pytest.raises(ValueError):
        sample_without_replacement(3, 4, 0)


def test_subset_frequencies():
    rng = SeedSpec(7).generator()
    counts = {c: 0 for c in itertools.combinations(range(4), 2)}
    R = 60_000
    for _ in range(R):
        counts[tuple(sample_without_replacement(4, 2, rng).tolist())] += 1
    for c in counts.values():
        assert abs(c / R - 1 / 6) <= 0.01


def test_complete_randomization_enumeration():
    rng = SeedSpec(8).generator()
    counts = {}
    R = 30_000
    for _ in range(R):
        w = complete_randomization(4, 2, rng)
        assert w.sum() == 2
        counts[tuple(w)] = counts.get(tuple(w), 0) + 1
    assert len(counts) == 6
    for c in counts.values():
        assert abs(c / R - 1 / 6) <= 0.01


def test_complete_randomization_complement_and_errors():
    w = complete_randomization(9, 8, SeedSpec(1))
    assert w.sum() == 8
    for n1 in (0, 9):
        with pytest.raises(ValueError):
            complete_randomization(9, n1, 0)


def test_bernoulli_frequency():
    n, prop = 200_000, 0.3
    w = bernoulli_assignment(n, prop, SeedSpec(4))
    assert abs(w.mean() - prop) <= 3 * np.sqrt(prop * (1 - prop) / n)
    ones = [bernoulli_assignment(1, 0.25, SeedSpec(4, r))[0] for r in range(4000)]
    assert abs(np.mean(ones) - 0.25) <= 3 * np.sqrt(0.25 * 0.75 / 4000)
    with pytest.raises(ValueError):
        bernoulli_assignment(3, 1.0, 0)


def test_determinism():
    a = complete_randomization(50, 20, SeedSpec(3, 9))
    b = complete_randomization(50, 20, SeedSpec(3, 9))
    assert a.tobytes() == b.tobytes()
    assert bernoulli_assignment(30, 0.5, 11).tobytes() == bernoulli_assignment(30, 0.5, 11).tobytes()
    assert SeedSpec(3, 9).generator(2).random(5).tolist() == SeedSpec(3, 9).generator(2).random(5).tolist()


def test_stream_independence():
    n = 100_000
    pairs = [
        (SeedSpec(0, 0).generator(), SeedSpec(0, 1).generator()),
        (SeedSpec(0, 5).generator(0), SeedSpec(0, 5).generator(1)),
        (SeedSpec(0, 5).generator(), SeedSpec(1, 5).generator()),
    ]
    for g, h in pairs:
        r = np.corrcoef(g.standard_normal(n), h.standard_normal(n))[0, 1]
        assert abs(r) < 0.02


def test_seed_range():
    with pytest.raises(ValueError):
        SeedSpec(-1)
    with pytest.raises(ValueError):
        SeedSpec(0, 1 << 64)
    SeedSpec((1 << 64) - 1, (1 << 64) - 1).generator().random()


def test_batch_permutations_rows_are_permutations():
    P = batch_permutations(SeedSpec(2).generator(), 500, 7)
    assert np.all(np.sort(P, axis=1) == np.arange(7))
    # first position is uniform over units
    freq = np.bincount(P[:, 0], minlength=7) / 500
    assert np.all(np.abs(freq - 1 / 7) < 0.07)
