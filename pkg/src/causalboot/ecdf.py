"""Step-function empirical CDFs with exact generalized inverses.

Quantiles follow the left-continuous convention ``Q(u) = inf{y : F(y) >= u}``,
so ``Q(F(y)) == y`` at every support point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class EmptyStratumError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class StepCdf:
    """Weighted empirical distribution on strictly increasing levels.

    ``cum`` is built from integer counts divided by the total, so equal
    rational cumulative masses from two different CDFs compare equal
    as floats. Imputation relies on that.
    """

    values: np.ndarray
    weights: np.ndarray
    cum: np.ndarray

    @classmethod
    def from_sample(cls, xs) -> "StepCdf":
        xs = np.asarray(xs, dtype=float).ravel()
        if xs.size == 0:
            raise EmptyStratumError("empty stratum")
        if not np.all(np.isfinite(xs)):
            raise ValueError("non-finite outcome")
        values, counts = np.unique(xs, return_counts=True)
        n = xs.size
        cum = np.cumsum(counts) / n
        cum[-1] = 1.0
        for arr in (values, counts, cum):
            arr.setflags(write=False)
        weights = counts / n
        weights.setflags(write=False)
        return cls(values, weights, cum)

    def __eq__(self, other):
        if not isinstance(other, StepCdf):
            return NotImplemented
        return (
            np.array_equal(self.values, other.values)
            and np.array_equal(self.weights, other.weights)
        )

    def __len__(self) -> int:
        return self.values.size

    def eval(self, y):
        """F(y): total mass at levels <= y. Accepts scalars or arrays."""
        idx = np.searchsorted(self.values, y, side="right")
        out = np.where(idx > 0, self.cum[np.maximum(idx - 1, 0)], 0.0)
        return float(out) if np.ndim(out) == 0 else out

    def quantile(self, u):
        u_arr = np.asarray(u, dtype=float)
        if np.any((u_arr <= 0) | (u_arr > 1)) or np.any(np.isnan(u_arr)):
            raise ValueError("quantile level out of range")
        idx = np.searchsorted(self.cum, u_arr, side="left")
        out = self.values[np.minimum(idx, self.values.size - 1)]
        return float(out) if np.ndim(out) == 0 else out

    def mean(self) -> float:
        return float(np.dot(self.values, self.weights))

    def second_moment(self) -> float:
        return float(np.dot(self.values**2, self.weights))


def refinement(F0: StepCdf, F1: StepCdf):
    """Common refinement of the two cumulative-mass breakpoint sets.

    Returns ``(lengths, q0, q1)``: on each refinement cell ``(a, b]`` both
    quantile functions are constant, equal to ``q0`` and ``q1``.
    """
    breaks = np.union1d(F0.cum, F1.cum)
    lengths = np.diff(breaks, prepend=0.0)
    q0 = F0.values[np.minimum(np.searchsorted(F0.cum, breaks, "left"), len(F0) - 1)]
    q1 = F1.values[np.minimum(np.searchsorted(F1.cum, breaks, "left"), len(F1) - 1)]
    return lengths, q0, q1


def iso_product_moment(F0: StepCdf, F1: StepCdf) -> float:
    """Exact E[Q0(U) Q1(U)] for U ~ Uniform(0, 1)."""
    lengths, q0, q1 = refinement(F0, F1)
    return float(np.sum(lengths * q0 * q1))
