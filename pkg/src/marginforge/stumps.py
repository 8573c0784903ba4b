"""Threshold stumps and the max-edge queries a booster round needs.

``best_stump`` answers a distribution with the pool stump of largest
weighted correlation via one sorted sweep per feature; ``pool_oracle``
does the same by dense argmax when the whole gain matrix is in memory.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Dataset, GainMatrix


@dataclass(frozen=True)
class StumpHypothesis:
    """Single-feature threshold rule: polarity if x[feature] >= threshold."""

    feature: int
    threshold: float
    polarity: int

    def predict(self, features: np.ndarray) -> np.ndarray:
        features = np.atleast_2d(np.asarray(features, dtype=float))
        fire = features[:, self.feature] >= self.threshold
        return np.where(fire, float(self.polarity), -float(self.polarity))


@dataclass(frozen=True)
class StumpPool:
    """Deterministic stump candidates for a dataset.

    Per feature: one threshold below the minimum, midpoints between
    consecutive distinct values, one above the maximum; each threshold
    with polarity +1 then -1.  Enumeration order is (feature asc,
    threshold asc, +1 first), which is also the tie-break order of
    every max-edge query.
    """

    candidates: tuple[StumpHypothesis, ...]

    @classmethod
    def build(cls, data: Dataset) -> "StumpPool":
        out = []
        for f in range(data.p):
            distinct = np.unique(data.features[:, f])
            thresholds = [distinct[0] - 1.0]
            thresholds.extend((distinct[:-1] + distinct[1:]) / 2.0)
            thresholds.append(distinct[-1] + 1.0)
            for thr in thresholds:
                out.append(StumpHypothesis(f, float(thr), 1))
                out.append(StumpHypothesis(f, float(thr), -1))
        return cls(candidates=tuple(out))

    def __len__(self) -> int:
        return len(self.candidates)


def best_stump(
    data: Dataset, d: np.ndarray, pool: StumpPool
) -> tuple[StumpHypothesis, float, np.ndarray]:
    """Pool stump with the largest edge sum_i d_i y_i h(x_i).

    One argsort per feature; prefix sums of d_i*y_i give every
    threshold's edge, so the scan costs O(p m log m) instead of
    O(|pool| m).  Ties resolve to the earliest pool candidate.
    """
    if len(pool) == 0:
        raise ValueError("stump pool is empty")
    d = np.asarray(d, dtype=float)
    if d.shape != (data.m,):
        raise ValueError("distribution length does not match the dataset")

    weighted = d * data.labels
    best = None  # (edge, stump)
    for f in range(data.p):
        x = data.features[:, f]
        order = np.argsort(x, kind="stable")
        xs = x[order]
        prefix = np.concatenate([[0.0], np.cumsum(weighted[order])])
        total = prefix[-1]

        # below-min and above-max thresholds, then distinct-value midpoints
        thresholds = [xs[0] - 1.0]
        plus_edges = [total]
        boundaries = np.nonzero(xs[:-1] < xs[1:])[0] + 1
        thresholds.extend((xs[boundaries - 1] + xs[boundaries]) / 2.0)
        plus_edges.extend(total - 2.0 * prefix[boundaries])
        thresholds.append(xs[-1] + 1.0)
        plus_edges.append(-total)

        for thr, edge_plus in zip(thresholds, plus_edges):
            for pol, edge in ((1, edge_plus), (-1, -edge_plus)):
                if best is None or edge > best[0]:
                    best = (edge, StumpHypothesis(f, float(thr), pol))

    stump = best[1]
    gain_column = data.labels * stump.predict(data.features)
    return stump, float(d @ gain_column), gain_column


def pool_oracle(A_full: GainMatrix, d: np.ndarray) -> int:
    """Index of the max-edge column of a fully materialised gain matrix.

    Ties go to the lowest index.
    """
    d = np.asarray(d, dtype=float)
    return int(np.argmax(d @ A_full.as_array()))


def full_gain_matrix(data: Dataset, pool: StumpPool) -> GainMatrix:
    """Gain columns of every pool candidate, in pool order."""
    columns = [data.labels * h.predict(data.features) for h in pool.candidates]
    return GainMatrix(columns, list(pool.candidates))
