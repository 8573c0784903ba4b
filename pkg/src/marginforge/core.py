"""Shared data model: datasets, gain matrices, capped-simplex points.

Distributions over examples are plain 1-D numpy arrays; ensemble weights
over discovered hypotheses are sparse ``{column index: coefficient}``
dicts.  ``check_distribution`` / ``check_ensemble_weights`` enforce the
membership invariants where such vectors are produced.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import CAP_BOX_TOL, ENTROPY_ZERO, SIMPLEX_SUM_TOL


@dataclass(frozen=True)
class Dataset:
    """Binary classification sample: m feature rows and +-1 labels."""

    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        features = np.array(self.features, dtype=float)
        labels = np.array(self.labels, dtype=float)
        if features.ndim != 2 or features.shape[0] < 1 or features.shape[1] < 1:
            raise ValueError("features must be a non-empty 2-D array")
        if not np.all(np.isfinite(features)):
            raise ValueError("features contain non-finite values")
        if labels.shape != (features.shape[0],):
            raise ValueError("labels must be a vector with one entry per row")
        if not np.all(np.isin(labels, (-1.0, 1.0))):
            raise ValueError("labels must all be -1 or +1")
        features.flags.writeable = False
        labels.flags.writeable = False
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)

    @property
    def m(self) -> int:
        return self.features.shape[0]

    @property
    def p(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True)
class CapParams:
    """Capping / smoothing parameters shared by the solvers.

    ``nu`` caps each distribution entry at 1/nu; ``eta`` weights the
    entropy regulariser by 1/eta; ``eps`` is the target tolerance.
    """

    nu: float
    m: int
    eta: float
    eps: float

    def __post_init__(self):
        if not 1.0 <= self.nu <= self.m:
            raise ValueError(f"nu must lie in [1, m]; got nu={self.nu}, m={self.m}")
        if self.eta <= 0.0:
            raise ValueError("eta must be positive")
        if self.eps <= 0.0:
            raise ValueError("eps must be positive")

    @classmethod
    def from_tolerance(cls, m: int, nu: float, eps: float) -> "CapParams":
        """Build params with eta = 2*ln(m/nu)/eps.

        At nu == m the capped simplex is the single point 1/m and the
        formula would give eta = 0; any positive eta yields the same
        (unique) feasible vector, so eta is floored at a tiny value.
        """
        eta = max(2.0 * math.log(m / nu) / eps, 1e-9)
        return cls(nu=nu, m=m, eta=eta, eps=eps)

    @property
    def cap(self) -> float:
        return 1.0 / self.nu


class GainMatrix:
    """Discovered gain columns, entry [i, j] = label_i * h_j(x_i).

    Columns are kept in discovery order.  ``with_column`` returns a new
    matrix sharing the existing column arrays, so instances act as
    immutable values; a repeated hypothesis id reuses its old index
    instead of inserting a duplicate column.
    """

    def __init__(self, columns=(), hypothesis_ids=()):
        self.columns: list[np.ndarray] = list(columns)
        self.hypothesis_ids: list = list(hypothesis_ids)
        if len(self.columns) != len(self.hypothesis_ids):
            raise ValueError("columns and hypothesis_ids must run parallel")
        for col in self.columns:
            _check_gain_column(col)
        self._index_of = {hid: j for j, hid in enumerate(self.hypothesis_ids)}
        self._stacked: np.ndarray | None = None

    @property
    def m(self) -> int:
        if not self.columns:
            raise ValueError("empty gain matrix has no row count")
        return self.columns[0].shape[0]

    @property
    def t(self) -> int:
        return len(self.columns)

    def index_of(self, hypothesis_id):
        return self._index_of.get(hypothesis_id)

    def with_column(self, column: np.ndarray, hypothesis_id) -> tuple["GainMatrix", int]:
        """Return (matrix containing the column, its index).

        Known ids are not re-inserted; the existing index is returned
        with ``self`` unchanged.
        """
        existing = self._index_of.get(hypothesis_id)
        if existing is not None:
            return self, existing
        column = np.asarray(column, dtype=float)
        _check_gain_column(column)
        if self.columns and column.shape != self.columns[0].shape:
            raise ValueError("column length does not match the matrix")
        grown = GainMatrix(self.columns + [column], self.hypothesis_ids + [hypothesis_id])
        return grown, grown.t - 1

    def as_array(self) -> np.ndarray:
        """Dense m x t view (cached)."""
        if self._stacked is None or self._stacked.shape[1] != self.t:
            self._stacked = np.column_stack(self.columns)
        return self._stacked


def _check_gain_column(col: np.ndarray):
    if col.ndim != 1 or col.shape[0] < 1:
        raise ValueError("gain column must be a non-empty vector")
    if not np.all(np.isfinite(col)):
        raise ValueError("gain column has non-finite entries")
    if np.any(np.abs(col) > 1.0 + 1e-12):
        raise ValueError("gain column entries must lie in [-1, +1]")


def check_distribution(d: np.ndarray, nu: float) -> np.ndarray:
    """Validate a capped-simplex point: entries in [0, 1/nu], sum 1."""
    d = np.asarray(d, dtype=float)
    if d.ndim != 1:
        raise ValueError("distribution must be a vector")
    if np.any(d < -CAP_BOX_TOL) or np.any(d > 1.0 / nu + CAP_BOX_TOL):
        raise ValueError("distribution entries leave [0, 1/nu]")
    if abs(float(d.sum()) - 1.0) > SIMPLEX_SUM_TOL:
        raise ValueError("distribution does not sum to 1")
    return d


def check_ensemble_weights(w: dict[int, float]) -> dict[int, float]:
    """Validate sparse simplex weights: positive entries summing to 1."""
    if not w:
        raise ValueError("ensemble weights must be non-empty")
    if any(v <= 0.0 for v in w.values()):
        raise ValueError("stored ensemble coefficients must be positive")
    if abs(sum(w.values()) - 1.0) > SIMPLEX_SUM_TOL:
        raise ValueError("ensemble weights do not sum to 1")
    return w


def margins(A: GainMatrix, w: dict[int, float]) -> np.ndarray:
    """Weighted gain vector sum_j w_j * column_j (length m)."""
    if not w:
        raise ValueError("ensemble weights must be non-empty")
    t = A.t
    if len(w) == 1:
        ((j, coeff),) = w.items()
        if not 0 <= j < t:
            raise IndexError(f"ensemble references column {j} outside the matrix")
        return coeff * A.columns[j]
    dense = np.zeros(t)
    for j, coeff in w.items():
        if not 0 <= j < t:
            raise IndexError(f"ensemble references column {j} outside the matrix")
        dense[j] = coeff
    return A.as_array() @ dense


def edges(A: GainMatrix, d: np.ndarray) -> np.ndarray:
    """Per-column weighted correlations d @ A (length t)."""
    d = np.asarray(d, dtype=float)
    if d.shape != (A.m,):
        raise ValueError(f"distribution length {d.shape} does not match m={A.m}")
    return d @ A.as_array()


def relative_entropy(d: np.ndarray) -> float:
    """Entropy distance from uniform: sum d_i*ln(d_i) + ln(m), with 0*ln(0)=0."""
    d = np.asarray(d, dtype=float)
    pos = d[d > ENTROPY_ZERO]
    return float(np.sum(pos * np.log(pos)) + math.log(d.shape[0]))
