"""Closed-form solvers on the capped probability simplex.

``capped_entropy_projection`` minimises d@theta + (1/eta)*H(d) over the
capped simplex by one sort plus a linear scan; ``smoothed_conjugate``
and ``capped_min_linear`` evaluate the smoothed and exact support
functions used as objectives everywhere else.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import CAP_REL_SLACK, ENTROPY_ZERO
from .core import CapParams, relative_entropy


@dataclass(frozen=True)
class ProjectionResult:
    """Minimiser of d@theta + (1/eta)*relative_entropy(d) over the cap."""

    d: np.ndarray
    objective: float
    capped_count: int


def capped_entropy_projection(theta: np.ndarray, params: CapParams) -> ProjectionResult:
    """Entropy-regularised projection, O(m log m).

    Sorts theta ascending and caps a growing prefix at 1/nu until the
    remaining mass, spread over the tail proportionally to
    exp(-eta*theta_i), stays below the cap.  The tail is evaluated
    through suffix log-sum-exp so arbitrarily large eta is safe.
    """
    theta = np.asarray(theta, dtype=float)
    if theta.ndim != 1 or theta.shape[0] != params.m:
        raise ValueError(f"theta must be a vector of length m={params.m}")
    if not np.all(np.isfinite(theta)):
        raise ValueError("theta has non-finite entries")

    m, nu, eta = params.m, params.nu, params.eta
    cap = 1.0 / nu

    order = np.lexsort((np.arange(m), theta))  # stable: (theta, index)
    scaled = -eta * theta[order]
    # suffix_lse[k] = log(sum_{i >= k} exp(scaled[i]))
    suffix_lse = np.logaddexp.accumulate(scaled[::-1])[::-1]

    k = 0
    while True:
        remaining = 1.0 - k / nu
        # largest uncapped weight belongs to the smallest theta in the tail
        top = remaining * math.exp(scaled[k] - suffix_lse[k])
        if top <= cap * (1.0 + CAP_REL_SLACK):
            break
        k += 1

    d_sorted = np.empty(m)
    d_sorted[:k] = cap
    d_sorted[k:] = remaining * np.exp(scaled[k:] - suffix_lse[k])
    d = np.empty(m)
    d[order] = d_sorted

    objective = float(d @ theta) + relative_entropy(d) / eta
    return ProjectionResult(d=d, objective=objective, capped_count=k)


def smoothed_conjugate(theta: np.ndarray, params: CapParams) -> float:
    """max_d [d@theta - (1/eta)*relative_entropy(d)] over the capped simplex."""
    return -capped_entropy_projection(-np.asarray(theta, dtype=float), params).objective


def capped_min_linear(margins: np.ndarray, nu: float) -> tuple[float, np.ndarray]:
    """Exact minimum of d@margins over the capped simplex by water-filling.

    The floor(nu) smallest entries receive 1/nu each and the next one
    takes the leftover 1 - floor(nu)/nu; this is an optimal vertex of
    the cap polytope.  Returns (value, argmin).
    """
    margins = np.asarray(margins, dtype=float)
    if not np.all(np.isfinite(margins)):
        raise ValueError("margins have non-finite entries")
    m = margins.shape[0]
    if not 1.0 <= nu <= m:
        raise ValueError(f"nu must lie in [1, m]; got {nu}")

    order = np.lexsort((np.arange(m), margins))
    full = int(math.floor(nu))
    d_sorted = np.zeros(m)
    d_sorted[:full] = 1.0 / nu
    leftover = 1.0 - full / nu
    if leftover > ENTROPY_ZERO and full < m:
        d_sorted[full] = leftover
    d = np.empty(m)
    d[order] = d_sorted
    return float(d @ margins), d
