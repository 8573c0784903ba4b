"""Pluggable conditional-gradient update rules for the booster loop.

Each rule maps the current sparse ensemble weights and a newly
discovered column to updated weights on the simplex.  ``good_step``
records whether a pairwise move stopped short of its mass cap; for the
other rules the cap is 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import BISECTION_MAX_ITERS, BISECTION_TOL, SUPPORT_DROP_TOL
from .core import CapParams, GainMatrix, margins
from .entropy import capped_entropy_projection


@dataclass(frozen=True)
class FwStepOutcome:
    new_w: dict[int, float]
    step_size: float
    step_cap: float
    good_step: bool


def classic_step(t: int, w: dict[int, float], e_new: int) -> FwStepOutcome:
    """Harmonic step size 2/(t+2); t=0 replaces the ensemble outright."""
    if t < 0:
        raise ValueError("iteration index must be nonnegative")
    lam = 2.0 / (t + 2.0)
    return FwStepOutcome(_mix(w, e_new, lam), lam, 1.0, lam < 1.0)


def short_step(
    A: GainMatrix, w: dict[int, float], e_new: int, d: np.ndarray, eta: float
) -> FwStepOutcome:
    """Step minimising the smoothness upper bound, clipped to [0, 1].

    lam = [d @ (col_new - A w)] / [eta * ||col_new - A w||_inf^2];
    a zero denominator (new column equals the current mix) gives 0.
    """
    direction = A.columns[e_new] - margins(A, w)
    denom = eta * float(np.max(np.abs(direction))) ** 2
    lam = 0.0 if denom <= 0.0 else min(1.0, max(0.0, float(d @ direction) / denom))
    return FwStepOutcome(_mix(w, e_new, lam), lam, 1.0, lam < 1.0)


def line_search_step(
    A: GainMatrix, w: dict[int, float], e_new: int, params: CapParams
) -> FwStepOutcome:
    """Exact minimisation of the smoothed objective along the segment."""
    base = margins(A, w)
    direction = A.columns[e_new] - base
    lam = _bisect(base, direction, 1.0, params)
    return FwStepOutcome(_mix(w, e_new, lam), lam, 1.0, lam < 1.0)


def pairwise_step(
    A: GainMatrix, w: dict[int, float], e_new: int, d: np.ndarray, params: CapParams
) -> FwStepOutcome:
    """Move mass from the worst active column onto the new one.

    The away column minimises d @ column over the support (ties to the
    lowest index) and caps the step at its coefficient; hitting the cap
    drops it from the support and counts as a bad step.
    """
    if not w:
        raise ValueError("pairwise step needs a non-empty support")
    away = None
    for j in sorted(w):
        score = float(d @ A.columns[j])
        if away is None or score < away[1]:
            away = (j, score)
    away_idx = away[0]
    cap = w[away_idx]

    base = margins(A, w)
    direction = A.columns[e_new] - A.columns[away_idx]
    lam = _bisect(base, direction, cap, params)

    new_w = dict(w)
    new_w[away_idx] = new_w.get(away_idx, 0.0) - lam
    new_w[e_new] = new_w.get(e_new, 0.0) + lam
    return FwStepOutcome(_normalise(new_w), lam, cap, lam < cap)


def _bisect(base: np.ndarray, direction: np.ndarray, hi: float, params: CapParams) -> float:
    """Root of the directional derivative of the smoothed objective.

    The derivative at lam is -(d(lam) @ direction) with d(lam) the
    entropy projection at base + lam*direction; it is nondecreasing, so
    a sign bisection is exact.
    """

    def slope(lam: float) -> float:
        proj = capped_entropy_projection(base + lam * direction, params)
        return -float(proj.d @ direction)

    if slope(0.0) >= 0.0:
        return 0.0
    if slope(hi) <= 0.0:
        return hi
    lo, up = 0.0, hi
    for _ in range(BISECTION_MAX_ITERS):
        if up - lo <= BISECTION_TOL:
            break
        mid = 0.5 * (lo + up)
        if slope(mid) >= 0.0:
            up = mid
        else:
            lo = mid
    return 0.5 * (lo + up)


def _mix(w: dict[int, float], e_new: int, lam: float) -> dict[int, float]:
    mixed = {j: (1.0 - lam) * v for j, v in w.items()}
    mixed[e_new] = mixed.get(e_new, 0.0) + lam
    return _normalise(mixed)


def _normalise(w: dict[int, float]) -> dict[int, float]:
    kept = {j: v for j, v in w.items() if v > SUPPORT_DROP_TOL}
    if not kept:
        raise ValueError("update emptied the ensemble support")
    total = sum(kept.values())
    return {j: v / total for j, v in kept.items()}
