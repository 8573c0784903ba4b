"""Dense LP solver and the two boosting formulations built on it.

The kernel is a two-phase primal simplex over ``0 <= x <= u`` boxes
(upper bounds handled implicitly, free variables by splitting).  Pricing
is most-negative-reduced-cost but falls back to Bland's rule whenever
the objective stalls, so the solver cannot cycle and stays
deterministic.  ``solve_edge_min`` wraps the restricted edge-min /
soft-margin pair and certifies strong duality on every call.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import (
    COMPLEMENTARITY_TOL,
    DUAL_CLIP,
    LP_PIVOT_TOL,
    LP_RATIO_TOL,
    STRONG_DUALITY_TOL,
)
from .core import GainMatrix, check_distribution, check_ensemble_weights, edges
from .entropy import capped_min_linear

_STALL_LIMIT = 32  # degenerate pivots tolerated before switching to Bland
_MAX_PIVOTS = 200_000

_AT_LOWER, _AT_UPPER, _BASIC = 0, 1, 2


class LpError(Exception):
    pass


class LpInfeasibleError(LpError):
    def __init__(self, certificate):
        super().__init__("LP is infeasible")
        self.certificate = certificate


class LpUnboundedError(LpError):
    def __init__(self, direction):
        super().__init__("LP is unbounded")
        self.direction = direction


@dataclass
class StandardLp:
    """maximize objective @ x subject to rows and per-variable boxes.

    ``row_kinds[r]`` is "le" or "eq"; ``variable_bounds[j]`` is a
    ``(lo, hi)`` pair with lo in {0, -inf} and hi possibly +inf.
    """

    objective: np.ndarray
    constraint_matrix: np.ndarray
    rhs: np.ndarray
    row_kinds: list[str]
    variable_bounds: list[tuple[float, float]]

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float)
        self.constraint_matrix = np.atleast_2d(np.asarray(self.constraint_matrix, dtype=float))
        self.rhs = np.asarray(self.rhs, dtype=float)
        r, n = self.constraint_matrix.shape
        if self.objective.shape != (n,) or self.rhs.shape != (r,):
            raise ValueError("inconsistent LP dimensions")
        if len(self.row_kinds) != r or len(self.variable_bounds) != n:
            raise ValueError("row_kinds / variable_bounds lengths do not match")
        if any(kind not in ("le", "eq") for kind in self.row_kinds):
            raise ValueError("row kinds must be 'le' or 'eq'")
        for lo, hi in self.variable_bounds:
            if lo not in (0.0, -math.inf) or hi <= lo:
                raise ValueError("variable bounds must be [0, hi] or [-inf, hi]")


def solve_lp(lp: StandardLp) -> tuple[np.ndarray, float, np.ndarray]:
    """Solve a StandardLp; returns (x, value, row duals).

    Duals are reported for the maximisation sense: nonnegative on
    binding "le" rows, free on "eq" rows.
    """
    r, n = lp.constraint_matrix.shape

    # column layout: one column per variable, plus a mirror column for
    # each free variable (x = x+ - x-)
    cols = []
    upper = []
    cost = []
    owner = []  # (variable index, sign)
    for j in range(n):
        lo, hi = lp.variable_bounds[j]
        cols.append(lp.constraint_matrix[:, j])
        cost.append(-lp.objective[j])
        owner.append((j, 1.0))
        if lo == -math.inf:
            upper.append(math.inf)
            cols.append(-lp.constraint_matrix[:, j])
            cost.append(lp.objective[j])
            upper.append(math.inf)
            owner.append((j, -1.0))
            if hi != math.inf:
                raise ValueError("free variables with finite upper bounds are unsupported")
        else:
            upper.append(hi)

    n_struct = len(cols)
    slack_rows = [i for i, kind in enumerate(lp.row_kinds) if kind == "le"]
    A = np.zeros((r, n_struct + len(slack_rows)))
    A[:, :n_struct] = np.column_stack(cols)
    for pos, row in enumerate(slack_rows):
        A[row, n_struct + pos] = 1.0
    c = np.array(cost + [0.0] * len(slack_rows))
    u = np.array(upper + [math.inf] * len(slack_rows))

    x_full, y_internal = _simplex_min(A, lp.rhs.copy(), c, u)

    x = np.zeros(n)
    for val, (j, sign) in zip(x_full[:n_struct], owner):
        x[j] += sign * val
    duals = -y_internal
    return x, float(lp.objective @ x), duals


def _simplex_min(A, b, c, upper):
    """minimize c@x st A@x = b, 0 <= x <= upper.  Returns (x, duals)."""
    r, n = A.shape
    flip = b < 0
    A = A.copy()
    A[flip] *= -1.0
    b = np.abs(b)

    # phase 1: artificial basis
    A1 = np.hstack([A, np.eye(r)])
    u1 = np.concatenate([upper, np.full(r, math.inf)])
    c1 = np.concatenate([np.zeros(n), np.ones(r)])
    basis = list(range(n, n + r))
    status = np.full(n + r, _AT_LOWER, dtype=np.int8)
    status[basis] = _BASIC
    allow = np.ones(n + r, dtype=bool)

    _iterate(A1, b, c1, u1, basis, status, allow)
    x1 = _assemble_x(A1, b, u1, basis, status)
    if c1 @ x1 > 1e-7:
        y = _duals(A1, c1, basis, flip)
        raise LpInfeasibleError(certificate=y)

    # phase 2: lock artificials at zero and restore the real objective
    u1[n:] = 0.0
    c2 = np.concatenate([c, np.zeros(r)])
    allow[n:] = False
    _iterate(A1, b, c2, u1, basis, status, allow)

    x = _assemble_x(A1, b, u1, basis, status)
    y = _duals(A1, c2, basis, flip)
    return np.clip(x[:n], 0.0, upper), y


def _assemble_x(A, b, u, basis, status):
    x = np.where(status == _AT_UPPER, u, 0.0)
    x[basis] = 0.0
    rhs = b - A @ x
    x[basis] = np.linalg.solve(A[:, basis], rhs)
    return x


def _duals(A, c, basis, flip):
    y = np.linalg.solve(A[:, basis].T, c[basis])
    return np.where(flip, -y, y)


def _iterate(A, b, c, u, basis, status, allow):
    r, n = A.shape
    bland = False
    stall = 0
    last_obj = math.inf

    for _ in range(_MAX_PIVOTS):
        B = A[:, basis]
        x = _assemble_x(A, b, u, basis, status)
        y = np.linalg.solve(B.T, c[basis])
        red = c - y @ A

        eligible = allow & (status != _BASIC) & (u > 0.0)
        eligible &= ((status == _AT_LOWER) & (red < -LP_PIVOT_TOL)) | (
            (status == _AT_UPPER) & (red > LP_PIVOT_TOL)
        )
        idx = np.nonzero(eligible)[0]
        if idx.size == 0:
            return
        if bland:
            j = int(idx[0])
        else:
            j = int(idx[np.argmax(np.abs(red[idx]))])

        obj = float(c @ x)
        if obj < last_obj - 1e-12:
            stall = 0
            bland = False
        else:
            stall += 1
            if stall >= _STALL_LIMIT:
                bland = True
        last_obj = min(last_obj, obj)

        alpha = np.linalg.solve(B, A[:, j])
        increasing = status[j] == _AT_LOWER
        step = alpha if increasing else -alpha  # basic vars move by -step * theta
        xb = x[basis]
        ub = u[basis]

        to_lower = step > LP_RATIO_TOL
        to_upper = (step < -LP_RATIO_TOL) & np.isfinite(ub)
        ratios = np.full(r, math.inf)
        ratios[to_lower] = xb[to_lower] / step[to_lower]
        ratios[to_upper] = (ub[to_upper] - xb[to_upper]) / -step[to_upper]
        ratios = np.maximum(ratios, 0.0)  # absorb tiny feasibility drift
        theta_basic = float(ratios.min()) if r else math.inf

        if u[j] <= theta_basic + 1e-12:
            if math.isinf(u[j]):
                direction = np.zeros(n)
                direction[j] = 1.0 if increasing else -1.0
                direction[basis] = -step
                raise LpUnboundedError(direction=direction)
            # entering variable flips to its other bound, basis unchanged
            status[j] = _AT_UPPER if increasing else _AT_LOWER
            continue

        # Bland: among the minimal ratios, evict the lowest variable index
        tied = np.nonzero(ratios <= theta_basic + 1e-12)[0]
        leave_pos = int(min(tied, key=lambda i: basis[i]))
        out = basis[leave_pos]
        basis[leave_pos] = j
        status[j] = _BASIC
        status[out] = _AT_LOWER if to_lower[leave_pos] else _AT_UPPER

    raise LpError("pivot limit exceeded")


@dataclass
class EdgeMinSolution:
    """Paired optima of the restricted edge-min LP and its soft-margin dual."""

    d: np.ndarray
    gamma: float
    w: dict[int, float]
    rho: float

    def __post_init__(self):
        if abs(self.gamma - self.rho) > STRONG_DUALITY_TOL:
            raise LpError(
                f"strong duality violated: gamma={self.gamma!r} rho={self.rho!r}"
            )


def solve_edge_min(A: GainMatrix, nu: float) -> EdgeMinSolution:
    """Minimise the worst edge over the capped simplex, restricted to A.

    Returns the distribution minimising ``max_k (d @ A)_k``, the optimal
    value gamma, and the dual hypothesis weights w whose soft-margin
    value rho certifies optimality (|gamma - rho| <= 1e-7).

    Whichever of the two formulations has fewer rows is handed to the
    solver: the edge-min form has t+1 rows (caps live in variable
    bounds), the soft-margin form m+1.
    """
    if A.t < 1:
        raise ValueError("gain matrix has no columns")
    m, t = A.m, A.t
    G = A.as_array()
    cap = 1.0 / nu

    if t <= m:
        # variables (d_1..d_m, g): maximize -g
        # rows: column edges <= g; sum(d) = 1
        con = np.zeros((t + 1, m + 1))
        con[:t, :m] = G.T
        con[:t, m] = -1.0
        con[t, :m] = 1.0
        lp = StandardLp(
            objective=np.concatenate([np.zeros(m), [-1.0]]),
            constraint_matrix=con,
            rhs=np.concatenate([np.zeros(t), [1.0]]),
            row_kinds=["le"] * t + ["eq"],
            variable_bounds=[(0.0, cap)] * m + [(-math.inf, math.inf)],
        )
        x, value, duals = solve_lp(lp)
        d = _cleanup_distribution(x[:m], cap)
        gamma = -value
        w = _cleanup_weights(duals[:t])
        rho, _ = capped_min_linear(G @ _densify(w, t), nu)
    else:
        # variables (w_1..w_t, xi_1..xi_m, r): maximize r - sum(xi)/nu
        # rows: r - xi_i - (G w)_i <= 0; sum(w) = 1
        con = np.zeros((m + 1, t + m + 1))
        con[:m, :t] = -G
        con[:m, t : t + m] = -np.eye(m)
        con[:m, t + m] = 1.0
        con[m, :t] = 1.0
        lp = StandardLp(
            objective=np.concatenate([np.zeros(t), np.full(m, -cap), [1.0]]),
            constraint_matrix=con,
            rhs=np.concatenate([np.zeros(m), [1.0]]),
            row_kinds=["le"] * m + ["eq"],
            variable_bounds=[(0.0, math.inf)] * (t + m) + [(-math.inf, math.inf)],
        )
        x, value, duals = solve_lp(lp)
        rho = value
        w = _cleanup_weights(x[:t])
        d = _cleanup_distribution(duals[:m], cap)
        gamma = float(np.max(d @ G))

    check_distribution(d, nu)
    check_ensemble_weights(w)
    return EdgeMinSolution(d=d, gamma=gamma, w=w, rho=rho)


def _cleanup_distribution(raw: np.ndarray, cap: float) -> np.ndarray:
    if np.any(raw < -DUAL_CLIP):
        raise LpError(f"distribution weight below -{DUAL_CLIP}: {raw.min()}")
    d = np.clip(raw, 0.0, cap)
    total = d.sum()
    if total <= 0.0:
        raise LpError("degenerate zero distribution")
    return d / total


def _cleanup_weights(raw: np.ndarray) -> dict[int, float]:
    if np.any(raw < -DUAL_CLIP):
        raise LpError(f"dual weight below -{DUAL_CLIP}: {raw.min()}")
    clipped = np.where(raw > DUAL_CLIP, raw, 0.0)
    total = clipped.sum()
    if total <= 0.0:
        raise LpError("degenerate zero weight vector")
    return {int(j): float(v / total) for j, v in enumerate(clipped) if v > 0.0}


def _densify(w: dict[int, float], t: int) -> np.ndarray:
    dense = np.zeros(t)
    for j, coeff in w.items():
        dense[j] = coeff
    return dense
