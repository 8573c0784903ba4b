"""Booster loops: the generic two-rule scheme and the LP baselines.

``run_scheme`` is the shared column-generation loop: per round it
projects onto the capped simplex, queries the weak learner, checks the
certified optimality gap, then keeps the better of a conditional
gradient update and an optional secondary update.  ``run_lpboost`` is
the classic fully-LP baseline with its own stopping rule, and
``run_erlpboost`` is the scheme with the fully corrective secondary.
"""

from __future__ import annotations

import dataclasses
import logging
import math
import time
from dataclasses import dataclass

import numpy as np

from .core import (
    CapParams,
    Dataset,
    GainMatrix,
    check_ensemble_weights,
    margins,
)
from .entropy import capped_entropy_projection, capped_min_linear, smoothed_conjugate
from .fw import FwStepOutcome, classic_step, line_search_step, pairwise_step, short_step
from .lp import solve_edge_min
from .stumps import StumpPool, best_stump, pool_oracle

logger = logging.getLogger(__name__)

FW_RULES = ("classic", "short_step", "line_search", "pairwise")
SECONDARY_RULES = ("none", "lpboost", "erlpboost")

_ERLP_INNER_CAP = 10_000


@dataclass(frozen=True)
class BoosterConfig:
    eps: float
    nu: float
    fw_rule: str = "short_step"
    secondary: object = "none"  # name from SECONDARY_RULES or callable(A, params)
    max_iterations: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.eps <= 0.0:
            raise ValueError("eps must be positive")
        if self.fw_rule not in FW_RULES:
            raise ValueError(f"unknown fw rule {self.fw_rule!r}")
        if not callable(self.secondary) and self.secondary not in SECONDARY_RULES:
            raise ValueError(f"unknown secondary rule {self.secondary!r}")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")


@dataclass(frozen=True)
class IterationRecord:
    t: int
    edge_new: float
    min_edge_so_far: float
    smoothed_obj: float
    soft_margin_obj: float
    eps_t: float
    chosen_rule: str  # "fw" or "secondary"
    step_size: float
    good_step: bool
    wall_time_ns: int


@dataclass(frozen=True)
class TrainedModel:
    hypotheses: list
    weights: list[float]
    config: BoosterConfig
    soft_margin_obj: float
    smoothed_obj: float
    converged: bool


class StumpLearner:
    """Max-edge responses over the stump pool of a dataset."""

    def __init__(self, data: Dataset, pool: StumpPool | None = None):
        self.data = data
        self.pool = pool if pool is not None else StumpPool.build(data)

    @property
    def m(self) -> int:
        return self.data.m

    def query(self, d: np.ndarray):
        stump, edge, column = best_stump(self.data, d, self.pool)
        return stump, stump, column, edge


class PoolOracleLearner:
    """Max-edge responses over a fully materialised gain matrix."""

    def __init__(self, A_full: GainMatrix):
        self.A_full = A_full

    @property
    def m(self) -> int:
        return self.A_full.m

    def query(self, d: np.ndarray):
        j = pool_oracle(self.A_full, d)
        column = self.A_full.columns[j]
        return j, self.A_full.hypothesis_ids[j], column, float(d @ column)


def default_iteration_cap(m: int, nu: float, eps: float) -> int:
    """Theoretical round bound ceil(32 * ln(m/nu) / eps^2) plus slack."""
    return math.ceil(32.0 * math.log(m / nu) / eps**2) + 16


def run_scheme(data, learner, config: BoosterConfig):
    """Generic booster: certified stopping, FW rule vs secondary rule.

    Per round: distribution by entropy projection of the margins, weak
    learner query, gap eps_t = min running edge + smoothed objective,
    stop at eps_t <= eps/2, otherwise keep whichever of the FW and
    secondary candidates has the smaller smoothed objective (ties stay
    with FW).  With secondary "none" and the short-step rule this is
    the plain corrective booster.
    """
    m = learner.m
    params = CapParams.from_tolerance(m, config.nu, config.eps)
    cap_rounds = (
        config.max_iterations
        if config.max_iterations is not None
        else default_iteration_cap(m, config.nu, config.eps)
    )

    d0 = np.full(m, 1.0 / m)
    hyp_id, hypothesis, column, edge0 = learner.query(d0)
    A = GainMatrix([column], [hyp_id])
    hypotheses = {hyp_id: hypothesis}
    w: dict[int, float] = {0: 1.0}
    min_edge = edge0
    records: list[IterationRecord] = []
    converged = False

    for t in range(1, cap_rounds + 1):
        tic = time.perf_counter_ns()
        marg = margins(A, w)
        proj = capped_entropy_projection(marg, params)
        d = proj.d
        smoothed_obj = -proj.objective
        soft_margin_obj, _ = capped_min_linear(marg, config.nu)

        hyp_id, hypothesis, column, edge_new = learner.query(d)
        A, j_new = A.with_column(column, hyp_id)
        hypotheses.setdefault(hyp_id, hypothesis)
        min_edge = min(min_edge, edge_new)
        eps_t = min_edge + smoothed_obj

        if eps_t <= config.eps / 2.0:
            converged = True
            records.append(
                IterationRecord(
                    t, edge_new, min_edge, smoothed_obj, soft_margin_obj, eps_t,
                    "fw", 0.0, False, time.perf_counter_ns() - tic,
                )
            )
            break

        fw_out = _fw_update(config.fw_rule, A, w, j_new, d, params, t)
        chosen_rule = "fw"
        w = fw_out.new_w
        # the FW candidate doubles as the warm start for a corrective solve
        secondary_w = _secondary_update(config.secondary, A, params, config.nu, fw_out.new_w)
        if secondary_w is not None:
            value_fw = smoothed_conjugate(-margins(A, fw_out.new_w), params)
            value_secondary = smoothed_conjugate(-margins(A, secondary_w), params)
            if value_secondary < value_fw:
                chosen_rule = "secondary"
                w = secondary_w

        records.append(
            IterationRecord(
                t, edge_new, min_edge, smoothed_obj, soft_margin_obj, eps_t,
                chosen_rule, fw_out.step_size, fw_out.good_step,
                time.perf_counter_ns() - tic,
            )
        )

    model = _finish_model(A, w, hypotheses, config, converged)
    if not converged:
        logger.warning("booster hit the iteration cap (%d rounds)", cap_rounds)
    return model, records


def _fw_update(rule, A, w, j_new, d, params, t) -> FwStepOutcome:
    if rule == "classic":
        return classic_step(t, w, j_new)
    if rule == "short_step":
        return short_step(A, w, j_new, d, params.eta)
    if rule == "line_search":
        return line_search_step(A, w, j_new, params)
    return pairwise_step(A, w, j_new, d, params)


def _secondary_update(secondary, A, params, nu, current_w):
    if secondary == "none":
        return None
    if secondary == "lpboost":
        return secondary_lpboost(A, nu)
    if secondary == "erlpboost":
        return secondary_erlpboost(A, params, start=current_w)
    return check_ensemble_weights(secondary(A, params))


def secondary_lpboost(A: GainMatrix, nu: float) -> dict[int, float]:
    """Optimal restricted soft-margin weights from the edge-min LP dual."""
    return solve_edge_min(A, nu).w


def secondary_erlpboost(
    A: GainMatrix,
    params: CapParams,
    start: dict[int, float] | None = None,
    gap_tol: float | None = None,
) -> dict[int, float]:
    """Fully corrective weights over the discovered columns.

    Minimises the smoothed objective over the restricted simplex by
    pairwise conditional-gradient iterations until the linearised gap
    drops below eps/10 (the optional warm start does not change the
    guarantee).  Hitting the inner cap logs a warning and returns the
    current iterate.
    """
    if A.t < 1:
        raise ValueError("gain matrix has no columns")
    tol = params.eps / 10.0 if gap_tol is None else gap_tol
    w = dict(start) if start else {0: 1.0}
    G = A.as_array()

    for _ in range(_ERLP_INNER_CAP):
        proj = capped_entropy_projection(margins(A, w), params)
        d = proj.d
        col_edges = d @ G
        j_best = int(np.argmax(col_edges))
        gap = float(col_edges[j_best]) - sum(
            coeff * col_edges[j] for j, coeff in w.items()
        )
        if gap <= tol:
            return w
        w = pairwise_step(A, w, j_best, d, params).new_w
    logger.warning("fully corrective inner solve hit its %d-step cap", _ERLP_INNER_CAP)
    return w


def run_lpboost(data, learner, config: BoosterConfig):
    """Column-generation LP booster.

    Every round re-solves the restricted edge-min LP; the distribution
    is its primal optimum and the returned ensemble its dual.  Stops
    once the freshly queried hypothesis cannot beat the restricted
    value by more than eps.
    """
    m = learner.m
    params = CapParams.from_tolerance(m, config.nu, config.eps)
    cap_rounds = (
        config.max_iterations
        if config.max_iterations is not None
        else default_iteration_cap(m, config.nu, config.eps)
    )

    d0 = np.full(m, 1.0 / m)
    hyp_id, hypothesis, column, edge0 = learner.query(d0)
    A = GainMatrix([column], [hyp_id])
    hypotheses = {hyp_id: hypothesis}
    min_edge = edge0
    w: dict[int, float] = {0: 1.0}
    records: list[IterationRecord] = []
    converged = False

    for t in range(1, cap_rounds + 1):
        tic = time.perf_counter_ns()
        sol = solve_edge_min(A, config.nu)
        w = sol.w
        hyp_id, hypothesis, column, edge_new = learner.query(sol.d)
        min_edge = min(min_edge, edge_new)
        smoothed_obj = smoothed_conjugate(-margins(A, w), params)
        records.append(
            IterationRecord(
                t, edge_new, min_edge, smoothed_obj, sol.rho,
                min_edge + smoothed_obj, "secondary", 0.0, False,
                time.perf_counter_ns() - tic,
            )
        )
        if edge_new <= sol.gamma + config.eps:
            converged = True
            break
        A, _ = A.with_column(column, hyp_id)
        hypotheses.setdefault(hyp_id, hypothesis)

    model = _finish_model(A, w, hypotheses, config, converged)
    if not converged:
        logger.warning("LP booster hit the iteration cap (%d rounds)", cap_rounds)
    return model, records


def run_erlpboost(data, learner, config: BoosterConfig):
    """Entropy-regularised fully corrective booster (scheme instance)."""
    return run_scheme(data, learner, dataclasses.replace(config, secondary="erlpboost"))


def _finish_model(A, w, hypotheses, config, converged) -> TrainedModel:
    check_ensemble_weights(w)
    marg = margins(A, w)
    params = CapParams.from_tolerance(len(marg), config.nu, config.eps)
    soft_margin_obj, _ = capped_min_linear(marg, config.nu)
    support = sorted(w)
    return TrainedModel(
        hypotheses=[hypotheses[A.hypothesis_ids[j]] for j in support],
        weights=[w[j] for j in support],
        config=config,
        soft_margin_obj=soft_margin_obj,
        smoothed_obj=smoothed_conjugate(-marg, params),
        converged=converged,
    )


def predict(model: TrainedModel, features: np.ndarray) -> np.ndarray:
    """Sign of the weighted hypothesis vote; exact ties go to +1."""
    features = np.atleast_2d(np.asarray(features, dtype=float))
    width = features.shape[1]
    needed = max(h.feature for h in model.hypotheses) + 1
    if width < needed:
        raise ValueError(f"model needs {needed} features, data has {width}")
    score = np.zeros(features.shape[0])
    for coeff, hyp in zip(model.weights, model.hypotheses):
        score += coeff * hyp.predict(features)
    return np.where(score >= 0.0, 1.0, -1.0)
