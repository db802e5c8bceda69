"""
Sub-problem oracle: the worst expected-load scenario for a fixed schedule.

The inner dispatch LP is linear in the scenario with a convex (piecewise
linear) dependence through the deviation penalty, so its maximum over the
load box is attained at a corner. Corners are enumerated jointly up to a
cap; beyond it one greedy pass picks each hour's endpoint in turn.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from cosched.ddccg.recourse import RecourseLink, WxValues, dispatch_from, fixed_link, recourse_model
from cosched.ddccg.split import ProblemSplit, Scenario, corner_scenarios
from cosched.errors import ModelError, NumericalFailure, OracleFailure
from cosched.factory.model import EnergyDispatch, ScheduleDecision
from cosched.optkernel.model import Status
from cosched.optkernel.simplex import DEFAULT_SIMPLEX, SimplexOptions, solve_lp
from cosched.processing.background import BackgroundEvaluator, argmax_first, background_evaluator

logger = logging.getLogger(__name__)

CORNER_MODES = ("exact", "greedy")
DEFAULT_CORNER_CAP = 4096


@dataclass
class ScenarioValue:
    scenario: Scenario
    value: float
    status: Status
    values: Dict[str, float] = field(default_factory=dict)


@dataclass
class SPResult:
    value: float
    u_star: Scenario
    y_star: Optional[EnergyDispatch]
    status: Status
    side: str = "lo"
    corners_evaluated: int = 0
    heuristic: bool = False
    per_corner: Dict[Tuple[float, ...], EnergyDispatch] = field(default_factory=dict)

    @property
    def is_finite(self) -> bool:
        return self.status is Status.OPTIMAL and math.isfinite(self.value)


def evaluate_scenario(
    split: ProblemSplit,
    link: RecourseLink,
    scenario: Scenario,
    side: Optional[str] = None,
    options: SimplexOptions = DEFAULT_SIMPLEX,
) -> ScenarioValue:
    """Solve the dispatch LP for one scenario; an infeasible dispatch is worth +inf."""
    model = recourse_model(split, link, scenario, side)
    try:
        solution = solve_lp(model, options)
    except (NumericalFailure, ModelError) as e:
        raise OracleFailure(f"dispatch LP failed at scenario {scenario}: {e}") from e
    if solution.status is Status.INFEASIBLE:
        return ScenarioValue(scenario, math.inf, Status.INFEASIBLE)
    if solution.status is Status.UNBOUNDED:
        raise OracleFailure(f"dispatch LP unbounded at scenario {scenario}")
    return ScenarioValue(scenario, solution.objective_value, Status.OPTIMAL, solution.values)


def _worst(results: List[ScenarioValue]) -> ScenarioValue:
    for r in results:
        if r.status is Status.INFEASIBLE:
            return r
    return results[argmax_first([r.value for r in results])]


def _greedy(split: ProblemSplit, link: RecourseLink, side: str, options: SimplexOptions, evaluator) -> Tuple[ScenarioValue, List[ScenarioValue]]:
    vertices = split.hour_vertices
    current = [values[0] for values in vertices]
    seen: List[ScenarioValue] = []
    best = None
    for h, values in enumerate(vertices):
        trials = []
        for v in values:
            candidate = list(current)
            candidate[h] = v
            trials.append(tuple(candidate))
        results = evaluator.map(lambda s: evaluate_scenario(split, link, s, side, options), trials)
        seen += results
        best = _worst(results)
        if best.status is Status.INFEASIBLE:
            return best, seen
        current = list(best.scenario)
    return best, seen


def solve_sp_oracle(
    split: ProblemSplit,
    x_star: ScheduleDecision,
    wx_values: WxValues,
    corners: str = "exact",
    corner_cap: int = DEFAULT_CORNER_CAP,
    options: SimplexOptions = DEFAULT_SIMPLEX,
    evaluator: Optional[BackgroundEvaluator] = None,
    keep_all: bool = False,
) -> SPResult:
    """
    Worst case over the expected-load corners of the best dispatch for the
    fixed schedule and fixed first-stage uncertainty. Ties between corners go
    to the lowest lexicographic corner index.
    """
    if corners not in CORNER_MODES:
        raise OracleFailure(f"unknown corner mode {corners!r}")
    evaluator = evaluator or background_evaluator
    link = fixed_link(split, x_star, wx_values.alpha)
    side = wx_values.side
    n_corners = split.n_corners()
    heuristic = split.wy_spec is not None and (corners == "greedy" or n_corners > corner_cap)
    if heuristic:
        if corners == "exact":
            logger.warning("%d load corners exceed the cap of %d, using the greedy corner search", n_corners, corner_cap)
        worst, seen = _greedy(split, link, side, options, evaluator)
    else:
        seen = evaluator.map(lambda s: evaluate_scenario(split, link, s, side, options), corner_scenarios(split))
        worst = _worst(seen)

    per_corner: Dict[Tuple[float, ...], EnergyDispatch] = {}
    if keep_all:
        for r in seen:
            if r.status is Status.OPTIMAL and r.scenario is not None:
                per_corner[tuple(r.scenario)] = dispatch_from(split, r.values)
    y_star = dispatch_from(split, worst.values) if worst.status is Status.OPTIMAL else None
    logger.debug("oracle: %d scenarios, worst value %.6f", len(seen), worst.value)
    return SPResult(
        value=worst.value,
        u_star=worst.scenario,
        y_star=y_star,
        status=worst.status,
        side=side,
        corners_evaluated=len(seen),
        heuristic=heuristic,
        per_corner=per_corner,
    )
