"""
Exhaustive min-max-min oracle for small instances: every schedule, every
load corner, one dispatch LP each.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import Dict, Iterable, Optional

import numpy as np

from cosched.ddccg.driver import tighten_wx
from cosched.ddccg.oracle import SPResult, solve_sp_oracle
from cosched.ddccg.recourse import WxValues, schedule_yields
from cosched.ddccg.split import ProblemSplit, split_problem
from cosched.ddu import DduSpec
from cosched.errors import InfeasibleInstance, InfeasibleSchedule, TooLargeForOracle
from cosched.factory.model import FEASIBILITY_TOL, FactoryGraph, ScheduleDecision, derive_profile

logger = logging.getLogger(__name__)

DEFAULT_MAX_BINARIES = 16


def _yield_fn(split: ProblemSplit, schedule: ScheduleDecision):
    alpha = schedule_yields(split, schedule)
    return lambda h, key: float(alpha.get((h, key[0], key[1]), 1.0))


def first_stage_feasible(split: ProblemSplit, schedule: ScheduleDecision) -> bool:
    """Whether ``schedule`` satisfies the master's plant rows at its worst-case yields."""
    graph = split.graph
    try:
        schedule.check(graph)
    except InfeasibleSchedule:
        return False
    profile = derive_profile(graph, schedule, _yield_fn(split, schedule))
    return all(float(np.min(level[1:])) >= -FEASIBILITY_TOL for level in profile.stocks.values())


def first_stage_cost(split: ProblemSplit, schedule: ScheduleDecision) -> float:
    graph = split.graph
    profile = derive_profile(graph, schedule, _yield_fn(split, schedule))
    return float(graph.time_cost_rate * profile.transport_time.sum())


def all_schedules(graph: FactoryGraph) -> Iterable[ScheduleDecision]:
    """Every assignment of at most one option per workshop and hour."""
    slots = [(h, ws) for h in range(graph.horizon) for ws in graph.workshops]
    choices = [[None] + [opt.id for opt in ws.options] for _, ws in slots]
    for pick in itertools.product(*choices):
        active = [(h, ws.id, p) for (h, ws), p in zip(slots, pick) if p is not None]
        yield ScheduleDecision.from_triplets(graph.horizon, active)


@dataclass
class OracleResult:
    value: float
    schedule: ScheduleDecision
    first_stage: float
    worst: SPResult
    wx: WxValues
    evaluated: int
    feasible: int

    def to_dict(self) -> Dict[str, object]:
        return {
            "value": self.value,
            "first_stage_cost": self.first_stage,
            "recourse_value": self.worst.value,
            "active": [list(t) for t in self.schedule.triplets()],
            "horizon": self.schedule.horizon,
            "u_star": None if self.worst.u_star is None else list(self.worst.u_star),
            "zeta": list(self.wx.zeta),
            "schedules_evaluated": self.evaluated,
            "schedules_feasible": self.feasible,
        }


def brute_force_oracle(
    graph: FactoryGraph,
    specs: Iterable[DduSpec] = (),
    max_binaries: int = DEFAULT_MAX_BINARIES,
    corners: str = "exact",
) -> OracleResult:
    """
    Minimum over every feasible schedule of its first-stage cost plus the
    worst-case dispatch value. Ties keep the first schedule in enumeration
    order.
    """
    if graph.n_binaries > max_binaries:
        raise TooLargeForOracle(f"{graph.n_binaries} first-stage binaries exceed the oracle limit of {max_binaries}")
    split = split_problem(graph, specs)
    best: Optional[OracleResult] = None
    evaluated = feasible = 0
    for schedule in all_schedules(graph):
        evaluated += 1
        if not first_stage_feasible(split, schedule):
            continue
        wx = tighten_wx(split, schedule)
        sp = solve_sp_oracle(split, schedule, wx, corners)
        if not sp.is_finite:
            continue
        feasible += 1
        cost = first_stage_cost(split, schedule)
        value = cost + sp.value
        if best is None or value < best.value - 1e-12:
            best = OracleResult(value, schedule, cost, sp, wx, 0, 0)
    if best is None:
        raise InfeasibleInstance("no schedule admits a feasible dispatch under every load corner")
    best.evaluated, best.feasible = evaluated, feasible
    logger.info("oracle: %d schedules, %d feasible, optimum %.6f", evaluated, feasible, best.value)
    return best
