"""
Decision-dependent column-and-constraint generation.

Each iteration solves the master for a lower bound and a schedule, fixes the
first-stage uncertainty at that schedule, asks the oracle for the worst
expected-load corner, updates the upper bound and adds a cut. The loop stops
once the gap closes to ``epsilon``.
"""
from __future__ import annotations

import json
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Tuple

from cosched import naming
from cosched.ddccg.cuts import CutKind, CutPool, add_cuts
from cosched.ddccg.master import build_master
from cosched.ddccg.oracle import DEFAULT_CORNER_CAP, SPResult, evaluate_scenario, solve_sp_oracle
from cosched.ddccg.recourse import WxValues, fixed_link, schedule_yields
from cosched.ddccg.split import ProblemSplit, Scenario, split_problem
from cosched.ddu import DduSpec
from cosched.ddu.idm import record_visits, visits_of, zeta_value
from cosched.errors import InfeasibleInstance, IterationLimitExceeded, NumericalFailure
from cosched.factory.model import (
    CostReport,
    EnergyDispatch,
    FactoryGraph,
    ScheduleDecision,
    UncertaintyRealization,
)
from cosched.factory.simulate import simulate_schedule
from cosched.optkernel import solve
from cosched.optkernel.branch_bound import DEFAULT_BRANCH_AND_BOUND, BranchAndBoundOptions
from cosched.optkernel.model import Status
from cosched.processing.background import BackgroundEvaluator

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DdccgOptions:
    epsilon: float = 1e-4
    max_iters: int = 200
    corners: str = "exact"
    corner_cap: int = DEFAULT_CORNER_CAP
    learn_structure: bool = False
    timing: bool = True
    branch_and_bound: BranchAndBoundOptions = DEFAULT_BRANCH_AND_BOUND
    workers: Optional[int] = None

    def __post_init__(self):
        if not self.epsilon > 0.0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be at least 1, got {self.max_iters}")


def _json_float(value: Optional[float]) -> Optional[float]:
    if value is None or not math.isfinite(value):
        return None
    return float(value)


def centre_scenario(split: ProblemSplit) -> Scenario:
    if split.wy_spec is None:
        return None
    lower, upper = split.fr_bounds()
    return tuple(float(0.5 * (lo + hi)) for lo, hi in zip(lower, upper))


def tighten_wx(split: ProblemSplit, x_star: ScheduleDecision) -> WxValues:
    """
    Fix the worst-case yields and the by-product weights at ``x_star``.

    The theta endpoint is the one giving the larger dispatch value at the
    centre of the load box; equal values keep the lower endpoint. The
    returned values also carry the line-state model with this schedule's
    visits recorded, for drivers that learn the structure online.
    """
    H = split.graph.horizon
    alpha = schedule_yields(split, x_star)
    idm = split.idm
    if idm is None:
        return WxValues(alpha, tuple(1.0 for _ in range(H)), split.zeta_side)

    link = fixed_link(split, x_star, alpha)
    centre = centre_scenario(split)
    value_lo = evaluate_scenario(split, link, centre, "lo").value
    value_hi = evaluate_scenario(split, link, centre, "hi").value
    side = "hi" if value_hi > value_lo else "lo"
    zeta = tuple(zeta_value(idm, h, x_star.active_at(h), side) for h in range(H))
    learned = record_visits(idm, visits_of(idm, H, x_star.active_at))
    return WxValues(alpha, zeta, side, learned)


@dataclass
class IterationRecord:
    k: int
    lb: float
    ub: float
    gap: float
    sp_status: str
    cut_kind: Optional[str]
    elapsed_ms: float
    x_star: List[Tuple[int, str, str]] = field(default_factory=list)
    alpha: List[list] = field(default_factory=list)
    zeta: List[float] = field(default_factory=list)
    sp_value: float = math.nan
    u_star: Optional[List[float]] = None
    heuristic: bool = False

    def to_dict(self) -> Dict[str, object]:
        return {
            "k": self.k,
            "lb": _json_float(self.lb),
            "ub": _json_float(self.ub),
            "gap": _json_float(self.gap),
            "sp_status": self.sp_status,
            "cut_kind": self.cut_kind,
            "elapsed_ms": self.elapsed_ms,
            "x_star": [list(t) for t in self.x_star],
            "alpha": self.alpha,
            "zeta": self.zeta,
            "sp_value": _json_float(self.sp_value),
            "u_star": self.u_star,
            "heuristic": self.heuristic,
        }


@dataclass
class DdccgTrace:
    records: List[IterationRecord] = field(default_factory=list)

    def append(self, record: IterationRecord) -> None:
        self.records.append(record)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def iterations(self) -> int:
        return len(self.records)

    @property
    def lower_bounds(self) -> List[float]:
        return [r.lb for r in self.records]

    @property
    def upper_bounds(self) -> List[float]:
        return [r.ub for r in self.records]

    def jsonl(self) -> List[str]:
        return [json.dumps(r.to_dict(), separators=(",", ":")) for r in self.records]


@dataclass
class CoSchedule:
    schedule: ScheduleDecision
    dispatch_policy: Dict[Tuple[float, ...], EnergyDispatch]
    dispatch: EnergyDispatch
    worst_case: UncertaintyRealization
    objective: float
    lb: float
    ub: float
    report: CostReport
    heuristic: bool = False

    @property
    def gap(self) -> float:
        return self.ub - self.lb

    def to_dict(self) -> Dict[str, object]:
        out = self.report.to_dict()
        out.update(
            {
                "robust_objective": _json_float(self.objective),
                "lb": _json_float(self.lb),
                "ub": _json_float(self.ub),
                "gap": _json_float(self.gap),
                "heuristic": self.heuristic,
                "active": [list(t) for t in self.schedule.triplets()],
                "horizon": self.schedule.horizon,
                "dispatch": self.dispatch.to_dict(),
                "worst_case": self.worst_case.to_dict(),
                "dispatch_policy": [
                    {"scenario": list(s), "dispatch": d.to_dict()} for s, d in sorted(self.dispatch_policy.items())
                ],
            }
        )
        return out

    @classmethod
    def from_dict(cls, doc: Mapping[str, object]) -> "CoSchedule":
        """Rebuild a co-schedule from its ``to_dict`` form."""
        dispatch = EnergyDispatch.from_dict(doc["dispatch"])
        policy = {
            tuple(float(v) for v in item["scenario"]): EnergyDispatch.from_dict(item["dispatch"])
            for item in doc.get("dispatch_policy", [])
        }
        lb = doc.get("lb")
        ub = doc.get("ub")
        return cls(
            schedule=ScheduleDecision.from_triplets(int(doc["horizon"]), doc["active"]),
            dispatch_policy=policy or {(): dispatch},
            dispatch=dispatch,
            worst_case=UncertaintyRealization.from_dict(doc["worst_case"]),
            objective=float(doc.get("robust_objective") if doc.get("robust_objective") is not None else math.nan),
            lb=-math.inf if lb is None else float(lb),
            ub=math.inf if ub is None else float(ub),
            report=CostReport.from_dict(doc),
            heuristic=bool(doc.get("heuristic", False)),
        )


@dataclass
class _Incumbent:
    split: ProblemSplit
    schedule: ScheduleDecision
    wx: WxValues
    sp: SPResult


def _co_schedule(incumbent: _Incumbent, lb: float, ub: float, options: DdccgOptions, evaluator) -> CoSchedule:
    split = incumbent.split
    sp = solve_sp_oracle(
        split,
        incumbent.schedule,
        incumbent.wx,
        options.corners,
        options.corner_cap,
        options.branch_and_bound.simplex,
        evaluator,
        keep_all=True,
    )
    worst = incumbent.wx.realization(sp.u_star)
    report = simulate_schedule(split.graph, incumbent.schedule, sp.y_star, worst)
    policy = sp.per_corner if sp.per_corner else {(): sp.y_star}
    return CoSchedule(
        schedule=incumbent.schedule,
        dispatch_policy=policy,
        dispatch=sp.y_star,
        worst_case=worst,
        objective=ub,
        lb=lb,
        ub=ub,
        report=report,
        heuristic=sp.heuristic,
    )


def run(
    graph: FactoryGraph,
    specs: Iterable[DduSpec] = (),
    options: DdccgOptions = DdccgOptions(),
) -> Tuple[CoSchedule, DdccgTrace]:
    """
    Solve the two-stage robust co-scheduling problem to an ``epsilon`` gap.

    Raises InfeasibleInstance when the master has no feasible schedule and
    IterationLimitExceeded, carrying the best incumbent and the trace, when
    the gap is still open after ``max_iters`` iterations.
    """
    split = split_problem(graph, specs)
    if split.degenerate:
        logger.info("no first-stage uncertainty model: plain column-and-constraint generation")
    pool = CutPool()
    trace = DdccgTrace()
    lb, ub = -math.inf, math.inf
    incumbent: Optional[_Incumbent] = None

    with BackgroundEvaluator(options.workers) as evaluator:
        for k in range(options.max_iters):
            started = time.perf_counter()
            logger.info("--- Iteration %d ---", k)
            master = build_master(split, pool, k)
            solution = solve(master, options.branch_and_bound)
            if solution.status is Status.INFEASIBLE:
                raise InfeasibleInstance(f"master problem infeasible at iteration {k}")
            if not solution.is_optimal:
                raise NumericalFailure(f"master problem returned {solution.status.value} at iteration {k}")

            mp_value = solution.objective_value
            psi = solution.values[naming.PSI]
            lb = max(lb, mp_value)
            x_star = ScheduleDecision.from_values(graph, solution.values)
            wx = tighten_wx(split, x_star)
            sp = solve_sp_oracle(
                split,
                x_star,
                wx,
                options.corners,
                options.corner_cap,
                options.branch_and_bound.simplex,
                evaluator,
            )
            if sp.is_finite:
                candidate = mp_value - psi + sp.value
                if candidate < ub:
                    ub = candidate
                    incumbent = _Incumbent(split, x_star, wx, sp)
                if pool.has_scenario(sp.u_star):
                    logger.debug("iteration %d: worst scenario already cut", k)
            gap = ub - lb
            logger.info("LB = %.6f, UB = %.6f, gap = %.3g", lb, ub, gap)

            cut_kind = None
            if gap > options.epsilon:
                pool = add_cuts(pool, sp, k, split)
                cut_kind = pool.entries[-1].kind.value
                if options.learn_structure and wx.idm is not None:
                    split = split.with_idm(wx.idm)

            elapsed = round((time.perf_counter() - started) * 1000.0, 3) if options.timing else 0
            trace.append(
                IterationRecord(
                    k=k,
                    lb=lb,
                    ub=ub,
                    gap=gap,
                    sp_status=sp.status.value,
                    cut_kind=cut_kind,
                    elapsed_ms=elapsed,
                    x_star=x_star.triplets(),
                    alpha=wx.to_dict()["alpha"],
                    zeta=list(wx.zeta),
                    sp_value=sp.value,
                    u_star=None if sp.u_star is None else list(sp.u_star),
                    heuristic=sp.heuristic,
                )
            )
            if cut_kind is None:
                co = _co_schedule(incumbent, lb, ub, options, evaluator)
                logger.info(
                    "converged after %d iterations: objective %.6f (%d optimality, %d feasibility cuts)",
                    k + 1,
                    co.objective,
                    pool.count(CutKind.OPTIMALITY),
                    pool.count(CutKind.FEASIBILITY),
                )
                return co, trace

        best = None if incumbent is None else _co_schedule(incumbent, lb, ub, options, evaluator)
    raise IterationLimitExceeded(options.max_iters, best, trace)
