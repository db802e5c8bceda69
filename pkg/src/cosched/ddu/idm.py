"""
Imprecise Dirichlet model of the production-line states.

Each state is a combination of options running together; its probability is
bounded by Beta-quantile confidence bands built from historical and
real-time visit counts. The by-product propensity of an hour is the
ratio-weighted sum of the probabilities of the states the schedule visits.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from cosched import naming
from cosched.ddu.special import inv_reg_inc_beta
from cosched.ddu.yield_ambiguity import OptionKey, and_linearize
from cosched.errors import DomainError
from cosched.optkernel.model import ConstraintBlock, LinearExpr

logger = logging.getLogger(__name__)

Counts = Tuple[Tuple[float, ...], ...]


@dataclass(frozen=True)
class LineState:
    id: str
    members: Tuple[OptionKey, ...]


@dataclass(frozen=True)
class ThetaInterval:
    lo: float
    hi: float
    expect_lo: float = 0.0
    expect_hi: float = 1.0

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, value: float, tol: float = 1e-12) -> bool:
        return self.lo - tol <= value <= self.hi + tol


@dataclass(frozen=True)
class ProductStructureIdm:
    """
    IDM over the line states. Counts are indexed ``[hour][state]``; a hour
    missing from the tables has no observations.
    """

    states: Tuple[LineState, ...]
    ratios: Tuple[float, ...]
    hist_counts: Counts = ()
    rt_counts: Counts = ()
    s: float = 1.0
    gamma: float = 0.95
    priors: Tuple[float, ...] = ()
    ratio_threshold: float = 0.0
    coupled_to: Tuple[str, ...] = ("I",)

    def __post_init__(self):
        k = len(self.states)
        if len(self.ratios) != k:
            raise DomainError(f"{len(self.ratios)} ratios for {k} states")
        if any(not 0.0 <= w <= 1.0 for w in self.ratios):
            raise DomainError("state ratios must lie in [0, 1]")
        for table in (self.hist_counts, self.rt_counts):
            for row in table:
                if len(row) != k or any(c < 0 for c in row):
                    raise DomainError("counts must be nonnegative with one entry per state")
        if self.s <= 0.0:
            raise DomainError(f"equivalent sample size must be positive, got {self.s}")
        if not 0.0 < self.gamma < 1.0:
            raise DomainError(f"confidence must lie in (0, 1), got {self.gamma}")
        priors = (self.priors or tuple(1.0 / k for _ in range(k))) if k else ()
        if priors and abs(sum(priors) - 1.0) > 1e-12:
            raise DomainError(f"priors must sum to 1, got {sum(priors)}")
        object.__setattr__(self, "priors", tuple(priors))

    def count(self, hour: int, state_index: int) -> float:
        hist = self.hist_counts[hour][state_index] if hour < len(self.hist_counts) else 0.0
        rt = self.rt_counts[hour][state_index] if hour < len(self.rt_counts) else 0.0
        return float(hist + rt)

    def total(self, hour: int) -> float:
        return sum(self.count(hour, i) for i in range(len(self.states)))

    def weighted(self) -> List[int]:
        """Indices of states whose by-product ratio exceeds the threshold."""
        return [i for i, w in enumerate(self.ratios) if w > self.ratio_threshold]

    def index_of(self, state_id: str) -> int:
        for i, state in enumerate(self.states):
            if state.id == state_id:
                return i
        raise DomainError(f"unknown line state {state_id!r}")


def idm_interval(spec: ProductStructureIdm, state_index: int, hour: int = 0) -> ThetaInterval:
    n_i = spec.count(hour, state_index)
    total = spec.total(hour)
    s = spec.s
    if total == 0.0:
        return ThetaInterval(0.0, 1.0, 0.0, 1.0)
    expect_lo = n_i / (s + total)
    expect_hi = (n_i + s) / (s + total)
    lower_q = 0.5 * (1.0 - spec.gamma)
    upper_q = 0.5 * (1.0 + spec.gamma)
    lo = 0.0 if n_i == 0.0 else inv_reg_inc_beta(n_i, s + total - n_i, lower_q)
    hi = 1.0 if n_i == total else inv_reg_inc_beta(n_i + s, total - n_i, upper_q)
    return ThetaInterval(lo, hi, expect_lo, expect_hi)


def theta_value(spec: ProductStructureIdm, state_index: int, hour: int, side: str) -> float:
    interval = idm_interval(spec, state_index, hour)
    return interval.lo if side == "lo" else interval.hi


def state_visited(state: LineState, active: Callable[[OptionKey], bool]) -> bool:
    return all(active(member) for member in state.members)


def zeta_value(
    spec: Optional[ProductStructureIdm],
    hour: int,
    active: Callable[[OptionKey], bool],
    side: str = "lo",
) -> float:
    """By-product propensity at ``hour`` with every theta at the ``side`` endpoint."""
    if spec is None:
        return 1.0
    return sum(
        spec.ratios[i] * theta_value(spec, i, hour, side)
        for i in spec.weighted()
        if state_visited(spec.states[i], active)
    )


def zeta_bounds(spec: ProductStructureIdm, hour: int, selected: Iterable[int]) -> Tuple[float, float]:
    lo = hi = 0.0
    for i in selected:
        interval = idm_interval(spec, i, hour)
        lo += spec.ratios[i] * interval.lo
        hi += spec.ratios[i] * interval.hi
    return lo, hi


def zeta_rows(spec: ProductStructureIdm, selected: Mapping[int, Sequence[int]]) -> ConstraintBlock:
    """
    ``zeta[h] = sum(w_i * theta[h, i])`` over the selected states of each
    hour, with each theta boxed by its confidence band.
    """
    block = ConstraintBlock("22a")
    for hour in sorted(selected):
        z = block.declare(naming.zeta(hour), lb=0.0, ub=1.0)
        weighted = LinearExpr()
        for i in selected[hour]:
            state = spec.states[i]
            interval = idm_interval(spec, i, hour)
            theta = block.declare(naming.theta(hour, state.id), lb=0.0, ub=1.0)
            block.add(theta.ge(interval.lo, name=f"theta_lo[{hour},{state.id}]"))
            block.add(theta.le(interval.hi, name=f"theta_hi[{hour},{state.id}]"))
            weighted = weighted + theta * spec.ratios[i]
        block.add(z.eq(weighted, name=f"zeta_def[{hour}]"))
    return block


def state_indicator_rows(spec: ProductStructureIdm, hour: int) -> ConstraintBlock:
    """Conjunction rows making ``s[h, state]`` equal 1 exactly when the state runs."""
    block = ConstraintBlock("22b")
    for i in spec.weighted():
        state = spec.states[i]
        block.extend(and_linearize([naming.I(hour, n, p) for n, p in state.members], naming.state_aux(hour, state.id)))
    return block


def record_visits(spec: ProductStructureIdm, visits: Mapping[int, Iterable[int]]) -> ProductStructureIdm:
    """Return a copy whose real-time counts include one visit per (hour, state) listed."""
    horizon = max([len(spec.rt_counts), len(spec.hist_counts)] + [h + 1 for h in visits])
    k = len(spec.states)
    table: List[List[float]] = [
        list(spec.rt_counts[h]) if h < len(spec.rt_counts) else [0.0] * k for h in range(horizon)
    ]
    for hour, states in visits.items():
        for i in states:
            table[hour][i] += 1.0
    return replace(spec, rt_counts=tuple(tuple(row) for row in table))


def visits_of(spec: ProductStructureIdm, horizon: int, active_at: Callable[[int], Callable[[OptionKey], bool]]) -> Dict[int, List[int]]:
    """States visited by a schedule, hour by hour."""
    visits: Dict[int, List[int]] = {}
    for hour in range(horizon):
        active = active_at(hour)
        hit = [i for i, state in enumerate(spec.states) if state_visited(state, active)]
        if hit:
            visits[hour] = hit
    return visits
