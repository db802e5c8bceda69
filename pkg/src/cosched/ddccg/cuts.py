"""
Cut pool of the decomposition loop.

Each entry carries its own copy of the recourse variables (suffix ``@l``)
instantiated at the worst-case scenario of iteration ``l``. Optimality
entries also bound ``psi`` from below; feasibility entries only require a
feasible dispatch for that scenario.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple

from cosched import naming
from cosched.ddccg.recourse import master_link, recourse_blocks, recourse_cost
from cosched.ddccg.split import ProblemSplit, Scenario
from cosched.optkernel.model import Constraint, ConstraintBlock, LinearExpr

logger = logging.getLogger(__name__)

SCENARIO_TOL = 1e-9


class CutKind(str, Enum):
    FEASIBILITY = "Feasibility"
    OPTIMALITY = "Optimality"


@dataclass(frozen=True)
class CutEntry:
    kind: CutKind
    iteration: int
    copy: int
    scenario: Scenario
    rows: Tuple[ConstraintBlock, ...] = ()
    psi_row: Optional[Constraint] = None

    @property
    def recourse_copies(self) -> Tuple[str, ...]:
        names = []
        for block in self.rows:
            names += [var.name for var in block.variables if var.name.endswith(f"@{self.copy}")]
        return tuple(names)


@dataclass(frozen=True)
class CutPool:
    entries: Tuple[CutEntry, ...] = field(default_factory=tuple)

    def __len__(self) -> int:
        return len(self.entries)

    def add(self, entry: CutEntry) -> "CutPool":
        return CutPool(self.entries + (entry,))

    @property
    def optimality_set(self) -> List[int]:
        """Copies that bound psi (the index set of optimality cuts)."""
        return [e.copy for e in self.entries if e.kind is CutKind.OPTIMALITY]

    def count(self, kind: CutKind) -> int:
        return sum(1 for e in self.entries if e.kind is kind)

    def has_scenario(self, scenario: Scenario, tol: float = SCENARIO_TOL) -> bool:
        for entry in self.entries:
            if entry.kind is not CutKind.OPTIMALITY:
                continue
            if entry.scenario is None or scenario is None:
                if entry.scenario is scenario:
                    return True
                continue
            if all(abs(a - b) <= tol for a, b in zip(entry.scenario, scenario)):
                return True
        return False


def cut_entry(split: ProblemSplit, kind: CutKind, iteration: int, scenario: Scenario, side: Optional[str] = None) -> CutEntry:
    copy = iteration + 1
    link = master_link(split)
    blocks = recourse_blocks(split, link, scenario, copy)
    psi_row = None
    if kind is CutKind.OPTIMALITY:
        value = recourse_cost(split, link, scenario is not None, copy, side)
        psi_row = LinearExpr.var(naming.PSI).ge(value, name=f"psi_cut@{copy}")
    return CutEntry(kind, iteration, copy, scenario, tuple(blocks), psi_row)


def add_cuts(pool: CutPool, sp_result, k: int, split: ProblemSplit) -> CutPool:
    """
    Append the cut for iteration ``k``: an optimality cut with fresh recourse
    copies when the sub-problem is finite, otherwise a feasibility cut.
    """
    kind = CutKind.OPTIMALITY if sp_result.is_finite else CutKind.FEASIBILITY
    entry = cut_entry(split, kind, k, sp_result.u_star, sp_result.side)
    logger.debug("iteration %d: %s cut with copy @%d", k, kind.value, entry.copy)
    return pool.add(entry)

