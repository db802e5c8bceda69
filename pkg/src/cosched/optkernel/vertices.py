"""
Extreme points of small bounded polytopes ``{x : A x <= b, A_eq x = b_eq}``.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from cosched.errors import ModelError, UnboundedSet
from cosched.optkernel.model import LinearExpr, OptModel, Sense, Status, VarKind
from cosched.optkernel.simplex import solve_lp

logger = logging.getLogger(__name__)

MAX_DIMENSION = 8


@dataclass(frozen=True)
class Polytope:
    A: np.ndarray
    b: np.ndarray
    A_eq: Optional[np.ndarray] = None
    b_eq: Optional[np.ndarray] = None

    @classmethod
    def box(cls, lower: Sequence[float], upper: Sequence[float]) -> "Polytope":
        lower = np.asarray(lower, dtype=float)
        upper = np.asarray(upper, dtype=float)
        eye = np.eye(len(lower))
        return cls(np.vstack([eye, -eye]), np.concatenate([upper, -lower]))

    @property
    def dim(self) -> int:
        return self.A.shape[1]

    def contains(self, x: np.ndarray, tol: float = 1e-8) -> bool:
        if np.any(self.A @ x > self.b + tol * (1.0 + np.abs(self.b))):
            return False
        if self.A_eq is not None and np.any(np.abs(self.A_eq @ x - self.b_eq) > tol * (1.0 + np.abs(self.b_eq))):
            return False
        return True

    def to_model(self) -> OptModel:
        model = OptModel("polytope")
        xs = [model.add_var(f"x[{i}]", VarKind.FREE) for i in range(self.dim)]
        for i, (row, rhs) in enumerate(zip(self.A, self.b)):
            model.add_constraint(LinearExpr.total(coef * x for coef, x in zip(row, xs)).le(rhs, name=f"ineq[{i}]"))
        if self.A_eq is not None:
            for i, (row, rhs) in enumerate(zip(self.A_eq, self.b_eq)):
                model.add_constraint(LinearExpr.total(coef * x for coef, x in zip(row, xs)).eq(rhs, name=f"eq[{i}]"))
        return model


def _bounded_and_nonempty(polytope: Polytope) -> bool:
    base = polytope.to_model()
    for i in range(polytope.dim):
        for sense in (Sense.MIN, Sense.MAX):
            model = base.copy()
            model.set_objective(LinearExpr.var(f"x[{i}]"), sense)
            solution = solve_lp(model)
            if solution.status is Status.INFEASIBLE:
                return False
            if solution.status is Status.UNBOUNDED:
                raise UnboundedSet(f"coordinate {i} is unbounded ({sense.value})")
    return True


def enumerate_extreme_points(polytope: Polytope, tol: float = 1e-8) -> List[np.ndarray]:
    """
    All vertices of a bounded polytope, deduplicated and sorted lexicographically.

    Every choice of active inequality rows that, together with the equalities,
    pins down a unique point is solved and kept when the point is feasible.
    An empty polytope yields an empty list.
    """
    d = polytope.dim
    if d > MAX_DIMENSION:
        raise ModelError(f"vertex enumeration supports at most {MAX_DIMENSION} dimensions, got {d}")
    if d == 0 or not _bounded_and_nonempty(polytope):
        return []

    eq = polytope.A_eq if polytope.A_eq is not None else np.zeros((0, d))
    b_eq = polytope.b_eq if polytope.b_eq is not None else np.zeros(0)
    rank_eq = np.linalg.matrix_rank(eq) if eq.shape[0] else 0
    needed = d - rank_eq

    found: List[np.ndarray] = []
    for active in itertools.combinations(range(polytope.A.shape[0]), needed):
        M = np.vstack([eq, polytope.A[list(active)]])
        rhs = np.concatenate([b_eq, polytope.b[list(active)]])
        if np.linalg.matrix_rank(M) < d:
            continue
        x, *_ = np.linalg.lstsq(M, rhs, rcond=None)
        if np.max(np.abs(M @ x - rhs), initial=0.0) > 1e-9 * (1.0 + np.max(np.abs(rhs), initial=0.0)):
            continue
        if not polytope.contains(x, tol):
            continue
        if any(np.max(np.abs(x - v)) <= tol for v in found):
            continue
        found.append(x)

    found.sort(key=tuple)
    logger.debug("enumerated %d vertices in dimension %d", len(found), d)
    return found
