"""
Dense two-phase tableau simplex.

Variables with general bounds are moved to the nonnegative orthant (shift,
mirror or split) and finite upper bounds become explicit rows. Entering
columns follow Dantzig's rule until ``bland_after`` pivots, then Bland's rule;
leaving-row ties always go to the smallest basis index.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from cosched.errors import ModelError, NumericalFailure
from cosched.optkernel.model import (
    DEFAULT_TOLERANCES,
    ModelArrays,
    OptModel,
    OptSolution,
    Relation,
    Sense,
    Status,
    Tolerances,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SimplexOptions:
    tolerances: Tolerances = DEFAULT_TOLERANCES
    pivot_tol: float = 1e-9
    max_pivots: int = 50_000
    bland_after: int = 1_000


DEFAULT_SIMPLEX = SimplexOptions()


@dataclass
class LpResult:
    """Array-level LP outcome shared with branch and bound."""

    status: Status
    x: np.ndarray = field(default_factory=lambda: np.zeros(0))
    objective: float = float("nan")
    duals: np.ndarray = field(default_factory=lambda: np.zeros(0))
    pivots: int = 0


@dataclass
class _StandardForm:
    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    transform: np.ndarray
    offset: np.ndarray
    row_sign: np.ndarray
    row_origin: List[int]
    n_struct: int


def _standard_form(arrays: ModelArrays, lb: np.ndarray, ub: np.ndarray, c: np.ndarray) -> Optional[_StandardForm]:
    n = len(arrays.names)
    columns = []
    offset = np.zeros(n)
    bound_rows = []
    for j in range(n):
        lo, hi = lb[j], ub[j]
        if np.isfinite(lo):
            offset[j] = lo
            columns.append((j, 1.0))
            if np.isfinite(hi):
                bound_rows.append((len(columns) - 1, hi - lo))
        elif np.isfinite(hi):
            offset[j] = hi
            columns.append((j, -1.0))
        else:
            columns.append((j, 1.0))
            columns.append((j, -1.0))

    n_struct = len(columns)
    transform = np.zeros((n, n_struct))
    for k, (j, sign) in enumerate(columns):
        transform[j, k] = sign

    m = arrays.A.shape[0]
    A_rows = arrays.A @ transform if m else np.zeros((0, n_struct))
    b_rows = arrays.b - arrays.A @ offset if m else np.zeros(0)
    relations = list(arrays.relations)
    row_origin = list(range(m))

    # rows with no structural coefficient are decided here
    keep = []
    for i in range(m):
        if np.any(np.abs(A_rows[i]) > 0.0):
            keep.append(i)
            continue
        rhs = b_rows[i]
        tol = DEFAULT_TOLERANCES.feasibility * (1.0 + abs(arrays.b[i]))
        relation = relations[i]
        if (
            (relation is Relation.LE and rhs < -tol)
            or (relation is Relation.GE and rhs > tol)
            or (relation is Relation.EQ and abs(rhs) > tol)
        ):
            return None
    A_rows = A_rows[keep]
    b_rows = b_rows[keep]
    relations = [relations[i] for i in keep]
    row_origin = [row_origin[i] for i in keep]

    for k, limit in bound_rows:
        row = np.zeros(n_struct)
        row[k] = 1.0
        A_rows = np.vstack([A_rows, row])
        b_rows = np.append(b_rows, limit)
        relations.append(Relation.LE)
        row_origin.append(-1)

    rows = len(relations)
    n_slack = sum(1 for r in relations if r is not Relation.EQ)
    A_std = np.zeros((rows, n_struct + n_slack))
    A_std[:, :n_struct] = A_rows
    slack = n_struct
    for i, relation in enumerate(relations):
        if relation is Relation.LE:
            A_std[i, slack] = 1.0
            slack += 1
        elif relation is Relation.GE:
            A_std[i, slack] = -1.0
            slack += 1

    row_sign = np.where(b_rows < 0.0, -1.0, 1.0)
    A_std *= row_sign[:, None]
    b_std = b_rows * row_sign

    c_std = np.zeros(n_struct + n_slack)
    c_std[:n_struct] = c @ transform
    return _StandardForm(A_std, b_std, c_std, transform, offset, row_sign, row_origin, n_struct)


def _pivot(T: np.ndarray, row: int, col: int) -> None:
    pivot_row = T[row] / T[row, col]
    column = T[:, col].copy()
    T -= np.outer(column, pivot_row)
    T[row] = pivot_row


def _iterate(T: np.ndarray, basis: List[int], n_allowed: int, options: SimplexOptions, pivots: int):
    m = T.shape[0] - 1
    tol = options.tolerances.optimality
    while True:
        reduced = T[m, :n_allowed]
        if pivots >= options.bland_after:
            candidates = np.flatnonzero(reduced < -tol)
            if candidates.size == 0:
                return Status.OPTIMAL, pivots
            col = int(candidates[0])
        else:
            col = int(np.argmin(reduced)) if n_allowed else 0
            if n_allowed == 0 or reduced[col] >= -tol:
                return Status.OPTIMAL, pivots
        column = T[:m, col]
        positive = column > options.pivot_tol
        if not positive.any():
            return Status.UNBOUNDED, pivots
        rhs = np.maximum(T[:m, -1], 0.0)
        ratios = np.full(m, np.inf)
        ratios[positive] = rhs[positive] / column[positive]
        best = ratios.min()
        ties = np.flatnonzero(ratios <= best + 1e-12 * (1.0 + abs(best)))
        row = int(min(ties, key=lambda r: basis[r]))
        _pivot(T, row, col)
        basis[row] = col
        pivots += 1
        if pivots > options.max_pivots:
            raise NumericalFailure(f"simplex exceeded {options.max_pivots} pivots")


def solve_arrays(
    arrays: ModelArrays,
    lb: Optional[np.ndarray] = None,
    ub: Optional[np.ndarray] = None,
    options: SimplexOptions = DEFAULT_SIMPLEX,
) -> LpResult:
    """Solve the continuous relaxation of ``arrays`` under the given bounds."""
    lb = arrays.lb if lb is None else lb
    ub = arrays.ub if ub is None else ub
    if np.any(lb > ub + options.tolerances.feasibility):
        return LpResult(Status.INFEASIBLE)

    sign = 1.0 if arrays.sense is Sense.MIN else -1.0
    form = _standard_form(arrays, lb, ub, sign * arrays.c)
    if form is None:
        return LpResult(Status.INFEASIBLE)

    m, N = form.A.shape
    T = np.zeros((m + 1, N + m + 1))
    T[:m, :N] = form.A
    T[:m, N:N + m] = np.eye(m)
    T[:m, -1] = form.b
    T[m, :N] = -form.A.sum(axis=0)
    T[m, -1] = -form.b.sum()
    basis = list(range(N, N + m))

    _, pivots = _iterate(T, basis, N + m, options, 0)
    scale = max(1.0, float(np.max(np.abs(form.b)))) if m else 1.0
    if -T[m, -1] > options.tolerances.feasibility * scale:
        return LpResult(Status.INFEASIBLE, pivots=pivots)

    for i in range(m):
        if basis[i] < N:
            continue
        T[i, -1] = 0.0
        candidates = np.flatnonzero(np.abs(T[i, :N]) > options.pivot_tol)
        if candidates.size:
            col = int(candidates[0])
            _pivot(T, i, col)
            basis[i] = col
            pivots += 1
        # otherwise the row is redundant and its artificial stays basic at zero

    cost = np.zeros(N + m)
    cost[:N] = form.c
    T[m, :] = 0.0
    T[m, :N] = form.c
    for i, j in enumerate(basis):
        if cost[j] != 0.0:
            T[m] -= cost[j] * T[i]

    status, pivots = _iterate(T, basis, N, options, pivots)
    if status is Status.UNBOUNDED:
        return LpResult(Status.UNBOUNDED, pivots=pivots)

    z = np.zeros(N + m)
    z[basis] = T[:m, -1]
    x = form.offset + form.transform @ z[:form.n_struct]
    objective = float(arrays.c @ x + arrays.constant)

    y_std = -T[m, N:N + m] * form.row_sign
    duals = np.zeros(arrays.A.shape[0])
    for k, origin in enumerate(form.row_origin):
        if origin >= 0:
            duals[origin] = sign * y_std[k]
    return LpResult(Status.OPTIMAL, x, objective, duals, pivots)


def solve_lp(model: OptModel, options: SimplexOptions = DEFAULT_SIMPLEX) -> OptSolution:
    """Solve a continuous model; binaries are rejected, use solve_milp for those."""
    if model.is_mip:
        raise ModelError("solve_lp received a model with binary variables")
    arrays = model.to_arrays()
    result = solve_arrays(arrays, options=options)
    logger.debug("LP %s: %s after %d pivots", model.name, result.status.value, result.pivots)
    if result.status is not Status.OPTIMAL:
        return OptSolution(result.status, iterations=result.pivots)
    return OptSolution(
        Status.OPTIMAL,
        values=dict(zip(arrays.names, map(float, result.x))),
        objective_value=result.objective,
        dual_values=dict(zip(arrays.row_names, map(float, result.duals))),
        iterations=result.pivots,
    )
