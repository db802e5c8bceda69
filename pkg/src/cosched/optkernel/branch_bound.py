"""
Best-first branch and bound over binary variables, plus a brute-force
enumerator used as a test oracle for small models.
"""
from __future__ import annotations

import heapq
import itertools
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from cosched.errors import ModelError, NodeLimitExceeded
from cosched.optkernel.model import OptModel, OptSolution, Sense, Status, VarKind
from cosched.optkernel.simplex import DEFAULT_SIMPLEX, LpResult, SimplexOptions, solve_arrays, solve_lp

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BranchAndBoundOptions:
    simplex: SimplexOptions = DEFAULT_SIMPLEX
    node_limit: int = 100_000


DEFAULT_BRANCH_AND_BOUND = BranchAndBoundOptions()


def _to_solution(model: OptModel, names, result: LpResult, binaries, nodes: int, pivots: int) -> OptSolution:
    x = result.x.copy()
    x[binaries] = np.round(x[binaries])
    arrays_c = np.array([model.objective.terms.get(n, 0.0) for n in names])
    return OptSolution(
        Status.OPTIMAL,
        values=dict(zip(names, map(float, x))),
        objective_value=float(arrays_c @ x + model.objective.constant),
        iterations=pivots,
        nodes=nodes,
    )


def solve_milp(model: OptModel, options: BranchAndBoundOptions = DEFAULT_BRANCH_AND_BOUND) -> OptSolution:
    """
    Optimize a model with binary variables.

    Nodes are explored lowest relaxation bound first (ties by creation order);
    the branching variable is the lowest-index fractional binary and the floor
    child is created before the ceiling child.
    """
    if not model.is_mip:
        solution = solve_lp(model, options.simplex)
        solution.nodes = 1
        return solution

    arrays = model.to_arrays()
    binaries = np.array([j for j, kind in enumerate(arrays.kinds) if kind is VarKind.BINARY], dtype=int)
    int_tol = options.simplex.tolerances.integrality
    opt_tol = options.simplex.tolerances.optimality
    sign = 1.0 if arrays.sense is Sense.MIN else -1.0

    heap = [(-math.inf, 0, arrays.lb.copy(), arrays.ub.copy())]
    seq = 1
    incumbent: Optional[LpResult] = None
    incumbent_value = math.inf
    nodes = 0
    pivots = 0

    while heap:
        bound, _, lb, ub = heapq.heappop(heap)
        if bound >= incumbent_value - opt_tol * (1.0 + abs(incumbent_value)):
            continue
        if nodes >= options.node_limit:
            best = None
            if incumbent is not None:
                best = _to_solution(model, arrays.names, incumbent, binaries, nodes, pivots)
            raise NodeLimitExceeded(nodes, best)
        nodes += 1
        relax = solve_arrays(arrays, lb, ub, options.simplex)
        pivots += relax.pivots
        if relax.status is Status.INFEASIBLE:
            continue
        if relax.status is Status.UNBOUNDED:
            logger.debug("MILP %s: unbounded relaxation at node %d", model.name, nodes)
            return OptSolution(Status.UNBOUNDED, iterations=pivots, nodes=nodes)
        value = sign * relax.objective
        if value >= incumbent_value - opt_tol * (1.0 + abs(incumbent_value)):
            continue
        x = relax.x
        fractional = [j for j in binaries if abs(x[j] - round(x[j])) > int_tol]
        if not fractional:
            incumbent = relax
            incumbent_value = value
            continue
        j = fractional[0]
        floor_ub = ub.copy()
        floor_ub[j] = math.floor(x[j])
        heapq.heappush(heap, (value, seq, lb, floor_ub))
        seq += 1
        ceil_lb = lb.copy()
        ceil_lb[j] = math.ceil(x[j])
        heapq.heappush(heap, (value, seq, ceil_lb, ub))
        seq += 1

    logger.debug("MILP %s: %d nodes, %d pivots", model.name, nodes, pivots)
    if incumbent is None:
        return OptSolution(Status.INFEASIBLE, iterations=pivots, nodes=nodes)
    return _to_solution(model, arrays.names, incumbent, binaries, nodes, pivots)


def solve_by_enumeration(model: OptModel, max_binaries: int = 20) -> OptSolution:
    """Fix every binary assignment in turn and keep the best LP; exponential, tests only."""
    arrays = model.to_arrays()
    binaries = [j for j, kind in enumerate(arrays.kinds) if kind is VarKind.BINARY]
    if len(binaries) > max_binaries:
        raise ModelError(f"{len(binaries)} binaries exceed the enumeration limit {max_binaries}")
    sign = 1.0 if arrays.sense is Sense.MIN else -1.0
    best: Optional[LpResult] = None
    best_value = math.inf
    count = 0
    for bits in itertools.product((0.0, 1.0), repeat=len(binaries)):
        lb = arrays.lb.copy()
        ub = arrays.ub.copy()
        lb[binaries] = bits
        ub[binaries] = bits
        result = solve_arrays(arrays, lb, ub)
        count += 1
        if result.status is Status.UNBOUNDED:
            return OptSolution(Status.UNBOUNDED, nodes=count)
        if result.status is Status.OPTIMAL and sign * result.objective < best_value:
            best, best_value = result, sign * result.objective
    if best is None:
        return OptSolution(Status.INFEASIBLE, nodes=count)
    return _to_solution(model, arrays.names, best, np.array(binaries, dtype=int), count, 0)
