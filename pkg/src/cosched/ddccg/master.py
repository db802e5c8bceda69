"""
Master problem: production schedule at its worst-case yields, line-state
indicators, the recourse value ``psi`` and every cut collected so far.
Yields enter through the production rows and line states through the cut
copies, so no free alpha, zeta or theta columns are carried here.
"""
from __future__ import annotations

import logging

from cosched import naming
from cosched.ddccg.cuts import CutPool
from cosched.ddccg.split import ProblemSplit
from cosched.ddu.idm import state_indicator_rows
from cosched.factory.constraints import assemble, equipment_cost_expr, production_blocks
from cosched.optkernel.model import OptModel, Sense, VarKind, add_block

logger = logging.getLogger(__name__)


def build_master(split: ProblemSplit, pool: CutPool, k: int) -> OptModel:
    """
    Minimize the transport-adjusted equipment cost plus ``psi`` over the
    production-only plant rows. ``psi`` is bounded below by ``psi_floor`` so
    the first master has a finite optimum.
    """
    graph = split.graph
    H = graph.horizon
    model = assemble(production_blocks(graph, split.yields, outlet_sales=False), f"master[{k}]")

    idm = split.idm
    if idm is not None:
        for h in range(H):
            add_block(model, state_indicator_rows(idm, h))

    psi = model.add_var(naming.PSI, VarKind.FREE, lb=split.psi_floor)
    for entry in pool.entries:
        for block in entry.rows:
            add_block(model, block)
        if entry.psi_row is not None:
            model.add_constraint(entry.psi_row)

    model.set_objective(equipment_cost_expr(graph) + psi, Sense.MIN)
    logger.debug(
        "master %d: %d variables, %d rows, %d cuts", k, len(model.variables), len(model.constraints), len(pool)
    )
    return model

