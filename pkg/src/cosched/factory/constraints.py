"""
Linear constraint blocks of the plant model.

Each block carries the tag of the model equation it implements:

  4a  one option per workshop and hour        5   minimum uptime
  4b  usage limits                            6a  stock recursion
  4c  hourly processing time                  6b  outlet recursion with sales
  4d  hourly energy consumption               6d  sales bounded by stock
  4e  transport-adjusted time                 6e  initial stocks
  7a  energy identity                         7e  state-of-charge bounds
  7b  DER budget                              7f  ramp limit
  7d  state-of-charge recursion               7g  grid import cap
  8c  line-combination conjunctions           17a frequency-regulation deviation
"""
from __future__ import annotations

import logging
from typing import Dict, List, Optional, Sequence

from cosched import naming
from cosched.ddu.yield_ambiguity import YieldAmbiguity, effective_output
from cosched.factory.model import FactoryGraph
from cosched.optkernel.model import (
    ConstraintBlock,
    ExprLike,
    LinearExpr,
    OptModel,
    Sense,
    VarKind,
    add_block,
)

logger = logging.getLogger(__name__)


def _sfx(copy: Optional[int]) -> str:
    return "" if copy is None else f"@{copy}"


def production_blocks(
    graph: FactoryGraph,
    yields: Optional[YieldAmbiguity] = None,
    outlet_sales: bool = True,
) -> List[ConstraintBlock]:
    """
    Rows 4a-6e over the schedule binaries and the stock levels.

    With ``outlet_sales`` off every buffer follows the production-only
    recursion; the master problem uses that form and leaves sales to the
    recourse.
    """
    H = graph.horizon
    uniqueness = ConstraintBlock("4a")
    for h in range(H):
        for ws in graph.workshops:
            terms = [uniqueness.declare(naming.I(h, ws.id, opt.id), VarKind.BINARY, 0.0, 1.0) for opt in ws.options]
            uniqueness.add(LinearExpr.total(terms).le(1.0, name=f"4a[{h},{ws.id}]"))

    limits = ConstraintBlock("4b")
    for ws in graph.workshops:
        if ws.max_uses is not None:
            uses = LinearExpr.total(LinearExpr.var(naming.I(h, ws.id, opt.id)) for h in range(H) for opt in ws.options)
            limits.add(uses.le(ws.max_uses, name=f"4b[{ws.id}]"))
        for opt in ws.options:
            if opt.max_daily_uses is not None:
                uses = LinearExpr.total(LinearExpr.var(naming.I(h, ws.id, opt.id)) for h in range(H))
                limits.add(uses.le(opt.max_daily_uses, name=f"4b[{ws.id},{opt.id}]"))

    time = ConstraintBlock("4c")
    energy = ConstraintBlock("4d")
    for h in range(H):
        t = time.declare(naming.T(h))
        e = energy.declare(naming.E(h))
        time.add(t.eq(LinearExpr.total(LinearExpr.var(naming.I(h, n, p)) * graph.option((n, p)).time_cost for n, p in graph.option_keys), name=f"4c[{h}]"))
        energy.add(e.eq(LinearExpr.total(LinearExpr.var(naming.I(h, n, p)) * graph.option((n, p)).energy_cost for n, p in graph.option_keys), name=f"4d[{h}]"))

    uptime = ConstraintBlock("5")
    for ws in graph.workshops:
        for opt in ws.options:
            for h in range(H):
                start = LinearExpr.var(naming.I(h, ws.id, opt.id))
                if h > 0:
                    start = start - LinearExpr.var(naming.I(h - 1, ws.id, opt.id))
                for t in range(1, opt.min_uptime):
                    if h + t >= H:
                        break
                    uptime.add(LinearExpr.var(naming.I(h + t, ws.id, opt.id)).ge(start, name=f"5[{h},{ws.id},{opt.id},{t}]"))

    conjunctions = ConstraintBlock("8c")
    declared: Dict[str, bool] = {}
    initial = ConstraintBlock("6e")
    recursion = ConstraintBlock("6a")
    outlet = ConstraintBlock("6b")
    sales = ConstraintBlock("6d")
    transport = ConstraintBlock("4e")
    transport_terms: List[LinearExpr] = [LinearExpr() for _ in range(H)]

    for buf in graph.buffers:
        levels = [initial.declare(naming.B(h, buf.id)) for h in range(H + 1)]
        initial.add(levels[0].eq(buf.initial_stock, name=f"6e[{buf.id}]"))
        for h in range(H):
            gain = LinearExpr.total(
                effective_output(yields, h, (ws.id, opt.id), opt.output_qty, conjunctions, declared)
                for ws, opt in graph.producers(buf.id)
            )
            use = LinearExpr.total(LinearExpr.var(naming.I(h, ws.id, opt.id)) * opt.input_qty for ws, opt in graph.consumers(buf.id))
            balance = levels[h + 1] - levels[h] - gain + use
            if buf.is_byproduct_outlet and outlet_sales:
                sold = outlet.declare(naming.B_ss(h, buf.id))
                outlet.add((balance + sold).eq(0.0, name=f"6b[{h},{buf.id}]"))
                sales.add(sold.le(levels[h], name=f"6d[{h},{buf.id}]"))
            else:
                recursion.add(balance.eq(0.0, name=f"6a[{h},{buf.id}]"))
            if buf.transport_time > 0.0:
                f = transport.declare(naming.flow_abs(h, buf.id))
                transport.add(f.ge(gain - use, name=f"4e_pos[{h},{buf.id}]"))
                transport.add(f.ge(use - gain, name=f"4e_neg[{h},{buf.id}]"))
                transport_terms[h] = transport_terms[h] + f * (buf.transport_time / buf.transport_batch)

    for h in range(H):
        tt = transport.declare(naming.T_transport(h))
        transport.add(tt.eq(LinearExpr.var(naming.T(h)) + transport_terms[h], name=f"4e[{h}]"))

    return [uniqueness, limits, time, energy, uptime, conjunctions, initial, recursion, outlet, sales, transport]


def energy_blocks(graph: FactoryGraph, consumption: Sequence[ExprLike], copy: Optional[int] = None) -> List[ConstraintBlock]:
    """
    Rows 7a-7g of the battery and grid, for the hourly consumption given as
    expressions (or constants). ``copy`` suffixes every dispatch variable.
    """
    H = graph.horizon
    es = graph.energy
    sfx = _sfx(copy)
    identity = ConstraintBlock("7a")
    der = ConstraintBlock("7b")
    soc = ConstraintBlock("7d")
    bounds = ConstraintBlock("7e")
    ramp = ConstraintBlock("7f")
    grid = ConstraintBlock("7g")

    levels = [soc.declare(naming.S(h, copy)) for h in range(H + 1)]
    soc.add(levels[0].eq(es.bess_initial, name=f"7d_init{sfx}"))
    for h in range(H):
        eu = identity.declare(naming.E_EU(h, copy))
        lu = identity.declare(naming.E_LU(h, copy))
        su = der.declare(naming.E_SU(h, copy))
        net = identity.declare(naming.E_net(h, copy))
        identity.add((net - consumption[h] + eu + lu).eq(0.0, name=f"7a[{h}]{sfx}"))
        der.add((su + lu).le(es.der_output[h], name=f"7b[{h}]{sfx}"))
        soc.add((levels[h + 1] - levels[h] + eu * es.discharge_eff - su * es.charge_eff).eq(0.0, name=f"7d[{h}]{sfx}"))
        bounds.add(levels[h + 1].le(es.bess_capacity, name=f"7e[{h + 1}]{sfx}"))
        ramp.add((levels[h + 1] - levels[h]).le(es.ramp_hi, name=f"7f_up[{h}]{sfx}"))
        ramp.add((levels[h + 1] - levels[h]).ge(-es.ramp_hi, name=f"7f_dn[{h}]{sfx}"))
        if es.grid_cap is not None:
            grid.add(net.le(es.grid_cap, name=f"7g[{h}]{sfx}"))
    return [identity, der, soc, bounds, ramp, grid]


def fr_block(graph: FactoryGraph, expected_load: Sequence[float], copy: Optional[int] = None) -> ConstraintBlock:
    """Absolute deviation of the net purchase from the expected consumption."""
    block = ConstraintBlock("17a")
    sfx = _sfx(copy)
    for h in range(graph.horizon):
        dev = block.declare(naming.E_fr(h, copy))
        net = LinearExpr.var(naming.E_net(h, copy))
        block.add(dev.ge(net - expected_load[h], name=f"17a_pos[{h}]{sfx}"))
        block.add(dev.ge(expected_load[h] - net, name=f"17a_neg[{h}]{sfx}"))
    return block


def emit_constraints(graph: FactoryGraph, yields: Optional[YieldAmbiguity] = None) -> List[ConstraintBlock]:
    """All deterministic plant rows over the named plant variables."""
    blocks = production_blocks(graph, yields, outlet_sales=True)
    blocks += energy_blocks(graph, [LinearExpr.var(naming.E(h)) for h in range(graph.horizon)])
    logger.debug("emitted %d rows in %d blocks", sum(len(b.rows) for b in blocks), len(blocks))
    return blocks


def assemble(blocks: Sequence[ConstraintBlock], name: str = "plant") -> OptModel:
    model = OptModel(name)
    for block in blocks:
        add_block(model, block)
    return model


def equipment_cost_expr(graph: FactoryGraph) -> LinearExpr:
    return LinearExpr.total(LinearExpr.var(naming.T_transport(h)) for h in range(graph.horizon)) * graph.time_cost_rate


def deterministic_model(
    graph: FactoryGraph,
    expected_load: Optional[Sequence[float]] = None,
    zeta: Optional[Sequence[float]] = None,
    yields: Optional[YieldAmbiguity] = None,
) -> OptModel:
    """
    The single-scenario plant problem as one mixed-binary model: the
    objective of the plant with fixed expected load, by-product weights and
    worst-case yields.
    """
    H = graph.horizon
    es = graph.energy
    blocks = emit_constraints(graph, yields)
    if expected_load is not None:
        blocks.append(fr_block(graph, expected_load))
    model = assemble(blocks, "deterministic")

    objective = equipment_cost_expr(graph)
    objective = objective + LinearExpr.total(LinearExpr.var(naming.S(h)) for h in range(1, H + 1)) * es.degr_coeff
    objective = objective + LinearExpr.total(LinearExpr.var(naming.E_net(h)) * es.rtp[h] for h in range(H))
    if expected_load is not None:
        objective = objective + LinearExpr.total(LinearExpr.var(naming.E_fr(h)) for h in range(H)) * es.fr_price
    finished = graph.finished_buffer
    if finished is not None:
        objective = objective - LinearExpr.var(naming.B(H, finished.id)) * es.sale_price_main
    for buf in graph.outlets:
        for h in range(H):
            weight = 1.0 if zeta is None else zeta[h]
            objective = objective - LinearExpr.var(naming.B_ss(h, buf.id)) * (es.sale_price_by * weight)
    model.set_objective(objective, Sense.MIN)
    return model
