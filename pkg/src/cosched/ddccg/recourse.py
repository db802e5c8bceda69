"""
Second-stage model shared by the sub-problem oracle and the master cuts.

The recourse sees the first stage only through a RecourseLink: hourly
consumption, production-only outlet stocks, the finished-goods level and
the line-state indicators. In the master these are expressions over master
variables; in the oracle they are constants for the fixed schedule.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Tuple

from cosched import naming
from cosched.ddccg.split import ProblemSplit, Scenario
from cosched.ddu.idm import ProductStructureIdm, state_visited, theta_value
from cosched.ddu.yield_ambiguity import alpha_value
from cosched.factory.constraints import assemble, energy_blocks, fr_block
from cosched.factory.model import EnergyDispatch, ScheduleDecision, UncertaintyRealization, derive_profile
from cosched.optkernel.model import ConstraintBlock, LinearExpr, OptModel, Sense

logger = logging.getLogger(__name__)

StateKey = Tuple[int, int]


@dataclass(frozen=True)
class RecourseLink:
    consumption: Tuple[LinearExpr, ...]
    outlet_stock: Mapping[str, Tuple[LinearExpr, ...]]
    finished: LinearExpr
    state_on: Mapping[StateKey, LinearExpr]


def master_link(split: ProblemSplit) -> RecourseLink:
    graph = split.graph
    H = graph.horizon
    finished = graph.finished_buffer
    idm = split.idm
    return RecourseLink(
        consumption=tuple(LinearExpr.var(naming.E(h)) for h in range(H)),
        outlet_stock={buf.id: tuple(LinearExpr.var(naming.B(h, buf.id)) for h in range(H + 1)) for buf in graph.outlets},
        finished=LinearExpr.var(naming.B(H, finished.id)) if finished is not None else LinearExpr(),
        state_on={}
        if idm is None
        else {(h, i): LinearExpr.var(naming.state_aux(h, idm.states[i].id)) for h in range(H) for i in idm.weighted()},
    )


def schedule_yields(split: ProblemSplit, schedule: ScheduleDecision) -> Dict[Tuple[int, str, str], float]:
    """Worst-case yield of every corrected option at every hour of the schedule."""
    spec = split.yields
    if spec is None:
        return {}
    return {
        (h, n, p): alpha_value(spec, (n, p), schedule.active_at(h))
        for h in range(schedule.horizon)
        for n, p in spec.corrected_set
    }


def fixed_link(split: ProblemSplit, schedule: ScheduleDecision, alpha: Optional[Mapping] = None) -> RecourseLink:
    graph = split.graph
    H = graph.horizon
    alpha = schedule_yields(split, schedule) if alpha is None else alpha
    profile = derive_profile(graph, schedule, lambda h, key: float(alpha.get((h, key[0], key[1]), 1.0)))
    finished = graph.finished_buffer
    idm = split.idm
    state_on: Dict[StateKey, LinearExpr] = {}
    if idm is not None:
        for h in range(H):
            active = schedule.active_at(h)
            for i in idm.weighted():
                state_on[(h, i)] = LinearExpr.const(float(state_visited(idm.states[i], active)))
    return RecourseLink(
        consumption=tuple(LinearExpr.const(float(e)) for e in profile.energy),
        outlet_stock={buf.id: tuple(LinearExpr.const(float(v)) for v in profile.stocks[buf.id]) for buf in graph.outlets},
        finished=LinearExpr.const(float(profile.stocks[finished.id][H])) if finished is not None else LinearExpr(),
        state_on=state_on,
    )


def theta_weights(idm: ProductStructureIdm, horizon: int, side: str) -> Dict[StateKey, float]:
    return {(h, i): idm.ratios[i] * theta_value(idm, i, h, side) for h in range(horizon) for i in idm.weighted()}


def sales_block(split: ProblemSplit, link: RecourseLink, copy: Optional[int] = None) -> ConstraintBlock:
    """
    By-product sales of every outlet: cumulative sales never exceed the
    production-only stock, and the revenue gates ``z <= B_ss``,
    ``z <= cap * s`` switch a state's weight on when the schedule visits it.
    """
    graph = split.graph
    H = graph.horizon
    idm = split.idm
    sfx = "" if copy is None else f"@{copy}"
    block = ConstraintBlock("6bd")
    for buf in graph.outlets:
        sold = LinearExpr()
        cap = graph.stock_cap(buf.id)
        for h in range(H):
            bss = block.declare(naming.B_ss(h, buf.id, copy))
            sold = sold + bss
            stock = link.outlet_stock[buf.id]
            block.add(sold.le(stock[h], name=f"6d[{h},{buf.id}]{sfx}"))
            block.add(sold.le(stock[h + 1], name=f"6b[{h},{buf.id}]{sfx}"))
            if idm is None:
                continue
            for i in idm.weighted():
                state = idm.states[i].id
                z = block.declare(naming.byproduct_gate(h, buf.id, state, copy))
                block.add(z.le(bss, name=f"gate_sale[{h},{buf.id},{state}]{sfx}"))
                block.add(z.le(link.state_on[(h, i)] * cap, name=f"gate_state[{h},{buf.id},{state}]{sfx}"))
    return block


def recourse_blocks(
    split: ProblemSplit,
    link: RecourseLink,
    scenario: Scenario,
    copy: Optional[int] = None,
) -> List[ConstraintBlock]:
    blocks = energy_blocks(split.graph, link.consumption, copy)
    if scenario is not None:
        blocks.append(fr_block(split.graph, scenario, copy))
    blocks.append(sales_block(split, link, copy))
    return blocks


def recourse_cost(
    split: ProblemSplit,
    link: RecourseLink,
    with_fr: bool,
    copy: Optional[int] = None,
    side: Optional[str] = None,
) -> LinearExpr:
    """Degradation, purchase and deviation costs minus main and by-product revenue."""
    graph = split.graph
    es = graph.energy
    H = graph.horizon
    cost = LinearExpr.total(LinearExpr.var(naming.S(h, copy)) for h in range(1, H + 1)) * es.degr_coeff
    cost = cost + LinearExpr.total(LinearExpr.var(naming.E_net(h, copy)) * es.rtp[h] for h in range(H))
    if with_fr:
        cost = cost + LinearExpr.total(LinearExpr.var(naming.E_fr(h, copy)) for h in range(H)) * es.fr_price
    cost = cost - link.finished * es.sale_price_main
    idm = split.idm
    weights = None if idm is None else theta_weights(idm, H, side or split.zeta_side)
    for buf in graph.outlets:
        for h in range(H):
            if weights is None:
                cost = cost - LinearExpr.var(naming.B_ss(h, buf.id, copy)) * es.sale_price_by
                continue
            for i in idm.weighted():
                gate = LinearExpr.var(naming.byproduct_gate(h, buf.id, idm.states[i].id, copy))
                cost = cost - gate * (es.sale_price_by * weights[(h, i)])
    return cost


def recourse_model(split: ProblemSplit, link: RecourseLink, scenario: Scenario, side: Optional[str] = None) -> OptModel:
    """The inner dispatch LP for one expected-load scenario."""
    model = assemble(recourse_blocks(split, link, scenario), "recourse")
    model.set_objective(recourse_cost(split, link, scenario is not None, side=side), Sense.MIN)
    return model


def dispatch_from(split: ProblemSplit, values: Mapping[str, float], copy: Optional[int] = None) -> EnergyDispatch:
    graph = split.graph
    H = graph.horizon
    es = graph.energy

    def series(name_of) -> Tuple[float, ...]:
        return tuple(max(0.0, float(values.get(name_of(h, copy), 0.0))) for h in range(H))

    net = series(naming.E_net)
    return EnergyDispatch(
        e_eu=series(naming.E_EU),
        e_lu=series(naming.E_LU),
        e_su=series(naming.E_SU),
        soc=tuple(float(values.get(naming.S(h, copy), 0.0)) for h in range(H + 1)),
        e_fr=series(naming.E_fr),
        net_purchase=net,
        purchase_cost=tuple(p * e for p, e in zip(es.rtp, net)),
        byproduct_sales={
            buf.id: tuple(max(0.0, float(values.get(naming.B_ss(h, buf.id, copy), 0.0))) for h in range(H))
            for buf in graph.outlets
        },
    )



@dataclass(frozen=True)
class WxValues:
    """First-stage uncertainty fixed at a schedule: worst-case yields and by-product weights."""

    alpha: Mapping[Tuple[int, str, str], float]
    zeta: Tuple[float, ...]
    side: str = "lo"
    idm: Optional[ProductStructureIdm] = None

    def realization(self, scenario: Scenario) -> UncertaintyRealization:
        return UncertaintyRealization(
            yields=dict(self.alpha),
            expected_load=None if scenario is None else tuple(scenario),
            zeta=tuple(min(1.0, z) for z in self.zeta),
        )

    def to_dict(self) -> Dict[str, object]:
        return {
            "alpha": [[h, n, p, a] for (h, n, p), a in sorted(self.alpha.items())],
            "zeta": list(self.zeta),
            "side": self.side,
        }
