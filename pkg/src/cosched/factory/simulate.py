"""
Deterministic evaluation of a schedule and a dispatch under one realization
of the uncertain quantities.
"""
from __future__ import annotations

import logging
from typing import Dict, Optional

import numpy as np

from cosched import naming
from cosched.ddu.yield_ambiguity import YieldAmbiguity, combo_active
from cosched.errors import InfeasibleSchedule
from cosched.factory.model import (
    FEASIBILITY_TOL,
    CostReport,
    EnergyDispatch,
    FactoryGraph,
    ScheduleDecision,
    ScheduleProfile,
    UncertaintyRealization,
    derive_profile,
)

logger = logging.getLogger(__name__)


def _tol(value: float) -> float:
    return FEASIBILITY_TOL * (1.0 + abs(value))


def _sales(graph: FactoryGraph, dispatch: EnergyDispatch) -> Dict[str, np.ndarray]:
    H = graph.horizon
    return {
        buf.id: np.asarray(dispatch.byproduct_sales.get(buf.id, [0.0] * H), dtype=float)
        for buf in graph.outlets
    }


def _battery(graph: FactoryGraph, dispatch: EnergyDispatch):
    es = graph.energy
    H = graph.horizon
    eu = np.asarray(dispatch.e_eu, dtype=float)
    lu = np.asarray(dispatch.e_lu, dtype=float)
    su = np.asarray(dispatch.e_su, dtype=float)
    soc = np.empty(H + 1)
    soc[0] = es.bess_initial
    for h in range(H):
        soc[h + 1] = soc[h] - es.discharge_eff * eu[h] + es.charge_eff * su[h]
    return eu, lu, su, soc


def check_stocks(graph: FactoryGraph, profile: ScheduleProfile, sales: Dict[str, np.ndarray]) -> None:
    for buf in graph.buffers:
        level = profile.stocks[buf.id]
        if buf.id in sales:
            sold = sales[buf.id]
            for h in range(graph.horizon):
                if sold[h] < -FEASIBILITY_TOL:
                    raise InfeasibleSchedule("6d", h, f"negative sales from {buf.id}")
                if sold[h] > level[h] + _tol(level[h]):
                    raise InfeasibleSchedule("6d", h, f"sales {sold[h]:g} exceed stock {level[h]:g} of {buf.id}")
        for h in range(1, graph.horizon + 1):
            if level[h] < -_tol(0.0):
                tag = "6b" if buf.is_byproduct_outlet else "6a"
                raise InfeasibleSchedule(tag, h, f"buffer {buf.id} would hold {level[h]:g} units")


def simulate_schedule(
    graph: FactoryGraph,
    schedule: ScheduleDecision,
    dispatch: EnergyDispatch,
    real: UncertaintyRealization,
) -> CostReport:
    """
    Propagate stocks with the realized yields, check every plant constraint
    and price the six objective terms. Economically poor schedules are
    evaluated; infeasible ones raise InfeasibleSchedule.
    """
    schedule.check(graph)
    H = graph.horizon
    es = graph.energy
    sales = _sales(graph, dispatch)
    profile = derive_profile(graph, schedule, real.yield_of, sales)
    check_stocks(graph, profile, sales)

    eu, lu, su, soc = _battery(graph, dispatch)
    for name, series in (("E_EU", eu), ("E_LU", lu), ("E_SU", su)):
        for h in range(H):
            if series[h] < -FEASIBILITY_TOL:
                raise InfeasibleSchedule("7a", h, f"{name} is negative ({series[h]:g})")
    net = profile.energy - eu - lu
    for h in range(H):
        if su[h] + lu[h] > es.der_output[h] + _tol(es.der_output[h]):
            raise InfeasibleSchedule("7b", h, f"DER use {su[h] + lu[h]:g} exceeds output {es.der_output[h]:g}")
        if net[h] < -_tol(profile.energy[h]):
            raise InfeasibleSchedule("7a", h, f"battery and DER supply exceed consumption by {-net[h]:g}")
        if es.grid_cap is not None and net[h] > es.grid_cap + _tol(es.grid_cap):
            raise InfeasibleSchedule("7g", h, f"purchase {net[h]:g} exceeds grid cap {es.grid_cap:g}")
    net = np.maximum(net, 0.0)
    for h in range(1, H + 1):
        if soc[h] < -_tol(0.0) or soc[h] > es.bess_capacity + _tol(es.bess_capacity):
            raise InfeasibleSchedule("7e", h, f"state of charge {soc[h]:g} outside [0, {es.bess_capacity:g}]")
        step = abs(soc[h] - soc[h - 1])
        if step > es.ramp_hi + _tol(es.ramp_hi):
            raise InfeasibleSchedule("7f", h - 1, f"battery moved {step:g} > {es.ramp_hi:g}")
        if 0.0 < step < es.ramp_lo - _tol(es.ramp_lo):
            logger.warning("hour %d: battery moved %.4g, below the ramp floor %.4g", h - 1, step, es.ramp_lo)

    if real.expected_load is None:
        deviation = np.zeros(H)
    else:
        deviation = np.abs(net - np.asarray(real.expected_load, dtype=float))
    zeta = np.array([real.zeta_at(h) for h in range(H)])
    sold_total = sum(sales.values(), np.zeros(H))
    finished = graph.finished_buffer

    hourly_purchase = np.asarray(es.rtp, dtype=float) * net
    report = CostReport(
        equipment_cost=float(graph.time_cost_rate * profile.transport_time.sum()),
        degradation_cost=float(es.degr_coeff * soc[1:].sum()),
        purchase_cost=float(hourly_purchase.sum()),
        fr_penalty=float(es.fr_price * deviation.sum()),
        main_revenue=float(es.sale_price_main * profile.stocks[finished.id][H]) if finished else 0.0,
        by_revenue=float(es.sale_price_by * (zeta * sold_total).sum()),
        hourly={
            "consumption": profile.energy.tolist(),
            "net_purchase": net.tolist(),
            "purchase_cost": hourly_purchase.tolist(),
            "soc": soc.tolist(),
            "fr_deviation": deviation.tolist(),
            "transport_time": profile.transport_time.tolist(),
            "byproduct_sales": sold_total.tolist(),
            "zeta": zeta.tolist(),
        },
    )
    logger.debug("simulated schedule with %d active slots: objective %.6f", len(schedule.active), report.objective)
    return report


def trajectory_values(
    graph: FactoryGraph,
    schedule: ScheduleDecision,
    dispatch: EnergyDispatch,
    real: UncertaintyRealization,
    yields: Optional[YieldAmbiguity] = None,
) -> Dict[str, float]:
    """Values of every plant variable along a simulated trajectory, keyed by model name."""
    H = graph.horizon
    sales = _sales(graph, dispatch)
    profile = derive_profile(graph, schedule, real.yield_of, sales)
    eu, lu, su, soc = _battery(graph, dispatch)
    values = schedule.values(graph)
    for h in range(H):
        values[naming.T(h)] = float(profile.time[h])
        values[naming.E(h)] = float(profile.energy[h])
        values[naming.T_transport(h)] = float(profile.transport_time[h])
        values[naming.E_EU(h)] = float(eu[h])
        values[naming.E_LU(h)] = float(lu[h])
        values[naming.E_SU(h)] = float(su[h])
        values[naming.E_net(h)] = float(profile.energy[h] - eu[h] - lu[h])
        if real.expected_load is not None:
            values[naming.E_fr(h)] = abs(values[naming.E_net(h)] - real.expected_load[h])
        for buf in graph.buffers:
            values[naming.flow_abs(h, buf.id)] = float(abs(profile.flows[buf.id][h]))
        for buf in graph.outlets:
            values[naming.B_ss(h, buf.id)] = float(sales[buf.id][h])
        if yields is not None:
            active = schedule.active_at(h)
            for k, combo in enumerate(yields.combos):
                values[naming.combo_aux(h, k)] = float(combo_active(combo, active))
                for n, p in combo.corrected:
                    if (n, p) not in combo.members:
                        values[naming.combo_aux(h, k, f"{n},{p}")] = float(combo_active(combo, active) and active((n, p)))
    for h in range(H + 1):
        values[naming.S(h)] = float(soc[h])
        for buf in graph.buffers:
            values[naming.B(h, buf.id)] = float(profile.stocks[buf.id][h])
    return values
