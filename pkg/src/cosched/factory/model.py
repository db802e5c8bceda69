"""
Plant data model: workshops with equipment options, buffers between them,
and the single-bus energy system with its battery.

Hours run 0..H-1. Stocks and the battery state of charge are indexed 0..H,
with index 0 the initial value; production of hour h is in stock at h+1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from cosched import naming
from cosched.errors import InfeasibleSchedule

OptionKey = Tuple[str, str]
Triplet = Tuple[int, str, str]

FEASIBILITY_TOL = 1e-6


@dataclass(frozen=True)
class EquipmentOption:
    id: str
    time_cost: float
    energy_cost: float
    output_qty: float
    input_qty: float
    min_uptime: int = 1
    max_daily_uses: Optional[int] = None


@dataclass(frozen=True)
class Workshop:
    id: str
    options: Tuple[EquipmentOption, ...]
    location: Tuple[float, float] = (0.0, 0.0)
    upstream_buffers: Tuple[str, ...] = ()
    downstream_buffers: Tuple[str, ...] = ()
    max_uses: Optional[int] = None

    def option(self, option_id: str) -> EquipmentOption:
        for option in self.options:
            if option.id == option_id:
                return option
        raise KeyError(f"workshop {self.id} has no option {option_id}")


@dataclass(frozen=True)
class Buffer:
    id: str
    initial_stock: float
    transport_batch: float = 1.0
    transport_time: float = 0.0
    is_byproduct_outlet: bool = False


@dataclass(frozen=True)
class EnergySystem:
    bess_capacity: float
    bess_initial: float
    discharge_eff: float
    charge_eff: float
    ramp_lo: float
    ramp_hi: float
    rtp: Tuple[float, ...]
    der_output: Tuple[float, ...]
    degr_coeff: float
    sale_price_main: float
    sale_price_by: float
    fr_price: float = 0.0
    grid_cap: Optional[float] = None


@dataclass(frozen=True)
class FactoryGraph:
    workshops: Tuple[Workshop, ...]
    buffers: Tuple[Buffer, ...]
    energy: EnergySystem
    horizon: int
    time_cost_rate: float = 1.0

    def workshop(self, workshop_id: str) -> Workshop:
        for ws in self.workshops:
            if ws.id == workshop_id:
                return ws
        raise KeyError(workshop_id)

    def buffer(self, buffer_id: str) -> Buffer:
        for buf in self.buffers:
            if buf.id == buffer_id:
                return buf
        raise KeyError(buffer_id)

    @property
    def option_keys(self) -> List[OptionKey]:
        return [(ws.id, opt.id) for ws in self.workshops for opt in ws.options]

    def option(self, key: OptionKey) -> EquipmentOption:
        return self.workshop(key[0]).option(key[1])

    @property
    def outlets(self) -> List[Buffer]:
        return [buf for buf in self.buffers if buf.is_byproduct_outlet]

    @property
    def finished_buffer(self) -> Optional[Buffer]:
        """Finished-goods buffer: the last non-outlet buffer in declaration order."""
        regular = [buf for buf in self.buffers if not buf.is_byproduct_outlet]
        return regular[-1] if regular else None

    def producers(self, buffer_id: str) -> List[Tuple[Workshop, EquipmentOption]]:
        return [(ws, opt) for ws in self.workshops if buffer_id in ws.downstream_buffers for opt in ws.options]

    def consumers(self, buffer_id: str) -> List[Tuple[Workshop, EquipmentOption]]:
        return [(ws, opt) for ws in self.workshops if buffer_id in ws.upstream_buffers for opt in ws.options]

    @property
    def n_binaries(self) -> int:
        return self.horizon * len(self.option_keys)

    def stock_cap(self, buffer_id: str) -> float:
        """Upper bound of a production-only stock level over the horizon."""
        gain = sum(opt.output_qty for _, opt in self.producers(buffer_id))
        return self.buffer(buffer_id).initial_stock + self.horizon * gain


@dataclass(frozen=True)
class ScheduleDecision:
    """Binary production decision, stored as the set of active (hour, workshop, option) triplets."""

    horizon: int
    active: FrozenSet[Triplet] = frozenset()

    @classmethod
    def from_triplets(cls, horizon: int, triplets: Iterable[Sequence]) -> "ScheduleDecision":
        return cls(horizon, frozenset((int(h), str(n), str(p)) for h, n, p in triplets))

    @classmethod
    def from_values(cls, graph: FactoryGraph, values: Mapping[str, float]) -> "ScheduleDecision":
        active = {
            (h, n, p)
            for h in range(graph.horizon)
            for n, p in graph.option_keys
            if values.get(naming.I(h, n, p), 0.0) > 0.5
        }
        return cls(graph.horizon, frozenset(active))

    def is_on(self, h: int, n: str, p: str) -> bool:
        return (h, n, p) in self.active

    def active_at(self, h: int) -> Callable[[OptionKey], bool]:
        return lambda key: (h, key[0], key[1]) in self.active

    def triplets(self) -> List[Triplet]:
        return sorted(self.active)

    def tensor(self, graph: FactoryGraph) -> np.ndarray:
        """0/1 array indexed [hour, workshop, option], padded to the widest workshop."""
        width = max((len(ws.options) for ws in graph.workshops), default=0)
        out = np.zeros((self.horizon, len(graph.workshops), width), dtype=int)
        for n, ws in enumerate(graph.workshops):
            for p, opt in enumerate(ws.options):
                for h in range(self.horizon):
                    out[h, n, p] = int(self.is_on(h, ws.id, opt.id))
        return out

    def values(self, graph: FactoryGraph) -> Dict[str, float]:
        return {
            naming.I(h, n, p): float(self.is_on(h, n, p)) for h in range(graph.horizon) for n, p in graph.option_keys
        }

    def check(self, graph: FactoryGraph) -> None:
        """Raise InfeasibleSchedule on a broken uniqueness, usage-limit or minimum-uptime rule."""
        for ws in graph.workshops:
            for h in range(self.horizon):
                if sum(self.is_on(h, ws.id, opt.id) for opt in ws.options) > 1:
                    raise InfeasibleSchedule("4a", h, f"workshop {ws.id} runs more than one option")
            if ws.max_uses is not None:
                uses = sum(self.is_on(h, ws.id, opt.id) for h in range(self.horizon) for opt in ws.options)
                if uses > ws.max_uses:
                    raise InfeasibleSchedule("4b", -1, f"workshop {ws.id} used {uses} > {ws.max_uses} times")
            for opt in ws.options:
                if opt.max_daily_uses is not None:
                    uses = sum(self.is_on(h, ws.id, opt.id) for h in range(self.horizon))
                    if uses > opt.max_daily_uses:
                        raise InfeasibleSchedule("4b", -1, f"option {ws.id}/{opt.id} used {uses} > {opt.max_daily_uses}")
                for h in range(self.horizon):
                    started = self.is_on(h, ws.id, opt.id) and not (h > 0 and self.is_on(h - 1, ws.id, opt.id))
                    if not started:
                        continue
                    for t in range(1, opt.min_uptime):
                        if h + t < self.horizon and not self.is_on(h + t, ws.id, opt.id):
                            raise InfeasibleSchedule("5", h + t, f"option {ws.id}/{opt.id} stopped before its minimum uptime")


@dataclass
class ScheduleProfile:
    """Per-hour quantities derived from a schedule and the yields it runs at."""

    time: np.ndarray
    energy: np.ndarray
    transport_time: np.ndarray
    flows: Dict[str, np.ndarray]
    stocks: Dict[str, np.ndarray]


YieldFn = Callable[[int, OptionKey], float]


def unit_yield(h: int, key: OptionKey) -> float:
    return 1.0


def production(graph: FactoryGraph, schedule: ScheduleDecision, h: int, buffer_id: str, yields: YieldFn) -> float:
    return sum(
        yields(h, (ws.id, opt.id)) * opt.output_qty
        for ws, opt in graph.producers(buffer_id)
        if schedule.is_on(h, ws.id, opt.id)
    )


def consumption(graph: FactoryGraph, schedule: ScheduleDecision, h: int, buffer_id: str) -> float:
    return sum(opt.input_qty for ws, opt in graph.consumers(buffer_id) if schedule.is_on(h, ws.id, opt.id))


def derive_profile(
    graph: FactoryGraph,
    schedule: ScheduleDecision,
    yields: YieldFn = unit_yield,
    sales: Optional[Mapping[str, Sequence[float]]] = None,
) -> ScheduleProfile:
    """Hourly time, energy, transport-adjusted time, net flows and stock levels (no feasibility checks)."""
    H = graph.horizon
    time = np.zeros(H)
    energy = np.zeros(H)
    for h in range(H):
        for ws in graph.workshops:
            for opt in ws.options:
                if schedule.is_on(h, ws.id, opt.id):
                    time[h] += opt.time_cost
                    energy[h] += opt.energy_cost
    flows: Dict[str, np.ndarray] = {}
    stocks: Dict[str, np.ndarray] = {}
    transport = time.copy()
    for buf in graph.buffers:
        flow = np.array([production(graph, schedule, h, buf.id, yields) - consumption(graph, schedule, h, buf.id) for h in range(H)])
        sold = np.zeros(H) if sales is None or buf.id not in sales else np.asarray(sales[buf.id], dtype=float)
        level = np.empty(H + 1)
        level[0] = buf.initial_stock
        for h in range(H):
            level[h + 1] = level[h] + flow[h] - sold[h]
        flows[buf.id] = flow
        stocks[buf.id] = level
        transport += np.abs(flow) / buf.transport_batch * buf.transport_time
    return ScheduleProfile(time, energy, transport, flows, stocks)


@dataclass(frozen=True)
class EnergyDispatch:
    e_eu: Tuple[float, ...]
    e_lu: Tuple[float, ...]
    e_su: Tuple[float, ...]
    soc: Tuple[float, ...] = ()
    e_fr: Tuple[float, ...] = ()
    net_purchase: Tuple[float, ...] = ()
    purchase_cost: Tuple[float, ...] = ()
    byproduct_sales: Mapping[str, Tuple[float, ...]] = field(default_factory=dict)

    @classmethod
    def idle(cls, horizon: int) -> "EnergyDispatch":
        zeros = tuple(0.0 for _ in range(horizon))
        return cls(zeros, zeros, zeros)

    @classmethod
    def from_dict(cls, doc: Mapping[str, object]) -> "EnergyDispatch":
        def series(key: str) -> Tuple[float, ...]:
            return tuple(float(v) for v in doc.get(key, []))

        return cls(
            e_eu=series("e_eu"),
            e_lu=series("e_lu"),
            e_su=series("e_su"),
            soc=series("soc"),
            e_fr=series("e_fr"),
            net_purchase=series("net_purchase"),
            purchase_cost=series("purchase_cost"),
            byproduct_sales={k: tuple(float(x) for x in v) for k, v in doc.get("byproduct_sales", {}).items()},
        )

    def to_dict(self) -> Dict[str, object]:
        return {
            "e_eu": list(self.e_eu),
            "e_lu": list(self.e_lu),
            "e_su": list(self.e_su),
            "soc": list(self.soc),
            "e_fr": list(self.e_fr),
            "net_purchase": list(self.net_purchase),
            "purchase_cost": list(self.purchase_cost),
            "byproduct_sales": {k: list(v) for k, v in sorted(self.byproduct_sales.items())},
        }


@dataclass(frozen=True)
class UncertaintyRealization:
    """Realized yields per (hour, workshop, option), expected load per hour and by-product weight per hour."""

    yields: Mapping[Triplet, float] = field(default_factory=dict)
    expected_load: Optional[Tuple[float, ...]] = None
    zeta: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        if any(not 0.0 <= a <= 1.0 for a in self.yields.values()):
            raise ValueError("realized yields must lie in [0, 1]")
        if self.zeta is not None and any(not 0.0 <= z <= 1.0 + 1e-12 for z in self.zeta):
            raise ValueError("zeta must lie in [0, 1]")

    def yield_of(self, h: int, key: OptionKey) -> float:
        return float(self.yields.get((h, key[0], key[1]), 1.0))

    def zeta_at(self, h: int) -> float:
        return 1.0 if self.zeta is None else float(self.zeta[h])

    @classmethod
    def from_dict(cls, doc: Mapping[str, object]) -> "UncertaintyRealization":
        load = doc.get("expected_load")
        zeta = doc.get("zeta")
        return cls(
            yields={(int(h), str(n), str(p)): float(a) for h, n, p, a in doc.get("yields", [])},
            expected_load=None if load is None else tuple(float(v) for v in load),
            zeta=None if zeta is None else tuple(float(v) for v in zeta),
        )

    def to_dict(self) -> Dict[str, object]:
        return {
            "yields": [[h, n, p, a] for (h, n, p), a in sorted(self.yields.items())],
            "expected_load": None if self.expected_load is None else list(self.expected_load),
            "zeta": None if self.zeta is None else list(self.zeta),
        }


COST_TERMS = ("equipment_cost", "degradation_cost", "purchase_cost", "fr_penalty", "main_revenue", "by_revenue")


@dataclass
class CostReport:
    equipment_cost: float
    degradation_cost: float
    purchase_cost: float
    fr_penalty: float
    main_revenue: float
    by_revenue: float
    objective: float = math.nan
    hourly: Dict[str, List[float]] = field(default_factory=dict)

    def __post_init__(self):
        if math.isnan(self.objective):
            self.objective = self.signed_total()

    @classmethod
    def from_dict(cls, doc: Mapping[str, object]) -> "CostReport":
        return cls(
            **{term: float(doc[term]) for term in COST_TERMS},
            objective=float(doc.get("objective", math.nan)),
            hourly={k: [float(x) for x in v] for k, v in doc.get("hourly", {}).items()},
        )

    def signed_total(self) -> float:
        return (
            self.equipment_cost
            + self.degradation_cost
            + self.purchase_cost
            + self.fr_penalty
            - self.main_revenue
            - self.by_revenue
        )

    def to_dict(self) -> Dict[str, object]:
        out: Dict[str, object] = {term: getattr(self, term) for term in COST_TERMS}
        out["objective"] = self.objective
        out["hourly"] = {k: list(v) for k, v in sorted(self.hourly.items())}
        return out
