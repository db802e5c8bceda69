"""
Seeded synthetic plants with their history, and the uncertainty models of
the bundled engine case.

Synthetic plants are serial lines W1 -> ... -> Wn over buffers B0 ... Bn,
with the first workshop also feeding the by-product outlet BP. Every
intermediate buffer starts with enough stock for the whole horizon, so the
planted schedule (first option of every workshop at every hour) is always
feasible. Random draws come from numpy's PCG64 generator and every drawn
number is rounded to three decimals before use.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from cosched.ddu import DduSpec, FrMomentModel, LineState, ProductStructureIdm, YieldAmbiguity, YieldCombo
from cosched.factory.model import (
    Buffer,
    EnergySystem,
    EquipmentOption,
    FactoryGraph,
    ScheduleDecision,
    Workshop,
    derive_profile,
)
from cosched.scenario.fit import fit_specs
from cosched.scenario.history import HistoryBundle, LineRecord

logger = logging.getLogger(__name__)

INPUT_QTY = 10.0


@dataclass(frozen=True)
class SyntheticConfig:
    workshops: int = 2
    options_per_workshop: int = 2
    horizon: int = 2
    seed: int = 1
    intensity: float = 1.0
    yield_drop: float = 0.1
    gamma: float = 0.95
    gamma1: float = 0.5
    gamma2: float = 4.0
    epsilon: float = 0.05
    load_samples: int = 24
    grid_cap: Optional[float] = None

    def __post_init__(self):
        if self.workshops < 1 or self.options_per_workshop < 1 or self.horizon < 1:
            raise ValueError("a synthetic plant needs at least one workshop, option and hour")
        if self.intensity < 0.0:
            raise ValueError(f"intensity must be nonnegative, got {self.intensity}")
        if self.load_samples < 1:
            raise ValueError("at least one load sample per hour is required")


def rng_for(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _r(value: float) -> float:
    return float(round(float(value), 3))


def _plant(config: SyntheticConfig, rng: np.random.Generator) -> FactoryGraph:
    n = config.workshops
    H = config.horizon
    workshops: List[Workshop] = []
    for i in range(1, n + 1):
        options = tuple(
            EquipmentOption(
                f"o{p}",
                time_cost=_r(rng.uniform(0.5, 1.5)),
                energy_cost=_r(rng.uniform(5.0, 25.0)),
                output_qty=_r(rng.uniform(8.0, 12.0)),
                input_qty=INPUT_QTY,
            )
            for p in range(1, config.options_per_workshop + 1)
        )
        down = [f"B{i}"] + (["BP"] if i == 1 else [])
        workshops.append(Workshop(f"W{i}", options, (float(i), 0.0), (f"B{i - 1}",), tuple(down)))

    buffers = [
        Buffer(f"B{m}", H * INPUT_QTY if m < n else 0.0, transport_batch=10.0, transport_time=_r(rng.uniform(0.05, 0.2)))
        for m in range(n + 1)
    ]
    buffers.append(Buffer("BP", 0.0, transport_batch=10.0, transport_time=0.0, is_byproduct_outlet=True))

    energy = EnergySystem(
        bess_capacity=50.0,
        bess_initial=25.0,
        discharge_eff=0.95,
        charge_eff=0.95,
        ramp_lo=0.0,
        ramp_hi=20.0,
        rtp=tuple(_r(rng.uniform(0.4, 1.4)) for _ in range(H)),
        der_output=tuple(_r(rng.uniform(0.0, 20.0)) for _ in range(H)),
        degr_coeff=0.002,
        sale_price_main=30.0,
        sale_price_by=5.0,
        fr_price=0.5,
        grid_cap=config.grid_cap,
    )
    return FactoryGraph(tuple(workshops), tuple(buffers), energy, H, time_cost_rate=2.0)


def planted_schedule(graph: FactoryGraph) -> ScheduleDecision:
    """First option of every workshop at every hour; feasible by construction of the stocks."""
    return ScheduleDecision.from_triplets(
        graph.horizon, [(h, ws.id, ws.options[0].id) for h in range(graph.horizon) for ws in graph.workshops]
    )


def _line_states(graph: FactoryGraph) -> Tuple[LineState, ...]:
    first = graph.workshops[0]
    partner = graph.workshops[1] if len(graph.workshops) > 1 else None
    states = []
    for opt in first.options:
        members = [(first.id, opt.id)]
        if partner is not None:
            members.append((partner.id, partner.options[0].id))
        states.append(LineState(f"L{opt.id}", tuple(members)))
    return tuple(states)


def _history(config: SyntheticConfig, graph: FactoryGraph, rng: np.random.Generator) -> HistoryBundle:
    H = config.horizon
    nominal = derive_profile(graph, planted_schedule(graph)).energy
    loads = []
    for h in range(H):
        mu = nominal[h] + rng.uniform(-5.0, 5.0)
        sigma = config.intensity * rng.uniform(1.0, 3.0)
        loads.append(tuple(_r(v) for v in rng.normal(mu, sigma, size=config.load_samples)))

    knobs = {"gamma": config.gamma, "gamma1": config.gamma1 * config.intensity, "gamma2": config.gamma2 * config.intensity, "epsilon": config.epsilon}
    if config.intensity == 0.0:
        return HistoryBundle(H, tuple(loads), rtp_profile=graph.energy.rtp, ddu={"knobs": knobs})

    states = _line_states(graph)
    ratio = _r(0.8 / len(states))
    records = [
        LineRecord(h, state.id, float(rng.integers(0, 6)), ratio) for h in range(H) for state in states
    ]
    last = graph.workshops[-1]
    first = graph.workshops[0]
    members = [(first.id, first.options[0].id)] + ([(last.id, last.options[0].id)] if last is not first else [])
    target = (last.id, last.options[0].id)
    yield_doc = {
        "floors": [[target[0], target[1], 1.0]],
        "combos": [
            {
                "members": [list(m) for m in members],
                "delta": _r(config.yield_drop * config.intensity),
                "targets": [list(target)],
            }
        ],
        "corrected": [list(target)],
    }
    return HistoryBundle(H, tuple(loads), tuple(records), states, graph.energy.rtp, {"knobs": knobs, "yield": yield_doc})


def gen_synthetic(config: SyntheticConfig) -> Tuple[FactoryGraph, HistoryBundle]:
    """A reproducible plant and history; the same config always gives the same numbers."""
    rng = rng_for(config.seed)
    graph = _plant(config, rng)
    bundle = _history(config, graph, rng)
    logger.info(
        "synthetic plant seed %d: %d workshops x %d options, horizon %d",
        config.seed,
        config.workshops,
        config.options_per_workshop,
        config.horizon,
    )
    return graph, bundle


def synthetic_specs(bundle: HistoryBundle) -> List[DduSpec]:
    return fit_specs(bundle)


def engine_case_specs(
    gamma: float = 0.95,
    gamma1: float = 0.5,
    gamma2: float = 8.0,
    epsilon: float = 0.05,
) -> List[DduSpec]:
    """
    Uncertainty models of the engine case: running grinding and cylinder
    mounting together lowers both yields, the hourly load varies around the
    nominal profile, and forging leaves by-products depending on which
    machining option feeds it.
    """
    grinding = ("W05", "grinding")
    cylinder = ("W06", "cylinder")
    yields = YieldAmbiguity(
        alpha_floor={grinding: 0.98, cylinder: 0.98},
        combos=(YieldCombo((grinding, cylinder), 0.05),),
        corrected_set=(grinding, cylinder),
    )
    fr = FrMomentModel(
        mu=(120.0, 140.0, 140.0, 120.0),
        sigma=(4.0, 6.0, 6.0, 4.0),
        gamma1=gamma1,
        gamma2=gamma2,
        epsilon=epsilon,
        samples_per_hour=(30, 30, 30, 30),
    )
    idm = ProductStructureIdm(
        states=(
            LineState("forge_lathe", (("W02", "lathe"), ("W03", "forging"))),
            LineState("forge_cnc", (("W02", "cnc"), ("W03", "forging"))),
        ),
        ratios=(0.4, 0.3),
        hist_counts=((6.0, 2.0), (5.0, 3.0), (4.0, 4.0), (3.0, 5.0)),
        gamma=gamma,
    )
    return [yields, idm, fr]
