"""Shared fixtures: tiny hand-built plants, synthetic instances and seeded generators."""
import numpy as np
import pytest

from cosched.ddccg.driver import CoSchedule
from cosched.factory.model import (
    Buffer,
    EnergyDispatch,
    EnergySystem,
    EquipmentOption,
    FactoryGraph,
    ScheduleDecision,
    UncertaintyRealization,
    Workshop,
)
from cosched.factory.simulate import simulate_schedule
from cosched.scenario.synthetic import SyntheticConfig, gen_synthetic, planted_schedule, rng_for, synthetic_specs


def tiny_plant(horizon: int = 2, grid_cap=None, der=0.0) -> FactoryGraph:
    """One workshop with a cheap slow option and a fast costly one, raw stock for two runs."""
    options = (
        EquipmentOption("slow", time_cost=1.0, energy_cost=10.0, output_qty=8.0, input_qty=10.0),
        EquipmentOption("fast", time_cost=0.5, energy_cost=20.0, output_qty=10.0, input_qty=10.0),
    )
    workshop = Workshop("W1", options, (0.0, 0.0), ("RAW",), ("OUT", "BP"))
    buffers = (
        Buffer("RAW", 20.0, transport_batch=10.0, transport_time=0.1),
        Buffer("OUT", 0.0, transport_batch=10.0, transport_time=0.1),
        Buffer("BP", 0.0, transport_batch=10.0, transport_time=0.0, is_byproduct_outlet=True),
    )
    energy = EnergySystem(
        bess_capacity=10.0,
        bess_initial=5.0,
        discharge_eff=1.0,
        charge_eff=1.0,
        ramp_lo=0.0,
        ramp_hi=5.0,
        rtp=tuple(1.0 for _ in range(horizon)),
        der_output=tuple(der for _ in range(horizon)),
        degr_coeff=0.0,
        sale_price_main=3.0,
        sale_price_by=1.0,
        fr_price=0.5,
        grid_cap=grid_cap,
    )
    return FactoryGraph((workshop,), buffers, energy, horizon, time_cost_rate=2.0)


def idle_co_schedule(graph: FactoryGraph, schedule: ScheduleDecision) -> CoSchedule:
    dispatch = EnergyDispatch.idle(graph.horizon)
    worst = UncertaintyRealization()
    report = simulate_schedule(graph, schedule, dispatch, worst)
    return CoSchedule(schedule, {(): dispatch}, dispatch, worst, report.objective, report.objective, report.objective, report)


@pytest.fixture
def tiny_graph() -> FactoryGraph:
    return tiny_plant()


@pytest.fixture
def rng() -> np.random.Generator:
    return rng_for(12345)


@pytest.fixture
def synthetic():
    """Two workshops, two options, two hours: 8 first-stage binaries."""
    graph, bundle = gen_synthetic(SyntheticConfig(seed=7))
    return graph, bundle, synthetic_specs(bundle)


@pytest.fixture
def planted_co(synthetic) -> CoSchedule:
    graph, _, _ = synthetic
    return idle_co_schedule(graph, planted_schedule(graph))
