from cosched.factory.constraints import deterministic_model, emit_constraints, energy_blocks, fr_block, production_blocks
from cosched.factory.engine_case import build_engine_case
from cosched.factory.loader import Diagnostic, dump_factory, load_factory, validate_factory
from cosched.factory.model import (
    Buffer,
    CostReport,
    EnergyDispatch,
    EnergySystem,
    EquipmentOption,
    FactoryGraph,
    ScheduleDecision,
    UncertaintyRealization,
    Workshop,
    derive_profile,
)
from cosched.factory.simulate import simulate_schedule, trajectory_values

__all__ = [
    "Buffer",
    "CostReport",
    "Diagnostic",
    "EnergyDispatch",
    "EnergySystem",
    "EquipmentOption",
    "FactoryGraph",
    "ScheduleDecision",
    "UncertaintyRealization",
    "Workshop",
    "build_engine_case",
    "derive_profile",
    "deterministic_model",
    "dump_factory",
    "emit_constraints",
    "energy_blocks",
    "fr_block",
    "load_factory",
    "production_blocks",
    "simulate_schedule",
    "trajectory_values",
    "validate_factory",
]
