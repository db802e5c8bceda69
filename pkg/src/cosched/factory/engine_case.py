"""
Bundled engine-assembly line.

Twelve workshops in eight functional segments (parts production, machining,
crankshaft forging, sub-assembly, the reorderable grinding / cylinder
mounting branch, main assembly, finishing, testing) with fourteen equipment
options. Buffer B12 is the by-product outlet fed by the forging shop.

Every number below is a synthetic default chosen to give a small instance
with visible trade-offs; none of them is measured plant data:

  horizon 4 h, time cost 5 per transport-adjusted hour
  option time 1 h, energy 10-30 kWh, 10 units in and out per use
  raw material 100 units in B00, 20 units of work in progress elsewhere
  battery 100 kWh starting at 50, efficiencies 0.95, ramp up to 40 kWh/h
  prices 0.6 off-peak / 1.2 peak, DER 0-40 kWh
  main product 60, by-product 15, frequency-regulation price 0.5
"""
from __future__ import annotations

from typing import Sequence, Tuple

from cosched.factory.model import Buffer, EnergySystem, EquipmentOption, FactoryGraph, Workshop

HORIZON = 4
RAW_STOCK = 100.0
WIP_STOCK = 20.0


def _opt(option_id: str, energy: float, min_uptime: int = 1) -> EquipmentOption:
    return EquipmentOption(option_id, time_cost=1.0, energy_cost=energy, output_qty=10.0, input_qty=10.0, min_uptime=min_uptime)


def _ws(ws_id: str, x: float, up: Sequence[str], down: Sequence[str], *options: EquipmentOption) -> Workshop:
    return Workshop(ws_id, tuple(options), (x, 0.0), tuple(up), tuple(down))


def engine_workshops() -> Tuple[Workshop, ...]:
    return (
        _ws("W01", 0.0, ["B00"], ["B01"], _opt("parts", 20.0)),
        _ws("W02", 1.0, ["B01"], ["B02"], _opt("lathe", 25.0), _opt("cnc", 15.0)),
        _ws("W03", 2.0, ["B02"], ["B03", "B12"], _opt("forging", 30.0)),
        _ws("W04", 3.0, ["B03"], ["B04"], _opt("subassembly", 10.0)),
        _ws("W05", 4.0, ["B04"], ["B05"], _opt("grinding", 20.0)),
        _ws("W06", 4.0, ["B04"], ["B05"], _opt("cylinder", 15.0)),
        _ws("W07", 5.0, ["B05"], ["B06"], _opt("manual", 10.0), _opt("robot", 20.0)),
        _ws("W08", 6.0, ["B06"], ["B07"], _opt("piston", 12.0)),
        _ws("W09", 7.0, ["B07"], ["B08"], _opt("head", 12.0)),
        _ws("W10", 8.0, ["B08"], ["B09"], _opt("timing", 10.0)),
        _ws("W11", 9.0, ["B09"], ["B10"], _opt("painting", 18.0)),
        _ws("W12", 10.0, ["B10"], ["B11"], _opt("testing", 14.0)),
    )


def engine_buffers() -> Tuple[Buffer, ...]:
    buffers = [Buffer("B00", RAW_STOCK, transport_batch=10.0, transport_time=0.1)]
    for m in range(1, 12):
        buffers.append(Buffer(f"B{m:02d}", 0.0 if m == 11 else WIP_STOCK, transport_batch=10.0, transport_time=0.1))
    buffers.append(Buffer("B12", 0.0, transport_batch=10.0, transport_time=0.0, is_byproduct_outlet=True))
    return tuple(buffers)


def engine_energy() -> EnergySystem:
    return EnergySystem(
        bess_capacity=100.0,
        bess_initial=50.0,
        discharge_eff=0.95,
        charge_eff=0.95,
        ramp_lo=0.0,
        ramp_hi=40.0,
        rtp=(0.6, 1.2, 1.2, 0.6),
        der_output=(0.0, 30.0, 40.0, 10.0),
        degr_coeff=0.002,
        sale_price_main=60.0,
        sale_price_by=15.0,
        fr_price=0.5,
    )


def build_engine_case() -> FactoryGraph:
    return FactoryGraph(engine_workshops(), engine_buffers(), engine_energy(), HORIZON, time_cost_rate=5.0)
