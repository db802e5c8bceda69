"""
Instance documents: JSON in, FactoryGraph out, and back.

``validate_factory`` collects every problem as a Diagnostic so the command
line can list them all; ``load_factory`` raises the first one.
"""
from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

from cosched.errors import ConsistencyError, SchemaError
from cosched.factory.model import Buffer, EnergySystem, EquipmentOption, FactoryGraph, Workshop

logger = logging.getLogger(__name__)

Source = Union[str, os.PathLike, Mapping[str, Any]]

_NUMBER = (int, float)

TOP_KEYS = {"horizon": True, "time_cost_rate": False, "workshops": True, "buffers": True, "energy": True}
WORKSHOP_KEYS = {
    "id": True,
    "location": False,
    "upstream_buffers": False,
    "downstream_buffers": False,
    "max_uses": False,
    "options": True,
}
OPTION_KEYS = {
    "id": True,
    "time_cost": True,
    "energy_cost": True,
    "output": True,
    "input": True,
    "min_uptime": False,
    "max_daily_uses": False,
}
BUFFER_KEYS = {"id": True, "initial": True, "batch": True, "transport_time": True, "byproduct_outlet": False}
ENERGY_KEYS = {
    "bess_capacity": True,
    "bess_initial": True,
    "discharge_eff": True,
    "charge_eff": True,
    "ramp_lo": True,
    "ramp_hi": True,
    "rtp": True,
    "der_output": True,
    "degr_coeff": True,
    "sale_price_main": True,
    "sale_price_by": True,
    "fr_price": False,
    "grid_cap": False,
}


@dataclass(frozen=True)
class Diagnostic:
    check: str
    path: str
    message: str
    kind: str = "consistency"

    def to_dict(self) -> Dict[str, str]:
        return {"check": self.check, "path": self.path, "message": self.message, "kind": self.kind}

    def to_error(self):
        if self.kind == "schema":
            return SchemaError(self.path, self.message)
        return ConsistencyError(self.message, self.path)


class _Checker:
    def __init__(self, lenient: bool):
        self.lenient = lenient
        self.issues: List[Diagnostic] = []

    def schema(self, path: str, message: str) -> None:
        self.issues.append(Diagnostic("schema", path, message, "schema"))

    def fail(self, check: str, path: str, message: str) -> None:
        self.issues.append(Diagnostic(check, path, message))

    def keys(self, obj: Any, allowed: Mapping[str, bool], path: str) -> bool:
        if not isinstance(obj, Mapping):
            self.schema(path, f"expected an object, got {type(obj).__name__}")
            return False
        ok = True
        for key, required in allowed.items():
            if required and key not in obj:
                self.schema(f"{path}.{key}", "missing required field")
                ok = False
        for key in obj:
            if key not in allowed:
                if self.lenient:
                    logger.warning("%s.%s: unknown key ignored", path, key)
                else:
                    self.schema(f"{path}.{key}", "unknown key")
        return ok

    def number(self, obj: Mapping, key: str, path: str, default: Optional[float] = None, nullable: bool = False):
        if key not in obj:
            return default
        value = obj[key]
        if value is None and nullable:
            return None
        if isinstance(value, bool) or not isinstance(value, _NUMBER):
            self.schema(f"{path}.{key}", f"expected a number, got {value!r}")
            return default
        return float(value)

    def integer(self, obj: Mapping, key: str, path: str, default: Optional[int] = None, nullable: bool = False):
        if key not in obj:
            return default
        value = obj[key]
        if value is None and nullable:
            return None
        if isinstance(value, bool) or not isinstance(value, int):
            self.schema(f"{path}.{key}", f"expected an integer, got {value!r}")
            return default
        return value

    def string(self, obj: Mapping, key: str, path: str) -> str:
        value = obj.get(key, "")
        if not isinstance(value, str) or not value:
            self.schema(f"{path}.{key}", f"expected a non-empty string, got {value!r}")
            return ""
        return value

    def strings(self, obj: Mapping, key: str, path: str) -> Tuple[str, ...]:
        value = obj.get(key, [])
        if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
            self.schema(f"{path}.{key}", "expected a list of identifiers")
            return ()
        return tuple(value)

    def numbers(self, obj: Mapping, key: str, path: str) -> Tuple[float, ...]:
        value = obj.get(key, [])
        if not isinstance(value, list) or not all(isinstance(v, _NUMBER) and not isinstance(v, bool) for v in value):
            self.schema(f"{path}.{key}", "expected a list of numbers")
            return ()
        return tuple(float(v) for v in value)


def _read(source: Source) -> Mapping[str, Any]:
    if isinstance(source, Mapping):
        return source
    text = None
    if isinstance(source, os.PathLike) or (isinstance(source, str) and not source.lstrip().startswith("{")):
        path = Path(source)
        if not path.is_file():
            raise SchemaError(str(path), "instance file not found")
        text = path.read_text(encoding="utf-8")
    else:
        text = source
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"line {e.lineno}", f"invalid JSON: {e.msg}") from e


def _parse(doc: Mapping[str, Any], checker: _Checker) -> Optional[FactoryGraph]:
    if not checker.keys(doc, TOP_KEYS, "$"):
        return None
    horizon = checker.integer(doc, "horizon", "$", 0)
    if horizon is not None and horizon < 1:
        checker.fail("horizon", "$.horizon", f"horizon must be at least 1, got {horizon}")
    rate = checker.number(doc, "time_cost_rate", "$", 1.0)

    buffers: List[Buffer] = []
    raw_buffers = doc.get("buffers", [])
    if not isinstance(raw_buffers, list):
        checker.schema("$.buffers", "expected a list")
        raw_buffers = []
    for i, raw in enumerate(raw_buffers):
        path = f"$.buffers[{i}]"
        if not checker.keys(raw, BUFFER_KEYS, path):
            continue
        outlet = raw.get("byproduct_outlet", False)
        if not isinstance(outlet, bool):
            checker.schema(f"{path}.byproduct_outlet", "expected true or false")
            outlet = False
        buf = Buffer(
            id=checker.string(raw, "id", path),
            initial_stock=checker.number(raw, "initial", path, 0.0),
            transport_batch=checker.number(raw, "batch", path, 1.0),
            transport_time=checker.number(raw, "transport_time", path, 0.0),
            is_byproduct_outlet=outlet,
        )
        if buf.initial_stock < 0.0:
            checker.fail("buffer", f"{path}.initial", "initial stock must be nonnegative")
        if buf.transport_batch <= 0.0:
            checker.fail("buffer", f"{path}.batch", "transport batch must be positive")
        if buf.transport_time < 0.0:
            checker.fail("buffer", f"{path}.transport_time", "transport time must be nonnegative")
        buffers.append(buf)

    workshops: List[Workshop] = []
    raw_workshops = doc.get("workshops", [])
    if not isinstance(raw_workshops, list):
        checker.schema("$.workshops", "expected a list")
        raw_workshops = []
    for i, raw in enumerate(raw_workshops):
        path = f"$.workshops[{i}]"
        if not checker.keys(raw, WORKSHOP_KEYS, path):
            continue
        options: List[EquipmentOption] = []
        raw_options = raw.get("options", [])
        if not isinstance(raw_options, list) or not raw_options:
            checker.fail("workshop", f"{path}.options", "a workshop needs at least one option")
            raw_options = raw_options if isinstance(raw_options, list) else []
        for j, rawopt in enumerate(raw_options):
            opath = f"{path}.options[{j}]"
            if not checker.keys(rawopt, OPTION_KEYS, opath):
                continue
            opt = EquipmentOption(
                id=checker.string(rawopt, "id", opath),
                time_cost=checker.number(rawopt, "time_cost", opath, 1.0),
                energy_cost=checker.number(rawopt, "energy_cost", opath, 0.0),
                output_qty=checker.number(rawopt, "output", opath, 0.0),
                input_qty=checker.number(rawopt, "input", opath, 0.0),
                min_uptime=checker.integer(rawopt, "min_uptime", opath, 1),
                max_daily_uses=checker.integer(rawopt, "max_daily_uses", opath, None, nullable=True),
            )
            if opt.time_cost <= 0.0:
                checker.fail("option", f"{opath}.time_cost", "time cost must be positive")
            for key, value in (("energy_cost", opt.energy_cost), ("output", opt.output_qty), ("input", opt.input_qty)):
                if value < 0.0:
                    checker.fail("option", f"{opath}.{key}", f"{key} must be nonnegative")
            if opt.min_uptime < 1:
                checker.fail("option", f"{opath}.min_uptime", "minimum uptime must be at least 1")
            options.append(opt)
        location = raw.get("location", [0.0, 0.0])
        if (
            not isinstance(location, list)
            or len(location) != 2
            or not all(isinstance(v, _NUMBER) and not isinstance(v, bool) for v in location)
        ):
            checker.schema(f"{path}.location", "expected [x, y]")
            location = [0.0, 0.0]
        workshops.append(
            Workshop(
                id=checker.string(raw, "id", path),
                options=tuple(options),
                location=(float(location[0]), float(location[1])),
                upstream_buffers=checker.strings(raw, "upstream_buffers", path),
                downstream_buffers=checker.strings(raw, "downstream_buffers", path),
                max_uses=checker.integer(raw, "max_uses", path, None, nullable=True),
            )
        )

    raw_energy = doc.get("energy", {})
    if not checker.keys(raw_energy, ENERGY_KEYS, "$.energy"):
        return None
    path = "$.energy"
    energy = EnergySystem(
        bess_capacity=checker.number(raw_energy, "bess_capacity", path, 0.0),
        bess_initial=checker.number(raw_energy, "bess_initial", path, 0.0),
        discharge_eff=checker.number(raw_energy, "discharge_eff", path, 1.0),
        charge_eff=checker.number(raw_energy, "charge_eff", path, 1.0),
        ramp_lo=checker.number(raw_energy, "ramp_lo", path, 0.0),
        ramp_hi=checker.number(raw_energy, "ramp_hi", path, 0.0),
        rtp=checker.numbers(raw_energy, "rtp", path),
        der_output=checker.numbers(raw_energy, "der_output", path),
        degr_coeff=checker.number(raw_energy, "degr_coeff", path, 0.0),
        sale_price_main=checker.number(raw_energy, "sale_price_main", path, 0.0),
        sale_price_by=checker.number(raw_energy, "sale_price_by", path, 0.0),
        fr_price=checker.number(raw_energy, "fr_price", path, 0.0),
        grid_cap=checker.number(raw_energy, "grid_cap", path, None, nullable=True),
    )
    if checker.issues and any(d.kind == "schema" for d in checker.issues):
        return None
    return FactoryGraph(tuple(workshops), tuple(buffers), energy, horizon, rate)


def _consistency(graph: FactoryGraph, checker: _Checker) -> None:
    ids = [b.id for b in graph.buffers]
    for dup in sorted({i for i in ids if ids.count(i) > 1}):
        checker.fail("buffer", "$.buffers", f"duplicate buffer id {dup}")
    ws_ids = [w.id for w in graph.workshops]
    for dup in sorted({i for i in ws_ids if ws_ids.count(i) > 1}):
        checker.fail("workshop", "$.workshops", f"duplicate workshop id {dup}")
    known = set(ids)
    for i, ws in enumerate(graph.workshops):
        opt_ids = [o.id for o in ws.options]
        for dup in sorted({o for o in opt_ids if opt_ids.count(o) > 1}):
            checker.fail("workshop", f"$.workshops[{i}].options", f"duplicate option id {dup} in {ws.id}")
        for side in ("upstream_buffers", "downstream_buffers"):
            for ref in getattr(ws, side):
                if ref not in known:
                    checker.fail("edge", f"$.workshops[{i}].{side}", f"dangling buffer reference {ws.id} -> {ref}")
        if ws.max_uses is not None and ws.max_uses < 0:
            checker.fail("workshop", f"$.workshops[{i}].max_uses", "usage limit must be nonnegative")

    es = graph.energy
    H = graph.horizon
    if len(es.rtp) != H:
        checker.fail("rtp", "$.energy.rtp", f"rtp has {len(es.rtp)} entries for a horizon of {H}")
    for h, price in enumerate(es.rtp):
        if price < 0.0:
            checker.fail("rtp", f"$.energy.rtp[{h}]", f"negative price {price:g} at hour {h}")
    if len(es.der_output) != H:
        checker.fail("der", "$.energy.der_output", f"der_output has {len(es.der_output)} entries for a horizon of {H}")
    for h, value in enumerate(es.der_output):
        if value < 0.0:
            checker.fail("der", f"$.energy.der_output[{h}]", f"negative DER output at hour {h}")
    for key in ("discharge_eff", "charge_eff"):
        value = getattr(es, key)
        if not 0.0 < value <= 1.0:
            checker.fail("energy", f"$.energy.{key}", f"{key} must lie in (0, 1], got {value:g}")
    if not 0.0 <= es.ramp_lo <= es.ramp_hi:
        checker.fail("energy", "$.energy.ramp_lo", "ramp bounds must satisfy 0 <= ramp_lo <= ramp_hi")
    if es.bess_capacity < 0.0 or not 0.0 <= es.bess_initial <= es.bess_capacity:
        checker.fail("energy", "$.energy.bess_initial", "initial charge must lie within [0, capacity]")
    if es.grid_cap is not None and es.grid_cap < 0.0:
        checker.fail("energy", "$.energy.grid_cap", "grid cap must be nonnegative")
    if not graph.workshops:
        checker.fail("workshop", "$.workshops", "an instance needs at least one workshop")


def validate_factory(source: Source, lenient: bool = False) -> Tuple[Optional[FactoryGraph], List[Diagnostic]]:
    """Parse and check a document, returning the graph (None on schema errors) and every diagnostic."""
    checker = _Checker(lenient)
    graph = _parse(_read(source), checker)
    if graph is not None:
        _consistency(graph, checker)
    return graph, checker.issues


def load_factory(source: Source, lenient: bool = False) -> FactoryGraph:
    graph, issues = validate_factory(source, lenient)
    if issues:
        raise issues[0].to_error()
    logger.info("loaded plant with %d workshops, %d buffers, horizon %d", len(graph.workshops), len(graph.buffers), graph.horizon)
    return graph


def dump_factory(graph: FactoryGraph) -> Dict[str, Any]:
    es = graph.energy
    return {
        "horizon": graph.horizon,
        "time_cost_rate": graph.time_cost_rate,
        "workshops": [
            {
                "id": ws.id,
                "location": list(ws.location),
                "upstream_buffers": list(ws.upstream_buffers),
                "downstream_buffers": list(ws.downstream_buffers),
                "max_uses": ws.max_uses,
                "options": [
                    {
                        "id": opt.id,
                        "time_cost": opt.time_cost,
                        "energy_cost": opt.energy_cost,
                        "output": opt.output_qty,
                        "input": opt.input_qty,
                        "min_uptime": opt.min_uptime,
                        "max_daily_uses": opt.max_daily_uses,
                    }
                    for opt in ws.options
                ],
            }
            for ws in graph.workshops
        ],
        "buffers": [
            {
                "id": buf.id,
                "initial": buf.initial_stock,
                "batch": buf.transport_batch,
                "transport_time": buf.transport_time,
                "byproduct_outlet": buf.is_byproduct_outlet,
            }
            for buf in graph.buffers
        ],
        "energy": {
            "bess_capacity": es.bess_capacity,
            "bess_initial": es.bess_initial,
            "discharge_eff": es.discharge_eff,
            "charge_eff": es.charge_eff,
            "ramp_lo": es.ramp_lo,
            "ramp_hi": es.ramp_hi,
            "rtp": list(es.rtp),
            "der_output": list(es.der_output),
            "degr_coeff": es.degr_coeff,
            "sale_price_main": es.sale_price_main,
            "sale_price_by": es.sale_price_by,
            "fr_price": es.fr_price,
            "grid_cap": es.grid_cap,
        },
    }
