"""
Historical data behind the uncertainty models.

A history directory holds:

  loads.csv    hour, sample_kwh          one row per observed hourly load
  lines.csv    hour, state_id, count, ratio
  states.csv   state_id, workshop, option  one row per member option
  rtp.csv      hour, price               optional price profile
  ddu.json     optional yield model and fitting knobs
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import pandas as pd

from cosched.ddu.idm import LineState
from cosched.errors import ConsistencyError, SchemaError
from cosched.utils.util import ensure_dir, read_json, write_json

logger = logging.getLogger(__name__)

LOADS_FILE = "loads.csv"
LINES_FILE = "lines.csv"
STATES_FILE = "states.csv"
RTP_FILE = "rtp.csv"
DDU_FILE = "ddu.json"

_COLUMNS = {
    LOADS_FILE: ("hour", "sample_kwh"),
    LINES_FILE: ("hour", "state_id", "count", "ratio"),
    STATES_FILE: ("state_id", "workshop", "option"),
    RTP_FILE: ("hour", "price"),
}


@dataclass(frozen=True)
class LineRecord:
    hour: int
    state_id: str
    count: float
    ratio: float


@dataclass(frozen=True)
class HistoryBundle:
    horizon: int
    load_samples: Tuple[Tuple[float, ...], ...]
    line_history: Tuple[LineRecord, ...] = ()
    states: Tuple[LineState, ...] = ()
    rtp_profile: Optional[Tuple[float, ...]] = None
    ddu: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.load_samples) > self.horizon:
            raise ConsistencyError(f"load samples cover {len(self.load_samples)} hours, horizon is {self.horizon}", LOADS_FILE)
        for record in self.line_history:
            if not 0 <= record.hour < self.horizon:
                raise ConsistencyError(f"line record at hour {record.hour} outside [0, {self.horizon})", LINES_FILE)
            if record.count < 0:
                raise ConsistencyError(f"negative count for state {record.state_id} at hour {record.hour}", LINES_FILE)
        known = {s.id for s in self.states}
        missing = sorted({r.state_id for r in self.line_history} - known)
        if missing:
            raise ConsistencyError(f"line records name undeclared states {missing}", STATES_FILE)

    def samples(self, hour: int) -> Tuple[float, ...]:
        return self.load_samples[hour] if hour < len(self.load_samples) else ()


def _frame(path: Path, name: str) -> pd.DataFrame:
    try:
        df = pd.read_csv(path)
    except pd.errors.EmptyDataError:
        df = pd.DataFrame(columns=list(_COLUMNS[name]))
    missing = [c for c in _COLUMNS[name] if c not in df.columns]
    if missing:
        raise SchemaError(name, f"missing columns {missing}")
    return df


def _hour_of(value: Any, name: str, horizon: int) -> int:
    hour = int(value)
    if not 0 <= hour < horizon:
        raise ConsistencyError(f"hour {hour} outside [0, {horizon})", name)
    return hour


def load_history(directory: Union[str, Path], horizon: int) -> HistoryBundle:
    """Read a history directory; missing optional files give empty parts."""
    root = Path(directory)
    if not (root / LOADS_FILE).exists():
        raise SchemaError(str(root / LOADS_FILE), "file not found")

    loads: List[List[float]] = [[] for _ in range(horizon)]
    for row in _frame(root / LOADS_FILE, LOADS_FILE).itertuples(index=False):
        loads[_hour_of(row.hour, LOADS_FILE, horizon)].append(float(row.sample_kwh))

    states: Dict[str, List[Tuple[str, str]]] = {}
    if (root / STATES_FILE).exists():
        for row in _frame(root / STATES_FILE, STATES_FILE).itertuples(index=False):
            states.setdefault(str(row.state_id), []).append((str(row.workshop), str(row.option)))

    records: List[LineRecord] = []
    if (root / LINES_FILE).exists():
        for row in _frame(root / LINES_FILE, LINES_FILE).itertuples(index=False):
            records.append(
                LineRecord(_hour_of(row.hour, LINES_FILE, horizon), str(row.state_id), float(row.count), float(row.ratio))
            )

    rtp = None
    if (root / RTP_FILE).exists():
        prices = [0.0] * horizon
        for row in _frame(root / RTP_FILE, RTP_FILE).itertuples(index=False):
            prices[_hour_of(row.hour, RTP_FILE, horizon)] = float(row.price)
        rtp = tuple(prices)

    ddu = read_json(root / DDU_FILE) if (root / DDU_FILE).exists() else {}
    bundle = HistoryBundle(
        horizon=horizon,
        load_samples=tuple(tuple(v) for v in loads),
        line_history=tuple(records),
        states=tuple(LineState(sid, tuple(members)) for sid, members in states.items()),
        rtp_profile=rtp,
        ddu=ddu,
    )
    logger.info(
        "history %s: %d load samples, %d line records, %d states",
        root,
        sum(len(v) for v in loads),
        len(records),
        len(bundle.states),
    )
    return bundle


def save_history(bundle: HistoryBundle, directory: Union[str, Path]) -> Path:
    """Write a bundle in the layout ``load_history`` reads; rows keep bundle order."""
    root = ensure_dir(directory)
    loads = [(h, v) for h, values in enumerate(bundle.load_samples) for v in values]
    pd.DataFrame(loads, columns=list(_COLUMNS[LOADS_FILE])).to_csv(root / LOADS_FILE, index=False, lineterminator="\n")
    lines = [(r.hour, r.state_id, r.count, r.ratio) for r in bundle.line_history]
    pd.DataFrame(lines, columns=list(_COLUMNS[LINES_FILE])).to_csv(root / LINES_FILE, index=False, lineterminator="\n")
    members = [(s.id, n, p) for s in bundle.states for n, p in s.members]
    pd.DataFrame(members, columns=list(_COLUMNS[STATES_FILE])).to_csv(root / STATES_FILE, index=False, lineterminator="\n")
    if bundle.rtp_profile is not None:
        prices = list(enumerate(bundle.rtp_profile))
        pd.DataFrame(prices, columns=list(_COLUMNS[RTP_FILE])).to_csv(root / RTP_FILE, index=False, lineterminator="\n")
    if bundle.ddu:
        write_json(root / DDU_FILE, dict(bundle.ddu))
    return root


def history_from_samples(
    horizon: int,
    load_samples: Sequence[Sequence[float]],
    line_history: Sequence[LineRecord] = (),
    states: Sequence[LineState] = (),
    rtp_profile: Optional[Sequence[float]] = None,
    ddu: Optional[Mapping[str, Any]] = None,
) -> HistoryBundle:
    return HistoryBundle(
        horizon,
        tuple(tuple(float(v) for v in values) for values in load_samples),
        tuple(line_history),
        tuple(states),
        None if rtp_profile is None else tuple(float(p) for p in rtp_profile),
        dict(ddu or {}),
    )
