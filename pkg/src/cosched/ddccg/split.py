"""
Assignment of variables, uncertainty models and objective terms to the
master problem and the sub-problem.

Production binaries and everything derived from them are first stage;
the battery, grid and by-product sales dispatch are second stage. Yield
ambiguity and the line-state model depend on the production binaries and
form the first-stage uncertainty W_X; the expected-load box depends on the
dispatch and forms W_Y.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from cosched import naming
from cosched.ddu import DduSpec, FrMomentModel, ProductStructureIdm, YieldAmbiguity
from cosched.ddu.fr_moment import fr_box
from cosched.ddu.idm import idm_interval
from cosched.errors import SplitError
from cosched.factory.model import FactoryGraph
from cosched.optkernel import Polytope, enumerate_extreme_points

logger = logging.getLogger(__name__)

FIRST_STAGE = frozenset({"I", "T", "E", "B", "alpha", "zeta", "theta"})
SECOND_STAGE = frozenset({"E_EU", "E_LU", "E_SU", "S", "E_net", "E_fr", "B_ss"})

MP_TERMS = ("equipment_cost",)
SP_TERMS = ("degradation_cost", "purchase_cost", "fr_penalty", "main_revenue", "by_revenue")

Scenario = Optional[Tuple[float, ...]]


@dataclass(frozen=True)
class ProblemSplit:
    graph: FactoryGraph
    x_vars: Tuple[str, ...]
    y_vars: Tuple[str, ...]
    wx_specs: Tuple[DduSpec, ...] = ()
    wy_spec: Optional[FrMomentModel] = None
    mp_terms: Tuple[str, ...] = MP_TERMS
    sp_terms: Tuple[str, ...] = SP_TERMS

    @property
    def yields(self) -> Optional[YieldAmbiguity]:
        return next((s for s in self.wx_specs if isinstance(s, YieldAmbiguity)), None)

    @property
    def idm(self) -> Optional[ProductStructureIdm]:
        return next((s for s in self.wx_specs if isinstance(s, ProductStructureIdm)), None)

    @property
    def degenerate(self) -> bool:
        """No W_X model: the loop is plain column-and-constraint generation."""
        return not self.wx_specs

    @property
    def zeta_side(self) -> str:
        """Endpoint of the theta bands that raises the sub-problem value."""
        return "lo" if self.graph.energy.sale_price_by >= 0.0 else "hi"

    def with_idm(self, idm: ProductStructureIdm) -> "ProblemSplit":
        specs = tuple(idm if isinstance(s, ProductStructureIdm) else s for s in self.wx_specs)
        return ProblemSplit(self.graph, self.x_vars, self.y_vars, specs, self.wy_spec, self.mp_terms, self.sp_terms)

    def zeta_max(self, hour: int) -> float:
        idm = self.idm
        if idm is None:
            return 1.0
        return sum(idm.ratios[i] * idm_interval(idm, i, hour).hi for i in idm.weighted())

    @property
    def psi_floor(self) -> float:
        """Lower bound of every sub-problem value: all revenue, no cost."""
        graph = self.graph
        es = graph.energy
        H = graph.horizon
        floor = 0.0
        finished = graph.finished_buffer
        if finished is not None:
            floor -= abs(es.sale_price_main) * graph.stock_cap(finished.id)
        zmax = max((self.zeta_max(h) for h in range(H)), default=1.0)
        for buf in graph.outlets:
            floor -= abs(es.sale_price_by) * graph.stock_cap(buf.id) * zmax
        floor -= H * es.bess_capacity * max(0.0, -es.degr_coeff)
        return floor - 1.0

    def fr_bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        if self.wy_spec is None:
            raise SplitError("no expected-load model in this split")
        return fr_box(self.wy_spec, self.graph.horizon)

    @cached_property
    def hour_vertices(self) -> Tuple[Tuple[float, ...], ...]:
        """Extreme points of each hour's expected-load interval (one or two values)."""
        lower, upper = self.fr_bounds()
        out = []
        for lo, hi in zip(lower, upper):
            points = enumerate_extreme_points(Polytope.box([lo], [hi]))
            out.append(tuple(sorted(float(p[0]) for p in points)))
        return tuple(out)

    def n_corners(self) -> int:
        if self.wy_spec is None:
            return 1
        return int(np.prod([len(v) for v in self.hour_vertices]))


def _stage_of(spec: DduSpec) -> str:
    coupled = set(spec.coupled_to)
    first = coupled & FIRST_STAGE
    second = coupled & SECOND_STAGE
    unknown = coupled - FIRST_STAGE - SECOND_STAGE
    name = type(spec).__name__
    if unknown:
        raise SplitError(f"{name} couples to unknown variables {sorted(unknown)}")
    if first and second:
        raise SplitError(f"{name} couples to both stages ({sorted(first)} and {sorted(second)})")
    if not first and not second:
        raise SplitError(f"{name} couples to no decision variable")
    return "x" if first else "y"


def _check_references(graph: FactoryGraph, spec: DduSpec) -> None:
    keys = set(graph.option_keys)
    if isinstance(spec, YieldAmbiguity):
        refs = list(spec.alpha_floor) + list(spec.corrected_set)
        for combo in spec.combos:
            refs += list(combo.members) + list(combo.targets)
        missing = sorted({r for r in refs if tuple(r) not in keys})
        if missing:
            raise SplitError(f"yield model references unknown options {missing}")
    elif isinstance(spec, ProductStructureIdm):
        for state in spec.states:
            missing = [m for m in state.members if tuple(m) not in keys]
            if missing:
                raise SplitError(f"line state {state.id} references unknown options {missing}")
        if sum(spec.ratios[i] for i in spec.weighted()) > 1.0 + 1e-12:
            raise SplitError("by-product ratios of the weighted line states sum to more than 1")
    elif isinstance(spec, FrMomentModel):
        if spec.horizon < graph.horizon:
            raise SplitError(f"load model covers {spec.horizon} hours, plant horizon is {graph.horizon}")


def recourse_names(graph: FactoryGraph, idm: Optional[ProductStructureIdm], with_fr: bool) -> List[str]:
    H = graph.horizon
    names: List[str] = []
    for h in range(H):
        names += [naming.E_EU(h), naming.E_LU(h), naming.E_SU(h), naming.E_net(h)]
        if with_fr:
            names.append(naming.E_fr(h))
        for buf in graph.outlets:
            names.append(naming.B_ss(h, buf.id))
            if idm is not None:
                names += [naming.byproduct_gate(h, buf.id, idm.states[i].id) for i in idm.weighted()]
    names += [naming.S(h) for h in range(H + 1)]
    return names


def split_problem(graph: FactoryGraph, specs: Iterable[DduSpec] = ()) -> ProblemSplit:
    wx: List[DduSpec] = []
    wy: Optional[FrMomentModel] = None
    seen = set()
    for spec in specs:
        if spec is None:
            continue
        kind = type(spec)
        if kind in seen:
            raise SplitError(f"more than one {kind.__name__} given")
        seen.add(kind)
        stage = _stage_of(spec)
        _check_references(graph, spec)
        if isinstance(spec, FrMomentModel):
            if stage != "y":
                raise SplitError("the expected-load model must couple to the dispatch variables")
            wy = spec
        else:
            if stage != "x":
                raise SplitError(f"{kind.__name__} must couple to the production binaries")
            wx.append(spec)
    wx.sort(key=lambda s: 0 if isinstance(s, YieldAmbiguity) else 1)
    H = graph.horizon
    x_vars = tuple(naming.I(h, n, p) for h in range(H) for n, p in graph.option_keys)
    idm = next((s for s in wx if isinstance(s, ProductStructureIdm)), None)
    split = ProblemSplit(graph, x_vars, tuple(recourse_names(graph, idm, wy is not None)), tuple(wx), wy)
    logger.info(
        "split: %d first-stage binaries, %d recourse variables, %d W_X models, W_Y %s",
        len(split.x_vars),
        len(split.y_vars),
        len(split.wx_specs),
        "present" if wy is not None else "absent",
    )
    return split


def corner_scenarios(split: ProblemSplit) -> List[Scenario]:
    """Every joint corner of the expected-load box, in lexicographic order (lower end first)."""
    if split.wy_spec is None:
        return [None]
    vertices = split.hour_vertices
    corners: List[Tuple[float, ...]] = [()]
    for values in vertices:
        corners = [c + (v,) for c in corners for v in values]
    return corners


def scenario_index(split: ProblemSplit, scenario: Sequence[float]) -> Tuple[int, ...]:
    """Per-hour vertex index of a corner (0 lower, 1 upper)."""
    vertices = split.hour_vertices
    return tuple(int(np.argmin([abs(v - s) for v in values])) for values, s in zip(vertices, scenario))
