"""
Fit the uncertainty models from a history bundle, and read/write them as JSON.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Mapping, Optional, Tuple

from cosched.ddu import DduSpec, FrMomentModel, LineState, ProductStructureIdm, YieldAmbiguity, YieldCombo, estimate_moments
from cosched.errors import MissingHour, SchemaError
from cosched.scenario.history import HistoryBundle

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FitKnobs:
    """Fitting parameters; values in the bundle's ``ddu.json`` override the defaults, flags override both."""

    gamma: float = 0.95
    s: float = 1.0
    gamma1: float = 0.0
    gamma2: float = 1.0
    epsilon: float = 0.05
    drift_k: float = 0.0
    drift_b: float = 0.0
    quantile_rule: str = "gaussian"
    ratio_threshold: float = 0.0

    def merged(self, overrides: Mapping[str, Any]) -> "FitKnobs":
        values = {k: v for k, v in self.__dict__.items()}
        for key, value in overrides.items():
            if key in values and value is not None:
                values[key] = type(values[key])(value)
        return FitKnobs(**values)


def _state_ratios(bundle: HistoryBundle) -> Tuple[float, ...]:
    """Mean recorded ratio of every declared state; states never recorded get 0."""
    ratios = []
    for state in bundle.states:
        seen = [r.ratio for r in bundle.line_history if r.state_id == state.id]
        ratios.append(sum(seen) / len(seen) if seen else 0.0)
    return tuple(ratios)


def fit_idm(bundle: HistoryBundle, knobs: FitKnobs = FitKnobs()) -> Optional[ProductStructureIdm]:
    if not bundle.states:
        return None
    index = {s.id: i for i, s in enumerate(bundle.states)}
    counts = [[0.0] * len(bundle.states) for _ in range(bundle.horizon)]
    for record in bundle.line_history:
        counts[record.hour][index[record.state_id]] += record.count
    return ProductStructureIdm(
        states=bundle.states,
        ratios=_state_ratios(bundle),
        hist_counts=tuple(tuple(row) for row in counts),
        rt_counts=(),
        s=knobs.s,
        gamma=knobs.gamma,
        ratio_threshold=knobs.ratio_threshold,
    )


def fit_moments(bundle: HistoryBundle, knobs: FitKnobs = FitKnobs()) -> FrMomentModel:
    mu: List[float] = []
    sigma: List[float] = []
    counts: List[int] = []
    for hour in range(bundle.horizon):
        samples = bundle.samples(hour)
        if not samples:
            raise MissingHour(hour, "load")
        m, s = estimate_moments(samples)
        mu.append(m)
        sigma.append(s)
        counts.append(len(samples))
    return FrMomentModel(
        mu=tuple(mu),
        sigma=tuple(sigma),
        drift_k=knobs.drift_k,
        drift_b=knobs.drift_b,
        gamma1=knobs.gamma1,
        gamma2=knobs.gamma2,
        epsilon=knobs.epsilon,
        samples_per_hour=tuple(counts),
        quantile_rule=knobs.quantile_rule,
    )


def fit_ddu_params(
    bundle: HistoryBundle,
    overrides: Optional[Mapping[str, Any]] = None,
) -> Tuple[FrMomentModel, Optional[ProductStructureIdm]]:
    """
    Moments of the hourly load and the line-state model from a history.

    Every hour of the horizon needs at least one load sample. The line-state
    counts become the historical counts; the real-time counts start empty.
    """
    knobs = FitKnobs().merged(bundle.ddu.get("knobs", {})).merged(overrides or {})
    fr = fit_moments(bundle, knobs)
    idm = fit_idm(bundle, knobs)
    logger.info("fitted load moments for %d hours and %d line states", fr.horizon, 0 if idm is None else len(idm.states))
    return fr, idm


def _key(item) -> Tuple[str, str]:
    return str(item[0]), str(item[1])


def yields_from_dict(doc: Optional[Mapping[str, Any]]) -> Optional[YieldAmbiguity]:
    if not doc:
        return None
    try:
        floors = {_key(item): float(item[2]) for item in doc.get("floors", [])}
        combos = tuple(
            YieldCombo(
                tuple(_key(m) for m in c["members"]),
                float(c["delta"]),
                tuple(_key(t) for t in c.get("targets", [])),
            )
            for c in doc.get("combos", [])
        )
        corrected = tuple(_key(k) for k in doc.get("corrected", [[n, p] for n, p, _ in doc.get("floors", [])]))
    except (KeyError, IndexError, TypeError, ValueError) as e:
        raise SchemaError("$.yield", f"malformed yield model: {e}") from e
    return YieldAmbiguity(floors, combos, corrected)


def yields_to_dict(spec: YieldAmbiguity) -> Dict[str, Any]:
    return {
        "floors": [[n, p, a] for (n, p), a in sorted(spec.alpha_floor.items())],
        "combos": [
            {"members": [list(m) for m in c.members], "delta": c.delta, "targets": [list(t) for t in c.targets]}
            for c in spec.combos
        ],
        "corrected": [list(k) for k in spec.corrected_set],
    }


def fr_to_dict(model: FrMomentModel) -> Dict[str, Any]:
    return {
        "mu": list(model.mu),
        "sigma": list(model.sigma),
        "drift_k": model.drift_k,
        "drift_b": model.drift_b,
        "gamma1": model.gamma1,
        "gamma2": model.gamma2,
        "epsilon": model.epsilon,
        "samples_per_hour": list(model.samples_per_hour),
        "quantile_rule": model.quantile_rule,
    }


def fr_from_dict(doc: Mapping[str, Any]) -> FrMomentModel:
    return FrMomentModel(
        mu=tuple(float(v) for v in doc["mu"]),
        sigma=tuple(float(v) for v in doc["sigma"]),
        drift_k=float(doc.get("drift_k", 0.0)),
        drift_b=float(doc.get("drift_b", 0.0)),
        gamma1=float(doc.get("gamma1", 0.0)),
        gamma2=float(doc.get("gamma2", 1.0)),
        epsilon=float(doc.get("epsilon", 0.05)),
        samples_per_hour=tuple(int(v) for v in doc.get("samples_per_hour", [])),
        quantile_rule=str(doc.get("quantile_rule", "gaussian")),
    )


def idm_to_dict(spec: ProductStructureIdm) -> Dict[str, Any]:
    return {
        "states": [{"id": s.id, "members": [list(m) for m in s.members]} for s in spec.states],
        "ratios": list(spec.ratios),
        "hist_counts": [list(row) for row in spec.hist_counts],
        "rt_counts": [list(row) for row in spec.rt_counts],
        "s": spec.s,
        "gamma": spec.gamma,
        "priors": list(spec.priors),
        "ratio_threshold": spec.ratio_threshold,
    }


def idm_from_dict(doc: Mapping[str, Any]) -> ProductStructureIdm:
    return ProductStructureIdm(
        states=tuple(LineState(str(s["id"]), tuple(_key(m) for m in s["members"])) for s in doc["states"]),
        ratios=tuple(float(v) for v in doc["ratios"]),
        hist_counts=tuple(tuple(float(c) for c in row) for row in doc.get("hist_counts", [])),
        rt_counts=tuple(tuple(float(c) for c in row) for row in doc.get("rt_counts", [])),
        s=float(doc.get("s", 1.0)),
        gamma=float(doc.get("gamma", 0.95)),
        priors=tuple(float(v) for v in doc.get("priors", [])),
        ratio_threshold=float(doc.get("ratio_threshold", 0.0)),
    )


def specs_to_dict(specs: List[DduSpec]) -> Dict[str, Any]:
    out: Dict[str, Any] = {}
    for spec in specs:
        if isinstance(spec, FrMomentModel):
            out["fr"] = fr_to_dict(spec)
        elif isinstance(spec, ProductStructureIdm):
            out["idm"] = idm_to_dict(spec)
        elif isinstance(spec, YieldAmbiguity):
            out["yield"] = yields_to_dict(spec)
    return out


def specs_from_dict(doc: Mapping[str, Any]) -> List[DduSpec]:
    """Specs in the order yield model, line-state model, load model; absent parts are skipped."""
    specs: List[DduSpec] = []
    try:
        yields = yields_from_dict(doc.get("yield"))
        if yields is not None:
            specs.append(yields)
        if doc.get("idm"):
            specs.append(idm_from_dict(doc["idm"]))
        if doc.get("fr"):
            specs.append(fr_from_dict(doc["fr"]))
    except (KeyError, TypeError, ValueError) as e:
        raise SchemaError("$", f"malformed uncertainty document: {e}") from e
    return specs


def fit_specs(bundle: HistoryBundle, overrides: Optional[Mapping[str, Any]] = None) -> List[DduSpec]:
    """Every model a history supports: the yield model of ``ddu.json`` plus the fitted ones."""
    fr, idm = fit_ddu_params(bundle, overrides)
    specs: List[DduSpec] = []
    yields = yields_from_dict(bundle.ddu.get("yield"))
    if yields is not None:
        specs.append(yields)
    if idm is not None:
        specs.append(idm)
    specs.append(fr)
    return specs
