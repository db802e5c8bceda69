"""
Out-of-sample evaluation of a co-schedule.

Every trial draws realized yields, an expected-load profile and line-state
probabilities, replays the dispatch of the nearest worst-case corner and
prices the result with the simulator. All draws happen up front from one
PCG64 generator; trials then run in any order.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from cosched.ddccg.driver import CoSchedule
from cosched.ddu import DduSpec, FrMomentModel, ProductStructureIdm, YieldAmbiguity, fr_box, idm_interval
from cosched.ddu.idm import state_visited
from cosched.ddu.yield_ambiguity import alpha_value
from cosched.factory.model import COST_TERMS, CostReport, EnergyDispatch, FactoryGraph, UncertaintyRealization
from cosched.factory.simulate import simulate_schedule
from cosched.processing.background import BackgroundEvaluator
from cosched.scenario.synthetic import rng_for
from cosched.utils.util import chunked

logger = logging.getLogger(__name__)

LOAD_LAWS = ("gaussian", "two_point", "nominal")
YIELD_LAWS = ("uniform", "worst")
TRUNCATION = 4.0


@dataclass(frozen=True)
class SamplerConfig:
    load_law: str = "gaussian"
    yield_law: str = "uniform"
    truncation: float = TRUNCATION

    def __post_init__(self):
        if self.load_law not in LOAD_LAWS:
            raise ValueError(f"unknown load law {self.load_law!r}")
        if self.yield_law not in YIELD_LAWS:
            raise ValueError(f"unknown yield law {self.yield_law!r}")


@dataclass
class McSummary:
    n: int
    seed: int
    mean_objective: float
    std_objective: float
    q05: float
    q95: float
    fr_violation_rate: float
    term_means: Dict[str, float]
    hourly_consumption_var: float = 0.0

    def to_dict(self) -> Dict[str, object]:
        return {
            "n": self.n,
            "seed": self.seed,
            "mean_objective": self.mean_objective,
            "std_objective": self.std_objective,
            "q05": self.q05,
            "q95": self.q95,
            "fr_violation_rate": self.fr_violation_rate,
            "term_means": dict(sorted(self.term_means.items())),
            "hourly_consumption_var": self.hourly_consumption_var,
        }


def _find(specs: Sequence[DduSpec], kind):
    return next((s for s in specs if isinstance(s, kind)), None)


def sample_loads(model: FrMomentModel, horizon: int, n: int, rng: np.random.Generator, config: SamplerConfig) -> np.ndarray:
    """
    ``n x horizon`` expected-load draws: Gaussian truncated at the configured
    number of standard deviations (by resampling), the two-point law that is
    extremal for the one-sided Chebyshev bound at tail mass ``epsilon / 2``,
    or the nominal mean.
    """
    mu = np.array([model.mean(h) for h in range(horizon)])
    sigma = np.array([model.std(h) for h in range(horizon)])
    if config.load_law == "nominal":
        return np.tile(mu, (n, 1))
    if config.load_law == "two_point":
        q = 0.5 * model.epsilon
        up = rng.random((n, horizon)) < q
        high = mu + sigma * math.sqrt((1.0 - q) / q)
        low = mu - sigma * math.sqrt(q / (1.0 - q))
        return np.where(up, high, low)
    z = rng.standard_normal((n, horizon))
    outside = np.abs(z) > config.truncation
    while outside.any():
        z[outside] = rng.standard_normal(int(outside.sum()))
        outside = np.abs(z) > config.truncation
    return mu + sigma * z


def sample_yields(
    spec: Optional[YieldAmbiguity],
    co: CoSchedule,
    n: int,
    rng: np.random.Generator,
    config: SamplerConfig,
) -> List[Dict[Tuple[int, str, str], float]]:
    """Yields of the corrected options the schedule runs, uniform between the worst case and 1."""
    if spec is None:
        return [{} for _ in range(n)]
    schedule = co.schedule
    slots = [(h, n_, p) for h, n_, p in schedule.triplets() if spec.is_corrected((n_, p))]
    worst = np.array([alpha_value(spec, (n_, p), schedule.active_at(h)) for h, n_, p in slots])
    if config.yield_law == "worst" or not slots:
        draws = np.tile(worst, (n, 1))
    else:
        draws = worst + (1.0 - worst) * rng.random((n, len(slots)))
    return [{slot: float(a) for slot, a in zip(slots, row)} for row in draws]


def posterior_theta(idm: ProductStructureIdm, hour: int) -> np.ndarray:
    """Dirichlet posterior mean of each state, clipped into its confidence band."""
    total = idm.total(hour)
    theta = np.empty(len(idm.states))
    for i in range(len(idm.states)):
        mean = (idm.count(hour, i) + idm.s * idm.priors[i]) / (total + idm.s)
        band = idm_interval(idm, i, hour)
        theta[i] = min(max(mean, band.lo), band.hi)
    return theta


def realized_zeta(idm: Optional[ProductStructureIdm], co: CoSchedule, horizon: int) -> Optional[Tuple[float, ...]]:
    if idm is None:
        return None
    out = []
    for h in range(horizon):
        theta = posterior_theta(idm, h)
        active = co.schedule.active_at(h)
        z = sum(idm.ratios[i] * theta[i] for i in idm.weighted() if state_visited(idm.states[i], active))
        out.append(min(1.0, float(z)))
    return tuple(out)


def nearest_dispatch(co: CoSchedule, load: Optional[Sequence[float]]) -> EnergyDispatch:
    """Policy dispatch of the corner closest to ``load`` in the 1-norm; ties to the first corner."""
    if load is None or len(co.dispatch_policy) <= 1:
        return co.dispatch
    best_key, best_dist = None, math.inf
    for corner in sorted(co.dispatch_policy):
        dist = sum(abs(a - b) for a, b in zip(corner, load))
        if dist < best_dist:
            best_key, best_dist = corner, dist
    return co.dispatch_policy[best_key]


def monte_carlo_eval(
    graph: FactoryGraph,
    co: CoSchedule,
    specs: Sequence[DduSpec],
    n: int,
    seed: int,
    config: SamplerConfig = SamplerConfig(),
    workers: Optional[int] = None,
) -> McSummary:
    """
    Mean, spread and quantiles of the simulated objective over ``n`` draws,
    the per-term means, and the share of hourly loads outside the
    frequency-regulation box.
    """
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    H = graph.horizon
    rng = rng_for(seed)
    fr = _find(specs, FrMomentModel)
    yields = _find(specs, YieldAmbiguity)
    idm = _find(specs, ProductStructureIdm)

    loads = sample_loads(fr, H, n, rng, config) if fr is not None else None
    yield_draws = sample_yields(yields, co, n, rng, config)
    zeta = realized_zeta(idm, co, H)

    def trial(j: int) -> CostReport:
        load = None if loads is None else tuple(float(v) for v in loads[j])
        real = UncertaintyRealization(yield_draws[j], load, zeta)
        return simulate_schedule(graph, co.schedule, nearest_dispatch(co, load), real)

    reports: List[CostReport] = []
    with BackgroundEvaluator(workers) as evaluator:
        for chunk in chunked(range(n), 256):
            reports += evaluator.map(trial, chunk)

    objective = np.array([r.objective for r in reports])
    violation = 0.0
    if loads is not None:
        lower, upper = fr_box(fr, H)
        violation = float(np.mean((loads < lower - 1e-12) | (loads > upper + 1e-12)))
    consumption = np.array(reports[0].hourly["consumption"])
    summary = McSummary(
        n=n,
        seed=seed,
        mean_objective=float(np.mean(objective)),
        std_objective=float(np.std(objective)),
        q05=float(np.quantile(objective, 0.05)),
        q95=float(np.quantile(objective, 0.95)),
        fr_violation_rate=violation,
        term_means={term: float(np.mean([getattr(r, term) for r in reports])) for term in COST_TERMS},
        hourly_consumption_var=float(np.var(consumption)),
    )
    logger.info("monte carlo: %d trials, mean objective %.6f, FR violation rate %.4f", n, summary.mean_objective, violation)
    return summary
