"""
Moment-based ambiguity of the hourly load and the frequency-regulation box.

The hourly load is described by its historical mean and standard deviation;
the ambiguity set allows the mean to move by up to ``sqrt(gamma1 * sigma)``
and bounds the second moment by ``gamma2 * sigma``. A chance constraint with
violation probability ``epsilon`` on that set becomes a deterministic box of
half-width ``fr_delta`` around the expected consumption.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from cosched.ddu.special import norm_ppf
from cosched.errors import DomainError, EmptySample

logger = logging.getLogger(__name__)

QUANTILE_RULES = ("gaussian", "cantelli")


@dataclass(frozen=True)
class FrMomentModel:
    mu: Tuple[float, ...]
    sigma: Tuple[float, ...]
    drift_k: float = 0.0
    drift_b: float = 0.0
    gamma1: float = 0.0
    gamma2: float = 1.0
    epsilon: float = 0.05
    samples_per_hour: Tuple[int, ...] = ()
    quantile_rule: str = "gaussian"
    coupled_to: Tuple[str, ...] = ("E_EU", "E_LU")

    def __post_init__(self):
        if len(self.mu) != len(self.sigma):
            raise DomainError(f"mu has {len(self.mu)} hours but sigma has {len(self.sigma)}")
        if any(s < 0.0 for s in self.sigma):
            raise DomainError("sigma must be nonnegative")
        if self.gamma1 < 0.0:
            raise DomainError(f"gamma1 must be nonnegative, got {self.gamma1}")
        if self.gamma2 < 0.0:
            raise DomainError(f"gamma2 * sigma must be nonnegative, got gamma2={self.gamma2}")
        if not 0.0 < self.epsilon < 1.0:
            raise DomainError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.quantile_rule not in QUANTILE_RULES:
            raise DomainError(f"unknown quantile rule {self.quantile_rule!r}")

    @property
    def horizon(self) -> int:
        return len(self.mu)

    def mean(self, hour: int) -> float:
        return self.mu[hour] if hour < len(self.mu) else 0.0

    def std(self, hour: int) -> float:
        return self.sigma[hour] if hour < len(self.sigma) else 0.0


def estimate_moments(samples: Sequence[float]) -> Tuple[float, float]:
    """Population mean and standard deviation (divides by the sample count)."""
    values = np.asarray(samples, dtype=float)
    if values.size == 0:
        raise EmptySample("at least one load sample is required")
    mu = float(np.mean(values))
    sigma = float(np.sqrt(np.mean((values - mu) ** 2)))
    return mu, sigma


def cantelli_bound(offset: float, sigma0: float) -> float:
    """
    One-sided Cantelli probability ``offset**2 / (sigma0**2 + offset**2)``.

    This is the guaranteed lower bound of ``P(X <= mu0 + offset)`` over all
    laws with mean ``mu0`` and standard deviation ``sigma0``.
    """
    if offset < 0.0:
        raise DomainError(f"Cantelli bound needs a nonnegative offset, got {offset}")
    if sigma0 < 0.0:
        raise DomainError(f"sigma0 must be nonnegative, got {sigma0}")
    if sigma0 == 0.0:
        return 1.0
    if offset == 0.0:
        return 0.0
    return offset * offset / (sigma0 * sigma0 + offset * offset)


def cantelli_factor(epsilon: float) -> float:
    """Offset, in standard deviations, at which each tail is at most ``epsilon / 2``."""
    tail = 0.5 * epsilon
    return math.sqrt((1.0 - tail) / tail)


def quantile_factor(model: FrMomentModel) -> float:
    if model.quantile_rule == "cantelli":
        return cantelli_factor(model.epsilon)
    return norm_ppf(1.0 - 0.5 * model.epsilon)


def fr_width(mu_cap: float, var_cap: float, quantile: float, drift: float = 0.0) -> float:
    """
    ``|drift| + mu1 + quantile * sigma1`` at the worst moments of the set:
    the full mean shift ``mu1 = mu_cap`` and the variance left over,
    ``sigma1**2 = max(0, var_cap - mu1**2)``. Floored at zero.
    """
    mu1 = max(mu_cap, 0.0)
    sigma1 = math.sqrt(max(0.0, var_cap - mu1 * mu1))
    return max(0.0, abs(drift) + mu1 + quantile * sigma1)


def fr_delta(model: FrMomentModel, hour: int, net_load_proxy: Optional[float] = None) -> float:
    """
    Half-width of the frequency-regulation box at ``hour``.

    The drift ``K * proxy + B`` shifts the mean; the proxy defaults to the
    historical mean of the hour.
    """
    sigma = model.std(hour)
    proxy = model.mean(hour) if net_load_proxy is None else net_load_proxy
    drift = model.drift_k * proxy + model.drift_b
    mu_cap = math.sqrt(model.gamma1 * sigma)
    var_cap = model.gamma2 * sigma
    return fr_width(mu_cap, var_cap, quantile_factor(model), drift)


def fr_box(model: FrMomentModel, horizon: int) -> Tuple[np.ndarray, np.ndarray]:
    """Lower and upper corners of the per-hour expected-consumption box."""
    centre = np.array([model.mean(h) for h in range(horizon)])
    width = np.array([fr_delta(model, h) for h in range(horizon)])
    return centre - width, centre + width
