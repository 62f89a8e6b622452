"""Experimentation strategies: grid, seeded random, and Bayesian optimization.

The configuration space is finite by construction, so the Bayesian strategy
never optimizes its acquisition function continuously: it fits a Gaussian
process on the observations made so far and picks the remaining configuration
with the highest expected improvement. Kernel hyperparameters are fixed
(no marginal-likelihood tuning) to keep schedules deterministic for a given
seed.

Seeded choices use the stdlib Mersenne Twister; determinism is contractual
within one build of this package, not across implementations.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from .errors import EmptyRemainingError, InvalidBudgetError, NotPositiveDefiniteError
from .model import Configuration, Direction, VariabilityPoint

GRID_DEFAULT_LIMIT = 32  # spaces up to this size default to exhaustive search
DEFAULT_XI = 0.01
KERNEL_LENGTH_SCALE = 0.5
KERNEL_SIGNAL_VAR = 1.0
KERNEL_NOISE_VAR = 1e-4
MAX_JITTER = 1e-2


class StrategyKind(str, Enum):
    GRID = "grid"
    RANDOM = "random"
    BAYESIAN = "bayesian"


@dataclass(frozen=True)
class StrategySpec:
    kind: StrategyKind
    n: int | None = None
    init: int | None = None
    seed: int = 0
    xi: float = DEFAULT_XI


@dataclass(frozen=True)
class Intent:
    direction: Direction
    metric: str


def translate_intent(
    intent: Intent,
    strategy: StrategySpec | None,
    space_size: int,
) -> StrategySpec:
    """Pick the strategy that will pursue the intent.

    An explicit strategy is honored as-is (after budget validation). Without
    one, small spaces get exhaustive grid search and larger ones Bayesian
    optimization with a capped budget.
    """
    if strategy is not None:
        if strategy.kind in (StrategyKind.RANDOM, StrategyKind.BAYESIAN):
            if strategy.n is not None and strategy.n > space_size:
                raise InvalidBudgetError(strategy.n, space_size)
        return strategy
    if space_size <= GRID_DEFAULT_LIMIT:
        return StrategySpec(StrategyKind.GRID)
    return StrategySpec(
        StrategyKind.BAYESIAN,
        n=min(GRID_DEFAULT_LIMIT, space_size),
        init=5,
        seed=0,
        xi=DEFAULT_XI,
    )


def plan_static(strategy: StrategySpec, configs: Sequence[Configuration]) -> list[Configuration]:
    """Schedule for strategies that are fully decided up front."""
    if strategy.kind is StrategyKind.GRID:
        return list(configs)
    if strategy.kind is StrategyKind.RANDOM:
        n = min(strategy.n or len(configs), len(configs))
        return random.Random(strategy.seed).sample(list(configs), n)
    raise ValueError(f"not a static strategy: {strategy.kind.value}")


def sample_init(strategy: StrategySpec, configs: Sequence[Configuration]) -> list[Configuration]:
    """Seeded warm-up sample (without replacement) for the Bayesian phase."""
    k = min(strategy.init or 1, len(configs))
    return random.Random(strategy.seed).sample(list(configs), k)


# ---------------------------------------------------------------------------
# Configuration encoding
# ---------------------------------------------------------------------------

def _is_numeric_domain(vp: VariabilityPoint) -> bool:
    return all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in vp.domain)


def encode_config(
    vps: Sequence[VariabilityPoint], config: Configuration
) -> np.ndarray:
    """Map a configuration to a point in [0,1]^d.

    Numeric domains are min-max normalized over the declared domain;
    categorical domains (implementations, inputs, deployments) are one-hot.
    """
    dims: list[float] = []
    for vp in vps:
        value = config.assignment[vp.name]
        if _is_numeric_domain(vp):
            lo = min(vp.domain)
            hi = max(vp.domain)
            span = float(hi) - float(lo)
            dims.append((float(value) - float(lo)) / span if span > 0 else 0.0)
        else:
            for candidate in vp.domain:
                dims.append(1.0 if candidate == value else 0.0)
    return np.asarray(dims, dtype=np.float64)


# ---------------------------------------------------------------------------
# Gaussian-process surrogate
# ---------------------------------------------------------------------------

@dataclass
class SurrogateState:
    """Observations plus fixed kernel hyperparameters for the GP surrogate."""

    direction: Direction = Direction.MAXIMIZE
    length_scale: float = KERNEL_LENGTH_SCALE
    signal_var: float = KERNEL_SIGNAL_VAR
    noise_var: float = KERNEL_NOISE_VAR
    X: list[np.ndarray] = field(default_factory=list)
    y: list[float] = field(default_factory=list)
    _cache: dict | None = None

    def observe(self, x: np.ndarray, value: float) -> None:
        self.X.append(np.asarray(x, dtype=np.float64))
        self.y.append(float(value))
        self._cache = None

    @property
    def f_best(self) -> float:
        if not self.y:
            raise ValueError("no observations")
        return max(self.y) if self.direction is Direction.MAXIMIZE else min(self.y)


def _kernel_matrix(state: SurrogateState, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    # squared-exponential kernel on encoded points
    sq = np.sum(A * A, axis=1)[:, None] + np.sum(B * B, axis=1)[None, :] - 2.0 * (A @ B.T)
    sq = np.maximum(sq, 0.0)
    return state.signal_var * np.exp(-sq / (2.0 * state.length_scale**2))


def _fit(state: SurrogateState) -> dict:
    if state._cache is not None:
        return state._cache
    X = np.vstack(state.X)
    y = np.asarray(state.y, dtype=np.float64)
    mean = float(np.mean(y))
    sd = float(np.std(y))
    if sd < 1e-12:
        sd = 1.0
    z = (y - mean) / sd
    K = _kernel_matrix(state, X, X)
    noise = state.noise_var if state.noise_var > 0 else 1e-10
    while True:
        try:
            L = np.linalg.cholesky(K + noise * np.eye(len(y)))
            break
        except np.linalg.LinAlgError:
            if noise >= MAX_JITTER:
                raise NotPositiveDefiniteError(noise) from None
            noise *= 10.0
    alpha = np.linalg.solve(L.T, np.linalg.solve(L, z))
    state._cache = {"X": X, "mean": mean, "sd": sd, "L": L, "alpha": alpha}
    return state._cache


def gp_predict_batch(state: SurrogateState, queries: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Posterior mean and stddev at each query row, de-standardized."""
    fit = _fit(state)
    Ks = _kernel_matrix(state, fit["X"], np.atleast_2d(queries))
    mu_z = Ks.T @ fit["alpha"]
    v = np.linalg.solve(fit["L"], Ks)
    var_z = state.signal_var - np.sum(v * v, axis=0)
    var_z = np.maximum(var_z, 0.0)
    mu = fit["mean"] + fit["sd"] * mu_z
    sigma = fit["sd"] * np.sqrt(var_z)
    return mu, sigma


def gp_fit_predict(state: SurrogateState, query: np.ndarray) -> tuple[float, float]:
    """GP posterior (mean, stddev) at a single encoded point."""
    if not state.X:
        raise ValueError("surrogate has no observations")
    mu, sigma = gp_predict_batch(state, np.atleast_2d(np.asarray(query, dtype=np.float64)))
    return float(mu[0]), float(sigma[0])


def _norm_pdf(z: float) -> float:
    return math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)


def _norm_cdf(z: float) -> float:
    return 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))


def expected_improvement(
    mu: float,
    sigma: float,
    f_best: float,
    xi: float = DEFAULT_XI,
    direction: Direction = Direction.MAXIMIZE,
) -> float:
    """Closed-form expected improvement over the incumbent, never negative."""
    if direction is Direction.MINIMIZE:
        improve = f_best - mu - xi
    else:
        improve = mu - f_best - xi
    if sigma <= 0.0:
        return max(improve, 0.0)
    z = improve / sigma
    return max(improve * _norm_cdf(z) + sigma * _norm_pdf(z), 0.0)


def next_candidate_bo(
    state: SurrogateState,
    remaining: Sequence[Configuration],
    vps: Sequence[VariabilityPoint],
    xi: float = DEFAULT_XI,
) -> Configuration:
    """Pick the remaining configuration with the highest expected improvement.

    Exact ties go to the smallest ordinal, which keeps schedules reproducible.
    """
    if not remaining:
        raise EmptyRemainingError()
    encoded = np.vstack([encode_config(vps, c) for c in remaining])
    mu, sigma = gp_predict_batch(state, encoded)
    f_best = state.f_best
    best_idx = 0
    best_ei = -1.0
    for i, config in enumerate(remaining):
        ei = expected_improvement(float(mu[i]), float(sigma[i]), f_best, xi, state.direction)
        if ei > best_ei or (ei == best_ei and config.ordinal < remaining[best_idx].ordinal):
            best_ei = ei
            best_idx = i
    return remaining[best_idx]


# ---------------------------------------------------------------------------
# Knowledge-based pruning
# ---------------------------------------------------------------------------

def worseness_quantile(means: Sequence[float], direction: Direction, q: float) -> float:
    """The q-quantile of historical means, ordered from worst to best."""
    ordered = sorted(means, reverse=(direction is Direction.MINIMIZE))
    idx = max(math.ceil(q * len(ordered)) - 1, 0)
    return ordered[idx]


def prune_known_poor(
    configs: Sequence[Configuration],
    history_key: Callable[[Configuration], str],
    history: dict[str, float],
    direction: Direction,
    q: float = 0.5,
) -> tuple[list[Configuration], list[Configuration]]:
    """Split configurations into (kept, pruned) using historical means.

    A configuration is pruned when its recorded mean for the intent metric is
    strictly worse than the q-quantile of the recorded means among *configs*.
    Configurations without history are always kept: no evidence, no pruning.
    """
    if not 0.0 < q < 1.0:
        raise ValueError("q must be in (0, 1)")
    known = [(c, history[history_key(c)]) for c in configs if history_key(c) in history]
    if not known:
        return list(configs), []
    threshold = worseness_quantile([m for _, m in known], direction, q)

    def worse(a: float, b: float) -> bool:
        return a < b if direction is Direction.MAXIMIZE else a > b

    kept: list[Configuration] = []
    pruned: list[Configuration] = []
    for config in configs:
        key = history_key(config)
        if key in history and worse(history[key], threshold):
            pruned.append(config)
        else:
            kept.append(config)
    return kept, pruned
