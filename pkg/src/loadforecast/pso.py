"""Particle swarm optimisation with optional chaotic (improved Tent map) initialisation.

Plain PSO and the chaos-initialised variant share every line of the
update loop; they differ only in how the first generation is placed.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from . import elm as elm_core
from .metrics import mape
from .series import ScalingParams, SupervisedDataset, minmax_invert

# child indices of the master SeedSequence
INIT_STREAM, STEP_STREAM, BETA_STREAM = 0, 1, 2


class InitMode(str, enum.Enum):
    UNIFORM = "uniform-random"
    TENT = "tent-chaos"


@dataclass(frozen=True)
class ChaosConfig:
    chaos_coefficient: float = 2.0
    shrink_factor: float = 0.1
    beta_a: float = 3.0
    beta_b: float = 4.0

    def __post_init__(self):
        if not self.chaos_coefficient > 0:
            raise ValueError("chaos_coefficient must be > 0")
        if self.shrink_factor < 0:
            raise ValueError("shrink_factor must be >= 0")
        if not (self.beta_a > 0 and self.beta_b > 0):
            raise ValueError("beta shape parameters must be > 0")


@dataclass(frozen=True)
class PsoConfig:
    bounds_low: np.ndarray
    bounds_high: np.ndarray
    population: int = 30
    iterations: int = 100
    cognitive: float = 1.5
    social: float = 1.5
    inertia: float = 0.8
    velocity_clamp_fraction: float = 0.5
    init_mode: InitMode = InitMode.TENT

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.bounds_low, dtype=float))
        hi = np.atleast_1d(np.asarray(self.bounds_high, dtype=float))
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("bounds must be 1-D arrays of equal length")
        if not np.all(lo < hi):
            raise ValueError("every lower bound must be below its upper bound")
        if self.population < 2:
            raise ValueError("population must be >= 2")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not 0 < self.velocity_clamp_fraction <= 1:
            raise ValueError("velocity_clamp_fraction must lie in (0, 1]")
        object.__setattr__(self, "bounds_low", lo)
        object.__setattr__(self, "bounds_high", hi)
        object.__setattr__(self, "init_mode", InitMode(self.init_mode))

    @property
    def dimension(self) -> int:
        return self.bounds_low.size

    @property
    def v_max(self) -> np.ndarray:
        return self.velocity_clamp_fraction * (self.bounds_high - self.bounds_low)


@dataclass(frozen=True)
class Particle:
    position: np.ndarray
    velocity: np.ndarray
    personal_best: np.ndarray
    personal_best_fitness: float


@dataclass
class Swarm:
    """Population state stored column-wise: row ``i`` of each array is particle ``i``."""

    positions: np.ndarray
    velocities: np.ndarray
    personal_best: np.ndarray
    personal_best_fitness: np.ndarray
    global_best: np.ndarray
    global_best_fitness: float
    history: list[float] = field(default_factory=list)
    nonfinite_evaluations: int = 0

    @property
    def size(self) -> int:
        return self.positions.shape[0]

    def particle(self, i: int) -> Particle:
        return Particle(
            self.positions[i].copy(),
            self.velocities[i].copy(),
            self.personal_best[i].copy(),
            float(self.personal_best_fitness[i]),
        )


@dataclass(frozen=True)
class OptimizeResult:
    best_position: np.ndarray
    best_fitness: float
    history: tuple[float, ...]
    nonfinite_evaluations: int = 0


def seed_streams(seed) -> list[np.random.SeedSequence]:
    """Independent child sequences for the init, step and beta-noise streams."""
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return root.spawn(3)


def beta_sample(m: float, n: float, rng: np.random.Generator, size=None):
    """Beta(m, n) draws as the ratio ``X / (X + Y)`` of gamma variates."""
    if not (m > 0 and n > 0):
        raise ValueError("beta shape parameters must be > 0")
    x = rng.standard_gamma(m, size=size)
    y = rng.standard_gamma(n, size=size)
    return x / (x + y)


def tent_next(y, chaos: ChaosConfig, rng: np.random.Generator):
    """One step of the noise-perturbed Tent map, wrapped back into ``[0, 1)``."""
    y = np.asarray(y, dtype=float)
    noise = beta_sample(chaos.beta_a, chaos.beta_b, rng, size=y.shape) if chaos.shrink_factor else 0.0
    eta = chaos.chaos_coefficient
    raw = np.where(y < 0.5, eta * y, eta * (1.0 - y)) + chaos.shrink_factor * noise
    out = np.mod(raw, 1.0)
    return float(out) if out.ndim == 0 else out


def tent_init(population: int, dimension: int, bounds, chaos: ChaosConfig, seed) -> np.ndarray:
    """Initial positions from one chaotic Tent chain per dimension.

    Particle ``i`` takes the chain's ``(i + 1)``-th value in every dimension,
    mapped linearly onto ``[low, high]``.
    """
    low, high = (np.broadcast_to(np.asarray(b, dtype=float), (dimension,)) for b in bounds)
    init_seq, _, beta_seq = seed_streams(seed)
    y = np.random.default_rng(init_seq).uniform(0.0, 1.0, dimension)
    beta_rng = np.random.default_rng(beta_seq)
    out = np.empty((population, dimension))
    for i in range(population):
        y = np.atleast_1d(tent_next(y, chaos, beta_rng))
        out[i] = low + y * (high - low)
    return out


def uniform_init(population: int, dimension: int, bounds, seed) -> np.ndarray:
    low, high = (np.broadcast_to(np.asarray(b, dtype=float), (dimension,)) for b in bounds)
    init_seq = seed_streams(seed)[INIT_STREAM]
    return np.random.default_rng(init_seq).uniform(low, high, size=(population, dimension))


def _evaluate(fitness, positions, map_fn) -> tuple[np.ndarray, int]:
    values = np.array([float(v) for v in map_fn(fitness, list(positions))])
    bad = ~np.isfinite(values)
    values[bad] = np.inf
    return values, int(bad.sum())


def init_swarm(fitness, config: PsoConfig, chaos: ChaosConfig, seed, map_fn=map) -> Swarm:
    bounds = (config.bounds_low, config.bounds_high)
    if config.init_mode is InitMode.TENT:
        positions = tent_init(config.population, config.dimension, bounds, chaos, seed)
    else:
        positions = uniform_init(config.population, config.dimension, bounds, seed)
    values, bad = _evaluate(fitness, positions, map_fn)
    best = int(np.argmin(values))
    return Swarm(
        positions=positions,
        velocities=np.zeros_like(positions),
        personal_best=positions.copy(),
        personal_best_fitness=values,
        global_best=positions[best].copy(),
        global_best_fitness=float(values[best]),
        history=[float(values[best])],
        nonfinite_evaluations=bad,
    )


def step(swarm: Swarm, fitness, config: PsoConfig, rngs, map_fn=map) -> Swarm:
    """Advance every particle once and refresh the personal/global bests in place.

    ``rngs`` holds one generator per particle; each supplies the
    per-dimension ``r1`` then ``r2`` draws for its particle.
    """
    d = config.dimension
    r1 = np.empty_like(swarm.positions)
    r2 = np.empty_like(swarm.positions)
    for i, rng in enumerate(rngs):
        r1[i] = rng.random(d)
        r2[i] = rng.random(d)

    x = swarm.positions
    v = (
        config.inertia * swarm.velocities
        + config.cognitive * r1 * (swarm.personal_best - x)
        + config.social * r2 * (swarm.global_best - x)
    )
    v_max = config.v_max
    v = np.clip(v, -v_max, v_max)
    x = np.clip(x + v, config.bounds_low, config.bounds_high)
    swarm.velocities = v
    swarm.positions = x

    values, bad = _evaluate(fitness, x, map_fn)
    if bad:
        swarm.nonfinite_evaluations += bad
        warnings.warn(f"{bad} non-finite fitness value(s) treated as +inf", RuntimeWarning, stacklevel=2)
    improved = values < swarm.personal_best_fitness
    swarm.personal_best[improved] = x[improved]
    swarm.personal_best_fitness[improved] = values[improved]

    best = int(np.argmin(swarm.personal_best_fitness))
    if swarm.personal_best_fitness[best] < swarm.global_best_fitness:
        swarm.global_best = swarm.personal_best[best].copy()
        swarm.global_best_fitness = float(swarm.personal_best_fitness[best])
    if swarm.history and swarm.global_best_fitness > swarm.history[-1]:
        raise AssertionError("global best fitness increased")
    swarm.history.append(swarm.global_best_fitness)
    return swarm


def optimize(
    fitness: Callable[[np.ndarray], float],
    config: PsoConfig,
    chaos: ChaosConfig = ChaosConfig(),
    seed=0,
    map_fn: Callable[..., Iterable] = map,
) -> OptimizeResult:
    """Minimise ``fitness`` over the box ``[bounds_low, bounds_high]``.

    ``map_fn`` evaluates one generation; any order-preserving map (for
    example ``ThreadPoolExecutor.map``) gives the same result as ``map``.
    """
    swarm = init_swarm(fitness, config, chaos, seed, map_fn)
    step_seq = seed_streams(seed)[STEP_STREAM]
    rngs = [np.random.default_rng(s) for s in step_seq.spawn(config.population)]
    for _ in range(config.iterations):
        step(swarm, fitness, config, rngs, map_fn)
    return OptimizeResult(
        best_position=swarm.global_best.copy(),
        best_fitness=swarm.global_best_fitness,
        history=tuple(swarm.history),
        nonfinite_evaluations=swarm.nonfinite_evaluations,
    )


def trace_csv(history) -> str:
    lines = ["iteration,gbest_fitness"] + [f"{i},{v!r}" for i, v in enumerate(history)]
    return "\n".join(lines) + "\n"


# -- ELM parameter search ---------------------------------------------------


def encode_elm(weights, biases) -> np.ndarray:
    return np.concatenate([np.asarray(weights, dtype=float).ravel(), np.asarray(biases, dtype=float).ravel()])


def decode_elm(position, hidden_count: int, input_dim: int) -> tuple[np.ndarray, np.ndarray]:
    position = np.asarray(position, dtype=float)
    expected = hidden_count * input_dim + hidden_count
    if position.shape != (expected,):
        raise ValueError(f"position length {position.size} != {expected} for M={hidden_count}, d={input_dim}")
    split = hidden_count * input_dim
    return position[:split].reshape(hidden_count, input_dim).copy(), position[split:].copy()


def elm_search_bounds(config: elm_core.ElmConfig, input_dim: int) -> tuple[np.ndarray, np.ndarray]:
    m = config.hidden_count
    n_w = m * input_dim
    low = np.concatenate([np.full(n_w, config.weight_range[0]), np.full(m, config.bias_range[0])])
    high = np.concatenate([np.full(n_w, config.weight_range[1]), np.full(m, config.bias_range[1])])
    return low, high


def elm_fitness(
    position,
    train_set: SupervisedDataset,
    validation_set: SupervisedDataset,
    elm_config: elm_core.ElmConfig,
    scaling: ScalingParams | None = None,
) -> float:
    """Validation MAPE (percent) of an ELM whose hidden layer is ``position``.

    With ``scaling`` given, predictions and targets are mapped back to raw
    units before the MAPE is taken.
    """
    d = train_set.features.shape[1]
    weights, biases = decode_elm(position, elm_config.hidden_count, d)
    model = elm_core.train(train_set.features, train_set.targets, weights, biases)
    predicted = elm_core.predict(model, validation_set.features)
    actual = validation_set.targets
    if scaling is not None:
        predicted = minmax_invert(predicted, scaling)
        actual = minmax_invert(actual, scaling)
    return mape(actual, predicted)


class ElmFitness:
    """Picklable fitness callable binding the datasets for :func:`elm_fitness`."""

    def __init__(self, train_set, validation_set, elm_config, scaling=None):
        self.train_set = train_set
        self.validation_set = validation_set
        self.elm_config = elm_config
        self.scaling = scaling

    def __call__(self, position) -> float:
        return elm_fitness(position, self.train_set, self.validation_set, self.elm_config, self.scaling)
