"""Genetic evolution of illumination patterns from bucket measurements.

A population of ``N`` random patterns is measured against the object and
scored with a cost function normalized by the initial generation. Every
generation, ``M`` offspring are bred from rank-selected parent pairs with a
random binary template, mutated at a decaying rate, measured, and swapped in
for the ``M`` lowest-ranked members. Only offspring are measured, so a run
from scratch costs ``N + G*M`` bucket measurements. A warm-started frame
costs ``G*M``, plus ``N`` if the inherited population is re-measured.

The population is stored as stacked arrays and is always kept in rank order
(index 0 is the best member).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .imaging import (
    NOISELESS,
    NoiseModel,
    measure_buckets,
    pattern_weights,
    random_patterns,
)
from .metrics import psnr, ssim

__all__ = [
    "DegenerateBaselineError",
    "GaConfig",
    "CfBaseline",
    "PopulationMember",
    "Population",
    "EvolutionState",
    "GenerationRecord",
    "EvolutionTrace",
    "cost",
    "cost_binary",
    "cost_grayscale",
    "rank_order",
    "rank",
    "rank_probabilities",
    "select_parent_indices",
    "select_parents",
    "breed",
    "mutation_rate",
    "mutate",
    "init_population",
    "step_generation",
    "warm_start",
    "result_image",
    "evolve",
]


class DegenerateBaselineError(ValueError):
    """The initial generation gave a zero mean signal or zero mean weight."""


@dataclass(frozen=True)
class GaConfig:
    """Hyperparameters of one evolution.

    ``offspring`` defaults to ``population // 2`` and ``k`` to 1 (binary) or
    2 (grayscale). ``result_rule`` is ``"best-member"`` or ``"mean-of-top-q"``
    (averaging the ``top_q`` best patterns). ``remeasure_inherited``
    controls whether a warm-started frame re-measures the inherited
    population (see :func:`warm_start`).
    """

    population: int = 30
    generations: int = 1000
    offspring: Optional[int] = None
    k: Optional[int] = None
    mode: str = "binary"
    mutation_initial: float = 0.1
    mutation_final: float = 0.005
    mutation_decay: float = 300.0
    fill: float = 0.5
    result_rule: str = "best-member"
    top_q: int = 1
    remeasure_inherited: bool = True

    def __post_init__(self):
        if self.mode not in ("binary", "grayscale"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.offspring is None:
            object.__setattr__(self, "offspring", self.population // 2)
        if self.k is None:
            object.__setattr__(self, "k", 1 if self.mode == "binary" else 2)
        if self.population < 2:
            raise ValueError("population must hold at least 2 members")
        if self.generations < 0:
            raise ValueError("generations must be nonnegative")
        if not 1 <= self.offspring <= self.population:
            raise ValueError("offspring count must satisfy 1 <= M <= N")
        if int(self.k) != self.k or self.k < 1:
            raise ValueError("weight coefficient k must be a positive integer")
        if not (0 < self.mutation_final <= self.mutation_initial < 1):
            raise ValueError("mutation rates must satisfy 0 < final <= initial < 1")
        if self.mutation_decay <= 0:
            raise ValueError("mutation decay must be positive")
        if not 0.0 < self.fill < 1.0:
            raise ValueError("fill must lie in (0, 1)")
        if self.result_rule not in ("best-member", "mean-of-top-q"):
            raise ValueError(f"unknown result rule {self.result_rule!r}")
        if not 1 <= self.top_q <= self.population:
            raise ValueError("top_q must lie in [1, population]")

    @property
    def weight_order(self) -> int:
        return 1 if self.mode == "binary" else 2


@dataclass(frozen=True)
class CfBaseline:
    """Initial-generation means that normalize the cost function."""

    mean_signal_pow_k: float
    mean_weight: float
    order: int = 1
    k: int = 1

    def __post_init__(self):
        if not (self.mean_signal_pow_k > 0 and self.mean_weight > 0):
            raise DegenerateBaselineError(
                "initial generation has zero mean signal or zero mean pattern weight"
            )

    @classmethod
    def from_measurements(cls, signals, weights, order: int, k: int) -> "CfBaseline":
        signals = np.asarray(signals, dtype=np.float64)
        return cls(
            mean_signal_pow_k=float(np.mean(signals**k)),
            mean_weight=float(np.mean(weights)),
            order=order,
            k=k,
        )


def cost(signals, weights, baseline: CfBaseline) -> np.ndarray:
    """Vectorized cost ``S^k <W1> / (<S1^k> W)``; all-dark patterns score 0."""
    signals = np.asarray(signals, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    num = signals**baseline.k * baseline.mean_weight
    den = baseline.mean_signal_pow_k * weights
    return np.divide(num, den, out=np.zeros(np.broadcast(num, den).shape), where=den > 0)


def cost_binary(signal: float, weight: float, baseline: CfBaseline, k: int) -> float:
    """Cost of one binary pattern.

    >>> cost_binary(2.0, 4.0, CfBaseline(2.0, 4.0, order=1, k=2), k=2)
    2.0
    """
    if weight <= 0:
        return 0.0
    return (signal**k * baseline.mean_weight) / (baseline.mean_signal_pow_k * weight)


def cost_grayscale(signal: float, sq_weight: float, baseline: CfBaseline) -> float:
    """Cost of one grayscale pattern: squared signal over squared-pixel weight.

    ``baseline`` must be built from squared signals and ``sum(I**2)`` weights.
    """
    if baseline.order != 2:
        raise ValueError("grayscale cost needs a baseline built with weight order 2")
    if sq_weight <= 0:
        return 0.0
    return (signal**2 * baseline.mean_weight) / (baseline.mean_signal_pow_k * sq_weight)


@dataclass(frozen=True)
class PopulationMember:
    pattern: np.ndarray
    signal: float
    cf: float
    birth_generation: int


@dataclass
class Population:
    """Members stored as parallel arrays; ``ids`` record insertion order."""

    patterns: np.ndarray
    signals: np.ndarray
    weights: np.ndarray
    cfs: np.ndarray
    births: np.ndarray
    ids: np.ndarray

    def __len__(self) -> int:
        return len(self.cfs)

    def take(self, index) -> "Population":
        return Population(
            self.patterns[index],
            self.signals[index],
            self.weights[index],
            self.cfs[index],
            self.births[index],
            self.ids[index],
        )

    def member(self, i: int) -> PopulationMember:
        return PopulationMember(
            self.patterns[i], float(self.signals[i]), float(self.cfs[i]), int(self.births[i])
        )

    def members(self) -> list[PopulationMember]:
        return [self.member(i) for i in range(len(self))]

    @staticmethod
    def concat(a: "Population", b: "Population") -> "Population":
        return Population(
            *(np.concatenate([x, y]) for x, y in zip(a._fields(), b._fields()))
        )

    def _fields(self):
        return (self.patterns, self.signals, self.weights, self.cfs, self.births, self.ids)


def rank_order(cfs, births, ids) -> np.ndarray:
    """Indices sorting members by descending cf, then older birth, then insertion."""
    return np.lexsort((np.asarray(ids), np.asarray(births), -np.asarray(cfs, dtype=np.float64)))


def rank(population: Population) -> Population:
    if len(population) == 0:
        raise ValueError("cannot rank an empty population")
    return population.take(rank_order(population.cfs, population.births, population.ids))


def rank_probabilities(n: int) -> np.ndarray:
    """Linear rank law: rank r (1 = best) is picked with weight ``n - r + 1``."""
    w = np.arange(n, 0, -1, dtype=np.float64)
    return w / w.sum()


def select_parent_indices(n: int, count: int, rng: np.random.Generator):
    """Draw ``count`` distinct (ma, pa) rank-index pairs from a ranked population.

    All first parents are drawn, then all second parents; second parents
    that collide with their partner are redrawn in index order until none do.
    """
    if n < 2:
        raise ValueError("parent selection needs at least 2 members")
    p = rank_probabilities(n)
    ma = rng.choice(n, size=count, p=p)
    pa = rng.choice(n, size=count, p=p)
    clash = np.flatnonzero(ma == pa)
    while clash.size:
        pa[clash] = rng.choice(n, size=clash.size, p=p)
        clash = clash[ma[clash] == pa[clash]]
    return ma, pa


def select_parents(population: Population, rng: np.random.Generator):
    """Pick two distinct members of a ranked population, biased toward the top."""
    ma, pa = select_parent_indices(len(population), 1, rng)
    return population.member(int(ma[0])), population.member(int(pa[0]))


def breed(ma: np.ndarray, pa: np.ndarray, rng: np.random.Generator, template=None) -> np.ndarray:
    """Uniform crossover ``ma*T + pa*(1-T)`` with a Bernoulli(0.5) template ``T``.

    Works on single patterns or on equally shaped stacks. Pass ``template``
    to fix ``T`` instead of drawing it.
    """
    ma = np.asarray(ma, dtype=np.float64)
    pa = np.asarray(pa, dtype=np.float64)
    if ma.shape != pa.shape:
        raise ValueError(f"parent dims differ: {ma.shape} vs {pa.shape}")
    if template is None:
        template = _random_bits(ma.shape, rng)
    else:
        template = np.asarray(template).astype(bool)
        if template.shape != ma.shape:
            raise ValueError("template dims do not match parents")
    return np.where(template, ma, pa)


def _random_bits(shape, rng: np.random.Generator) -> np.ndarray:
    """Fair random booleans, eight per random byte."""
    n = int(np.prod(shape))
    raw = rng.integers(0, 256, size=(n + 7) // 8, dtype=np.uint8)
    return np.unpackbits(raw, count=n).reshape(shape).view(bool)


def mutation_rate(g: int, config: GaConfig) -> float:
    """Per-pixel mutation probability at generation ``g`` (``g >= 1``)."""
    if g < 1:
        raise ValueError("generation index starts at 1")
    r0, rend = config.mutation_initial, config.mutation_final
    return (r0 - rend) * math.exp(-(g - 1) / config.mutation_decay) + rend


def mutate(pattern: np.ndarray, rate: float, mode: str, rng: np.random.Generator) -> np.ndarray:
    """Mutate each pixel independently with probability ``rate``.

    Binary patterns have mutated bits flipped; grayscale pixels are redrawn
    uniformly from [0, 1].
    """
    if not 0.0 <= rate <= 1.0:
        raise ValueError("mutation rate must lie in [0, 1]")
    pattern = np.asarray(pattern, dtype=np.float64)
    hit = rng.random(pattern.shape, dtype=np.float32) < np.float32(rate)
    if mode == "binary":
        # pixels are exactly 0 or 1, so a flip is an inequality test
        return (pattern != hit).astype(np.float64)
    if mode == "grayscale":
        out = pattern.copy()
        out[hit] = rng.random(int(hit.sum()))
        return out
    raise ValueError(f"unknown mode {mode!r}")


@dataclass
class EvolutionState:
    """Ranked population plus counters. ``measurements`` counts the current frame only."""

    population: Population
    baseline: CfBaseline
    generation: int = 0
    measurements: int = 0
    next_id: int = 0

    @property
    def dims(self) -> tuple[int, int]:
        return self.population.patterns.shape[1:]


def _check_object(obj, dims):
    if np.shape(obj) != tuple(dims):
        raise ValueError(f"object dims {np.shape(obj)} do not match {tuple(dims)}")


def init_population(
    config: GaConfig,
    dims: tuple[int, int],
    obj: np.ndarray,
    noise: NoiseModel = NOISELESS,
    rng: np.random.Generator | None = None,
    patterns: np.ndarray | None = None,
) -> EvolutionState:
    """Measure ``N`` random patterns and derive the cost baseline from them.

    ``patterns`` may be supplied to fix the initial generation.
    """
    _check_object(obj, dims)
    rng = np.random.default_rng() if rng is None else rng
    n = config.population
    if patterns is None:
        patterns = random_patterns(n, dims[0], dims[1], rng, config.mode, config.fill)
    else:
        patterns = np.array(patterns, dtype=np.float64)
        if patterns.shape != (n, *dims):
            raise ValueError("initial patterns must have shape (N, height, width)")
    signals = measure_buckets(patterns, obj, noise, rng)
    weights = pattern_weights(patterns, config.weight_order)
    baseline = CfBaseline.from_measurements(signals, weights, config.weight_order, config.k)
    pop = Population(
        patterns=patterns,
        signals=signals,
        weights=weights,
        cfs=cost(signals, weights, baseline),
        births=np.zeros(n, dtype=np.int64),
        ids=np.arange(n, dtype=np.int64),
    )
    return EvolutionState(rank(pop), baseline, generation=0, measurements=n, next_id=n)


def step_generation(
    state: EvolutionState,
    obj: np.ndarray,
    noise: NoiseModel,
    config: GaConfig,
    rng: np.random.Generator,
) -> EvolutionState:
    """Breed, measure and insert ``M`` offspring; return the next ranked state.

    Random draws happen in a fixed order (parents, templates, mutations,
    detector noise) so a seed fully determines the run.
    """
    pop = state.population
    n, m = len(pop), config.offspring
    g = state.generation + 1
    ia, ib = select_parent_indices(n, m, rng)
    children = breed(pop.patterns[ia], pop.patterns[ib], rng)
    children = mutate(children, mutation_rate(g, config), config.mode, rng)
    signals = measure_buckets(children, obj, noise, rng)
    weights = pattern_weights(children, state.baseline.order)
    offspring = Population(
        patterns=children,
        signals=signals,
        weights=weights,
        cfs=cost(signals, weights, state.baseline),
        births=np.full(m, g, dtype=np.int64),
        ids=np.arange(state.next_id, state.next_id + m, dtype=np.int64),
    )
    survivors = pop.take(slice(0, n - m))
    return EvolutionState(
        population=rank(Population.concat(survivors, offspring)),
        baseline=state.baseline,
        generation=g,
        measurements=state.measurements + m,
        next_id=state.next_id + m,
    )


def warm_start(
    state: EvolutionState,
    new_obj: np.ndarray,
    config: GaConfig,
    noise: NoiseModel = NOISELESS,
    rng: np.random.Generator | None = None,
) -> EvolutionState:
    """Carry a finished population over to the next frame.

    Patterns and the first frame's cost baseline are kept. With
    ``config.remeasure_inherited`` every inherited pattern is measured once
    against ``new_obj`` and re-ranked (``N`` measurements charged to the
    frame); otherwise the signals and cfs measured on the previous frame are
    kept as they are and the frame starts with zero measurements.

    The generation counter is not reset, so the mutation schedule keeps
    decaying over the whole sequence.
    """
    _check_object(new_obj, state.dims)
    if len(state.population) != config.population:
        raise ValueError("population is incomplete")
    if not config.remeasure_inherited:
        return replace(state, measurements=0)
    pop = state.population
    signals = measure_buckets(pop.patterns, new_obj, noise, rng)
    fresh = replace(pop, signals=signals, cfs=cost(signals, pop.weights, state.baseline))
    return replace(state, population=rank(fresh), measurements=len(pop))


def result_image(population: Population, config: GaConfig) -> np.ndarray:
    if config.result_rule == "mean-of-top-q":
        return population.patterns[: config.top_q].mean(axis=0)
    return population.patterns[0].copy()


@dataclass
class GenerationRecord:
    generation: int
    best_cf: float
    mean_cf: float
    measurements: int
    psnr_raw: Optional[float] = None
    psnr_filtered: Optional[float] = None
    ssim_raw: Optional[float] = None
    ssim_filtered: Optional[float] = None


@dataclass
class EvolutionTrace:
    """Per-generation records, snapshots keyed by generation, final state.

    Generations are counted from the start of this run: record 0 is the
    starting population, record ``g`` follows the ``g``-th step.
    """

    records: list[GenerationRecord]
    snapshots: dict[int, np.ndarray]
    state: EvolutionState
    result: np.ndarray
    config: GaConfig = field(repr=False, default=None)

    @property
    def population(self) -> Population:
        return self.state.population

    @property
    def best_cf(self) -> np.ndarray:
        return np.array([r.best_cf for r in self.records])


def _record(state, config, truth, post_filter, with_metrics, start=0) -> GenerationRecord:
    pop = state.population
    rec = GenerationRecord(
        generation=state.generation - start,
        best_cf=float(pop.cfs[0]),
        mean_cf=float(pop.cfs.mean()),
        measurements=state.measurements,
    )
    if truth is not None and with_metrics:
        img = result_image(pop, config)
        rec.psnr_raw = psnr(truth, img)
        rec.ssim_raw = ssim(truth, img)
        if post_filter is not None:
            filtered = post_filter(img)
            rec.psnr_filtered = psnr(truth, filtered)
            rec.ssim_filtered = ssim(truth, filtered)
    return rec


def evolve(
    config: GaConfig,
    obj: np.ndarray,
    noise: NoiseModel = NOISELESS,
    rng: np.random.Generator | None = None,
    snapshot_interval: int = 0,
    *,
    initial: EvolutionState | None = None,
    truth: np.ndarray | None = None,
    post_filter: Callable[[np.ndarray], np.ndarray] | None = None,
    metrics_interval: int = 1,
) -> EvolutionTrace:
    """Run ``config.generations`` generation steps against ``obj``.

    Starts from a fresh population unless ``initial`` (e.g. from
    :func:`warm_start`) is given. When ``truth`` is set, PSNR and SSIM of the
    result image (and of ``post_filter(result)``) are recorded every
    ``metrics_interval`` generations and at the last one. Result images are
    snapshotted every ``snapshot_interval`` generations (0 disables) and at
    the final generation.
    """
    rng = np.random.default_rng() if rng is None else rng
    obj = np.asarray(obj, dtype=np.float64)
    if initial is None:
        state = init_population(config, obj.shape, obj, noise, rng)
    else:
        _check_object(obj, initial.dims)
        state = initial
    start = state.generation
    last = start + config.generations
    every = max(int(metrics_interval), 1)

    records = [_record(state, config, truth, post_filter, True, start)]
    snapshots = {}
    if snapshot_interval:
        snapshots[0] = result_image(state.population, config)
    for _ in range(config.generations):
        state = step_generation(state, obj, noise, config, rng)
        g = state.generation - start
        with_metrics = g % every == 0 or state.generation == last
        records.append(_record(state, config, truth, post_filter, with_metrics, start))
        if snapshot_interval and g % snapshot_interval == 0:
            snapshots[g] = result_image(state.population, config)
    result = result_image(state.population, config)
    snapshots[state.generation - start] = result
    return EvolutionTrace(records, snapshots, state, result, config)
