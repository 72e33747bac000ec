"""Genetic algorithm and CMA-ES drivers over the chromosome space."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .decoder import chromosome_length, decode
from .evaluator import CriterionReport
from .model import CostWeights, Instance, Placement


@dataclass(frozen=True)
class GAConfig:
    pop_size: int = 300
    tournament_ratio: float = 0.02
    elite_ratio: float = 0.05
    p_crossover: float = 0.8
    p_mutation: float = 0.1
    gene_mutation_rate: float = 0.1
    seed_ratio: float = 0.2
    max_generations: int = 250
    time_limit: float | None = None  # seconds; None runs exactly one segment
    rng_seed: int = 0
    modulation: bool = True

    def __post_init__(self):
        if self.pop_size < 1 or self.max_generations < 1:
            raise ValueError("pop_size and max_generations must be positive")
        for name in ("tournament_ratio", "elite_ratio", "p_crossover", "p_mutation",
                     "gene_mutation_rate", "seed_ratio"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.time_limit is not None and self.time_limit < 0:
            raise ValueError("time_limit must be non-negative")

    @property
    def tournament_size(self) -> int:
        return max(1, math.ceil(self.pop_size * self.tournament_ratio))

    @property
    def n_elites(self) -> int:
        return math.ceil(self.pop_size * self.elite_ratio)


@dataclass(frozen=True)
class CMAConfig:
    sigma0: float = 0.25
    warmstart_generations: int = 10
    warmstart_pop_size: int = 100
    max_iterations: int = 300  # per restart when time_limit is None
    time_limit: float | None = None
    rng_seed: int = 0
    modulation: bool = True

    def __post_init__(self):
        if self.sigma0 < 0:
            raise ValueError("sigma0 must be non-negative")
        if self.warmstart_generations < 0 or self.max_iterations < 1:
            raise ValueError("invalid iteration counts")


@dataclass
class SearchResult:
    chromosome: np.ndarray
    placement: Placement
    report: CriterionReport
    history: list[float] = field(default_factory=list)  # best criterion per generation
    segments: list[int] = field(default_factory=list)  # restart segment of each entry
    evaluations: int = 0
    elapsed: float = 0.0

    @property
    def total(self) -> float:
        return self.report.total


class _Clock:
    def __init__(self, limit: float | None):
        self.start = time.perf_counter()
        self.limit = limit

    def elapsed(self) -> float:
        return time.perf_counter() - self.start

    def expired(self) -> bool:
        return self.limit is not None and self.elapsed() >= self.limit


def squarest_variant(variants) -> int:
    """Index of the variant closest to a square (first on ties)."""
    best, best_r = 0, -1.0
    for k, v in enumerate(variants):
        r = min(v.width, v.height) / max(v.width, v.height)
        if r > best_r:
            best, best_r = k, r
    return best


def seed_population(inst: Instance, pop_size: int, seed_ratio: float,
                    rng: np.random.Generator, modulation: bool = True) -> np.ndarray:
    """Uniform random population with ``floor(seed_ratio * pop_size)`` seeded rows.

    Seeded rows pick the squarest variant and scale position genes by
    ``k / n`` where ``k`` is the descending-area rank (largest first).
    """
    n = inst.n
    L = chromosome_length(inst, modulation)
    pop = rng.random((pop_size, L))
    n_seed = int(math.floor(seed_ratio * pop_size))
    if n_seed == 0 or n == 0:
        return pop
    areas = np.array([max(v.width * v.height for v in r.variants) for r in inst.rects])
    order = sorted(range(n), key=lambda i: (-areas[i], i))
    scale = np.empty(n)
    for rank, i in enumerate(order, start=1):
        scale[i] = rank / n
    var_gene = np.array([
        (squarest_variant(r.variants) + 0.5) / len(r.variants) for r in inst.rects
    ])
    pop[:n_seed, :n] *= scale
    pop[:n_seed, n:2 * n] = var_gene
    return pop


def two_point_crossover(p1: np.ndarray, p2: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    if p1.shape != p2.shape:
        raise ValueError("parents differ in length")
    a, b = sorted(int(v) for v in rng.integers(0, p1.shape[0] + 1, size=2))
    child = p1.copy()
    child[a:b] = p2[a:b]
    return child


def mutate(c: np.ndarray, rng: np.random.Generator, rate: float = 0.1) -> np.ndarray:
    out = c.copy()
    hit = rng.random(c.shape[0]) < rate
    out[hit] = rng.random(int(hit.sum()))
    return out


def _tournament(fit: np.ndarray, size: int, rng: np.random.Generator) -> int:
    cand = rng.integers(0, fit.shape[0], size=size)
    return int(cand[np.argmin(fit[cand])])


def _evaluate(pop: np.ndarray, inst: Instance, cw: CostWeights):
    fits = np.empty(pop.shape[0])
    for k in range(pop.shape[0]):
        fits[k] = decode(pop[k], inst, cw)[1].total
    return fits


def _finish(best_c, inst, cw, history, segments, evals, clock) -> SearchResult:
    p, rep = decode(best_c, inst, cw)
    return SearchResult(best_c.copy(), p, rep, history, segments, evals, clock.elapsed())


def run_ga(inst: Instance, cfg: GAConfig = GAConfig(), cw: CostWeights | None = None) -> SearchResult:
    """Generational GA with tournament selection, two-point crossover and elitism.

    Without a time limit exactly ``max_generations`` generations run, which
    makes the result a pure function of the inputs. With a time limit the
    population is reseeded whenever a segment ends and time remains.
    """
    cw = inst.weights if cw is None else cw
    clock = _Clock(cfg.time_limit)
    master = np.random.SeedSequence(cfg.rng_seed)
    history: list[float] = []
    segments: list[int] = []
    best_c, best_f = None, math.inf
    evals = 0
    segment = 0
    while True:
        seg_seq = master.spawn(1)[0]
        init_rng = np.random.default_rng(seg_seq.spawn(1)[0])
        pop = seed_population(inst, cfg.pop_size, cfg.seed_ratio, init_rng, cfg.modulation)
        fit = _evaluate(pop, inst, cw)
        evals += pop.shape[0]
        for gen in range(cfg.max_generations + 1):
            k = int(np.argmin(fit))
            if fit[k] < best_f:
                best_f, best_c = float(fit[k]), pop[k].copy()
            history.append(float(fit[k]))
            segments.append(segment)
            if gen == cfg.max_generations or clock.expired():
                break
            pop, fit = _generation(pop, fit, inst, cw, cfg, seg_seq.spawn(1)[0])
            evals += cfg.pop_size
        segment += 1
        if cfg.time_limit is None or clock.expired():
            break
    return _finish(best_c, inst, cw, history, segments, evals, clock)


def _generation(pop, fit, inst, cw, cfg: GAConfig, seq: np.random.SeedSequence):
    # one independent stream per child so a parallel map would give the same result
    streams = seq.spawn(cfg.pop_size)
    T = cfg.tournament_size
    children = np.empty_like(pop)
    for k in range(cfg.pop_size):
        rng = np.random.default_rng(streams[k])
        p1 = pop[_tournament(fit, T, rng)]
        p2 = pop[_tournament(fit, T, rng)]
        if rng.random() < cfg.p_crossover:
            child = two_point_crossover(p1, p2, rng)
            if rng.random() < cfg.p_mutation:
                child = mutate(child, rng, cfg.gene_mutation_rate)
        else:
            child = mutate(p1, rng, cfg.gene_mutation_rate)
        children[k] = child
    child_fit = _evaluate(children, inst, cw)
    elite = np.argsort(fit, kind="stable")[: cfg.n_elites]
    merged = np.concatenate([children, pop[elite]])
    merged_fit = np.concatenate([child_fit, fit[elite]])
    keep = np.argsort(merged_fit, kind="stable")[: cfg.pop_size]
    return merged[keep], merged_fit[keep]


def run_cmaes(inst: Instance, cfg: CMAConfig = CMAConfig(), cw: CostWeights | None = None) -> SearchResult:
    """CMA-ES (pycma) started from the best chromosome of a short GA run.

    Samples are clipped to [0, 1] before decoding; the strategy itself sees
    the unclipped samples. The strategy restarts from the incumbent when it
    stops early and time remains.
    """
    import cma

    cw = inst.weights if cw is None else cw
    clock = _Clock(cfg.time_limit)
    warm = run_ga(inst, GAConfig(pop_size=cfg.warmstart_pop_size,
                                 max_generations=max(1, cfg.warmstart_generations),
                                 rng_seed=cfg.rng_seed, modulation=cfg.modulation), cw)
    best_c, best_f = warm.chromosome.copy(), warm.total
    history = [best_f]
    segments = [0]
    evals = warm.evaluations
    if cfg.sigma0 == 0 or best_c.shape[0] < 2:
        return _finish(best_c, inst, cw, history, segments, evals, clock)

    segment = 0
    seed_seq = np.random.SeedSequence(cfg.rng_seed)
    while True:
        seed = int(seed_seq.spawn(1)[0].generate_state(1)[0] % (2**31 - 2)) + 1
        es = cma.CMAEvolutionStrategy(best_c, cfg.sigma0, {"seed": seed, "verbose": -9})
        it = 0
        while not es.stop() and it < cfg.max_iterations and not clock.expired():
            xs = es.ask()
            vals = []
            for x in xs:
                c = np.clip(x, 0.0, 1.0)
                f = decode(c, inst, cw)[1].total
                vals.append(f)
                if f < best_f:
                    best_f, best_c = f, c
            evals += len(xs)
            es.tell(xs, vals)
            history.append(best_f)
            segments.append(segment)
            it += 1
        segment += 1
        if cfg.time_limit is None or clock.expired():
            break
    return _finish(best_c, inst, cw, history, segments, evals, clock)
