"""Genetic algorithm over chromosomes of N chirped-pulse parameter blocks.

One generation:

1. score every individual by propagating under its field,
2. sort by fitness (descending; ties keep the lower slot first),
3. keep individuals whose fitness is >= the population mean (at least two),
4. refill discarded slots by fitness-weighted crossover of random survivor
   pairs (probability ``pi_x``; otherwise clone one survivor),
5. mutate every gene with probability ``pi_m`` by uniform resampling inside
   its box; with elitism the top two survivors are exempt.

All randomness for slot ``s`` of generation ``g`` comes from its own stream
seeded by ``(seed, g, s)``, so results do not depend on evaluation order or on
how many worker processes score the population.
"""
from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from multiprocessing import get_context
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ConfigError, PropagationDiverged
from .model import MolecularModel, SpatialGrid, WavepacketState, build_grid, initial_wavepacket
from .observables import FitnessConfig, ProbeSet, fitness
from .propagator import PotentialMatrixCache, PropagatorPlan, build_cache, build_plan, propagate
from .pulse import PARAM_NAMES, PulseEnsemble, sample_field

CROSSOVER_EPS = 1e-12


@dataclass(frozen=True)
class GeneBounds:
    """Box for one (e0, tau0, chirp, width, omega0) block."""

    lower: tuple[float, ...] = (0.01, 120.0, -5.0e-7, 20.0, 0.14)
    upper: tuple[float, ...] = (0.2, 900.0, 5.0e-7, 60.0, 0.16)

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return np.array(self.lower, dtype=float), np.array(self.upper, dtype=float)

    def contains(self, genes: np.ndarray) -> bool:
        lo, hi = self.arrays()
        g = np.asarray(genes).reshape(-1, 5)
        return bool(np.all(g >= lo) and np.all(g <= hi))


@dataclass(frozen=True)
class GaConfig:
    n_lcp: int = 30
    pop_size: int = 64
    n_generations: int = 100
    pi_m: float = 0.1
    pi_x: float = 0.8
    seed: int = 0
    elitism: bool = True
    bounds: GeneBounds = GeneBounds()

    def validate(self) -> None:
        if self.n_lcp < 1:
            raise ConfigError("ga.n_lcp", "need at least one pulse per individual")
        if self.pop_size < 4:
            raise ConfigError("ga.pop_size", "population must hold at least 4 individuals")
        if self.n_generations < 1:
            raise ConfigError("ga.n_generations", "need at least one generation")
        for key in ("pi_m", "pi_x"):
            if not 0.0 <= getattr(self, key) <= 1.0:
                raise ConfigError(f"ga.{key}", "probability must lie in [0, 1]")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("ga.seed", "seed must be an unsigned 64-bit integer")
        lo, hi = self.bounds.arrays()
        if lo.shape != (5,) or hi.shape != (5,) or np.any(lo > hi):
            raise ConfigError("ga.bounds", "need 5 lower/upper pairs with lower <= upper")


def slot_rng(seed: int, generation: int, slot: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, generation, slot]))


# ---------------------------------------------------------------------------
# Fitness evaluation
# ---------------------------------------------------------------------------


@dataclass
class Evaluation:
    fitness: float
    j_flux: np.ndarray
    fluence: float
    ti_tmi: np.ndarray
    diverged: bool = False
    diverged_step: Optional[int] = None


@dataclass
class ControlProblem:
    """Everything needed to score a chromosome: model, grid, plan, initial state."""

    grid: SpatialGrid
    plan: PropagatorPlan
    cache: PotentialMatrixCache
    initial: WavepacketState
    detector_index: int
    fitness_cfg: FitnessConfig = FitnessConfig()

    @classmethod
    def build(
        cls,
        model: MolecularModel = MolecularModel(),
        grid: Optional[SpatialGrid] = None,
        dt_full: float = 0.1875,
        n_steps: int = 8192,
        r_detector: float = 8.4,
        center: float = 4.125,
        width: float = 0.265,
        channel: int = 3,
        fitness_cfg: FitnessConfig = FitnessConfig(),
    ) -> "ControlProblem":
        grid = grid or build_grid(0.9, 4.6875e-2, 220)
        plan = build_plan(grid, model, dt_full, n_steps)
        return cls(
            grid=grid,
            plan=plan,
            cache=build_cache(model, grid),
            initial=initial_wavepacket(grid, center, width, channel),
            detector_index=grid.nearest_index(r_detector),
            fitness_cfg=fitness_cfg,
        )

    def run(self, field: Optional[np.ndarray], stride: Optional[int] = None, keep_final_state: bool = False):
        probes = ProbeSet(self.detector_index, stride or self.plan.n_steps)
        return propagate(self.initial, self.cache, field, self.plan, probes, keep_final_state)

    def evaluate(self, genes: np.ndarray) -> Evaluation:
        field = sample_field(PulseEnsemble.from_genes(genes), self.plan)
        try:
            obs = self.run(field)
        except PropagationDiverged as exc:
            nan3 = np.full(3, np.nan)
            return Evaluation(-math.inf, nan3, math.nan, nan3, True, exc.step)
        return Evaluation(fitness(obs, self.fitness_cfg), obs.j_flux, obs.fluence, obs.ti_tmi)


_WORKER_PROBLEM: Optional[ControlProblem] = None


def _init_worker(problem: ControlProblem) -> None:
    global _WORKER_PROBLEM
    _WORKER_PROBLEM = problem


def _evaluate_in_worker(genes: np.ndarray) -> Evaluation:
    return _WORKER_PROBLEM.evaluate(genes)


class PopulationEvaluator:
    """Scores populations, memoizing identical chromosomes, optionally in a process pool."""

    def __init__(self, problem: ControlProblem, workers: int = 1):
        self.problem = problem
        self.workers = max(1, int(workers))
        self.memo: dict[bytes, Evaluation] = {}
        self._pool: Optional[ProcessPoolExecutor] = None

    def __enter__(self):
        if self.workers > 1:
            self._pool = ProcessPoolExecutor(
                max_workers=self.workers,
                mp_context=get_context("fork" if os.name == "posix" else "spawn"),
                initializer=_init_worker,
                initargs=(self.problem,),
            )
        return self

    def __exit__(self, *exc):
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None

    def __call__(self, population: np.ndarray) -> list[Evaluation]:
        keys = [np.ascontiguousarray(ind).tobytes() for ind in population]
        todo: dict[bytes, np.ndarray] = {}
        for key, ind in zip(keys, population):
            if key not in self.memo and key not in todo:
                todo[key] = ind
        if todo:
            items = list(todo.items())
            if self._pool is None:
                results = [self.problem.evaluate(ind) for _, ind in items]
            else:
                results = list(self._pool.map(_evaluate_in_worker, [ind for _, ind in items]))
            for (key, _), res in zip(items, results):
                self.memo[key] = res
        return [self.memo[key] for key in keys]


def evaluate_population(
    population: np.ndarray, problem: ControlProblem, workers: int = 1
) -> list[Evaluation]:
    with PopulationEvaluator(problem, workers) as ev:
        return ev(population)


# ---------------------------------------------------------------------------
# Genetic operators
# ---------------------------------------------------------------------------


def init_population(cfg: GaConfig) -> np.ndarray:
    lo, hi = cfg.bounds.arrays()
    pop = np.empty((cfg.pop_size, cfg.n_lcp, 5))
    for slot in range(cfg.pop_size):
        pop[slot] = slot_rng(cfg.seed, 0, slot).uniform(lo, hi, size=(cfg.n_lcp, 5))
    return pop


def select(fitnesses: Sequence[float]) -> tuple[np.ndarray, int]:
    """Return (survivor indices in rank order, number discarded).

    Survivors are those at or above the mean of the finite fitness values
    (compared exactly), topped up to at least two.
    """
    f = np.asarray(fitnesses, dtype=float)
    order = np.argsort(-f, kind="stable")
    finite = [Fraction(x) for x in f if math.isfinite(x)]
    if finite:
        mean = sum(finite, Fraction(0)) / len(finite)
        n_keep = sum(1 for x in f if math.isfinite(x) and Fraction(x) >= mean)
    else:
        n_keep = 0
    n_keep = max(n_keep, min(2, f.size))
    return order[:n_keep], f.size - n_keep


def crossover(
    parent_a: np.ndarray,
    parent_b: np.ndarray,
    fitness_a: float,
    fitness_b: float,
    min_fitness: float = 0.0,
) -> np.ndarray:
    """Fitness-weighted convex combination of two parents."""
    w_a = max(fitness_a - min_fitness, 0.0) + CROSSOVER_EPS
    w_b = max(fitness_b - min_fitness, 0.0) + CROSSOVER_EPS
    if not (math.isfinite(w_a) and math.isfinite(w_b)):
        w_a = w_b = 1.0
    if np.array_equal(parent_a, parent_b):
        return np.array(parent_a, dtype=float, copy=True)
    child = (w_a * parent_a + w_b * parent_b) / (w_a + w_b)
    # keep the child inside the per-gene parent interval despite rounding
    return np.clip(child, np.minimum(parent_a, parent_b), np.maximum(parent_a, parent_b))


def mutate(chrom: np.ndarray, cfg: GaConfig, rng: np.random.Generator) -> np.ndarray:
    lo, hi = cfg.bounds.arrays()
    shape = chrom.shape
    u = rng.random(shape)
    fresh = rng.uniform(np.broadcast_to(lo, shape), np.broadcast_to(hi, shape))
    return np.where(u < cfg.pi_m, fresh, chrom)


def next_generation(
    population: np.ndarray,
    fitnesses: np.ndarray,
    survivors: np.ndarray,
    cfg: GaConfig,
    generation: int,
) -> np.ndarray:
    finite = fitnesses[np.isfinite(fitnesses)]
    f_min = float(finite.min()) if finite.size else 0.0
    n_keep = len(survivors)
    new = np.empty_like(population)
    for slot in range(cfg.pop_size):
        rng = slot_rng(cfg.seed, generation, slot)
        if slot < n_keep:
            child = population[survivors[slot]].copy()
        else:
            a, b = survivors[rng.choice(n_keep, size=2, replace=False)]
            if rng.random() < cfg.pi_x:
                child = crossover(population[a], population[b], fitnesses[a], fitnesses[b], f_min)
            else:
                child = population[a].copy()
        if not (cfg.elitism and slot < 2):
            child = mutate(child, cfg, rng)
        new[slot] = child
    return new


# ---------------------------------------------------------------------------
# Run record
# ---------------------------------------------------------------------------


def _num(x: float):
    x = float(x)
    return x if math.isfinite(x) else None


def _from_num(x) -> float:
    return math.nan if x is None else float(x)


@dataclass
class SurvivorRecord:
    rank: int
    slot: int
    genes: np.ndarray  # (n_lcp, 5)
    fitness: float
    j_flux: np.ndarray
    fluence: float
    ti_tmi: np.ndarray

    def to_json(self) -> dict:
        return {
            "rank": self.rank,
            "slot": self.slot,
            "fitness": _num(self.fitness),
            "j1": _num(self.j_flux[0]),
            "j2": _num(self.j_flux[1]),
            "j3": _num(self.j_flux[2]),
            "fluence": _num(self.fluence),
            "p12": _num(self.ti_tmi[0]),
            "p23": _num(self.ti_tmi[1]),
            "p31": _num(self.ti_tmi[2]),
            "genes": [[float(x) for x in row] for row in self.genes],
        }

    @classmethod
    def from_json(cls, d: dict) -> "SurvivorRecord":
        return cls(
            rank=int(d["rank"]),
            slot=int(d["slot"]),
            genes=np.array(d["genes"], dtype=float).reshape(-1, 5),
            fitness=-math.inf if d["fitness"] is None else float(d["fitness"]),
            j_flux=np.array([_from_num(d[k]) for k in ("j1", "j2", "j3")]),
            fluence=_from_num(d["fluence"]),
            ti_tmi=np.array([_from_num(d[k]) for k in ("p12", "p23", "p31")]),
        )

    @property
    def ratio_j2_j3(self) -> float:
        return float(self.j_flux[1] / self.j_flux[2]) if self.j_flux[2] != 0 else math.inf


@dataclass
class GenerationRecord:
    generation: int
    population_fitness: list[float]
    n_discarded: int
    best_fitness: float
    best_so_far: float
    survivors: list[SurvivorRecord]
    diverged_slots: list[int] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "generation": self.generation,
            "population_fitness": [_num(f) for f in self.population_fitness],
            "n_discarded": self.n_discarded,
            "best_fitness": _num(self.best_fitness),
            "best_so_far": _num(self.best_so_far),
            "diverged_slots": list(self.diverged_slots),
            "survivors": [s.to_json() for s in self.survivors],
        }

    @classmethod
    def from_json(cls, d: dict) -> "GenerationRecord":
        neg = lambda x: -math.inf if x is None else float(x)  # noqa: E731
        return cls(
            generation=int(d["generation"]),
            population_fitness=[neg(f) for f in d["population_fitness"]],
            n_discarded=int(d["n_discarded"]),
            best_fitness=neg(d["best_fitness"]),
            best_so_far=neg(d["best_so_far"]),
            survivors=[SurvivorRecord.from_json(s) for s in d["survivors"]],
            diverged_slots=list(d.get("diverged_slots", [])),
        )


@dataclass
class RunRecord:
    config: dict
    generations: list[GenerationRecord] = field(default_factory=list)

    def best(self) -> SurvivorRecord:
        return max(
            (s for g in self.generations for s in g.survivors),
            key=lambda s: s.fitness,
        )

    def best_fitness_series(self) -> list[float]:
        return [g.best_fitness for g in self.generations]

    def summary(self) -> dict:
        best = self.best()
        return {
            "config": self.config,
            "n_generations": len(self.generations),
            "best_fitness": _num(best.fitness),
            "best_generation": next(
                g.generation for g in self.generations if any(s is best for s in g.survivors)
            ),
            "best_j": [_num(x) for x in best.j_flux],
            "ratio_j2_j3": _num(best.ratio_j2_j3),
            "best_pulses": [dict(zip(PARAM_NAMES, map(float, row))) for row in best.genes],
        }

    def to_jsonl(self, path: str | Path) -> None:
        with open(path, "w") as fh:
            for g in self.generations:
                fh.write(json.dumps(g.to_json()) + "\n")

    @classmethod
    def from_jsonl(cls, path: str | Path, config: Optional[dict] = None) -> "RunRecord":
        gens = []
        with open(path) as fh:
            for line in fh:
                if line.strip():
                    gens.append(GenerationRecord.from_json(json.loads(line)))
        return cls(config or {}, gens)


def config_echo(cfg: GaConfig) -> dict:
    d = asdict(cfg)
    d["bounds"] = {"lower": list(cfg.bounds.lower), "upper": list(cfg.bounds.upper)}
    return d


# ---------------------------------------------------------------------------
# Main loop
# ---------------------------------------------------------------------------


def evolve(
    cfg: GaConfig,
    problem: ControlProblem,
    workers: int = 1,
    callback: Optional[Callable[[GenerationRecord], None]] = None,
) -> RunRecord:
    cfg.validate()
    record = RunRecord(config_echo(cfg))
    population = init_population(cfg)
    best_so_far = -math.inf
    with PopulationEvaluator(problem, workers) as evaluator:
        for gen in range(cfg.n_generations):
            evals = evaluator(population)
            fit = np.array([e.fitness for e in evals])
            survivors, n_discarded = select(fit)
            best_so_far = max(best_so_far, float(fit[survivors[0]]))
            gen_record = GenerationRecord(
                generation=gen,
                population_fitness=[float(f) for f in fit],
                n_discarded=n_discarded,
                best_fitness=float(fit[survivors[0]]),
                best_so_far=best_so_far,
                survivors=[
                    SurvivorRecord(
                        rank=rank,
                        slot=int(slot),
                        genes=population[slot].copy(),
                        fitness=float(fit[slot]),
                        j_flux=np.array(evals[slot].j_flux, dtype=float),
                        fluence=float(evals[slot].fluence),
                        ti_tmi=np.array(evals[slot].ti_tmi, dtype=float),
                    )
                    for rank, slot in enumerate(survivors)
                ],
                diverged_slots=[i for i, e in enumerate(evals) if e.diverged],
            )
            record.generations.append(gen_record)
            if callback is not None:
                callback(gen_record)
            if gen + 1 < cfg.n_generations:
                population = next_generation(population, fit, survivors, cfg, gen + 1)
    return record
