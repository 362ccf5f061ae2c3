"""Generational GA with tournament selection, elitism and Germline Penetration."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .development import DevConfig, DevelopmentTrace
from .fitness import ExampleSet, FitnessReport, TargetShape, evaluate
from .genome import DevelopmentalGene, Genome, GenomeConfig, crossover, mutate, random_genome
from .metabolism import NetConfig

log = logging.getLogger(__name__)

# independent random sub-streams derived from the master seed
STREAMS = {"init": 0, "selection": 1, "variation": 2, "germline": 3, "examples": 4}


def substream(master_seed: int, name: str) -> np.random.Generator:
    return np.random.default_rng([int(master_seed), STREAMS[name]])


@dataclass(frozen=True)
class EvolutionConfig:
    population_size: int = 124
    crossover_probability: float = 0.5
    mutation_rate: float = 0.005
    generations: int = 300
    elitism_count: int = 1
    tournament_size: int = 2
    germline_rate: float = 0.02
    master_seed: int = 0

    def __post_init__(self) -> None:
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        for name in ("crossover_probability", "mutation_rate", "germline_rate"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.generations < 0 or self.tournament_size < 1:
            raise ValueError("generations must be >= 0 and tournament_size >= 1")
        if not 0 <= self.elitism_count <= self.population_size:
            raise ValueError("elitism_count must lie in [0, population_size]")


@dataclass
class Individual:
    genome: Genome
    report: FitnessReport | None = None
    trace: DevelopmentTrace | None = None

    @property
    def fitness(self) -> float:
        return self.report.combined


@dataclass(frozen=True)
class GenerationRecord:
    """Per-generation statistics; ``best_*`` describe the best individual by
    combined fitness, ``mean_*`` the population average."""

    generation: int
    best_combined: float
    best_shape: float
    best_metabolic: float
    best_mean_distance: float
    mean_combined: float
    mean_shape: float
    mean_metabolic: float

    FIELDS = ("generation", "best_combined", "best_shape", "best_metabolic", "best_mean_distance",
              "mean_combined", "mean_shape", "mean_metabolic")


@dataclass
class RunHistory:
    records: list[GenerationRecord] = field(default_factory=list)
    champion: Individual | None = None


def tournament_select(population: Sequence[Individual], k: int, rng: np.random.Generator) -> Individual:
    if not population:
        raise ValueError("tournament over an empty population")
    if k < 1:
        raise ValueError(f"tournament size must be >= 1, got {k}")
    picks = rng.integers(0, len(population), size=k)
    best = min(picks, key=lambda i: (-population[i].fitness, i))
    return population[int(best)]


def germline_penetration(genome: Genome, trace: DevelopmentTrace, rate: float,
                         rng: np.random.Generator) -> Genome:
    """Overwrite mobile sequences with codes issued during a development.

    Each developmental gene independently, with probability ``rate``, receives
    a code drawn uniformly from ``trace``; nothing else changes.
    """
    codes = trace.codes
    if not codes:
        raise ValueError("development trace holds no codes")
    hits = np.flatnonzero(rng.random(len(genome.dev_genes)) < rate)
    if hits.size == 0:
        return genome
    dev = list(genome.dev_genes)
    for i in hits:
        code = codes[int(rng.integers(len(codes)))]
        g = dev[i]
        dev[i] = DevelopmentalGene(g.switch, code, g.timer, g.event, g.axes, g.color, g.switch_slots)
    return Genome(genome.config, tuple(dev), genome.met_genes)


def _record(gen: int, population: list[Individual]) -> GenerationRecord:
    best = population[_best_index(population)].report
    reports = [ind.report for ind in population]
    return GenerationRecord(
        generation=gen,
        best_combined=best.combined,
        best_shape=best.shape_fitness,
        best_metabolic=best.metabolic_fitness,
        best_mean_distance=best.mean_distance,
        mean_combined=float(np.mean([r.combined for r in reports])),
        mean_shape=float(np.mean([r.shape_fitness for r in reports])),
        mean_metabolic=float(np.mean([r.metabolic_fitness for r in reports])),
    )


def _best_index(population: Sequence[Individual]) -> int:
    return min(range(len(population)), key=lambda i: (-population[i].fitness, i))


def evolve(config: EvolutionConfig, genome_config: GenomeConfig, dev_config: DevConfig,
           net_config: NetConfig, target: TargetShape, examples: ExampleSet,
           on_generation: Callable[[GenerationRecord], None] | None = None) -> RunHistory:
    """Run the GA for ``config.generations`` generations, one record each.

    The random initial population is generation 0.  With ``generations=0`` it
    is still evaluated, nothing is recorded, and its best member is returned.
    """
    init_rng = substream(config.master_seed, "init")
    sel_rng = substream(config.master_seed, "selection")
    var_rng = substream(config.master_seed, "variation")
    gp_rng = substream(config.master_seed, "germline")

    def score(ind: Individual) -> Individual:
        if ind.report is None:
            ind.report, ind.trace = evaluate(ind.genome, dev_config, net_config, target, examples)
        return ind

    population = [score(Individual(random_genome(genome_config, init_rng)))
                  for _ in range(config.population_size)]
    history = RunHistory()
    for gen in range(config.generations):
        if gen > 0:
            population = [score(ind) for ind in _next_generation(population, config, sel_rng, var_rng, gp_rng)]
        rec = _record(gen, population)
        history.records.append(rec)
        if on_generation:
            on_generation(rec)
        log.debug("gen %d best %.6f mean %.6f dist %.6f", gen, rec.best_combined,
                  rec.mean_combined, rec.best_mean_distance)
    history.champion = population[_best_index(population)]
    return history


def _next_generation(population: list[Individual], config: EvolutionConfig, sel_rng, var_rng,
                     gp_rng) -> list[Individual]:
    order = sorted(range(len(population)), key=lambda i: (-population[i].fitness, i))
    # elites keep their evaluation; development and scoring are deterministic
    nxt = [population[i] for i in order[:config.elitism_count]]
    while len(nxt) < config.population_size:
        a = tournament_select(population, config.tournament_size, sel_rng)
        b = tournament_select(population, config.tournament_size, sel_rng)
        if var_rng.random() < config.crossover_probability:
            child = crossover(a.genome, b.genome, var_rng)
        else:
            child = a.genome
        child = mutate(child, config.mutation_rate, var_rng)
        child = germline_penetration(child, a.trace, config.germline_rate, gp_rng)
        nxt.append(Individual(child))
    return nxt
