"""Epigenetic Tracking: developmental voxel bodies that compute, co-evolved by a GA."""
from .development import DevConfig, Embryo, develop
from .evolution import EvolutionConfig, RunHistory, evolve
from .fitness import ExampleSet, FitnessReport, TargetShape, combined_fitness, normalized_distance
from .genome import Genome, GenomeConfig, crossover, mutate, random_genome
from .metabolism import NetConfig, assign_levels, propagate

__all__ = [
    "DevConfig", "Embryo", "develop",
    "EvolutionConfig", "RunHistory", "evolve",
    "ExampleSet", "FitnessReport", "TargetShape", "combined_fitness", "normalized_distance",
    "Genome", "GenomeConfig", "crossover", "mutate", "random_genome",
    "NetConfig", "assign_levels", "propagate",
]
