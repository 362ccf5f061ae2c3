"""Scoring: Jaccard shape adherence blended 50/50 with metabolic memory accuracy."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .development import DevConfig, DevelopmentTrace, Embryo, develop, ellipsoid_mask
from .genome import Genome
from .metabolism import NetConfig, NetworkError, assign_levels, propagate_batch

SHAPE_WEIGHT = 0.5
METABOLIC_WEIGHT = 0.5


@dataclass(frozen=True)
class TargetShape:
    mask: np.ndarray  # boolean, grid-shaped

    def __post_init__(self) -> None:
        if self.mask.ndim != 3:
            raise ValueError("target mask must be 3-dimensional")
        if not self.mask.any():
            raise ValueError("target shape is empty")

    @property
    def dims(self) -> tuple[int, int, int]:
        return tuple(self.mask.shape)

    @property
    def size(self) -> int:
        return int(np.count_nonzero(self.mask))

    @classmethod
    def from_voxels(cls, dims, voxels) -> TargetShape:
        mask = np.zeros(dims, dtype=bool)
        v = np.asarray(list(voxels), dtype=np.int64).reshape(-1, 3)
        if v.size and ((v < 0).any() or (v >= np.array(dims)).any()):
            raise ValueError("target voxel outside grid")
        mask[tuple(v.T)] = True
        return cls(mask)

    @classmethod
    def ellipsoid(cls, dims, axes, center=None) -> TargetShape:
        center = center or tuple(d // 2 for d in dims)
        mask = np.zeros(dims, dtype=bool)
        e = ellipsoid_mask(tuple(int(a) for a in axes))
        lo = [c - a for c, a in zip(center, axes)]
        if min(lo) < 0 or any(l + s > d for l, s, d in zip(lo, e.shape, dims)):
            raise ValueError(f"ellipsoid {axes} at {center} does not fit in grid {dims}")
        mask[lo[0]:lo[0] + e.shape[0], lo[1]:lo[1] + e.shape[1], lo[2]:lo[2] + e.shape[2]] = e
        return cls(mask)

    @classmethod
    def sphere(cls, dims, radius: int, center=None) -> TargetShape:
        return cls.ellipsoid(dims, (radius, radius, radius), center)

    @classmethod
    def box(cls, dims, half_sizes, center=None) -> TargetShape:
        center = center or tuple(d // 2 for d in dims)
        mask = np.zeros(dims, dtype=bool)
        sl = tuple(slice(max(c - h, 0), min(c + h + 1, d)) for c, h, d in zip(center, half_sizes, dims))
        mask[sl] = True
        return cls(mask)


@dataclass(frozen=True)
class ExampleSet:
    inputs: np.ndarray   # (n, S)
    targets: np.ndarray  # (n, S)

    def __post_init__(self) -> None:
        if self.inputs.shape != self.targets.shape or self.inputs.ndim != 2:
            raise ValueError("inputs and targets must both have shape (n, S)")

    def __len__(self) -> int:
        return self.inputs.shape[0]

    @property
    def substances(self) -> int:
        return self.inputs.shape[1]


@dataclass
class FitnessReport:
    shape_fitness: float
    metabolic_fitness: float
    combined: float
    mean_distance: float
    distances: list[float] = field(default_factory=list)


def normalized_distance(a, b) -> float:
    """Euclidean distance scaled by 1/sqrt(S)."""
    a, b = np.asarray(a, float), np.asarray(b, float)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b) / math.sqrt(a.shape[-1]))


def normalized_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-wise :func:`normalized_distance` of two (n, S) arrays."""
    return np.linalg.norm(a - b, axis=-1) / math.sqrt(a.shape[-1])


def metabolic_fitness(outputs, targets) -> float:
    outputs, targets = np.asarray(outputs, float), np.asarray(targets, float)
    if outputs.shape != targets.shape:
        raise ValueError("outputs and targets differ in shape")
    return float(1.0 - np.minimum(1.0, normalized_distances(outputs, targets)).mean())


def shape_fitness(embryo: Embryo, target: TargetShape) -> float:
    if tuple(embryo.dims) != target.dims:
        raise ValueError(f"embryo grid {embryo.dims} differs from target grid {target.dims}")
    body = embryo.kind != 0
    inter = np.count_nonzero(body & target.mask)
    union = np.count_nonzero(body | target.mask)
    return inter / union


def combine(shape: float, metabolic: float) -> float:
    return SHAPE_WEIGHT * shape + METABOLIC_WEIGHT * metabolic


def combined_fitness(embryo: Embryo, genome: Genome, target: TargetShape, examples: ExampleSet,
                     net_config: NetConfig) -> FitnessReport:
    """Score a developed body.  A body with fewer than two drivers gets metabolic
    fitness 0 and a distance of 1 on every example."""
    shape = shape_fitness(embryo, target)
    try:
        network = assign_levels(embryo, net_config.in_point, net_config.out_point, net_config.levels)
    except NetworkError:
        dist = np.ones(len(examples))
        metabolic = 0.0
    else:
        outputs = propagate_batch(network, genome, examples.inputs, net_config.c_max)
        dist = normalized_distances(outputs, examples.targets)
        metabolic = float(1.0 - np.minimum(1.0, dist).mean())
    return FitnessReport(shape_fitness=shape, metabolic_fitness=metabolic,
                         combined=combine(shape, metabolic),
                         mean_distance=float(dist.mean()), distances=dist.tolist())


def evaluate(genome: Genome, dev_config: DevConfig, net_config: NetConfig, target: TargetShape,
             examples: ExampleSet) -> tuple[FitnessReport, DevelopmentTrace]:
    """Develop ``genome`` and score the resulting body."""
    embryo, trace = develop(genome, dev_config)
    return combined_fitness(embryo, genome, target, examples, net_config), trace
