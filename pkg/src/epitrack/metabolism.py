"""Metabolic computation over the driver cells of a developed embryo.

Each driver runs a three-layer network of operators (one per active metabolic
gene).  Drivers are arranged in levels between an input cell and an output
cell; the concentration vector is pushed level by level, each cell receiving
the mean of the previous level's emissions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .development import Driver, Embryo
from .genome import Genome, MetabolicGene


class NetworkError(ValueError):
    """The embryo cannot host a metabolic network (fewer than two drivers)."""


@dataclass(frozen=True)
class NetConfig:
    levels: int = 6
    c_max: float = 4.0
    # absolute grid points the input/output cells are chosen near
    in_point: tuple[float, float, float] = (26.0, 32.0, 32.0)
    out_point: tuple[float, float, float] = (38.0, 32.0, 32.0)

    def __post_init__(self) -> None:
        if self.levels < 1:
            raise ValueError(f"levels must be >= 1, got {self.levels}")
        if not self.c_max > 0:
            raise ValueError(f"c_max must be > 0, got {self.c_max}")


@dataclass
class LeveledNetwork:
    levels: list[list[Driver]]

    @property
    def input_cell(self) -> Driver:
        return self.levels[0][0]

    @property
    def output_cell(self) -> Driver:
        return self.levels[-1][0]

    @property
    def cells(self) -> list[Driver]:
        return [c for level in self.levels for c in level]

    def level_of(self) -> dict[tuple, int]:
        return {c.code: k for k, level in enumerate(self.levels) for c in level}


def eval_operator(gene: MetabolicGene, conc: np.ndarray, weights: tuple[float, float, float]) -> tuple[int, float]:
    """Return (target substance, tanh(w1*c[a] + w2*c[b] + w0))."""
    w1, w2, w0 = weights
    return gene.output, math.tanh(w1 * conc[gene.input_a] + w2 * conc[gene.input_b] + w0)


def effective_switches(genome: Genome, cell: Driver) -> np.ndarray:
    base = np.array([g.switch for g in genome.met_genes], dtype=bool)
    overlay = cell.active_ops
    return np.where(overlay < 0, base, overlay > 0)


def eval_cell(cell: Driver, genome: Genome, conc_in: np.ndarray, c_max: float = 4.0) -> np.ndarray:
    """Run the cell's three operator layers on ``conc_in``.

    Operators of a layer all read the vector as it stood at layer entry; their
    outputs are summed per substance and applied together, then clamped.
    """
    return _Compiled(genome).run(conc_in[None, None, :], np.atleast_2d(effective_switches(genome, cell)),
                                 c_max)[0, 0]


class _Compiled:
    """Genome metabolic genes packed into per-layer arrays."""

    def __init__(self, genome: Genome):
        S = genome.config.substances
        self.genome = genome
        self.switches = np.array([g.switch for g in genome.met_genes], dtype=bool)
        self.layers = []
        for layer in (1, 2, 3):
            idx = np.array([i for i, g in enumerate(genome.met_genes) if g.layer == layer], dtype=np.int64)
            if idx.size == 0:
                continue
            genes = [genome.met_genes[i] for i in idx]
            w = np.array([genome.weights(i) for i in idx])
            a = np.array([g.input_a for g in genes])
            b = np.array([g.input_b for g in genes])
            onehot = np.zeros((idx.size, S))
            onehot[np.arange(idx.size), [g.output for g in genes]] = 1.0
            self.layers.append((idx, a, b, w[:, 0], w[:, 1], w[:, 2], onehot))

    def activity(self, cells: list[Driver]) -> np.ndarray:
        overlay = np.array([c.active_ops for c in cells]).reshape(len(cells), -1)
        return np.where(overlay < 0, self.switches[None, :], overlay > 0)

    def run(self, x: np.ndarray, active: np.ndarray, c_max: float) -> np.ndarray:
        """``x``: (E, n, S) inputs for n cells over E examples; ``active``: (n, G)."""
        for idx, a, b, w1, w2, w0, onehot in self.layers:
            act = active[:, idx]
            if not act.any():
                continue
            y = np.tanh(w1 * x[..., a] + w2 * x[..., b] + w0) * act
            x = np.clip(x + y @ onehot, 0.0, c_max)
        return x


def assign_levels(embryo: Embryo, in_point, out_point, levels: int) -> LeveledNetwork:
    """Turn the driver roster into a strictly layered network.

    Input/output cells are the drivers nearest ``in_point``/``out_point`` (ties
    go to the lexicographically smallest position).  Every other driver sits at
    ``clamp(round(L * d_in / (d_in + d_out)), 1, L-1)``.
    """
    drivers = embryo.roster
    if len(drivers) < 2:
        raise NetworkError(f"need at least 2 driver cells, embryo has {len(drivers)}")
    if levels < 1:
        raise ValueError(f"level count must be >= 1, got {levels}")
    pos = np.array([d.position for d in drivers], dtype=float)
    lex = np.lexsort(pos.T[::-1])  # sort by x, then y, then z

    def nearest(point, exclude=-1):
        d = np.linalg.norm(pos[lex] - np.asarray(point, float), axis=1)
        if exclude >= 0:
            d[np.flatnonzero(lex == exclude)] = np.inf
        return int(lex[np.argmin(d)])

    i_in = nearest(in_point)
    i_out = nearest(out_point)
    if i_out == i_in:
        i_out = nearest(out_point, exclude=i_in)

    d_in = np.linalg.norm(pos - pos[i_in], axis=1)
    d_out = np.linalg.norm(pos - pos[i_out], axis=1)
    level = np.floor(levels * d_in / (d_in + d_out) + 0.5)
    level = np.clip(level, 1, max(levels - 1, 1)).astype(int)
    out: list[list[Driver]] = [[] for _ in range(levels + 1)]
    out[0].append(drivers[i_in])
    out[levels].append(drivers[i_out])
    if levels >= 2:  # with a single level only input and output take part
        for i, d in enumerate(drivers):
            if i != i_in and i != i_out:
                out[level[i]].append(d)
    return LeveledNetwork(out)


def propagate_batch(network: LeveledNetwork, genome: Genome, inputs: np.ndarray,
                    c_max: float = 4.0, record: bool = False):
    """Propagate E input vectors at once; returns (E, S) output-cell vectors.

    With ``record=True`` also returns, per level, a pair of (E, n, S) arrays:
    what each cell received (after its in-filter) and what it produced (before
    its out-filter).  Empty levels record None.
    """
    compiled = _Compiled(genome)
    inputs = np.atleast_2d(np.asarray(inputs, dtype=float))
    carried = inputs  # (E, S) vector handed to the next non-empty level
    received = []
    result = None
    last = len(network.levels) - 1
    for k, cells in enumerate(network.levels):
        if not cells:
            received.append(None)
            continue
        in_f = np.array([c.in_filter for c in cells], dtype=float)
        out_f = np.array([c.out_filter for c in cells], dtype=float)
        x = carried[:, None, :] * in_f[None, :, :]
        x_in = x
        x = compiled.run(x, compiled.activity(cells), c_max)
        if record:
            received.append((x_in, x))
        if k == last:
            result = x[:, 0, :]
        carried = (x * out_f[None, :, :]).mean(axis=1)
    if record:
        return result, received
    return result


def propagate(network: LeveledNetwork, genome: Genome, input: np.ndarray, c_max: float = 4.0) -> np.ndarray:
    return propagate_batch(network, genome, np.asarray(input, float)[None, :], c_max)[0]
