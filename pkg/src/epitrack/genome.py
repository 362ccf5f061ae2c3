"""Genotype representation: developmental and metabolic genes, variation operators.

Every gene field is stored as one or more *bases*.  Discrete fields take one
base each whose value set is the field's legal range; each metabolic weight
is one base quantized over ``weight_levels`` levels spanning
``[-w_max, w_max]``; a mobile sequence is one opaque base holding a whole
:data:`MobileCode`.  The flat base list is the surface mutation acts on.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields
from enum import IntEnum
from pathlib import Path
from typing import Sequence

import numpy as np

# A mobile code is the lineage path of a driver cell: a tuple of
# (event ordinal, child index) pairs.  The zygote carries the empty path.
MobileCode = tuple[tuple[int, int], ...]
ROOT_CODE: MobileCode = ()

FORMAT_TAG = "ETG1"
MET_BASES = 8


class GenomeError(ValueError):
    """Invalid genome configuration, structure or field value."""


class EventKind(IntEnum):
    PROLIFERATION = 0
    APOPTOSIS = 1


@dataclass(frozen=True)
class GenomeConfig:
    n_dev: int = 20
    n_met: int = 24
    substances: int = 8
    num_stages: int = 6
    max_axis: int = 15
    n_colors: int = 8
    max_switch_changes: int = 4
    w_max: float = 4.0
    weight_levels: int = 256
    # bounds of the space random/mutated mobile sequences are drawn from
    max_code_depth: int = 3
    max_event_ordinal: int = 4
    max_child_index: int = 64
    # initial population: number of active developmental genes, fraction of
    # active metabolic genes
    initial_active_dev: int = 4
    initial_active_met: float = 0.5

    def __post_init__(self) -> None:
        if self.n_dev < 1:
            raise GenomeError(f"n_dev must be >= 1, got {self.n_dev}")
        if self.n_met < 0:
            raise GenomeError(f"n_met must be >= 0, got {self.n_met}")
        if self.substances < 1:
            raise GenomeError(f"substances must be >= 1, got {self.substances}")
        if self.num_stages < 1:
            raise GenomeError(f"num_stages must be >= 1, got {self.num_stages}")
        if not self.w_max > 0:
            raise GenomeError(f"w_max must be > 0, got {self.w_max}")
        if self.max_axis < 1 or self.n_colors < 1 or self.weight_levels < 2:
            raise GenomeError("max_axis, n_colors must be >= 1 and weight_levels >= 2")
        if self.max_switch_changes < 0 or self.max_code_depth < 0:
            raise GenomeError("max_switch_changes and max_code_depth must be >= 0")
        if self.max_event_ordinal < 1 or self.max_child_index < 1:
            raise GenomeError("max_event_ordinal and max_child_index must be >= 1")
        if self.initial_active_dev < 0:
            raise GenomeError("initial_active_dev must be >= 0")
        if not 0.0 <= self.initial_active_met <= 1.0:
            raise GenomeError("initial_active_met must lie in [0, 1]")

    @property
    def dev_bases(self) -> int:
        return 8 + 2 * self.max_switch_changes

    @property
    def n_bases(self) -> int:
        return self.n_dev * self.dev_bases + self.n_met * MET_BASES

    def weight_value(self, q: int) -> float:
        """Real weight for quantization level ``q``."""
        return -self.w_max + q * (2.0 * self.w_max / (self.weight_levels - 1))

    def dev_cardinalities(self) -> list[int | None]:
        """Value-set size of each developmental base; None marks the code base."""
        cards: list[int | None] = [2, None, self.num_stages, 2,
                                   self.max_axis, self.max_axis, self.max_axis,
                                   self.n_colors]
        for _ in range(self.max_switch_changes):
            cards += [self.n_met + 1, 2]
        return cards

    def met_cardinalities(self) -> list[int]:
        S, W = self.substances, self.weight_levels
        return [2, 3, S, S, S, W, W, W]

    def base_cardinalities(self) -> list[int | None]:
        return self.dev_cardinalities() * self.n_dev + self.met_cardinalities() * self.n_met


@dataclass(frozen=True)
class DevelopmentalGene:
    switch: bool
    mobile_sequence: MobileCode
    timer: int
    event: EventKind
    axes: tuple[int, int, int]
    color: int
    # fixed-arity slots of (metabolic gene index, new switch); index -1 = empty slot
    switch_slots: tuple[tuple[int, int], ...] = ()

    @property
    def metabolic_switch_changes(self) -> list[tuple[int, int]]:
        return [(i, v) for i, v in self.switch_slots if i >= 0]

    def to_bases(self) -> list:
        bases: list = [int(self.switch), self.mobile_sequence, self.timer, int(self.event),
                       self.axes[0] - 1, self.axes[1] - 1, self.axes[2] - 1, self.color]
        for idx, val in self.switch_slots:
            bases += [idx + 1, val]
        return bases

    @classmethod
    def from_bases(cls, bases: Sequence) -> DevelopmentalGene:
        slots = tuple((int(bases[i]) - 1, int(bases[i + 1])) for i in range(8, len(bases), 2))
        return cls(switch=bool(bases[0]), mobile_sequence=tuple(bases[1]), timer=int(bases[2]),
                   event=EventKind(int(bases[3])),
                   axes=(int(bases[4]) + 1, int(bases[5]) + 1, int(bases[6]) + 1),
                   color=int(bases[7]), switch_slots=slots)


@dataclass(frozen=True)
class MetabolicGene:
    switch: bool
    layer: int
    input_a: int
    input_b: int
    output: int
    # quantization levels of (w1, w2, w0); see GenomeConfig.weight_value
    wq: tuple[int, int, int]

    def to_bases(self) -> list:
        return [int(self.switch), self.layer - 1, self.input_a, self.input_b, self.output, *self.wq]

    @classmethod
    def from_bases(cls, bases: Sequence) -> MetabolicGene:
        b = [int(x) for x in bases]
        return cls(switch=bool(b[0]), layer=b[1] + 1, input_a=b[2], input_b=b[3], output=b[4],
                   wq=(b[5], b[6], b[7]))


@dataclass(frozen=True)
class Genome:
    config: GenomeConfig
    dev_genes: tuple[DevelopmentalGene, ...]
    met_genes: tuple[MetabolicGene, ...]
    _bases: tuple = field(default=(), compare=False, repr=False)

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        cfg = self.config
        if len(self.dev_genes) != cfg.n_dev or len(self.met_genes) != cfg.n_met:
            raise GenomeError(
                f"expected {cfg.n_dev} developmental and {cfg.n_met} metabolic genes, "
                f"got {len(self.dev_genes)} and {len(self.met_genes)}")
        for i, g in enumerate(self.dev_genes):
            if not 0 <= g.timer < cfg.num_stages:
                raise GenomeError(f"dev gene {i}: timer {g.timer} out of range")
            if any(not 1 <= a <= cfg.max_axis for a in g.axes):
                raise GenomeError(f"dev gene {i}: semi-axes {g.axes} out of [1, {cfg.max_axis}]")
            if not 0 <= g.color < cfg.n_colors:
                raise GenomeError(f"dev gene {i}: color {g.color} out of range")
            if len(g.switch_slots) != cfg.max_switch_changes:
                raise GenomeError(f"dev gene {i}: expected {cfg.max_switch_changes} switch slots")
            for idx, val in g.switch_slots:
                if not -1 <= idx < cfg.n_met or val not in (0, 1):
                    raise GenomeError(f"dev gene {i}: bad metabolic switch change ({idx}, {val})")
            for pair in g.mobile_sequence:
                if len(pair) != 2 or pair[0] < 0 or pair[1] < 0:
                    raise GenomeError(f"dev gene {i}: malformed mobile sequence {g.mobile_sequence}")
        S = cfg.substances
        for i, m in enumerate(self.met_genes):
            if m.layer not in (1, 2, 3):
                raise GenomeError(f"metabolic gene {i}: layer {m.layer} not in 1..3")
            if not (0 <= m.input_a < S and 0 <= m.input_b < S and 0 <= m.output < S):
                raise GenomeError(f"metabolic gene {i}: substance index out of range")
            if any(not 0 <= q < cfg.weight_levels for q in m.wq):
                raise GenomeError(f"metabolic gene {i}: weight level out of range")

    def weights(self, i: int) -> tuple[float, float, float]:
        """Real (w1, w2, w0) of metabolic gene ``i``."""
        return tuple(self.config.weight_value(q) for q in self.met_genes[i].wq)

    @property
    def genes(self) -> list:
        return [*self.dev_genes, *self.met_genes]

    def to_bases(self) -> list:
        if not self._bases:
            bases: list = []
            for g in self.genes:
                bases += g.to_bases()
            object.__setattr__(self, "_bases", tuple(bases))
        return list(self._bases)

    @classmethod
    def from_bases(cls, config: GenomeConfig, bases: Sequence) -> Genome:
        if len(bases) != config.n_bases:
            raise GenomeError(f"expected {config.n_bases} bases, got {len(bases)}")
        nd = config.dev_bases
        dev = tuple(DevelopmentalGene.from_bases(bases[i * nd:(i + 1) * nd])
                    for i in range(config.n_dev))
        off = config.n_dev * nd
        met = tuple(MetabolicGene.from_bases(bases[off + i * MET_BASES:off + (i + 1) * MET_BASES])
                    for i in range(config.n_met))
        return cls(config, dev, met)

    @classmethod
    def from_genes(cls, config: GenomeConfig, genes: Sequence) -> Genome:
        return cls(config, tuple(genes[:config.n_dev]), tuple(genes[config.n_dev:]))


# --------------------------------------------------------------------------
# random construction and variation

def random_code(config: GenomeConfig, rng: np.random.Generator) -> MobileCode:
    """Draw a code: depth uniform in [0, max_code_depth], each pair uniform."""
    depth = int(rng.integers(0, config.max_code_depth + 1))
    return tuple((int(rng.integers(config.max_event_ordinal)), int(rng.integers(config.max_child_index)))
                 for _ in range(depth))


def _random_dev_gene(config: GenomeConfig, rng: np.random.Generator, active: bool) -> DevelopmentalGene:
    slots = tuple((int(rng.integers(config.n_met + 1)) - 1, int(rng.integers(2)))
                  for _ in range(config.max_switch_changes))
    return DevelopmentalGene(
        switch=active,
        mobile_sequence=random_code(config, rng),
        timer=int(rng.integers(config.num_stages)),
        event=EventKind(int(rng.integers(2))),
        axes=tuple(int(a) for a in rng.integers(1, config.max_axis + 1, size=3)),
        color=int(rng.integers(config.n_colors)),
        switch_slots=slots,
    )


def _random_met_gene(config: GenomeConfig, rng: np.random.Generator) -> MetabolicGene:
    S = config.substances
    return MetabolicGene(
        switch=bool(rng.random() < config.initial_active_met),
        layer=int(rng.integers(1, 4)),
        input_a=int(rng.integers(S)),
        input_b=int(rng.integers(S)),
        output=int(rng.integers(S)),
        wq=tuple(int(q) for q in rng.integers(config.weight_levels, size=3)),
    )


def random_genome(config: GenomeConfig, seed: int | np.random.Generator) -> Genome:
    """Uniformly sample every field.

    Only ``initial_active_dev`` developmental genes (capped at ``n_dev``) start
    switched on, so initial embryos stay small.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    n_on = min(config.initial_active_dev, config.n_dev)
    active = set(rng.choice(config.n_dev, size=n_on, replace=False).tolist())
    dev = tuple(_random_dev_gene(config, rng, i in active) for i in range(config.n_dev))
    met = tuple(_random_met_gene(config, rng) for _ in range(config.n_met))
    return Genome(config, dev, met)


def mutate(genome: Genome, rate: float, rng: np.random.Generator) -> Genome:
    """Replace each base, with probability ``rate``, by a different legal value.

    Bases whose value set has a single element cannot change and are left alone.
    """
    if not 0.0 <= rate <= 1.0:
        raise GenomeError(f"mutation rate must lie in [0, 1], got {rate}")
    config = genome.config
    bases = genome.to_bases()
    hits = np.flatnonzero(rng.random(len(bases)) < rate)
    if hits.size == 0:
        return genome
    cards = config.base_cardinalities()
    for i in hits:
        card = cards[i]
        if card is None:
            old = bases[i]
            for _ in range(64):
                new = random_code(config, rng)
                if new != old:
                    bases[i] = new
                    break
        elif card > 1:
            bases[i] = (bases[i] + 1 + int(rng.integers(card - 1))) % card
    return Genome.from_bases(config, bases)


def crossover_at(parent_a: Genome, parent_b: Genome, k: int) -> Genome:
    """Child takes genes [0, k) from ``parent_a`` and [k, end) from ``parent_b``."""
    if parent_a.config != parent_b.config:
        raise GenomeError("crossover parents have different genome configurations")
    genes_a, genes_b = parent_a.genes, parent_b.genes
    if not 0 <= k <= len(genes_a):
        raise GenomeError(f"cut point {k} outside [0, {len(genes_a)}]")
    return Genome.from_genes(parent_a.config, genes_a[:k] + genes_b[k:])


def crossover(parent_a: Genome, parent_b: Genome, rng: np.random.Generator) -> Genome:
    """Single-point crossover at a uniformly chosen gene boundary."""
    if parent_a.config != parent_b.config:
        raise GenomeError("crossover parents have different genome configurations")
    k = int(rng.integers(0, len(parent_a.genes) + 1))
    return crossover_at(parent_a, parent_b, k)


# --------------------------------------------------------------------------
# ETG1 text format
#
#   ETG1 key=value ...            (GenomeConfig fields)
#   D <16 bases>                  one line per developmental gene
#   M <8 bases>                   one line per metabolic gene
#
# Bases are written in encoding order as integers (field value minus its
# lower bound; weights as quantization levels).  The mobile sequence is
# written as ``.`` for the root code or ``o:c,o:c,...`` pairs.

def format_code(code: MobileCode) -> str:
    return "." if not code else ",".join(f"{o}:{c}" for o, c in code)


def parse_code(text: str) -> MobileCode:
    if text == ".":
        return ROOT_CODE
    try:
        return tuple((int(o), int(c)) for o, c in (p.split(":") for p in text.split(",")))
    except ValueError as exc:
        raise GenomeError(f"malformed mobile code {text!r}") from exc


def dumps(genome: Genome) -> str:
    cfg = asdict(genome.config)
    lines = [FORMAT_TAG + " " + " ".join(f"{k}={v!r}" for k, v in cfg.items())]
    for g in genome.dev_genes:
        b = g.to_bases()
        b[1] = format_code(b[1])
        lines.append("D " + " ".join(str(x) for x in b))
    for m in genome.met_genes:
        lines.append("M " + " ".join(str(x) for x in m.to_bases()))
    return "\n".join(lines) + "\n"


def loads(text: str) -> Genome:
    lines = text.splitlines()
    if not lines or not lines[0].startswith(FORMAT_TAG + " ") and lines[0] != FORMAT_TAG:
        raise GenomeError(f"missing {FORMAT_TAG} header")
    types = {f.name: f.type for f in fields(GenomeConfig)}
    kwargs = {}
    for item in lines[0].split()[1:]:
        key, _, value = item.partition("=")
        if key not in types:
            raise GenomeError(f"unknown genome config key {key!r}")
        kwargs[key] = float(value) if types[key] in ("float", float) else int(value)
    config = GenomeConfig(**kwargs)
    bases: list = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        tag, *tokens = line.split()
        if tag == "D":
            bases += [int(tokens[0]), parse_code(tokens[1]), *(int(t) for t in tokens[2:])]
        elif tag == "M":
            bases += [int(t) for t in tokens]
        else:
            raise GenomeError(f"line {lineno}: unknown record tag {tag!r}")
    return Genome.from_bases(config, bases)


def save(genome: Genome, path: str | Path) -> None:
    Path(path).write_text(dumps(genome))


def load(path: str | Path) -> Genome:
    return loads(Path(path).read_text())
