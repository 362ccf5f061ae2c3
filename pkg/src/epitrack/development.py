"""Growth of an embryo from a single zygote driver cell.

The body lives on a dense voxel grid (``kind`` and ``color`` arrays); driver
cells are additionally kept in an insertion-ordered roster keyed by their
mobile code.  At every stage the active developmental genes whose timer equals
the clock are matched against the drivers present at stage entry, and the
matching change events are applied in a fixed order.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from .genome import ROOT_CODE, DevelopmentalGene, EventKind, Genome, MobileCode

Position = tuple[int, int, int]


class CellKind(IntEnum):
    EMPTY = 0
    NORMAL = 1
    DRIVER = 2


@dataclass(frozen=True)
class DevConfig:
    dims: tuple[int, int, int] = (64, 64, 64)
    driver_spacing: int = 4

    def __post_init__(self) -> None:
        if len(self.dims) != 3 or min(self.dims) < 1:
            raise ValueError(f"grid dims must be three positive integers, got {self.dims}")
        if self.driver_spacing < 1:
            raise ValueError(f"driver_spacing must be >= 1, got {self.driver_spacing}")

    @property
    def center(self) -> Position:
        return tuple(d // 2 for d in self.dims)


@dataclass
class Driver:
    """A driver cell.  ``active_ops`` overrides metabolic switches: -1 = inherit
    the genome switch, 0/1 = forced off/on in this cell."""

    code: MobileCode
    position: Position
    color: int
    active_ops: np.ndarray
    in_filter: np.ndarray
    out_filter: np.ndarray
    events: int = 0  # change events orchestrated so far; the next event's ordinal

    kind = CellKind.DRIVER


@dataclass
class Embryo:
    dims: tuple[int, int, int]
    kind: np.ndarray
    color: np.ndarray
    drivers: dict[MobileCode, Driver] = field(default_factory=dict)
    driver_at: dict[Position, MobileCode] = field(default_factory=dict)
    clock: int = 0

    @classmethod
    def empty(cls, dims: tuple[int, int, int]) -> Embryo:
        return cls(tuple(dims), np.zeros(dims, np.uint8), np.zeros(dims, np.uint8))

    @property
    def roster(self) -> list[Driver]:
        return list(self.drivers.values())

    @property
    def cell_count(self) -> int:
        return int(np.count_nonzero(self.kind))

    def occupied(self) -> np.ndarray:
        return self.kind != CellKind.EMPTY

    def add_driver(self, driver: Driver) -> None:
        pos = driver.position
        old = self.driver_at.get(pos)
        if old is not None:
            del self.drivers[old]
        self.drivers[driver.code] = driver
        self.driver_at[pos] = driver.code
        self.kind[pos] = CellKind.DRIVER
        self.color[pos] = driver.color

    def remove_driver(self, code: MobileCode) -> None:
        d = self.drivers.pop(code)
        del self.driver_at[d.position]


@dataclass
class EmbryoDelta:
    event: EventKind
    created: int = 0   # voxels that went from empty to occupied
    removed: int = 0   # voxels that went from occupied to empty
    new_drivers: list[MobileCode] = field(default_factory=list)
    removed_drivers: list[MobileCode] = field(default_factory=list)


@dataclass
class DevelopmentTrace:
    """Every mobile code issued during one development, in issue order."""

    codes: list[MobileCode] = field(default_factory=lambda: [ROOT_CODE])
    events: list[tuple[int, MobileCode, int]] = field(default_factory=list)  # (stage, driver, gene)

    def __len__(self) -> int:
        return len(self.codes)


# --------------------------------------------------------------------------
# geometry

@functools.lru_cache(maxsize=512)
def ellipsoid_mask(axes: tuple[int, int, int]) -> np.ndarray:
    """Boolean mask of lattice points with x²/a² + y²/b² + z²/c² <= 1.

    Shape is (2a+1, 2b+1, 2c+1) with the centre at index (a, b, c).  The test is
    done in integers (multiplied through by a²b²c²) so boundary points are exact.
    """
    a, b, c = (int(v) for v in axes)
    x = np.arange(-a, a + 1, dtype=np.int64) ** 2
    y = np.arange(-b, b + 1, dtype=np.int64) ** 2
    z = np.arange(-c, c + 1, dtype=np.int64) ** 2
    bc, ac, ab, abc = (b * c) ** 2, (a * c) ** 2, (a * b) ** 2, (a * b * c) ** 2
    mask = (x[:, None, None] * bc + y[None, :, None] * ac) + z[None, None, :] * ab <= abc
    mask.setflags(write=False)
    return mask


@functools.lru_cache(maxsize=512)
def sublattice_offsets(axes: tuple[int, int, int], spacing: int) -> np.ndarray:
    """Offsets (multiples of ``spacing``) inside the ellipsoid, lexicographic order."""
    mask = ellipsoid_mask(axes)
    starts = [a % spacing for a in axes]
    sub = mask[starts[0]::spacing, starts[1]::spacing, starts[2]::spacing]
    idx = np.argwhere(sub) * spacing + np.array(starts) - np.array(axes)
    idx.setflags(write=False)
    return idx


def _clip_region(center: Position, axes: tuple[int, int, int], dims: tuple[int, int, int]):
    """Grid slices and matching mask slices of an ellipsoid clipped to the grid."""
    grid_sl, mask_sl = [], []
    for c, a, d in zip(center, axes, dims):
        lo, hi = max(c - a, 0), min(c + a + 1, d)
        if lo >= hi:
            return None
        grid_sl.append(slice(lo, hi))
        mask_sl.append(slice(lo - (c - a), hi - (c - a)))
    return tuple(grid_sl), tuple(mask_sl)


# --------------------------------------------------------------------------
# operations

def derive_child_codes(parent: MobileCode, event_ordinal: int, n: int) -> list[MobileCode]:
    return [parent + ((event_ordinal, i),) for i in range(n)]


def gene_matches(driver: Driver, gene: DevelopmentalGene, clock: int) -> bool:
    return bool(gene.switch) and gene.timer == clock and gene.mobile_sequence == driver.code


def make_zygote(dims: tuple[int, int, int], genome: Genome) -> Driver:
    S = genome.config.substances
    return Driver(code=ROOT_CODE, position=tuple(d // 2 for d in dims), color=0,
                  active_ops=np.full(genome.config.n_met, -1, np.int8),
                  in_filter=np.ones(S, np.uint8), out_filter=np.ones(S, np.uint8))


def apply_change_event(embryo: Embryo, driver: Driver, gene: DevelopmentalGene,
                       config: DevConfig | None = None,
                       trace: DevelopmentTrace | None = None) -> EmbryoDelta:
    """Apply ``gene``'s change event around ``driver`` (mutates ``embryo``).

    Proliferation fills the clipped ellipsoid with normal cells of the gene's
    colour, overwriting whatever was there except the orchestrating driver, and
    seeds child drivers on the spacing sublattice.  Apoptosis empties the
    ellipsoid, orchestrating driver included.
    """
    config = config or DevConfig(dims=embryo.dims)
    delta = EmbryoDelta(gene.event)
    region = _clip_region(driver.position, gene.axes, embryo.dims)
    if region is None:
        return delta
    grid_sl, mask_sl = region
    mask = ellipsoid_mask(tuple(gene.axes))[mask_sl]
    sub_kind = embryo.kind[grid_sl]
    occupied_before = sub_kind[mask] != CellKind.EMPTY

    lo = np.array([s.start for s in grid_sl])
    hit = np.argwhere(mask & (sub_kind == CellKind.DRIVER)) + lo
    for p in map(tuple, hit.tolist()):
        code = embryo.driver_at[p]
        if code == driver.code and gene.event == EventKind.PROLIFERATION:
            continue
        embryo.remove_driver(code)
        delta.removed_drivers.append(code)

    if gene.event == EventKind.APOPTOSIS:
        sub_kind[mask] = CellKind.EMPTY
        embryo.color[grid_sl][mask] = 0
        delta.removed = int(np.count_nonzero(occupied_before))
        return delta

    sub_kind[mask] = CellKind.NORMAL
    embryo.color[grid_sl][mask] = gene.color
    delta.created = int(mask.sum() - np.count_nonzero(occupied_before))
    if driver.code in embryo.drivers:
        embryo.kind[driver.position] = CellKind.DRIVER
        embryo.color[driver.position] = driver.color

    center = np.array(driver.position)
    dims = np.array(embryo.dims)
    positions = []
    for off in sublattice_offsets(tuple(gene.axes), config.driver_spacing):
        if not off.any():
            continue  # centre voxel is the orchestrating driver's own
        p = center + off
        if (p >= 0).all() and (p < dims).all():
            positions.append(tuple(int(v) for v in p))

    overlay = driver.active_ops.copy()
    for idx, val in gene.metabolic_switch_changes:
        overlay[idx] = val
    codes = derive_child_codes(driver.code, driver.events, len(positions))
    driver.events += 1
    for code, pos in zip(codes, positions):
        embryo.add_driver(Driver(code=code, position=pos, color=gene.color,
                                 active_ops=overlay.copy(), in_filter=driver.in_filter.copy(),
                                 out_filter=driver.out_filter.copy()))
    delta.new_drivers = codes
    if trace is not None:
        trace.codes.extend(codes)
    return delta


def develop(genome: Genome, config: DevConfig | None = None) -> tuple[Embryo, DevelopmentTrace]:
    """Grow an embryo from a single zygote over ``genome.config.num_stages`` stages."""
    config = config or DevConfig()
    embryo = Embryo.empty(config.dims)
    embryo.add_driver(make_zygote(config.dims, genome))
    trace = DevelopmentTrace()

    by_timer: dict[int, list[tuple[int, DevelopmentalGene]]] = {}
    for gi, gene in enumerate(genome.dev_genes):
        if gene.switch:
            by_timer.setdefault(gene.timer, []).append((gi, gene))

    for stage in range(genome.config.num_stages):
        embryo.clock = stage
        genes = by_timer.get(stage)
        if not genes:
            continue
        # snapshot: matches are collected before any event of this stage runs
        matched = [(gi, gene, embryo.drivers[gene.mobile_sequence]) for gi, gene in genes
                   if gene.mobile_sequence in embryo.drivers]
        if not matched:
            continue
        rank = {}
        for r, code in enumerate(embryo.drivers):
            rank[code] = r
        matched.sort(key=lambda m: (m[1].event != EventKind.PROLIFERATION, rank[m[2].code], m[0]))
        for gi, gene, driver in matched:
            # a driver overwritten earlier in this stage no longer acts
            if embryo.drivers.get(driver.code) is not driver:
                continue
            apply_change_event(embryo, driver, gene, config, trace)
            trace.events.append((stage, driver.code, gi))
    embryo.clock = genome.config.num_stages
    return embryo, trace
