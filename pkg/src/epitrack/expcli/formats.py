"""File formats: ETV1 voxel bodies and the CSV outputs of experiments.

ETV1::

    ETV1 <dimx> <dimy> <dimz> <cellcount>
    x y z kind color          one line per cell, sorted by (x, y, z)

``kind`` is 1 for normal cells and 2 for drivers.  Floats in CSV files are
written with ``repr`` so they read back bit-exact.
"""
from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ..development import Embryo
from ..evolution import GenerationRecord
from ..fitness import ExampleSet, FitnessReport, TargetShape, normalized_distances
from ..genome import Genome, format_code
from ..metabolism import LeveledNetwork, propagate_batch

VOXEL_TAG = "ETV1"


class FormatError(ValueError):
    pass


def _open_for_write(path: Path):
    try:
        return open(path, "w", newline="")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc


def export_voxels(embryo: Embryo, path: str | Path) -> None:
    path = Path(path)
    occupied = np.argwhere(embryo.kind != 0)  # argwhere is already (x, y, z)-lexicographic
    kinds = embryo.kind[tuple(occupied.T)]
    colors = embryo.color[tuple(occupied.T)]
    with _open_for_write(path) as fh:
        dx, dy, dz = embryo.dims
        fh.write(f"{VOXEL_TAG} {dx} {dy} {dz} {len(occupied)}\n")
        for (x, y, z), k, c in zip(occupied.tolist(), kinds.tolist(), colors.tolist()):
            fh.write(f"{x} {y} {z} {k} {c}\n")


def read_voxels(path: str | Path) -> tuple[tuple[int, int, int], np.ndarray]:
    """Return grid dims and an (n, 5) int array of ``x y z kind color`` rows."""
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror}") from exc
    head = lines[0].split() if lines else []
    if len(head) != 5 or head[0] != VOXEL_TAG:
        raise FormatError(f"{path}: missing '{VOXEL_TAG} dimx dimy dimz count' header")
    dims = tuple(int(v) for v in head[1:4])
    count = int(head[4])
    body = [ln for ln in lines[1:] if ln.strip()]
    if len(body) != count:
        raise FormatError(f"{path}: header announces {count} cells, found {len(body)}")
    rows = np.array([[int(v) for v in ln.split()] for ln in body], dtype=np.int64).reshape(-1, 5)
    if rows.size and ((rows[:, :3] < 0).any() or (rows[:, :3] >= np.array(dims)).any()):
        raise FormatError(f"{path}: cell outside the declared grid")
    return dims, rows


def read_target(path: str | Path) -> TargetShape:
    dims, rows = read_voxels(path)
    return TargetShape.from_voxels(dims, rows[:, :3])


def write_target(target: TargetShape, path: str | Path) -> None:
    vox = np.argwhere(target.mask)
    with _open_for_write(Path(path)) as fh:
        fh.write(f"{VOXEL_TAG} {' '.join(map(str, target.dims))} {len(vox)}\n")
        for x, y, z in vox.tolist():
            fh.write(f"{x} {y} {z} 1 0\n")


# --------------------------------------------------------------------------
# CSV

def _write_rows(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with _open_for_write(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in row])


def _read_rows(path: Path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise FormatError(f"{path}: empty CSV")
    return rows[0], rows[1:]


def write_examples(examples: ExampleSet, path: str | Path) -> None:
    S = examples.substances
    header = [f"in_{i}" for i in range(S)] + [f"target_{i}" for i in range(S)]
    rows = (list(map(float, i)) + list(map(float, t)) for i, t in zip(examples.inputs, examples.targets))
    _write_rows(Path(path), header, rows)


def read_examples(path: str | Path) -> ExampleSet:
    header, rows = _read_rows(Path(path))
    S = sum(1 for h in header if h.startswith("in_"))
    if S == 0 or len(header) != 2 * S:
        raise FormatError(f"{path}: expected in_0..in_S-1, target_0..target_S-1 columns")
    data = np.array([[float(v) for v in r] for r in rows], dtype=float).reshape(-1, 2 * S)
    return ExampleSet(data[:, :S], data[:, S:])


def write_history(records: Sequence[GenerationRecord], path: str | Path) -> None:
    _write_rows(Path(path), GenerationRecord.FIELDS,
                ([getattr(r, f) for f in GenerationRecord.FIELDS] for r in records))


def read_history(path: str | Path) -> list[GenerationRecord]:
    header, rows = _read_rows(Path(path))
    if tuple(header) != GenerationRecord.FIELDS:
        raise FormatError(f"{path}: unexpected history columns")
    return [GenerationRecord(int(r[0]), *(float(v) for v in r[1:])) for r in rows]


REPORT_FIELDS = ("shape_fitness", "metabolic_fitness", "combined", "mean_distance")


def report_row(report: FitnessReport) -> tuple[list[str], list]:
    header = list(REPORT_FIELDS) + [f"distance_{i}" for i in range(len(report.distances))]
    row = [report.shape_fitness, report.metabolic_fitness, report.combined, report.mean_distance,
           *report.distances]
    return header, [float(v) for v in row]


def write_report(report: FitnessReport, path: str | Path) -> None:
    header, row = report_row(report)
    _write_rows(Path(path), header, [row])


def read_report(path: str | Path) -> FitnessReport:
    header, rows = _read_rows(Path(path))
    v = [float(x) for x in rows[0]]
    return FitnessReport(v[0], v[1], v[2], v[3], v[4:])


SUMMARY_FIELDS = ("n_examples", "runs", "mean_distance_mean", "mean_distance_std",
                  "shape_fitness_mean", "shape_fitness_std", "metabolic_fitness_mean",
                  "combined_mean", "runs_below_baseline")


def summarize(per_series: dict[int, list[FitnessReport]], baseline: float) -> list[list]:
    rows = []
    for n in sorted(per_series):
        reps = per_series[n]
        dist = np.array([r.mean_distance for r in reps])
        shape = np.array([r.shape_fitness for r in reps])
        rows.append([n, len(reps), float(dist.mean()), float(dist.std()), float(shape.mean()),
                     float(shape.std()), float(np.mean([r.metabolic_fitness for r in reps])),
                     float(np.mean([r.combined for r in reps])), int((dist < baseline).sum())])
    return rows


def write_summary(rows: list[list], path: str | Path) -> None:
    _write_rows(Path(path), SUMMARY_FIELDS, rows)


def read_summary(path: str | Path) -> list[dict]:
    header, rows = _read_rows(Path(path))
    out = []
    for r in rows:
        d = dict(zip(header, r))
        out.append({k: (int(v) if k in ("n_examples", "runs", "runs_below_baseline") else float(v))
                    for k, v in d.items()})
    return out


def export_concentration_maps(network: LeveledNetwork, genome: Genome, example: tuple, path: str | Path,
                              c_max: float = 4.0) -> None:
    """One row per participating driver: position, level, the received vector
    and its distance to the target, plus the distance of the cell's own result.

    For the output cell ``distance_out`` is the distance the fitness uses.
    """
    inp, target = (np.asarray(v, float) for v in example)
    S = inp.shape[0]
    _, levels = propagate_batch(network, genome, inp[None, :], c_max, record=True)
    header = ["x", "y", "z", "level", "code"] + [f"c_{i}" for i in range(S)] + ["distance", "distance_out"]
    rows = []
    for k, cells in enumerate(network.levels):
        if not cells:
            continue
        got, made = levels[k][0][0], levels[k][1][0]
        d_in = normalized_distances(got, target[None, :])
        d_out = normalized_distances(made, target[None, :])
        for j, cell in enumerate(cells):
            rows.append([*cell.position, k, format_code(cell.code), *map(float, got[j]),
                         float(d_in[j]), float(d_out[j])])
    _write_rows(Path(path), header, rows)


def read_concentration_maps(path: str | Path) -> tuple[list[str], list[list[str]]]:
    return _read_rows(Path(path))
