"""Memory-capacity study: series of evolutionary runs with growing example sets."""
from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .. import genome as genome_io
from ..evolution import evolve, substream
from ..fitness import ExampleSet, FitnessReport, TargetShape
from . import config as config_io
from . import formats
from .config import ExperimentConfig

log = logging.getLogger(__name__)

# expected normalized distance of two uniform(0,1)^8 points
RANDOM_BASELINE = 0.398866681


def generate_examples(n: int, substances: int, seed) -> ExampleSet:
    """``n`` input/target pairs with every component drawn from uniform(0, 1)."""
    if n < 1 or substances < 1:
        raise ValueError("need n >= 1 and substances >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    data = rng.random((2, n, substances))
    # Generator.random draws from [0, 1); an exact 0 is remapped to keep the open interval
    data[data == 0.0] = 0.5
    return ExampleSet(data[0], data[1])


def run_seed(master_seed: int, n_examples: int, run: int) -> int:
    return int(np.random.SeedSequence([master_seed, n_examples, run]).generate_state(1)[0])


def run_dir(out: Path, n_examples: int, run: int) -> Path:
    return out / f"series_{n_examples:03d}" / f"run_{run:02d}"


@dataclass(frozen=True)
class _Job:
    config: ExperimentConfig
    n_examples: int
    run: int
    out: Path
    target_base: Path | None


def _run_one(job: _Job) -> FitnessReport:
    cfg = job.config
    seed = run_seed(cfg.master_seed, job.n_examples, job.run)
    examples = generate_examples(job.n_examples, cfg.substances, substream(seed, "examples"))
    target = cfg.load_target(job.target_base)
    evo = replace(cfg.evolution, master_seed=seed)
    history = evolve(evo, cfg.genome, cfg.development, cfg.metabolism, target, examples)
    d = run_dir(job.out, job.n_examples, job.run)
    d.mkdir(parents=True, exist_ok=True)
    formats.write_examples(examples, d / "examples.csv")
    formats.write_history(history.records, d / "history.csv")
    formats.write_report(history.champion.report, d / "champion.csv")
    genome_io.save(history.champion.genome, d / "champion.etg")
    log.info("series %d run %d: distance %.4f shape %.4f", job.n_examples, job.run,
             history.champion.report.mean_distance, history.champion.report.shape_fitness)
    return history.champion.report


def _check_writable(out: Path) -> None:
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write-test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise OSError(f"output directory {out} is not writable: {exc.strerror}") from exc


def run_experiment(config: ExperimentConfig, out: str | Path, workers: int = 1,
                   target_base: Path | None = None, figures: bool = True) -> Path:
    """Run every (series, run) pair and write the per-run files plus ``summary.csv``.

    Layout::

        out/config.ini
        out/summary.csv
        out/figures/*.png                    (when ``figures``)
        out/series_NNN/run_RR/{examples.csv, history.csv, champion.csv, champion.etg}
    """
    out = Path(out)
    _check_writable(out)
    # fail on a bad target before any compute
    config.load_target(target_base)
    (out / "config.ini").write_text(config_io.dumps(config))

    jobs = [_Job(config, n, r, out, target_base)
            for n in config.series for r in range(config.runs_per_series)]
    workers = max(1, min(workers, len(jobs)))
    if workers == 1:
        reports = [_run_one(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(_run_one, jobs))
    per_series: dict[int, list[FitnessReport]] = {}
    for job, rep in zip(jobs, reports):
        per_series.setdefault(job.n_examples, []).append(rep)
    formats.write_summary(formats.summarize(per_series, RANDOM_BASELINE), out / "summary.csv")
    if figures:
        from . import plots

        plots.render_report(out)
    return out


def recompute_summary(out: str | Path, config: ExperimentConfig) -> list[list]:
    """Summary rows rebuilt from the per-run champion files alone."""
    out = Path(out)
    per_series = {n: [formats.read_report(run_dir(out, n, r) / "champion.csv")
                      for r in range(config.runs_per_series)] for n in config.series}
    return formats.summarize(per_series, RANDOM_BASELINE)


def expected_random_distance(substances: int = 8, samples: int = 1_000_000, seed: int = 0) -> float:
    """Monte-Carlo mean normalized distance between two uniform(0,1) vectors."""
    rng = np.random.default_rng(seed)
    total = 0.0
    done = 0
    while done < samples:
        m = min(200_000, samples - done)
        a, b = rng.random((2, m, substances))
        total += float(np.linalg.norm(a - b, axis=1).sum())
        done += m
    return total / samples / math.sqrt(substances)


def default_workers() -> int:
    return os.cpu_count() or 1
