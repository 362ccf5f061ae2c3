"""Command-line entry point: ``epitrack {run,develop,score,maps} ...``."""
from __future__ import annotations

import argparse
import csv
import dataclasses
import logging
import sys
from pathlib import Path

from .. import genome as genome_io
from ..development import develop
from ..fitness import combined_fitness
from ..metabolism import assign_levels
from . import config as config_io
from . import formats
from .config import ExperimentConfig, parse_target
from .experiment import run_experiment


def _load_config(args) -> ExperimentConfig:
    cfg = config_io.load(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        cfg = cfg.with_overrides(master_seed=args.seed)
    if getattr(args, "target_file", None):
        cfg = cfg.with_overrides(target=f"file:{Path(args.target_file).resolve()}")
    return cfg


def _config_for_genome(cfg: ExperimentConfig, genome) -> ExperimentConfig:
    """Genome files carry their own genome config; keep it authoritative."""
    return dataclasses.replace(cfg, genome=genome.config)


def cmd_run(args) -> int:
    cfg = _load_config(args)
    out = Path(args.out or "results")
    base = Path(args.config).resolve().parent if args.config else None
    run_experiment(cfg, out, workers=args.threads, target_base=base, figures=not args.no_figures)
    print(out / "summary.csv")
    return 0


def cmd_develop(args) -> int:
    cfg = _load_config(args)
    genome = genome_io.load(args.genome)
    embryo, _ = develop(genome, cfg.development)
    out = Path(args.out or Path(args.genome).with_suffix(".etv"))
    formats.export_voxels(embryo, out)
    print(f"{out}: {embryo.cell_count} cells, {len(embryo.drivers)} drivers")
    return 0


def cmd_score(args) -> int:
    cfg = _load_config(args)
    genome = genome_io.load(args.genome)
    cfg = _config_for_genome(cfg, genome)
    examples = formats.read_examples(args.examples)
    base = Path(args.config).resolve().parent if args.config else None
    target = parse_target(cfg.target, cfg.development.dims, base)
    embryo, _ = develop(genome, cfg.development)
    report = combined_fitness(embryo, genome, target, examples, cfg.metabolism)
    if args.out:
        formats.write_report(report, args.out)
    else:
        header, row = formats.report_row(report)
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(header)
        w.writerow([repr(v) for v in row])
    return 0


def cmd_maps(args) -> int:
    cfg = _load_config(args)
    genome = genome_io.load(args.genome)
    examples = formats.read_examples(args.examples)
    if not 0 <= args.example < len(examples):
        raise ValueError(f"example index {args.example} outside 0..{len(examples) - 1}")
    embryo, _ = develop(genome, cfg.development)
    net = cfg.metabolism
    network = assign_levels(embryo, net.in_point, net.out_point, net.levels)
    out = Path(args.out or "maps.csv")
    formats.export_concentration_maps(
        network, genome, (examples.inputs[args.example], examples.targets[args.example]), out, net.c_max)
    print(out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="epitrack", description="Grow, score and evolve voxel bodies "
                                "that store input/output concentration pairs.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, genome=False, examples=False):
        sp.add_argument("--config", help="experiment INI file")
        sp.add_argument("--seed", type=int, help="override the master seed")
        sp.add_argument("--out", help="output path")
        sp.add_argument("--target-file", help="ETV1 voxel file used as the target shape")
        sp.add_argument("--threads", type=int, default=1, help="parallel runs")
        if genome:
            sp.add_argument("genome", help="ETG1 genome file")
        if examples:
            sp.add_argument("--examples", required=True, help="examples CSV (in_*, target_* columns)")

    sp = sub.add_parser("run", help="run the memory-capacity experiment")
    common(sp)
    sp.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("develop", help="develop a genome and export its body as ETV1")
    common(sp, genome=True)
    sp.set_defaults(func=cmd_develop)

    sp = sub.add_parser("score", help="fitness report of a genome as one CSV row")
    common(sp, genome=True, examples=True)
    sp.set_defaults(func=cmd_score)

    sp = sub.add_parser("maps", help="per-driver concentration map for one example")
    common(sp, genome=True, examples=True)
    sp.add_argument("--example", type=int, default=0, help="row of the examples file")
    sp.set_defaults(func=cmd_maps)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except Exception as exc:  # one-line diagnostic, no traceback
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"epitrack {args.command}: error: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
