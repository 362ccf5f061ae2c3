"""Experiment configuration, stored as an INI file with one section per subsystem.

Example::

    [experiment]
    series = 4, 8, 16, 32, 64
    runs_per_series = 10
    master_seed = 0
    target = sphere:8            # or ellipsoid:a,b,c | box:hx,hy,hz | file:path.etv

    [genome]
    n_dev = 20
    substances = 8

    [development]
    dims = 64, 64, 64

    [metabolism]
    levels = 6

    [evolution]
    generations = 300

Keys left out take the library defaults.  ``in_point``/``out_point`` default to
the grid centre shifted by a tenth of the x extent towards -x/+x.
"""
from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from ..development import DevConfig
from ..evolution import EvolutionConfig
from ..fitness import TargetShape
from ..genome import GenomeConfig
from ..metabolism import NetConfig


class ConfigError(ValueError):
    pass


DEFAULT_SERIES = (4, 8, 16, 32, 64)


def default_points(dims) -> tuple[tuple[float, ...], tuple[float, ...]]:
    cx, cy, cz = (d // 2 for d in dims)
    dx = max(1, dims[0] // 10)
    return (float(cx - dx), float(cy), float(cz)), (float(cx + dx), float(cy), float(cz))


@dataclass(frozen=True)
class ExperimentConfig:
    series: tuple[int, ...] = DEFAULT_SERIES
    runs_per_series: int = 10
    master_seed: int = 0
    target: str = "sphere:8"
    genome: GenomeConfig = field(default_factory=GenomeConfig)
    development: DevConfig = field(default_factory=DevConfig)
    metabolism: NetConfig | None = None
    evolution: EvolutionConfig = field(default_factory=EvolutionConfig)

    def __post_init__(self) -> None:
        if not self.series or min(self.series) < 1:
            raise ConfigError("series must list example counts >= 1")
        if self.runs_per_series < 1:
            raise ConfigError("runs_per_series must be >= 1")
        if self.metabolism is None:
            p_in, p_out = default_points(self.development.dims)
            object.__setattr__(self, "metabolism", NetConfig(in_point=p_in, out_point=p_out))

    @property
    def substances(self) -> int:
        return self.genome.substances

    def with_overrides(self, **kw) -> ExperimentConfig:
        return dataclasses.replace(self, **kw)

    def load_target(self, base_dir: Path | None = None) -> TargetShape:
        return parse_target(self.target, self.development.dims, base_dir)


def parse_target(spec: str, dims, base_dir: Path | None = None) -> TargetShape:
    kind, _, arg = spec.partition(":")
    try:
        if kind == "sphere":
            return TargetShape.sphere(dims, int(arg))
        if kind == "ellipsoid":
            return TargetShape.ellipsoid(dims, tuple(int(v) for v in arg.split(",")))
        if kind == "box":
            return TargetShape.box(dims, tuple(int(v) for v in arg.split(",")))
    except ValueError as exc:
        raise ConfigError(f"bad target {spec!r}: {exc}") from exc
    if kind == "file":
        from .formats import read_target

        path = Path(arg)
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        target = read_target(path)
        if target.dims != tuple(dims):
            raise ConfigError(f"target file grid {target.dims} differs from development grid {tuple(dims)}")
        return target
    raise ConfigError(f"unknown target kind {kind!r} (sphere, ellipsoid, box, file)")


def _coerce(value: str, kind):
    value = value.strip()
    if kind in ("bool", bool):
        return value.lower() in ("1", "true", "yes", "on")
    if kind in ("int", int):
        return int(value)
    if kind in ("float", float):
        return float(value)
    if "tuple[int" in str(kind):
        return tuple(int(v) for v in value.split(","))
    if "tuple[float" in str(kind):
        return tuple(float(v) for v in value.split(","))
    return value


def _section(parser: configparser.ConfigParser, name: str, cls, drop=()):
    if not parser.has_section(name):
        return {}
    types = {f.name: f.type for f in dataclasses.fields(cls)}
    out = {}
    for key, raw in parser.items(name):
        if key not in types or key in drop:
            raise ConfigError(f"[{name}] unknown key {key!r}")
        try:
            out[key] = _coerce(raw, types[key])
        except ValueError as exc:
            raise ConfigError(f"[{name}] {key}: cannot parse {raw!r}") from exc
    return out


def loads(text: str) -> ExperimentConfig:
    parser = configparser.ConfigParser(delimiters=("=",), inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    unknown = set(parser.sections()) - {"experiment", "genome", "development", "metabolism", "evolution"}
    if unknown:
        raise ConfigError(f"unknown section(s): {', '.join(sorted(unknown))}")
    try:
        genome = GenomeConfig(**_section(parser, "genome", GenomeConfig))
        dev = DevConfig(**_section(parser, "development", DevConfig))
        net_kw = _section(parser, "metabolism", NetConfig)
        p_in, p_out = default_points(dev.dims)
        net_kw.setdefault("in_point", p_in)
        net_kw.setdefault("out_point", p_out)
        net = NetConfig(**net_kw)
        evo = EvolutionConfig(**_section(parser, "evolution", EvolutionConfig, drop=("master_seed",)))
        exp = {}
        if parser.has_section("experiment"):
            for key, raw in parser.items("experiment"):
                if key == "series":
                    exp[key] = tuple(int(v) for v in raw.split(","))
                elif key in ("runs_per_series", "master_seed"):
                    exp[key] = int(raw)
                elif key == "target":
                    exp[key] = raw.strip()
                else:
                    raise ConfigError(f"[experiment] unknown key {key!r}")
        return ExperimentConfig(genome=genome, development=dev, metabolism=net, evolution=evo, **exp)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def load(path: str | Path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    return loads(text)


def _fmt(v) -> str:
    if isinstance(v, tuple):
        return ", ".join(_fmt(x) for x in v)
    return repr(v) if isinstance(v, float) else str(v)


def dumps(config: ExperimentConfig) -> str:
    parser = configparser.ConfigParser()
    parser["experiment"] = {"series": _fmt(config.series), "runs_per_series": str(config.runs_per_series),
                            "master_seed": str(config.master_seed), "target": config.target}
    for name, obj, drop in (("genome", config.genome, ()), ("development", config.development, ()),
                            ("metabolism", config.metabolism, ()),
                            ("evolution", config.evolution, ("master_seed",))):
        parser[name] = {f.name: _fmt(getattr(obj, f.name)) for f in dataclasses.fields(obj)
                        if f.name not in drop}
    lines = []
    for section in parser.sections():
        lines.append(f"[{section}]")
        lines += [f"{k} = {v}" for k, v in parser[section].items()]
        lines.append("")
    return "\n".join(lines)
