import csv
import os

import numpy as np
import pytest

from epitrack.development import DevConfig, Embryo, develop
from epitrack.evolution import EvolutionConfig
from epitrack.expcli import config as config_io
from epitrack.expcli import formats
from epitrack.expcli.cli import main
from epitrack.expcli.config import ConfigError, ExperimentConfig, parse_target
from epitrack.expcli.experiment import generate_examples, recompute_summary, run_dir, run_experiment
from epitrack.fitness import TargetShape, combined_fitness
from epitrack.genome import GenomeConfig, random_genome, save
from epitrack.metabolism import LeveledNetwork, NetConfig, assign_levels

GCFG = GenomeConfig(n_dev=12, n_met=10, substances=4, num_stages=4, max_axis=6, max_code_depth=1,
                    max_event_ordinal=2, max_child_index=8, initial_active_dev=12)
TINY = ExperimentConfig(series=(4,), runs_per_series=1, master_seed=3, target="sphere:5", genome=GCFG,
                        development=DevConfig(dims=(32, 32, 32), driver_spacing=3),
                        evolution=EvolutionConfig(population_size=6, generations=2))


def files_of(root):
    return {p.relative_to(root): p.read_bytes() for p in sorted(root.rglob("*"))
            if p.is_file() and p.suffix != ".png"}


# --------------------------------------------------------------------------
# examples

def test_examples_range_and_shape():
    ex = generate_examples(16, 8, 0)
    assert ex.inputs.shape == ex.targets.shape == (16, 8)
    for a in (ex.inputs, ex.targets):
        assert a.min() > 0.0 and a.max() < 1.0


def test_examples_deterministic():
    a, b = generate_examples(5, 8, 42), generate_examples(5, 8, 42)
    assert np.array_equal(a.inputs, b.inputs) and np.array_equal(a.targets, b.targets)


def test_examples_uniform_mean():
    ex = generate_examples(12_500, 8, 1)  # 100k components per side
    assert abs(ex.inputs.mean() - 0.5) < 0.01
    assert abs(ex.targets.mean() - 0.5) < 0.01


def test_examples_csv_roundtrip(tmp_path):
    ex = generate_examples(3, 8, 7)
    formats.write_examples(ex, tmp_path / "e.csv")
    back = formats.read_examples(tmp_path / "e.csv")
    assert np.array_equal(back.inputs, ex.inputs) and np.array_equal(back.targets, ex.targets)


# --------------------------------------------------------------------------
# voxel files and config

def test_etv1_roundtrip(tmp_path):
    embryo, _ = develop(random_genome(GCFG, 4), TINY.development)
    formats.export_voxels(embryo, tmp_path / "b.etv")
    head = (tmp_path / "b.etv").read_text().splitlines()[0].split()
    assert head == ["ETV1", "32", "32", "32", str(embryo.cell_count)]
    dims, rows = formats.read_voxels(tmp_path / "b.etv")
    assert dims == (32, 32, 32)
    got = np.zeros(dims, np.uint8)
    got[tuple(rows[:, :3].T)] = rows[:, 3]
    assert np.array_equal(got, embryo.kind)


def test_etv1_single_cell(tmp_path):
    embryo, _ = develop(random_genome(GenomeConfig(n_dev=2, initial_active_dev=0), 0), DevConfig(dims=(9, 9, 9)))
    formats.export_voxels(embryo, tmp_path / "z.etv")
    assert (tmp_path / "z.etv").read_text() == "ETV1 9 9 9 1\n4 4 4 2 0\n"


def test_etv1_count_mismatch_rejected(tmp_path):
    (tmp_path / "b.etv").write_text("ETV1 4 4 4 2\n0 0 0 1 0\n")
    with pytest.raises(formats.FormatError):
        formats.read_voxels(tmp_path / "b.etv")


def test_target_file_roundtrip(tmp_path):
    t = TargetShape.ellipsoid((20, 20, 20), (3, 5, 2))
    formats.write_target(t, tmp_path / "t.etv")
    assert np.array_equal(formats.read_target(tmp_path / "t.etv").mask, t.mask)
    assert np.array_equal(parse_target("file:t.etv", (20, 20, 20), tmp_path).mask, t.mask)
    with pytest.raises(ConfigError):
        parse_target("file:t.etv", (16, 16, 16), tmp_path)


def test_config_roundtrip():
    assert config_io.loads(config_io.dumps(TINY)) == TINY
    assert config_io.loads(config_io.dumps(ExperimentConfig())) == ExperimentConfig()


def test_config_partial_and_errors():
    cfg = config_io.loads("[experiment]\nseries = 4, 16  # two series\n[evolution]\ngenerations = 7\n")
    assert cfg.series == (4, 16) and cfg.evolution.generations == 7
    assert cfg.genome == GenomeConfig()
    for bad in ("[nope]\n", "[genome]\nfoo = 1\n", "[genome]\nn_dev = x\n", "[evolution]\nmaster_seed = 1\n",
                "[experiment]\ntarget = cube:3\n"):
        with pytest.raises(ConfigError):
            config_io.loads(bad).load_target()


# --------------------------------------------------------------------------
# experiment runs

@pytest.fixture(scope="module")
def tiny_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    run_experiment(TINY, out)
    return out


def test_run_layout(tiny_run):
    d = run_dir(tiny_run, 4, 0)
    for name in ("examples.csv", "history.csv", "champion.csv", "champion.etg"):
        assert (d / name).is_file()
    assert len(formats.read_history(d / "history.csv")) == 2
    assert (tiny_run / "summary.csv").is_file() and (tiny_run / "config.ini").is_file()
    assert sorted(p.name for p in (tiny_run / "figures").iterdir()) == [
        "fitness_curves.png", "memory_capacity.png", "shape_fitness.png"]


def test_summary_has_one_row_per_series(tmp_path):
    cfg = TINY.with_overrides(series=(1, 2, 3, 4, 5), evolution=EvolutionConfig(population_size=3, generations=1))
    run_experiment(cfg, tmp_path, figures=False)
    assert [r["n_examples"] for r in formats.read_summary(tmp_path / "summary.csv")] == [1, 2, 3, 4, 5]


def test_run_is_byte_identical(tiny_run, tmp_path):
    run_experiment(TINY, tmp_path, figures=False)
    assert files_of(tmp_path) == files_of(tiny_run)


def test_parallel_run_matches_serial(tiny_run, tmp_path):
    cfg = TINY.with_overrides(series=(4, 5))
    run_experiment(cfg, tmp_path / "a", figures=False)
    run_experiment(cfg, tmp_path / "b", workers=2, figures=False)
    assert files_of(tmp_path / "a") == files_of(tmp_path / "b")


def test_summary_recomputable(tiny_run):
    rows = [[str(v) if not isinstance(v, float) else repr(v) for v in r] for r in recompute_summary(tiny_run, TINY)]
    with open(tiny_run / "summary.csv", newline="") as fh:
        assert list(csv.reader(fh))[1:] == rows


def test_champion_report_matches_rescore(tiny_run):
    d = run_dir(tiny_run, 4, 0)
    from epitrack.genome import load

    g = load(d / "champion.etg")
    embryo, _ = develop(g, TINY.development)
    rep = combined_fitness(embryo, g, TINY.load_target(), formats.read_examples(d / "examples.csv"),
                           TINY.metabolism)
    assert formats.read_report(d / "champion.csv") == rep


@pytest.mark.skipif(os.geteuid() == 0, reason="root ignores directory permissions")
def test_unwritable_output(tmp_path):
    ro = tmp_path / "ro"
    ro.mkdir()
    ro.chmod(0o500)
    try:
        with pytest.raises(OSError):
            run_experiment(TINY, ro / "out")
    finally:
        ro.chmod(0o700)


def test_output_path_is_a_file(tmp_path):
    (tmp_path / "f").write_text("")
    with pytest.raises(OSError):
        run_experiment(TINY, tmp_path / "f")


# --------------------------------------------------------------------------
# concentration maps

def _identity_pair():
    g = random_genome(GenomeConfig(n_dev=1, n_met=3, substances=4, initial_active_met=0.0), 0)
    e = Embryo.empty((16, 16, 16))
    from epitrack.development import Driver

    for i, p in enumerate([(2, 8, 8), (6, 8, 8), (10, 8, 8), (14, 8, 8)]):
        e.add_driver(Driver(code=((0, i),), position=p, color=0, active_ops=np.full(3, -1, np.int8),
                            in_filter=np.ones(4, np.uint8), out_filter=np.ones(4, np.uint8)))
    return g, assign_levels(e, (2, 8, 8), (14, 8, 8), 3)


def test_maps_identity_network(tmp_path):
    g, net = _identity_pair()
    x, t = np.array([0.1, 0.2, 0.3, 0.4]), np.array([0.1, 0.2, 0.3, 0.9])
    formats.export_concentration_maps(net, g, (x, t), tmp_path / "m.csv")
    header, rows = formats.read_concentration_maps(tmp_path / "m.csv")
    assert len(rows) == len(net.cells)
    for r in rows:
        assert [float(v) for v in r[5:9]] == x.tolist()
        assert float(r[-1]) == pytest.approx(0.25)


def test_maps_output_distance_matches_fitness(tmp_path, tiny_run):
    d = run_dir(tiny_run, 4, 0)
    from epitrack.genome import load

    g = load(d / "champion.etg")
    ex = formats.read_examples(d / "examples.csv")
    embryo, _ = develop(g, TINY.development)
    net_cfg = TINY.metabolism
    try:
        net = assign_levels(embryo, net_cfg.in_point, net_cfg.out_point, net_cfg.levels)
    except ValueError:
        pytest.skip("champion has fewer than two drivers")
    rep = formats.read_report(d / "champion.csv")
    formats.export_concentration_maps(net, g, (ex.inputs[1], ex.targets[1]), tmp_path / "m.csv", net_cfg.c_max)
    _, rows = formats.read_concentration_maps(tmp_path / "m.csv")
    out = net.output_cell.position
    row = next(r for r in rows if tuple(int(v) for v in r[:3]) == out)
    assert float(row[-1]) == pytest.approx(rep.distances[1], abs=1e-12)


# --------------------------------------------------------------------------
# CLI

def _write_tiny_config(path):
    path.write_text(config_io.dumps(TINY))
    return path


def test_cli_run_develop_score_maps(tmp_path, capsys):
    cfg = _write_tiny_config(tmp_path / "exp.ini")
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "res"), "--no-figures"]) == 0
    d = run_dir(tmp_path / "res", 4, 0)
    genome = str(d / "champion.etg")
    assert main(["develop", "--config", str(cfg), genome, "--out", str(tmp_path / "b.etv")]) == 0
    assert (tmp_path / "b.etv").read_text().startswith("ETV1 32 32 32 ")
    capsys.readouterr()
    assert main(["score", "--config", str(cfg), genome, "--examples", str(d / "examples.csv")]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("shape_fitness,") and len(lines) == 2
    assert lines[1] == (d / "champion.csv").read_text().splitlines()[1]
    assert main(["maps", "--config", str(cfg), genome, "--examples", str(d / "examples.csv"),
                 "--example", "2", "--out", str(tmp_path / "m.csv")]) == 0
    assert (tmp_path / "m.csv").read_text().startswith("x,y,z,level,code,")


def test_cli_seed_override_changes_results(tmp_path):
    cfg = _write_tiny_config(tmp_path / "exp.ini")
    for seed in ("1", "2"):
        assert main(["run", "--config", str(cfg), "--seed", seed, "--out", str(tmp_path / seed),
                     "--no-figures"]) == 0
    a = (run_dir(tmp_path / "1", 4, 0) / "examples.csv").read_bytes()
    b = (run_dir(tmp_path / "2", 4, 0) / "examples.csv").read_bytes()
    assert a != b


def test_cli_errors_are_one_line(tmp_path, capsys):
    assert main(["develop", str(tmp_path / "missing.etg")]) == 1
    err = capsys.readouterr().err
    assert err.startswith("epitrack develop: error:") and err.count("\n") == 1
    bad = tmp_path / "bad.ini"
    bad.write_text("[genome]\nn_dev = -3\n")
    assert main(["run", "--config", str(bad), "--out", str(tmp_path / "x")]) == 1
    assert main(["run", "--config", str(_write_tiny_config(tmp_path / "ok.ini")),
                 "--target-file", str(tmp_path / "nope.etv"), "--out", str(tmp_path / "y")]) == 1
    assert not (tmp_path / "y" / "series_004").exists()


def test_cli_maps_bad_index(tmp_path, capsys):
    cfg = _write_tiny_config(tmp_path / "exp.ini")
    g = tmp_path / "g.etg"
    save(random_genome(GCFG, 0), g)
    ex = tmp_path / "e.csv"
    formats.write_examples(generate_examples(2, 4, 0), ex)
    assert main(["maps", "--config", str(cfg), str(g), "--examples", str(ex), "--example", "5"]) == 1
    assert "outside" in capsys.readouterr().err
