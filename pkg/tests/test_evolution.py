import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from epitrack.development import DevConfig, DevelopmentTrace, develop
from epitrack.evolution import (
    EvolutionConfig, Individual, evolve, germline_penetration, substream, tournament_select,
)
from epitrack.fitness import ExampleSet, FitnessReport, TargetShape
from epitrack.genome import GenomeConfig, random_genome
from epitrack.metabolism import NetConfig

GCFG = GenomeConfig(n_dev=12, n_met=10, substances=4, num_stages=4, max_axis=6, max_code_depth=1,
                    max_event_ordinal=2, max_child_index=8, initial_active_dev=12)
DEV = DevConfig(dims=(32, 32, 32), driver_spacing=3)
NET = NetConfig(levels=4, in_point=(12, 16, 16), out_point=(20, 16, 16))
TARGET = TargetShape.sphere(DEV.dims, 5)
EXAMPLES = ExampleSet(np.random.default_rng(0).random((4, 4)), np.random.default_rng(1).random((4, 4)))


def scored(values):
    g = random_genome(GCFG, 0)
    return [Individual(g, FitnessReport(0.0, 0.0, v, 0.0)) for v in values]


def small_run(seed=5, generations=6, pop=10, **kw):
    cfg = EvolutionConfig(population_size=pop, generations=generations, master_seed=seed,
                          mutation_rate=0.02, germline_rate=0.2, **kw)
    return evolve(cfg, GCFG, DEV, NET, TARGET, EXAMPLES)


def test_substreams_independent_and_reproducible():
    a = substream(3, "selection").random(4)
    assert np.array_equal(a, substream(3, "selection").random(4))
    assert not np.array_equal(a, substream(3, "variation").random(4))
    assert not np.array_equal(a, substream(4, "selection").random(4))


def test_tournament_k1_is_uniform_pick():
    pop = scored([0.1, 0.2, 0.3])
    rng, ref = np.random.default_rng(2), np.random.default_rng(2)
    for _ in range(20):
        assert tournament_select(pop, 1, rng) is pop[int(ref.integers(0, 3, size=1)[0])]


def test_tournament_returns_best_of_draws():
    pop = scored([0.5, 0.9, 0.1, 0.7])
    rng, ref = np.random.default_rng(9), np.random.default_rng(9)
    for _ in range(50):
        picks = ref.integers(0, 4, size=3)
        want = max(picks, key=lambda i: pop[i].fitness)
        assert tournament_select(pop, 3, rng) is pop[int(want)]


def test_tournament_tie_goes_to_lowest_index():
    pop = scored([0.4, 0.4])
    rng = np.random.default_rng(0)
    for _ in range(20):
        assert tournament_select(pop, 8, rng) is pop[0]


def test_tournament_rejects_bad_input():
    with pytest.raises(ValueError):
        tournament_select([], 2, np.random.default_rng(0))
    with pytest.raises(ValueError):
        tournament_select(scored([0.1]), 0, np.random.default_rng(0))


def test_germline_rate_zero_is_identity():
    g = random_genome(GCFG, 1)
    _, trace = develop(g, DEV)
    assert germline_penetration(g, trace, 0.0, np.random.default_rng(0)) is g


def test_germline_rate_one_rewrites_every_code():
    g = random_genome(GCFG, 1)
    trace = DevelopmentTrace(codes=[((0, 5),), ((1, 2),)])
    out = germline_penetration(g, trace, 1.0, np.random.default_rng(0))
    assert all(d.mobile_sequence in trace.codes for d in out.dev_genes)
    # nothing but the mobile sequence changes
    for a, b in zip(g.dev_genes, out.dev_genes):
        assert (a.switch, a.timer, a.event, a.axes, a.color, a.switch_slots) == \
               (b.switch, b.timer, b.event, b.axes, b.color, b.switch_slots)
    assert out.met_genes == g.met_genes


@settings(max_examples=60)
@given(st.integers(0, 2**32 - 1), st.floats(0, 1))
def test_germline_codes_come_from_trace(seed, rate):
    g = random_genome(GCFG, seed)
    _, trace = develop(g, DEV)
    out = germline_penetration(g, trace, rate, np.random.default_rng(seed))
    for a, b in zip(g.dev_genes, out.dev_genes):
        assert b.mobile_sequence == a.mobile_sequence or b.mobile_sequence in trace.codes
    out.validate()


def test_zero_generations_still_returns_champion():
    h = small_run(generations=0)
    assert h.records == []
    assert h.champion is not None and h.champion.report is not None


def test_history_length_and_generation_numbers():
    h = small_run(generations=4)
    assert [r.generation for r in h.records] == [0, 1, 2, 3]


def test_elitist_best_never_decreases():
    h = small_run(generations=8)
    best = [r.best_combined for r in h.records]
    assert all(b >= a for a, b in zip(best, best[1:]))
    assert h.champion.fitness == best[-1]


def test_evolve_is_deterministic():
    a, b = small_run(seed=11), small_run(seed=11)
    assert a.records == b.records
    assert a.champion.genome == b.champion.genome


def test_population_size_constant(monkeypatch):
    from epitrack import evolution

    sizes = []
    orig = evolution._next_generation

    def spy(pop, *args):
        nxt = orig(pop, *args)
        sizes.append((len(pop), len(nxt)))
        return nxt

    monkeypatch.setattr(evolution, "_next_generation", spy)
    evolve(EvolutionConfig(population_size=7, generations=3, master_seed=1), GCFG, DEV, NET, TARGET, EXAMPLES)
    assert sizes == [(7, 7), (7, 7)]


@pytest.mark.parametrize("bad", [dict(population_size=1), dict(mutation_rate=1.5), dict(generations=-1),
                                 dict(elitism_count=200), dict(tournament_size=0)])
def test_config_validation(bad):
    with pytest.raises(ValueError):
        EvolutionConfig(**bad)


@settings(max_examples=15)
@given(st.integers(0, 2**32 - 1))
def test_elitist_monotonicity_property(seed):
    best = [r.best_combined for r in small_run(seed=seed, generations=4, pop=6).records]
    assert all(b >= a for a, b in zip(best, best[1:]))
