import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from agehawkes.core import MarkedEvent, SeedHistory, SusceptibleLedger
from agehawkes.kernels import interval_mass
from agehawkes.scenarios import (
    TWO_GROUP_MATRIX,
    full_scale_two_group_config,
    random_walk_gammas,
    two_group_config,
    uniform_seeds,
)
from agehawkes.sim import (
    ParentBatch,
    generate_synthetic,
    offspring_rate,
    sample_offspring_ages,
    seed_parents,
    simulate_interval,
    simulate_interval_batch,
)

from conftest import single_group_config
from oracles import generation_expansion_mean


def ledger_full(cfg):
    return SusceptibleLedger.from_config(cfg)


class TestOffspringRate:
    def test_single_group(self):
        cfg = single_group_config(m=2.0)
        lo, hi = cfg.grid.bounds(2)
        rate = offspring_rate(MarkedEvent(lo, 0), [1.0], ledger_full(cfg), cfg, 2)
        assert rate == pytest.approx(2.0 * interval_mass(cfg.gi_kernel, 0, hi - lo))

    def test_exhausted(self):
        cfg = single_group_config(susceptible=0)
        assert offspring_rate(MarkedEvent(21.0, 0), [1.0], ledger_full(cfg), cfg, 1) == 0.0

    def test_reference_matrix(self):
        cfg = two_group_config(susceptible_share=1.0)
        lo, hi = cfg.grid.bounds(1)
        parent = MarkedEvent(lo - 3.0, 0)
        mass = interval_mass(cfg.gi_kernel, 3.0, hi - lo + 3.0)
        rate = offspring_rate(parent, [0.2, 0.17], ledger_full(cfg), cfg, 1)
        assert rate / mass == pytest.approx(0.2 * 6.81 + 0.17 * 2.14)
        assert rate / mass == pytest.approx(1.7258)

    def test_parent_after_interval(self, cfg2):
        assert offspring_rate(MarkedEvent(100.0, 0), [0.2, 0.2], ledger_full(cfg2), cfg2, 1) == 0.0


class TestOffspringAges:
    def test_uniform(self):
        cfg = single_group_config()
        cfg = cfg.replace(ages=type(cfg.ages)(["a", "b", "c"], [10, 10, 10]),
                          contacts=type(cfg.contacts)(np.ones((3, 3))), initial_susceptibles=[10, 10, 10])
        np.testing.assert_allclose(sample_offspring_ages(1, ledger_full(cfg), cfg), [1 / 3] * 3)

    def test_depleted_group(self, cfg2):
        cfg = cfg2.replace(initial_susceptibles=[0, 100])
        np.testing.assert_allclose(sample_offspring_ages(0, ledger_full(cfg), cfg), [0.0, 1.0])
        assert sample_offspring_ages(0, ledger_full(cfg2.replace(initial_susceptibles=[0, 0])), cfg2) is None

    def test_reference_matrix(self):
        cfg = two_group_config(susceptible_share=1.0)
        p = sample_offspring_ages(0, ledger_full(cfg), cfg)
        np.testing.assert_allclose(p, [6.81 / 8.95, 2.14 / 8.95])
        assert p[0] == pytest.approx(0.7609, abs=1e-4)


class TestSimulateInterval:
    def test_empty_history(self, cfg2, rng):
        out = simulate_interval([], [0.3, 0.3], ledger_full(cfg2), cfg2, 1, rng)
        assert len(out) == 0 and out.counts_by_age.tolist() == [0, 0]

    def test_zero_gamma(self, cfg2, rng):
        seeds = uniform_seeds(cfg2, [100, 20]).events
        assert len(simulate_interval(seeds, [0.0, 0.0], ledger_full(cfg2), cfg2, 1, rng)) == 0

    @given(st.integers(0, 2**32 - 1), st.integers(0, 40))
    def test_invariants(self, seed, s_small):
        cfg = two_group_config(k=3).replace(initial_susceptibles=[s_small, 15])
        rng = np.random.default_rng(seed)
        seeds = uniform_seeds(cfg, [30, 10])
        led = ledger_full(cfg)
        hist = list(seeds.events)
        total = np.zeros(2, dtype=int)
        for n in (1, 2, 3):
            out = simulate_interval(hist, [0.5, 0.5], led, cfg, n, rng)
            lo, hi = cfg.grid.bounds(n)
            assert all(lo <= e.time < hi for e in out.events)
            assert all(e.parent is not None and e.parent.time < e.time for e in out.events)
            assert out.counts_by_age.sum() == len(out)
            assert [e.time for e in out.events] == sorted(e.time for e in out.events)
            total += out.counts_by_age
            hist += list(out.events)
        assert np.all(total <= cfg.initial_susceptibles)
        np.testing.assert_array_equal(led.counts, cfg.initial_susceptibles - total)

    def test_deterministic(self, cfg2):
        seeds = uniform_seeds(cfg2, [80, 20]).events
        a = simulate_interval(seeds, [0.3, 0.2], ledger_full(cfg2), cfg2, 1, np.random.default_rng(5))
        b = simulate_interval(seeds, [0.3, 0.2], ledger_full(cfg2), cfg2, 1, np.random.default_rng(5))
        assert [(e.time, e.age) for e in a.events] == [(e.time, e.age) for e in b.events]


def branching_setup():
    # huge population keeps S/N at 1 to within 1e-8
    cfg = single_group_config(k=1, population=10**12, m=0.8)
    seeds = SeedHistory.from_arrays(np.linspace(0.5, 20.5, 12), np.zeros(12, dtype=int))
    lo, hi = cfg.grid.bounds(1)
    expect = generation_expansion_mean(cfg.gi_kernel, seeds.times, 0.8, lo, hi)
    return cfg, seeds, expect


def test_generation_expansion_oracle_scalar():
    cfg, seeds, expect = branching_setup()
    rng = np.random.default_rng(7)
    counts = np.array([len(simulate_interval(seeds.events, [1.0], ledger_full(cfg), cfg, 1, rng))
                       for _ in range(4000)])
    se = counts.std(ddof=1) / np.sqrt(len(counts))
    assert abs(counts.mean() - expect) < 3 * se


def test_generation_expansion_oracle_batch():
    cfg, seeds, expect = branching_setup()
    N = 10_000
    sample = simulate_interval_batch(seed_parents(cfg, seeds, 1, N), np.ones((N, 1)),
                                     np.tile(cfg.initial_susceptibles, (N, 1)), cfg, 1, np.random.default_rng(8))
    counts = sample.counts[:, 0]
    se = counts.std(ddof=1) / np.sqrt(N)
    assert abs(counts.mean() - expect) < 3 * se


def test_batch_structure(cfg2, rng):
    seeds = uniform_seeds(cfg2, [200, 40])
    N = 50
    gam = np.full((N, 2), 0.3)
    s = simulate_interval_batch(seed_parents(cfg2, seeds, 1, N), gam, np.tile(cfg2.initial_susceptibles, (N, 1)),
                                cfg2, 1, rng)
    lo, hi = cfg2.grid.bounds(1)
    assert np.all((s.time >= lo) & (s.time < hi))
    np.testing.assert_array_equal(np.diff(s.offsets), s.counts.sum(axis=1))
    np.testing.assert_array_equal(s.s_end, cfg2.initial_susceptibles - s.counts)
    for j in range(N):
        sl = slice(s.offsets[j], s.offsets[j + 1])
        t = s.time[sl]
        assert np.all(np.diff(t) >= 0)
        local = s.parent_interval[sl] == 1
        # in-interval parents precede their children and carry the recorded age
        par = s.parent_pos[sl][local]
        assert np.all(t[par] < t[local])
        np.testing.assert_array_equal(s.age[sl][par], s.parent_age[sl][local])
        seed_ref = s.parent_pos[sl][~local]
        np.testing.assert_array_equal(seeds.ages[seed_ref], s.parent_age[sl][~local])


def test_batch_clamps_to_susceptibles(cfg2, rng):
    N = 30
    seeds = uniform_seeds(cfg2, [400, 100])
    s0 = np.tile([5, 3], (N, 1))
    s = simulate_interval_batch(seed_parents(cfg2, seeds, 1, N), np.full((N, 2), 0.5), s0, cfg2, 1, rng)
    assert np.all(s.counts <= s0) and np.all(s.s_end >= 0)


def test_batch_matches_scalar_in_mean():
    cfg = two_group_config(k=2)
    seeds = uniform_seeds(cfg, [150, 30])
    gam = [0.25, 0.2]
    rng = np.random.default_rng(3)
    R = 1500
    scalar = np.array([simulate_interval(seeds.events, gam, ledger_full(cfg), cfg, 1, rng).counts_by_age
                       for _ in range(R)])
    batch = simulate_interval_batch(seed_parents(cfg, seeds, 1, R), np.tile(gam, (R, 1)),
                                    np.tile(cfg.initial_susceptibles, (R, 1)), cfg, 1, rng).counts
    se = np.sqrt(scalar.var(axis=0) / R + batch.var(axis=0) / R)
    assert np.all(np.abs(scalar.mean(axis=0) - batch.mean(axis=0)) < 4 * se)


class TestGenerateSynthetic:
    def test_tiny_beta_gives_no_reports(self, cfg2, rng):
        cfg = cfg2.replace(beta=1e-12)
        data = generate_synthetic(cfg, np.full((4, 2), 0.3), uniform_seeds(cfg, [100, 20]), 0.01, rng)
        assert data.observed.counts.sum() == 0

    def test_no_seeds(self, cfg2, rng):
        data = generate_synthetic(cfg2, np.full((4, 2), 0.3), SeedHistory(()), 0.01, rng)
        assert all(len(s) == 0 for s in data.latent)
        assert np.all(data.mu == 0)

    def test_shapes_and_ledger(self, cfg2, rng):
        data = generate_synthetic(cfg2, np.full((4, 2), 0.3), uniform_seeds(cfg2, [100, 20]), 0.01, rng)
        lat = np.array([s.counts_by_age for s in data.latent])
        assert data.susceptibles.shape == (5, 2)
        np.testing.assert_array_equal(data.susceptibles[1:], cfg2.initial_susceptibles - np.cumsum(lat, axis=0))

    def test_rejects_bad_truth(self, cfg2, rng):
        with pytest.raises(ValueError):
            generate_synthetic(cfg2, np.full((3, 2), 0.3), SeedHistory(()), 0.01, rng)

    def test_deterministic(self, cfg2):
        seeds = uniform_seeds(cfg2, [100, 20])
        a = generate_synthetic(cfg2, np.full((4, 2), 0.3), seeds, 0.01, np.random.default_rng(1))
        b = generate_synthetic(cfg2, np.full((4, 2), 0.3), seeds, 0.01, np.random.default_rng(1))
        np.testing.assert_array_equal(a.observed.counts, b.observed.counts)
        assert [e.time for s in a.latent for e in s.events] == [e.time for s in b.latent for e in s.events]


def test_full_scale_order_of_magnitude():
    """Observed cases in weeks 1-17 of the full-scale 2-group setting are of the order of 13560."""
    cfg = full_scale_two_group_config()
    totals = []
    for s in range(3):
        rng = np.random.default_rng(s)
        seeds = uniform_seeds(cfg, [4124, 839], rng=rng)
        truth = random_walk_gammas([0.2, 0.17], cfg.k, 15.22, rng)
        data = generate_synthetic(cfg, truth, seeds, 0.004, rng)
        totals.append(data.observed.counts[3:].sum())
    assert 13560 / 10 <= np.median(totals) <= 13560 * 10
