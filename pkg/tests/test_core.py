import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from agehawkes.core import (
    AgeStructure,
    ContactMatrix,
    EpidemicConfig,
    IntervalGrid,
    InvalidPartitionError,
    MarkedEvent,
    OutOfRangeError,
    SeedHistory,
    SusceptibleLedger,
    coarsen_contact_matrix,
    interval_index,
    interval_indices,
    load_config,
)


def test_age_structure_validation():
    with pytest.raises(ValueError):
        AgeStructure(["a", "b"], [10])
    with pytest.raises(ValueError):
        AgeStructure(["a"], [0])
    assert AgeStructure(["a", "b"], [10, 20]).n_groups == 2


def test_contact_matrix_validation():
    with pytest.raises(ValueError):
        ContactMatrix([[1, 2, 3], [4, 5, 6]])
    with pytest.raises(ValueError):
        ContactMatrix([[1, -1], [0, 1]])


def test_grid_validation():
    with pytest.raises(ValueError):
        IntervalGrid([0.0])
    with pytest.raises(ValueError):
        IntervalGrid([0.0, 7.0, 7.0])


class TestIntervalIndex:
    grid = IntervalGrid.uniform(21.0, 7.0, 16)

    def test_left_boundary(self):
        assert interval_index(21.0, self.grid) == 1

    def test_next_boundary(self):
        assert interval_index(28.0, self.grid) == 2

    def test_inside_second_week(self):
        assert interval_index(21.0 + 10.5, self.grid) == 2

    @pytest.mark.parametrize("t", [20.999, 21.0 + 7 * 16, 500.0])
    def test_out_of_range(self, t):
        with pytest.raises(OutOfRangeError):
            interval_index(t, self.grid)

    @given(st.integers(0, 15))
    def test_boundaries_half_open(self, j):
        b = self.grid.boundaries
        assert interval_index(b[j], self.grid) == j + 1
        if j > 0:
            assert interval_index(np.nextafter(b[j], -np.inf), self.grid) == j

    @given(hnp.arrays(float, 20, elements=st.floats(21.0, 132.99)))
    def test_vectorised_agrees(self, ts):
        assert list(interval_indices(ts, self.grid)) == [interval_index(t, self.grid) for t in ts]


def test_window_start_extrapolates_below_t0():
    g = IntervalGrid.uniform(21.0, 7.0, 4)
    assert g.window_start(4, 3) == 21.0
    # interval J - eta for J = 2 is interval -1 = [7, 14)
    assert g.window_start(2, 3) == 7.0
    assert g.window_start(1, 3) == 0.0


class TestCoarsen:
    def test_identity_partition(self):
        m = ContactMatrix([[1.0, 2.0], [3.0, 4.0]])
        out = coarsen_contact_matrix(m, [5, 7], [[0], [1]])
        np.testing.assert_allclose(out.entries, m.entries)

    def test_equal_population_rows_average(self):
        m = ContactMatrix([[1.0, 2.0, 0.5], [3.0, 4.0, 1.5], [0.0, 1.0, 2.0]])
        out = coarsen_contact_matrix(m, [100, 100, 50], [[0, 1], [2]])
        np.testing.assert_allclose(out.entries[0], [(1 + 3) / 2 + (2 + 4) / 2, (0.5 + 1.5) / 2])

    def test_hand_computed(self):
        out = coarsen_contact_matrix(ContactMatrix([[1, 2], [3, 4]]), [100, 300], [[0, 1]])
        np.testing.assert_allclose(out.entries, [[6.0]])

    @pytest.mark.parametrize("grouping", [[[0], []], [[0], [0, 1]], [[0]]])
    def test_invalid_partition(self, grouping):
        with pytest.raises(InvalidPartitionError):
            coarsen_contact_matrix(ContactMatrix([[1, 2], [3, 4]]), [1, 1], grouping)

    @given(
        hnp.arrays(float, (4, 4), elements=st.floats(0, 10)),
        hnp.arrays(np.int64, 4, elements=st.integers(1, 10_000)),
        st.lists(st.integers(0, 1), min_size=4, max_size=4).filter(lambda x: 0 < sum(x) < 4),
    )
    def test_row_sum_preserved(self, m, pops, labels):
        grouping = [[i for i in range(4) if labels[i] == g] for g in (0, 1)]
        out = coarsen_contact_matrix(ContactMatrix(m), pops, grouping).entries
        for G, members in enumerate(grouping):
            w = pops[members] / pops[members].sum()
            assert out[G].sum() == pytest.approx(np.dot(w, m[members].sum(axis=1)), rel=1e-9, abs=1e-9)


def test_seed_history_rejects_parents_and_late_times():
    parent = MarkedEvent(0.0, 0)
    with pytest.raises(ValueError):
        SeedHistory([MarkedEvent(1.0, 0, parent)])
    with pytest.raises(ValueError):
        SeedHistory.from_arrays([5.0, 22.0], [0, 0]).validate(21.0, 1)
    with pytest.raises(ValueError):
        SeedHistory.from_arrays([5.0], [3]).validate(21.0, 2)


def test_config_validation(cfg2):
    with pytest.raises(ValueError):
        cfg2.replace(beta=0.0)
    with pytest.raises(ValueError):
        cfg2.replace(gamma_prior=(0.5, 0.1))
    with pytest.raises(ValueError):
        cfg2.replace(d_bounds=(0.0, 5.0))
    with pytest.raises(ValueError):
        cfg2.replace(initial_susceptibles=cfg2.populations + 1)


def test_config_json_roundtrip(cfg2, tmp_path):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(cfg2.to_dict()))
    back = load_config(p)
    assert back.to_dict() == cfg2.to_dict()
    irregular = cfg2.replace(grid=IntervalGrid([0.0, 7.0, 15.0, 21.0, 30.0]))
    assert EpidemicConfig.from_dict(irregular.to_dict()).grid.boundaries.tolist() == [0.0, 7.0, 15.0, 21.0, 30.0]


class TestLedger:
    def test_decrement_and_exhaustion(self):
        led = SusceptibleLedger(np.array([1, 2]), np.array([5, 5]))
        led.decrement(0, 1.0)
        assert not led.available(0)
        with pytest.raises(ValueError):
            led.decrement(0, 2.0)

    @given(st.lists(st.integers(0, 2), max_size=60))
    def test_replay_reproduces_counts(self, groups):
        led = SusceptibleLedger(np.array([20, 20, 20]), np.array([30, 30, 30]))
        for i, a in enumerate(groups):
            if led.available(a):
                led.decrement(a, float(i))
        assert np.all(led.counts >= 0)
        np.testing.assert_array_equal(led.replay(), led.counts)
