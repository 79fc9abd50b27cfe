import datetime as dt

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from agehawkes.core import IntervalGrid
from agehawkes.io import (
    BandMappingError,
    DailySeries,
    DateGapError,
    InsufficientHistoryError,
    ingest_cases,
    init_seed_history,
    init_seed_history_weekly,
    init_susceptibles,
    read_gammas,
    read_latent_events,
    read_observed,
    read_seeds,
    write_cases,
    write_gammas,
    write_latent_events,
    write_observed,
    write_seeds,
)
from agehawkes.obs import ObservedSeries
from agehawkes.scenarios import two_group_config, uniform_seeds
from agehawkes.sim import generate_synthetic

GRID = IntervalGrid.uniform(21.0, 7.0, 4)
START = "2020-09-01"
MAPPING = {"0-29": 0, "30-59": 0, "60+": 1}


def write(tmp_path, rows, name="cases.csv"):
    p = tmp_path / name
    p.write_text("date,age_band,count\n" + "".join(f"{d},{b},{c}\n" for d, b, c in rows))
    return p


class TestIngest:
    def test_empty(self, tmp_path):
        Y, daily = ingest_cases(write(tmp_path, []), MAPPING, GRID, START)
        assert Y.counts.shape == (4, 2) and Y.counts.sum() == 0 and daily.n_days == 0

    def test_single_row(self, tmp_path):
        Y, _ = ingest_cases(write(tmp_path, [("2020-09-01", "0-29", 5)]), MAPPING, GRID, START)
        assert Y.counts[0, 0] == 5 and Y.counts.sum() == 5

    def test_bands_sum(self, tmp_path):
        Y, _ = ingest_cases(write(tmp_path, [("2020-09-03", "0-29", 2), ("2020-09-03", "30-59", 4)]),
                            MAPPING, GRID, START)
        assert Y.counts[0, 0] == 6

    def test_weekly_aggregation_and_outside_days(self, tmp_path):
        start = dt.date(2020, 9, 1)
        rows = [((start + dt.timedelta(days=i)).isoformat(), "60+", 1) for i in range(-10, 40)]
        Y, daily = ingest_cases(write(tmp_path, rows), MAPPING, GRID, START)
        assert Y.counts[:, 1].tolist() == [7, 7, 7, 7]
        assert daily.n_days == 50 and daily.relative(start)[0] == -10

    def test_unknown_band(self, tmp_path):
        with pytest.raises(BandMappingError, match="90\\+"):
            ingest_cases(write(tmp_path, [("2020-09-01", "90+", 1)]), MAPPING, GRID, START)

    def test_gap(self, tmp_path):
        with pytest.raises(DateGapError, match="2020-09-02"):
            ingest_cases(write(tmp_path, [("2020-09-01", "60+", 1), ("2020-09-03", "60+", 1)]), MAPPING, GRID, START)

    @settings(suppress_health_check=[HealthCheck.function_scoped_fixture])
    @given(hnp.arrays(np.int64, (12, 2), elements=st.integers(0, 30)), st.integers(-8, 3))
    def test_roundtrip_idempotent(self, tmp_path, counts, offset):
        start = dt.date(2020, 9, 1)
        daily = DailySeries(start + dt.timedelta(days=offset), counts)
        p = tmp_path / "export.csv"
        write_cases(p, daily, ["a", "b"])
        Y1, d1 = ingest_cases(p, {"a": 0, "b": 1}, GRID, START)
        write_cases(p, d1, ["a", "b"])
        Y2, d2 = ingest_cases(p, {"a": 0, "b": 1}, GRID, START)
        np.testing.assert_array_equal(d1.counts, counts)
        np.testing.assert_array_equal(Y1.counts, Y2.counts)
        assert d1.first_date == d2.first_date


class TestSeedHistory:
    def daily(self, A=2):
        return np.zeros((21, A))  # days -14 .. 6

    def test_all_zero(self):
        assert len(init_seed_history(self.daily(), 0.5, 21.0)) == 0

    def test_direct_rule(self):
        d = self.daily()
        d[14 + 3, 0] = 10  # day 3 -> seeds on day -4
        seeds = init_seed_history(d, 0.5, 21.0)
        assert len(seeds) == 20 and set(seeds.ages.tolist()) == {0}
        assert np.all((seeds.times >= 17.0) & (seeds.times < 18.0))
        np.testing.assert_allclose(np.diff(seeds.times), 1 / 20)

    @given(hnp.arrays(float, (21, 3), elements=st.integers(0, 9).map(float)), st.sampled_from([0.5, 0.3, 1.0, 0.7]))
    def test_count_identity(self, d, beta):
        seeds = init_seed_history(d, beta, 21.0)
        assert len(seeds) == int(sum(np.round(x / beta) for x in d.ravel()))
        assert np.all(seeds.times < 21.0) and np.all(seeds.times >= 0.0)

    def test_half_to_even(self):
        d = self.daily(1)
        d[20, 0] = 5  # 5 / 2 = 2.5 -> 2
        d[19, 0] = 3  # 1.5 -> 2
        assert len(init_seed_history(d, 2.0, 21.0)) == 4

    def test_missing_days(self):
        with pytest.raises(InsufficientHistoryError, match="-14"):
            init_seed_history(np.zeros((20, 1)), 0.5, 21.0, first_day=-13)

    def test_jitter(self):
        d = self.daily()
        d[:, 1] = 2
        a = init_seed_history(d, 0.5, 21.0, rng=np.random.default_rng(0))
        b = init_seed_history(d, 0.5, 21.0)
        assert len(a) == len(b)
        assert np.all(np.floor(a.times) == np.floor(b.times))

    def test_weekly_windows(self):
        weekly = np.array([[2, 1], [4, 0], [6, 3]])
        seeds = init_seed_history_weekly(weekly, 0.5, t0=42.0)
        for i, row in zip((-2, -1, 0), weekly):
            lo, hi = (i + 2) * 7 + 21, (i + 3) * 7 + 21
            inside = (seeds.times >= lo) & (seeds.times < hi)
            assert np.bincount(seeds.ages[inside], minlength=2).tolist() == (row * 2).tolist()

    def test_weekly_needs_three_weeks(self):
        with pytest.raises(InsufficientHistoryError):
            init_seed_history_weekly(np.ones((2, 1)), 0.5, 42.0)


class TestSusceptibles:
    def test_fully_susceptible(self):
        assert init_susceptibles([100, 200], [0.0, 0.0]).tolist() == [100, 200]

    def test_fully_immune(self):
        assert init_susceptibles([100, 200], [1.0, 1.0]).tolist() == [0, 0]

    def test_discount(self):
        assert init_susceptibles([1000, 500], [0.3, 0.25], z=0.2).tolist() == [900, 475]

    def test_enforce_two_x(self):
        with pytest.raises(ValueError):
            init_susceptibles([100], [0.9], reported=[20], enforce_2x=True)
        assert init_susceptibles([100], [0.5], reported=[20], enforce_2x=True).tolist() == [50]

    def test_invalid(self):
        with pytest.raises(ValueError):
            init_susceptibles([100], [1.2])
        with pytest.raises(ValueError):
            init_susceptibles([100, 100], [0.1, 0.5], z=0.2)


def test_file_roundtrips(tmp_path):
    cfg = two_group_config(k=3)
    seeds = uniform_seeds(cfg, [30, 10])
    data = generate_synthetic(cfg, np.full((3, 2), 0.3), seeds, 0.05, np.random.default_rng(0))
    write_seeds(tmp_path / "s.csv", seeds)
    back = read_seeds(tmp_path / "s.csv")
    np.testing.assert_array_equal(back.times, seeds.times)
    write_gammas(tmp_path / "g.csv", data.gammas, ["a", "b"])
    np.testing.assert_array_equal(read_gammas(tmp_path / "g.csv"), data.gammas)
    write_observed(tmp_path / "o.csv", data.observed)
    np.testing.assert_array_equal(read_observed(tmp_path / "o.csv").counts, data.observed.counts)
    write_latent_events(tmp_path / "e.csv", seeds, data.latent)
    ev = read_latent_events(tmp_path / "e.csv")
    assert len(ev["id"]) == len(seeds) + sum(len(s) for s in data.latent)
    assert np.all(ev["parent_id"][ev["interval"] == 0] == -1)
    child = ev["parent_id"] >= 0
    assert np.all(ev["time"][ev["parent_id"][child]] < ev["time"][child])


def test_read_observed_rejects_out_of_range(tmp_path):
    p = tmp_path / "o.csv"
    p.write_text("interval,age,count\n5,0,3\n")
    with pytest.raises(ValueError):
        read_observed(p, k=4, n_groups=1)
