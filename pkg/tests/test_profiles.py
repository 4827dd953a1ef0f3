import datetime as dt

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rdlp.errors import DataError
from rdlp.profiles import (
    CSV_HEADER,
    DailyLoadProfile,
    ProfileSet,
    load_csv,
    peak_demand,
    total_demand,
    write_csv,
)

from .conftest import make_set


def _csv_line(hid, date, values):
    return ",".join([hid, date] + [str(v) for v in values])


def _write(path, lines):
    path.write_text(",".join(CSV_HEADER) + "\n" + "\n".join(lines) + "\n")


class TestDailyLoadProfile:
    def test_valid(self):
        p = DailyLoadProfile("H1", dt.date(2014, 3, 2), tuple([1.0] * 24))
        assert len(p.values) == 24

    @pytest.mark.parametrize("n", [0, 23, 25])
    def test_wrong_length(self, n):
        with pytest.raises(DataError):
            DailyLoadProfile("H1", dt.date(2014, 3, 2), tuple([1.0] * n))

    def test_negative_rejected(self):
        vals = [1.0] * 24
        vals[5] = -0.1
        with pytest.raises(DataError):
            DailyLoadProfile("H1", dt.date(2014, 3, 2), tuple(vals))

    def test_non_finite_rejected(self):
        vals = [1.0] * 24
        vals[5] = float("nan")
        with pytest.raises(DataError):
            DailyLoadProfile("H1", dt.date(2014, 3, 2), tuple(vals))


class TestDemand:
    def test_constant_profile(self):
        assert total_demand([1.0] * 24) == 24.0
        assert peak_demand([1.0] * 24) == 1.0

    def test_all_zero(self):
        assert total_demand([0.0] * 24) == 0.0
        assert peak_demand([0.0] * 24) == 0.0

    def test_single_spike(self):
        vals = [1.0] * 24
        vals[18] = 5.0
        # 23 ones plus the spike
        assert total_demand(vals) == 28.0
        assert peak_demand(vals) == 5.0

    @given(
        st.lists(st.floats(min_value=0, max_value=1e6, allow_nan=False), min_size=24, max_size=24)
    )
    @settings(max_examples=100, deadline=None)
    def test_total_at_least_peak(self, values):
        assert total_demand(values) >= peak_demand(values) >= 0.0


def _zeller_weekday(date):
    """Independent day-of-week oracle (Zeller's congruence), 0=Monday."""
    q, m, y = date.day, date.month, date.year
    if m < 3:
        m += 12
        y -= 1
    k, j = y % 100, y // 100
    h = (q + (13 * (m + 1)) // 5 + k + k // 4 + j // 4 + 5 * j) % 7
    return (h + 5) % 7  # zeller: 0=Saturday -> python: 0=Monday


class TestCalendarFeatures:
    def test_known_sunday(self):
        pset = make_set([[0.0] * 24], start=dt.date(2014, 3, 2))
        assert pset.weekdays[0] == 6  # Sunday
        assert pset.months[0] == 3

    def test_against_zeller_oracle(self, rng):
        days = rng.integers(0, 20 * 365, size=100)
        dates = [dt.date(1994, 1, 1) + dt.timedelta(days=int(d)) for d in days]
        pset = ProfileSet(
            tuple(f"H{i}" for i in range(len(dates))),
            tuple(dates),
            np.ones((len(dates), 24)),
        )
        for i, date in enumerate(dates):
            assert pset.weekdays[i] == _zeller_weekday(date)
            assert pset.months[i] == date.month


class TestCsv:
    def test_all_zero_row(self, tmp_path):
        path = tmp_path / "data.csv"
        _write(path, [_csv_line("H1", "2014-03-02", [0] * 24)])
        pset = load_csv(path)
        assert len(pset) == 1
        assert pset.totals()[0] == 0.0

    def test_short_row_names_line(self, tmp_path):
        path = tmp_path / "data.csv"
        _write(path, [_csv_line("H1", "2014-03-02", [1] * 23)])
        with pytest.raises(DataError, match="line 2"):
            load_csv(path)

    def test_bad_date_names_line(self, tmp_path):
        path = tmp_path / "data.csv"
        _write(
            path,
            [
                _csv_line("H1", "2014-03-02", [1] * 24),
                _csv_line("H1", "2014-13-02", [1] * 24),
            ],
        )
        with pytest.raises(DataError, match="line 3"):
            load_csv(path)

    def test_negative_reading_rejected(self, tmp_path):
        path = tmp_path / "data.csv"
        _write(path, [_csv_line("H1", "2014-03-02", [-1] + [1] * 23)])
        with pytest.raises(DataError, match="negative"):
            load_csv(path)

    def test_wrong_header(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text("a,b,c\n")
        with pytest.raises(DataError, match="header"):
            load_csv(path)

    def test_row_order_preserved(self, tmp_path):
        path = tmp_path / "data.csv"
        _write(
            path,
            [
                _csv_line("H2", "2014-03-03", [2] * 24),
                _csv_line("H1", "2014-03-02", [1] * 24),
            ],
        )
        pset = load_csv(path)
        assert pset.household_ids == ("H2", "H1")

    def test_round_trip_identity(self, tmp_path, rng):
        values = rng.uniform(0, 40, size=(30, 24))
        values[3] = 0.0
        pset = make_set(values, household=[f"H{i % 4}" for i in range(30)])
        out = tmp_path / "round.csv"
        write_csv(pset, out)
        back = load_csv(out)
        assert back.household_ids == pset.household_ids
        assert back.dates == pset.dates
        assert np.array_equal(back.values, pset.values)


class TestProfileSet:
    def test_subset_keeps_order(self, rng):
        pset = make_set(rng.uniform(0, 5, size=(10, 24)))
        sub = pset.subset([7, 2, 4])
        assert sub.dates == (pset.dates[7], pset.dates[2], pset.dates[4])
        assert np.array_equal(sub.values[1], pset.values[2])

    def test_household_grouping_recoverable(self):
        pset = make_set(np.ones((6, 24)), household=["A", "B", "A", "C", "B", "A"])
        rows = pset.household_rows()
        assert rows == {"A": [0, 2, 5], "B": [1, 4], "C": [3]}

    def test_values_immutable(self):
        pset = make_set(np.ones((2, 24)))
        with pytest.raises(ValueError):
            pset.values[0, 0] = 5.0
