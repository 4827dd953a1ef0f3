"""Daily load profile data model and CSV ingestion.

A daily load profile is one household-day: 24 hourly current readings in
Amperes, where slot t covers the hour starting at t:00 (t = 0 is
00:00:00-00:59:59). A ProfileSet is the columnar collection of profiles for
a whole dataset, with weekday and month derived from the date.
"""

from __future__ import annotations

import csv
import datetime as dt
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError

HOURS = 24

CSV_HEADER = ["household_id", "date"] + [f"h{t}" for t in range(HOURS)]


@dataclass(frozen=True)
class DailyLoadProfile:
    """One household-day of hourly readings (Amperes)."""

    household_id: str
    date: dt.date
    values: tuple

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if len(vals) != HOURS:
            raise DataError(f"profile needs {HOURS} readings, got {len(vals)}")
        arr = np.asarray(vals)
        if not np.all(np.isfinite(arr)):
            raise DataError("profile readings must be finite")
        if np.any(arr < 0):
            raise DataError("profile readings must be non-negative")
        object.__setattr__(self, "values", vals)


def total_demand(profile) -> float:
    """Total daily demand: the sum of the 24 hourly readings."""
    return float(np.sum(_values_of(profile)))


def peak_demand(profile) -> float:
    """Peak daily demand: the maximum hourly reading."""
    return float(np.max(_values_of(profile)))


def _values_of(profile):
    if isinstance(profile, DailyLoadProfile):
        return np.asarray(profile.values, dtype=np.float64)
    arr = np.asarray(profile, dtype=np.float64)
    if arr.shape != (HOURS,):
        raise DataError(f"expected a {HOURS}-value profile, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class ProfileSet:
    """Columnar, immutable collection of daily load profiles.

    `values` is an (n, 24) float array; `weekdays` (0=Monday .. 6=Sunday) and
    `months` (1..12) are derived deterministically from `dates`.
    """

    household_ids: tuple
    dates: tuple
    values: np.ndarray
    weekdays: np.ndarray = field(init=False)
    months: np.ndarray = field(init=False)

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        n = len(self.household_ids)
        if values.shape != (n, HOURS):
            raise DataError(f"values must be ({n}, {HOURS}), got {values.shape}")
        if len(self.dates) != n:
            raise DataError("household_ids and dates must have equal length")
        if values.size and (not np.all(np.isfinite(values)) or values.min() < 0):
            raise DataError("readings must be finite and non-negative")
        weekdays = np.fromiter((d.weekday() for d in self.dates), dtype=np.int8, count=n)
        months = np.fromiter((d.month for d in self.dates), dtype=np.int8, count=n)
        values.setflags(write=False)
        weekdays.setflags(write=False)
        months.setflags(write=False)
        object.__setattr__(self, "household_ids", tuple(self.household_ids))
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "weekdays", weekdays)
        object.__setattr__(self, "months", months)

    def __len__(self) -> int:
        return len(self.household_ids)

    def profile(self, i: int) -> DailyLoadProfile:
        return DailyLoadProfile(self.household_ids[i], self.dates[i], tuple(self.values[i]))

    def totals(self) -> np.ndarray:
        return self.values.sum(axis=1)

    def peaks(self) -> np.ndarray:
        if len(self) == 0:
            return np.empty(0)
        return self.values.max(axis=1)

    def subset(self, indices) -> "ProfileSet":
        """New ProfileSet with the rows `indices`, preserving their order."""
        idx = np.asarray(indices, dtype=np.intp)
        return ProfileSet(
            tuple(self.household_ids[i] for i in idx),
            tuple(self.dates[i] for i in idx),
            self.values[idx],
        )

    def household_rows(self) -> dict:
        """Row indices per household id, in first-appearance order."""
        rows: dict = {}
        for i, hid in enumerate(self.household_ids):
            rows.setdefault(hid, []).append(i)
        return rows


def load_csv(path) -> ProfileSet:
    """Read a ProfileSet from CSV (`household_id,date,h0,...,h23`).

    Rows are kept in file order. A malformed row (wrong column count,
    negative or non-numeric reading, unparsable date) raises DataError naming
    its 1-based line number.
    """
    ids, dates, rows = [], [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip() for c in header] != CSV_HEADER:
            raise DataError(f"{path}: header must be {','.join(CSV_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2 + HOURS:
                raise DataError(f"{path}: line {lineno}: expected {2 + HOURS} columns, got {len(row)}")
            try:
                date = dt.date.fromisoformat(row[1].strip())
            except ValueError:
                raise DataError(f"{path}: line {lineno}: unparsable date {row[1]!r}") from None
            try:
                vals = np.array([float(v) for v in row[2:]], dtype=np.float64)
            except ValueError:
                raise DataError(f"{path}: line {lineno}: non-numeric reading") from None
            if not np.all(np.isfinite(vals)):
                raise DataError(f"{path}: line {lineno}: non-finite reading")
            if vals.min() < 0:
                raise DataError(f"{path}: line {lineno}: negative reading")
            ids.append(row[0].strip())
            dates.append(date)
            rows.append(vals)
    values = np.vstack(rows) if rows else np.empty((0, HOURS))
    return ProfileSet(tuple(ids), tuple(dates), values)


def write_csv(pset: ProfileSet, path) -> None:
    """Write a ProfileSet in the load_csv format (full float round-trip)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for hid, date, row in zip(pset.household_ids, pset.dates, pset.values):
            writer.writerow([hid, date.isoformat()] + [repr(float(v)) for v in row])
