"""Weighted rank aggregation of qualitative measures across experiment runs.

Runs are ranked within each measure (rank 1 is best, ties get the mean of
the tied positions) and every rank is multiplied by the measure's weight;
the lower the weighted total, the better the cluster set. Boolean measures
rank their true runs 1 and their false runs just behind all true ones.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigError

LOWER_BETTER = "lower_better"
HIGHER_BETTER = "higher_better"
BOOLEAN_GOOD = "boolean_good"
_DIRECTIONS = (LOWER_BETTER, HIGHER_BETTER, BOOLEAN_GOOD)


@dataclass(frozen=True)
class Measure:
    name: str
    weight: int
    direction: str

    def __post_init__(self):
        if self.weight < 1 or int(self.weight) != self.weight:
            raise ConfigError(f"measure {self.name!r}: weight must be a positive integer")
        if self.direction not in _DIRECTIONS:
            raise ConfigError(f"measure {self.name!r}: direction must be one of {_DIRECTIONS}")


@dataclass(frozen=True)
class ScoringMatrix:
    measures: tuple

    def __post_init__(self):
        measures = tuple(self.measures)
        names = [m.name for m in measures]
        if len(set(names)) != len(names):
            raise ConfigError("measure names must be unique")
        if not measures:
            raise ConfigError("scoring matrix needs at least one measure")
        object.__setattr__(self, "measures", measures)

    def total_weight(self) -> int:
        return sum(m.weight for m in self.measures)

    def names(self):
        return [m.name for m in self.measures]


def default_matrix() -> ScoringMatrix:
    """The shipped nine-measure matrix with the expert weights."""
    return ScoringMatrix(
        (
            Measure("sensible_count_pct", 2, HIGHER_BETTER),
            Measure("zero_profile_represented", 1, BOOLEAN_GOOD),
            Measure("consumption_error_total", 6, LOWER_BETTER),
            Measure("consumption_error_peak", 6, LOWER_BETTER),
            Measure("peak_coincidence", 3, HIGHER_BETTER),
            Measure("entropy_weekday", 4, LOWER_BETTER),
            Measure("entropy_month", 4, LOWER_BETTER),
            Measure("entropy_total_demand", 5, LOWER_BETTER),
            Measure("entropy_peak_demand", 5, LOWER_BETTER),
        )
    )


def load_matrix(doc: dict) -> ScoringMatrix:
    """Scoring matrix from a parsed config document ([[measure]] tables)."""
    try:
        measures = tuple(
            Measure(m["name"], int(m["weight"]), m["direction"]) for m in doc["measure"]
        )
    except KeyError as exc:
        raise ConfigError(f"scoring matrix entry missing key {exc}") from None
    return ScoringMatrix(measures)


@dataclass(frozen=True)
class RunScore:
    run_id: str
    ranks: dict  # measure name -> rank (1 best)
    total: float | None  # None for disqualified runs
    final_rank: int
    disqualified: bool = False


def _mean_ranks(ordered_values):
    """Ranks 1..n over values sorted best-first; equal values share the mean
    of their positions."""
    ranks = {}
    i = 0
    position = 1
    while i < len(ordered_values):
        j = i
        while j + 1 < len(ordered_values) and ordered_values[j + 1][0] == ordered_values[i][0]:
            j += 1
        mean_rank = (position + position + (j - i)) / 2.0
        for k in range(i, j + 1):
            ranks[ordered_values[k][1]] = mean_rank
        position += j - i + 1
        i = j + 1
    return ranks


def score_runs(measure_table: dict, matrix: ScoringMatrix | None = None) -> list:
    """Rank runs per measure, weight the ranks, and order by weighted total.

    `measure_table` maps run id -> {measure name: value}, or to None for a
    run disqualified from qualitative ranking. Disqualified runs are placed
    last (stable by run id) with their totals omitted.
    """
    if not measure_table:
        raise ConfigError("score_runs needs at least one run")
    matrix = matrix or default_matrix()
    qualified = sorted(r for r, v in measure_table.items() if v is not None)
    disqualified = sorted(r for r, v in measure_table.items() if v is None)
    ranks = {r: {} for r in qualified}
    for measure in matrix.measures:
        try:
            values = {r: measure_table[r][measure.name] for r in qualified}
        except KeyError:
            raise ConfigError(f"run missing value for measure {measure.name!r}") from None
        if measure.direction == BOOLEAN_GOOD:
            n_true = sum(1 for v in values.values() if v)
            for r, v in values.items():
                ranks[r][measure.name] = 1.0 if v else float(n_true + 1)
            continue
        sign = 1.0 if measure.direction == LOWER_BETTER else -1.0
        ordered = sorted(((sign * float(values[r]), r) for r in qualified))
        for r, rank in _mean_ranks(ordered).items():
            ranks[r][measure.name] = rank
    totals = {
        r: sum(ranks[r][m.name] * m.weight for m in matrix.measures) for r in qualified
    }
    placed = sorted(qualified, key=lambda r: (totals[r], r))
    scores = [
        RunScore(r, ranks[r], totals[r], final_rank=i + 1) for i, r in enumerate(placed)
    ]
    for j, r in enumerate(disqualified):
        scores.append(RunScore(r, {}, None, final_rank=len(placed) + j + 1, disqualified=True))
    return scores


def weight_sensitivity(measure_table: dict, matrix: ScoringMatrix | None = None, delta: int = 1) -> dict:
    """Re-score under each single-measure weight perturbed by +-delta.

    Returns {measure name: {"+": top run, "-": top run}} plus the baseline
    top run under "baseline"; weights never drop below 1.
    """
    matrix = matrix or default_matrix()
    baseline = score_runs(measure_table, matrix)[0].run_id
    outcome = {"baseline": baseline}
    for i, measure in enumerate(matrix.measures):
        variants = {}
        for sign, tag in ((delta, "+"), (-delta, "-")):
            weight = max(1, measure.weight + sign)
            measures = list(matrix.measures)
            measures[i] = Measure(measure.name, weight, measure.direction)
            variants[tag] = score_runs(measure_table, ScoringMatrix(tuple(measures)))[0].run_id
        outcome[measure.name] = variants
    return outcome
