"""A constructed pair of runs whose combined-index order and scoring-matrix
order invert: run "quant_winner" has the lower (better) combined index over a
degenerate mixed partition, while run "qual_winner" clusters the same data by
its true groups and wins every qualitative measure."""

import datetime as dt

import numpy as np

from rdlp.config import QualSettings
from rdlp.profiles import ProfileSet
from rdlp.runner import BinOutcome, Evaluation, RunRecord

TRICKLE_LEVEL = 1e-8  # effectively no consumption
QUAL_SETTINGS = QualSettings(member_threshold=10, max_clusters=220, zero_tol=1e-6)


def build_dataset() -> ProfileSet:
    """20 identical near-zero Sunday profiles plus 20 identical evening-peak
    Wednesday profiles."""
    trickle = np.full(24, TRICKLE_LEVEL)
    evening = np.ones(24)
    evening[18] = 5.0
    values = np.vstack([np.tile(trickle, (20, 1)), np.tile(evening, (20, 1))])
    sundays = [dt.date(2014, 1, 5), dt.date(2014, 1, 12), dt.date(2014, 1, 19), dt.date(2014, 1, 26)]
    wednesdays = [dt.date(2014, 7, 2), dt.date(2014, 7, 9), dt.date(2014, 7, 16), dt.date(2014, 7, 23)]
    dates = [sundays[i % 4] for i in range(20)] + [wednesdays[i % 4] for i in range(20)]
    ids = [f"T{i % 5}" for i in range(20)] + [f"E{i % 5}" for i in range(20)]
    return ProfileSet(tuple(ids), tuple(dates), values)


def _record(run_id, ci, labels, values):
    labels = np.asarray(labels, dtype=np.int64)
    n_clusters = labels.max() + 1
    sizes, rdlps = [], []
    for k in range(n_clusters):
        members = values[labels == k]
        sizes.append(len(members))
        rdlps.append(tuple(float(v) for v in members.mean(axis=0)))
    evaluation = Evaluation(params={"m": int(n_clusters)}, dbi=1.0, mia=1.0,
                            silhouette=0.5, ix=float(np.exp(ci)))
    return RunRecord(
        run_id=run_id,
        experiment="pairdemo",
        normalisation="unit_norm",
        algorithm="kmeans",
        seed=0,
        zeros="keep",
        prebin={"method": "none"},
        bins=(BinOutcome(1, len(labels), 0, 0, (evaluation,), evaluation.params),),
        ci=float(ci),
        n_total=len(labels),
        labels=labels,
        cluster_bin=tuple([1] * n_clusters),
        cluster_params=tuple([evaluation.params] * n_clusters),
        sizes=tuple(sizes),
        rdlps=tuple(rdlps),
    )


def build_pair():
    """Returns (records, datasets): quant_winner has ci 0.5, qual_winner 1.0."""
    pset = build_dataset()
    true_labels = np.repeat([0, 1], 20)
    # degenerate partition: one big mixed cluster and two small mixed ones
    mixed_labels = np.zeros(40, dtype=np.int64)
    mixed_labels[12:16] = 1
    mixed_labels[16:20] = 2
    mixed_labels[32:36] = 1
    mixed_labels[36:40] = 2
    quant_winner = _record("quant_winner", 0.5, mixed_labels, pset.values)
    qual_winner = _record("qual_winner", 1.0, true_labels, pset.values)
    return [quant_winner, qual_winner], {"pairdemo": pset}
