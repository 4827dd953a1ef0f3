"""Config-driven experiment grid execution, persistence and run ranking.

One run record is the unit that the combined index ranks. Without
pre-binning every (normalisation, algorithm, parameter, seed) combination is
its own record. With pre-binning the whole parameter grid is evaluated
inside every bin, the parameterisation with the lowest interim score is
selected per bin, and the union of the selected per-bin cluster sets forms a
single record per (normalisation, algorithm, seed).

Records persist as one JSON document per run plus a grid-level index CSV;
wall-clock timings go to a separate file so the run documents are
byte-stable across repeated executions.
"""

from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import cluster, plots, preprocess, qual, quant, scoring
from .config import ExperimentConfig, QualSettings, load_snapshot, save_snapshot
from .errors import ConfigError, DataError, MetricError
from .profiles import ProfileSet, load_csv
from .synthetic import generate_synthetic


@dataclass(frozen=True)
class Evaluation:
    """Validity indices of one parameterisation inside one bin."""

    params: dict
    dbi: float | None = None
    mia: float | None = None
    silhouette: float | None = None
    ix: float | None = None
    error: str | None = None


@dataclass(frozen=True)
class BinOutcome:
    bin_id: int
    n_profiles: int  # clustered profiles (bin members minus un-normalisable)
    n_unnormalisable: int
    n_empty_clusters: int
    evaluated: tuple  # Evaluation, in grid order
    selected: dict | None  # params of the lowest valid ix


@dataclass
class RunRecord:
    run_id: str
    experiment: str
    normalisation: str
    algorithm: str
    seed: int
    zeros: str
    prebin: dict
    bins: tuple = ()
    ci: float | None = None
    n_total: int = 0
    status: str = "ok"
    error: str | None = None
    labels: np.ndarray | None = None  # global cluster id per input row, -1 unclustered
    cluster_bin: tuple = ()  # bin id per global cluster
    cluster_params: tuple = ()  # selected params per global cluster
    sizes: tuple = ()
    rdlps: tuple = ()  # per global cluster, 24 raw-Ampere values
    timing: float = field(default=0.0, compare=False)

    def to_doc(self) -> dict:
        return {
            "run_id": self.run_id,
            "experiment": self.experiment,
            "normalisation": self.normalisation,
            "algorithm": self.algorithm,
            "seed": self.seed,
            "zeros": self.zeros,
            "prebin": self.prebin,
            "status": self.status,
            "error": self.error,
            "quant": {"ci": self.ci, "n_total": self.n_total},
            "bins": [
                {
                    "bin_id": b.bin_id,
                    "n_profiles": b.n_profiles,
                    "n_unnormalisable": b.n_unnormalisable,
                    "n_empty_clusters": b.n_empty_clusters,
                    "selected": b.selected,
                    "evaluated": [
                        {
                            "params": e.params,
                            "dbi": e.dbi,
                            "mia": e.mia,
                            "silhouette": e.silhouette,
                            "ix": e.ix,
                            "error": e.error,
                        }
                        for e in b.evaluated
                    ],
                }
                for b in self.bins
            ],
            "clusters": [
                {
                    "cluster_id": cid + 1,
                    "bin_id": self.cluster_bin[cid],
                    "params": self.cluster_params[cid],
                    "size": int(self.sizes[cid]),
                    "rdlp": [float(v) for v in self.rdlps[cid]],
                }
                for cid in range(len(self.sizes))
            ],
            # label values match cluster_id (1-based); -1 marks rows that were
            # excluded or fell in an unclustered bin
            "labels": None
            if self.labels is None
            else [int(v) + 1 if v >= 0 else -1 for v in self.labels],
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "RunRecord":
        bins = tuple(
            BinOutcome(
                bin_id=b["bin_id"],
                n_profiles=b["n_profiles"],
                n_unnormalisable=b["n_unnormalisable"],
                n_empty_clusters=b["n_empty_clusters"],
                evaluated=tuple(Evaluation(**e) for e in b["evaluated"]),
                selected=b["selected"],
            )
            for b in doc["bins"]
        )
        clusters = doc["clusters"]
        return cls(
            run_id=doc["run_id"],
            experiment=doc["experiment"],
            normalisation=doc["normalisation"],
            algorithm=doc["algorithm"],
            seed=doc["seed"],
            zeros=doc["zeros"],
            prebin=doc["prebin"],
            bins=bins,
            ci=doc["quant"]["ci"],
            n_total=doc["quant"]["n_total"],
            status=doc["status"],
            error=doc["error"],
            labels=None
            if doc["labels"] is None
            else np.asarray([v - 1 if v >= 1 else -1 for v in doc["labels"]], dtype=np.int64),
            cluster_bin=tuple(c["bin_id"] for c in clusters),
            cluster_params=tuple(c["params"] for c in clusters),
            sizes=tuple(c["size"] for c in clusters),
            rdlps=tuple(tuple(c["rdlp"]) for c in clusters),
        )


def load_dataset(cfg: ExperimentConfig) -> ProfileSet:
    if cfg.csv_path is not None:
        return load_csv(cfg.csv_path)
    return generate_synthetic(cfg.synthetic)


def experiment_input(base: ProfileSet, spec) -> ProfileSet:
    return preprocess.filter_zeros(base, keep_zeros=spec.zeros == "keep")


def _prebin(spec, pset, cfg: ExperimentConfig, seed) -> preprocess.BinAssignment:
    if spec.prebin == "none":
        return preprocess.BinAssignment(np.ones(len(pset), dtype=np.int64), n_bins=1)
    if spec.prebin == "amc":
        return preprocess.prebin_amc(pset, cfg.amc_edges)
    return preprocess.prebin_integral_kmeans(pset, n_bins=cfg.integral_bins, rng_seed=seed)


def _fit(x, kind, params, seed):
    """Dispatch one clustering fit; returns (labels, centroids)."""
    if kind == "kmeans":
        fit = cluster.kmeans(x, params["m"], seed=seed)
        return fit.labels, fit.centroids
    if kind == "som":
        fit = cluster.som(x, params["s"], seed=seed)
        return fit.labels, fit.codebook
    fit = cluster.som_kmeans(x, params["s"], params["m"], seed=seed)
    return fit.labels, fit.centroids


def _evaluate_fit(x, labels, centroids, cap, seed):
    d = quant.dbi(x, labels, centroids)
    m = quant.mia(x, labels, centroids)
    s = quant.silhouette(x, labels, sample_cap=cap, seed=seed)
    return d, m, s, quant.ix_score(d, m, s)


def _run_id(exp_name, norm, kind, params, seed):
    parts = [exp_name, norm, kind]
    if params is not None:
        parts += [f"{k}{params[k]}" for k in sorted(params)]
    parts.append(f"seed{seed}")
    return "-".join(parts)


def _bin_sweep(x_norm, grid_params, kind, seed, cap):
    """Evaluate every parameterisation on one bin's normalised matrix.

    Returns (evaluations, selected_params, best_fit) where best_fit is
    (labels, centroids) of the lowest-ix parameterisation.
    """
    evaluations = []
    best = None  # (ix, params, labels, centroids)
    for params in grid_params:
        try:
            labels, centroids = _fit(x_norm, kind, params, seed)
            d, m, s, ix = _evaluate_fit(x_norm, labels, centroids, cap, seed)
        except (MetricError, DataError, ValueError) as exc:
            evaluations.append(Evaluation(params=params, error=str(exc)))
            continue
        evaluations.append(Evaluation(params=params, dbi=d, mia=m, silhouette=s, ix=ix))
        if best is None or ix < best[0]:
            best = (ix, params, labels, centroids)
    if best is None:
        return evaluations, None, None
    return evaluations, best[1], (best[2], best[3])


def _assemble_record(exp, norm, grid, seed, pset, bins, cfg, grid_params, run_id):
    """Run one record's worth of clustering and metrics."""
    prebin_doc = {"method": exp.prebin}
    if exp.prebin == "amc":
        prebin_doc["n_bins"] = len(cfg.amc_edges)
    elif exp.prebin == "integral_kmeans":
        prebin_doc["n_bins"] = cfg.integral_bins
    record = RunRecord(
        run_id=run_id,
        experiment=exp.name,
        normalisation=norm,
        algorithm=grid.kind,
        seed=seed,
        zeros=exp.zeros,
        prebin=prebin_doc,
        labels=np.full(len(pset), -1, dtype=np.int64),
    )
    bin_outcomes = []
    per_bin_ix = []
    cluster_bin, cluster_params, sizes, rdlps = [], [], [], []
    failures = []
    for bin_id in range(1, bins.n_bins + 1):
        rows = bins.rows_in_bin(bin_id)
        if rows.size == 0:
            continue
        raw = pset.values[rows]
        x_norm, kept, n_excluded = preprocess.normalise_set(raw, norm)
        if kept.size == 0:
            bin_outcomes.append(
                BinOutcome(bin_id, 0, int(n_excluded), 0, (), None)
            )
            continue
        evaluated, selected, best_fit = _bin_sweep(
            x_norm, grid_params, grid.kind, seed, cfg.silhouette_cap
        )
        if selected is None:
            bin_outcomes.append(
                BinOutcome(bin_id, int(kept.size), int(n_excluded), 0, tuple(evaluated), None)
            )
            failures.append(f"bin {bin_id}: no parameterisation produced a valid ix")
            continue
        labels, centroids = best_fit
        n_local = centroids.shape[0]
        local_rdlps, local_sizes = cluster.compute_rdlp(raw[kept], labels, n_local)
        n_empty = int((local_sizes == 0).sum())
        selected_eval = next(e for e in evaluated if e.params == selected)
        per_bin_ix.append((selected_eval.ix, int(kept.size)))
        bin_outcomes.append(
            BinOutcome(bin_id, int(kept.size), int(n_excluded), n_empty, tuple(evaluated), selected)
        )
        # append this bin's non-empty clusters to the union model
        remap = {}
        for local in np.flatnonzero(local_sizes > 0):
            remap[int(local)] = len(sizes)
            cluster_bin.append(bin_id)
            cluster_params.append(selected)
            sizes.append(int(local_sizes[local]))
            rdlps.append(tuple(float(v) for v in local_rdlps[local]))
        global_rows = rows[kept]
        record.labels[global_rows] = [remap[int(l)] for l in labels]
    record.bins = tuple(bin_outcomes)
    record.cluster_bin = tuple(cluster_bin)
    record.cluster_params = tuple(cluster_params)
    record.sizes = tuple(sizes)
    record.rdlps = tuple(rdlps)
    if failures or not per_bin_ix:
        record.status = "failed"
        record.error = "; ".join(failures) if failures else "no bin could be clustered"
        record.ci = None
        record.n_total = sum(n for _, n in per_bin_ix)
        return record
    record.n_total = sum(n for _, n in per_bin_ix)
    record.ci = quant.combined_index(per_bin_ix, record.n_total)
    return record


def _record_tasks(cfg: ExperimentConfig, base: ProfileSet):
    """Yield closures, one per run record, in deterministic order."""
    for exp in cfg.experiments:
        pset = experiment_input(base, exp)
        for seed in cfg.seeds:
            bins = _prebin(exp, pset, cfg, seed)
            for norm in exp.normalisations:
                for grid in exp.algorithms:
                    all_params = grid.expand()
                    if exp.prebin == "none":
                        # every parameterisation is its own record
                        for params in all_params:
                            rid = _run_id(exp.name, norm, grid.kind, params, seed)
                            yield rid, _task(exp, norm, grid, seed, pset, bins, cfg, [params], rid)
                    else:
                        rid = _run_id(exp.name, norm, grid.kind, None, seed)
                        yield rid, _task(exp, norm, grid, seed, pset, bins, cfg, all_params, rid)


def _task(exp, norm, grid, seed, pset, bins, cfg, grid_params, rid):
    def run():
        started = time.perf_counter()
        record = _assemble_record(exp, norm, grid, seed, pset, bins, cfg, grid_params, rid)
        record.timing = time.perf_counter() - started
        return record

    return run


def run_grid(cfg: ExperimentConfig, out_dir=None) -> list:
    """Execute the whole grid and persist the records.

    A failing run becomes a first-class record with its error recorded; it
    never aborts the rest of the grid.
    """
    base = load_dataset(cfg)
    tasks = list(_record_tasks(cfg, base))
    ids = [rid for rid, _ in tasks]
    if len(set(ids)) != len(ids):
        raise ConfigError("duplicate run ids; check experiment names and grids")
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            records = list(pool.map(lambda t: t[1](), tasks))
    else:
        records = [t[1]() for t in tasks]
    out = Path(out_dir if out_dir is not None else cfg.output_dir)
    persist_records(cfg, records, out)
    return records


def persist_records(cfg: ExperimentConfig, records, out_dir) -> None:
    out = Path(out_dir)
    runs = out / "runs"
    runs.mkdir(parents=True, exist_ok=True)
    save_snapshot(cfg, out)
    timings = {}
    for record in records:
        doc = record.to_doc()
        validate_record(doc)
        with open(runs / f"{record.run_id}.json", "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
        timings[record.run_id] = record.timing
    with open(out / "index.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["run_id", "experiment", "normalisation", "algorithm", "seed",
             "status", "ci", "n_total", "n_clusters"]
        )
        for record in sorted(records, key=lambda r: r.run_id):
            writer.writerow(
                [record.run_id, record.experiment, record.normalisation,
                 record.algorithm, record.seed, record.status,
                 "" if record.ci is None else repr(record.ci),
                 record.n_total, len(record.sizes)]
            )
    with open(out / "timing.json", "w") as fh:
        json.dump(timings, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_records(results_dir) -> list:
    runs = Path(results_dir) / "runs"
    if not runs.is_dir():
        raise DataError(f"{results_dir}: no runs/ directory")
    records = []
    for path in sorted(runs.glob("*.json")):
        with open(path) as fh:
            records.append(RunRecord.from_doc(json.load(fh)))
    if not records:
        raise DataError(f"{results_dir}: no run documents found")
    return records


_RECORD_SCHEMA = {
    "run_id": str,
    "experiment": str,
    "normalisation": str,
    "algorithm": str,
    "seed": int,
    "zeros": str,
    "prebin": dict,
    "status": str,
    "error": (str, type(None)),
    "quant": dict,
    "bins": list,
    "clusters": list,
    "labels": (list, type(None)),
}


def validate_record(doc: dict) -> None:
    """Check a run document against the published result schema
    (docs/result_schema.json)."""
    for key, kind in _RECORD_SCHEMA.items():
        if key not in doc:
            raise DataError(f"record missing field {key!r}")
        if not isinstance(doc[key], kind):
            raise DataError(f"record field {key!r} has wrong type")
    if not {"ci", "n_total"} <= doc["quant"].keys():
        raise DataError("record quant must carry ci and n_total")
    for b in doc["bins"]:
        for key in ("bin_id", "n_profiles", "n_unnormalisable", "n_empty_clusters",
                    "selected", "evaluated"):
            if key not in b:
                raise DataError(f"bin outcome missing field {key!r}")
    for c in doc["clusters"]:
        for key in ("cluster_id", "bin_id", "params", "size", "rdlp"):
            if key not in c:
                raise DataError(f"cluster entry missing field {key!r}")
        if len(c["rdlp"]) != 24:
            raise DataError("cluster rdlp must have 24 values")


def evaluate_qualitative(record: RunRecord, pset: ProfileSet, settings: QualSettings) -> qual.SetQualScores:
    """Qualitative measures of one record against its experiment input set."""
    if record.labels is None or len(record.labels) != len(pset):
        raise MetricError(
            f"{record.run_id}: labels do not match the dataset "
            f"({0 if record.labels is None else len(record.labels)} vs {len(pset)})"
        )
    if not record.sizes:
        raise MetricError(f"{record.run_id}: record has no clusters")
    total_pct, peak_pct = qual.demand_percentile_features(pset)
    per_cluster = []
    for cid in range(len(record.sizes)):
        member = np.flatnonzero(record.labels == cid)
        if member.size == 0:
            continue
        per_cluster.append(
            qual.score_cluster(
                cluster_id=cid + 1,
                member_values=pset.values[member],
                member_weekdays=pset.weekdays[member],
                member_months=pset.months[member],
                member_total_pct=total_pct[member],
                member_peak_pct=peak_pct[member],
                rdlp=np.asarray(record.rdlps[cid]),
            )
        )
    pct, zero_rep, count_ok = qual.usability_scores(
        record.sizes,
        np.asarray(record.rdlps, dtype=np.float64),
        threshold=settings.member_threshold,
        max_clusters=settings.max_clusters,
        zero_tol=settings.zero_tol,
    )
    usability = {
        "pct_above_threshold": pct,
        "zero_profile_represented": zero_rep,
        "n_clusters_ok": count_ok,
    }
    return qual.aggregate_set_scores(
        per_cluster, threshold=settings.member_threshold, usability=usability
    )


MEASURE_MAP = {
    "sensible_count_pct": "pct_clusters_above_threshold",
    "zero_profile_represented": "zero_profile_represented",
    "consumption_error_total": "mdsyma_total",
    "consumption_error_peak": "mdsyma_peak",
    "peak_coincidence": "mpc_ratio",
    "entropy_weekday": "entropy_weekday",
    "entropy_month": "entropy_month",
    "entropy_total_demand": "entropy_total_demand",
    "entropy_peak_demand": "entropy_peak_demand",
}


def measure_values(scores: qual.SetQualScores, matrix: scoring.ScoringMatrix):
    """Matrix-measure values for one run, or None if any is undefined."""
    values = {}
    for measure in matrix.measures:
        attr = MEASURE_MAP.get(measure.name, measure.name)
        value = getattr(scores, attr, None)
        if value is None:
            return None
        values[measure.name] = value
    return values


def select_and_rank(records, datasets, top_n=10, matrix=None, settings=None) -> dict:
    """Two-stage selection: combined-index shortlist, then the scoring matrix.

    `datasets` maps experiment name to its input ProfileSet (zeros already
    filtered). Stage 1 keeps the `top_n` records with the lowest combined
    index (ties broken by run id); stage 2 computes qualitative measures for
    exactly those records and ranks them with the scoring matrix. The report
    carries both orderings so re-ranking between the stages is visible.
    """
    matrix = matrix or scoring.default_matrix()
    settings = settings or QualSettings()
    valid = [r for r in records if r.ci is not None]
    if not valid:
        raise DataError("no record has a valid combined index")
    stage1 = sorted(valid, key=lambda r: (r.ci, r.run_id))
    top = stage1[:top_n]
    table = {}
    qual_details = {}
    for record in top:
        pset = datasets.get(record.experiment)
        if pset is None:
            raise ConfigError(f"no dataset provided for experiment {record.experiment!r}")
        try:
            scores = evaluate_qualitative(record, pset, settings)
        except MetricError as exc:
            table[record.run_id] = None
            qual_details[record.run_id] = {"disqualified": str(exc)}
            continue
        table[record.run_id] = measure_values(scores, matrix)
        qual_details[record.run_id] = qual.scores_as_dict(scores)
        if table[record.run_id] is None:
            qual_details[record.run_id]["disqualified"] = "a matrix measure is undefined"
    run_scores = scoring.score_runs(table, matrix)
    by_ci = {r.run_id: i + 1 for i, r in enumerate(stage1)}
    return {
        "stage1": [
            {"rank": i + 1, "run_id": r.run_id, "ci": r.ci, "n_total": r.n_total,
             "n_clusters": len(r.sizes), "experiment": r.experiment,
             "normalisation": r.normalisation, "algorithm": r.algorithm}
            for i, r in enumerate(stage1)
        ],
        "stage2": [
            {"final_rank": s.final_rank, "run_id": s.run_id, "total": s.total,
             "ci_rank": by_ci[s.run_id], "disqualified": s.disqualified,
             "ranks": s.ranks, "measures": table[s.run_id],
             "qualitative": qual_details[s.run_id]}
            for s in run_scores
        ],
        "matrix": {
            "measure": [
                {"name": m.name, "weight": m.weight, "direction": m.direction}
                for m in matrix.measures
            ]
        },
        "top_n": top_n,
    }


def rank_results_dir(results_dir, top_n=None, matrix=None) -> dict:
    """Re-rankable entry point over a persisted results directory."""
    cfg = load_snapshot(results_dir)
    records = load_records(results_dir)
    base = load_dataset(cfg)
    datasets = {e.name: experiment_input(base, e) for e in cfg.experiments}
    report = select_and_rank(
        records,
        datasets,
        top_n=top_n if top_n is not None else cfg.top_n,
        matrix=matrix if matrix is not None else cfg.matrix,
        settings=cfg.qual,
    )
    with open(Path(results_dir) / "report.json", "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return report


def emit_plots(record: RunRecord, out_dir) -> list:
    """Write the RDLP-curve and cluster-size CSVs and SVGs for one record.

    Empty clusters never reach the record's cluster list, so they are
    omitted from the plots as well.
    """
    clusters = [
        (cid + 1, record.rdlps[cid]) for cid in range(len(record.sizes))
    ]
    sizes = [(cid + 1, record.sizes[cid]) for cid in range(len(record.sizes))]
    return plots.emit_plot_files(record.run_id, clusters, sizes, out_dir)
