"""Experiment configuration: TOML parsing, validation and snapshotting.

A config names a dataset (CSV path or an inline synthetic spec), a list of
experiments (zero handling, pre-binning, normalisations, algorithm grids)
and the selection/qualitative settings. The resolved document is saved next
to the results so a results directory is self-describing and re-rankable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ImportError:  # Python 3.10
    import tomli as tomllib

from . import preprocess, scoring
from .errors import ConfigError
from .synthetic import SyntheticSpec, load_synthetic_spec

ZEROS_CHOICES = ("keep", "drop")
PREBIN_CHOICES = ("none", "amc", "integral_kmeans")
ALGORITHM_CHOICES = ("kmeans", "som", "som_kmeans")


def _expand_values(value, what):
    """Parameter grid entry: explicit list, or {start, stop, step} inclusive."""
    if isinstance(value, dict):
        try:
            start, stop = int(value["start"]), int(value["stop"])
        except KeyError as exc:
            raise ConfigError(f"{what}: range needs {exc}") from None
        step = int(value.get("step", 1))
        if step < 1 or stop < start:
            raise ConfigError(f"{what}: bad range {value}")
        return tuple(range(start, stop + 1, step))
    values = tuple(int(v) for v in value)
    if not values:
        raise ConfigError(f"{what}: empty parameter list")
    return values


@dataclass(frozen=True)
class AlgorithmGrid:
    kind: str
    m_values: tuple = ()
    s_values: tuple = ()

    def __post_init__(self):
        if self.kind not in ALGORITHM_CHOICES:
            raise ConfigError(f"unknown algorithm {self.kind!r}")
        if self.kind in ("kmeans", "som_kmeans") and not self.m_values:
            raise ConfigError(f"{self.kind}: m grid required")
        if self.kind in ("som", "som_kmeans") and not self.s_values:
            raise ConfigError(f"{self.kind}: s grid required")
        if self.kind == "kmeans" and any(m < 2 for m in self.m_values):
            raise ConfigError("kmeans: every m must be >= 2")
        if self.kind in ("som", "som_kmeans") and any(s < 2 for s in self.s_values):
            raise ConfigError("som: every map side must be >= 2")

    def expand(self):
        """Parameter dicts in grid order; som_kmeans pairs violating s^2 > m
        are left out."""
        if self.kind == "kmeans":
            return [{"m": m} for m in self.m_values]
        if self.kind == "som":
            return [{"s": s} for s in self.s_values]
        pairs = [
            {"s": s, "m": m} for s in self.s_values for m in self.m_values if s * s > m
        ]
        if not pairs:
            raise ConfigError("som_kmeans: no (s, m) pair satisfies s^2 > m")
        return pairs


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    zeros: str
    prebin: str
    normalisations: tuple
    algorithms: tuple

    def __post_init__(self):
        if self.zeros not in ZEROS_CHOICES:
            raise ConfigError(f"{self.name}: zeros must be one of {ZEROS_CHOICES}")
        if self.prebin not in PREBIN_CHOICES:
            raise ConfigError(f"{self.name}: prebin must be one of {PREBIN_CHOICES}")
        if not self.normalisations:
            raise ConfigError(f"{self.name}: at least one normalisation required")
        for n in self.normalisations:
            preprocess.NormalisationMethod(n)
        if not self.algorithms:
            raise ConfigError(f"{self.name}: at least one algorithm required")
        for grid in self.algorithms:
            grid.expand()


@dataclass(frozen=True)
class QualSettings:
    member_threshold: int = 10_490
    max_clusters: int = 220
    zero_tol: float = 1e-6


@dataclass(frozen=True)
class ExperimentConfig:
    doc: dict = field(repr=False)
    csv_path: str | None
    synthetic: SyntheticSpec | None
    experiments: tuple
    seeds: tuple
    workers: int
    output_dir: str
    top_n: int
    matrix: scoring.ScoringMatrix
    qual: QualSettings
    silhouette_cap: int
    amc_edges: tuple
    integral_bins: int


def parse_config(doc: dict, base_dir: Path) -> ExperimentConfig:
    doc = json.loads(json.dumps(doc))  # deep copy; also proves JSON-ability
    dataset = doc.get("dataset") or {}
    csv_path = dataset.get("csv")
    synthetic_doc = dataset.get("synthetic")
    if (csv_path is None) == (synthetic_doc is None):
        raise ConfigError("dataset: exactly one of `csv` or `synthetic` is required")
    synthetic = load_synthetic_spec(synthetic_doc) if synthetic_doc else None
    if csv_path is not None:
        csv_path = str((base_dir / csv_path).resolve())
        dataset["csv"] = csv_path

    run = doc.get("run") or {}
    seeds = tuple(int(s) for s in run.get("seeds", [0]))
    if not seeds:
        raise ConfigError("run.seeds must not be empty")
    workers = int(run.get("workers", 1))
    output_dir = str(run.get("output", "results"))

    selection = doc.setdefault("selection", {})
    top_n = int(selection.get("top_n", 10))
    if top_n < 1:
        raise ConfigError("selection.top_n must be >= 1")
    matrix_path = selection.pop("scoring_matrix", None)
    if matrix_path is not None:
        with open(base_dir / matrix_path, "rb") as fh:
            selection["matrix"] = tomllib.load(fh)
    if "matrix" in selection:
        matrix = scoring.load_matrix(selection["matrix"])
    else:
        matrix = scoring.default_matrix()
        selection["matrix"] = {
            "measure": [
                {"name": m.name, "weight": m.weight, "direction": m.direction}
                for m in matrix.measures
            ]
        }

    qual_doc = doc.get("qualitative") or {}
    qual = QualSettings(
        member_threshold=int(qual_doc.get("member_threshold", 10_490)),
        max_clusters=int(qual_doc.get("max_clusters", 220)),
        zero_tol=float(qual_doc.get("zero_tol", 1e-6)),
    )

    quant_doc = doc.get("quant") or {}
    silhouette_cap = int(quant_doc.get("silhouette_cap", 20_000))

    prebin_doc = doc.get("prebin") or {}
    amc_edges = tuple(float(e) for e in prebin_doc.get("amc", {}).get("edges", preprocess.DEFAULT_AMC_EDGES))
    integral_bins = int(prebin_doc.get("integral_kmeans", {}).get("n_bins", 8))

    exp_docs = doc.get("experiment")
    if not exp_docs:
        raise ConfigError("at least one [[experiment]] block is required")
    experiments = []
    seen = set()
    for e in exp_docs:
        name = str(e.get("name", f"exp{len(experiments) + 1}"))
        if name in seen:
            raise ConfigError(f"duplicate experiment name {name!r}")
        seen.add(name)
        algorithms = tuple(
            AlgorithmGrid(
                kind=str(a.get("kind", "kmeans")),
                m_values=_expand_values(a["m"], f"{name}.m") if "m" in a else (),
                s_values=_expand_values(a["s"], f"{name}.s") if "s" in a else (),
            )
            for a in e.get("algorithm", [])
        )
        experiments.append(
            ExperimentSpec(
                name=name,
                zeros=str(e.get("zeros", "keep")),
                prebin=str(e.get("prebin", "none")),
                normalisations=tuple(e.get("normalisations", ["none"])),
                algorithms=algorithms,
            )
        )
    return ExperimentConfig(
        doc=doc,
        csv_path=csv_path,
        synthetic=synthetic,
        experiments=tuple(experiments),
        seeds=seeds,
        workers=workers,
        output_dir=output_dir,
        top_n=top_n,
        matrix=matrix,
        qual=qual,
        silhouette_cap=silhouette_cap,
        amc_edges=amc_edges,
        integral_bins=integral_bins,
    )


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    with open(path, "rb") as fh:
        try:
            doc = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
    return parse_config(doc, path.parent)


def save_snapshot(config: ExperimentConfig, out_dir) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "config.json", "w") as fh:
        json.dump(config.doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_snapshot(results_dir) -> ExperimentConfig:
    path = Path(results_dir) / "config.json"
    if not path.exists():
        raise ConfigError(f"{results_dir}: no config.json; not a results directory?")
    with open(path) as fh:
        doc = json.load(fh)
    return parse_config(doc, Path(results_dir))
