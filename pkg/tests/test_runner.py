import json
import math
import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np
import pytest

from rdlp.config import QualSettings, load_config, load_snapshot, parse_config
from rdlp.errors import ConfigError, DataError, MetricError
from rdlp.runner import (
    RunRecord,
    emit_plots,
    evaluate_qualitative,
    load_records,
    rank_results_dir,
    run_grid,
    select_and_rank,
    validate_record,
)

from .rerank_fixture import QUAL_SETTINGS, build_dataset, build_pair

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"

MINI_SYNTH = {
    "n_households": 10,
    "days": 10,
    "seed": 4,
    "archetype": [
        {"name": "low", "template": [0.2] * 10 + [0.6] * 4 + [0.2] * 10,
         "amplitude": [0.9, 1.1], "noise": 0.01},
        {"name": "high", "template": [2.0] * 14 + [9.0] * 4 + [2.0] * 6,
         "amplitude": [0.9, 1.1], "noise": 0.1},
    ],
}


def mini_config(tmp_path, experiments, **overrides):
    doc = {
        "dataset": {"synthetic": MINI_SYNTH},
        "run": {"seeds": [0], "workers": 1, "output": str(tmp_path / "results")},
        "qualitative": {"member_threshold": 5, "zero_tol": 0.5},
        "experiment": experiments,
    }
    doc.update(overrides)
    return parse_config(doc, tmp_path)


class TestConfig:
    def test_quickstart_parses(self):
        cfg = load_config(CONFIG_DIR / "quickstart.toml")
        assert len(cfg.experiments) == 2
        assert cfg.integral_bins == 2
        assert cfg.qual.member_threshold == 20

    def test_full_grid_parses(self):
        cfg = load_config(CONFIG_DIR / "grid_full.toml")
        assert [e.name for e in cfg.experiments] == [f"exp{i}" for i in range(1, 9)]
        exp8 = cfg.experiments[-1]
        assert exp8.prebin == "integral_kmeans"
        assert exp8.zeros == "drop"
        assert exp8.algorithms[0].expand() == [{"m": m} for m in range(2, 20)]
        assert len(exp8.normalisations) == 5

    def test_range_expansion_is_inclusive(self, tmp_path):
        cfg = mini_config(
            tmp_path,
            [{"name": "a", "zeros": "keep", "prebin": "none",
              "normalisations": ["none"],
              "algorithm": [{"kind": "kmeans", "m": {"start": 5, "stop": 136, "step": 3}}]}],
        )
        values = cfg.experiments[0].algorithms[0].m_values
        assert values[0] == 5 and values[-1] == 134 and len(values) == 44

    def test_som_kmeans_pairs_filtered(self, tmp_path):
        cfg = mini_config(
            tmp_path,
            [{"name": "a", "zeros": "keep", "prebin": "none",
              "normalisations": ["none"],
              "algorithm": [{"kind": "som_kmeans", "s": [4], "m": [10, 15, 16, 20]}]}],
        )
        pairs = cfg.experiments[0].algorithms[0].expand()
        assert pairs == [{"s": 4, "m": 10}, {"s": 4, "m": 15}]

    def test_som_kmeans_all_invalid_rejected(self, tmp_path):
        with pytest.raises(ConfigError, match="s\\^2 > m"):
            mini_config(
                tmp_path,
                [{"name": "a", "zeros": "keep", "prebin": "none",
                  "normalisations": ["none"],
                  "algorithm": [{"kind": "som_kmeans", "s": [3], "m": [9, 12]}]}],
            )

    def test_dataset_required(self, tmp_path):
        with pytest.raises(ConfigError, match="dataset"):
            parse_config({"experiment": [{"name": "a"}]}, tmp_path)

    def test_both_datasets_rejected(self, tmp_path):
        with pytest.raises(ConfigError, match="exactly one"):
            parse_config(
                {"dataset": {"csv": "x.csv", "synthetic": MINI_SYNTH},
                 "experiment": [{"name": "a"}]},
                tmp_path,
            )

    def test_bad_zeros_value(self, tmp_path):
        with pytest.raises(ConfigError, match="zeros"):
            mini_config(
                tmp_path,
                [{"name": "a", "zeros": "maybe", "prebin": "none",
                  "normalisations": ["none"],
                  "algorithm": [{"kind": "kmeans", "m": [2]}]}],
            )

    def test_snapshot_round_trip(self, tmp_path):
        cfg = mini_config(
            tmp_path,
            [{"name": "a", "zeros": "keep", "prebin": "none",
              "normalisations": ["unit_norm"],
              "algorithm": [{"kind": "kmeans", "m": [2, 3]}]}],
        )
        run_grid(cfg, out_dir=tmp_path / "out")
        back = load_snapshot(tmp_path / "out")
        assert back.experiments == cfg.experiments
        assert back.qual == cfg.qual
        assert back.seeds == cfg.seeds


class TestRunGrid:
    def test_single_param_single_record(self, tmp_path):
        cfg = mini_config(
            tmp_path,
            [{"name": "solo", "zeros": "keep", "prebin": "none",
              "normalisations": ["unit_norm"],
              "algorithm": [{"kind": "kmeans", "m": [2]}]}],
        )
        records = run_grid(cfg, out_dir=tmp_path / "out")
        assert len(records) == 1
        assert records[0].run_id == "solo-unit_norm-kmeans-m2-seed0"
        assert records[0].status == "ok"
        assert records[0].ci is not None

    def test_all_algorithms_run(self, tmp_path):
        cfg = mini_config(
            tmp_path,
            [{"name": "mix", "zeros": "keep", "prebin": "none",
              "normalisations": ["unit_norm"],
              "algorithm": [
                  {"kind": "kmeans", "m": [2]},
                  {"kind": "som", "s": [3]},
                  {"kind": "som_kmeans", "s": [3], "m": [2]},
              ]}],
        )
        records = run_grid(cfg, out_dir=tmp_path / "out")
        assert sorted(r.algorithm for r in records) == ["kmeans", "som", "som_kmeans"]
        assert all(r.status == "ok" for r in records)
        som_record = next(r for r in records if r.algorithm == "som")
        assert sum(som_record.sizes) == som_record.n_total

    def test_oversized_m_is_recorded_not_raised(self, tmp_path):
        cfg = mini_config(
            tmp_path,
            [{"name": "big", "zeros": "keep", "prebin": "none",
              "normalisations": ["none"],
              "algorithm": [{"kind": "kmeans", "m": [2, 5000]}]}],
        )
        records = run_grid(cfg, out_dir=tmp_path / "out")
        by_id = {r.run_id: r for r in records}
        assert by_id["big-none-kmeans-m2-seed0"].status == "ok"
        failed = by_id["big-none-kmeans-m5000-seed0"]
        assert failed.status == "failed"
        assert failed.ci is None
        assert "5000" in failed.error or "valid ix" in failed.error

    def test_prebinned_record_selects_lowest_ix(self, tmp_path):
        cfg = mini_config(
            tmp_path,
            [{"name": "binned", "zeros": "keep", "prebin": "integral_kmeans",
              "normalisations": ["unit_norm"],
              "algorithm": [{"kind": "kmeans", "m": [2, 3, 4]}]}],
            prebin={"integral_kmeans": {"n_bins": 2}},
        )
        records = run_grid(cfg, out_dir=tmp_path / "out")
        assert len(records) == 1
        record = records[0]
        assert len(record.bins) == 2
        per_bin = []
        for b in record.bins:
            assert len(b.evaluated) == 3
            valid = [e for e in b.evaluated if e.ix is not None]
            best = min(valid, key=lambda e: e.ix)
            assert b.selected == best.params
            per_bin.append((best.ix, b.n_profiles))
        expected_ci = math.log(
            sum(ix * n for ix, n in per_bin) / record.n_total
        )
        assert record.ci == pytest.approx(expected_ci, abs=1e-12)

    def test_labels_cover_all_rows_without_prebin_exclusions(self, tmp_path):
        cfg = mini_config(
            tmp_path,
            [{"name": "a", "zeros": "keep", "prebin": "none",
              "normalisations": ["unit_norm"],
              "algorithm": [{"kind": "kmeans", "m": [3]}]}],
        )
        record = run_grid(cfg, out_dir=tmp_path / "out")[0]
        assert (record.labels >= 0).all()
        assert np.bincount(record.labels).tolist() == list(record.sizes)

    def test_deterministic_documents(self, tmp_path):
        cfg = load_config(CONFIG_DIR / "quickstart.toml")
        run_grid(cfg, out_dir=tmp_path / "a")
        run_grid(cfg, out_dir=tmp_path / "b")
        files_a = sorted((tmp_path / "a" / "runs").glob("*.json"))
        files_b = sorted((tmp_path / "b" / "runs").glob("*.json"))
        assert [f.name for f in files_a] == [f.name for f in files_b]
        for fa, fb in zip(files_a, files_b):
            assert fa.read_bytes() == fb.read_bytes()
        assert (tmp_path / "a" / "index.csv").read_bytes() == (tmp_path / "b" / "index.csv").read_bytes()

    def test_workers_give_same_results(self, tmp_path):
        cfg = mini_config(
            tmp_path,
            [{"name": "par", "zeros": "keep", "prebin": "none",
              "normalisations": ["unit_norm", "zero_one"],
              "algorithm": [{"kind": "kmeans", "m": [2, 3]}]}],
        )
        serial = run_grid(cfg, out_dir=tmp_path / "s")
        cfg2 = mini_config(
            tmp_path,
            [{"name": "par", "zeros": "keep", "prebin": "none",
              "normalisations": ["unit_norm", "zero_one"],
              "algorithm": [{"kind": "kmeans", "m": [2, 3]}]}],
            run={"seeds": [0], "workers": 4, "output": str(tmp_path / "p")},
        )
        parallel = run_grid(cfg2, out_dir=tmp_path / "p")
        assert [r.run_id for r in serial] == [r.run_id for r in parallel]
        for a, b in zip(serial, parallel):
            assert a.ci == b.ci
            assert np.array_equal(a.labels, b.labels)


class TestPersistence:
    def test_documents_validate_and_round_trip(self, tmp_path):
        cfg = mini_config(
            tmp_path,
            [{"name": "a", "zeros": "keep", "prebin": "none",
              "normalisations": ["unit_norm"],
              "algorithm": [{"kind": "kmeans", "m": [2, 3]}]}],
        )
        records = run_grid(cfg, out_dir=tmp_path / "out")
        loaded = {r.run_id: r for r in load_records(tmp_path / "out")}
        for record in records:
            validate_record(record.to_doc())
            back = loaded[record.run_id]
            assert back.ci == record.ci
            assert back.sizes == record.sizes
            assert np.array_equal(back.labels, record.labels)
            assert back.bins == record.bins

    def test_validate_rejects_missing_field(self):
        records, _ = build_pair()
        doc = records[0].to_doc()
        doc.pop("quant")
        with pytest.raises(DataError, match="quant"):
            validate_record(doc)

    def test_published_schema_matches_validator(self, tmp_path):
        schema = json.loads(
            (Path(__file__).resolve().parent.parent / "docs" / "result_schema.json").read_text()
        )
        records, _ = build_pair()
        doc = records[0].to_doc()
        assert set(schema["required"]) == set(doc)
        try:
            import jsonschema
        except ImportError:
            return
        jsonschema.validate(doc, schema)
        cfg = mini_config(
            tmp_path,
            [{"name": "a", "zeros": "keep", "prebin": "integral_kmeans",
              "normalisations": ["unit_norm"],
              "algorithm": [{"kind": "kmeans", "m": [2, 40]}]}],
            prebin={"integral_kmeans": {"n_bins": 2}},
        )
        for record in run_grid(cfg, out_dir=tmp_path / "out"):
            jsonschema.validate(record.to_doc(), schema)

    def test_timing_kept_out_of_run_documents(self, tmp_path):
        cfg = mini_config(
            tmp_path,
            [{"name": "a", "zeros": "keep", "prebin": "none",
              "normalisations": ["unit_norm"],
              "algorithm": [{"kind": "kmeans", "m": [2]}]}],
        )
        run_grid(cfg, out_dir=tmp_path / "out")
        doc = json.loads(next((tmp_path / "out" / "runs").glob("*.json")).read_text())
        assert "timing" not in doc
        timings = json.loads((tmp_path / "out" / "timing.json").read_text())
        assert set(timings) == {"a-unit_norm-kmeans-m2-seed0"}


class TestSelectAndRank:
    def test_top_n_limits_stage_two(self, tmp_path):
        cfg = mini_config(
            tmp_path,
            [{"name": "a", "zeros": "keep", "prebin": "none",
              "normalisations": ["unit_norm"],
              "algorithm": [{"kind": "kmeans", "m": [2, 3, 4, 5]}]}],
        )
        records = run_grid(cfg, out_dir=tmp_path / "out")
        from rdlp.runner import load_dataset

        datasets = {"a": load_dataset(cfg)}
        report = select_and_rank(records, datasets, top_n=2, settings=cfg.qual)
        assert len(report["stage2"]) == 2
        assert len(report["stage1"]) == len([r for r in records if r.ci is not None])

    def test_top_n_one_is_trivially_first(self):
        records, datasets = build_pair()
        report = select_and_rank(records, datasets, top_n=1, settings=QUAL_SETTINGS)
        assert [row["run_id"] for row in report["stage2"]] == ["quant_winner"]
        assert report["stage2"][0]["final_rank"] == 1

    def test_rerank_inversion(self):
        records, datasets = build_pair()
        report = select_and_rank(records, datasets, top_n=10, settings=QUAL_SETTINGS)
        assert [row["run_id"] for row in report["stage1"][:2]] == ["quant_winner", "qual_winner"]
        assert [row["run_id"] for row in report["stage2"]] == ["qual_winner", "quant_winner"]
        winner = report["stage2"][0]
        assert all(rank == 1.0 for rank in winner["ranks"].values())
        assert winner["measures"]["zero_profile_represented"] is True

    def test_identical_ci_stable_by_run_id(self):
        records, datasets = build_pair()
        for r in records:
            r.ci = 1.0
        report = select_and_rank(records, datasets, top_n=10, settings=QUAL_SETTINGS)
        assert [row["run_id"] for row in report["stage1"]] == ["qual_winner", "quant_winner"]

    def test_no_valid_ci_rejected(self):
        records, datasets = build_pair()
        for r in records:
            r.ci = None
        with pytest.raises(DataError):
            select_and_rank(records, datasets, settings=QUAL_SETTINGS)

    def test_mismatched_dataset_disqualifies(self):
        records, _ = build_pair()
        small = build_dataset().subset(range(10))
        report = select_and_rank(records, {"pairdemo": small}, settings=QUAL_SETTINGS)
        assert all(row["disqualified"] for row in report["stage2"])

    def test_rank_results_dir_writes_report(self, tmp_path):
        cfg = load_config(CONFIG_DIR / "quickstart.toml")
        run_grid(cfg, out_dir=tmp_path / "out")
        report = rank_results_dir(tmp_path / "out")
        assert (tmp_path / "out" / "report.json").exists()
        assert report["top_n"] == 8
        reread = json.loads((tmp_path / "out" / "report.json").read_text())
        assert reread["stage2"][0]["run_id"] == report["stage2"][0]["run_id"]


class TestEvaluateQualitative:
    def test_matches_direct_aggregation(self):
        records, datasets = build_pair()
        scores = evaluate_qualitative(records[1], datasets["pairdemo"], QUAL_SETTINGS)
        assert scores.mdsyma_total == pytest.approx(0.0, abs=1e-9)
        assert scores.mpc_ratio == pytest.approx(1.0)
        assert scores.entropy_weekday == pytest.approx(0.0, abs=1e-12)
        assert scores.zero_profile_represented is True
        assert scores.pct_clusters_above_threshold == pytest.approx(100.0)

    def test_wrong_length_labels_rejected(self):
        records, datasets = build_pair()
        with pytest.raises(MetricError):
            evaluate_qualitative(records[0], datasets["pairdemo"].subset(range(5)), QUAL_SETTINGS)


class TestEmitPlots:
    def test_files_written_and_svg_parses(self, tmp_path):
        records, _ = build_pair()
        paths = emit_plots(records[1], tmp_path)
        assert len(paths) == 4
        for path in paths:
            assert path.exists()
        for svg in (p for p in paths if p.suffix == ".svg"):
            root = ET.parse(svg).getroot()
            assert root.tag.endswith("svg")

    def test_eighteen_clusters_make_eighteen_groups(self, tmp_path, rng):
        values = rng.uniform(0.5, 2.0, size=(90, 24))
        labels = np.repeat(np.arange(18), 5)
        from rdlp.cluster import compute_rdlp

        rdlps, sizes = compute_rdlp(values, labels, 18)
        record = build_pair()[0][0]
        record.sizes = tuple(int(s) for s in sizes)
        record.rdlps = tuple(tuple(map(float, row)) for row in rdlps)
        record.cluster_bin = tuple([1] * 18)
        record.cluster_params = tuple([{"m": 18}] * 18)
        paths = emit_plots(record, tmp_path)
        rows = (tmp_path / f"{record.run_id}_rdlp.csv").read_text().strip().splitlines()
        groups = {line.split(",")[0] for line in rows[1:]}
        assert len(groups) == 18
        assert len(rows) == 1 + 18 * 24
