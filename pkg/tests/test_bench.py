"""Tests for the replication sweep harness and its reports."""

import json

import numpy as np
import pytest

from tailcluster.bench import (
    METHODS,
    BenchReport,
    MethodCell,
    PRESETS,
    SweepConfig,
    emit_report,
    merge_reports,
    parse_report,
    run_replication,
    run_sweep,
)
from tailcluster.core import ClusterParams, ValidationError, default_params
from tailcluster.simulate import SimModelSpec


def tiny_config(**overrides):
    base = dict(
        model="EXACT_PARETO",
        n=300,
        reps=3,
        master_seed=99,
        methods=METHODS,
        g=(2,),
        q=(2,),
        delta=(0.5,),
    )
    base.update(overrides)
    return SweepConfig(**base)


def strip_times(report: BenchReport):
    # everything except wall-time fields, for determinism comparisons
    return [
        (
            pt.model, pt.g, pt.q, pt.delta, pt.n, pt.k, pt.k_star, pt.beta,
            pt.k_hill, pt.defaults_used, pt.rep_seeds,
            [
                (c.method, c.accuracies, c.mses, c.failures,
                 c.mean_accuracy, c.mean_mse)
                for c in pt.cells
            ],
        )
        for pt in report.points
    ]


class TestSweepConfig:
    def test_validation(self):
        with pytest.raises(ValidationError):
            tiny_config(model="Z")
        with pytest.raises(ValidationError):
            tiny_config(reps=0)
        with pytest.raises(ValidationError):
            tiny_config(methods=("proposed_unknown_g", "nope"))
        with pytest.raises(ValidationError):
            tiny_config(methods=("tail_kmeans", "tail_kmeans"))
        with pytest.raises(ValidationError):
            tiny_config(k_hill=0)

    def test_axes_coerced_to_tuples(self):
        cfg = tiny_config(g=[2, 3], delta=[0.5])
        assert cfg.g == (2, 3)
        assert cfg.delta == (0.5,)


class TestRunReplication:
    def test_consistency_regime_accuracy(self):
        # two well-separated exact-Pareto groups at n=2000: a clean sweep
        spec = SimModelSpec(model="EXACT_PARETO", g=2, q=5, delta=0.5, n=2000, seed=7)
        params = default_params(spec.p, spec.n)
        out = run_replication(spec, params)
        assert out["proposed_unknown_g"].accuracy == 1.0
        assert out["proposed_known_g"].accuracy == 1.0
        assert out["proposed_unknown_g"].error is None

    def test_g_one_known_g_is_always_right(self):
        spec = SimModelSpec(model="A", g=1, q=4, delta=0.5, n=200, seed=3)
        params = default_params(spec.p, spec.n)
        out = run_replication(spec, params, methods=("proposed_known_g",))
        assert out["proposed_known_g"].accuracy == 1.0

    def test_failure_recorded_not_raised(self):
        spec = SimModelSpec(model="EXACT_PARETO", g=2, q=1, delta=0.5, n=30, seed=1)
        params = ClusterParams(k=2, k_star=10, beta=0.8)
        out = run_replication(spec, params, k_hill=40)
        for method in METHODS:
            assert out[method].error is not None
            assert out[method].accuracy is None

    def test_raw_hill_extra(self):
        spec = SimModelSpec(model="EXACT_PARETO", g=2, q=2, delta=0.5, n=200, seed=5)
        params = default_params(spec.p, spec.n)
        out = run_replication(spec, params, include_raw_hill=True)
        assert "raw_hill" in out
        assert out["raw_hill"].mse is not None
        assert out["raw_hill"].partition is None


class TestRunSweep:
    def test_deterministic_given_master_seed(self):
        a = run_sweep(tiny_config())
        b = run_sweep(tiny_config())
        assert strip_times(a) == strip_times(b)

    def test_master_seed_changes_results(self):
        a = run_sweep(tiny_config())
        b = run_sweep(tiny_config(master_seed=100))
        assert strip_times(a) != strip_times(b)

    def test_parallel_equals_sequential(self):
        cfg = tiny_config(reps=4)
        seq = run_sweep(cfg, workers=1)
        par = run_sweep(cfg, workers=3)
        assert strip_times(seq) == strip_times(par)

    def test_shared_design_shares_rep_seeds(self):
        # a pure tuning-parameter sweep reuses the same datasets per rep
        cfg = tiny_config(n=400, k=(3, 5), k_star=(50,), beta=(0.7,))
        report = run_sweep(cfg)
        assert len(report.points) == 2
        assert report.points[0].rep_seeds == report.points[1].rep_seeds
        assert report.points[0].k != report.points[1].k

    def test_defaults_recorded(self):
        report = run_sweep(tiny_config(reps=1))
        pt = report.points[0]
        want = default_params(4, 300)
        assert (pt.k, pt.k_star, pt.beta) == (want.k, want.k_star, want.beta)
        assert pt.defaults_used == ("k", "k_star", "beta")
        assert pt.k_hill == pt.k

    def test_single_column_point_needs_explicit_params(self):
        with pytest.raises(ValidationError, match="k"):
            run_sweep(tiny_config(g=(1,), q=(1,)))

    def test_failures_counted_means_over_successes(self):
        cfg = tiny_config(
            n=30, reps=2, k=(2,), k_star=(10,), beta=(0.8,), k_hill=40,
            methods=("proposed_unknown_g",),
        )
        report = run_sweep(cfg)
        cell = report.points[0].cells[0]
        assert len(cell.failures) == 2
        assert cell.mean_accuracy is None
        assert cell.accuracies == ()


class TestReports:
    def test_json_round_trip(self):
        report = run_sweep(tiny_config())
        again = parse_report(emit_report(report, "json"))
        assert again == report

    def test_csv_row_count_and_header(self):
        report = run_sweep(tiny_config(g=(2,), q=(2, 3)))
        lines = emit_report(report, "csv").decode().strip().split("\n")
        assert lines[0] == (
            "model,g,q,delta,n,k,k_star,beta,method,reps,failures,"
            "mean_accuracy,mean_mse"
        )
        assert len(lines) - 1 == 2 * len(METHODS)

    def test_csv_raw_hill_rows(self):
        report = run_sweep(
            tiny_config(methods=("proposed_unknown_g",), include_raw_hill=True)
        )
        lines = emit_report(report, "csv").decode().strip().split("\n")
        assert len(lines) - 1 == 2
        assert lines[-1].split(",")[8] == "raw_hill"

    def test_empty_sweep(self):
        report = run_sweep(tiny_config(g=()))
        assert report.points == ()
        assert json.loads(emit_report(report, "json"))["points"] == []
        assert emit_report(report, "csv").decode().strip().count("\n") == 0

    def test_mean_consistency_enforced(self):
        with pytest.raises(ValidationError):
            MethodCell(
                method="proposed_unknown_g",
                accuracies=(0.5, 1.0),
                mses=(0.1,),
                failures=(),
                mean_accuracy=0.9,
                mean_mse=0.1,
                wall_time=0.0,
            )

    def test_bad_format(self):
        report = run_sweep(tiny_config(reps=1))
        with pytest.raises(ValidationError):
            emit_report(report, "yaml")

    def test_schema_version_checked(self):
        report = run_sweep(tiny_config(reps=1))
        blob = json.loads(emit_report(report, "json"))
        blob["schema_version"] = 999
        with pytest.raises(ValidationError):
            BenchReport.from_json(json.dumps(blob))


class TestMergeReports:
    def test_merges_points(self):
        a = run_sweep(tiny_config(g=(2,)))
        b = run_sweep(tiny_config(g=(3,)))
        merged = merge_reports([a, b])
        assert len(merged.points) == 2
        assert strip_times(merged) == strip_times(a) + strip_times(b)

    def test_rejects_template_mismatch(self):
        a = run_sweep(tiny_config())
        b = run_sweep(tiny_config(master_seed=1))
        with pytest.raises(ValidationError):
            merge_reports([a, b])
        with pytest.raises(ValidationError):
            merge_reports([])


class TestPresets:
    def test_all_presets_build(self):
        for name, builder in PRESETS.items():
            configs = builder(5, 123)
            assert configs, name
            for cfg in configs:
                assert cfg.reps == 5
                assert cfg.master_seed == 123
                assert cfg.model == "A"
                assert cfg.n == 2000

    def test_fig3_varies_one_parameter_per_config(self):
        k_cfg, beta_cfg, kstar_cfg = PRESETS["fig3"](2, 1)
        assert len(k_cfg.k) > 1 and k_cfg.beta == (None,) and k_cfg.k_star == (None,)
        assert len(beta_cfg.beta) > 1 and beta_cfg.k == (None,)
        assert len(kstar_cfg.k_star) > 1 and kstar_cfg.k == (None,)

    def test_fig5_includes_raw_hill(self):
        (cfg,) = PRESETS["fig5"](2, 1)
        assert cfg.include_raw_hill
