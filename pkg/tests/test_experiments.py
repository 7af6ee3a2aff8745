import numpy as np
import pytest

from shapereg.experiments import (
    EXPERIMENTS,
    METHODS,
    PAIRWISE_EXPERIMENTS,
    ExperimentConfig,
    run_experiment,
    worker_count,
)


@pytest.fixture(autouse=True)
def single_worker(monkeypatch):
    monkeypatch.setenv("SHAPEREG_THREADS", "1")


def test_experiment_names():
    assert set(PAIRWISE_EXPERIMENTS) == {"clean", "outliers", "unsorted", "outliers+unsorted"}
    assert set(EXPERIMENTS) - set(PAIRWISE_EXPERIMENTS) == {"groupwise"}
    assert METHODS == ("dtw", "dtw-unweighted", "icp")


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(name="nope")
    with pytest.raises(ValueError):
        ExperimentConfig(name="clean", trials=0)


def test_config_dict_round_trip():
    cfg = ExperimentConfig(name="outliers", trials=7, seed=3, template_points=120, c_min=0.5)
    assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("SHAPEREG_THREADS", "1")
    assert worker_count() == 1
    monkeypatch.setenv("SHAPEREG_THREADS", "0")
    assert worker_count() == 1
    monkeypatch.setenv("SHAPEREG_THREADS", "17")
    cap = worker_count()
    monkeypatch.delenv("SHAPEREG_THREADS")
    assert worker_count() == cap  # the env var can only lower the cap
    monkeypatch.setenv("SHAPEREG_THREADS", "two")
    with pytest.raises(ValueError):
        worker_count()


def test_clean_experiment_structure_and_determinism():
    cfg = ExperimentConfig(name="clean", trials=3, template_points=80, seed=4)
    rows, summary = run_experiment(cfg)
    assert len(rows) == 3 * len(METHODS)
    for row in rows:
        assert set(row) == {"trial", "method", "ok", "d_test", "iou", "converged", "iterations"}
    assert summary["name"] == "clean"
    assert set(summary["methods"]) == set(METHODS)
    for entry in summary["methods"].values():
        assert entry["n_ok"] + entry["n_failed"] == 3

    # clean trials are exactly recoverable by the warp-based methods
    assert summary["methods"]["dtw"]["d_test_median"] < 1e-6
    assert summary["methods"]["dtw"]["n_ok"] == 3

    rows2, summary2 = run_experiment(cfg)
    assert rows == rows2
    assert summary == summary2


def test_unsorted_experiment_runs():
    cfg = ExperimentConfig(name="unsorted", trials=2, template_points=80, seed=1)
    rows, summary = run_experiment(cfg)
    assert len(rows) == 2 * len(METHODS)
    # ICP never depends on point order, so it scores every trial
    assert summary["methods"]["icp"]["n_ok"] == 2


def test_failed_order_recovery_is_reported_not_raised():
    # outliers plus shuffling makes order recovery fail on some trials;
    # those trials drop out of the warp methods but never crash the run
    cfg = ExperimentConfig(name="outliers+unsorted", trials=3, template_points=80, seed=4)
    rows, summary = run_experiment(cfg)
    dtw_rows = [r for r in rows if r["method"] == "dtw"]
    assert any(not r["ok"] for r in dtw_rows)
    assert summary["methods"]["dtw"]["n_ok"] < 3
    assert summary["methods"]["icp"]["n_ok"] == 3
    for r in dtw_rows:
        if not r["ok"]:
            assert np.isnan(r["d_test"])


def test_groupwise_experiment_summary():
    cfg = ExperimentConfig(
        name="groupwise", template_points=60, seed=4, group_m=5, group_deform_sigma=0.3
    )
    rows, summary = run_experiment(cfg)
    assert len(rows) == 5
    assert {"sample", "n_points", "cut_start", "cut_end"} == set(rows[0])
    assert summary["converged"]
    assert summary["total_variance"] < summary["baseline_total_variance"]
    assert summary["geodesic_to_template"] < 0.02

    _, summary2 = run_experiment(cfg)
    assert summary == summary2
