#!/usr/bin/env python3
# -*- coding: utf-8 -*-

import csv
import json

import numpy as np
import pytest

from conftest import blobs
from ssfn.config import ExperimentConfig, Hyperparameters
from ssfn.data import SourceData
from ssfn.exceptions import DataFormatError, ReportVersionError
from ssfn.harness import (
    RunSummary,
    Statistics,
    TrialSummary,
    emit_report,
    load_report,
    run_monte_carlo,
    run_trial,
    write_reports,
)

HYPER = Hyperparameters(lambda0=1e-2, mu=1e2, n_max_minus_2Q=20, delta=10, L_max=3)


def toy_source():
    full = blobs(P=4, Q=3, per_class=20, spread=1.5, seed=3, noise_seed=4, name="toy")
    return SourceData(full=full, train_fraction=0.7)


def make_trial(index, accuracy, nodes):
    return TrialSummary(
        index=index,
        seed=index,
        test_accuracy=accuracy,
        train_accuracy=1.0,
        ls_test_accuracy=0.5,
        lambda0=1.0,
        node_counts=tuple(nodes),
        layer_costs=tuple(0.1 for _ in nodes),
    )


def experiment(tmp_path, trials=3, workers=1):
    return ExperimentConfig(name="toy", dataset={}, hyper=HYPER, trials=trials, base_seed=10,
                            out_dir=tmp_path, workers=workers)


def test_statistics_sample_std():
    """Тест: СКО считается с делителем N - 1"""
    stats = Statistics.of([1.0, 2.0, 3.0, 4.0])

    assert stats.mean == pytest.approx(2.5)
    assert stats.std == pytest.approx(np.std([1, 2, 3, 4], ddof=1))
    assert (stats.min, stats.max) == (1.0, 4.0)


def test_statistics_single_value():
    """Тест: для одного испытания СКО равно 0"""
    stats = Statistics.of([0.7])

    assert stats.mean == 0.7 and stats.std == 0.0


def test_node_profile_counts_missing_layers_as_zero():
    """Тест: отсутствующий слой считается слоем из 0 узлов"""
    summary = RunSummary(name="x", hyper=HYPER, base_seed=0, trials=(
        make_trial(0, 0.9, [1020, 170, 770, 120]),
        make_trial(1, 0.8, [1020, 220]),
    ))
    profile = summary.node_profile()

    assert summary.depth == 4
    assert profile[2].mean == pytest.approx(385.0)
    assert profile[3].mean == pytest.approx(60.0)
    assert summary.trials[0].size_label == "1020-170-770-120"


def test_zero_layer_size_label():
    """Тест обозначения модели без слоёв"""
    assert make_trial(0, 0.5, []).size_label == "0-layers"


def test_run_trial_is_pure_function_of_seed():
    """Тест: результат испытания определяется зерном"""
    source = toy_source()
    first = run_trial(source, HYPER, seed=5)
    second = run_trial(source, HYPER, seed=5)

    assert first == second
    assert first.seed == 5
    assert 0.0 <= first.test_accuracy <= 1.0


def test_run_monte_carlo_single_trial(tmp_path):
    """Тест: для одного испытания агрегаты равны значениям испытания"""
    summary = run_monte_carlo(experiment(tmp_path, trials=1), toy_source())

    assert summary.test_accuracy.mean == summary.trials[0].test_accuracy
    assert summary.test_accuracy.std == 0.0
    assert summary.trials[0].seed == 10


def test_run_monte_carlo_parallel_matches_sequential(tmp_path):
    """Тест: результат не зависит от числа процессов"""
    sequential = run_monte_carlo(experiment(tmp_path, workers=1), toy_source())
    parallel = run_monte_carlo(experiment(tmp_path, workers=2), toy_source())

    assert sequential.trials == parallel.trials


def test_reports_are_bitwise_reproducible(tmp_path):
    """Тест: повторный запуск даёт побитно одинаковые отчёты"""
    for name in ("a", "b"):
        summary = run_monte_carlo(experiment(tmp_path / name), toy_source())
        write_reports(summary, tmp_path / name, ("json", "csv"))

    for report in ("summary.json", "trials.csv", "curves.csv"):
        assert (tmp_path / "a" / report).read_bytes() == (tmp_path / "b" / report).read_bytes()
    assert (tmp_path / "a" / "timings.json").exists()


def test_json_report_reload_reproduces_aggregates(tmp_path):
    """Тест: агрегаты после загрузки JSON совпадают побитно"""
    summary = run_monte_carlo(experiment(tmp_path), toy_source())
    emit_report(summary, "json", tmp_path / "summary.json")
    loaded = load_report(tmp_path / "summary.json")

    assert loaded.test_accuracy == summary.test_accuracy
    assert loaded.node_profile() == summary.node_profile()
    assert loaded.trials == summary.trials


def test_csv_report_rows_and_footer(tmp_path):
    """Тест CSV: строка на испытание и итоговая строка"""
    summary = RunSummary(name="x", hyper=HYPER, base_seed=0, trials=(
        make_trial(0, 0.9, [1020, 170, 770, 120]),
        make_trial(1, 0.7, []),
    ))
    emit_report(summary, "csv", tmp_path / "trials.csv")
    with open(tmp_path / "trials.csv", encoding="utf-8", newline="") as fin:
        rows = list(csv.DictReader(fin))

    assert len(rows) == 3
    assert rows[0]["size"] == "1020-170-770-120"
    assert rows[1]["size"] == "0-layers"
    assert rows[1]["layer_1"] == "0"
    assert rows[2]["trial"] == "aggregate"
    assert float(rows[2]["test_accuracy"]) == pytest.approx(0.8)
    assert float(rows[2]["test_accuracy_std"]) == pytest.approx(np.std([0.9, 0.7], ddof=1))


def test_emit_report_unknown_format(tmp_path):
    """Тест неизвестного формата отчёта"""
    summary = RunSummary(name="x", hyper=HYPER, base_seed=0, trials=(make_trial(0, 0.9, [6]),))

    with pytest.raises(DataFormatError):
        emit_report(summary, "xml", tmp_path / "r.xml")


def test_load_report_rejects_unknown_major_version(tmp_path):
    """Тест: отчёт другой старшей версии схемы отклоняется"""
    path = tmp_path / "summary.json"
    path.write_text(json.dumps({"schema_version": "2.0"}), encoding="utf-8")

    with pytest.raises(ReportVersionError):
        load_report(path)


def test_run_summary_requires_trials():
    """Тест: серия без испытаний недопустима"""
    with pytest.raises(DataFormatError):
        RunSummary(name="x", hyper=HYPER, base_seed=0, trials=())
