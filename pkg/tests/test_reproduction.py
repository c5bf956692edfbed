#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Воспроизведение результатов на полных наборах данных.

Наборы ищутся в SSFN_DATA_DIR по путям из пресетов; если файлов нет,
тесты пропускаются. Запуск: pytest -m slow
"""

import pytest

from ssfn.config import ExperimentConfig, data_dir, load_preset, worker_count
from ssfn.data import load_source
from ssfn.harness import run_monte_carlo
from ssfn.numerics import RngStream
from ssfn.trainer import train_ssfn

pytestmark = pytest.mark.slow

FILE_KEYS = ("train", "test", "full", "train_images", "train_labels", "test_images", "test_labels")


def preset_with_data(name):
    preset = load_preset(name)
    root = data_dir()
    missing = [preset.dataset[k] for k in FILE_KEYS if k in preset.dataset and not (root / preset.dataset[k]).exists()]
    if missing:
        pytest.skip(f"нет файлов набора {name}: {', '.join(missing)}")
    return preset, load_source(preset.dataset, root)


def monte_carlo(name, trials):
    preset, source = preset_with_data(name)
    cfg = ExperimentConfig(name=name, dataset=preset.dataset, hyper=preset.hyper, trials=trials,
                           workers=worker_count())
    return preset, run_monte_carlo(cfg, source)


@pytest.mark.parametrize("name", ["vowel", "satimage"])
def test_growth_is_monotone(name):
    """Ошибка не растёт вдоль всей траектории роста"""
    preset, source = preset_with_data(name)
    train, _ = source.split(0)
    _, trace = train_ssfn(train, preset.hyper, RngStream(0))
    curve = [c for _, c in trace.cost_curve()]

    assert all(new <= old * (1 + 1e-6) for old, new in zip(curve, curve[1:]))


@pytest.mark.parametrize("name", ["vowel", "satimage", "mnist"])
def test_regularized_ls_baseline(name):
    """Точность регуляризованного МНК (слой 0) в пределах 2 процентных пунктов"""
    preset, summary = monte_carlo(name, 1)

    assert 100 * summary.ls_test_accuracy.mean == pytest.approx(preset.reference["ls_accuracy"], abs=2.0)


@pytest.mark.parametrize("name, window, std_cap", [
    ("vowel", 4.0, 5.0),
    ("satimage", 2.0, 1.5),
    ("letter", 1.5, 1.0),
    ("mnist", 1.5, 0.5),
])
def test_ssfn_accuracy(name, window, std_cap):
    """Средняя точность SSFN по 10 испытаниям и её разброс"""
    preset, summary = monte_carlo(name, 10)

    assert 100 * summary.test_accuracy.mean == pytest.approx(preset.reference["accuracy"], abs=window)
    assert 100 * summary.test_accuracy.std <= std_cap


@pytest.mark.parametrize("name", ["vowel", "satimage", "letter", "mnist"])
def test_mean_layer_count(name):
    """Среднее число слоёв близко к опубликованному"""
    preset, summary = monte_carlo(name, 10)

    assert summary.layer_count.mean == pytest.approx(preset.reference["mean_layers"], abs=1.5)


def test_mnist_size():
    """MNIST: первый слой достигает 1020 узлов, слоёв 4 +- 1"""
    _, summary = monte_carlo("mnist", 10)

    for trial in summary.trials:
        assert trial.node_counts[0] == 1020
        assert 3 <= trial.layers <= 5


def test_mnist_hand_tuned():
    """MNIST с ручными параметрами: средняя точность не ниже 96.5"""
    _, summary = monte_carlo("mnist_h", 5)

    assert 100 * summary.test_accuracy.mean >= 96.5


def test_cifar10_optional():
    """CIFAR-10 (если набор загружен): точность в пределах 3 пунктов"""
    preset, summary = monte_carlo("cifar10", 3)

    assert 100 * summary.test_accuracy.mean == pytest.approx(preset.reference["accuracy"], abs=3.0)
