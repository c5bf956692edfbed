#!/usr/bin/env python3
# -*- coding: utf-8 -*-

import numpy as np
import pytest

from ssfn.data import Dataset


def blobs(
    P: int = 5,
    Q: int = 3,
    per_class: int = 40,
    spread: float = 1.0,
    seed: int = 0,
    noise_seed: int = 100,
    name: str = "blobs",
) -> Dataset:
    """Гауссовы облака вокруг случайных центров; метки 1..Q."""
    centers = 3.0 * np.random.default_rng(seed).standard_normal((P, Q))
    gen = np.random.default_rng(noise_seed)
    labels = np.repeat(np.arange(1, Q + 1), per_class)
    X = centers[:, labels - 1] + spread * gen.standard_normal((P, labels.size))
    return Dataset(X=X, labels=labels, Q=Q, name=name, class_names=tuple(f"c{q}" for q in range(1, Q + 1)))


@pytest.fixture
def small_train() -> Dataset:
    return blobs(P=6, Q=3, per_class=30, spread=1.5, seed=1, noise_seed=2, name="train")


@pytest.fixture
def small_test() -> Dataset:
    return blobs(P=6, Q=3, per_class=20, spread=1.5, seed=1, noise_seed=3, name="test")
