#!/usr/bin/env python3
# -*- coding: utf-8 -*-

from dataclasses import dataclass, field
from typing import Tuple, Union

import numpy as np
from scipy import linalg

from ssfn.exceptions import (
    DimensionMismatchError,
    InvalidParameterError,
    NonFiniteError,
    NotSPDError,
)

Matrix = np.ndarray

DISTRIBUTIONS = ("normal", "uniform")


def as_matrix(values, name: str = "matrix") -> Matrix:
    """Создать неизменяемую матрицу float64 с проверкой конечности."""
    arr = np.array(values, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionMismatchError(name, f"ожидалась двумерная матрица, получено ndim={arr.ndim}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(name)
    arr.flags.writeable = False
    return arr


def frob_norm(M: Matrix) -> float:
    """Норма Фробениуса."""
    return float(np.linalg.norm(np.asarray(M, dtype=np.float64)))


@dataclass
class RngStream:
    """Поток случайных чисел с фиксированным алгоритмом (PCG64).

    Генератор инициализируется SeedSequence(seed, spawn_key=(stream,)): одинаковое
    зерно даёт одинаковую последовательность на любой платформе.
    counter - число сгенерированных значений, т.е. позиция в потоке.
    """
    seed: int
    stream: int = 0
    counter: int = field(default=0, init=False)
    _generator: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2 ** 64:
            raise InvalidParameterError(self.seed, "зерно должно быть 64-битным беззнаковым целым")
        sequence = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream),))
        self._generator = np.random.Generator(np.random.PCG64(sequence))

    def standard_normal(self, shape: Tuple[int, ...]) -> np.ndarray:
        values = self._generator.standard_normal(shape)
        self.counter += values.size
        return values

    def uniform(self, low: float, high: float, shape: Tuple[int, ...]) -> np.ndarray:
        values = self._generator.uniform(low, high, shape)
        self.counter += values.size
        return values

    def integers(self, low: int, high: int) -> int:
        """Целое из [low, high)."""
        value = int(self._generator.integers(low, high))
        self.counter += 1
        return value

    def permutation(self, n: int) -> np.ndarray:
        """Случайная перестановка 0..n-1."""
        values = self._generator.permutation(n)
        self.counter += n
        return values


def random_matrix(rows: int, cols: int, rng: RngStream, dist: str = "normal") -> Matrix:
    """Матрица с независимыми элементами из N(0, 1) или U(-1, 1)."""
    if rows < 1 or cols < 1:
        raise InvalidParameterError((rows, cols), "размеры должны быть положительными")
    if dist == "normal":
        values = rng.standard_normal((rows, cols))
    elif dist == "uniform":
        values = rng.uniform(-1.0, 1.0, (rows, cols))
    else:
        raise InvalidParameterError(dist, f"распределение должно быть одним из {DISTRIBUTIONS}")
    values.flags.writeable = False
    return values


class SpdFactor:
    """Разложение Холецкого SPD-матрицы для многократного решения систем."""

    def __init__(self, A: Matrix):
        A = np.asarray(A, dtype=np.float64)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise DimensionMismatchError(A.shape, "матрица должна быть квадратной")
        if not np.allclose(A, A.T, rtol=1e-10, atol=1e-12 * max(1.0, float(np.abs(A).max(initial=0.0)))):
            raise NotSPDError(A.shape, "матрица несимметрична")
        try:
            self._factor = linalg.cho_factor(A, lower=True, check_finite=False)
        except linalg.LinAlgError as e:
            raise NotSPDError(A.shape, f"неположительный ведущий элемент: {e}")
        self.n = A.shape[0]

    def solve(self, B: Matrix) -> Matrix:
        """Решить A X = B."""
        B = np.asarray(B, dtype=np.float64)
        if B.shape[0] != self.n:
            raise DimensionMismatchError(B.shape, f"ожидалось {self.n} строк")
        return linalg.cho_solve(self._factor, B, check_finite=False)


def solve_spd(A: Matrix, B: Matrix) -> Matrix:
    """Решить систему A X = B с симметричной положительно определённой A."""
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if A.ndim != 2 or B.ndim not in (1, 2) or A.shape[0] != B.shape[0]:
        raise DimensionMismatchError((A.shape, B.shape))
    return SpdFactor(A).solve(B)


def seed_value(value: Union[int, str]) -> int:
    """Привести зерно из командной строки или конфигурации к целому."""
    try:
        seed = int(value)
    except (TypeError, ValueError):
        raise InvalidParameterError(value, "зерно должно быть целым числом")
    if not 0 <= seed < 2 ** 64:
        raise InvalidParameterError(value, "зерно должно быть 64-битным беззнаковым целым")
    return seed
