#!/usr/bin/env python3
# -*- coding: utf-8 -*-

from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from ssfn.exceptions import (
    DimensionMismatchError,
    InvalidStateError,
    LengthMismatchError,
)
from ssfn.lfp import ActivationKind, apply_activation
from ssfn.numerics import Matrix, as_matrix

NORM_GUARD = 1e-12


def assemble_weight(O_prev: Matrix, R: Matrix) -> Matrix:
    """Весовая матрица слоя [V_Q O_prev; R].

    Верхние 2Q строк копируются из O_prev (и -O_prev), а не вычисляются
    умножением, поэтому совпадают с V_Q O_prev побитно.
    """
    O_prev = np.asarray(O_prev, dtype=np.float64)
    R = np.asarray(R, dtype=np.float64)
    if R.size == 0:
        R = R.reshape(0, O_prev.shape[1])
    if O_prev.ndim != 2 or R.ndim != 2 or R.shape[1] != O_prev.shape[1]:
        raise DimensionMismatchError((O_prev.shape, R.shape), "R должна иметь n_prev столбцов")
    return np.vstack([O_prev, -O_prev, R])


def normalize_bottom(Z: Matrix, Q: int) -> Matrix:
    """Нормировать нижнюю часть (строки 2Q..) каждого столбца до единичной длины."""
    Z = np.array(Z, dtype=np.float64)
    bottom = Z[2 * Q:]
    if bottom.shape[0] > 0:
        norms = np.linalg.norm(bottom, axis=0)
        mask = norms > NORM_GUARD
        bottom[:, mask] /= norms[mask]
    return Z


def layer_forward(W: Matrix, Y_prev: Matrix, Q: int, kind: ActivationKind) -> Matrix:
    """Признаки слоя: g(W y) с нормировкой случайной части до активации."""
    W = np.asarray(W)
    Y_prev = np.asarray(Y_prev)
    if W.ndim != 2 or Y_prev.ndim != 2 or W.shape[1] != Y_prev.shape[0]:
        raise DimensionMismatchError((W.shape, Y_prev.shape), "W и Y_prev несогласованы")
    if W.shape[0] < 2 * Q:
        raise DimensionMismatchError(W.shape, f"в слое должно быть не меньше 2Q = {2 * Q} узлов")
    return apply_activation(normalize_bottom(W @ Y_prev, Q), kind)


def cost(T: Matrix, T_hat: Matrix) -> float:
    """Средняя квадратичная ошибка (1/J) sum_j ||t_j - t~_j||^2."""
    T = np.asarray(T, dtype=np.float64)
    T_hat = np.asarray(T_hat, dtype=np.float64)
    if T.shape != T_hat.shape:
        raise DimensionMismatchError((T.shape, T_hat.shape), "размеры T и T_hat различаются")
    diff = T - T_hat
    return float(np.sum(diff * diff)) / T.shape[1]


def predict_classes(T_hat: Matrix) -> np.ndarray:
    """Номер класса (с 1) с наибольшей компонентой; при равенстве - наименьший."""
    return np.argmax(np.asarray(T_hat), axis=0) + 1


def accuracy(predicted: Sequence[int], truth: Sequence[int]) -> float:
    """Доля совпавших меток."""
    predicted = np.asarray(predicted)
    truth = np.asarray(truth)
    if predicted.shape != truth.shape:
        raise LengthMismatchError((predicted.size, truth.size))
    if truth.size == 0:
        return 0.0
    return float(np.mean(predicted == truth))


@dataclass(frozen=True)
class TrainedLayer:
    """Обученный слой: W, O*, число узлов и достигнутая ошибка."""
    W: Matrix
    O_star: Matrix
    n_nodes: int
    cost: float

    def __post_init__(self):
        object.__setattr__(self, 'W', as_matrix(self.W, "W"))
        object.__setattr__(self, 'O_star', as_matrix(self.O_star, "O_star"))
        Q = self.O_star.shape[0]
        if self.W.shape[0] != self.n_nodes or self.O_star.shape[1] != self.n_nodes:
            raise DimensionMismatchError((self.W.shape, self.O_star.shape, self.n_nodes))
        if self.n_nodes < 2 * Q:
            raise InvalidStateError(self.n_nodes, f"в слое должно быть не меньше 2Q = {2 * Q} узлов")


@dataclass(frozen=True)
class SsfnModel:
    """Обученная сеть SSFN: O_0* и упорядоченные слои."""
    P: int
    Q: int
    O0_star: Matrix
    layers: Tuple[TrainedLayer, ...] = field(default_factory=tuple)
    activation: ActivationKind = field(default_factory=ActivationKind.relu)
    class_names: Tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'O0_star', as_matrix(self.O0_star, "O0_star"))
        object.__setattr__(self, 'layers', tuple(self.layers))
        object.__setattr__(self, 'class_names', tuple(self.class_names))
        if self.class_names and len(self.class_names) != self.Q:
            raise DimensionMismatchError(len(self.class_names), f"ожидалось {self.Q} имён классов")
        if self.O0_star.shape != (self.Q, self.P):
            raise DimensionMismatchError(self.O0_star.shape, f"ожидалась матрица {self.Q}x{self.P}")
        O_prev = self.O0_star
        for idx, layer in enumerate(self.layers, 1):
            if layer.W.shape[1] != O_prev.shape[1] or layer.O_star.shape[0] != self.Q:
                raise DimensionMismatchError(layer.W.shape, f"слой {idx} не согласован с предыдущим")
            top = layer.W[:2 * self.Q]
            if not (np.array_equal(top[:self.Q], O_prev) and np.array_equal(top[self.Q:], -O_prev)):
                raise InvalidStateError(idx, "верхние 2Q строк W не равны V_Q O_prev")
            O_prev = layer.O_star

    @property
    def output_matrix(self) -> Matrix:
        return self.layers[-1].O_star if self.layers else self.O0_star

    @property
    def sizes(self) -> List[int]:
        return [layer.n_nodes for layer in self.layers]

    @property
    def size_label(self) -> str:
        """Запись размера как 1020-170-770-120."""
        if not self.layers:
            return "0-layers"
        return "-".join(str(n) for n in self.sizes)

    @property
    def random_nodes(self) -> int:
        """Число узлов со случайными весами: sum(n_l - 2Q)."""
        return sum(n - 2 * self.Q for n in self.sizes)

    def forward(self, X: Matrix) -> Matrix:
        return model_forward(self, X)

    def predict(self, X: Matrix) -> np.ndarray:
        return predict_classes(model_forward(self, X))


def model_forward(model: SsfnModel, X: Matrix) -> Matrix:
    """Выход сети T~ = O_L* Y_L."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] != model.P:
        raise DimensionMismatchError(X.shape, f"ожидалось {model.P} строк")
    Y = X
    for layer in model.layers:
        Y = layer_forward(layer.W, Y, model.Q, model.activation)
    return model.output_matrix @ Y


def evaluate(model: SsfnModel, X: Matrix, labels: Sequence[int]) -> float:
    """Точность модели на наборе (X, labels)."""
    return accuracy(model.predict(X), labels)
