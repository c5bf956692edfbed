#!/usr/bin/env python3
# -*- coding: utf-8 -*-

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from ssfn.config import Hyperparameters
from ssfn.data import Dataset
from ssfn.exceptions import InvalidParameterError, InvalidStateError
from ssfn.lfp import apply_activation, u_matrix
from ssfn.models import (
    SsfnModel,
    TrainedLayer,
    accuracy,
    assemble_weight,
    cost,
    layer_forward,
    normalize_bottom,
    predict_classes,
)
from ssfn.numerics import Matrix, RngStream, random_matrix
from ssfn.solvers import AdmmConfig, admm_constrained_ls, cross_validate_lambda, ridge_solve

logger = logging.getLogger(__name__)


@dataclass
class LayerTrace:
    """История роста одного слоя: принятые шаги и их ошибки."""
    node_counts: List[int] = field(default_factory=list)
    costs: List[float] = field(default_factory=list)
    admm_iterations: List[int] = field(default_factory=list)
    rejected_steps: int = 0
    fallback: bool = False
    seconds: float = 0.0

    def to_dict(self, include_timings: bool = True) -> Dict[str, Any]:
        data = {
            "node_counts": list(self.node_counts),
            "costs": list(self.costs),
            "admm_iterations": list(self.admm_iterations),
            "rejected_steps": self.rejected_steps,
            "fallback": self.fallback,
        }
        if include_timings:
            data["seconds"] = self.seconds
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "LayerTrace":
        return cls(
            node_counts=[int(n) for n in data["node_counts"]],
            costs=[float(c) for c in data["costs"]],
            admm_iterations=[int(k) for k in data.get("admm_iterations", [])],
            rejected_steps=int(data.get("rejected_steps", 0)),
            fallback=bool(data.get("fallback", False)),
            seconds=float(data.get("seconds", 0.0)),
        )


@dataclass
class TrainingTrace:
    """Полная история обучения: ошибки по шагам и слоям, lambda_0, время, точность."""
    seed: int
    Q: int
    lambda0: float
    layer0_cost: float
    layers: List[LayerTrace] = field(default_factory=list)
    layer_costs: List[float] = field(default_factory=list)
    accuracy_curve: List[Dict[str, Any]] = field(default_factory=list)
    timings: Dict[str, float] = field(default_factory=dict)

    def cost_curve(self) -> List[Tuple[int, float]]:
        """Пары (накопленное число случайных узлов, ошибка) для каждого принятого шага."""
        points = [(0, self.layer0_cost)]
        base = 0
        for layer in self.layers:
            for n, c in zip(layer.node_counts, layer.costs):
                points.append((base + n - 2 * self.Q, c))
            if layer.node_counts:
                base += layer.node_counts[-1] - 2 * self.Q
        return points

    def to_dict(self, include_timings: bool = True) -> Dict[str, Any]:
        data = {
            "seed": self.seed,
            "Q": self.Q,
            "lambda0": self.lambda0,
            "layer0_cost": self.layer0_cost,
            "layers": [layer.to_dict(include_timings) for layer in self.layers],
            "layer_costs": list(self.layer_costs),
            "accuracy_curve": [dict(point) for point in self.accuracy_curve],
        }
        if include_timings:
            data["timings"] = dict(self.timings)
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TrainingTrace":
        return cls(
            seed=int(data["seed"]),
            Q=int(data["Q"]),
            lambda0=float(data["lambda0"]),
            layer0_cost=float(data["layer0_cost"]),
            layers=[LayerTrace.from_dict(layer) for layer in data.get("layers", [])],
            layer_costs=[float(c) for c in data.get("layer_costs", [])],
            accuracy_curve=[dict(point) for point in data.get("accuracy_curve", [])],
            timings={k: float(v) for k, v in data.get("timings", {}).items()},
        )


def _relative_improvement(old: float, new: float) -> float:
    # При нулевой ошибке улучшать нечего.
    if old <= 0:
        return 0.0
    return (old - new) / old


def _grow_layer(
    Y_prev: Matrix,
    T: Matrix,
    O_prev: Matrix,
    prev_cost: float,
    hyper: Hyperparameters,
    rng: RngStream,
) -> Tuple[TrainedLayer, LayerTrace, Matrix]:
    """Вырастить один слой; вернуть слой, его историю и признаки принятого размера."""
    if not math.isfinite(prev_cost):
        raise InvalidStateError(prev_cost, "ошибка предыдущего слоя не конечна")
    Q = T.shape[0]
    n_prev = Y_prev.shape[0]
    kind = hyper.activation
    cfg = AdmmConfig.from_alpha(hyper.mu, hyper.k_max, hyper.alpha, Q)
    cap = 2 * Q + hyper.n_max_minus_2Q
    started = time.perf_counter()

    lfp_top = O_prev @ Y_prev
    blocks: List[Matrix] = []
    raw_bottom: List[Matrix] = []
    trace = LayerTrace()
    accepted: Optional[Tuple[int, int, Matrix, float, Matrix]] = None
    old_cost = prev_cost
    n = 2 * Q

    while True:
        step = min(hyper.delta, cap - n)
        R_new = random_matrix(step, n_prev, rng, hyper.dist)
        n += step
        blocks.append(R_new)
        raw_bottom.append(R_new @ Y_prev)
        Y = apply_activation(normalize_bottom(np.vstack([lfp_top, -lfp_top] + raw_bottom), Q), kind)

        result = admm_constrained_ls(Y, T, cfg)
        O = result.O
        c = cost(T, O @ Y)
        if accepted is None and c > prev_cost:
            # Допустимая точка [U_Q, 0] сохраняет ошибку предыдущего слоя.
            O = np.hstack([u_matrix(Q, kind), np.zeros((Q, n - 2 * Q))])
            c = cost(T, O @ Y)
            trace.fallback = True
            logger.debug(f"ADMM хуже допустимой точки (n={n}); используется [U_Q, 0]")
        elif accepted is not None and c > old_cost:
            trace.rejected_steps += 1
            logger.debug(f"Шаг n={n} отклонён: ошибка выросла {old_cost:.6g} -> {c:.6g}")
            break

        accepted = (n, len(blocks), O, c, Y)
        trace.node_counts.append(n)
        trace.costs.append(c)
        trace.admm_iterations.append(result.iterations_run)
        logger.debug(f"n={n}: ошибка {c:.6g}, итераций ADMM {result.iterations_run}")

        improvement = _relative_improvement(old_cost, c)
        old_cost = c
        if improvement < hyper.eta_node or n >= cap:
            break

    n, used, O, c, Y = accepted
    W = assemble_weight(O_prev, np.vstack(blocks[:used]))
    trace.seconds = time.perf_counter() - started
    return TrainedLayer(W=W, O_star=O, n_nodes=n, cost=c), trace, Y


def train_layer(
    Y_prev: Matrix,
    T: Matrix,
    O_prev: Matrix,
    prev_cost: float,
    hyper: Hyperparameters,
    rng: RngStream,
) -> TrainedLayer:
    """Вырастить один слой SSFN поверх признаков Y_prev."""
    layer, _, _ = _grow_layer(
        np.asarray(Y_prev, dtype=np.float64),
        np.asarray(T, dtype=np.float64),
        np.asarray(O_prev, dtype=np.float64),
        prev_cost,
        hyper,
        rng,
    )
    return layer


def _accuracy_point(layer: int, random_nodes: int, train_acc: float, test_acc: Optional[float]) -> Dict[str, Any]:
    point = {"layer": layer, "random_nodes": random_nodes, "train_accuracy": train_acc}
    if test_acc is not None:
        point["test_accuracy"] = test_acc
    return point


def train_ssfn(
    train: Dataset,
    hyper: Hyperparameters,
    rng: RngStream,
    monitor: Optional[Dataset] = None,
) -> Tuple[SsfnModel, TrainingTrace]:
    """Построить SSFN на обучающем наборе.

    Каждый новый слой начинается с 2Q узлов и весов V_Q O*_{l-1}; по LFP такая
    конфигурация воспроизводит ошибку предыдущего слоя, затем слой растёт
    блоками по delta случайных узлов.

    monitor - необязательный отложенный набор; по нему после каждого слоя
    записывается точность (кривая точности от размера сети).
    """
    if train.J < 1:
        raise InvalidParameterError(train.name, "обучающий набор пуст")
    if train.Q < 2:
        raise InvalidParameterError(train.Q, "требуется не меньше двух классов")
    if monitor is not None and monitor.P != train.P:
        raise InvalidParameterError(monitor.name, "размерность контрольного набора не совпадает")
    X, T, Q = train.X, train.T, train.Q
    started = time.perf_counter()

    if hyper.cross_validate:
        lam, O0 = cross_validate_lambda(X, T, rng)
    else:
        lam = float(hyper.lambda0)
        O0 = ridge_solve(X, T, lam)
    layer0_cost = cost(T, O0 @ X)
    trace = TrainingTrace(seed=hyper.seed, Q=Q, lambda0=lam, layer0_cost=layer0_cost)
    trace.timings["layer0"] = time.perf_counter() - started
    logger.info(f"Слой 0 ({train.name}): lambda_0={lam:g}, ошибка {layer0_cost:.6g}")

    Y_mon = monitor.X if monitor is not None else None
    trace.accuracy_curve.append(_accuracy_point(
        0, 0,
        accuracy(predict_classes(O0 @ X), train.labels),
        accuracy(predict_classes(O0 @ Y_mon), monitor.labels) if monitor is not None else None,
    ))

    layers: List[TrainedLayer] = []
    Y, O_prev, prev_cost = X, O0, layer0_cost
    random_nodes = 0
    growth_started = time.perf_counter()
    for index in range(1, hyper.L_max + 1):
        layer, layer_trace, Y = _grow_layer(Y, T, O_prev, prev_cost, hyper, rng)
        layers.append(layer)
        trace.layers.append(layer_trace)
        trace.layer_costs.append(layer.cost)
        random_nodes += layer.n_nodes - 2 * Q

        test_acc = None
        if Y_mon is not None:
            Y_mon = layer_forward(layer.W, Y_mon, Q, hyper.activation)
            test_acc = accuracy(predict_classes(layer.O_star @ Y_mon), monitor.labels)
        train_acc = accuracy(predict_classes(layer.O_star @ Y), train.labels)
        trace.accuracy_curve.append(_accuracy_point(index, random_nodes, train_acc, test_acc))
        logger.info(f"Слой {index}: {layer.n_nodes} узлов, ошибка {layer.cost:.6g}, точность {train_acc:.4f}")

        improvement = _relative_improvement(prev_cost, layer.cost)
        O_prev, prev_cost = layer.O_star, layer.cost
        if improvement < hyper.eta_layer:
            break

    trace.timings["growth"] = time.perf_counter() - growth_started
    trace.timings["total"] = time.perf_counter() - started
    model = SsfnModel(
        P=train.P, Q=Q, O0_star=O0, layers=tuple(layers), activation=hyper.activation,
        class_names=train.class_names,
    )
    return model, trace
