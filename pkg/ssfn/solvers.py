#!/usr/bin/env python3
# -*- coding: utf-8 -*-

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize

from ssfn.exceptions import (
    DimensionMismatchError,
    InvalidParameterError,
    NotSPDError,
    SingularSystemError,
)
from ssfn.models import cost
from ssfn.numerics import Matrix, RngStream, SpdFactor, frob_norm

logger = logging.getLogger(__name__)

DEFAULT_LAMBDA_GRID: Tuple[float, ...] = tuple(10.0 ** k for k in range(-8, 9))
ADMM_TOLERANCE = 1e-6
BRANCHES = ("auto", "direct", "woodbury")


def _check_pair(Y: Matrix, T: Matrix) -> Tuple[Matrix, Matrix]:
    Y = np.asarray(Y, dtype=np.float64)
    T = np.asarray(T, dtype=np.float64)
    if Y.ndim != 2 or T.ndim != 2 or Y.shape[1] != T.shape[1]:
        raise DimensionMismatchError((Y.shape, T.shape), "Y и T должны иметь одинаковое число столбцов")
    if Y.shape[1] < 1:
        raise DimensionMismatchError(Y.shape, "нет ни одного примера")
    return Y, T


class RegularizedGram:
    """Правое умножение на (Y Y^T + c I)^{-1} с однократной факторизацией.

    Ветвь woodbury раскладывает J x J матрицу c I + Y^T Y вместо n x n,
    что выгодно при n > J.
    """

    def __init__(self, Y: Matrix, c: float, branch: str = "auto"):
        if branch not in BRANCHES:
            raise InvalidParameterError(branch, f"ветвь должна быть одной из {BRANCHES}")
        n, J = Y.shape
        if branch == "auto":
            branch = "woodbury" if n > J and c > 0 else "direct"
        if branch == "woodbury" and c <= 0:
            raise InvalidParameterError(c, "тождество Вудбери требует c > 0")
        self.branch = branch
        self.Y = Y
        self.c = c
        if branch == "direct":
            self._factor = SpdFactor(Y @ Y.T + c * np.eye(n))
        else:
            self._factor = SpdFactor(Y.T @ Y + c * np.eye(J))

    def right_apply(self, B: Matrix) -> Matrix:
        """Вычислить B (Y Y^T + c I)^{-1}."""
        if self.branch == "direct":
            return self._factor.solve(B.T).T
        BY = B @ self.Y
        return (B - self._factor.solve(BY.T).T @ self.Y.T) / self.c

    def ridge_apply(self, T: Matrix) -> Matrix:
        """Вычислить T Y^T (Y Y^T + c I)^{-1}; для woodbury в двойственной форме T (Y^T Y + c I)^{-1} Y^T."""
        if self.branch == "direct":
            return self.right_apply(T @ self.Y.T)
        return self._factor.solve(T.T).T @ self.Y.T


def ls_objective(Y: Matrix, T: Matrix, O: Matrix) -> float:
    """||T - O Y||_F^2."""
    residual = np.asarray(T) - np.asarray(O) @ np.asarray(Y)
    return float(np.sum(residual * residual))


def ridge_solve(Y: Matrix, T: Matrix, lam: float) -> Matrix:
    """Минимизатор (1/J) sum ||t - O y||^2 + lam ||O||_F^2.

    O = T Y^T (Y Y^T + J lam I)^{-1}.
    """
    Y, T = _check_pair(Y, T)
    if lam < 0 or not math.isfinite(lam):
        raise InvalidParameterError(lam, "lambda должна быть неотрицательной")
    n, J = Y.shape
    if lam == 0 and np.linalg.matrix_rank(Y) < n:
        raise SingularSystemError(Y.shape, "Y Y^T вырождена при lambda = 0")
    try:
        gram = RegularizedGram(Y, J * lam)
    except NotSPDError as e:
        raise SingularSystemError(Y.shape, f"Y Y^T + J lambda I не обратима: {e}")
    return gram.ridge_apply(T)


def ridge_grid_search(
    Y_train: Matrix,
    T_train: Matrix,
    Y_val: Matrix,
    T_val: Matrix,
    grid: Sequence[float] = DEFAULT_LAMBDA_GRID,
) -> Tuple[float, Matrix]:
    """Выбрать lambda из сетки по ошибке на валидации (ничья -> большая lambda)."""
    if not grid:
        raise InvalidParameterError(grid, "сетка lambda пуста")
    best: Optional[Tuple[float, float, Matrix]] = None
    for lam in sorted(float(v) for v in grid):
        O = ridge_solve(Y_train, T_train, lam)
        val_cost = cost(T_val, O @ np.asarray(Y_val))
        logger.debug(f"lambda={lam:g}: ошибка на валидации {val_cost:.6g}")
        if best is None or val_cost <= best[1]:
            best = (lam, val_cost, O)
    return best[0], best[2]


def cross_validate_lambda(
    Y: Matrix,
    T: Matrix,
    rng: RngStream,
    grid: Sequence[float] = DEFAULT_LAMBDA_GRID,
    train_share: float = 0.8,
) -> Tuple[float, Matrix]:
    """Подбор lambda_0 на разбиении 80/20 и решение на всей выборке."""
    Y, T = _check_pair(Y, T)
    J = Y.shape[1]
    order = rng.permutation(J)
    cut = int(math.floor(train_share * J))
    if cut < 1 or cut >= J:
        raise InvalidParameterError(J, "слишком мало примеров для кросс-валидации")
    fit, val = order[:cut], order[cut:]
    lam, _ = ridge_grid_search(Y[:, fit], T[:, fit], Y[:, val], T[:, val], grid)
    logger.info(f"Кросс-валидация выбрала lambda_0 = {lam:g}")
    return lam, ridge_solve(Y, T, lam)


def project_frob_ball(M: Matrix, radius: float) -> Matrix:
    """Проекция на шар ||M||_F <= radius."""
    if not radius > 0:
        raise InvalidParameterError(radius, "радиус должен быть положительным")
    M = np.asarray(M, dtype=np.float64)
    norm = frob_norm(M)
    if norm > radius:
        return M * (radius / norm)
    return M


@dataclass(frozen=True)
class AdmmConfig:
    """Параметры ADMM: mu, k_max и радиус eps_alpha = sqrt(2 alpha Q)."""
    mu: float
    k_max: int
    epsilon_alpha: float
    tol: float = ADMM_TOLERANCE

    def __post_init__(self):
        if not self.mu > 0:
            raise InvalidParameterError(self.mu, "mu должно быть положительным")
        if self.k_max < 1:
            raise InvalidParameterError(self.k_max, "k_max должно быть не меньше 1")
        if not self.epsilon_alpha > 0:
            raise InvalidParameterError(self.epsilon_alpha, "радиус должен быть положительным")
        if self.tol < 0:
            raise InvalidParameterError(self.tol, "допуск не может быть отрицательным")

    @classmethod
    def from_alpha(cls, mu: float, k_max: int, alpha: float, Q: int, tol: float = ADMM_TOLERANCE) -> "AdmmConfig":
        return cls(mu=mu, k_max=k_max, epsilon_alpha=math.sqrt(2.0 * alpha * Q), tol=tol)


@dataclass(frozen=True)
class AdmmResult:
    O: Matrix
    iterations_run: int
    final_objective: float
    constraint_norm: float


def admm_constrained_ls(Y: Matrix, T: Matrix, cfg: AdmmConfig, branch: str = "auto") -> AdmmResult:
    """min ||T - O Y||_F^2 при ||O||_F <= eps_alpha методом ADMM.

    Возвращается спроецированная переменная, поэтому ограничение
    выполнено точно.
    """
    Y, T = _check_pair(Y, T)
    c = 1.0 / cfg.mu
    try:
        gram = RegularizedGram(Y, c, branch)
    except NotSPDError as e:
        raise NotSPDError(Y.shape, f"внутренняя ошибка ADMM: {e}")
    TYt = T @ Y.T
    Q_var = np.zeros((T.shape[0], Y.shape[0]))
    Lam = np.zeros_like(Q_var)
    k = 0
    for k in range(1, cfg.k_max + 1):
        O = gram.right_apply(TYt + c * (Q_var + Lam))
        Q_next = project_frob_ball(O - Lam, cfg.epsilon_alpha)
        Lam = Lam + Q_next - O
        primal = frob_norm(Q_next - O) / max(1.0, frob_norm(O))
        dual = frob_norm(Q_next - Q_var) / max(1.0, frob_norm(Q_next))
        Q_var = Q_next
        if primal <= cfg.tol and dual <= cfg.tol:
            break
    return AdmmResult(
        O=Q_var,
        iterations_run=k,
        final_objective=ls_objective(Y, T, Q_var),
        constraint_norm=frob_norm(Q_var),
    )


def lagrangian_reference(Y: Matrix, T: Matrix, radius: float) -> Matrix:
    """Точное решение задачи с ограничением через форму Лагранжа.

    Если МНК-решение минимальной нормы лежит в шаре, оно оптимально;
    иначе ищется lambda, при которой гребневое решение лежит на сфере.
    """
    Y, T = _check_pair(Y, T)
    O_ls = T @ np.linalg.pinv(Y)
    if frob_norm(O_ls) <= radius:
        return O_ls
    J = Y.shape[1]

    def excess(log_lam: float) -> float:
        return frob_norm(ridge_solve(Y, T, math.exp(log_lam) / J)) - radius

    hi = math.log(2.0 * frob_norm(T @ Y.T) / radius + 1e-300)
    lo = hi - 10.0
    for _ in range(60):
        if excess(lo) > 0:
            break
        lo -= 5.0
    log_lam = optimize.brentq(excess, lo, hi, xtol=1e-14, rtol=1e-14, maxiter=500)
    return ridge_solve(Y, T, math.exp(log_lam) / J)


def tikhonov_constrained_search(
    Y: Matrix,
    T: Matrix,
    radius: float,
    grid: Optional[Sequence[float]] = None,
) -> Tuple[float, Matrix]:
    """Перебор lambda по возрастанию до первого решения внутри шара.

    Альтернатива ADMM: форма Тихонова решается для сетки lambda;
    возвращается первое (наименьшая ошибка) допустимое решение.
    """
    grid = np.logspace(-8, 8, 65) if grid is None else sorted(float(v) for v in grid)
    O = None
    lam = float("nan")
    for lam in grid:
        O = ridge_solve(Y, T, float(lam))
        if frob_norm(O) <= radius:
            return float(lam), O
    if O is None:
        raise InvalidParameterError(grid, "сетка lambda пуста")
    return float(lam), project_frob_ball(O, radius)


@dataclass
class BenchReport:
    """Сводка проверки ADMM на случайных задачах."""
    problems: int = 0
    max_objective_gap: float = 0.0
    max_constraint_excess: float = 0.0
    max_branch_difference: float = 0.0
    max_tikhonov_gap: float = 0.0
    active_constraints: int = 0
    iterations: List[int] = field(default_factory=list)

    def passed(self) -> bool:
        return (
            self.max_objective_gap <= 1e-4
            and self.max_constraint_excess <= 1e-9
            and self.max_branch_difference <= 1e-8
        )


def _relative_gap(value: float, reference: float) -> float:
    return abs(value - reference) / max(1.0, abs(reference))


def admm_bench(problems: int, rng: RngStream, k_max: int = 2000, branch_iterations: int = 200) -> BenchReport:
    """Сравнить ADMM с лагранжевым эталоном на случайных задачах (Q <= 5, n <= 50, J <= 200)."""
    report = BenchReport()
    for _ in range(problems):
        Q = int(rng.integers(2, 6))
        n = int(rng.integers(1, 51))
        J = int(rng.integers(2, 201))
        Y = rng.standard_normal((n, J))
        T = rng.standard_normal((Q, n)) @ Y + 0.1 * rng.standard_normal((Q, J))
        scale = frob_norm(T @ np.linalg.pinv(Y))
        radius = max(1e-3, scale * float(rng.uniform(0.3, 1.5, (1,))[0]))
        mu = n / float(np.trace(Y @ Y.T))

        result = admm_constrained_ls(Y, T, AdmmConfig(mu=mu, k_max=k_max, epsilon_alpha=radius))
        reference = lagrangian_reference(Y, T, radius)
        ref_objective = ls_objective(Y, T, reference)
        report.max_objective_gap = max(
            report.max_objective_gap, _relative_gap(result.final_objective, ref_objective)
        )
        report.max_constraint_excess = max(report.max_constraint_excess, result.constraint_norm - radius)
        if frob_norm(reference) >= radius * (1 - 1e-9):
            report.active_constraints += 1
        report.iterations.append(result.iterations_run)

        fixed = AdmmConfig(mu=mu, k_max=branch_iterations, epsilon_alpha=radius, tol=0.0)
        direct = admm_constrained_ls(Y, T, fixed, branch="direct").O
        woodbury = admm_constrained_ls(Y, T, fixed, branch="woodbury").O
        report.max_branch_difference = max(report.max_branch_difference, float(np.abs(direct - woodbury).max()))

        _, O_tik = tikhonov_constrained_search(Y, T, radius)
        report.max_tikhonov_gap = max(
            report.max_tikhonov_gap, _relative_gap(ls_objective(Y, T, O_tik), ref_objective)
        )
        report.problems += 1
    return report
