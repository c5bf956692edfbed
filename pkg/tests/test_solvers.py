#!/usr/bin/env python3
# -*- coding: utf-8 -*-

import math

import numpy as np
import pytest

from ssfn.exceptions import DimensionMismatchError, InvalidParameterError, SingularSystemError
from ssfn.numerics import RngStream, frob_norm
from ssfn.solvers import (
    AdmmConfig,
    RegularizedGram,
    admm_bench,
    admm_constrained_ls,
    cross_validate_lambda,
    lagrangian_reference,
    ls_objective,
    project_frob_ball,
    ridge_grid_search,
    ridge_solve,
    tikhonov_constrained_search,
)


def problem(Q=3, n=8, J=40, seed=0):
    gen = np.random.default_rng(seed)
    Y = gen.standard_normal((n, J))
    T = gen.standard_normal((Q, n)) @ Y + 0.1 * gen.standard_normal((Q, J))
    return Y, T


def test_ridge_identity_example():
    """Тест: Y = I, T = I, lambda = 1/J дают O = I/2"""
    O = ridge_solve(np.eye(2), np.eye(2), 0.5)

    assert np.allclose(O, 0.5 * np.eye(2))


def test_ridge_zero_lambda_exact_fit():
    """Тест: при lambda = 0 и полном ранге T = O Y восстанавливается точно"""
    Y, _ = problem()
    O_true = np.random.default_rng(5).standard_normal((3, 8))

    assert np.allclose(ridge_solve(Y, O_true @ Y, 0.0), O_true, atol=1e-9)


def test_ridge_singular_without_regularization():
    """Тест: вырожденная Y Y^T при lambda = 0"""
    Y = np.ones((3, 10))

    with pytest.raises(SingularSystemError) as exc_info:
        ridge_solve(Y, np.ones((2, 10)), 0.0)

    assert "вырождена" in str(exc_info.value)


def test_ridge_negative_lambda():
    """Тест отрицательной lambda"""
    with pytest.raises(InvalidParameterError):
        ridge_solve(np.eye(2), np.eye(2), -1.0)


def test_ridge_dimension_mismatch():
    """Тест несогласованного числа примеров"""
    with pytest.raises(DimensionMismatchError):
        ridge_solve(np.ones((2, 5)), np.ones((2, 4)), 1.0)


def test_ridge_woodbury_matches_direct():
    """Тест: при n > J двойственная форма совпадает с прямой"""
    Y, T = problem(n=60, J=20)
    c = 20 * 1e-2
    direct = RegularizedGram(Y, c, "direct").ridge_apply(T)
    woodbury = RegularizedGram(Y, c, "woodbury").ridge_apply(T)

    assert np.allclose(direct, woodbury, atol=1e-8)


def test_ridge_solution_is_stationary():
    """Тест: градиент цели гребневой регрессии в решении равен нулю, малые сдвиги не улучшают цель"""
    Y, T = problem()
    lam = 0.3
    J = Y.shape[1]
    O = ridge_solve(Y, T, lam)

    def objective(M):
        return ls_objective(Y, T, M) / J + lam * frob_norm(M) ** 2

    gradient = -2.0 / J * (T - O @ Y) @ Y.T + 2.0 * lam * O
    assert np.linalg.norm(gradient) <= 1e-8 * max(1.0, np.linalg.norm(T @ Y.T) / J)
    gen = np.random.default_rng(1)
    for _ in range(5):
        D = 1e-4 * gen.standard_normal(O.shape)
        assert objective(O + D) >= objective(O)
        assert objective(O - D) >= objective(O)


def test_ridge_grid_search_noiseless_picks_smallest_lambda():
    """Тест: без шума лучшей оказывается наименьшая lambda сетки"""
    gen = np.random.default_rng(4)
    O_true = gen.standard_normal((3, 5))
    Y_train = gen.standard_normal((5, 60))
    Y_val = gen.standard_normal((5, 30))
    lam, O = ridge_grid_search(Y_train, O_true @ Y_train, Y_val, O_true @ Y_val, grid=[10.0, 1e-1, 1e-6, 1e-3, 1.0])

    assert lam == 1e-6
    assert np.allclose(O, O_true, atol=1e-4)


def test_ridge_grid_search_prefers_larger_lambda_on_tie():
    """Тест: при равной ошибке выбирается большая lambda"""
    Y, T = problem()
    zeros = np.zeros_like(Y)
    lam, _ = ridge_grid_search(Y, T, zeros, T, grid=[1e-3, 1e-1, 10.0])

    assert lam == 10.0


def test_cross_validate_lambda_returns_grid_value():
    """Тест кросс-валидации lambda_0"""
    Y, T = problem(J=100)
    lam, O = cross_validate_lambda(Y, T, RngStream(0), grid=[1e-6, 1e-2, 1e2])

    assert lam in (1e-6, 1e-2, 1e2)
    assert O.shape == (3, 8)


def test_project_frob_ball():
    """Тест проекции на шар"""
    M = np.array([[3.0, 4.0]])

    assert np.allclose(project_frob_ball(M, 1.0), [[0.6, 0.8]])
    assert np.array_equal(project_frob_ball(M, 10.0), M)


def test_project_frob_ball_idempotent_and_nonexpansive():
    """Тест: повторная проекция ничего не меняет, расстояния не растут"""
    gen = np.random.default_rng(5)
    radius = 2.0
    matrices = [gen.standard_normal((3, 4)) * scale for scale in (0.1, 1.0, 5.0)] + [np.zeros((3, 4))]

    for A in matrices:
        PA = project_frob_ball(A, radius)
        assert frob_norm(PA) <= radius + 1e-12
        assert np.allclose(project_frob_ball(PA, radius), PA, rtol=1e-12, atol=0.0)
        for B in matrices:
            PB = project_frob_ball(B, radius)
            assert frob_norm(PA - PB) <= frob_norm(A - B) + 1e-12
    assert np.array_equal(project_frob_ball(np.zeros((3, 4)), radius), np.zeros((3, 4)))


def test_project_frob_ball_bad_radius():
    """Тест неположительного радиуса"""
    with pytest.raises(InvalidParameterError) as exc_info:
        project_frob_ball(np.ones((1, 1)), 0.0)

    assert "радиус" in str(exc_info.value)


def test_admm_config_from_alpha():
    """Тест радиуса eps_alpha = sqrt(2 alpha Q)"""
    cfg = AdmmConfig.from_alpha(mu=1e3, k_max=100, alpha=2.0, Q=10)

    assert cfg.epsilon_alpha == pytest.approx(math.sqrt(40.0))


def test_admm_config_validation():
    """Тест проверки параметров ADMM"""
    with pytest.raises(InvalidParameterError):
        AdmmConfig(mu=0.0, k_max=10, epsilon_alpha=1.0)
    with pytest.raises(InvalidParameterError):
        AdmmConfig(mu=1.0, k_max=0, epsilon_alpha=1.0)


def test_admm_inactive_constraint_scalar():
    """Тест: Y = [1], T = [2], радиус 10 - ограничение неактивно, O = 2"""
    result = admm_constrained_ls(np.array([[1.0]]), np.array([[2.0]]), AdmmConfig(mu=1.0, k_max=500, epsilon_alpha=10.0))

    assert result.O[0, 0] == pytest.approx(2.0, abs=1e-5)


def test_admm_active_constraint_scalar():
    """Тест: Y = [1], T = [2], радиус 1 - решение на границе, O = 1"""
    result = admm_constrained_ls(np.array([[1.0]]), np.array([[2.0]]), AdmmConfig(mu=1.0, k_max=500, epsilon_alpha=1.0))

    assert result.O[0, 0] == pytest.approx(1.0, abs=1e-6)
    assert result.constraint_norm <= 1.0 + 1e-12


def test_admm_single_iteration():
    """Тест: k_max = 1 выполняет ровно одну итерацию"""
    Y, T = problem()
    result = admm_constrained_ls(Y, T, AdmmConfig(mu=1.0, k_max=1, epsilon_alpha=1.0))

    assert result.iterations_run == 1
    assert result.constraint_norm <= 1.0 + 1e-12


def test_admm_matches_lagrangian_reference():
    """Тест: ADMM сходится к решению формы Лагранжа"""
    Y, T = problem()
    radius = 0.5 * frob_norm(T @ np.linalg.pinv(Y))
    mu = Y.shape[0] / float(np.trace(Y @ Y.T))
    result = admm_constrained_ls(Y, T, AdmmConfig(mu=mu, k_max=2000, epsilon_alpha=radius))
    reference = lagrangian_reference(Y, T, radius)

    assert frob_norm(reference) == pytest.approx(radius, rel=1e-9)
    assert result.final_objective == pytest.approx(ls_objective(Y, T, reference), rel=1e-4)
    assert result.constraint_norm <= radius + 1e-9


def test_admm_branches_agree():
    """Тест: ветви direct и woodbury дают одинаковые итерации"""
    Y, T = problem(n=50, J=15)
    cfg = AdmmConfig(mu=1e-1, k_max=50, epsilon_alpha=2.0, tol=0.0)
    direct = admm_constrained_ls(Y, T, cfg, branch="direct").O
    woodbury = admm_constrained_ls(Y, T, cfg, branch="woodbury").O

    assert np.abs(direct - woodbury).max() <= 1e-8


def test_admm_unknown_branch():
    """Тест неизвестной ветви"""
    Y, T = problem()
    with pytest.raises(InvalidParameterError):
        admm_constrained_ls(Y, T, AdmmConfig(mu=1.0, k_max=1, epsilon_alpha=1.0), branch="qr")


def test_lagrangian_reference_inside_ball():
    """Тест: МНК-решение внутри шара возвращается без изменений"""
    Y, T = problem()
    O_ls = T @ np.linalg.pinv(Y)

    assert np.allclose(lagrangian_reference(Y, T, 10 * frob_norm(O_ls)), O_ls)


def test_tikhonov_search_feasible():
    """Тест: поиск Тихонова возвращает допустимое решение"""
    Y, T = problem()
    radius = 0.3 * frob_norm(T @ np.linalg.pinv(Y))
    lam, O = tikhonov_constrained_search(Y, T, radius)

    assert frob_norm(O) <= radius
    assert lam > 0


def test_admm_bench_small_suite():
    """Тест сравнения ADMM с эталоном на случайных задачах"""
    report = admm_bench(10, RngStream(0))

    assert report.problems == 10
    assert report.passed()
