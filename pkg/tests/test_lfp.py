#!/usr/bin/env python3
# -*- coding: utf-8 -*-

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ssfn.exceptions import DimensionMismatchError, InvalidParameterError
from ssfn.lfp import (
    ActivationKind,
    apply_activation,
    build_lfp_pair,
    default_kinds,
    lfp_suite,
    u_matrix,
    v_matrix,
    verify_lfp,
)
from ssfn.numerics import RngStream

LFP_TOLERANCE = 1e-12


def test_v_matrix():
    """Тест V_2 = [I; -I]"""
    assert np.array_equal(v_matrix(2), np.array([[1, 0], [0, 1], [-1, 0], [0, -1]]))


def test_u_matrix_scale():
    """Тест множителя U_m для обобщённой активации"""
    U = u_matrix(1, ActivationKind.generalized(0.5, 1.5))

    assert np.allclose(U, [[0.5, -0.5]])


def test_relu_lfp_example():
    """Тест LFP для relu на векторе (3, -2)"""
    pair = build_lfp_pair(2, ActivationKind.relu())
    t = np.array([[3.0], [-2.0]])

    assert np.array_equal(pair.U @ apply_activation(pair.V @ t, pair.kind), t)


def test_leaky_activation():
    """Тест leaky-активации"""
    z = np.array([[-2.0, 0.0, 3.0]])

    assert np.allclose(apply_activation(z, ActivationKind.leaky(0.1)), [[-0.2, 0.0, 3.0]])


def test_generalized_activation_example():
    """Тест обобщённой активации (0.5, 2) на векторе (-1, 1)"""
    z = np.array([[-1.0, 1.0]])

    assert np.allclose(apply_activation(z, ActivationKind.generalized(0.5, 2.0)), [[-0.5, 2.0]])


@pytest.mark.parametrize("kind", [ActivationKind.relu(), ActivationKind.leaky(0.2), ActivationKind.generalized(0.5, 2.0)])
@pytest.mark.parametrize("c", [0.0, 0.3, 1.0, 7.5])
def test_activation_positively_homogeneous(kind, c):
    """Тест: g(c z) = c g(z) при c >= 0"""
    z = np.random.default_rng(2).standard_normal((3, 4))

    assert np.allclose(apply_activation(c * z, kind), c * apply_activation(z, kind), rtol=1e-12, atol=1e-15)


@pytest.mark.parametrize("text", ["relu", "leaky:0.25", "generalized:0.5:2.0"])
def test_activation_parse_roundtrip(text):
    """Тест разбора и записи вида активации"""
    assert str(ActivationKind.parse(text)) == text


@pytest.mark.parametrize("text", ["tanh", "leaky:1.5", "generalized:2:1", "leaky:x"])
def test_activation_parse_invalid(text):
    """Тест недопустимых видов активации"""
    with pytest.raises(InvalidParameterError):
        ActivationKind.parse(text)


def test_build_lfp_pair_rejects_zero():
    """Тест: m = 0 недопустимо"""
    with pytest.raises(InvalidParameterError) as exc_info:
        build_lfp_pair(0, ActivationKind.relu())

    assert "m должно быть положительным" in str(exc_info.value)


def test_verify_lfp_wrong_length():
    """Тест: длина вектора должна равняться m"""
    pair = build_lfp_pair(3, ActivationKind.relu())

    with pytest.raises(DimensionMismatchError):
        verify_lfp(pair, [[1.0, 2.0]])


def test_verify_lfp_empty_sample():
    """Тест пустой выборки"""
    assert verify_lfp(build_lfp_pair(2, ActivationKind.relu()), []) == 0.0


kinds = st.one_of(
    st.just(ActivationKind.relu()),
    st.floats(0.01, 0.99).map(ActivationKind.leaky),
    st.tuples(st.floats(0.01, 5.0), st.floats(0.01, 5.0)).map(
        lambda ab: ActivationKind.generalized(ab[0], ab[0] + ab[1])
    ),
)


@settings(max_examples=50, deadline=None)
@given(m=st.integers(1, 60), kind=kinds, seed=st.integers(0, 2 ** 32))
def test_lfp_property(m, kind, seed):
    """Свойство: U g(V t) = t для любых m, активаций и векторов"""
    vectors = RngStream(seed).standard_normal((50, m))

    assert verify_lfp(build_lfp_pair(m, kind), vectors) <= LFP_TOLERANCE


def test_lfp_suite_default_sizes():
    """Тест набора проверок LFP для m = 1, 2, 10, 50 и 1000 векторов"""
    rng = RngStream(0)
    results = lfp_suite([1, 2, 10, 50], default_kinds(rng), 1000, rng)

    assert len(results) == 12
    assert max(err for _, _, err in results) <= LFP_TOLERANCE
