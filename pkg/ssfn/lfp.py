#!/usr/bin/env python3
# -*- coding: utf-8 -*-

from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from ssfn.exceptions import DimensionMismatchError, InvalidParameterError
from ssfn.numerics import Matrix, RngStream


@dataclass(frozen=True)
class ActivationKind:
    """Функция активации: relu, leaky(a) или generalized(a, b).

    g(x) = b*x при x >= 0 и a*x при x < 0; relu: a=0, b=1; leaky: b=1.
    """
    variant: str = "relu"
    a: float = 0.0
    b: float = 1.0

    def __post_init__(self):
        if self.variant == "relu":
            if self.a != 0.0 or self.b != 1.0:
                raise InvalidParameterError(str(self), "relu не имеет параметров")
        elif self.variant == "leaky":
            if not 0.0 < self.a < 1.0 or self.b != 1.0:
                raise InvalidParameterError(str(self), "для leaky требуется 0 < a < 1")
        elif self.variant == "generalized":
            if not 0.0 < self.a < self.b:
                raise InvalidParameterError(str(self), "для generalized требуется 0 < a < b")
        else:
            raise InvalidParameterError(self.variant, "неизвестный вид активации")

    @classmethod
    def relu(cls) -> "ActivationKind":
        return cls("relu")

    @classmethod
    def leaky(cls, a: float) -> "ActivationKind":
        return cls("leaky", float(a), 1.0)

    @classmethod
    def generalized(cls, a: float, b: float) -> "ActivationKind":
        return cls("generalized", float(a), float(b))

    @classmethod
    def parse(cls, text: str) -> "ActivationKind":
        """Разобрать запись вида relu, leaky:0.1, generalized:0.5:2."""
        parts = str(text).strip().lower().split(":")
        try:
            if parts == ["relu"]:
                return cls.relu()
            if parts[0] == "leaky" and len(parts) == 2:
                return cls.leaky(float(parts[1]))
            if parts[0] == "generalized" and len(parts) == 3:
                return cls.generalized(float(parts[1]), float(parts[2]))
        except ValueError:
            pass
        raise InvalidParameterError(text, "ожидалось relu, leaky:<a> или generalized:<a>:<b>")

    @property
    def scale(self) -> float:
        """Множитель s в U_m = s [I, -I]."""
        return 1.0 / (self.a + self.b)

    def __str__(self) -> str:
        if self.variant == "relu":
            return "relu"
        if self.variant == "leaky":
            return f"leaky:{self.a!r}"
        return f"generalized:{self.a!r}:{self.b!r}"


def apply_activation(z: Matrix, kind: ActivationKind) -> Matrix:
    """Поэлементно применить g."""
    z = np.asarray(z, dtype=np.float64)
    if kind.variant == "relu":
        return np.maximum(z, 0.0)
    return np.where(z >= 0.0, kind.b * z, kind.a * z)


@dataclass(frozen=True)
class LfpPair:
    """Пара V (2m x m) и U (m x 2m), реализующая LFP."""
    m: int
    V: Matrix
    U: Matrix
    kind: ActivationKind


def v_matrix(m: int) -> Matrix:
    """V_m = [I_m; -I_m]."""
    eye = np.eye(m)
    return np.vstack([eye, -eye])


def u_matrix(m: int, kind: ActivationKind) -> Matrix:
    """U_m = s [I_m, -I_m]."""
    eye = np.eye(m)
    return kind.scale * np.hstack([eye, -eye])


def build_lfp_pair(m: int, kind: ActivationKind) -> LfpPair:
    """Построить пару V_m, U_m для заданной активации: U_m g(V_m t) = t."""
    if m < 1:
        raise InvalidParameterError(m, "m должно быть положительным")
    V = v_matrix(m)
    U = u_matrix(m, kind)
    V.flags.writeable = False
    U.flags.writeable = False
    return LfpPair(m=m, V=V, U=U, kind=kind)


def verify_lfp(pair: LfpPair, samples: Iterable[Sequence[float]]) -> float:
    """Максимальная ошибка восстановления ||U g(V t) - t|| по выборке."""
    columns = [np.asarray(t, dtype=np.float64).ravel() for t in samples]
    if not columns:
        return 0.0
    for t in columns:
        if t.size != pair.m:
            raise DimensionMismatchError(t.size, f"ожидался вектор длины {pair.m}")
    T = np.column_stack(columns)
    restored = pair.U @ apply_activation(pair.V @ T, pair.kind)
    return float(np.linalg.norm(restored - T, axis=0).max())


def default_kinds(rng: RngStream) -> List[ActivationKind]:
    """relu и по одной leaky/generalized со случайными допустимыми параметрами."""
    a_leaky, a_gen, gap = rng.uniform(0.01, 0.99, (3,))
    return [
        ActivationKind.relu(),
        ActivationKind.leaky(float(a_leaky)),
        ActivationKind.generalized(float(a_gen), float(a_gen + 0.1 + 2.0 * gap)),
    ]


def lfp_suite(
    ms: Sequence[int],
    kinds: Sequence[ActivationKind],
    samples: int,
    rng: RngStream,
) -> List[Tuple[int, ActivationKind, float]]:
    """Проверка LFP на случайных нормальных векторах для всех m и видов активации."""
    results = []
    for m in ms:
        for kind in kinds:
            pair = build_lfp_pair(m, kind)
            vectors = rng.standard_normal((samples, m))
            results.append((m, kind, verify_lfp(pair, vectors)))
    return results
