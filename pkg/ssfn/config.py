#!/usr/bin/env python3
# -*- coding: utf-8 -*-

import json
import math
import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from ssfn.exceptions import ConfigError, InvalidParameterError, UnknownPresetError
from ssfn.lfp import ActivationKind
from ssfn.numerics import DISTRIBUTIONS

PRESETS_DIR = Path(__file__).resolve().parent / "presets"
CROSS_VALIDATE = "cv"


@dataclass(frozen=True)
class Hyperparameters:
    """Параметры алгоритма построения SSFN (значения по умолчанию общие для всех наборов)."""
    lambda0: Union[float, str] = 1.0
    mu: float = 1e3
    k_max: int = 100
    alpha: float = 2.0
    n_max_minus_2Q: int = 1000
    delta: int = 50
    eta_node: float = 0.005
    eta_layer: float = 0.1
    L_max: int = 20
    seed: int = 0
    activation: ActivationKind = field(default_factory=ActivationKind.relu)
    dist: str = "normal"
    nu: Optional[float] = None

    def __post_init__(self):
        if isinstance(self.activation, str):
            object.__setattr__(self, 'activation', ActivationKind.parse(self.activation))
        if not isinstance(self.activation, ActivationKind):
            raise ConfigError(self.activation, "activation должна быть строкой вида relu, leaky:<a>, generalized:<a>:<b>")
        if isinstance(self.lambda0, str):
            if self.lambda0 != CROSS_VALIDATE:
                raise ConfigError(self.lambda0, f"lambda0 должна быть числом или '{CROSS_VALIDATE}'")
        elif not (self.lambda0 >= 0 and math.isfinite(self.lambda0)):
            raise ConfigError(self.lambda0, "lambda0 должна быть неотрицательной")
        if not self.mu > 0:
            raise ConfigError(self.mu, "mu должно быть положительным")
        if self.k_max < 1:
            raise ConfigError(self.k_max, "k_max должно быть не меньше 1")
        if not self.alpha >= 1:
            raise ConfigError(self.alpha, "alpha должно быть не меньше 1")
        # ||[U_Q, 0]||_F = s sqrt(2Q) должна лежать в шаре радиуса sqrt(2 alpha Q).
        if self.alpha < self.activation.scale ** 2:
            raise ConfigError(
                self.alpha, f"для активации {self.activation} требуется alpha >= {self.activation.scale ** 2:.6g}")
        if self.n_max_minus_2Q < 1:
            raise ConfigError(self.n_max_minus_2Q, "n_max_minus_2Q должно быть положительным")
        if not 1 <= self.delta <= self.n_max_minus_2Q:
            raise ConfigError(self.delta, "требуется 1 <= delta <= n_max_minus_2Q")
        if not (self.eta_node > 0 and self.eta_layer > 0):
            raise ConfigError((self.eta_node, self.eta_layer), "пороги остановки должны быть положительными")
        if self.L_max < 1:
            raise ConfigError(self.L_max, "L_max должно быть не меньше 1")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError(self.seed, "зерно должно быть 64-битным беззнаковым целым")
        if self.dist not in DISTRIBUTIONS:
            raise ConfigError(self.dist, f"распределение должно быть одним из {DISTRIBUTIONS}")
        if self.nu is not None and not self.nu > 0:
            raise ConfigError(self.nu, "nu должно быть положительным")

    @property
    def cross_validate(self) -> bool:
        return self.lambda0 == CROSS_VALIDATE

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Hyperparameters":
        """Создать параметры из словаря; неизвестные ключи запрещены."""
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(", ".join(unknown), "неизвестные ключи конфигурации")
        values = dict(data)
        try:
            for key in ("k_max", "n_max_minus_2Q", "delta", "L_max", "seed"):
                if key in values:
                    values[key] = _as_int(values[key], key)
            for key in ("mu", "alpha", "eta_node", "eta_layer"):
                if key in values:
                    values[key] = float(values[key])
            if "lambda0" in values and values["lambda0"] != CROSS_VALIDATE:
                values["lambda0"] = float(values["lambda0"])
            if values.get("nu") is not None:
                values["nu"] = float(values["nu"])
        except (TypeError, ValueError) as e:
            raise ConfigError(data, f"некорректное значение: {e}")
        try:
            return cls(**values)
        except InvalidParameterError as e:
            raise ConfigError(e.value, e.message)

    def to_dict(self) -> Dict[str, Any]:
        data = {f.name: getattr(self, f.name) for f in fields(self)}
        data["activation"] = str(self.activation)
        return data

    def with_seed(self, seed: int) -> "Hyperparameters":
        return replace(self, seed=seed)


def _as_int(value: Any, key: str) -> int:
    if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
        raise ValueError(f"{key} должно быть целым")
    return int(value)


@dataclass(frozen=True)
class Preset:
    """Пресет: описание источника данных и параметры."""
    name: str
    hyper: Hyperparameters
    dataset: Optional[Dict[str, Any]] = None
    reference: Dict[str, Any] = field(default_factory=dict)
    description: str = ""


def list_presets() -> List[str]:
    """Имена всех поставляемых пресетов."""
    return sorted(path.stem for path in PRESETS_DIR.glob("*.json"))


def _read_json(path: Path) -> Dict[str, Any]:
    try:
        with open(path, encoding="utf-8") as fin:
            data = json.load(fin)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(str(path), f"ошибка чтения файла: {e}")
    if not isinstance(data, dict):
        raise ConfigError(str(path), "ожидался JSON-объект")
    return data


def load_preset(name: str) -> Preset:
    """Загрузить пресет по имени."""
    path = PRESETS_DIR / f"{name}.json"
    if not path.exists():
        raise UnknownPresetError(name)
    data = _read_json(path)
    return Preset(
        name=name,
        hyper=Hyperparameters.from_dict(data.get("hyper", {})),
        dataset=data.get("dataset"),
        reference=data.get("reference", {}),
        description=data.get("description", ""),
    )


def load_config(reference: str) -> Preset:
    """Пресет по имени или плоский JSON-файл с ключами Hyperparameters."""
    if reference in list_presets():
        return load_preset(reference)
    path = Path(reference)
    if not path.exists():
        raise UnknownPresetError(reference, "не найден ни пресет, ни файл конфигурации")
    return Preset(name=path.stem, hyper=Hyperparameters.from_dict(_read_json(path)))


def data_dir() -> Path:
    return Path(os.environ.get("SSFN_DATA_DIR", "data"))


def worker_count(default: int = 1) -> int:
    """Число процессов для испытаний Монте-Карло из SSFN_WORKERS."""
    raw = os.environ.get("SSFN_WORKERS")
    if raw is None or raw == "":
        return default
    try:
        workers = int(raw)
    except ValueError:
        raise ConfigError(raw, "SSFN_WORKERS должно быть целым")
    if workers < 1:
        raise ConfigError(raw, "SSFN_WORKERS должно быть не меньше 1")
    return workers


@dataclass(frozen=True)
class ExperimentConfig:
    """Конфигурация серии испытаний Монте-Карло; испытание i использует зерно base_seed + i."""
    name: str
    dataset: Dict[str, Any]
    hyper: Hyperparameters
    trials: int = 1
    base_seed: int = 0
    out_dir: Path = Path("results")
    formats: Tuple[str, ...] = ("json", "csv")
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError(self.trials, "число испытаний должно быть не меньше 1")
        if self.workers < 1:
            raise ConfigError(self.workers, "число процессов должно быть не меньше 1")
        if not (0 <= self.base_seed and self.base_seed + self.trials <= 2 ** 64):
            raise ConfigError(self.base_seed, "зерно вне 64-битного диапазона")
        for fmt in self.formats:
            if fmt not in ("json", "csv"):
                raise ConfigError(fmt, "формат отчёта должен быть json или csv")

    def trial_seed(self, index: int) -> int:
        return self.base_seed + index
