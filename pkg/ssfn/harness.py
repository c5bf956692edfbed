#!/usr/bin/env python3
# -*- coding: utf-8 -*-

import csv
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ssfn.config import ExperimentConfig, Hyperparameters, data_dir
from ssfn.data import SourceData, load_source
from ssfn.exceptions import DataFormatError, ReportVersionError
from ssfn.models import evaluate
from ssfn.numerics import RngStream
from ssfn.trainer import train_ssfn

logger = logging.getLogger(__name__)

SCHEMA_VERSION = "1.0"


@dataclass(frozen=True)
class Statistics:
    """Среднее, выборочное СКО (делитель N-1), минимум и максимум."""
    mean: float
    std: float
    min: float
    max: float

    @classmethod
    def of(cls, values: Sequence[float]) -> "Statistics":
        values = np.asarray(values, dtype=np.float64)
        std = float(np.std(values, ddof=1)) if values.size > 1 else 0.0
        return cls(mean=float(np.mean(values)), std=std, min=float(values.min()), max=float(values.max()))

    def to_dict(self) -> Dict[str, float]:
        return {"mean": self.mean, "std": self.std, "min": self.min, "max": self.max}


@dataclass(frozen=True)
class TrialSummary:
    """Результат одного испытания."""
    index: int
    seed: int
    test_accuracy: float
    train_accuracy: float
    ls_test_accuracy: float
    lambda0: float
    node_counts: Tuple[int, ...]
    layer_costs: Tuple[float, ...]
    accuracy_curve: Tuple[Dict[str, Any], ...] = ()
    cost_curve: Tuple[Tuple[int, float], ...] = ()
    seconds: float = field(default=0.0, compare=False)
    timings: Dict[str, float] = field(default_factory=dict, compare=False)

    @property
    def layers(self) -> int:
        return len(self.node_counts)

    @property
    def size_label(self) -> str:
        return "-".join(str(n) for n in self.node_counts) if self.node_counts else "0-layers"

    @property
    def random_nodes(self) -> int:
        return self.cost_curve[-1][0] if self.cost_curve else 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "index": self.index,
            "seed": self.seed,
            "test_accuracy": self.test_accuracy,
            "train_accuracy": self.train_accuracy,
            "ls_test_accuracy": self.ls_test_accuracy,
            "lambda0": self.lambda0,
            "size": self.size_label,
            "node_counts": list(self.node_counts),
            "layer_costs": list(self.layer_costs),
            "accuracy_curve": [dict(point) for point in self.accuracy_curve],
            "cost_curve": [list(point) for point in self.cost_curve],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TrialSummary":
        return cls(
            index=int(data["index"]),
            seed=int(data["seed"]),
            test_accuracy=float(data["test_accuracy"]),
            train_accuracy=float(data["train_accuracy"]),
            ls_test_accuracy=float(data["ls_test_accuracy"]),
            lambda0=float(data["lambda0"]),
            node_counts=tuple(int(n) for n in data["node_counts"]),
            layer_costs=tuple(float(c) for c in data["layer_costs"]),
            accuracy_curve=tuple(dict(point) for point in data.get("accuracy_curve", [])),
            cost_curve=tuple((int(n), float(c)) for n, c in data.get("cost_curve", [])),
        )


@dataclass(frozen=True)
class RunSummary:
    """Результаты серии; агрегаты всегда пересчитываются из записей испытаний."""
    name: str
    hyper: Hyperparameters
    base_seed: int
    trials: Tuple[TrialSummary, ...]

    def __post_init__(self):
        if not self.trials:
            raise DataFormatError(self.name, "в серии нет испытаний")

    @property
    def test_accuracy(self) -> Statistics:
        return Statistics.of([t.test_accuracy for t in self.trials])

    @property
    def train_accuracy(self) -> Statistics:
        return Statistics.of([t.train_accuracy for t in self.trials])

    @property
    def ls_test_accuracy(self) -> Statistics:
        return Statistics.of([t.ls_test_accuracy for t in self.trials])

    @property
    def layer_count(self) -> Statistics:
        return Statistics.of([t.layers for t in self.trials])

    @property
    def depth(self) -> int:
        return max(t.layers for t in self.trials)

    def node_profile(self) -> List[Statistics]:
        """Статистика числа узлов по слоям; отсутствующий слой считается нулевым."""
        profile = []
        for layer in range(self.depth):
            counts = [t.node_counts[layer] if layer < t.layers else 0 for t in self.trials]
            profile.append(Statistics.of(counts))
        return profile

    def to_dict(self) -> Dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "name": self.name,
            "base_seed": self.base_seed,
            "hyper": self.hyper.to_dict(),
            "aggregate": {
                "trials": len(self.trials),
                "test_accuracy": self.test_accuracy.to_dict(),
                "train_accuracy": self.train_accuracy.to_dict(),
                "ls_test_accuracy": self.ls_test_accuracy.to_dict(),
                "layer_count": self.layer_count.to_dict(),
                "node_profile": [s.to_dict() for s in self.node_profile()],
            },
            "trials": [t.to_dict() for t in self.trials],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunSummary":
        return cls(
            name=data["name"],
            hyper=Hyperparameters.from_dict(data["hyper"]),
            base_seed=int(data["base_seed"]),
            trials=tuple(TrialSummary.from_dict(t) for t in data["trials"]),
        )


def run_trial(source: SourceData, hyper: Hyperparameters, seed: int, index: int = 0) -> TrialSummary:
    """Одно испытание: разбиение, обучение, оценка. Зависит только от (данных, hyper, seed)."""
    started = time.perf_counter()
    logger.info(f"Испытание {index} (зерно {seed}) начато")
    train, test = source.split(seed)
    hyper = hyper.with_seed(seed)
    model, trace = train_ssfn(train, hyper, RngStream(seed), monitor=test)
    summary = TrialSummary(
        index=index,
        seed=seed,
        test_accuracy=evaluate(model, test.X, test.labels),
        train_accuracy=evaluate(model, train.X, train.labels),
        ls_test_accuracy=float(trace.accuracy_curve[0]["test_accuracy"]),
        lambda0=trace.lambda0,
        node_counts=tuple(model.sizes),
        layer_costs=tuple(layer.cost for layer in model.layers),
        accuracy_curve=tuple(trace.accuracy_curve),
        cost_curve=tuple(trace.cost_curve()),
        seconds=time.perf_counter() - started,
        timings=dict(trace.timings),
    )
    logger.info(
        f"Испытание {index} завершено: точность {summary.test_accuracy:.4f}, "
        f"размер {summary.size_label}, {summary.seconds:.2f} с"
    )
    return summary


def run_monte_carlo(cfg: ExperimentConfig, source: Optional[SourceData] = None) -> RunSummary:
    """Выполнить cfg.trials испытаний (параллельно при cfg.workers > 1).

    Испытание i использует зерно base_seed + i, поэтому результат не зависит
    от числа процессов.
    """
    if source is None:
        source = load_source(cfg.dataset, data_dir())
    seeds = [cfg.trial_seed(i) for i in range(cfg.trials)]
    indices = list(range(cfg.trials))
    logger.info(f"Серия {cfg.name}: {cfg.trials} испытаний, процессов {cfg.workers}")
    if cfg.workers == 1:
        trials = [run_trial(source, cfg.hyper, seed, i) for i, seed in zip(indices, seeds)]
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            trials = list(pool.map(run_trial, [source] * cfg.trials, [cfg.hyper] * cfg.trials, seeds, indices))
    return RunSummary(name=cfg.name, hyper=cfg.hyper, base_seed=cfg.base_seed, trials=tuple(trials))


TRIAL_COLUMNS = [
    "trial", "seed", "test_accuracy", "test_accuracy_std", "train_accuracy",
    "ls_test_accuracy", "lambda0", "layers", "random_nodes", "size",
]


def _write_json(data: Dict[str, Any], path: Path) -> None:
    with open(path, 'w', encoding='utf-8') as fout:
        json.dump(data, fout, indent=2, sort_keys=True, ensure_ascii=False)
        fout.write("\n")


def emit_report(summary: RunSummary, fmt: str, path: Union[str, Path]) -> Path:
    """Записать отчёт: json - полное дерево записей, csv - строка на испытание и итоговая строка."""
    path = Path(path)
    if fmt == "json":
        _write_json(summary.to_dict(), path)
    elif fmt == "csv":
        layer_columns = [f"layer_{k}" for k in range(1, summary.depth + 1)]
        with open(path, 'w', encoding='utf-8', newline='') as fout:
            writer = csv.DictWriter(fout, fieldnames=TRIAL_COLUMNS + layer_columns)
            writer.writeheader()
            for t in summary.trials:
                row = {
                    "trial": t.index,
                    "seed": t.seed,
                    "test_accuracy": t.test_accuracy,
                    "test_accuracy_std": "",
                    "train_accuracy": t.train_accuracy,
                    "ls_test_accuracy": t.ls_test_accuracy,
                    "lambda0": t.lambda0,
                    "layers": t.layers,
                    "random_nodes": t.random_nodes,
                    "size": t.size_label,
                }
                for k, column in enumerate(layer_columns):
                    row[column] = t.node_counts[k] if k < t.layers else 0
                writer.writerow(row)
            footer = {
                "trial": "aggregate",
                "seed": summary.base_seed,
                "test_accuracy": summary.test_accuracy.mean,
                "test_accuracy_std": summary.test_accuracy.std,
                "train_accuracy": summary.train_accuracy.mean,
                "ls_test_accuracy": summary.ls_test_accuracy.mean,
                "lambda0": "",
                "layers": summary.layer_count.mean,
                "random_nodes": float(np.mean([t.random_nodes for t in summary.trials])),
                "size": "",
            }
            for column, stats in zip(layer_columns, summary.node_profile()):
                footer[column] = stats.mean
            writer.writerow(footer)
    else:
        raise DataFormatError(fmt, "формат отчёта должен быть json или csv")
    logger.info(f"Отчёт {fmt} записан в {path}")
    return path


def emit_curves(summary: RunSummary, path: Union[str, Path]) -> Path:
    """Кривые точности (по слоям) и ошибки (по шагам) от накопленного числа случайных узлов."""
    path = Path(path)
    columns = ["trial", "series", "layer", "random_nodes", "train_accuracy", "test_accuracy", "cost"]
    with open(path, 'w', encoding='utf-8', newline='') as fout:
        writer = csv.DictWriter(fout, fieldnames=columns, restval="")
        writer.writeheader()
        for t in summary.trials:
            for point in t.accuracy_curve:
                writer.writerow({"trial": t.index, "series": "accuracy", **point})
            for nodes, value in t.cost_curve:
                writer.writerow({"trial": t.index, "series": "cost", "random_nodes": nodes, "cost": value})
    return path


def emit_timings(summary: RunSummary, path: Union[str, Path]) -> Path:
    path = Path(path)
    _write_json({
        "trials": [
            {"index": t.index, "seed": t.seed, "seconds": t.seconds, **t.timings}
            for t in summary.trials
        ],
        "mean_seconds": float(np.mean([t.seconds for t in summary.trials])),
    }, path)
    return path


def write_reports(summary: RunSummary, out_dir: Union[str, Path], formats: Sequence[str]) -> List[Path]:
    """Записать все отчёты серии в out_dir."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if "json" in formats:
        written.append(emit_report(summary, "json", out_dir / "summary.json"))
    if "csv" in formats:
        written.append(emit_report(summary, "csv", out_dir / "trials.csv"))
        written.append(emit_curves(summary, out_dir / "curves.csv"))
    written.append(emit_timings(summary, out_dir / "timings.json"))
    return written


def load_report(path: Union[str, Path]) -> RunSummary:
    """Прочитать summary.json; другая старшая версия схемы отклоняется."""
    try:
        with open(path, encoding='utf-8') as fin:
            data = json.load(fin)
    except (OSError, json.JSONDecodeError) as e:
        raise DataFormatError(str(path), f"ошибка чтения файла: {e}")
    version = str(data.get("schema_version", ""))
    if version.split(".")[0] != SCHEMA_VERSION.split(".")[0]:
        raise ReportVersionError(version)
    try:
        return RunSummary.from_dict(data)
    except (KeyError, TypeError, ValueError) as e:
        raise DataFormatError(str(path), f"ошибка данных: {e}")
