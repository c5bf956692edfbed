#!/usr/bin/env python3
# -*- coding: utf-8 -*-

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional, Sequence
if __name__ == "__main__":
    project_root = Path(__file__).resolve().parents[1]
    if str(project_root) not in sys.path:
        sys.path.insert(0, str(project_root))
import numpy as np

from ssfn.config import (
    ExperimentConfig,
    Preset,
    data_dir,
    list_presets,
    load_config,
    load_preset,
    worker_count,
)
from ssfn.data import Dataset, SourceData, load_csv_dataset, load_source
from ssfn.exceptions import ConfigError, SsfnError, UnknownCommandError, UsageError
from ssfn.harness import run_monte_carlo, write_reports
from ssfn.lfp import ActivationKind, default_kinds, lfp_suite
from ssfn.models import accuracy
from ssfn.numerics import RngStream, seed_value
from ssfn.solvers import admm_bench
from ssfn.storage import DatasetStorage, ModelStorage
from ssfn.trainer import train_ssfn

LFP_TOLERANCE = 1e-12


def setup_logging() -> None:
    """Настройка системы логирования."""
    logging.basicConfig(
        filename=os.environ.get("SSFN_LOG_FILE", "ssfn.log"),
        level=os.environ.get("SSFN_LOG_LEVEL", "INFO").upper(),
        format='%(asctime)s - %(levelname)s - %(message)s',
        encoding='utf-8'
    )


class CommandParser(argparse.ArgumentParser):
    """Парсер, сообщающий об ошибке в аргументах одной строкой JSON."""

    def error(self, message: str):
        report_error(UsageError(self.prog, message))
        logging.error(f"Ошибка аргументов: {self.prog}: {message}")
        self.exit(2)


def build_parser() -> argparse.ArgumentParser:
    parser = CommandParser(
        prog="ssfn",
        description="Самооценивающая размер сеть прямого распространения (SSFN)",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    train = commands.add_parser("train", help="обучить одну сеть")
    train.add_argument("config", help="имя пресета или JSON-файл параметров")
    train.add_argument("--seed", type=int, default=None, help="зерно (по умолчанию из конфигурации)")
    train.add_argument("--out", type=Path, default=None, help="каталог для model.npz и trace.json")
    _add_data_arguments(train)

    montecarlo = commands.add_parser("montecarlo", help="серия испытаний Монте-Карло")
    montecarlo.add_argument("config", help="имя пресета или JSON-файл параметров")
    montecarlo.add_argument("--trials", type=int, required=True)
    montecarlo.add_argument("--base-seed", type=int, default=0)
    montecarlo.add_argument("--out", type=Path, default=None)
    montecarlo.add_argument("--workers", type=int, default=None, help="число процессов (иначе SSFN_WORKERS)")
    montecarlo.add_argument("--formats", default="json,csv", help="форматы отчёта через запятую")
    _add_data_arguments(montecarlo)

    predict = commands.add_parser("predict", help="предсказать классы обученной сетью")
    predict.add_argument("--model", type=Path, required=True)
    predict.add_argument("--data", type=Path, required=True, help=".npz набор или CSV с меткой в последнем столбце")
    predict.add_argument("--unlabeled", action="store_true", help="CSV без столбца меток")
    predict.add_argument("--out", type=Path, default=None, help="файл для предсказанных меток")

    lfp = commands.add_parser("lfp-check", help="проверка свойства LFP")
    lfp.add_argument("--m", type=int, action="append", help="размерность (можно повторять)")
    lfp.add_argument("--kind", action="append", help="relu, leaky:<a> или generalized:<a>:<b>")
    lfp.add_argument("--samples", type=int, default=1000)
    lfp.add_argument("--seed", type=int, default=0)

    bench = commands.add_parser("admm-bench", help="сравнение ADMM с лагранжевым эталоном")
    bench.add_argument("--problems", type=int, default=100)
    bench.add_argument("--seed", type=int, default=0)

    presets = commands.add_parser("presets", help="поставляемые пресеты: list | show <имя>")
    presets.add_argument("action")
    presets.add_argument("name", nargs="?")
    return parser


def _add_data_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--data", type=Path, default=None, help="обучающий набор (.npz или CSV)")
    parser.add_argument("--test-data", type=Path, default=None, help="тестовый набор (.npz или CSV)")
    parser.add_argument("--train-fraction", type=float, default=0.75, help="доля обучения без --test-data")


def _load_file(path: Path, class_names: Sequence[str] = ()) -> Dataset:
    if path.suffix == ".npz":
        return DatasetStorage.load(path)
    return load_csv_dataset(path, class_names=class_names or None)


def _source(args: argparse.Namespace, preset: Preset) -> SourceData:
    """Данные из --data/--test-data или из описания набора в пресете."""
    if args.data is not None:
        train = _load_file(args.data)
        if args.test_data is None:
            return SourceData(full=train, train_fraction=args.train_fraction)
        return SourceData(train=train, test=_load_file(args.test_data, train.class_names))
    if preset.dataset is None:
        raise ConfigError(preset.name, "в конфигурации нет набора данных; укажите --data")
    return load_source(preset.dataset, data_dir())


def cmd_train(args: argparse.Namespace) -> int:
    preset = load_config(args.config)
    seed = preset.hyper.seed if args.seed is None else seed_value(args.seed)
    hyper = preset.hyper.with_seed(seed)
    train, test = _source(args, preset).split(seed)
    model, trace = train_ssfn(train, hyper, RngStream(seed), monitor=test)
    out = args.out or Path("results") / preset.name
    out.mkdir(parents=True, exist_ok=True)
    ModelStorage.save(model, out / "model.npz")
    with open(out / "trace.json", 'w', encoding='utf-8') as fout:
        json.dump(trace.to_dict(), fout, indent=2, ensure_ascii=False)

    train_acc = model.predict(train.X)
    test_acc = model.predict(test.X)
    print(f"Размер сети: {model.size_label}")
    print(f"Точность на обучении: {100 * accuracy(train_acc, train.labels):.2f}%")
    print(f"Точность на тесте:    {100 * accuracy(test_acc, test.labels):.2f}%")
    print(f"Сохранено в {out}")
    logging.info(f"Обучение {preset.name} (зерно {seed}): {model.size_label}")
    return 0


def cmd_montecarlo(args: argparse.Namespace) -> int:
    preset = load_config(args.config)
    cfg = ExperimentConfig(
        name=preset.name,
        dataset=preset.dataset or {},
        hyper=preset.hyper,
        trials=args.trials,
        base_seed=args.base_seed,
        out_dir=args.out or Path("results") / preset.name,
        formats=tuple(fmt.strip() for fmt in args.formats.split(",") if fmt.strip()),
        workers=args.workers if args.workers is not None else worker_count(),
    )
    summary = run_monte_carlo(cfg, _source(args, preset))
    write_reports(summary, cfg.out_dir, cfg.formats)

    acc = summary.test_accuracy
    ls = summary.ls_test_accuracy
    print(f"{cfg.name}: {len(summary.trials)} испытаний")
    print(f"  Регуляризованный МНК: {100 * ls.mean:.1f}%")
    print(f"  SSFN: {100 * acc.mean:.1f} ± {100 * acc.std:.1f}% (мин {100 * acc.min:.1f}, макс {100 * acc.max:.1f})")
    print(f"  Слоёв в среднем: {summary.layer_count.mean:.1f}")
    print(f"  Отчёты: {cfg.out_dir}")
    logging.info(f"Серия {cfg.name}: точность {acc.mean:.4f} ± {acc.std:.4f}")
    return 0


def cmd_predict(args: argparse.Namespace) -> int:
    model = ModelStorage.load(args.model)
    labels: Optional[np.ndarray] = None
    if args.unlabeled:
        X = np.loadtxt(args.data, delimiter=",", ndmin=2).T
    else:
        dataset = _load_file(args.data, model.class_names)
        X, labels = dataset.X, dataset.labels
    predicted = model.predict(X)
    if args.out is not None:
        np.savetxt(args.out, predicted, fmt="%d")
        print(f"Предсказания записаны в {args.out}")
    else:
        for label in predicted:
            print(model.class_names[label - 1] if model.class_names else label)
    if labels is not None:
        print(f"Точность: {100 * accuracy(predicted, labels):.2f}%")
    logging.info(f"Предсказание для {args.data}: {predicted.size} примеров")
    return 0


def cmd_lfp_check(args: argparse.Namespace) -> int:
    rng = RngStream(args.seed)
    ms = args.m or [1, 2, 10, 50]
    kinds = [ActivationKind.parse(k) for k in args.kind] if args.kind else default_kinds(rng)
    results = lfp_suite(ms, kinds, args.samples, rng)

    line = '+{}+{}+{}+'.format('-' * 6, '-' * 40, '-' * 14)
    print(line)
    print('| {:^4} | {:^38} | {:^12} |'.format("m", "Активация", "Ошибка"))
    print(line)
    for m, kind, err in results:
        print('| {:^4} | {:<38} | {:^12.3e} |'.format(m, str(kind)[:38], err))
    print(line)
    worst = max(err for _, _, err in results)
    logging.info(f"Проверка LFP: {len(results)} случаев, максимальная ошибка {worst:.3e}")
    return 0 if worst <= LFP_TOLERANCE else 1


def cmd_admm_bench(args: argparse.Namespace) -> int:
    report = admm_bench(args.problems, RngStream(args.seed))
    print(f"Задач: {report.problems} (активное ограничение: {report.active_constraints})")
    print(f"  Отклонение цели от эталона:  {report.max_objective_gap:.3e}")
    print(f"  Превышение радиуса:          {report.max_constraint_excess:.3e}")
    print(f"  Расхождение ветвей:          {report.max_branch_difference:.3e}")
    print(f"  Отклонение поиска Тихонова:  {report.max_tikhonov_gap:.3e}")
    print(f"  Итераций ADMM (макс):        {max(report.iterations, default=0)}")
    print("  Результат: " + ("успех" if report.passed() else "провал"))
    logging.info(f"Проверка ADMM: {report.problems} задач, успех={report.passed()}")
    return 0 if report.passed() else 1


def print_presets() -> None:
    """Таблица поставляемых пресетов."""
    line = '+{}+{}+{}+{}+{}+{}+{}+{}+'.format(
        '-' * 16, '-' * 7, '-' * 5, '-' * 9, '-' * 9, '-' * 8, '-' * 6, '-' * 7)
    print(line)
    print('| {:^14} | {:^5} | {:^3} | {:^7} | {:^7} | {:^6} | {:^4} | {:^5} |'.format(
        "Пресет", "P", "Q", "λ0", "μ", "n-2Q", "Δ", "η_l"))
    print(line)
    for name in list_presets():
        preset = load_preset(name)
        hyper = preset.hyper
        dataset = preset.dataset or {}
        lam = hyper.lambda0 if hyper.cross_validate else f"{hyper.lambda0:.0e}"
        print('| {:<14} | {:^5} | {:^3} | {:^7} | {:^7.0e} | {:^6} | {:^4} | {:^5} |'.format(
            name[:14], dataset.get("P", "?"), dataset.get("Q", "?"), lam, hyper.mu,
            hyper.n_max_minus_2Q, hyper.delta, hyper.eta_layer))
    print(line)


def cmd_presets(args: argparse.Namespace) -> int:
    if args.action == "list":
        print_presets()
    elif args.action == "show":
        if not args.name:
            raise ConfigError("show", "укажите имя пресета")
        preset = load_preset(args.name)
        print(json.dumps({
            "name": preset.name,
            "description": preset.description,
            "dataset": preset.dataset,
            "hyper": preset.hyper.to_dict(),
            "reference": preset.reference,
        }, indent=2, ensure_ascii=False))
    else:
        raise UnknownCommandError(f"presets {args.action}")
    return 0


COMMANDS = {
    "train": cmd_train,
    "montecarlo": cmd_montecarlo,
    "predict": cmd_predict,
    "lfp-check": cmd_lfp_check,
    "admm-bench": cmd_admm_bench,
    "presets": cmd_presets,
}


def report_error(error: BaseException) -> None:
    """Машиночитаемая ошибка в stderr: одна строка JSON."""
    print(json.dumps({"error": type(error).__name__, "message": str(error)}, ensure_ascii=False), file=sys.stderr)


def main(argv: Optional[List[str]] = None) -> int:
    """Главная функция программы."""
    setup_logging()
    args = build_parser().parse_args(argv)

    try:
        handler = COMMANDS.get(args.command)
        if handler is None:
            raise UnknownCommandError(args.command)
        logging.info(f"Команда: {args.command}")
        return handler(args)

    except KeyboardInterrupt:
        print("\nПрервано.", file=sys.stderr)
        logging.warning("Прервано пользователем.")
        return 130

    except UnknownCommandError as e:
        report_error(e)
        logging.error(f"Неизвестная команда: {e}")
        return 1

    except SsfnError as e:
        report_error(e)
        logging.error(f"Ошибка: {e}")
        return 1

    except Exception as e:
        report_error(e)
        logging.error(f"Ошибка: {e}", exc_info=True)
        return 1


if __name__ == '__main__':
    sys.exit(main())
