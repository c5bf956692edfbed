#!/usr/bin/env python3
# -*- coding: utf-8 -*-

import csv
import gzip
import io
import logging
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ssfn.exceptions import (
    BadMagicError,
    ConfigError,
    CountMismatchError,
    DataFormatError,
    DimensionMismatchError,
    EmptyFileError,
    InvalidParameterError,
    OutOfRangeError,
    ParseError,
    TooFewSamplesError,
    TruncatedFileError,
)
from ssfn.numerics import Matrix, RngStream, as_matrix

logger = logging.getLogger(__name__)

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801
PARTITION_STREAM = 1
WHITESPACE = ("", " ", "whitespace", None)


def one_hot(labels: Sequence[int], Q: int) -> Matrix:
    """Матрица Q x J с единицей в строке labels[j] столбца j."""
    if Q < 2:
        raise OutOfRangeError(Q, "требуется не меньше двух классов")
    labels = np.asarray(labels, dtype=np.int64).ravel()
    if labels.size and (labels.min() < 1 or labels.max() > Q):
        bad = labels[(labels < 1) | (labels > Q)][0]
        raise OutOfRangeError(int(bad), f"метка класса вне диапазона 1..{Q}")
    T = np.zeros((Q, labels.size))
    T[labels - 1, np.arange(labels.size)] = 1.0
    return T


@dataclass(frozen=True)
class Dataset:
    """Набор пар (x, t): X размера P x J, one-hot цели T размера Q x J и метки 1..Q.

    Столбец X - один пример.
    """
    X: Matrix
    labels: np.ndarray
    Q: int
    name: str = "dataset"
    class_names: Tuple[str, ...] = ()
    T: Matrix = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        X = as_matrix(self.X, self.name)
        labels = np.array(self.labels, dtype=np.int64).ravel()
        if labels.size != X.shape[1]:
            raise DimensionMismatchError((X.shape, labels.size), "число меток не равно числу примеров")
        T = one_hot(labels, self.Q)
        labels.flags.writeable = False
        T.flags.writeable = False
        object.__setattr__(self, 'X', X)
        object.__setattr__(self, 'labels', labels)
        object.__setattr__(self, 'T', T)
        object.__setattr__(self, 'class_names', tuple(self.class_names))

    @property
    def P(self) -> int:
        return self.X.shape[0]

    @property
    def J(self) -> int:
        return self.X.shape[1]

    def subset(self, indices: Sequence[int], name: Optional[str] = None) -> "Dataset":
        """Поднабор по номерам примеров."""
        indices = np.asarray(indices, dtype=np.int64)
        return Dataset(
            X=self.X[:, indices],
            labels=self.labels[indices],
            Q=self.Q,
            name=name or self.name,
            class_names=self.class_names,
        )

    def __str__(self) -> str:
        return f"{self.name}: P={self.P}, Q={self.Q}, J={self.J}"


def _decode(raw: bytes, path: Path, delimiter: Optional[str]) -> str:
    try:
        return raw.decode("utf-8")
    except UnicodeDecodeError as e:
        line_start = raw.rfind(b"\n", 0, e.start) + 1
        prefix = raw[line_start:e.start].decode("utf-8", errors="replace")
        if delimiter in WHITESPACE:
            column = len((prefix + "x").split())
        else:
            column = prefix.count(delimiter) + 1
        raise ParseError(str(path), raw.count(b"\n", 0, e.start) + 1, column, "некорректная кодировка (ожидалась UTF-8)")


def _read_rows(path: Path, delimiter: Optional[str]) -> List[Tuple[int, List[str]]]:
    try:
        raw = Path(path).read_bytes()
    except OSError as e:
        raise DataFormatError(str(path), f"ошибка чтения файла: {e}")
    text = io.StringIO(_decode(raw, path, delimiter), newline="")
    if delimiter in WHITESPACE:
        rows = [(num, line.split()) for num, line in enumerate(text, 1)]
    else:
        rows = [(num, row) for num, row in enumerate(csv.reader(text, delimiter=delimiter), 1)]
    return [(num, [cell.strip() for cell in row]) for num, row in rows if any(cell.strip() for cell in row)]


def _column_index(column: Union[int, str], names: Optional[List[str]], width: int, path: Path) -> int:
    if isinstance(column, str) and not column.lstrip("-").isdigit():
        if names is None or column not in names:
            raise ConfigError(column, f"столбец не найден в заголовке {path}")
        return names.index(column)
    index = int(column)
    if not -width <= index < width:
        raise ConfigError(column, f"номер столбца вне диапазона 0..{width - 1}")
    return index % width


def load_csv_dataset(
    path: Union[str, Path],
    label_column: Union[int, str] = -1,
    delimiter: Optional[str] = ",",
    header: bool = False,
    class_names: Optional[Sequence[str]] = None,
    drop_columns: Sequence[Union[int, str]] = (),
    name: Optional[str] = None,
) -> Dataset:
    """Загрузить набор из CSV: признаки - вещественные числа, метка - категория.

    Классы нумеруются в порядке первого появления, если class_names не задан.
    """
    path = Path(path)
    rows = _read_rows(path, delimiter)
    names = None
    if header and rows:
        names = rows[0][1]
        rows = rows[1:]
    if not rows:
        raise EmptyFileError(str(path))
    width = len(rows[0][1])
    label_idx = _column_index(label_column, names, width, path)
    skipped = {label_idx} | {_column_index(c, names, width, path) for c in drop_columns}
    feature_idx = [i for i in range(width) if i not in skipped]
    if not feature_idx:
        raise ConfigError(str(path), "в файле нет столбцов признаков")

    classes: Dict[str, int] = {}
    fixed = class_names is not None
    for idx, cls in enumerate(class_names or (), 1):
        classes[str(cls)] = idx
    features = np.empty((len(rows), len(feature_idx)))
    labels = np.empty(len(rows), dtype=np.int64)
    for r, (num, row) in enumerate(rows):
        if len(row) != width:
            raise ParseError(str(path), num, len(row), f"ожидалось {width} столбцов")
        for c, col in enumerate(feature_idx):
            try:
                value = float(row[col])
            except ValueError:
                raise ParseError(str(path), num, col + 1, f"не число: '{row[col]}'")
            if not math.isfinite(value):
                raise ParseError(str(path), num, col + 1, "значение не конечно")
            features[r, c] = value
        label = row[label_idx]
        if label not in classes:
            if fixed:
                raise ParseError(str(path), num, label_idx + 1, f"неизвестный класс '{label}'")
            classes[label] = len(classes) + 1
        labels[r] = classes[label]

    dataset = Dataset(
        X=features.T,
        labels=labels,
        Q=len(classes),
        name=name or path.stem,
        class_names=tuple(classes),
    )
    logger.info(f"Загружен CSV {path}: {dataset}")
    return dataset


def _read_idx(path: Path, magic: int) -> np.ndarray:
    opener = gzip.open if path.suffix == ".gz" else open
    try:
        with opener(path, "rb") as fin:
            data = fin.read()
    except (OSError, EOFError) as e:
        raise DataFormatError(str(path), f"ошибка чтения файла: {e}")
    if len(data) < 4:
        raise TruncatedFileError(str(path), "нет заголовка")
    (found,) = struct.unpack(">I", data[:4])
    if found != magic:
        raise BadMagicError(str(path), f"сигнатура 0x{found:08x}, ожидалась 0x{magic:08x}")
    ndim = data[3]
    offset = 4 + 4 * ndim
    if len(data) < offset:
        raise TruncatedFileError(str(path), "обрезан заголовок размеров")
    dims = struct.unpack(f">{ndim}I", data[4:offset])
    count = int(np.prod(dims))
    if len(data) - offset < count:
        raise TruncatedFileError(str(path), f"ожидалось {count} байт данных, найдено {len(data) - offset}")
    return np.frombuffer(data, dtype=np.uint8, count=count, offset=offset).reshape(dims)


def load_idx_dataset(
    images_path: Union[str, Path],
    labels_path: Union[str, Path],
    name: str = "mnist",
) -> Dataset:
    """Загрузить изображения и метки в формате IDX (MNIST); пиксели делятся на 255."""
    images = _read_idx(Path(images_path), IDX_IMAGES_MAGIC)
    digits = _read_idx(Path(labels_path), IDX_LABELS_MAGIC)
    if images.shape[0] != digits.shape[0]:
        raise CountMismatchError((images.shape[0], digits.shape[0]))
    X = images.reshape(images.shape[0], -1).T / 255.0
    dataset = Dataset(
        X=X,
        labels=digits.astype(np.int64) + 1,
        Q=10,
        name=name,
        class_names=tuple(str(d) for d in range(10)),
    )
    logger.info(f"Загружен IDX {images_path}: {dataset}")
    return dataset


def random_partition(full: Dataset, train_fraction: float, rng: RngStream) -> Tuple[Dataset, Dataset]:
    """Случайное разбиение: floor(fraction * J) примеров в обучающую часть, остальные - в тестовую."""
    if not 0 < train_fraction < 1:
        raise InvalidParameterError(train_fraction, "доля должна быть в интервале (0, 1)")
    n_train = int(math.floor(train_fraction * full.J + 1e-9))
    if n_train < full.Q or n_train >= full.J:
        raise TooFewSamplesError(full.J, f"обучающая часть {n_train} при Q={full.Q}")
    order = rng.permutation(full.J)
    return (
        full.subset(order[:n_train], f"{full.name}-train"),
        full.subset(order[n_train:], f"{full.name}-test"),
    )


def standardize(train: Dataset, *others: Dataset) -> Tuple[Dataset, ...]:
    """Z-нормировка признаков по статистикам обучающего набора."""
    mean = train.X.mean(axis=1, keepdims=True)
    std = train.X.std(axis=1, keepdims=True)
    std[std == 0] = 1.0
    return tuple(
        Dataset(X=(d.X - mean) / std, labels=d.labels, Q=d.Q, name=d.name, class_names=d.class_names)
        for d in (train,) + others
    )


@dataclass(frozen=True)
class SourceData:
    """Загруженные данные пресета: готовое разбиение или полный набор с долей."""
    train: Optional[Dataset] = None
    test: Optional[Dataset] = None
    full: Optional[Dataset] = None
    train_fraction: Optional[float] = None
    zscore: bool = False

    def split(self, seed: int) -> Tuple[Dataset, Dataset]:
        """Обучающий и тестовый наборы; случайное разбиение зависит только от seed."""
        if self.full is not None:
            train, test = random_partition(self.full, self.train_fraction, RngStream(seed, stream=PARTITION_STREAM))
        else:
            train, test = self.train, self.test
        if self.zscore:
            train, test = standardize(train, test)
        return train, test


def load_source(block: Dict[str, Any], root: Path) -> SourceData:
    """Загрузить набор по описанию из пресета (форматы csv, idx, npz)."""
    from ssfn.storage import DatasetStorage

    fmt = block.get("format")
    name = block.get("name", "dataset")

    def resolve(key: str) -> Path:
        if key not in block:
            raise ConfigError(key, f"в описании набора {name} нет ключа")
        path = Path(block[key])
        return path if path.is_absolute() else root / path

    if fmt == "csv":
        options = dict(
            label_column=block.get("label_column", -1),
            delimiter=block.get("delimiter", ","),
            header=bool(block.get("header", False)),
            drop_columns=tuple(block.get("drop_columns", ())),
        )
        if "full" in block:
            full = load_csv_dataset(resolve("full"), name=name, **options)
            return SourceData(full=full, train_fraction=float(block["train_fraction"]), zscore=bool(block.get("zscore")))
        train = load_csv_dataset(resolve("train"), name=f"{name}-train", **options)
        test = load_csv_dataset(resolve("test"), name=f"{name}-test", class_names=train.class_names, **options)
    elif fmt == "idx":
        train = load_idx_dataset(resolve("train_images"), resolve("train_labels"), f"{name}-train")
        test = load_idx_dataset(resolve("test_images"), resolve("test_labels"), f"{name}-test")
    elif fmt == "npz":
        if "full" in block:
            full = DatasetStorage.load(resolve("full"))
            return SourceData(full=full, train_fraction=float(block["train_fraction"]), zscore=bool(block.get("zscore")))
        train = DatasetStorage.load(resolve("train"))
        test = DatasetStorage.load(resolve("test"))
    else:
        raise ConfigError(fmt, "формат набора должен быть csv, idx или npz")
    if train.P != test.P or train.Q != test.Q:
        raise DimensionMismatchError((str(train), str(test)), "обучающий и тестовый наборы несовместимы")
    return SourceData(train=train, test=test, zscore=bool(block.get("zscore")))


def resolve_source(block: Dict[str, Any], root: Path, seed: int) -> Tuple[Dataset, Dataset]:
    """Обучающий и тестовый наборы для испытания с зерном seed."""
    return load_source(block, root).split(seed)
