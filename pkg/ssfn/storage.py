#!/usr/bin/env python3
# -*- coding: utf-8 -*-

import json
import logging
import zipfile
from pathlib import Path
from typing import Any, Dict, Union

import numpy as np

from ssfn.data import Dataset
from ssfn.exceptions import DataFormatError, SsfnError
from ssfn.lfp import ActivationKind
from ssfn.models import SsfnModel, TrainedLayer

logger = logging.getLogger(__name__)

CONTAINER_VERSION = 1
MODEL_FORMAT = "ssfn-model"
DATASET_FORMAT = "ssfn-dataset"


def _encode_header(header: Dict[str, Any]) -> np.ndarray:
    return np.frombuffer(json.dumps(header, sort_keys=True).encode("utf-8"), dtype=np.uint8)


def _open_container(filename: Union[str, Path], expected_format: str):
    """Открыть .npz и проверить JSON-заголовок; вернуть (заголовок, архив)."""
    try:
        archive = np.load(filename, allow_pickle=False)
    except (OSError, ValueError, zipfile.BadZipFile) as e:
        raise DataFormatError(str(filename), f"ошибка чтения файла: {e}")
    if not hasattr(archive, "files") or "header" not in archive.files:
        raise DataFormatError(str(filename), "нет заголовка контейнера")
    try:
        header = json.loads(archive["header"].tobytes().decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise DataFormatError(str(filename), f"повреждён заголовок: {e}")
    if header.get("format") != expected_format:
        raise DataFormatError(str(filename), f"ожидался формат {expected_format}, найден {header.get('format')}")
    if header.get("version") != CONTAINER_VERSION:
        raise DataFormatError(str(filename), f"неподдерживаемая версия {header.get('version')}")
    return header, archive


class ModelStorage:
    """Класс для сохранения и загрузки обученных сетей в .npz."""

    @staticmethod
    def save(model: SsfnModel, filename: Union[str, Path]) -> None:
        """Сохранить модель; загрузка восстанавливает все матрицы побитно."""
        header = {
            "format": MODEL_FORMAT,
            "version": CONTAINER_VERSION,
            "P": model.P,
            "Q": model.Q,
            "activation": str(model.activation),
            "layers": len(model.layers),
            "costs": [layer.cost for layer in model.layers],
            "class_names": list(model.class_names),
        }
        arrays = {"header": _encode_header(header), "O0_star": model.O0_star}
        for idx, layer in enumerate(model.layers, 1):
            arrays[f"W_{idx}"] = layer.W
            arrays[f"O_{idx}"] = layer.O_star
        with open(filename, 'wb') as fout:
            np.savez(fout, **arrays)
        logger.info(f"Модель {model.size_label} сохранена в {filename}")

    @staticmethod
    def load(filename: Union[str, Path]) -> SsfnModel:
        """Загрузить модель из .npz."""
        header, archive = _open_container(filename, MODEL_FORMAT)
        with archive:
            try:
                layers = [
                    TrainedLayer(
                        W=archive[f"W_{idx}"],
                        O_star=archive[f"O_{idx}"],
                        n_nodes=archive[f"W_{idx}"].shape[0],
                        cost=float(header["costs"][idx - 1]),
                    )
                    for idx in range(1, int(header["layers"]) + 1)
                ]
                return SsfnModel(
                    P=int(header["P"]),
                    Q=int(header["Q"]),
                    O0_star=archive["O0_star"],
                    layers=tuple(layers),
                    activation=ActivationKind.parse(header["activation"]),
                    class_names=tuple(header.get("class_names", ())),
                )
            except (KeyError, IndexError, ValueError) as e:
                raise DataFormatError(str(filename), f"ошибка данных: {e}")
            except SsfnError as e:
                raise DataFormatError(str(filename), f"некорректная модель: {e}")


class DatasetStorage:
    """Класс для сохранения и загрузки наборов данных в .npz."""

    @staticmethod
    def save(dataset: Dataset, filename: Union[str, Path]) -> None:
        header = {
            "format": DATASET_FORMAT,
            "version": CONTAINER_VERSION,
            "name": dataset.name,
            "Q": dataset.Q,
            "class_names": list(dataset.class_names),
        }
        with open(filename, 'wb') as fout:
            np.savez(fout, header=_encode_header(header), X=dataset.X, labels=dataset.labels)

    @staticmethod
    def load(filename: Union[str, Path]) -> Dataset:
        header, archive = _open_container(filename, DATASET_FORMAT)
        with archive:
            try:
                dataset = Dataset(
                    X=archive["X"],
                    labels=archive["labels"],
                    Q=int(header["Q"]),
                    name=header.get("name", Path(filename).stem),
                    class_names=tuple(header.get("class_names", ())),
                )
            except (KeyError, ValueError) as e:
                raise DataFormatError(str(filename), f"ошибка данных: {e}")
            except SsfnError as e:
                raise DataFormatError(str(filename), f"некорректный набор: {e}")
        logger.info(f"Загружен набор {filename}: {dataset}")
        return dataset
