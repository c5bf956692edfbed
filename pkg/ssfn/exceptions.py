#!/usr/bin/env python3
# -*- coding: utf-8 -*-


class SsfnError(Exception):
    """Базовое исключение пакета."""
    default_message = "ошибка"

    def __init__(self, value, message=None):
        self.value = value
        self.message = message if message is not None else self.default_message
        super().__init__(f"'{value}' -> {self.message}")


class NonFiniteError(SsfnError):
    """Исключение при наличии NaN/Inf в матрице."""
    default_message = "матрица содержит NaN или Inf"


class DimensionMismatchError(SsfnError):
    """Исключение при несогласованных размерах матриц."""
    default_message = "несогласованные размеры"


class NotSPDError(SsfnError):
    """Исключение, если матрица не является симметричной положительно определённой."""
    default_message = "матрица не положительно определена"


class SingularSystemError(SsfnError):
    """Исключение при вырожденной системе нормальных уравнений."""
    default_message = "система вырождена"


class InvalidParameterError(SsfnError):
    """Исключение при недопустимом значении параметра."""
    default_message = "недопустимое значение параметра"


class InvalidStateError(SsfnError):
    """Исключение при недопустимом состоянии обучения."""
    default_message = "недопустимое состояние"


class LengthMismatchError(SsfnError):
    """Исключение при списках разной длины."""
    default_message = "списки разной длины"


class OutOfRangeError(SsfnError):
    """Исключение при выходе метки класса за допустимый диапазон."""
    default_message = "значение вне допустимого диапазона"


class ParseError(SsfnError):
    """Исключение при ошибке разбора файла данных."""
    def __init__(self, filename, row, column, message="ошибка разбора"):
        self.filename = filename
        self.row = row
        self.column = column
        super().__init__(filename, f"строка {row}, столбец {column}: {message}")


class EmptyFileError(SsfnError):
    """Исключение при пустом файле данных."""
    default_message = "файл пуст"


class BadMagicError(SsfnError):
    """Исключение при неверной сигнатуре IDX-файла."""
    default_message = "неверная сигнатура IDX"


class TruncatedFileError(SsfnError):
    """Исключение при обрезанном файле."""
    default_message = "файл обрезан"


class CountMismatchError(SsfnError):
    """Исключение при несовпадении числа изображений и меток."""
    default_message = "число изображений и меток не совпадает"


class TooFewSamplesError(SsfnError):
    """Исключение при недостаточном числе примеров для разбиения."""
    default_message = "слишком мало примеров"


class ConfigError(SsfnError):
    """Исключение при некорректной конфигурации."""
    default_message = "некорректная конфигурация"


class UnknownPresetError(SsfnError):
    """Исключение при обращении к несуществующему пресету."""
    default_message = "пресет не найден"


class DataFormatError(SsfnError):
    """Исключение при некорректном формате данных."""
    default_message = "некорректный формат данных"


class ReportVersionError(SsfnError):
    """Исключение при неподдерживаемой версии отчёта."""
    default_message = "неподдерживаемая версия схемы отчёта"


class UnknownCommandError(SsfnError):
    """Исключение при вводе неизвестной команды."""
    default_message = "неизвестная команда"


class UsageError(SsfnError):
    """Исключение при ошибке в аргументах командной строки."""
    default_message = "ошибка в аргументах командной строки"
