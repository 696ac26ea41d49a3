"""Исключения JQC. Ошибки валидации наследуют ValueError, сбои вычислений - RuntimeError."""


class JQCError(Exception):
    """Базовое исключение пакета."""


class SizeMismatchError(JQCError, ValueError):
    """Размеры регистров или векторов не совпадают."""


class NotHermitianError(JQCError, ValueError):
    """Оператор не эрмитов."""


class NonDiagonalError(JQCError, ValueError):
    """В диагональном операторе встретились буквы X или Y."""


class NormalizationError(JQCError, ValueError):
    """Ненормированное распределение или исчезающая норма состояния."""


class ReweightError(JQCError, RuntimeError):
    """Все веса после перевзвешивания оказались нулевыми."""


class ConvergenceError(JQCError, RuntimeError):
    """Итерационный решатель не сошелся."""


class ObjectiveError(JQCError, ValueError):
    """Целевая функция вернула нечисловое значение."""


class ConfigError(JQCError, ValueError):
    """Ошибка в конфигурации эксперимента."""

    def __init__(self, message, source=None, line=None):
        self.source = source
        self.line = line
        if source is not None:
            location = f'{source}:{line}' if line is not None else str(source)
            message = f'{location}: {message}'
        super().__init__(message)
