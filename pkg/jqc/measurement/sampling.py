"""
Таблицы отсчетов, распределения и мультиномиальная выборка.

Генератор - счетчиковый Philox; поток повторения r получает ключ seed + r.
"""
import logging
from dataclasses import dataclass

import numpy as np

from jqc.config import Config
from jqc.errors import NormalizationError, SizeMismatchError

logger = logging.getLogger(__name__)


def make_rng(seed, stream=0):
    """Детерминированный генератор для потока stream."""
    return np.random.Generator(np.random.Philox(key=int(seed) + int(stream)))


@dataclass(frozen=True)
class SamplingConfig:
    """Число выстрелов на базис, число повторений и зерно."""
    shots: int = Config.DEFAULT_SHOTS
    m_rep: int = Config.DEFAULT_M_REP
    seed: int = 0

    def __post_init__(self):
        if self.shots < 1:
            raise ValueError(f'shots must be >= 1, got {self.shots}')
        if self.m_rep < 1:
            raise ValueError(f'm_rep must be >= 1, got {self.m_rep}')
        if self.seed < 0 or self.seed >= 1 << 64:
            raise ValueError('seed must be a 64-bit non-negative integer')


@dataclass(frozen=True, eq=False)
class ProbDist:
    """Распределение по 2^n исходам: неотрицательное, сумма 1 с точностью PROB_TOL."""
    probs: np.ndarray
    register_size: int

    def __post_init__(self):
        probs = np.array(self.probs, dtype=float).reshape(-1)
        if probs.size != 1 << self.register_size:
            raise SizeMismatchError(
                f'{probs.size} probabilities do not fit a {self.register_size}-bit register'
            )
        if np.any(probs < 0):
            raise NormalizationError('Probabilities must be non-negative')
        if abs(probs.sum() - 1.0) > Config.PROB_TOL:
            raise NormalizationError(f'Probabilities sum to {probs.sum():.12g}, expected 1')
        probs.setflags(write=False)
        object.__setattr__(self, 'probs', probs)

    @classmethod
    def from_weights(cls, weights, register_size=None):
        """
        Нормирует веса в распределение.

        Отрицательные артефакты округления отсекаются в 0; отсеченная масса
        выше CLIP_WARN_MASS попадает в лог.
        """
        weights = np.asarray(weights, dtype=float).reshape(-1)
        clipped = -weights[weights < 0].sum()
        if clipped > Config.CLIP_WARN_MASS:
            logger.warning(f'Clipped negative probability mass {clipped:.3e}')
        if clipped > 0:
            weights = np.clip(weights, 0.0, None)
        total = weights.sum()
        if not total > 0:
            raise NormalizationError('Cannot normalize an all-zero weight vector')
        if register_size is None:
            register_size = int(round(np.log2(weights.size)))
        return cls(weights / total, register_size)

    def support(self):
        return np.flatnonzero(self.probs > 0)


@dataclass(frozen=True, eq=False)
class CountsTable:
    """Отсчеты по 2^n исходам; shots - полная сумма."""
    counts: np.ndarray
    register_size: int

    def __post_init__(self):
        counts = np.array(self.counts, dtype=np.int64).reshape(-1)
        if counts.size != 1 << self.register_size:
            raise SizeMismatchError(
                f'{counts.size} counts do not fit a {self.register_size}-bit register'
            )
        if np.any(counts < 0):
            raise ValueError('Counts must be non-negative')
        counts.setflags(write=False)
        object.__setattr__(self, 'counts', counts)

    @classmethod
    def from_dict(cls, counts, register_size):
        dense = np.zeros(1 << register_size, dtype=np.int64)
        for index, count in counts.items():
            dense[int(index)] += int(count)
        return cls(dense, register_size)

    @property
    def shots(self):
        return int(self.counts.sum())

    def as_dict(self):
        return {int(i): int(self.counts[i]) for i in np.flatnonzero(self.counts)}

    def to_dist(self):
        return ProbDist.from_weights(self.counts, self.register_size)


def sample_counts(psi, cfg, rng=None):
    """
    Мультиномиальная выборка cfg.shots исходов из |amplitude|^2.

    Args:
        psi: нормированный StateVector (или массив вероятностей)
        cfg: SamplingConfig
        rng: генератор; по умолчанию make_rng(cfg.seed)

    Returns:
        CountsTable
    """
    if rng is None:
        rng = make_rng(cfg.seed)
    if hasattr(psi, 'probabilities'):
        probs, register_size = psi.probabilities(), psi.num_qubits
    else:
        probs = np.asarray(psi, dtype=float)
        register_size = int(round(np.log2(probs.size)))
    probs = np.clip(probs, 0.0, None)
    probs = probs / probs.sum()
    return CountsTable(rng.multinomial(cfg.shots, probs), register_size)


# ===== Файл отсчетов =====

def write_counts(table, path, basis_label=''):
    """Заголовок '# qubits=.. shots=.. basis=..', затем строки 'bitstring count' (старший кубит слева)."""
    n = table.register_size
    with open(path, 'w', encoding='utf-8') as f:
        f.write(f'# qubits={n} shots={table.shots} basis={basis_label}\n')
        for index, count in table.as_dict().items():
            f.write(f'{index:0{n}b} {count}\n')


def read_counts(path):
    """
    Читает файл отсчетов (в том числе полученных на внешнем оборудовании).

    Returns:
        tuple: (CountsTable, метка базиса)
    """
    header = {}
    counts = {}
    with open(path, 'r', encoding='utf-8') as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line:
                continue
            if line.startswith('#'):
                for item in line.lstrip('#').split():
                    key, _, value = item.partition('=')
                    header[key] = value
                continue
            parts = line.split()
            if len(parts) != 2 or set(parts[0]) - {'0', '1'}:
                raise ValueError(f'{path}:{lineno}: expected "bitstring count"')
            counts[int(parts[0], 2)] = counts.get(int(parts[0], 2), 0) + int(parts[1])
            header.setdefault('qubits', str(len(parts[0])))
    if 'qubits' not in header:
        raise ValueError(f'{path}: no qubit count in header and no data rows')
    table = CountsTable.from_dict(counts, int(header['qubits']))
    if 'shots' in header and int(header['shots']) != table.shots:
        raise ValueError(f'{path}: header shots={header["shots"]} but rows sum to {table.shots}')
    logger.info(f'Read {table.shots} shots over {table.register_size} qubits from {path}')
    return table, header.get('basis', '')
