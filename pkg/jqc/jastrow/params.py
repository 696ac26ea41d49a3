"""
Параметры двухспинового оператора Ястрова J = sum_{s<t} lambda_class(s,t) Z_s Z_t.

Каждая неупорядоченная пара s<t учитывается один раз.
"""
import logging
from dataclasses import dataclass, replace
from functools import lru_cache
from itertools import combinations

import numpy as np

from jqc.errors import SizeMismatchError
from jqc.pauli.algebra import PauliSum, letters_on

logger = logging.getLogger(__name__)

TOPOLOGIES = ('chain', 'ladder')


def build_class_map(topology, L):
    """
    Классы эквивалентных пар кубитов с учетом трансляционной симметрии.

    chain: класс задается расстоянием |s-t| (L-1 классов).
    ladder (2L кубитов, цепочки 0..L-1 и L..2L-1): расстояние вдоль каждой
    цепочки отдельно (2(L-1) классов) плюс смещение узлов между цепочками (L классов).

    Returns:
        dict: {(s, t): номер класса}, s < t
    """
    if L < 2:
        raise ValueError(f'Class map needs L >= 2, got {L}')
    if topology == 'chain':
        return {(s, t): t - s - 1 for s, t in combinations(range(L), 2)}
    if topology == 'ladder':
        class_map = {}
        for s, t in combinations(range(2 * L), 2):
            chain_s, chain_t = s // L, t // L
            site_s, site_t = s % L, t % L
            if chain_s == chain_t:
                class_map[(s, t)] = chain_s * (L - 1) + abs(site_t - site_s) - 1
            else:
                class_map[(s, t)] = 2 * (L - 1) + abs(site_t - site_s)
        return class_map
    raise ValueError(f'Unknown topology {topology!r}; expected one of {TOPOLOGIES}')


def topology_for(model):
    return 'ladder' if model.kind == 'hubbard' else 'chain'


@dataclass(frozen=True)
class JastrowParams:
    """Карта классов пар и вектор коэффициентов lambda."""
    num_qubits: int
    pairs: tuple
    lambdas: tuple

    def __post_init__(self):
        pairs = tuple(sorted((tuple(sorted(pair)), int(c)) for pair, c in dict(self.pairs).items()))
        object.__setattr__(self, 'pairs', pairs)
        object.__setattr__(self, 'lambdas', tuple(float(x) for x in np.ravel(self.lambdas)))
        expected = set(combinations(range(self.num_qubits), 2))
        if {pair for pair, _ in pairs} != expected:
            raise ValueError('Class map must assign every pair s<t exactly once')
        classes = sorted({c for _, c in pairs})
        if classes != list(range(len(classes))):
            raise ValueError('Class indices must be contiguous from 0')
        if len(self.lambdas) != len(classes):
            raise SizeMismatchError(
                f'{len(classes)} Jastrow classes but {len(self.lambdas)} coefficients'
            )

    @classmethod
    def from_class_map(cls, num_qubits, class_map, lambdas=None):
        num_classes = max(class_map.values()) + 1 if class_map else 0
        if lambdas is None:
            lambdas = np.zeros(num_classes)
        return cls(num_qubits, tuple(class_map.items()), tuple(np.ravel(lambdas)))

    @classmethod
    def for_model(cls, model, lambdas=None):
        class_map = build_class_map(topology_for(model), model.L)
        return cls.from_class_map(model.num_qubits, class_map, lambdas)

    @property
    def class_map(self):
        return dict(self.pairs)

    @property
    def num_classes(self):
        return len(self.lambdas)

    def with_lambdas(self, lambdas):
        return replace(self, lambdas=tuple(np.ravel(lambdas)))

    def scaled(self, factor):
        return self.with_lambdas(np.asarray(self.lambdas) * factor)

    def pair_coefficients(self):
        """{(s, t): lambda} по всем парам."""
        return {pair: self.lambdas[c] for pair, c in self.pairs}


@lru_cache(maxsize=32)
def _class_features(num_qubits, pairs):
    """Матрица F[i, c] = sum_{(s,t) in c} z_s(i) z_t(i) для всех индексов i."""
    idx = np.arange(1 << num_qubits, dtype=np.int64)
    z = 1 - 2 * ((idx[:, None] >> np.arange(num_qubits)) & 1)
    num_classes = max((c for _, c in pairs), default=-1) + 1
    features = np.zeros((idx.size, num_classes))
    for (s, t), c in pairs:
        features[:, c] += z[:, s] * z[:, t]
    return features


def log_weights(jp):
    """Вектор J(i) для всех 2^N битовых строк."""
    return _class_features(jp.num_qubits, jp.pairs) @ np.asarray(jp.lambdas)


def _bits_to_index(bits, num_qubits):
    if isinstance(bits, str):
        if len(bits) != num_qubits:
            raise SizeMismatchError(
                f'Bit-string of length {len(bits)} for {num_qubits}-qubit Jastrow'
            )
        return int(bits, 2)
    index = int(bits)
    if not 0 <= index < 1 << num_qubits:
        raise SizeMismatchError(f'Index {index} outside {num_qubits}-qubit register')
    return index


def log_weight(bits, jp):
    """
    sum_{s<t} lambda z_s z_t для одной битовой строки, z = (-1)^bit.

    Args:
        bits: строка из 0/1 (старший кубит слева) или целый индекс
        jp: JastrowParams
    """
    index = _bits_to_index(bits, jp.num_qubits)
    total = 0.0
    for (s, t), c in jp.pairs:
        z_s = 1 - 2 * ((index >> s) & 1)
        z_t = 1 - 2 * ((index >> t) & 1)
        total += jp.lambdas[c] * z_s * z_t
    return total


def jastrow_operator(jp):
    """J как сумма Паули из строк Z_s Z_t."""
    terms = [(letters_on(jp.num_qubits, {s: 'Z', t: 'Z'}), lam)
             for (s, t), lam in jp.pair_coefficients().items()]
    return PauliSum(terms, jp.num_qubits)


# ===== Файл переопределения карты классов =====

def load_class_map(path):
    """
    Читает карту классов из файла со строками 's t class_index'.

    Returns:
        tuple: (число кубитов, {(s, t): класс})
    """
    class_map = {}
    with open(path, 'r', encoding='utf-8') as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line or line.startswith('#'):
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ValueError(f'{path}:{lineno}: expected "s t class_index"')
            s, t, c = (int(x) for x in parts)
            if s == t:
                raise ValueError(f'{path}:{lineno}: pair ({s}, {t}) is not a pair')
            class_map[(min(s, t), max(s, t))] = c
    num_qubits = max(max(pair) for pair in class_map) + 1 if class_map else 0
    logger.info(f'Loaded Jastrow class map with {len(set(class_map.values()))} classes from {path}')
    return num_qubits, class_map


def save_class_map(class_map, path):
    with open(path, 'w', encoding='utf-8') as f:
        for (s, t), c in sorted(class_map.items()):
            f.write(f'{s} {t} {c}\n')
