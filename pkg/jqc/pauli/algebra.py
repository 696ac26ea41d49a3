"""
Алгебра строк Паули для JQC.

Соглашения:
- Строка букв печатается старшим кубитом слева: кубит 0 - крайняя правая буква.
- Фаза строки хранится внутри комплексного коэффициента суммы.
- Коэффициенты с модулем не выше Config.COEFF_TOL удаляются.
"""
import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sparse

from jqc.config import Config
from jqc.errors import NonDiagonalError, NormalizationError, SizeMismatchError

logger = logging.getLogger(__name__)

PAULI_LETTERS = 'IXYZ'

# Таблица умножения одиночных матриц Паули: (a, b) -> (буква, фаза)
PAULI_PROD = {
    ('I', 'I'): ('I', 1), ('I', 'X'): ('X', 1), ('I', 'Y'): ('Y', 1), ('I', 'Z'): ('Z', 1),
    ('X', 'I'): ('X', 1), ('Y', 'I'): ('Y', 1), ('Z', 'I'): ('Z', 1),
    ('X', 'X'): ('I', 1), ('Y', 'Y'): ('I', 1), ('Z', 'Z'): ('I', 1),
    ('X', 'Y'): ('Z', 1j), ('Y', 'X'): ('Z', -1j),
    ('Y', 'Z'): ('X', 1j), ('Z', 'Y'): ('X', -1j),
    ('Z', 'X'): ('Y', 1j), ('X', 'Z'): ('Y', -1j),
}

PHASES = (1, -1, 1j, -1j)


@dataclass(frozen=True)
class PauliString:
    """Строка Паули с фазой из {+1, -1, +i, -i}."""
    letters: str
    phase: complex = 1

    def __post_init__(self):
        if any(letter not in PAULI_LETTERS for letter in self.letters):
            raise ValueError(f'Invalid Pauli letters: {self.letters!r}')
        if self.phase not in PHASES:
            raise ValueError(f'Pauli phase must be a unit of {{1, -1, i, -i}}, got {self.phase}')

    @property
    def num_qubits(self):
        return len(self.letters)

    def letter(self, qubit):
        return self.letters[len(self.letters) - 1 - qubit]

    def __mul__(self, other):
        if len(self.letters) != len(other.letters):
            raise SizeMismatchError(
                f'Cannot multiply Pauli strings on {len(self.letters)} and {len(other.letters)} qubits'
            )
        phase = self.phase * other.phase
        out = []
        for a, b in zip(self.letters, other.letters):
            letter, factor = PAULI_PROD[(a, b)]
            out.append(letter)
            phase *= factor
        return PauliString(''.join(out), phase)


def letters_on(num_qubits, ops):
    """Строка букв длины num_qubits с операторами {кубит: буква}."""
    chars = ['I'] * num_qubits
    for qubit, letter in ops.items():
        if not 0 <= qubit < num_qubits:
            raise SizeMismatchError(f'Qubit {qubit} outside register of {num_qubits}')
        chars[num_qubits - 1 - qubit] = letter
    return ''.join(chars)


class PauliSum:
    """
    Взвешенная сумма строк Паули.

    Хранит канонический вид: без повторов, без нулевых коэффициентов,
    в лексикографическом порядке строк. Экземпляры неизменяемы и хэшируемы.
    """

    __slots__ = ('_terms', '_num_qubits', '_hash')

    def __init__(self, terms, num_qubits):
        merged = {}
        if isinstance(terms, dict):
            terms = terms.items()
        for letters, coeff in terms:
            if len(letters) != num_qubits:
                raise SizeMismatchError(
                    f'Term {letters!r} does not act on {num_qubits} qubits'
                )
            if any(letter not in PAULI_LETTERS for letter in letters):
                raise ValueError(f'Invalid Pauli letters: {letters!r}')
            merged[letters] = merged.get(letters, 0) + complex(coeff)
        self._terms = tuple(sorted(
            (letters, coeff) for letters, coeff in merged.items()
            if abs(coeff) > Config.COEFF_TOL
        ))
        self._num_qubits = int(num_qubits)
        self._hash = None

    # ----- конструкторы -----

    @classmethod
    def identity(cls, num_qubits, coeff=1.0):
        return cls({'I' * num_qubits: coeff}, num_qubits)

    @classmethod
    def zero(cls, num_qubits):
        return cls({}, num_qubits)

    @classmethod
    def term(cls, num_qubits, ops, coeff=1.0):
        """Одночлен coeff * P, где ops = {кубит: буква}."""
        return cls({letters_on(num_qubits, ops): coeff}, num_qubits)

    @classmethod
    def from_string(cls, pauli):
        return cls({pauli.letters: pauli.phase}, pauli.num_qubits)

    # ----- доступ -----

    @property
    def num_qubits(self):
        return self._num_qubits

    @property
    def terms(self):
        return dict(self._terms)

    def items(self):
        return iter(self._terms)

    def coefficient(self, letters):
        return dict(self._terms).get(letters, 0.0)

    def __len__(self):
        return len(self._terms)

    def __iter__(self):
        return (letters for letters, _ in self._terms)

    def __eq__(self, other):
        if not isinstance(other, PauliSum):
            return NotImplemented
        return self._num_qubits == other._num_qubits and self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self._num_qubits, self._terms))
        return self._hash

    def __repr__(self):
        return f'<PauliSum {self._num_qubits}q, {len(self._terms)} terms>'

    def is_hermitian(self, tol=Config.IMAG_TOL):
        # Строки Паули эрмитовы, поэтому сумма эрмитова ровно при вещественных коэффициентах
        return all(abs(coeff.imag) <= tol for _, coeff in self._terms)

    def is_diagonal(self):
        return all(set(letters) <= {'I', 'Z'} for letters, _ in self._terms)

    def non_identity(self):
        return PauliSum({k: c for k, c in self._terms if set(k) != {'I'}}, self._num_qubits)

    # ----- арифметика -----

    def _check_size(self, other):
        if self._num_qubits != other._num_qubits:
            raise SizeMismatchError(
                f'PauliSum size mismatch: {self._num_qubits} vs {other._num_qubits} qubits'
            )

    def __add__(self, other):
        if not isinstance(other, PauliSum):
            return NotImplemented
        self._check_size(other)
        return PauliSum(list(self._terms) + list(other._terms), self._num_qubits)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        if not isinstance(other, PauliSum):
            return NotImplemented
        return self + other.scale(-1)

    def scale(self, factor):
        return PauliSum([(k, c * factor) for k, c in self._terms], self._num_qubits)

    def __mul__(self, other):
        if isinstance(other, PauliSum):
            return multiply(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)


def multiply(a, b):
    """
    Каноническое произведение двух сумм Паули.

    Args:
        a, b: PauliSum на одинаковом числе кубитов

    Returns:
        PauliSum: a*b с накопленными фазами и объединенными коэффициентами

    Raises:
        SizeMismatchError: При разном числе кубитов
    """
    a._check_size(b)
    products = []
    for left, c_left in a.items():
        for right, c_right in b.items():
            product = PauliString(left) * PauliString(right)
            products.append((product.letters, c_left * c_right * product.phase))
    return PauliSum(products, a.num_qubits)


def power(a, exponent):
    """a**exponent через повторное умножение; нулевая степень - единица."""
    result = PauliSum.identity(a.num_qubits)
    for _ in range(exponent):
        result = multiply(result, a)
    return result


# ===== Битовые маски =====

def term_masks(letters):
    """
    Маски строки Паули.

    Returns:
        tuple: (flip_mask, sign_mask, число букв Y);
        P|i> = i^nY * (-1)^popcount(i & sign_mask) |i ^ flip_mask>
    """
    flip = sign = 0
    n_y = 0
    n = len(letters)
    for qubit in range(n):
        letter = letters[n - 1 - qubit]
        if letter in 'XY':
            flip |= 1 << qubit
        if letter in 'YZ':
            sign |= 1 << qubit
        if letter == 'Y':
            n_y += 1
    return flip, sign, n_y


def parity(indices, mask):
    """Четность popcount(indices & mask) для массива индексов."""
    indices = np.asarray(indices, dtype=np.int64)
    result = np.zeros(indices.shape, dtype=np.int64)
    qubit = 0
    while mask >> qubit:
        if (mask >> qubit) & 1:
            result ^= (indices >> qubit) & 1
        qubit += 1
    return result


def parity_signs(indices, mask):
    return 1 - 2 * parity(indices, mask)


@lru_cache(maxsize=64)
def to_sparse(h):
    """Разреженная CSR-матрица суммы Паули размера 2^N x 2^N."""
    dim = 1 << h.num_qubits
    cols = np.arange(dim, dtype=np.int64)
    rows_all, cols_all, data_all = [], [], []
    for letters, coeff in h.items():
        flip, sign, n_y = term_masks(letters)
        data = coeff * (1j ** n_y) * parity_signs(cols, sign)
        rows_all.append(cols ^ flip)
        cols_all.append(cols)
        data_all.append(data)
    if not data_all:
        return sparse.csr_matrix((dim, dim), dtype=complex)
    matrix = sparse.coo_matrix(
        (np.concatenate(data_all), (np.concatenate(rows_all), np.concatenate(cols_all))),
        shape=(dim, dim)
    )
    return matrix.tocsr()


def to_dense(h):
    return to_sparse(h).toarray()


# ===== Базисы измерения =====

@dataclass(frozen=True)
class MeasurementBasis:
    """Ось пост-вращения для каждого системного кубита; axes[k] относится к кубиту k."""
    axes: tuple

    def __post_init__(self):
        object.__setattr__(self, 'axes', tuple(self.axes))
        if any(axis not in 'ZXYI' or len(axis) != 1 for axis in self.axes):
            raise ValueError(f'Invalid measurement axes: {self.axes!r}')

    @classmethod
    def uniform(cls, axis, num_qubits):
        return cls((axis,) * num_qubits)

    @classmethod
    def from_label(cls, label):
        return cls(tuple(reversed(label)))

    @property
    def num_qubits(self):
        return len(self.axes)

    @property
    def label(self):
        # Кубит 0 - крайний правый символ, как в строках Паули
        return ''.join(reversed(self.axes))

    @property
    def rotated_qubits(self):
        return tuple(k for k, axis in enumerate(self.axes) if axis in 'XY')

    @property
    def num_rotations(self):
        return len(self.rotated_qubits)

    @property
    def is_computational(self):
        return not self.rotated_qubits

    def __str__(self):
        return self.label


def _basis_for_term(letters):
    kinds = set(letters) - {'I'}
    if len(kinds) == 1:
        return MeasurementBasis.uniform(kinds.pop(), len(letters))
    return None


def to_z_form(group, basis):
    """Переписывает термы группы в Z/I-форму после пост-вращений базиса."""
    out = []
    n = group.num_qubits
    for letters, coeff in group.items():
        chars = list(letters)
        for qubit in range(n):
            pos = n - 1 - qubit
            if chars[pos] == 'I':
                continue
            if chars[pos] != basis.axes[qubit] and not (chars[pos] == 'Z' and basis.axes[qubit] == 'I'):
                raise NonDiagonalError(
                    f'Term {letters} is not diagonal in basis {basis.label}'
                )
            chars[pos] = 'Z'
        out.append((''.join(chars), coeff))
    return PauliSum(out, n)


def group_by_basis(h):
    """
    Разбивает гамильтониан на группы, измеряемые одновременно.

    Используются фиксированные базисы all-Z, all-X, all-Y. Тождественный
    терм попадает в группу all-Z. Терм со смешанными буквами получает
    собственный базис (по букве на кубит) с предупреждением в лог.

    Returns:
        dict: {MeasurementBasis: PauliSum}, детерминированный порядок Z, X, Y, прочие
    """
    n = h.num_qubits
    buckets = {}
    for letters, coeff in h.items():
        basis = _basis_for_term(letters)
        if basis is None:
            if set(letters) == {'I'}:
                basis = MeasurementBasis.uniform('Z', n)
            else:
                basis = MeasurementBasis(tuple(
                    letter if letter != 'I' else 'Z' for letter in reversed(letters)
                ))
                logger.warning(f'Term {letters} needs a dedicated measurement basis {basis.label}')
        buckets.setdefault(basis, []).append((letters, coeff))

    order = {'Z': 0, 'X': 1, 'Y': 2}

    def sort_key(basis):
        uniform = len(set(basis.axes)) == 1
        return (0 if uniform else 1, order.get(basis.axes[0], 3), basis.label)

    return {basis: PauliSum(buckets[basis], n) for basis in sorted(buckets, key=sort_key)}


def diagonal_expectation(h_b, p):
    """
    Среднее диагонального оператора по распределению битовых строк.

    Args:
        h_b: PauliSum только из букв Z и I
        p: ProbDist (или массив) длины 2^N

    Returns:
        float: sum_i p(i) * sum_terms c * prod_k (-1)^bit_k(i)

    Raises:
        NonDiagonalError: Есть терм с X или Y
        NormalizationError: Распределение не нормировано
    """
    probs = np.asarray(getattr(p, 'probs', p), dtype=float)
    if probs.shape != (1 << h_b.num_qubits,):
        raise SizeMismatchError(
            f'Distribution of length {probs.size} does not match {h_b.num_qubits} qubits'
        )
    if not h_b.is_diagonal():
        raise NonDiagonalError('diagonal_expectation needs a PauliSum made of Z/I letters only')
    if abs(probs.sum() - 1.0) > Config.PROB_TOL:
        raise NormalizationError(f'Distribution sums to {probs.sum():.12g}, expected 1')
    indices = np.arange(probs.size, dtype=np.int64)
    total = 0.0
    for letters, coeff in h_b.items():
        _, sign, _ = term_masks(letters)
        total += coeff.real * float(np.dot(probs, parity_signs(indices, sign)))
    return total


# ===== Текстовый формат =====

def format_pauli_sum(h):
    """Одна строка на терм: '<re> <im> <буквы>', порядок лексикографический."""
    return ''.join(f'{coeff.real!r} {coeff.imag!r} {letters}\n' for letters, coeff in h.items())


def parse_pauli_sum(text):
    terms = []
    num_qubits = None
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith('#'):
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f'Line {lineno}: expected "<re> <im> <letters>", got {line!r}')
        re_part, im_part, letters = parts
        if num_qubits is None:
            num_qubits = len(letters)
        terms.append((letters, complex(float(re_part), float(im_part))))
    if num_qubits is None:
        raise ValueError('Empty Pauli sum dump')
    return PauliSum(terms, num_qubits)
