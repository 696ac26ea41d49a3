"""
Вектор состояния: ожидания, точное применение оператора Ястрова и оракул точной диагонализации.
"""
import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse.linalg as sparse_linalg

from jqc.config import Config
from jqc.errors import (
    ConvergenceError, NormalizationError, NotHermitianError, SizeMismatchError
)
from jqc.jastrow.params import log_weights
from jqc.pauli.algebra import to_sparse
from jqc.statevector.circuit import POST_ROTATIONS, apply_single, run_gates

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class StateVector:
    """2^N комплексных амплитуд; публичные операции возвращают нормированные состояния."""
    amplitudes: np.ndarray
    num_qubits: int

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != 1 << self.num_qubits:
            raise SizeMismatchError(
                f'{amps.size} amplitudes do not fit {self.num_qubits} qubits'
            )
        amps.setflags(write=False)
        object.__setattr__(self, 'amplitudes', amps)

    @classmethod
    def from_amplitudes(cls, amplitudes, normalize=True):
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        num_qubits = int(round(np.log2(amps.size)))
        if normalize:
            norm = np.linalg.norm(amps)
            if norm < Config.MIN_NORM:
                raise NormalizationError('Cannot normalize a vanishing state')
            amps = amps / norm
        return cls(amps, num_qubits)

    @classmethod
    def basis_state(cls, num_qubits, index=0):
        amps = np.zeros(1 << num_qubits, dtype=complex)
        amps[index] = 1.0
        return cls(amps, num_qubits)

    @property
    def norm(self):
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self):
        return np.abs(self.amplitudes) ** 2

    def is_real(self, tol=1e-12):
        return bool(np.all(np.abs(self.amplitudes.imag) <= tol))

    def is_positive(self, tol=1e-12):
        """Все амплитуды вещественны и неотрицательны (с точностью до глобального знака)."""
        if not self.is_real(tol):
            return False
        real = self.amplitudes.real
        return bool(np.all(real >= -tol) or np.all(real <= tol))


def run_circuit(circuit, params=(), initial=0):
    """
    Прогоняет схему из битовой строки initial (по умолчанию |0...0>).

    Raises:
        SizeMismatchError: Число параметров не совпадает со слотами схемы
    """
    return StateVector.from_amplitudes(run_gates(circuit, params, initial))


def random_real_state(num_qubits, rng):
    """Случайное вещественное состояние с гауссовыми амплитудами."""
    return StateVector.from_amplitudes(rng.standard_normal(1 << num_qubits))


def expectation(h, psi):
    """
    <psi|H|psi> для эрмитовой суммы Паули.

    Raises:
        SizeMismatchError: Разные размеры
        NotHermitianError: Оператор не эрмитов или мнимый остаток больше IMAG_ERROR_TOL
    """
    if h.num_qubits != psi.num_qubits:
        raise SizeMismatchError(
            f'Operator on {h.num_qubits} qubits, state on {psi.num_qubits}'
        )
    if not h.is_hermitian():
        raise NotHermitianError('expectation needs a Hermitian PauliSum (real coefficients)')
    amps = psi.amplitudes
    value = np.vdot(amps, to_sparse(h) @ amps)
    residue = abs(value.imag)
    if residue > Config.IMAG_ERROR_TOL:
        raise NotHermitianError(f'Expectation has imaginary part {value.imag:.3e}')
    if residue > Config.IMAG_TOL:
        logger.warning(f'Discarding imaginary expectation residue {value.imag:.3e}')
    return float(value.real)


def apply_jastrow_exact(psi, jp):
    """
    Точное применение exp(J) к состоянию с последующей нормировкой.

    Амплитуда i умножается на exp(sum_{s<t} lambda z_s z_t); знаки амплитуд не меняются.

    Raises:
        SizeMismatchError: Регистр параметров не совпадает с состоянием
        NormalizationError: Норма результата ниже MIN_NORM (исчезающее перекрытие)
    """
    if jp.num_qubits != psi.num_qubits:
        raise SizeMismatchError(
            f'Jastrow on {jp.num_qubits} qubits, state on {psi.num_qubits}'
        )
    projected = psi.amplitudes * np.exp(log_weights(jp))
    norm = np.linalg.norm(projected)
    if not norm > Config.MIN_NORM:
        raise NormalizationError('Jastrow-projected state has vanishing norm')
    return StateVector(projected / norm, psi.num_qubits)


def exact_ground_state(h):
    """
    Минимальное собственное значение и собственный вектор.

    Плотный решатель до DENSE_SOLVER_MAX_QUBITS кубитов, выше - итерационный eigsh.

    Returns:
        tuple: (энергия, StateVector)

    Raises:
        ValueError: Регистр больше MAX_QUBITS
        ConvergenceError: eigsh не сошелся за EIGSH_MAXITER итераций
    """
    if h.num_qubits > Config.MAX_QUBITS:
        raise ValueError(f'Exact diagonalization limited to {Config.MAX_QUBITS} qubits')
    matrix = to_sparse(h)
    if h.num_qubits <= Config.DENSE_SOLVER_MAX_QUBITS:
        values, vectors = np.linalg.eigh(matrix.toarray())
        energy, vector = values[0], vectors[:, 0]
    else:
        try:
            values, vectors = sparse_linalg.eigsh(
                matrix, k=1, which='SA', tol=Config.EIGSH_TOL, maxiter=Config.EIGSH_MAXITER
            )
        except sparse_linalg.ArpackNoConvergence as e:
            raise ConvergenceError(f'Iterative eigensolver did not converge: {e}')
        energy, vector = values[0], vectors[:, 0]
    # Глобальная фаза: наибольшая компонента вещественна и положительна
    vector = vector * np.exp(-1j * np.angle(vector[np.argmax(np.abs(vector))]))
    logger.debug(f'Exact ground energy {energy:.12f} on {h.num_qubits} qubits')
    return float(energy), StateVector.from_amplitudes(vector)


def rotate_to_basis(psi, basis):
    """Применяет пост-вращения базиса к первым basis.num_qubits кубитам состояния."""
    if basis.num_qubits > psi.num_qubits:
        raise SizeMismatchError(
            f'Basis on {basis.num_qubits} qubits, state on {psi.num_qubits}'
        )
    amps = np.array(psi.amplitudes)
    for qubit in basis.rotated_qubits:
        amps = apply_single(amps, psi.num_qubits, qubit, POST_ROTATIONS[basis.axes[qubit]])
    return StateVector(amps, psi.num_qubits)


def basis_distribution(psi, basis):
    """Точное распределение исходов голой схемы в базисе (без копии и без Ястрова)."""
    return rotate_to_basis(psi, basis).probabilities()


# ===== Отладочный дамп =====

def format_state(psi, threshold=1e-12):
    """Строки 'index re im' для амплитуд с модулем выше threshold."""
    lines = []
    for index in np.flatnonzero(np.abs(psi.amplitudes) > threshold):
        amp = complex(psi.amplitudes[index])
        lines.append(f'{index} {amp.real!r} {amp.imag!r}\n')
    return ''.join(lines)


def dump_state(psi, path):
    with open(path, 'w', encoding='utf-8') as f:
        f.write(format_state(psi))
    logger.info(f'State dump written to {path}')
