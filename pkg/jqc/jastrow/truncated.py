"""
Усеченный проектор (I + J)^s и преобразованный гамильтониан.

Энергия считается как отношение <P'HP'>/<P'P'> на состоянии схемы,
что эквивалентно ожиданию H на нормированном состоянии P'psi.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from jqc.config import Config
from jqc.errors import NormalizationError, SizeMismatchError
from jqc.jastrow.params import jastrow_operator, log_weights
from jqc.pauli.algebra import PauliSum, letters_on, multiply, power
from jqc.statevector.engine import StateVector, expectation

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TruncationSpec:
    """Порядок усечения s; практический предел Config.MAX_TRUNCATION_ORDER."""
    order: int

    def __post_init__(self):
        if int(self.order) != self.order or self.order < 0:
            raise ValueError(f'Truncation order must be a non-negative integer, got {self.order}')
        if self.order > Config.MAX_TRUNCATION_ORDER:
            raise ValueError(
                f'Truncation order {self.order} above cap {Config.MAX_TRUNCATION_ORDER}'
            )


def truncated_projector(jp, spec):
    """(I + J)^s в каноническом виде суммы Паули."""
    base = PauliSum.identity(jp.num_qubits) + jastrow_operator(jp)
    return power(base, spec.order)


def exponential_projector(jp):
    """
    Полный exp(J) как сумма Паули.

    Все Z_s Z_t коммутируют и квадрат каждого равен I, поэтому
    exp(lambda ZZ) = cosh(lambda) I + sinh(lambda) ZZ.
    """
    n = jp.num_qubits
    result = PauliSum.identity(n)
    for (s, t), lam in jp.pair_coefficients().items():
        factor = PauliSum({
            'I' * n: math.cosh(lam),
            letters_on(n, {s: 'Z', t: 'Z'}): math.sinh(lam),
        }, n)
        result = multiply(result, factor)
    return result


def term_count(jp, spec=None):
    """Число различных строк Паули в усеченном (spec) или полном (spec=None) проекторе."""
    if spec is None:
        return len(exponential_projector(jp))
    return len(truncated_projector(jp, spec))


def transformed_energy(psi, h, jp, spec):
    """
    <psi|P'HP'|psi> / <psi|P'P'|psi> с P' = (I + J)^s.

    Raises:
        SizeMismatchError: Размеры не совпадают
        NormalizationError: Знаменатель ниже MIN_DENOMINATOR (пренебрежимое перекрытие)
    """
    if not h.num_qubits == jp.num_qubits == psi.num_qubits:
        raise SizeMismatchError('State, Hamiltonian and Jastrow must share the register')
    projector = truncated_projector(jp, spec)
    numerator = expectation(multiply(multiply(projector, h), projector), psi)
    denominator = expectation(multiply(projector, projector), psi)
    if denominator <= Config.MIN_DENOMINATOR:
        raise NormalizationError(
            f'Transformed-Hamiltonian denominator {denominator:.3e} vanishes'
        )
    return numerator / denominator


def apply_truncated_exact(psi, jp, spec):
    """Нормированное состояние (I + J)^s psi, оператор диагонален: (1 + J(i))^s."""
    if jp.num_qubits != psi.num_qubits:
        raise SizeMismatchError(
            f'Jastrow on {jp.num_qubits} qubits, state on {psi.num_qubits}'
        )
    factors = (1.0 + log_weights(jp)) ** spec.order
    projected = psi.amplitudes * factors
    norm = np.linalg.norm(projected)
    if norm ** 2 <= Config.MIN_DENOMINATOR:
        raise NormalizationError('Truncated projector annihilates the state')
    return StateVector(projected / norm, psi.num_qubits)
