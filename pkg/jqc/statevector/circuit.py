"""
Схемы и применение вентилей к вектору состояния.

Кубит k соответствует биту k индекса амплитуды (кубит 0 - младший бит).
"""
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from jqc.errors import SizeMismatchError

GATE_KINDS = ('ry', 'h', 'cnot', 'post')

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)

# Пост-вращения: переводят собственный базис оси в вычислительный
POST_ROTATIONS = {
    'Z': np.eye(2, dtype=complex),
    'I': np.eye(2, dtype=complex),
    'X': HADAMARD,
    'Y': np.array([[1, -1j], [1, 1j]], dtype=complex) / math.sqrt(2),
}


def ry_matrix(angle):
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


@dataclass(frozen=True)
class Gate:
    """
    Вентиль схемы.

    kind: 'ry' (slot - номер параметра или angle - фиксированный угол),
    'h', 'cnot' (qubits = (control, target)), 'post' (axis in X/Y/Z/I).
    """
    kind: str
    qubits: tuple
    slot: int | None = None
    angle: float | None = None
    axis: str | None = None

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f'Unknown gate kind {self.kind!r}')
        object.__setattr__(self, 'qubits', tuple(self.qubits))
        if self.kind == 'cnot':
            if len(self.qubits) != 2 or self.qubits[0] == self.qubits[1]:
                raise ValueError(f'CNOT needs distinct control and target, got {self.qubits}')
        elif len(self.qubits) != 1:
            raise ValueError(f'{self.kind} acts on one qubit, got {self.qubits}')
        if self.kind == 'post' and self.axis not in POST_ROTATIONS:
            raise ValueError(f'Invalid post-rotation axis {self.axis!r}')


def ry(qubit, slot=None, angle=None):
    return Gate('ry', (qubit,), slot=slot, angle=angle)


def h(qubit):
    return Gate('h', (qubit,))


def cnot(control, target):
    return Gate('cnot', (control, target))


def post_rotation(qubit, axis):
    return Gate('post', (qubit,), axis=axis)


@dataclass(frozen=True)
class Circuit:
    """Упорядоченная последовательность вентилей с параметрическими слотами Ry."""
    num_qubits: int
    gates: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, 'gates', tuple(self.gates))
        for gate in self.gates:
            if any(q < 0 or q >= self.num_qubits for q in gate.qubits):
                raise SizeMismatchError(
                    f'Gate {gate.kind} on {gate.qubits} outside register of {self.num_qubits}'
                )
        slots = sorted(g.slot for g in self.gates if g.slot is not None)
        if slots != list(range(len(slots))):
            raise ValueError('Parameter slots must be contiguous from 0')

    @property
    def num_parameters(self):
        return sum(1 for g in self.gates if g.slot is not None)

    def count(self, kind):
        return sum(1 for g in self.gates if g.kind == kind)

    def extended(self, num_qubits, extra_gates):
        """Та же схема на большем регистре с дополнительными вентилями в конце."""
        return Circuit(num_qubits, self.gates + tuple(extra_gates))


def build_ry_cnot(L, depth):
    """
    Эвристическая схема Ry-CNOT.

    depth блоков: L вращений Ry с параметрами, затем каскад CNOT q_i -> q_i+1.

    Args:
        L: число кубитов (>= 1)
        depth: число блоков (>= 0)

    Returns:
        Circuit: схема с depth*L параметрами
    """
    if L < 1 or depth < 0:
        raise ValueError(f'Ry-CNOT needs L >= 1 and depth >= 0, got L={L}, depth={depth}')
    gates = []
    slot = 0
    for _ in range(depth):
        for q in range(L):
            gates.append(ry(q, slot=slot))
            slot += 1
        for q in range(L - 1):
            gates.append(cnot(q, q + 1))
    return Circuit(L, gates)


def build_hadamard(L):
    """Схема H на каждом кубите, без параметров."""
    return Circuit(L, [h(q) for q in range(L)])


# ===== Ядра вентилей =====

def apply_single(state, num_qubits, qubit, matrix):
    """Применяет матрицу 2x2 к кубиту; меняются только пары амплитуд, различающиеся битом qubit."""
    view = state.reshape(1 << (num_qubits - qubit - 1), 2, 1 << qubit)
    return np.einsum('ab,ibj->iaj', matrix, view).reshape(-1)


@lru_cache(maxsize=256)
def _cnot_pairs(num_qubits, control, target):
    idx = np.arange(1 << num_qubits, dtype=np.int64)
    low = idx[(((idx >> control) & 1) == 1) & (((idx >> target) & 1) == 0)]
    return low, low | (1 << target)


def apply_cnot(state, num_qubits, control, target):
    low, high = _cnot_pairs(num_qubits, control, target)
    out = state.copy()
    out[low], out[high] = state[high], state[low]
    return out


def apply_gate(state, num_qubits, gate, params=None):
    if gate.kind == 'cnot':
        return apply_cnot(state, num_qubits, *gate.qubits)
    if gate.kind == 'ry':
        angle = params[gate.slot] if gate.slot is not None else (gate.angle or 0.0)
        matrix = ry_matrix(angle)
    elif gate.kind == 'h':
        matrix = HADAMARD
    else:
        if gate.axis in ('Z', 'I'):
            return state
        matrix = POST_ROTATIONS[gate.axis]
    return apply_single(state, num_qubits, gate.qubits[0], matrix)


def run_gates(circuit, params=(), initial=0):
    """Сырой прогон схемы: массив амплитуд без обертки и нормировки."""
    params = np.asarray(params, dtype=float).reshape(-1)
    if params.size != circuit.num_parameters:
        raise SizeMismatchError(
            f'Circuit has {circuit.num_parameters} parameters, got {params.size}'
        )
    dim = 1 << circuit.num_qubits
    if not 0 <= initial < dim:
        raise ValueError(f'Initial bit-string {initial} outside register of {circuit.num_qubits}')
    state = np.zeros(dim, dtype=complex)
    state[initial] = 1.0
    for gate in circuit.gates:
        state = apply_gate(state, circuit.num_qubits, gate, params)
    return state
