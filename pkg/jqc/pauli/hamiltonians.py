"""
Модельные гамильтонианы на открытой цепочке.

Изинг:      -sum Z_k Z_k+1 + field_sign * Gamma * sum X_k
Гейзенберг: -sum Z_k Z_k+1 + Lambda * sum (X_k X_k+1 + Y_k Y_k+1)
Хаббард:    лестница из 2L кубитов, кубиты 0..L-1 - спин вверх, L..2L-1 - спин вниз.
"""
import math

import numpy as np

from jqc.pauli.algebra import PauliSum, letters_on


def _bonds(L):
    return [(k, k + 1) for k in range(L - 1)]


def build_ising(L, gamma, field_sign=-1):
    terms = []
    for a, b in _bonds(L):
        terms.append((letters_on(L, {a: 'Z', b: 'Z'}), -1.0))
    for k in range(L):
        terms.append((letters_on(L, {k: 'X'}), field_sign * gamma))
    return PauliSum(terms, L)


def build_heisenberg(L, coupling):
    terms = []
    for a, b in _bonds(L):
        terms.append((letters_on(L, {a: 'Z', b: 'Z'}), -1.0))
        terms.append((letters_on(L, {a: 'X', b: 'X'}), coupling))
        terms.append((letters_on(L, {a: 'Y', b: 'Y'}), coupling))
    return PauliSum(terms, L)


def build_hubbard(L, t, U):
    """
    Кубитная форма модели Хаббарда при половинном заполнении.

    Прыжки вдоль каждой цепочки лестницы дают -(t/2)(XX + YY),
    отталкивание на узле - (U/4) Z_i Z_i+L, плюс константа U*L/4.
    """
    n = 2 * L
    terms = []
    for offset in (0, L):
        for a, b in _bonds(L):
            terms.append((letters_on(n, {a + offset: 'X', b + offset: 'X'}), -t / 2))
            terms.append((letters_on(n, {a + offset: 'Y', b + offset: 'Y'}), -t / 2))
    for i in range(L):
        terms.append((letters_on(n, {i: 'Z', i + L: 'Z'}), U / 4))
    terms.append(('I' * n, U * L / 4))
    return PauliSum(terms, n)


def build_model(spec):
    """
    Строит гамильтониан по описанию модели.

    Args:
        spec: ModelSpec

    Returns:
        PauliSum: эрмитов гамильтониан с вещественными коэффициентами

    Raises:
        ValueError: L < 2 или нечисловые параметры
    """
    if spec.L < 2:
        raise ValueError(f'Model needs L >= 2 sites, got {spec.L}')
    params = (spec.gamma, spec.coupling, spec.t, spec.U)
    if not all(math.isfinite(value) for value in params):
        raise ValueError('Model parameters must be finite')
    if spec.kind == 'ising':
        return build_ising(spec.L, spec.gamma, spec.field_sign)
    if spec.kind == 'heisenberg':
        return build_heisenberg(spec.L, spec.coupling)
    if spec.kind == 'hubbard':
        return build_hubbard(spec.L, spec.t, spec.U)
    raise ValueError(f'Unknown model kind: {spec.kind!r}')


# ===== Фермионный оракул =====

_LOWER = np.array([[0, 1], [0, 0]], dtype=float)  # |0><1|: занятое состояние - бит 1
_Z = np.diag([1.0, -1.0])
_ID = np.eye(2)


def _annihilator(mode, num_modes):
    """Оператор уничтожения Жордана-Вигнера; кубит 0 - младший бит индекса."""
    ops = [_ID] * num_modes
    for k in range(mode):
        ops[k] = _Z
    ops[mode] = _LOWER
    matrix = np.array([[1.0]])
    for k in reversed(range(num_modes)):
        matrix = np.kron(matrix, ops[k])
    return matrix


def build_fermionic_hubbard_matrix(L, t, U):
    """
    Плотная матрица фермионной модели Хаббарда для проверки кубитной формы.

    -t sum_s sum_i (c+_i,s c_i+1,s + h.c.) + U sum_i (n_i,up - 1/2)(n_i,dn - 1/2) + U*L/4,
    моды 0..L-1 - спин вверх, L..2L-1 - спин вниз.
    """
    n = 2 * L
    dim = 1 << n
    c = [_annihilator(mode, n) for mode in range(n)]
    number = [op.T @ op for op in c]
    half = 0.5 * np.eye(dim)
    h = np.zeros((dim, dim))
    for offset in (0, L):
        for i in range(L - 1):
            p, q = i + offset, i + 1 + offset
            hop = c[p].T @ c[q]
            h -= t * (hop + hop.T)
    for i in range(L):
        h += U * (number[i] - half) @ (number[i + L] - half)
    h += U * L / 4 * np.eye(dim)
    return h
