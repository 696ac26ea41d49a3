"""
Запутанная копия и восстановление вероятностей системного регистра.

Измеренный 2L-битовый исход кодирует индекс j*2^L + i: анцилла j в старших
битах, система i в младших. Анциллы всегда читаются в базисе Z.
"""
import logging
from dataclasses import dataclass
from functools import reduce
from itertools import product

import numpy as np
from scipy.optimize import minimize as scipy_minimize

from jqc.config import Config
from jqc.errors import NormalizationError, ReweightError, SizeMismatchError
from jqc.jastrow.params import log_weights
from jqc.measurement.sampling import ProbDist, make_rng
from jqc.statevector.circuit import POST_ROTATIONS, cnot, post_rotation
from jqc.statevector.engine import StateVector

logger = logging.getLogger(__name__)


def build_entangled_copy(c, basis):
    """
    Схема на 2L кубитах: исходная схема, CNOT(k -> L+k) для каждого k,
    затем пост-вращения базиса только на системных кубитах.
    """
    L = c.num_qubits
    if basis.num_qubits != L:
        raise SizeMismatchError(f'Basis on {basis.num_qubits} qubits, circuit on {L}')
    extra = [cnot(k, L + k) for k in range(L)]
    extra += [post_rotation(k, basis.axes[k]) for k in basis.rotated_qubits]
    return c.extended(2 * L, extra)


def entangled_copy_state(psi):
    """Состояние после CNOT-копии без пост-вращений: амплитуда a_i на индексе i*2^N + i."""
    n = psi.num_qubits
    idx = np.arange(1 << n, dtype=np.int64)
    amps = np.zeros(1 << (2 * n), dtype=complex)
    amps[(idx << n) | idx] = psi.amplitudes
    return StateVector(amps, 2 * n)


def _raw_values(raw):
    if hasattr(raw, 'counts'):
        return raw.counts.astype(float), raw.register_size
    return np.asarray(raw.probs, dtype=float), raw.register_size


def reweight(raw, jp, literal=False):
    """
    Умножает исход j*2^L + i на w(j) и нормирует.

    По умолчанию w(j) = exp(2 J(j)): вероятности - квадраты амплитуд, и такой вес
    соответствует проектору exp(J) на амплитудах. literal=True дает w(j) = exp(J(j)).

    Args:
        raw: CountsTable или ProbDist над 2L битами
        jp: JastrowParams над L кубитами

    Raises:
        SizeMismatchError: Регистр не равен 2 * jp.num_qubits
        ReweightError: Суммарный вес равен нулю
    """
    values, register_size = _raw_values(raw)
    L = jp.num_qubits
    if register_size != 2 * L:
        raise SizeMismatchError(
            f'Reweighting needs a {2 * L}-bit register, got {register_size} bits'
        )
    factor = 1.0 if literal else 2.0
    # Логарифмы весов сдвигаются на максимум по наблюдаемой опоре: exp не переполняется
    exponents = factor * log_weights(jp)
    observed = values.reshape(1 << L, 1 << L).sum(axis=1) > 0
    if not observed.any():
        raise ReweightError('Reweighting received an empty table')
    exponents = exponents - exponents[observed].max()
    weighted = values.reshape(1 << L, 1 << L) * np.exp(exponents)[:, None]
    total = weighted.sum()
    if not total > 0 or not np.isfinite(total):
        raise ReweightError(f'Total weight after reweighting is {total!r}')
    return ProbDist(weighted.reshape(-1) / total, register_size)


@dataclass(frozen=True, eq=False)
class LambdaMatrix:
    """2^{m/2} U_b, где U_b - тензорное произведение пост-вращений базиса."""
    entries: np.ndarray
    basis: object

    @property
    def scale_exponent(self):
        return self.basis.num_rotations


def lambda_matrix(basis):
    """
    Матрица восстановления для базиса.

    Для Z (и I) множитель единичный; m - число осей X/Y.

    Raises:
        ValueError: L больше MAX_LAMBDA_QUBITS
    """
    L = basis.num_qubits
    if L > Config.MAX_LAMBDA_QUBITS:
        raise ValueError(f'Dense Lambda matrix limited to {Config.MAX_LAMBDA_QUBITS} qubits')
    # kron(R_{L-1}, ..., R_0): кубит 0 - младший бит индекса
    factors = [POST_ROTATIONS[axis] for axis in reversed(basis.axes)]
    unitary = reduce(np.kron, factors, np.ones((1, 1), dtype=complex))
    entries = 2 ** (basis.num_rotations / 2) * unitary
    if not np.any(np.abs(entries.imag) > 0):
        entries = entries.real
    entries.setflags(write=False)
    return LambdaMatrix(entries, basis)


def _sqrt_table(p_bar, L):
    """sqrt(P[j, i]) в виде матрицы 2^L x 2^L."""
    if p_bar.register_size != 2 * L:
        raise SizeMismatchError(
            f'Reconstruction needs a {2 * L}-bit distribution, got {p_bar.register_size} bits'
        )
    return np.sqrt(np.asarray(p_bar.probs, dtype=float)).reshape(1 << L, 1 << L)


def _amplitude_matrix(p_bar, lam):
    """A(i, j) = Lambda(i, j) sqrt(P[j*2^L + i]); нулевые столбцы не дают вклада."""
    L = lam.basis.num_qubits
    return lam.entries * _sqrt_table(p_bar, L).T


def _normalized_square(amplitudes):
    probs = np.abs(amplitudes) ** 2
    total = probs.sum()
    if not total > Config.MIN_NORM:
        raise NormalizationError('Reconstructed distribution vanishes')
    return probs / total


def reconstruct_reduced(p_bar, lam, signs=None):
    """
    P(i) = |sum_j Lambda(i, j) s_j sqrt(P[j*2^L + i])|^2, затем нормировка.

    Args:
        p_bar: ProbDist над 2L битами
        lam: LambdaMatrix
        signs: SignVector или массив длины 2^L; по умолчанию все +1

    Returns:
        ProbDist над L битами
    """
    A = _amplitude_matrix(p_bar, lam)
    if signs is None:
        amplitudes = A.sum(axis=1)
    else:
        s = np.asarray(getattr(signs, 's', signs), dtype=float)
        if s.shape != (A.shape[1],):
            raise SizeMismatchError(f'{s.size} signs for {A.shape[1]} ancilla outcomes')
        amplitudes = A @ s
    return ProbDist(_normalized_square(amplitudes), lam.basis.num_qubits)


@dataclass(frozen=True, eq=False)
class SignVector:
    """
    Непрерывные знаки s в [-1, 1] и достигнутое расстояние до эталона.

    discrete - лучший найденный вектор из +-1; rounded() возвращает его,
    если он задан, иначе sign(s).
    """
    s: np.ndarray
    residual: float
    converged: bool = True
    discrete: np.ndarray = None

    def rounded(self):
        if self.discrete is not None:
            return self.discrete.copy()
        return np.where(self.s < 0, -1.0, 1.0)


def reconstruction_error(p, p0):
    """Евклидово расстояние между двумя распределениями одного регистра."""
    a = np.asarray(getattr(p, 'probs', p), dtype=float)
    b = np.asarray(getattr(p0, 'probs', p0), dtype=float)
    if a.shape != b.shape:
        raise SizeMismatchError(f'Distributions of sizes {a.size} and {b.size}')
    return float(np.sqrt(np.sum((a - b) ** 2)))


def _column_distances(Y, reference):
    """Расстояние до эталона для каждого столбца амплитуд Y."""
    probs = np.abs(Y) ** 2
    totals = probs.sum(axis=0)
    alive = totals > Config.MIN_NORM
    dist = np.sqrt(np.sum((probs / np.where(alive, totals, 1.0) - reference[:, None]) ** 2, axis=0))
    return np.where(alive, dist, 2.0)


def _flip_descent(A, reference, s):
    """
    Наискорейший спуск одиночными переворотами знаков.

    Переворот s_k дает амплитуды y - 2 s_k A[:, k], поэтому все 2^L кандидатов
    оцениваются одной матрицей. Спуск идет, пока расстояние уменьшается.
    """
    s = s.copy()
    y = A @ s
    best = float(_column_distances(y[:, None], reference)[0])
    for _ in range(Config.SIGN_FLIP_MAX_STEPS):
        candidates = _column_distances(y[:, None] - 2.0 * A * s[None, :], reference)
        k = int(np.argmin(candidates))
        if not candidates[k] < best - 1e-15:
            break
        y = y - 2.0 * s[k] * A[:, k]
        s[k] = -s[k]
        best = float(candidates[k])
    return s, best


def _project_signs(A, reference, s):
    """
    Чередующиеся проекции: модули A s заменяются на sqrt(P0) с сохранением фаз,
    новые знаки - sign(Re A^H y). Останавливается, когда знаки не меняются.
    """
    target = np.sqrt(reference)
    for _ in range(Config.SIGN_PROJECTION_STEPS):
        y = A @ s
        magnitude = np.abs(y)
        phase = np.where(magnitude > 0, y / np.where(magnitude > 0, magnitude, 1.0), 1.0)
        back = np.real(A.conj().T @ (target * phase))
        updated = np.where(back < 0, -1.0, 1.0)
        if np.array_equal(updated, s):
            break
        s = updated
    return s


def _discrete_search(A, reference, rng):
    """
    Мультистарт по векторам из +-1: проекции, затем спуск переворотами.

    Первый старт s = +1, остальные SIGN_SOLVE_RESTARTS случайные. Поиск
    прекращается, как только расстояние падает ниже SIGN_EXACT_TOL.
    Глобальный знак фиксируется условием s[0] = +1.
    """
    dim = A.shape[1]
    best_s, best = None, np.inf
    for attempt in range(Config.SIGN_SOLVE_RESTARTS + 1):
        start = np.ones(dim) if attempt == 0 else rng.choice((-1.0, 1.0), size=dim)
        s, value = _flip_descent(A, reference, _project_signs(A, reference, start))
        if value < best:
            best_s, best = s, value
        if best < Config.SIGN_EXACT_TOL:
            break
    if best_s[0] < 0:
        best_s = -best_s
    return best_s, best


def solve_signs(p_bar, p0, basis, maxiter=Config.SIGN_SOLVE_MAXITER, rng=None):
    """
    Подбор знаков амплитуд для неположительных состояний.

    Минимизирует ||P(s) - P0||. Для L <= SIGN_EXHAUSTIVE_QUBITS знаки
    перебираются полностью. Иначе сначала идет дискретный мультистарт
    (чередующиеся проекции и спуск одиночными переворотами). Если точное
    решение не найдено, запускается непрерывный поиск Powell по s в [-1, 1]^{2^L}
    из s = +1; его округление тоже уточняется переворотами, и возвращается
    лучшее из непрерывного и дискретного решений.

    Args:
        p_bar: невзвешенное распределение запутанной копии (2L бит)
        p0: распределение голой схемы в том же базисе (L бит)
        basis: MeasurementBasis
        maxiter: итерации Powell
        rng: генератор случайных стартов; по умолчанию make_rng(0)

    Returns:
        tuple: (SignVector, ProbDist над L битами)
    """
    lam = lambda_matrix(basis)
    reference = np.asarray(getattr(p0, 'probs', p0), dtype=float)
    if reference.shape != (1 << basis.num_qubits,):
        raise SizeMismatchError(
            f'Reference of length {reference.size} for {basis.num_qubits} qubits'
        )
    A = _amplitude_matrix(p_bar, lam)
    dim = A.shape[1]
    ones = np.ones(dim)

    def objective(s):
        return float(_column_distances((A @ s)[:, None], reference)[0])

    if basis.is_computational:
        # Lambda единична, знаки не влияют на результат
        return SignVector(ones, objective(ones)), reconstruct_reduced(p_bar, lam)

    if basis.num_qubits <= Config.SIGN_EXHAUSTIVE_QUBITS:
        # Глобальный знак не влияет на P, первый знак фиксирован
        candidates = (np.array((1.0,) + tail) for tail in product((1.0, -1.0), repeat=dim - 1))
        s = min(candidates, key=objective)
        signs = SignVector(s, objective(s))
        return signs, reconstruct_reduced(p_bar, lam, signs)

    if rng is None:
        rng = make_rng(0)
    discrete, discrete_residual = _discrete_search(A, reference, rng)
    if discrete_residual < Config.SIGN_EXACT_TOL:
        signs = SignVector(discrete, discrete_residual, True, discrete)
        return signs, reconstruct_reduced(p_bar, lam, signs)

    result = scipy_minimize(
        objective, ones, method='Powell', bounds=[(-1.0, 1.0)] * dim,
        options={'maxiter': maxiter, 'xtol': 1e-6, 'ftol': 1e-12},
    )
    s = np.clip(result.x, -1.0, 1.0)
    residual = objective(s)
    rounded, rounded_residual = _flip_descent(A, reference, np.where(s < 0, -1.0, 1.0))
    if rounded_residual < discrete_residual:
        discrete, discrete_residual = (-rounded if rounded[0] < 0 else rounded), rounded_residual
    converged = bool(result.success)
    if discrete_residual <= residual:
        s, residual, converged = discrete, discrete_residual, True
    if not converged:
        logger.warning(f'Sign solve in basis {basis.label} stopped early: {result.message} '
                       f'(residual {residual:.3e})')
    signs = SignVector(s, residual, converged, discrete)
    return signs, reconstruct_reduced(p_bar, lam, signs)
