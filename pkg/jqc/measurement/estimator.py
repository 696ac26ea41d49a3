"""
Оценка энергии JQC по выборке запутанной копии.

Для каждой группы базиса: расширенная схема, выборка, перевзвешивание,
восстановление и диагональное среднее; группы суммируются, процесс
повторяется m_rep раз с независимыми потоками генератора.
"""
import logging
from dataclasses import dataclass

import numpy as np

from jqc.errors import SizeMismatchError
from jqc.measurement.reconstruction import (
    build_entangled_copy, lambda_matrix, reconstruct_reduced, reweight, solve_signs
)
from jqc.measurement.sampling import SamplingConfig, make_rng, sample_counts
from jqc.models import ModelSpec
from jqc.pauli.algebra import diagonal_expectation, group_by_basis, to_z_form
from jqc.pauli.hamiltonians import build_model
from jqc.statevector.engine import basis_distribution, run_circuit

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SampledEnergy:
    """Среднее по повторениям, стандартная ошибка и энергии отдельных повторений."""
    mean: float
    stderr: float
    energies: tuple

    def __iter__(self):
        return iter((self.mean, self.stderr, self.energies))

    @property
    def dispersion(self):
        """Стандартное отклонение одного повторения: stderr * sqrt(m_rep)."""
        return self.stderr * np.sqrt(len(self.energies))


def basis_energy(group, raw, basis, jp, literal_weight=False, signs=None):
    """Вклад одной группы: reweight -> reconstruct -> diagonal_expectation."""
    p_bar = reweight(raw, jp, literal=literal_weight)
    p = reconstruct_reduced(p_bar, lambda_matrix(basis), signs)
    return diagonal_expectation(to_z_form(group, basis), p)


def energy_from_counts(h, tables, jp, literal_weight=False, signs=None):
    """
    Энергия по готовым таблицам отсчетов (смоделированным или внешним).

    Args:
        h: PauliSum над L кубитами
        tables: {MeasurementBasis: CountsTable над 2L битами}
        jp: JastrowParams
        signs: {MeasurementBasis: SignVector} для неположительных состояний

    Raises:
        KeyError: Нет таблицы для одного из базисов гамильтониана
    """
    signs = signs or {}
    total = 0.0
    for basis, group in group_by_basis(h).items():
        if basis not in tables:
            raise KeyError(f'No counts for measurement basis {basis.label}')
        total += basis_energy(group, tables[basis], basis, jp, literal_weight, signs.get(basis))
    return total


def _hamiltonian(model):
    return build_model(model) if isinstance(model, ModelSpec) else model


def jqc_energy_sampled(model, c, theta, jp, cfg=None, literal_weight=False,
                       sign_solve=False, initial=0):
    """
    Выборочная оценка энергии JQC.

    Args:
        model: ModelSpec или готовый PauliSum
        c: Circuit над L кубитами
        theta: углы схемы
        jp: JastrowParams над L кубитами
        cfg: SamplingConfig (выстрелы на базис, m_rep, зерно)
        literal_weight: вес exp(J) вместо exp(2J)
        sign_solve: подбирать знаки по независимому прогону голой схемы
        initial: начальная битовая строка

    Returns:
        SampledEnergy: (mean, stderr, energies), stderr = std(ddof=1)/sqrt(m_rep)
    """
    cfg = cfg or SamplingConfig()
    h = _hamiltonian(model)
    if not h.num_qubits == c.num_qubits == jp.num_qubits:
        raise SizeMismatchError('Model, circuit and Jastrow must share the register')
    groups = group_by_basis(h)

    # Точные распределения считаются один раз, повторения только сэмплируют
    extended = {basis: run_circuit(build_entangled_copy(c, basis), theta, initial).probabilities()
                for basis in groups}
    bare = {}
    if sign_solve:
        psi = run_circuit(c, theta, initial)
        bare = {basis: basis_distribution(psi, basis)
                for basis in groups if not basis.is_computational}

    energies = []
    for rep in range(cfg.m_rep):
        rng = make_rng(cfg.seed, rep)
        tables = {basis: sample_counts(extended[basis], cfg, rng) for basis in groups}
        signs = {}
        for basis, probs in bare.items():
            reference = sample_counts(probs, cfg, rng).to_dist()
            signs[basis], _ = solve_signs(tables[basis].to_dist(), reference, basis)
        energies.append(energy_from_counts(h, tables, jp, literal_weight, signs))

    energies = np.asarray(energies)
    mean = float(energies.mean())
    stderr = float(energies.std(ddof=1) / np.sqrt(energies.size)) if energies.size > 1 else 0.0
    logger.debug(f'Sampled JQC energy {mean:.6f} +- {stderr:.6f} '
                 f'({cfg.shots} shots x {cfg.m_rep} reps, {len(groups)} bases)')
    return SampledEnergy(mean, stderr, tuple(float(e) for e in energies))
