"""
Парные оптимизации: только схема и схема вместе с Ястровым, выигрыш.
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from jqc.config import Config
from jqc.jastrow.params import JastrowParams
from jqc.jastrow.truncated import apply_truncated_exact
from jqc.measurement.sampling import make_rng
from jqc.models import GainRecord
from jqc.optimizer.vqe import OptimizerConfig, ParameterVector, minimize
from jqc.pauli.hamiltonians import build_model
from jqc.statevector.circuit import build_ry_cnot
from jqc.statevector.engine import apply_jastrow_exact, expectation, run_circuit

logger = logging.getLogger(__name__)


@dataclass
class PairResult:
    """Лучшие результаты обеих оптимизаций."""
    e_c: float
    theta_c: np.ndarray
    e_jqc: float
    params_jqc: ParameterVector
    trace: list = field(default_factory=list)
    status: str = 'ok'

    def __iter__(self):
        return iter((self.e_c, self.theta_c, self.e_jqc, self.params_jqc))


def circuit_energy(h, circuit, initial=0):
    """Целевая функция theta -> <psi_c|H|psi_c>."""
    def energy(theta):
        return expectation(h, run_circuit(circuit, theta, initial))
    return energy


def jqc_energy(h, circuit, jp, truncation=None, initial=0):
    """
    Целевая функция [theta, lambda] -> энергия проецированного состояния.

    truncation=None: точный exp(J); иначе (I + J)^s.
    """
    num_theta = circuit.num_parameters

    def energy(x):
        params = ParameterVector.split(x, num_theta)
        psi = run_circuit(circuit, params.theta, initial)
        jp_x = jp.with_lambdas(params.lambdas)
        if truncation is None:
            projected = apply_jastrow_exact(psi, jp_x)
        else:
            projected = apply_truncated_exact(psi, jp_x, truncation)
        return expectation(h, projected)
    return energy


def _best(results):
    return min(results, key=lambda r: r.fun)


def optimize_pair(model, depth, cfg=None, circuit=None, jp=None, truncation=None,
                  initial=0, deadline=None):
    """
    Оптимизация схемы без Ястрова и с ним, по cfg.restarts перезапусков каждая.

    Углы стартуют из U[-pi, pi], lambda из нуля (со сдвигами +-0.05 на
    перезапусках после первого). В режиме 'joint' добавляется перезапуск
    JQC из (theta_c*, 0), что гарантирует E_jqc <= E_c.

    Args:
        model: ModelSpec
        depth: глубина схемы Ry-CNOT (игнорируется, если передан circuit)
        cfg: OptimizerConfig
        circuit: готовая схема вместо Ry-CNOT
        jp: JastrowParams; по умолчанию карта классов модели
        truncation: TruncationSpec: проектор (I + J)^s вместо exp(J)
        initial: начальная битовая строка
        deadline: time.monotonic() предел для всей пары

    Returns:
        PairResult: (E_c, theta_c, E_jqc, ParameterVector)
    """
    cfg = cfg or OptimizerConfig()
    h = build_model(model)
    circuit = circuit or build_ry_cnot(model.num_qubits, depth)
    jp = jp or JastrowParams.for_model(model)
    num_theta = circuit.num_parameters
    theta_bounds = [(None, None)] * num_theta
    lambda_bounds = [(-cfg.lambda_bound, cfg.lambda_bound)] * jp.num_classes

    circuit_results = []
    for r in range(cfg.restarts):
        rng = make_rng(cfg.seed, r)
        theta0 = rng.uniform(-math.pi, math.pi, num_theta)
        circuit_results.append(minimize(
            circuit_energy(h, circuit, initial), theta0, cfg, bounds=theta_bounds or None,
            restart=r, label='circuit', deadline=deadline,
        ))
    best_c = _best(circuit_results)

    starts = []
    if cfg.mode == 'joint':
        starts.append(np.concatenate([best_c.x, np.zeros(jp.num_classes)]))
    for r in range(cfg.restarts):
        rng = make_rng(cfg.seed, cfg.restarts + r)
        theta0 = rng.uniform(-math.pi, math.pi, num_theta)
        lambda0 = np.zeros(jp.num_classes)
        if r > 0:
            lambda0 = rng.uniform(-Config.LAMBDA_PERTURBATION, Config.LAMBDA_PERTURBATION,
                                  jp.num_classes)
        starts.append(np.concatenate([theta0, lambda0]))

    objective = jqc_energy(h, circuit, jp, truncation, initial)
    jqc_results = [
        minimize(objective, x0, cfg, bounds=theta_bounds + lambda_bounds,
                 restart=r, label='jqc', deadline=deadline)
        for r, x0 in enumerate(starts)
    ]
    best_j = _best(jqc_results)

    results = circuit_results + jqc_results
    status = 'timeout' if any(r.status == 'timeout' for r in results) else (
        'budget' if any(r.status == 'budget' for r in results) else 'ok')
    trace = [entry for r in results for entry in r.trace]
    logger.info(f'{model.kind} L={model.L} d={depth}: E_c={best_c.fun:.10f} '
                f'E_jqc={best_j.fun:.10f} ({status})')
    return PairResult(best_c.fun, best_c.x, best_j.fun,
                      ParameterVector.split(best_j.x, num_theta), trace, status)


def computational_gain(e_c, e_jqc, e_exact, tol=Config.VARIATIONAL_TOL):
    """
    (E_c - E_exact) / (E_jqc - E_exact).

    Если знаменатель меньше GAIN_TOL, выигрыш равен GAIN_CAP с флагом capped.

    Raises:
        ValueError: Энергия ниже точной больше чем на tol
    """
    for name, energy in (('E_c', e_c), ('E_jqc', e_jqc)):
        if energy < e_exact - tol:
            raise ValueError(f'{name}={energy!r} lies below the exact energy {e_exact!r}')
    numerator = max(e_c - e_exact, 0.0)
    denominator = e_jqc - e_exact
    if denominator < Config.GAIN_TOL:
        return GainRecord(e_c, e_jqc, e_exact, Config.GAIN_CAP, capped=True)
    return GainRecord(e_c, e_jqc, e_exact, numerator / denominator)
