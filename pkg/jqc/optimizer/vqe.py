"""
Двухстадийная локальная минимизация: COBYLA с границами, затем L-BFGS-B
с центральными конечными разностями.

Возвращается лучшая из всех вычисленных точек, поэтому f* <= f(x0).
"""
import csv
import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize as scipy_minimize

from jqc.config import Config
from jqc.errors import ObjectiveError

logger = logging.getLogger(__name__)

OPTIMIZER_MODES = ('joint', 'independent')


@dataclass(frozen=True)
class OptimizerConfig:
    """Бюджеты обеих стадий, число перезапусков и зерно."""
    max_evaluations: int = Config.MAX_EVALUATIONS
    gtol: float = Config.GTOL
    fd_step: float = Config.FD_STEP
    restarts: int = Config.RESTARTS
    seed: int = 0
    mode: str = 'joint'
    bfgs_maxiter: int = Config.BFGS_MAXITER
    lambda_bound: float = Config.LAMBDA_BOUND

    def __post_init__(self):
        if self.max_evaluations < 1 or self.bfgs_maxiter < 0:
            raise ValueError('Optimizer budgets must be positive')
        if self.restarts < 1:
            raise ValueError(f'restarts must be >= 1, got {self.restarts}')
        if not self.fd_step > 0 or not self.gtol > 0:
            raise ValueError('fd_step and gtol must be positive')
        if self.mode not in OPTIMIZER_MODES:
            raise ValueError(f'Unknown optimizer mode {self.mode!r}; expected one of {OPTIMIZER_MODES}')
        if self.seed < 0:
            raise ValueError('seed must be non-negative')


@dataclass(frozen=True)
class ParameterVector:
    """Углы схемы и коэффициенты Ястрова одним плоским вектором [theta, lambda]."""
    theta: tuple
    lambdas: tuple = ()

    @classmethod
    def split(cls, x, num_theta):
        x = np.asarray(x, dtype=float)
        return cls(tuple(x[:num_theta]), tuple(x[num_theta:]))

    @property
    def layout(self):
        return {'theta': slice(0, len(self.theta)),
                'lambda': slice(len(self.theta), len(self.theta) + len(self.lambdas))}

    def flat(self):
        return np.array(self.theta + self.lambdas, dtype=float)


@dataclass(frozen=True)
class TraceEntry:
    restart: int
    evaluation: int
    stage: str
    f: float
    params: tuple


@dataclass
class OptimizeResult:
    x: np.ndarray
    fun: float
    trace: list = field(default_factory=list)
    status: str = 'ok'
    evaluations: int = 0


class _DeadlineReached(Exception):
    pass


class _TrackedObjective:
    """Обертка: проверка конечности, запись трассы и лучшей точки."""

    def __init__(self, objective, restart, label, deadline):
        self.objective = objective
        self.restart = restart
        self.label = label
        self.deadline = deadline
        self.stage = 'start'
        self.trace = []
        self.best_x = None
        self.best_f = math.inf

    def __call__(self, x):
        # Первая точка вычисляется всегда, чтобы результат был определен
        if self.trace and self.deadline is not None and time.monotonic() > self.deadline:
            raise _DeadlineReached()
        x = np.array(x, dtype=float)
        f = float(self.objective(x))
        if not math.isfinite(f):
            raise ObjectiveError(f'Objective returned {f!r} at evaluation {len(self.trace)}')
        stage = f'{self.label}/{self.stage}' if self.label else self.stage
        self.trace.append(TraceEntry(self.restart, len(self.trace), stage, f, tuple(x)))
        if f < self.best_f:
            self.best_f, self.best_x = f, x
        return f


def central_gradient(objective, x, step):
    """Градиент центральными разностями с шагом step по каждой координате."""
    x = np.asarray(x, dtype=float)
    grad = np.zeros_like(x)
    for k in range(x.size):
        shift = np.zeros_like(x)
        shift[k] = step
        grad[k] = (objective(x + shift) - objective(x - shift)) / (2 * step)
    return grad


def minimize(objective, x0, cfg=None, bounds=None, restart=0, label='', deadline=None):
    """
    Минимизирует objective из x0.

    Args:
        objective: функция вектора параметров -> float
        x0: начальная точка
        cfg: OptimizerConfig
        bounds: список (lo, hi) или None по координатам
        restart: номер перезапуска для трассы
        label: префикс стадии в трассе
        deadline: время time.monotonic(), после которого поиск прерывается

    Returns:
        OptimizeResult: лучшая точка, значение, трасса и статус ('ok', 'budget', 'timeout')

    Raises:
        ObjectiveError: Нечисловое значение целевой функции
    """
    cfg = cfg or OptimizerConfig()
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    tracked = _TrackedObjective(objective, restart, label, deadline)
    tracked(x0)
    if x0.size == 0:
        return OptimizeResult(x0, tracked.best_f, tracked.trace, 'ok', 1)

    status = 'ok'
    try:
        tracked.stage = 'cobyla'
        stage1 = scipy_minimize(
            tracked, x0, method='COBYLA', bounds=bounds,
            options={'maxiter': cfg.max_evaluations, 'rhobeg': 0.5, 'tol': 1e-12},
        )
        if stage1.status == 2:
            status = 'budget'
            logger.warning(f'COBYLA exhausted {cfg.max_evaluations} evaluations '
                           f'(restart {restart}, best {tracked.best_f:.10f})')

        if cfg.bfgs_maxiter > 0:
            tracked.stage = 'bfgs'
            scipy_minimize(
                tracked, tracked.best_x, method='L-BFGS-B', bounds=bounds,
                jac=lambda x: central_gradient(tracked, x, cfg.fd_step),
                options={'maxiter': cfg.bfgs_maxiter, 'gtol': cfg.gtol, 'ftol': 1e-15},
            )
    except _DeadlineReached:
        status = 'timeout'
        logger.warning(f'Optimization stopped at deadline (restart {restart}, '
                       f'{len(tracked.trace)} evaluations, best {tracked.best_f:.10f})')

    return OptimizeResult(tracked.best_x, tracked.best_f, tracked.trace, status, len(tracked.trace))


def write_trace(trace, path):
    """CSV: restart, evaluation, stage, f, p0, p1, ..."""
    width = max((len(entry.params) for entry in trace), default=0)
    with open(path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f)
        writer.writerow(['restart', 'evaluation', 'stage', 'f'] + [f'p{k}' for k in range(width)])
        for entry in trace:
            writer.writerow([entry.restart, entry.evaluation, entry.stage, repr(entry.f)]
                            + [repr(float(p)) for p in entry.params])
    logger.info(f'Optimization trace with {len(trace)} evaluations written to {path}')
