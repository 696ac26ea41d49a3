"""
Команды экспериментов. Каждая команда строит задачи-строки, выполняет их
(при threads > 1 в пуле процессов), собирает результаты в порядке строк
и записывает один файл.
"""
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

import numpy as np

from jqc.config import Config
from jqc.errors import ConfigError
from jqc.experiments.writer import write_results
from jqc.jastrow.params import JastrowParams, load_class_map
from jqc.measurement.estimator import energy_from_counts, jqc_energy_sampled
from jqc.measurement.reconstruction import (
    entangled_copy_state, lambda_matrix, reconstruct_reduced, reconstruction_error, solve_signs
)
from jqc.measurement.sampling import ProbDist, SamplingConfig, make_rng, read_counts, sample_counts
from jqc.models import ResultRecord, relative_error
from jqc.optimizer.pair import computational_gain, optimize_pair
from jqc.optimizer.vqe import minimize, write_trace
from jqc.pauli.algebra import MeasurementBasis, format_pauli_sum, group_by_basis
from jqc.pauli.hamiltonians import build_model
from jqc.statevector.circuit import build_hadamard, build_ry_cnot
from jqc.statevector.engine import (
    apply_jastrow_exact, basis_distribution, exact_ground_state, expectation,
    random_real_state, run_circuit
)

logger = logging.getLogger(__name__)


def row_seed(seed, row):
    """Собственный поток генератора для каждой строки сетки."""
    return seed ^ (row << 20)


def run_rows(worker, tasks, threads=1):
    """Выполняет задачи по порядку; результаты всегда в порядке задач."""
    if threads <= 1 or len(tasks) <= 1:
        return [worker(task) for task in tasks]
    logger.info(f'Running {len(tasks)} rows on {threads} processes')
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(worker, tasks))


def jastrow_for(cfg, model):
    """Параметры Ястрова: авто-карта классов модели или файл переопределения."""
    if cfg.jastrow_source == 'auto':
        return JastrowParams.for_model(model)
    num_qubits, class_map = load_class_map(cfg.jastrow_path)
    if num_qubits != model.num_qubits:
        raise ConfigError(
            f'jastrow: class map covers {num_qubits} qubits, model has {model.num_qubits}',
            cfg.source,
        )
    return JastrowParams.from_class_map(num_qubits, class_map)


def _deadline(cfg):
    return time.monotonic() + cfg.row_timeout


def _finish(cfg, records, traces=()):
    if cfg.output:
        write_results(records, cfg.output, cfg.kind, cfg.seed, cfg.config_sha256, cfg.json_mirror)
    if cfg.trace_output and traces:
        write_trace([entry for trace in traces for entry in trace], cfg.trace_output)
    return records


def _label_trace(trace, row):
    return [replace(entry, stage=f'row{row}/{entry.stage}') for entry in trace]


# ===== Оптимизационные строки (sweep, gain) =====

def _pair_row(task):
    cfg, row, model, depth, extra = task
    started = time.perf_counter()
    e_exact, _ = exact_ground_state(build_model(model))
    optimizer = replace(cfg.optimizer, seed=row_seed(cfg.seed, row))
    pair = optimize_pair(model, depth, optimizer, jp=jastrow_for(cfg, model),
                         truncation=cfg.truncation, initial=cfg.initial_state,
                         deadline=_deadline(cfg))
    gain = computational_gain(pair.e_c, pair.e_jqc, e_exact)
    values = dict(extra)
    values.update({
        'model': model.kind,
        'L': model.L,
        'depth': depth,
        'e_c': pair.e_c,
        'e_jqc': pair.e_jqc,
        'e_exact': e_exact,
        'rel_err_c': relative_error(pair.e_c, e_exact),
        'rel_err_jqc': relative_error(pair.e_jqc, e_exact),
        'gain': gain.gain,
        'gain_capped': gain.capped,
        'lambdas': pair.params_jqc.lambdas,
        'status': pair.status,
        'wall_time': time.perf_counter() - started,
    })
    if pair.status == 'timeout':
        logger.warning(f'Row {row} ({model.kind} L={model.L} d={depth}) hit the '
                       f'{cfg.row_timeout:.0f} s limit, best-so-far energies kept')
    return ResultRecord(cfg.kind, values), _label_trace(pair.trace, row)


def _collect(cfg, tasks, worker):
    results = run_rows(worker, tasks, cfg.threads)
    records = [record for record, _ in results]
    traces = [trace for _, trace in results]
    return _finish(cfg, records, traces)


def cmd_sweep(cfg):
    """Пара оптимизаций и выигрыш для каждой точки сетки параметра и каждой глубины."""
    if not cfg.depths:
        raise ConfigError('depths: sweep needs at least one depth', cfg.source)
    tasks = []
    for value in cfg.grid_values:
        model = cfg.model.with_param(cfg.grid_param, value)
        for depth in cfg.depths:
            extra = {'param': cfg.grid_param, 'value': float(value)}
            tasks.append((cfg, len(tasks), model, depth, extra))
    logger.info(f'Sweep over {cfg.grid_param}: {len(tasks)} rows')
    return _collect(cfg, tasks, _pair_row)


def cmd_gain(cfg):
    """Выигрыш в зависимости от глубины и размера, точный exp(J) или (I + J)^s."""
    tasks = []
    for L in cfg.sizes:
        model = cfg.model.with_size(L)
        for depth in cfg.depths:
            extra = {'mode': cfg.mode, 'order': cfg.order if cfg.mode == 'truncated' else 0}
            tasks.append((cfg, len(tasks), model, depth, extra))
    logger.info(f'Gain ({cfg.mode}): {len(tasks)} rows')
    return _collect(cfg, tasks, _pair_row)


# ===== Сканы по lambda (lambda-scan, dispersion) =====

def base_point(cfg, model):
    """
    Опорная точка скана: схема, углы и базовые lambda.

    Для схемы Ry-CNOT углы и lambda берутся из совместной оптимизации; для
    схемы Адамара оптимизируется только lambda. Явный base_lambda в конфигурации
    заменяет оптимизированные lambda.
    """
    jp = jastrow_for(cfg, model)
    if cfg.base_lambda is not None and len(cfg.base_lambda) != jp.num_classes:
        raise ConfigError(
            f'base_lambda: {len(cfg.base_lambda)} values for {jp.num_classes} Jastrow classes',
            cfg.source,
        )
    h = build_model(model)
    if cfg.circuit == 'hadamard':
        circuit = build_hadamard(model.num_qubits)
        theta = ()
        if cfg.base_lambda is not None:
            lambdas = cfg.base_lambda
        else:
            psi = run_circuit(circuit, theta, cfg.initial_state)
            bound = cfg.optimizer.lambda_bound
            result = minimize(
                lambda lam: expectation(h, apply_jastrow_exact(psi, jp.with_lambdas(lam))),
                np.zeros(jp.num_classes), cfg.optimizer,
                bounds=[(-bound, bound)] * jp.num_classes, deadline=_deadline(cfg),
            )
            lambdas = tuple(result.x)
    else:
        circuit = build_ry_cnot(model.num_qubits, cfg.depth)
        pair = optimize_pair(model, cfg.depth, cfg.optimizer, circuit=circuit, jp=jp,
                             initial=cfg.initial_state, deadline=_deadline(cfg))
        theta = pair.params_jqc.theta
        lambdas = cfg.base_lambda if cfg.base_lambda is not None else pair.params_jqc.lambdas
    logger.info(f'Scan base point: lambdas={[round(x, 6) for x in lambdas]}')
    return circuit, tuple(theta), jp.with_lambdas(lambdas)


def _scan_depth(cfg):
    return 0 if cfg.circuit == 'hadamard' else cfg.depth


def _scan_row(task):
    cfg, row, model, circuit, theta, jp_base, scale, sampling = task
    started = time.perf_counter()
    h = build_model(model)
    e_exact, _ = exact_ground_state(h)
    jp = jp_base.scaled(scale)
    psi = run_circuit(circuit, theta, cfg.initial_state)
    e_c = expectation(h, psi)
    e_jqc_exact = expectation(h, apply_jastrow_exact(psi, jp))
    sampled = jqc_energy_sampled(h, circuit, theta, jp, sampling, cfg.literal_weight,
                                 cfg.sign_solve, cfg.initial_state)
    values = {
        'model': model.kind,
        'L': model.L,
        'depth': _scan_depth(cfg),
        'scale': float(scale),
        'shots': sampling.shots,
        'm_rep': sampling.m_rep,
        'e_jqc_exact': e_jqc_exact,
        'e_sampled': sampled.mean,
        'stderr': sampled.stderr,
        'e_exact': e_exact,
        'wall_time': time.perf_counter() - started,
    }
    if cfg.kind == 'dispersion':
        values['dispersion'] = sampled.dispersion
    else:
        values['e_c'] = e_c
        values['lambdas'] = jp.lambdas
    return ResultRecord(cfg.kind, values)


def _counts_rows(cfg, model, circuit, theta, jp_base):
    """Строки скана по готовым файлам отсчетов вместо моделирования выборки."""
    tables = {}
    for path in cfg.counts:
        table, label = read_counts(path)
        if table.register_size != 2 * model.num_qubits:
            raise ConfigError(f'counts: {path} has {table.register_size} bits, '
                              f'expected {2 * model.num_qubits}', cfg.source)
        tables[MeasurementBasis.from_label(label)] = table
    h = build_model(model)
    e_exact, _ = exact_ground_state(h)
    psi = run_circuit(circuit, theta, cfg.initial_state)
    shots = min(table.shots for table in tables.values())
    records = []
    for scale in cfg.lambda_grid:
        started = time.perf_counter()
        jp = jp_base.scaled(scale)
        records.append(ResultRecord(cfg.kind, {
            'model': model.kind,
            'L': model.L,
            'depth': _scan_depth(cfg),
            'scale': float(scale),
            'shots': shots,
            'm_rep': 1,
            'e_c': expectation(h, psi),
            'e_jqc_exact': expectation(h, apply_jastrow_exact(psi, jp)),
            'e_sampled': energy_from_counts(h, tables, jp, cfg.literal_weight),
            'stderr': 0.0,
            'e_exact': e_exact,
            'lambdas': jp.lambdas,
            'wall_time': time.perf_counter() - started,
        }))
    return records


def cmd_lambda_scan(cfg):
    """Точная и выборочная энергии JQC вдоль lambda = scale * lambda_opt."""
    model = cfg.model
    circuit, theta, jp_base = base_point(cfg, model)
    if cfg.counts:
        return _finish(cfg, _counts_rows(cfg, model, circuit, theta, jp_base))
    if not cfg.shots or min(cfg.shots) < 1:
        raise ConfigError('shots: lambda-scan needs positive shot counts', cfg.source)
    tasks = []
    for scale in cfg.lambda_grid:
        for shots in cfg.shots:
            sampling = SamplingConfig(shots, cfg.sampling.m_rep, row_seed(cfg.seed, len(tasks)))
            tasks.append((cfg, len(tasks), model, circuit, theta, jp_base, scale, sampling))
    return _finish(cfg, run_rows(_scan_row, tasks, cfg.threads))


def cmd_dispersion(cfg):
    """Разброс выборочной энергии при фиксированном бюджете измерений."""
    model = cfg.model
    circuit, theta, jp_base = base_point(cfg, model)
    budget = cfg.shots[0] if cfg.shots else Config.DISPERSION_BUDGET
    num_bases = len(group_by_basis(build_model(model)))
    shots = max(budget // num_bases, 1)
    logger.info(f'Dispersion: {budget} measurements over {num_bases} bases, {shots} shots each')
    tasks = []
    for scale in cfg.lambda_grid:
        sampling = SamplingConfig(shots, cfg.sampling.m_rep, row_seed(cfg.seed, len(tasks)))
        tasks.append((cfg, len(tasks), model, circuit, theta, jp_base, scale, sampling))
    return _finish(cfg, run_rows(_scan_row, tasks, cfg.threads))


# ===== Восстановление на случайных вещественных состояниях =====

def _worst_basis_error(tables, references, bases, signs):
    """Наибольшая ошибка eps_b по базисам при общем векторе знаков."""
    return max(
        reconstruction_error(reconstruct_reduced(tables[b], lambda_matrix(b), signs), references[b])
        for b in bases
    )


def _reconstruct_row(task):
    cfg, row, state_row, model, state, shots = task
    started = time.perf_counter()
    h = build_model(model)
    e_exact, _ = exact_ground_state(h)
    n = model.num_qubits
    psi = random_real_state(n, make_rng(row_seed(cfg.seed, state_row)))
    copy = entangled_copy_state(psi)
    rng = make_rng(row_seed(cfg.seed, row), 1)
    sampling = SamplingConfig(shots=max(shots, 1), m_rep=1, seed=0)

    groups = group_by_basis(h)
    tables, references, exact_references = {}, {}, {}
    for basis in groups:
        p_bar = basis_distribution(copy, basis)
        p0 = basis_distribution(psi, basis)
        exact_references[basis] = ProbDist.from_weights(p0, n)
        if shots:
            tables[basis] = sample_counts(p_bar, sampling, rng).to_dist()
            references[basis] = sample_counts(p0, sampling, rng).to_dist()
        else:
            tables[basis] = ProbDist.from_weights(p_bar, 2 * n)
            references[basis] = exact_references[basis]

    # Один вектор знаков на все повернутые базисы: энергия остается отношением Рэлея
    rotated = [basis for basis in groups if not basis.is_computational]
    signs, eps_b = {}, 0.0
    if rotated:
        candidates = [solve_signs(tables[b], references[b], b, rng=rng)[0].rounded() for b in rotated]
        rounded, eps_b = min(
            ((s, _worst_basis_error(tables, exact_references, rotated, s)) for s in candidates),
            key=lambda pair: pair[1],
        )
        signs = {basis: rounded for basis in rotated}

    jp = jastrow_for(cfg, model)
    e_reconstructed = energy_from_counts(h, tables, jp, cfg.literal_weight, signs)
    bound = cfg.optimizer.lambda_bound
    jastrow = minimize(
        lambda lam: energy_from_counts(h, tables, jp.with_lambdas(lam), cfg.literal_weight, signs),
        np.zeros(jp.num_classes), replace(cfg.optimizer, seed=row_seed(cfg.seed, row)),
        bounds=[(-bound, bound)] * jp.num_classes, deadline=_deadline(cfg),
    )
    return ResultRecord('reconstruct', {
        'model': model.kind,
        'L': model.L,
        'state': state,
        'shots': shots,
        'e_direct': expectation(h, psi),
        'e_reconstructed': e_reconstructed,
        'e_jastrow': jastrow.fun,
        'e_exact': e_exact,
        'eps_b': eps_b,
        'wall_time': time.perf_counter() - started,
    })


def cmd_reconstruct_bench(cfg):
    """Случайные вещественные состояния: прямая, восстановленная и JQC энергии, ошибка eps_b."""
    tasks = []
    state_row = 0
    for L in cfg.sizes:
        model = cfg.model.with_size(L)
        for state in range(cfg.states_per_size):
            for shots in cfg.shots:
                tasks.append((cfg, len(tasks), state_row, model, state, shots))
            state_row += 1
    logger.info(f'Reconstruction bench: {len(tasks)} rows')
    return _finish(cfg, run_rows(_reconstruct_row, tasks, cfg.threads))


# ===== Дамп гамильтониана =====

def cmd_dump_hamiltonian(cfg):
    """Текстовый дамп гамильтониана модели; при заданном output пишет в файл."""
    text = format_pauli_sum(build_model(cfg.model))
    if cfg.output:
        with open(cfg.output, 'w', encoding='utf-8') as f:
            f.write(text)
        logger.info(f'Hamiltonian dump written to {cfg.output}')
    return text


COMMANDS = {
    'sweep': cmd_sweep,
    'gain': cmd_gain,
    'lambda-scan': cmd_lambda_scan,
    'reconstruct': cmd_reconstruct_bench,
    'dispersion': cmd_dispersion,
    'dump-h': cmd_dump_hamiltonian,
}
