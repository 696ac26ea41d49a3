"""
Загрузка и проверка JSON-описания эксперимента.

Ошибки сообщаются в виде '<файл>:<строка>: <ключ>: <проблема>'.
"""
import hashlib
import json
import logging
import re
from dataclasses import dataclass, field, replace

from jqc.config import Config
from jqc.errors import ConfigError
from jqc.jastrow.truncated import TruncationSpec
from jqc.models import MODEL_KINDS, ModelSpec
from jqc.optimizer.vqe import OptimizerConfig
from jqc.measurement.sampling import SamplingConfig

logger = logging.getLogger(__name__)

EXPERIMENT_KINDS = ('sweep', 'gain', 'lambda-scan', 'reconstruct', 'dispersion', 'dump-h')
GAIN_MODES = ('exponential', 'truncated')
CIRCUITS = ('ry_cnot', 'hadamard')

TOP_LEVEL_KEYS = {
    'kind', 'model', 'grid', 'sizes', 'depths', 'mode', 'order', 'circuit', 'depth',
    'lambda_grid', 'base_lambda', 'shots', 'states_per_size', 'optimizer', 'sampling',
    'jastrow', 'initial_state', 'seed', 'output', 'json_mirror', 'trace_output',
    'row_timeout', 'counts',
}
MODEL_KEYS = {'kind', 'L', 'gamma', 'coupling', 't', 'U', 'field_sign'}
GRID_PARAMS = ('U', 'U_over_4t', 'coupling', 'gamma', 't')
OPTIMIZER_KEYS = {'max_evaluations', 'gtol', 'fd_step', 'restarts', 'mode', 'bfgs_maxiter'}
SAMPLING_KEYS = {'shots', 'm_rep', 'sign_solve'}
JASTROW_KEYS = {'source', 'path'}

REQUIRED = {
    'sweep': ('model', 'grid', 'depths'),
    'gain': ('model', 'sizes', 'depths'),
    'lambda-scan': ('model', 'lambda_grid'),
    'reconstruct': ('sizes', 'states_per_size', 'shots'),
    'dispersion': ('model', 'lambda_grid'),
    'dump-h': ('model',),
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Проверенное описание эксперимента."""
    kind: str
    model: ModelSpec
    grid_param: str = None
    grid_values: tuple = ()
    sizes: tuple = ()
    depths: tuple = ()
    mode: str = 'exponential'
    order: int = 1
    circuit: str = 'ry_cnot'
    depth: int = 1
    lambda_grid: tuple = ()
    base_lambda: tuple = None
    shots: tuple = ()
    states_per_size: int = 1
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    sampling: SamplingConfig = field(default_factory=SamplingConfig)
    sign_solve: bool = False
    jastrow_source: str = 'auto'
    jastrow_path: str = None
    counts: tuple = ()
    initial_state: int = 0
    seed: int = 0
    output: str = None
    json_mirror: bool = False
    trace_output: str = None
    row_timeout: float = Config.ROW_TIMEOUT
    literal_weight: bool = False
    threads: int = Config.THREADS
    source: str = None
    config_sha256: str = ''

    @property
    def truncation(self):
        return TruncationSpec(self.order) if self.mode == 'truncated' else None

    def with_overrides(self, seed=None, output=None, literal_weight=None, threads=None):
        """Флаги командной строки поверх документа."""
        changes = {}
        if seed is not None:
            changes['seed'] = seed
            changes['optimizer'] = replace(self.optimizer, seed=seed)
            changes['sampling'] = replace(self.sampling, seed=seed)
        if output is not None:
            changes['output'] = output
        if literal_weight:
            changes['literal_weight'] = True
        if threads is not None:
            if threads < 1:
                raise ConfigError(f'threads: must be >= 1, got {threads}')
            changes['threads'] = threads
        return replace(self, **changes)


class _Document:
    """Исходный текст для поиска строки ключа."""

    def __init__(self, text, source):
        self.text = text
        self.source = source

    def line_of(self, key):
        match = re.search(rf'"{re.escape(key)}"\s*:', self.text)
        if match is None:
            return None
        return self.text.count('\n', 0, match.start()) + 1

    def error(self, key, problem):
        return ConfigError(f'{key}: {problem}', self.source, self.line_of(key))


def _check_keys(doc, data, allowed, where):
    if not isinstance(data, dict):
        raise doc.error(where, 'expected an object')
    for key in data:
        if key not in allowed:
            raise doc.error(key, f'unknown key in {where}')


def _number(doc, data, key, default=None, kind=float, minimum=None):
    if key not in data:
        return default
    value = data[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise doc.error(key, f'expected a number, got {value!r}')
    if kind is int and int(value) != value:
        raise doc.error(key, f'expected an integer, got {value!r}')
    if minimum is not None and value < minimum:
        raise doc.error(key, f'must be >= {minimum}, got {value!r}')
    return kind(value)


def _number_list(doc, data, key, kind=float, minimum=None):
    if key not in data:
        return ()
    values = data[key]
    if not isinstance(values, list) or not values:
        raise doc.error(key, 'expected a non-empty array')
    for value in values:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise doc.error(key, f'array entries must be numbers, got {value!r}')
        if kind is int and int(value) != value:
            raise doc.error(key, f'array entries must be integers, got {value!r}')
        if minimum is not None and value < minimum:
            raise doc.error(key, f'array entries must be >= {minimum}, got {value!r}')
    return tuple(kind(v) for v in values)


def _choice(doc, data, key, choices, default):
    value = data.get(key, default)
    if value not in choices:
        raise doc.error(key, f'expected one of {choices}, got {value!r}')
    return value


def _parse_model(doc, data, sizes):
    raw = data.get('model', {'kind': 'ising'})
    _check_keys(doc, raw, MODEL_KEYS, 'model')
    kind = raw.get('kind', 'ising')
    if kind not in MODEL_KINDS:
        raise doc.error('model', f'unknown model kind {kind!r}')
    L = _number(doc, raw, 'L', default=sizes[0] if sizes else 2, kind=int, minimum=2)
    params = {name: _number(doc, raw, name) for name in ('gamma', 'coupling', 't', 'U')
              if name in raw}
    field_sign = _number(doc, raw, 'field_sign', default=-1, kind=int)
    if field_sign not in (-1, 1):
        raise doc.error('field_sign', 'must be -1 or 1')
    return ModelSpec(kind, L, field_sign=field_sign, **params)


def _parse_optimizer(doc, data, seed):
    raw = data.get('optimizer', {})
    _check_keys(doc, raw, OPTIMIZER_KEYS, 'optimizer')
    return OptimizerConfig(
        max_evaluations=_number(doc, raw, 'max_evaluations', Config.MAX_EVALUATIONS, int, 1),
        gtol=_number(doc, raw, 'gtol', Config.GTOL, float, 0),
        fd_step=_number(doc, raw, 'fd_step', Config.FD_STEP, float, 0),
        restarts=_number(doc, raw, 'restarts', Config.RESTARTS, int, 1),
        mode=_choice(doc, raw, 'mode', ('joint', 'independent'), 'joint'),
        bfgs_maxiter=_number(doc, raw, 'bfgs_maxiter', Config.BFGS_MAXITER, int, 0),
        seed=seed,
    )


def parse_config(text, source='<config>'):
    """
    Разбирает JSON-текст описания эксперимента.

    Raises:
        ConfigError: Синтаксическая ошибка JSON или неверное значение, с номером строки
    """
    doc = _Document(text, source)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f'invalid JSON: {e.msg}', source, e.lineno)
    _check_keys(doc, data, TOP_LEVEL_KEYS, 'config')

    kind = _choice(doc, data, 'kind', EXPERIMENT_KINDS, None)
    for key in REQUIRED[kind]:
        if key not in data:
            raise ConfigError(f'{key}: required for kind {kind!r}', source, doc.line_of('kind'))

    seed = _number(doc, data, 'seed', 0, int, 0)
    sizes = _number_list(doc, data, 'sizes', int, 2)
    model = _parse_model(doc, data, sizes)

    grid_param, grid_values = None, ()
    if 'grid' in data:
        grid = data['grid']
        _check_keys(doc, grid, {'param', 'values'}, 'grid')
        grid_param = _choice(doc, grid, 'param', GRID_PARAMS,
                             model.param_name)
        grid_values = _number_list(doc, grid, 'values')
        if not grid_values:
            raise doc.error('values', 'grid needs a non-empty array of values')

    mode = _choice(doc, data, 'mode', GAIN_MODES, 'exponential')
    order = _number(doc, data, 'order', 1, int, 0)
    if order > Config.MAX_TRUNCATION_ORDER:
        raise doc.error('order', f'truncation order above {Config.MAX_TRUNCATION_ORDER}')

    sampling_raw = data.get('sampling', {})
    _check_keys(doc, sampling_raw, SAMPLING_KEYS, 'sampling')
    sampling = SamplingConfig(
        shots=_number(doc, sampling_raw, 'shots', Config.DEFAULT_SHOTS, int, 1),
        m_rep=_number(doc, sampling_raw, 'm_rep', Config.DEFAULT_M_REP, int, 1),
        seed=seed,
    )
    sign_solve = sampling_raw.get('sign_solve', False)
    if not isinstance(sign_solve, bool):
        raise doc.error('sign_solve', 'expected true or false')

    jastrow_raw = data.get('jastrow', {})
    _check_keys(doc, jastrow_raw, JASTROW_KEYS, 'jastrow')
    jastrow_source = _choice(doc, jastrow_raw, 'source', ('auto', 'file'), 'auto')
    jastrow_path = jastrow_raw.get('path')
    if jastrow_source == 'file' and not isinstance(jastrow_path, str):
        raise doc.error('source', 'file source needs a "path"')

    counts = data.get('counts', [])
    if not isinstance(counts, list) or not all(isinstance(p, str) for p in counts):
        raise doc.error('counts', 'expected an array of counts-file paths')

    for key in ('output', 'trace_output'):
        if key in data and not isinstance(data[key], str):
            raise doc.error(key, 'expected a path string')
    json_mirror = data.get('json_mirror', False)
    if not isinstance(json_mirror, bool):
        raise doc.error('json_mirror', 'expected true or false')

    base_lambda = _number_list(doc, data, 'base_lambda') or None

    config = ExperimentConfig(
        kind=kind,
        model=model,
        grid_param=grid_param,
        grid_values=grid_values,
        sizes=sizes,
        depths=_number_list(doc, data, 'depths', int, 0),
        mode=mode,
        order=order,
        circuit=_choice(doc, data, 'circuit', CIRCUITS, 'ry_cnot'),
        depth=_number(doc, data, 'depth', 1, int, 0),
        lambda_grid=_number_list(doc, data, 'lambda_grid'),
        base_lambda=base_lambda,
        shots=_number_list(doc, data, 'shots', int, 0),
        states_per_size=_number(doc, data, 'states_per_size', 1, int, 1),
        optimizer=_parse_optimizer(doc, data, seed),
        sampling=sampling,
        sign_solve=sign_solve,
        jastrow_source=jastrow_source,
        jastrow_path=jastrow_path,
        counts=tuple(counts),
        initial_state=_number(doc, data, 'initial_state', 0, int, 0),
        seed=seed,
        output=data.get('output'),
        json_mirror=json_mirror,
        trace_output=data.get('trace_output'),
        row_timeout=_number(doc, data, 'row_timeout', Config.ROW_TIMEOUT, float, 0),
        source=source,
        config_sha256=hashlib.sha256(text.encode('utf-8')).hexdigest(),
    )
    if config.initial_state >= 1 << model.num_qubits:
        raise doc.error('initial_state', f'outside the {model.num_qubits}-qubit register')
    return config


def load_config(path, kind=None):
    """
    Читает описание эксперимента из файла.

    Args:
        path: путь к JSON-файлу
        kind: ожидаемый вид эксперимента (команда CLI)
    """
    try:
        with open(path, 'r', encoding='utf-8') as f:
            text = f.read()
    except OSError as e:
        raise ConfigError(f'cannot read config: {e.strerror}', path)
    config = parse_config(text, path)
    if kind is not None and config.kind != kind:
        raise ConfigError(f'kind: config describes {config.kind!r}, command is {kind!r}',
                          path, _Document(text, path).line_of('kind'))
    logger.info(f'Loaded {config.kind} config from {path} (sha256 {config.config_sha256[:12]})')
    return config
