import math
from dataclasses import dataclass, field, replace

MODEL_KINDS = ('ising', 'heisenberg', 'hubbard')
MODEL_PARAMS = {'ising': 'gamma', 'heisenberg': 'coupling', 'hubbard': 'U'}


@dataclass(frozen=True)
class ModelSpec:
    """Модель на открытой цепочке из L узлов."""
    kind: str
    L: int
    gamma: float = 1.0
    coupling: float = 1.0
    t: float = 1.0
    U: float = 4.0
    # -1: поле входит как -Gamma*X (положительное основное состояние), +1: как +Gamma*X
    field_sign: int = -1

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f'Unknown model kind: {self.kind!r}')
        if int(self.L) != self.L or self.L < 2:
            raise ValueError(f'Model needs L >= 2 sites, got {self.L}')
        for name in ('gamma', 'coupling', 't', 'U'):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f'Model parameter {name} must be finite')
        if self.field_sign not in (-1, 1):
            raise ValueError('field_sign must be -1 or +1')

    @property
    def num_qubits(self):
        return 2 * self.L if self.kind == 'hubbard' else self.L

    @property
    def param_name(self):
        return MODEL_PARAMS[self.kind]

    @property
    def param_value(self):
        return getattr(self, self.param_name)

    @property
    def U_over_4t(self):
        return self.U / (4.0 * self.t)

    def with_param(self, name, value):
        # U/4t пересчитывается в U при фиксированном t
        if name == 'U_over_4t':
            return replace(self, U=4.0 * self.t * value)
        return replace(self, **{name: value})

    def with_size(self, L):
        return replace(self, L=L)


@dataclass(frozen=True)
class GainRecord:
    """Энергии пары оптимизаций и вычислительный выигрыш."""
    e_c: float
    e_jqc: float
    e_exact: float
    gain: float
    capped: bool = False


# Опубликованные заголовки результатов по видам экспериментов
HEADERS = {
    'sweep': ['kind', 'model', 'L', 'param', 'value', 'depth', 'e_c', 'e_jqc', 'e_exact',
              'rel_err_c', 'rel_err_jqc', 'gain', 'gain_capped', 'lambdas', 'status', 'wall_time'],
    'gain': ['kind', 'model', 'L', 'depth', 'mode', 'order', 'e_c', 'e_jqc', 'e_exact',
             'rel_err_c', 'rel_err_jqc', 'gain', 'gain_capped', 'lambdas', 'status', 'wall_time'],
    'lambda-scan': ['kind', 'model', 'L', 'depth', 'scale', 'shots', 'm_rep', 'e_c',
                    'e_jqc_exact', 'e_sampled', 'stderr', 'e_exact', 'lambdas', 'wall_time'],
    'reconstruct': ['kind', 'model', 'L', 'state', 'shots', 'e_direct', 'e_reconstructed',
                    'e_jastrow', 'e_exact', 'eps_b', 'wall_time'],
    'dispersion': ['kind', 'model', 'L', 'depth', 'scale', 'shots', 'm_rep', 'e_jqc_exact',
                   'e_sampled', 'stderr', 'dispersion', 'e_exact', 'wall_time'],
}

# Колонки, которые обязаны быть конечными числами
ENERGY_FIELDS = {'e_c', 'e_jqc', 'e_exact', 'e_jqc_exact', 'e_sampled', 'e_direct',
                 'e_reconstructed', 'e_jastrow'}

# Колонки, исключаемые из сравнения воспроизводимости
VOLATILE_FIELDS = {'wall_time'}


def relative_error(energy, e_exact):
    """Относительная ошибка (E - E_exact)/|E_exact|."""
    if e_exact == 0:
        return energy - e_exact
    return (energy - e_exact) / abs(e_exact)


@dataclass
class ResultRecord:
    """Плоская строка результата эксперимента."""
    kind: str
    values: dict = field(default_factory=dict)

    def __post_init__(self):
        header = HEADERS.get(self.kind)
        if header is None:
            raise ValueError(f'No result schema for kind {self.kind!r}')
        self.values.setdefault('kind', self.kind)
        missing = [name for name in header if name not in self.values]
        extra = [name for name in self.values if name not in header]
        if missing or extra:
            raise ValueError(f'Record for {self.kind} does not match header: '
                             f'missing={missing} extra={extra}')
        for name in ENERGY_FIELDS.intersection(self.values):
            if not math.isfinite(float(self.values[name])):
                raise ValueError(f'Energy field {name} is not finite')

    @property
    def header(self):
        return HEADERS[self.kind]

    def row(self):
        return [self.values[name] for name in self.header]
