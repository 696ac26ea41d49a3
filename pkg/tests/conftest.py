import json
import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from jqc.models import ModelSpec

# Свойства проверяются минимум на 200 случайных примерах
settings.register_profile(
    'jqc', max_examples=200, deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile('jqc')

SQRT5 = math.sqrt(5.0)
# Оптимальный lambda для L=2, Gamma=1 на состоянии |++>: sinh(2 lambda) = 1/2
LAMBDA_STAR = math.asinh(0.5) / 2


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def ising_l2():
    return ModelSpec('ising', 2, gamma=1.0)


@pytest.fixture
def write_config(tmp_path):
    """Пишет словарь в JSON-файл и возвращает путь."""
    def write(data, name='config.json'):
        path = tmp_path / name
        path.write_text(json.dumps(data, indent=2), encoding='utf-8')
        return str(path)
    return write
