import csv
import hashlib
import json
import math
import os

import pytest
from click.testing import CliRunner

from jqc import __version__
from jqc.errors import ConfigError
from jqc.experiments.cli import cli
from jqc.experiments.commands import (
    COMMANDS, base_point, cmd_dump_hamiltonian, jastrow_for, row_seed, run_rows
)
from jqc.experiments.config import load_config, parse_config
from jqc.experiments.writer import format_cell, read_results
from jqc.jastrow.params import build_class_map, save_class_map
from jqc.measurement.reconstruction import build_entangled_copy
from jqc.measurement.sampling import SamplingConfig, sample_counts, write_counts
from jqc.models import VOLATILE_FIELDS, ResultRecord
from jqc.pauli.algebra import MeasurementBasis
from jqc.statevector.circuit import build_hadamard
from jqc.statevector.engine import run_circuit
from tests.conftest import LAMBDA_STAR, SQRT5

CONFIGS = os.path.join(os.path.dirname(__file__), '..', 'configs')
SMALL_OPTIMIZER = {'restarts': 1, 'max_evaluations': 150, 'bfgs_maxiter': 10}


def run(write_config, data, tmp_path, name='run'):
    data = dict(data, output=str(tmp_path / f'{name}.csv'))
    cfg = load_config(write_config(data, f'{name}.json'))
    return COMMANDS[cfg.kind](cfg), cfg.output


def stable_rows(path):
    _, header, rows = read_results(path)
    return [{k: v for k, v in row.items() if k not in VOLATILE_FIELDS} for row in rows]


# ===== Конфигурация =====

def test_json_syntax_error_has_line():
    text = '{\n  "kind": "sweep",\n  "model": ,\n  "depths": [1]\n}\n'
    with pytest.raises(ConfigError) as excinfo:
        parse_config(text, 'bad.json')
    assert excinfo.value.line == 3
    assert str(excinfo.value).startswith('bad.json:3: invalid JSON')


def test_unknown_model_kind_points_at_model():
    text = ('{\n  "kind": "sweep",\n  "grid": {"param": "gamma", "values": [1.0]},\n'
            '  "model": {"kind": "spin-glass", "L": 4},\n  "depths": [1]\n}\n')
    with pytest.raises(ConfigError, match='spin-glass') as excinfo:
        parse_config(text, 'sweep.json')
    assert excinfo.value.line == 4
    assert 'sweep.json:4: model:' in str(excinfo.value)


def test_unknown_key_points_at_key():
    text = '{\n  "kind": "dump-h",\n  "model": {"kind": "ising", "L": 2},\n  "colour": 1\n}\n'
    with pytest.raises(ConfigError, match='colour') as excinfo:
        parse_config(text, 'x.json')
    assert excinfo.value.line == 4


@pytest.mark.parametrize('data, key', [
    ({'kind': 'sweep', 'model': {'kind': 'ising', 'L': 2}, 'grid': {'values': [1]}}, 'depths'),
    ({'kind': 'gain', 'model': {'kind': 'ising'}, 'sizes': [2], 'depths': [-1]}, 'depths'),
    ({'kind': 'reconstruct', 'sizes': [3], 'states_per_size': 0, 'shots': [0]}, 'states_per_size'),
    ({'kind': 'lambda-scan', 'model': {'kind': 'ising', 'L': 2}, 'lambda_grid': []}, 'lambda_grid'),
    ({'kind': 'gain', 'model': {'kind': 'ising'}, 'sizes': [2], 'depths': [1], 'order': 9}, 'order'),
    ({'kind': 'dump-h', 'model': {'kind': 'ising', 'L': 1}}, 'L'),
    ({'kind': 'dump-h', 'model': {'kind': 'ising', 'L': 2}, 'initial_state': 4}, 'initial_state'),
    ({'kind': 'dump-h', 'model': {'kind': 'ising', 'L': 2}, 'json_mirror': 'yes'}, 'json_mirror'),
    ({'kind': 'replay'}, 'kind'),
])
def test_invalid_values(data, key):
    with pytest.raises(ConfigError, match=key):
        parse_config(json.dumps(data, indent=2))


def test_config_defaults_and_hash(write_config):
    text_path = write_config({'kind': 'gain', 'model': {'kind': 'hubbard', 't': 1.0},
                              'sizes': [2, 3], 'depths': [1], 'mode': 'truncated', 'order': 2})
    cfg = load_config(text_path)
    assert cfg.model.L == 2
    assert cfg.model.num_qubits == 4
    assert cfg.truncation.order == 2
    assert cfg.optimizer.restarts == 5
    with open(text_path, 'rb') as f:
        assert cfg.config_sha256 == hashlib.sha256(f.read()).hexdigest()


def test_kind_must_match_command(write_config):
    path = write_config({'kind': 'dump-h', 'model': {'kind': 'ising', 'L': 2}})
    with pytest.raises(ConfigError, match="command is 'sweep'"):
        load_config(path, 'sweep')


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError, match='cannot read config'):
        load_config(str(tmp_path / 'absent.json'))


def test_overrides():
    cfg = parse_config(json.dumps({'kind': 'dump-h', 'model': {'kind': 'ising', 'L': 2}, 'seed': 1}))
    changed = cfg.with_overrides(seed=42, output='out.csv', literal_weight=True, threads=3)
    assert changed.seed == 42
    assert changed.optimizer.seed == 42 and changed.sampling.seed == 42
    assert changed.output == 'out.csv'
    assert changed.literal_weight and changed.threads == 3
    assert cfg.seed == 1
    with pytest.raises(ConfigError):
        cfg.with_overrides(threads=0)


def test_hubbard_grid_in_units_of_4t():
    cfg = parse_config(json.dumps({
        'kind': 'sweep', 'model': {'kind': 'hubbard', 'L': 2, 't': 0.5},
        'grid': {'param': 'U_over_4t', 'values': [0.5, 1.0]}, 'depths': [1],
    }))
    assert cfg.grid_param == 'U_over_4t'
    models = [cfg.model.with_param(cfg.grid_param, v) for v in cfg.grid_values]
    assert [m.U for m in models] == [1.0, 2.0]
    assert [m.U_over_4t for m in models] == [0.5, 1.0]
    assert all(m.t == 0.5 for m in models)


def test_jastrow_file_source(tmp_path):
    path = tmp_path / 'classes.txt'
    save_class_map(build_class_map('chain', 3), path)
    cfg = parse_config(json.dumps({
        'kind': 'dump-h', 'model': {'kind': 'ising', 'L': 3},
        'jastrow': {'source': 'file', 'path': str(path)},
    }))
    assert jastrow_for(cfg, cfg.model).num_classes == 2
    with pytest.raises(ConfigError, match='class map covers 3 qubits'):
        jastrow_for(cfg, cfg.model.with_size(4))


def test_base_lambda_length_is_checked():
    cfg = parse_config(json.dumps({
        'kind': 'lambda-scan', 'model': {'kind': 'ising', 'L': 3}, 'circuit': 'hadamard',
        'lambda_grid': [1.0], 'base_lambda': [0.1],
    }))
    with pytest.raises(ConfigError, match='base_lambda'):
        base_point(cfg, cfg.model)


# ===== Запись результатов =====

def test_format_cell():
    assert format_cell(True) == 'true'
    assert format_cell(0.1) == '0.1'
    assert format_cell((0.25, -1.0)) == '0.25;-1.0'
    assert format_cell(7) == '7'


def test_result_record_validation():
    with pytest.raises(ValueError, match='missing'):
        ResultRecord('reconstruct', {'model': 'ising'})
    with pytest.raises(ValueError):
        ResultRecord('nonsense')
    values = {'model': 'ising', 'L': 2, 'state': 0, 'shots': 0, 'e_direct': 1.0,
              'e_reconstructed': math.nan, 'e_jastrow': 1.0, 'e_exact': -1.0,
              'eps_b': 0.0, 'wall_time': 0.0}
    with pytest.raises(ValueError, match='e_reconstructed'):
        ResultRecord('reconstruct', values)


def test_row_seed_and_order():
    assert row_seed(5, 0) == 5
    assert len({row_seed(5, row) for row in range(100)}) == 100
    assert run_rows(abs, [-3, 2, -1]) == [3, 2, 1]


# ===== Команды =====

def test_dump_hamiltonian(tmp_path):
    cfg = load_config(os.path.join(CONFIGS, 'dump_h_hubbard.json'))
    text = cmd_dump_hamiltonian(cfg)
    lines = text.splitlines()
    assert len(lines) == 7
    assert '2.0 0.0 IIII' in lines
    out = tmp_path / 'h.txt'
    assert cmd_dump_hamiltonian(cfg.with_overrides(output=str(out))) == text
    assert out.read_text(encoding='utf-8') == text


def test_lambda_scan_on_two_sites(write_config, tmp_path):
    data = {
        'kind': 'lambda-scan', 'model': {'kind': 'ising', 'L': 2, 'gamma': 1.0},
        'circuit': 'hadamard', 'lambda_grid': [0.0, 1.0], 'shots': [4096],
        'sampling': {'m_rep': 3}, 'seed': 3, 'json_mirror': True,
    }
    records, path = run(write_config, data, tmp_path)
    assert len(records) == 2
    zero, optimum = (record.values for record in records)
    assert zero['e_jqc_exact'] == pytest.approx(-2.0, abs=1e-12)
    assert zero['e_c'] == pytest.approx(-2.0, abs=1e-12)
    assert optimum['e_jqc_exact'] == pytest.approx(-SQRT5, abs=1e-8)
    assert optimum['lambdas'][0] == pytest.approx(LAMBDA_STAR, abs=1e-4)
    assert optimum['depth'] == 0
    for row in (zero, optimum):
        assert abs(row['e_sampled'] - row['e_jqc_exact']) < 0.1

    provenance, header, rows = read_results(path)
    assert provenance.startswith(f'jqc {__version__} kind=lambda-scan seed=3 config_sha256=')
    assert header[:4] == ['kind', 'model', 'L', 'depth']
    assert rows[0]['kind'] == 'lambda-scan'
    with open(path.replace('.csv', '.json'), encoding='utf-8') as f:
        mirror = json.load(f)
    assert mirror['provenance']['seed'] == 3
    assert len(mirror['rows']) == 2
    assert mirror['rows'][1]['lambdas'] == [float(x) for x in optimum['lambdas']]


def test_runs_are_reproducible(write_config, tmp_path):
    data = {
        'kind': 'lambda-scan', 'model': {'kind': 'ising', 'L': 2}, 'circuit': 'hadamard',
        'base_lambda': [0.2], 'lambda_grid': [0.5, 1.0], 'shots': [1000, 2000],
        'sampling': {'m_rep': 2}, 'seed': 9,
    }
    _, first = run(write_config, data, tmp_path, 'first')
    _, second = run(write_config, data, tmp_path, 'second')
    assert stable_rows(first) == stable_rows(second)
    assert len(stable_rows(first)) == 4


def test_sweep_rows(write_config, tmp_path):
    data = {
        'kind': 'sweep', 'model': {'kind': 'ising', 'L': 3},
        'grid': {'param': 'gamma', 'values': [0.5, 1.0]}, 'depths': [1],
        'optimizer': SMALL_OPTIMIZER, 'seed': 7, 'trace_output': str(tmp_path / 'trace.csv'),
    }
    records, path = run(write_config, data, tmp_path)
    assert [r.values['value'] for r in records] == [0.5, 1.0]
    for record in records:
        v = record.values
        assert v['param'] == 'gamma'
        assert v['e_jqc'] <= v['e_c'] + 1e-12
        assert v['e_jqc'] >= v['e_exact'] - 1e-9
        assert v['gain'] >= 1.0 - 1e-6 or v['gain_capped']
    with open(tmp_path / 'trace.csv', newline='', encoding='utf-8') as f:
        stages = {row['stage'].split('/')[0] for row in csv.DictReader(f)}
    assert stages == {'row0', 'row1'}


def test_threads_do_not_change_results(write_config, tmp_path):
    data = {
        'kind': 'sweep', 'model': {'kind': 'heisenberg', 'L': 3},
        'grid': {'param': 'coupling', 'values': [0.5, 1.5]}, 'depths': [1],
        'optimizer': SMALL_OPTIMIZER, 'seed': 2,
    }
    _, serial = run(write_config, data, tmp_path, 'serial')
    cfg = load_config(write_config(dict(data, output=str(tmp_path / 'parallel.csv')), 'p.json'))
    COMMANDS['sweep'](cfg.with_overrides(threads=2))
    assert stable_rows(serial) == stable_rows(str(tmp_path / 'parallel.csv'))


def test_truncated_gain_rows(write_config, tmp_path):
    data = {
        'kind': 'gain', 'model': {'kind': 'ising', 'gamma': 1.0}, 'sizes': [3],
        'depths': [1, 2], 'mode': 'truncated', 'order': 2, 'optimizer': SMALL_OPTIMIZER,
    }
    records, _ = run(write_config, data, tmp_path)
    assert [(r.values['L'], r.values['depth']) for r in records] == [(3, 1), (3, 2)]
    assert {r.values['mode'] for r in records} == {'truncated'}
    assert {r.values['order'] for r in records} == {2}
    for record in records:
        assert record.values['e_jqc'] <= record.values['e_c'] + 1e-12


def test_reconstruct_bench_exact_probabilities(write_config, tmp_path):
    data = {
        'kind': 'reconstruct', 'model': {'kind': 'ising', 'gamma': 1.0}, 'sizes': [2, 3],
        'states_per_size': 2, 'shots': [0, 20000], 'optimizer': SMALL_OPTIMIZER, 'seed': 5,
    }
    records, _ = run(write_config, data, tmp_path)
    assert len(records) == 8
    for record in records:
        v = record.values
        assert v['e_jastrow'] <= v['e_reconstructed'] + 1e-12
        assert v['e_jastrow'] >= v['e_exact'] - 1e-9
        if v['shots'] == 0:
            assert v['eps_b'] < 1e-9
            assert v['e_reconstructed'] == pytest.approx(v['e_direct'], abs=1e-9)
    # одно состояние на строку состояния, независимо от числа выстрелов
    exact, sampled = records[0].values, records[1].values
    assert exact['e_direct'] == sampled['e_direct']


def test_reconstruct_bench_covers_every_rotated_basis(write_config, tmp_path):
    # Гейзенберг измеряется в Z, X и Y: один вектор знаков должен подойти обоим повернутым
    data = {
        'kind': 'reconstruct', 'model': {'kind': 'heisenberg', 'coupling': 1.0}, 'sizes': [3],
        'states_per_size': 3, 'shots': [0, 5000], 'optimizer': SMALL_OPTIMIZER, 'seed': 11,
    }
    records, _ = run(write_config, data, tmp_path)
    for record in records:
        v = record.values
        if v['shots'] == 0:
            assert v['eps_b'] < 1e-9
            assert v['e_reconstructed'] == pytest.approx(v['e_direct'], abs=1e-9)
        else:
            assert 0.0 < v['eps_b'] < 0.5


def test_dispersion_rows(write_config, tmp_path):
    data = {
        'kind': 'dispersion', 'model': {'kind': 'ising', 'L': 2}, 'circuit': 'hadamard',
        'lambda_grid': [0.0, 1.0], 'shots': [4000], 'sampling': {'m_rep': 4}, 'seed': 13,
    }
    records, _ = run(write_config, data, tmp_path)
    for record in records:
        v = record.values
        assert v['shots'] == 2000
        assert v['dispersion'] == pytest.approx(v['stderr'] * 2.0)
        assert 'lambdas' not in v


def test_lambda_scan_from_counts_files(write_config, tmp_path):
    circuit = build_hadamard(2)
    paths = []
    for label in ('ZZ', 'XX'):
        basis = MeasurementBasis.from_label(label)
        psi = run_circuit(build_entangled_copy(circuit, basis))
        table = sample_counts(psi, SamplingConfig(shots=100000, seed=21))
        path = tmp_path / f'counts_{label}.txt'
        write_counts(table, path, label)
        paths.append(str(path))
    data = {
        'kind': 'lambda-scan', 'model': {'kind': 'ising', 'L': 2}, 'circuit': 'hadamard',
        'base_lambda': [LAMBDA_STAR], 'lambda_grid': [1.0], 'counts': paths,
    }
    records, _ = run(write_config, data, tmp_path)
    v = records[0].values
    assert v['shots'] == 100000 and v['m_rep'] == 1 and v['stderr'] == 0.0
    assert v['e_sampled'] == pytest.approx(-SQRT5, abs=0.05)


def test_counts_register_mismatch(write_config, tmp_path):
    path = tmp_path / 'counts.txt'
    path.write_text('# qubits=2 shots=1 basis=ZZ\n00 1\n', encoding='utf-8')
    data = {
        'kind': 'lambda-scan', 'model': {'kind': 'ising', 'L': 2}, 'circuit': 'hadamard',
        'base_lambda': [0.1], 'lambda_grid': [1.0], 'counts': [str(path)],
    }
    with pytest.raises(ConfigError, match='expected 4'):
        run(write_config, data, tmp_path)


# ===== Командная строка =====

def test_cli_dump_h(tmp_path, write_config, monkeypatch):
    path = write_config({'kind': 'dump-h', 'model': {'kind': 'ising', 'L': 2, 'gamma': 1.0}})
    monkeypatch.chdir(tmp_path)
    result = CliRunner().invoke(cli, ['dump-h', '--config', path])
    assert result.exit_code == 0, result.output
    assert len(result.output.splitlines()) == 3


def test_cli_writes_results(tmp_path, write_config, monkeypatch):
    path = write_config({
        'kind': 'dispersion', 'model': {'kind': 'ising', 'L': 2}, 'circuit': 'hadamard',
        'base_lambda': [0.2], 'lambda_grid': [1.0], 'shots': [2000], 'sampling': {'m_rep': 2},
    })
    monkeypatch.chdir(tmp_path)
    result = CliRunner().invoke(cli, ['dispersion', '--config', path, '--seed', '4'])
    assert result.exit_code == 0, result.output
    assert 'results/dispersion.csv' in result.output
    provenance, _, rows = read_results(str(tmp_path / 'results' / 'dispersion.csv'))
    assert 'seed=4' in provenance
    assert len(rows) == 1


@pytest.mark.parametrize('content', [
    '{"kind": "sweep",\n "model": }',
    '{"kind": "dump-h", "model": {"kind": "ising", "L": 2}}',
])
def test_cli_reports_config_errors(tmp_path, monkeypatch, content):
    path = tmp_path / 'bad.json'
    path.write_text(content, encoding='utf-8')
    monkeypatch.chdir(tmp_path)
    result = CliRunner().invoke(cli, ['gain', '--config', str(path)])
    assert result.exit_code == 2
    assert 'Error:' in result.output


def test_cli_requires_config(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    result = CliRunner().invoke(cli, ['sweep'])
    assert result.exit_code == 2
    assert '--config' in result.output


# ===== Длинные прогоны =====

@pytest.mark.slow
def test_sign_solve_bench_on_real_states(write_config, tmp_path):
    data = {
        'kind': 'reconstruct', 'model': {'kind': 'ising', 'gamma': 1.0}, 'sizes': [5, 6, 7, 8],
        'states_per_size': 25, 'shots': [0], 'optimizer': SMALL_OPTIMIZER, 'seed': 5,
    }
    records, _ = run(write_config, data, tmp_path)
    assert sorted({r.values['L'] for r in records}) == [5, 6, 7, 8]
    assert len(records) == 100
    for record in records:
        v = record.values
        assert v['eps_b'] <= 0.1
        assert abs(v['e_reconstructed'] - v['e_direct']) < 0.05 * abs(v['e_exact'])
        assert v['e_exact'] - 1e-9 <= v['e_jastrow'] <= v['e_reconstructed'] + 1e-12
