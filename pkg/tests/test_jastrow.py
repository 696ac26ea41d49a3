import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from jqc.errors import SizeMismatchError
from jqc.jastrow.params import (
    JastrowParams, build_class_map, jastrow_operator, load_class_map, log_weight, log_weights,
    save_class_map
)
from jqc.jastrow.truncated import (
    TruncationSpec, apply_truncated_exact, exponential_projector, term_count,
    transformed_energy, truncated_projector
)
from jqc.models import ModelSpec
from jqc.pauli.algebra import PauliSum, to_dense
from jqc.pauli.hamiltonians import build_heisenberg, build_ising
from jqc.statevector.engine import (
    StateVector, apply_jastrow_exact, exact_ground_state, expectation, random_real_state
)

LAMBDAS_4 = arrays(np.float64, (3,), elements=st.floats(min_value=-0.4, max_value=0.4))


def chain_params(L, lambdas=None):
    return JastrowParams.from_class_map(L, build_class_map('chain', L), lambdas)


@pytest.mark.parametrize('topology,L,classes', [
    ('chain', 8, 7), ('chain', 4, 3), ('ladder', 4, 10), ('ladder', 2, 4),
])
def test_class_counts(topology, L, classes):
    class_map = build_class_map(topology, L)
    assert len(set(class_map.values())) == classes
    pairs = L * (L - 1) // 2 if topology == 'chain' else L * (2 * L - 1)
    assert len(class_map) == pairs


def test_ladder_classes():
    class_map = build_class_map('ladder', 3)
    assert class_map[(0, 1)] == class_map[(1, 2)] == 0
    assert class_map[(3, 4)] == 2
    assert class_map[(0, 3)] == class_map[(2, 5)] == 4
    assert class_map[(0, 5)] == class_map[(2, 3)] == 6


def test_for_model_uses_ladder_for_hubbard():
    jp = JastrowParams.for_model(ModelSpec('hubbard', 4))
    assert jp.num_qubits == 8
    assert jp.num_classes == 10


def test_invalid_params():
    with pytest.raises(SizeMismatchError):
        chain_params(4, [0.1, 0.2])
    with pytest.raises(ValueError):
        JastrowParams.from_class_map(3, {(0, 1): 0, (1, 2): 0})


def test_log_weight_examples():
    assert log_weight('00', chain_params(2, [0.3])) == pytest.approx(0.3)
    assert log_weight('01', chain_params(2, [0.3])) == pytest.approx(-0.3)
    assert log_weight('0101', chain_params(4)) == 0.0
    # z = (+1, -1, +1, -1) по кубитам 3..0: -0.3 (соседи) + 0.4 (через один) - 0.3 (крайние)
    assert log_weight('0101', chain_params(4, [0.1, 0.2, 0.3])) == pytest.approx(-0.2)
    with pytest.raises(SizeMismatchError):
        log_weight('010', chain_params(4))


@given(LAMBDAS_4, st.integers(min_value=0, max_value=15))
def test_log_weight_global_flip_symmetry(lambdas, index):
    jp = chain_params(4, lambdas)
    assert log_weight(index, jp) == pytest.approx(log_weight(index ^ 0b1111, jp), abs=1e-12)
    assert log_weights(jp)[index] == pytest.approx(log_weight(index, jp), abs=1e-12)


@given(LAMBDAS_4, st.integers(min_value=0, max_value=15))
def test_log_weight_matches_projected_amplitude_ratio(lambdas, index):
    jp = chain_params(4, lambdas)
    uniform = StateVector.from_amplitudes(np.ones(16))
    projected = apply_jastrow_exact(uniform, jp)
    ratio = projected.amplitudes[index].real / projected.amplitudes[0].real
    assert ratio == pytest.approx(math.exp(log_weight(index, jp) - log_weight(0, jp)), rel=1e-12)


def test_jastrow_operator_is_diagonal_log_weights():
    jp = chain_params(4, [0.1, -0.2, 0.3])
    assert np.allclose(np.diag(to_dense(jastrow_operator(jp))).real, log_weights(jp))
    assert jastrow_operator(jp).is_diagonal()


def test_truncated_projector_examples():
    jp = chain_params(2, [0.2])
    assert truncated_projector(jp, TruncationSpec(0)) == PauliSum.identity(2)
    assert truncated_projector(jp, TruncationSpec(1)) == PauliSum({'II': 1.0, 'ZZ': 0.2}, 2)


def test_truncated_projector_matches_dense_square():
    jp = chain_params(4, [0.1, -0.25, 0.3])
    dense = np.eye(16) + to_dense(jastrow_operator(jp))
    projector = truncated_projector(jp, TruncationSpec(2))
    assert np.allclose(to_dense(projector), dense @ dense, atol=1e-12)
    assert projector.is_hermitian()


def test_truncation_cap():
    with pytest.raises(ValueError):
        TruncationSpec(5)
    with pytest.raises(ValueError):
        TruncationSpec(-1)


def test_exponential_projector_is_exp_of_diagonal():
    jp = chain_params(4, [0.1, -0.25, 0.3])
    assert np.allclose(np.diag(to_dense(exponential_projector(jp))).real, np.exp(log_weights(jp)))


def test_term_counts_first_order():
    L = 6
    assert term_count(chain_params(L, [0.1] * (L - 1)), TruncationSpec(1)) == 1 + L * (L - 1) // 2
    nearest = [0.1] + [0.0] * (L - 2)
    assert term_count(chain_params(L, nearest), TruncationSpec(1)) == 1 + (L - 1)


def test_term_count_polynomial_at_second_order():
    sizes = np.arange(4, 11)
    counts = [term_count(chain_params(L, 0.1 * np.arange(1, L)), TruncationSpec(2)) for L in sizes]
    slope = np.polyfit(np.log(sizes), np.log(counts), 1)[0]
    assert slope <= 4.0
    assert all(b > a for a, b in zip(counts, counts[1:]))


def test_full_exponential_has_more_terms():
    jp = chain_params(4, [0.1, 0.2, 0.3])
    # все четные по числу Z строки: 2^(L-1)
    assert term_count(jp) == 2 ** 3
    assert term_count(jp) > term_count(jp, TruncationSpec(1))


@settings(max_examples=30)
@given(st.sampled_from([4, 6]), st.sampled_from([1, 2]), st.integers(min_value=0, max_value=2**32 - 1))
def test_transformed_energy_equals_truncated_state(L, order, case_seed):
    rng = np.random.default_rng(case_seed)
    psi = random_real_state(L, rng)
    jp = chain_params(L, rng.uniform(-0.3, 0.3, L - 1))
    h = build_heisenberg(L, 0.7)
    spec = TruncationSpec(order)
    direct = expectation(h, apply_truncated_exact(psi, jp, spec))
    assert transformed_energy(psi, h, jp, spec) == pytest.approx(direct, abs=1e-10)
    energy, _ = exact_ground_state(h)
    assert direct >= energy - 1e-9


def test_transformed_energy_zero_order_is_plain_expectation(rng):
    psi = random_real_state(4, rng)
    h = build_ising(4, 0.6)
    jp = chain_params(4, [0.2, 0.1, 0.05])
    assert transformed_energy(psi, h, jp, TruncationSpec(0)) == pytest.approx(expectation(h, psi))


def test_class_map_file(tmp_path):
    path = tmp_path / 'classes.txt'
    save_class_map(build_class_map('ladder', 3), path)
    num_qubits, class_map = load_class_map(path)
    assert num_qubits == 6
    assert class_map == build_class_map('ladder', 3)


def test_class_map_file_errors(tmp_path):
    path = tmp_path / 'bad.txt'
    path.write_text('0 1\n', encoding='utf-8')
    with pytest.raises(ValueError, match='bad.txt:1'):
        load_class_map(path)


@given(LAMBDAS_4, LAMBDAS_4, st.integers(min_value=0, max_value=2**32 - 1))
def test_jastrow_exponents_add(first, second, state_seed):
    # exp(J1) exp(J2) = exp(J1 + J2): все корреляторы диагональны и коммутируют
    combined = chain_params(4, first + second)
    separate = log_weights(chain_params(4, first)) + log_weights(chain_params(4, second))
    assert np.allclose(np.exp(separate), np.exp(log_weights(combined)), rtol=1e-12, atol=0)
    psi = random_real_state(4, np.random.default_rng(state_seed))
    twice = apply_jastrow_exact(apply_jastrow_exact(psi, chain_params(4, first)),
                                chain_params(4, second))
    assert np.allclose(twice.amplitudes, apply_jastrow_exact(psi, combined).amplitudes,
                       atol=1e-12, rtol=0)
