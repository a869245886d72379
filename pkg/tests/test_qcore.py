import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nmlg import qcore
from nmlg.errors import DimensionError, NormalizationError, StateError, UndefinedError
from conftest import densities, random_density, random_matrix

SQ2 = math.sqrt(2)


def test_ket_projectors():
    np.testing.assert_allclose(qcore.ket_to_density(qcore.KET0).data, np.diag([1, 0]), atol=0)
    np.testing.assert_allclose(qcore.ket_to_density(qcore.KET_PLUS).data, np.full((2, 2), 0.5), atol=1e-15)
    s3 = math.sqrt(3) / 4
    np.testing.assert_allclose(
        qcore.ket_to_density(qcore.theta_ket(math.pi / 3)).data, [[0.25, s3], [s3, 0.75]], atol=1e-15
    )


def test_ket_validation():
    with pytest.raises(NormalizationError):
        qcore.ket(1, 1)
    with pytest.raises(DimensionError):
        qcore.ket(1, 0, 0)
    assert qcore.ket(0, 0, 1, 0).dim == 4


def test_density_validation():
    with pytest.raises(StateError):
        qcore.DensityMatrix([[1, 0.1], [0, 0]])  # not Hermitian
    with pytest.raises(StateError):
        qcore.DensityMatrix(np.eye(2))  # trace 2
    with pytest.raises(StateError):
        qcore.DensityMatrix([[1.5, 0], [0, -0.5]])
    with pytest.raises(DimensionError):
        qcore.DensityMatrix(np.eye(3) / 3)
    rho = qcore.DensityMatrix(np.eye(4) / 4)
    with pytest.raises(ValueError):
        rho.data[0, 0] = 1


def test_tensor_examples():
    np.testing.assert_array_equal(qcore.tensor(np.eye(2), np.eye(2)), np.eye(4))
    np.testing.assert_array_equal(qcore.tensor(qcore.SIGMA_Z, qcore.SIGMA_Z), np.diag([1, -1, -1, 1]))
    expected = np.zeros((4, 4))
    expected[:2, 2:] = expected[2:, :2] = np.eye(2)
    np.testing.assert_array_equal(qcore.tensor(qcore.SIGMA_X, np.eye(2)), expected)
    with pytest.raises(DimensionError):
        qcore.tensor(np.eye(4), np.eye(2))


def test_partial_trace_examples():
    plus = qcore.ket_to_density(qcore.KET_PLUS).data
    env = qcore.ket_to_density(qcore.theta_ket(0.7)).data
    np.testing.assert_allclose(qcore.partial_trace_env(qcore.tensor(plus, env)).data, plus, atol=1e-15)
    bell = np.array([1, 0, 0, 1]) / SQ2
    np.testing.assert_allclose(qcore.partial_trace_env(np.outer(bell, bell)).data, np.eye(2) / 2, atol=1e-15)


def test_partial_trace_round_trip_random(rng):
    for _ in range(120):
        rs, re = random_density(rng, 2), random_density(rng, 2)
        out = qcore.partial_trace_env_array(qcore.tensor(rs, re))
        assert np.max(np.abs(out - rs)) <= 1e-14


def test_trace_norm_examples():
    assert qcore.trace_norm(np.zeros((2, 2))) == 0.0
    assert qcore.trace_norm(qcore.SIGMA_X) == pytest.approx(2.0, abs=1e-14)
    diff = qcore.ket_to_density(qcore.KET_PLUS).data - qcore.ket_to_density(qcore.KET_MINUS).data
    assert qcore.trace_norm(diff) == pytest.approx(2.0, abs=1e-14)


def test_trace_norm_non_hermitian(rng):
    for _ in range(20):
        a = random_matrix(rng, 4)
        assert qcore.trace_norm(a) == pytest.approx(np.linalg.svd(a, compute_uv=False).sum(), rel=1e-10)


def test_fidelity_examples():
    p0 = qcore.ket_to_density(qcore.KET0).data
    p1 = qcore.ket_to_density(qcore.KET1).data
    plus = qcore.ket_to_density(qcore.KET_PLUS).data
    assert qcore.fidelity(plus, plus) == pytest.approx(1.0, abs=1e-15)
    assert qcore.fidelity(p0, p1) == 0.0
    assert abs(qcore.fidelity(plus, np.eye(2) / 2) - 1 / SQ2) <= 1e-12
    with pytest.raises(UndefinedError):
        qcore.fidelity(plus, np.zeros((2, 2)))
    with pytest.raises(DimensionError):
        qcore.fidelity(plus, np.eye(4) / 4)


def test_pauli_decompose_examples():
    np.testing.assert_allclose(qcore.pauli_decompose(np.eye(2)), [SQ2, 0, 0, 0], atol=1e-15)
    np.testing.assert_allclose(qcore.pauli_decompose(qcore.SIGMA_Z), [0, 0, 0, SQ2], atol=1e-15)
    plus = qcore.ket_to_density(qcore.KET_PLUS).data
    np.testing.assert_allclose(qcore.pauli_decompose(plus), [1 / SQ2, 1 / SQ2, 0, 0], atol=1e-15)


def test_pauli_basis_orthonormal():
    for dim in (2, 4):
        b = qcore.pauli_basis(dim)
        gram = np.array([[np.trace(x.conj().T @ y) for y in b] for x in b])
        np.testing.assert_allclose(gram, np.eye(dim * dim), atol=1e-14)
    with pytest.raises(DimensionError):
        qcore.pauli_basis(3)


def test_expectation_examples():
    p0 = qcore.ket_to_density(qcore.KET0)
    plus = qcore.ket_to_density(qcore.KET_PLUS)
    assert qcore.expectation(p0, qcore.SIGMA_Z) == 1
    assert qcore.expectation(np.eye(2) / 2, qcore.SIGMA_X) == 0
    assert qcore.expectation(plus, qcore.SIGMA_MINUS) == pytest.approx(0.5, abs=1e-15)
    np.testing.assert_array_equal(qcore.SIGMA_MINUS, [[0, 1], [0, 0]])


def test_rotation_matches_matrix_exponential():
    for axis, pauli in (("x", qcore.SIGMA_X), ("y", qcore.SIGMA_Y), ("z", qcore.SIGMA_Z)):
        for sign in (1, -1):
            angle = 0.73
            w, v = np.linalg.eigh(sign * pauli)
            ref = v @ np.diag(np.exp(-0.5j * angle * w)) @ v.conj().T
            got = qcore.rotation(("+" if sign > 0 else "-") + axis, angle)
            np.testing.assert_allclose(got, ref, atol=1e-15)
    with pytest.raises(ValueError):
        qcore.rotation("w", 1.0)


def test_apply_kraus_dephasing():
    p = 0.3
    kraus = [math.sqrt(1 - p) * np.eye(2), math.sqrt(p) * qcore.SIGMA_Z]
    out = qcore.apply_kraus(np.full((2, 2), 0.5), kraus)
    np.testing.assert_allclose(out, [[0.5, 0.5 * (1 - 2 * p)], [0.5 * (1 - 2 * p), 0.5]], atol=1e-15)


def test_jacobi_against_numpy(rng):
    for _ in range(200):
        a = random_matrix(rng, 4)
        h = (a + a.conj().T) / 2
        np.testing.assert_allclose(qcore.eigvalsh(h), np.linalg.eigvalsh(h), atol=1e-12)


def test_jacobi_degenerate():
    np.testing.assert_allclose(qcore.eigvalsh(np.eye(4)), np.ones(4), atol=0)
    np.testing.assert_allclose(qcore.eigvalsh(np.diag([2.0, -1, 2, -1])), [-1, -1, 2, 2], atol=0)


@settings(max_examples=150, deadline=None)
@given(densities(dim=4))
def test_random_states_satisfy_invariants(rho):
    dm = qcore.DensityMatrix(rho)
    a = dm.data
    assert np.max(np.abs(a - a.conj().T)) <= 1e-12
    assert abs(np.trace(a) - 1) <= 1e-12
    assert qcore.eigvalsh(a)[0] >= -1e-10


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([2, 4]))
def test_pauli_round_trip(seed, dim):
    m = random_matrix(np.random.default_rng(seed), dim)
    assert np.max(np.abs(qcore.pauli_reconstruct(qcore.pauli_decompose(m)) - m)) <= 1e-12


@settings(max_examples=150, deadline=None)
@given(densities(dim=4), densities(dim=4), densities(dim=4))
def test_trace_norm_triangle(a, b, c):
    assert qcore.trace_norm(a - c) <= qcore.trace_norm(a - b) + qcore.trace_norm(b - c) + 1e-10


@settings(max_examples=150, deadline=None)
@given(densities(dim=2), densities(dim=2))
def test_fidelity_symmetric(a, b):
    assert qcore.fidelity(a, b) == qcore.fidelity(b, a)
