"""Tests for the witness closed forms, the product minimum, and the search.

The dense 256-dimensional contraction is the ground truth everywhere; the
closed forms and the search outputs are checked against it directly.
"""

import math
from math import comb

import numpy as np
import pytest

from wstatekit.optics import NoiseModel
from wstatekit.witness import (
    DIM,
    N_QUBITS,
    DenseState,
    ProductAnsatz,
    WitnessParams,
    dense_expectation,
    find_witness,
    min_product_expectation,
    noise_density,
    product_expectation,
    product_state_vector,
    rho_expectation,
    target_vector,
    witness_matrix,
)


def test_target_vector_structure():
    vec = target_vector()
    weights = np.array([bin(i).count("1") for i in range(DIM)])
    assert np.all(vec[weights != 1] == 0.0)
    assert np.all(vec[weights == 1] == 1.0 / math.sqrt(8))
    assert abs(np.sum(vec**2) - 1.0) < 1e-15


def test_witness_matrix_is_symmetric_with_weight_diagonal():
    params = WitnessParams(1.5, -0.5, 0.25)
    matrix = witness_matrix(params)
    assert np.max(np.abs(matrix - matrix.T)) == 0.0
    weights = np.array([bin(i).count("1") for i in range(DIM)])
    # Off the single-excitation block the diagonal is the bare projector weight.
    assert matrix[0, 0] == 1.5
    assert np.all(np.diag(matrix)[weights == 2] == 0.25)
    assert np.all(np.diag(matrix)[weights == 3] == 0.0)
    single = np.flatnonzero(weights == 1)
    assert np.allclose(np.diag(matrix)[single], -0.5 - 1.0 / 8.0, atol=1e-15)


def test_vacuum_product_reads_alpha():
    """a0 = b0 = 1 leaves only the zero-excitation projector."""
    params = WitnessParams(0.73, 2.0, -1.0)
    for k in (1, 4, 7):
        value = product_expectation(params, ProductAnsatz(k, 1.0, 1.0))
        assert abs(value - 0.73) < 1e-15


def test_product_ansatz_validation_and_normalization():
    ansatz = ProductAnsatz(3, 0.6, 0.8)
    assert abs(ansatz.a0**2 + ansatz.a1**2 - 1.0) < 1e-15
    assert abs(ansatz.b0**2 + ansatz.b1**2 - 1.0) < 1e-15
    for bad in (0, 8):
        with pytest.raises(ValueError):
            ProductAnsatz(bad, 0.5, 0.5)
    for bad in (-0.1, 1.1):
        with pytest.raises(ValueError):
            ProductAnsatz(1, bad, 0.5)


def test_product_state_vector_is_normalized_tensor_power():
    ansatz = ProductAnsatz(2, 0.6, 1.0)
    vec = product_state_vector(ansatz)
    assert abs(np.sum(vec**2) - 1.0) < 1e-12
    # With b0 = 1 the last six qubits stay in |0>, so only indices whose
    # low six bits vanish can be populated.
    populated = np.flatnonzero(np.abs(vec) > 1e-15)
    assert np.all(populated % 64 == 0)


def test_closed_form_matches_dense_oracle():
    rng = np.random.default_rng(12)
    params = WitnessParams(1.1, 0.4, 0.2)
    for _ in range(100):
        ansatz = ProductAnsatz(
            int(rng.integers(1, N_QUBITS)),
            float(rng.uniform(0, 1)),
            float(rng.uniform(0, 1)),
        )
        dense = dense_expectation(params, DenseState(vector=product_state_vector(ansatz)))
        assert abs(product_expectation(params, ansatz) - dense) < 1e-12


def test_closed_form_at_balanced_split():
    """k = 4 with both blocks at 1/sqrt(2), against the dense contraction."""
    params = WitnessParams(0.0, 1.0, 0.0)
    ansatz = ProductAnsatz(4, 1.0 / math.sqrt(2), 1.0 / math.sqrt(2))
    dense = dense_expectation(params, DenseState(vector=product_state_vector(ansatz)))
    assert abs(product_expectation(params, ansatz) - dense) < 1e-14


def test_noise_density_is_a_state():
    rho = noise_density(NoiseModel(0.7, 0.1))
    assert abs(float(np.real(np.trace(rho))) - 1.0) < 1e-12
    assert np.max(np.abs(rho - rho.conj().T)) < 1e-15
    eigenvalues = np.linalg.eigvalsh(rho)
    assert eigenvalues.min() > -1e-12
    weights = np.array([bin(i).count("1") for i in range(DIM)])
    assert np.all(np.abs(np.diag(rho)[weights > 2]) == 0.0)


def test_rho_expectation_matches_dense_and_boundary_root():
    rng = np.random.default_rng(13)
    params = WitnessParams(0.3, 0.8, 0.6)
    for _ in range(25):
        noise = NoiseModel(float(rng.uniform(0, 1)), float(rng.uniform(0, 1)))
        dense = dense_expectation(params, DenseState(density=noise_density(noise)))
        assert abs(rho_expectation(params, noise) - dense) < 1e-12
    # At q = 0 the witness value crosses zero at p = (8 beta - 1) / 7.
    root = (8.0 * params.beta - 1.0) / 7.0
    assert abs(rho_expectation(params, NoiseModel(root, 0.0))) < 1e-15


def test_dense_state_validation():
    with pytest.raises(ValueError):
        DenseState()
    with pytest.raises(ValueError):
        DenseState(vector=np.ones(DIM), density=np.eye(DIM) / DIM)
    with pytest.raises(ValueError):
        DenseState(vector=np.ones(DIM))  # not normalized
    with pytest.raises(ValueError):
        DenseState(density=np.eye(DIM))  # trace 256
    skew = np.eye(DIM, dtype=complex) / DIM
    skew[0, 1] = 1e-3
    with pytest.raises(ValueError):
        DenseState(density=skew)


def test_witness_params_must_be_finite():
    with pytest.raises(ValueError):
        WitnessParams(np.nan, 0.0, 0.0)


def _overlap_oracle_max():
    """Brute maximum of the squared target overlap over dense product
    vectors on a 33 x 33 amplitude grid, all splits."""
    target = target_vector()
    best = 0.0
    grid = np.linspace(0.0, 1.0, 33)
    for k in range(1, N_QUBITS):
        for a0 in grid:
            for b0 in grid:
                vec = product_state_vector(ProductAnsatz(int(k), float(a0), float(b0)))
                best = max(best, float(vec @ target) ** 2)
    return best


def test_min_product_expectation_at_zero_params():
    """With no projector terms the minimum is minus the best overlap."""
    value, ansatz = min_product_expectation(WitnessParams(0.0, 0.0, 0.0))
    assert abs(value + (7.0 / 8.0) ** 7) < 1e-9
    # The maximizer is the symmetric product with per-qubit weight 7/8 on |0>.
    assert abs(ansatz.a0 - math.sqrt(7.0 / 8.0)) < 1e-3
    assert abs(ansatz.b0 - math.sqrt(7.0 / 8.0)) < 1e-3
    oracle = _overlap_oracle_max()
    # The dense scan never beats the reported optimum and lands near it.
    assert oracle <= -value + 1e-12
    assert oracle >= -value - 1e-3


def test_min_product_expectation_nonnegative_for_safe_params():
    # beta = 1 dominates the overlap by Cauchy-Schwarz, so nothing is negative.
    value, _ = min_product_expectation(WitnessParams(4.0, 1.0, 4.0))
    assert value >= -1e-12


def test_find_witness_certifies_target_region():
    cert = find_witness(0.7, 0.2)
    assert cert.feasible
    assert cert.margin < -1e-9
    assert cert.min_product_expectation >= -1e-9
    assert cert.params.beta >= 1.0 / 8.0 - 1e-9
    assert cert.params.gamma >= -1e-12
    # Negative on the whole rectangle, sampled at step 0.05.
    for p in np.linspace(0.7, 1.0, 7):
        for q in np.linspace(0.0, 0.2, 5):
            assert rho_expectation(cert.params, NoiseModel(float(p), float(q))) < 0
    # A representative noisy operating point sits inside the region.
    assert rho_expectation(cert.params, NoiseModel(0.8, 0.04)) < 0


def test_find_witness_certificate_dictionary_layout():
    cert = find_witness(0.7, 0.2)
    payload = cert.to_dict()
    assert set(payload) == {
        "alpha", "beta", "gamma", "min_product_expectation", "argmin",
        "worst_corner", "margin", "rounds", "feasible",
    }
    assert set(payload["argmin"]) == {"k", "a0", "b0"}
    assert set(payload["worst_corner"]) == {"p", "q"}
    assert payload["feasible"] is True
    assert payload["worst_corner"]["p"] in (0.7, 1.0)


def test_find_witness_ideal_point():
    cert = find_witness(1.0, 0.0)
    assert cert.feasible
    # At the pure target the witness reads beta - 1.
    assert abs(cert.margin - (cert.params.beta - 1.0)) < 1e-9
    assert cert.margin < -0.5


def test_find_witness_rejects_fully_mixed_point():
    """p = 0 admits a separable decomposition, so no witness can exist."""
    cert = find_witness(0.0, 0.0)
    assert not cert.feasible
    assert cert.margin >= -1e-9
    assert cert.min_product_expectation >= -1e-9


def test_find_witness_input_validation():
    for p_min, q_max in ((-0.1, 0.0), (1.5, 0.0), (0.5, 1.0), (0.5, -0.1)):
        with pytest.raises(ValueError):
            find_witness(p_min, q_max)


def test_certified_params_verified_against_dense_sampling():
    """Spot-check the LP answer on dense product states it never sampled."""
    cert = find_witness(0.7, 0.2)
    matrix_free = WitnessParams(cert.params.alpha, cert.params.beta, cert.params.gamma)
    rng = np.random.default_rng(99)
    for _ in range(50):
        ansatz = ProductAnsatz(
            int(rng.integers(1, N_QUBITS)),
            float(rng.uniform(0, 1)),
            float(rng.uniform(0, 1)),
        )
        dense = dense_expectation(
            matrix_free, DenseState(vector=product_state_vector(ansatz))
        )
        assert dense >= -1e-9
