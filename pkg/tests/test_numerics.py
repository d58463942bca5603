import numpy as np
import pytest

from gateid.numerics import (
    DEFAULT_CONFIG,
    DimensionCapError,
    NumericConfig,
    choi_vector,
    numeric_rank,
    psd_inverse_sqrt,
    tensor_power,
)

from oracles import choi_oracle, haar_unitary, kron_power_oracle

X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
Z = np.diag([1.0, -1.0]).astype(complex)


def test_config_rejects_bad_tolerances():
    with pytest.raises(ValueError):
        NumericConfig(rank_tol=1.5)
    with pytest.raises(ValueError):
        NumericConfig(psd_tol=-1e-3)
    with pytest.raises(ValueError):
        NumericConfig(dim_cap=0)


class TestTensorPower:
    def test_identity_cube(self):
        np.testing.assert_array_equal(tensor_power(np.eye(2), 3), np.eye(8))

    def test_diagonal_cube_root_phases(self):
        omega = np.exp(2j * np.pi / 3)
        got = tensor_power(np.diag([1.0, omega]), 2)
        np.testing.assert_allclose(got, np.diag([1.0, omega, omega, omega**2]), atol=1e-15)

    def test_pauli_x_square_matches_oracle(self):
        np.testing.assert_array_equal(tensor_power(X, 2), kron_power_oracle(X, 2))
        # anti-diagonal permutation
        np.testing.assert_array_equal(tensor_power(X, 2), np.eye(4)[::-1])

    def test_recursion_structure_is_exact(self):
        rng = np.random.default_rng(7)
        m = haar_unitary(3, rng)
        for n in range(1, 4):
            np.testing.assert_array_equal(
                tensor_power(m, n + 1), np.kron(tensor_power(m, n), m)
            )

    def test_cap(self):
        with pytest.raises(DimensionCapError):
            tensor_power(np.eye(4), 7)  # 4^7 > 4096
        small = NumericConfig(dim_cap=8)
        with pytest.raises(DimensionCapError):
            tensor_power(np.eye(2), 4, small)

    def test_rejects_nonsquare_and_bad_n(self):
        with pytest.raises(ValueError):
            tensor_power(np.ones((2, 3)), 2)
        with pytest.raises(ValueError):
            tensor_power(np.eye(2), 0)


class TestChoiVector:
    def test_identity(self):
        np.testing.assert_array_equal(choi_vector(np.eye(2)), [1, 0, 0, 1])

    def test_pauli_x(self):
        np.testing.assert_array_equal(choi_vector(X), [0, 1, 1, 0])
        np.testing.assert_array_equal(choi_vector(X), choi_oracle(X))

    def test_x_z_orthogonal(self):
        assert np.vdot(choi_vector(X), choi_vector(Z)) == 0.0

    def test_inner_product_is_hilbert_schmidt(self):
        rng = np.random.default_rng(11)
        for d in (2, 3, 4):
            u, v = haar_unitary(d, rng), haar_unitary(d, rng)
            lhs = np.vdot(choi_vector(u), choi_vector(v))
            rhs = np.trace(u.conj().T @ v)
            assert abs(lhs - rhs) < 1e-10


class TestNumericRank:
    def test_orthonormal_pair(self):
        assert numeric_rank([np.array([1.0, 0.0]), np.array([0.0, 1.0])]) == 2

    def test_tolerance_collapse(self):
        eps = 1e-10
        assert numeric_rank([np.array([1.0, 0.0]), np.array([1.0, eps])]) == 1

    def test_pauli_choi_vectors(self):
        paulis = [np.eye(2), X, np.array([[0, -1j], [1j, 0]]), Z]
        assert numeric_rank([choi_vector(p) for p in paulis]) == 4

    def test_zero_input_and_empty(self):
        assert numeric_rank([np.zeros(3), np.zeros(3)]) == 0
        with pytest.raises(ValueError):
            numeric_rank([])

    def test_permutation_and_scaling_invariance(self):
        rng = np.random.default_rng(3)
        vecs = [rng.standard_normal(5) + 1j * rng.standard_normal(5) for _ in range(4)]
        base = numeric_rank(vecs)
        assert numeric_rank(vecs[::-1]) == base
        assert numeric_rank([3.7j * v for v in vecs]) == base
        scaled = [v * (10.0 ** (i - 2)) for i, v in enumerate(vecs)]
        assert numeric_rank(scaled) == base


class TestPsdInverseSqrt:
    def test_identity(self):
        inv, inv_sqrt, rank = psd_inverse_sqrt(np.eye(3))
        np.testing.assert_allclose(inv, np.eye(3), atol=1e-14)
        np.testing.assert_allclose(inv_sqrt, np.eye(3), atol=1e-14)
        assert rank == 3

    def test_rank_deficient_diagonal(self):
        inv, inv_sqrt, rank = psd_inverse_sqrt(np.diag([4.0, 0.0]))
        np.testing.assert_allclose(inv, np.diag([0.25, 0.0]), atol=1e-14)
        np.testing.assert_allclose(inv_sqrt, np.diag([0.5, 0.0]), atol=1e-14)
        assert rank == 1

    def test_uniform_pauli_frame_operator(self):
        # quarter-weighted sum of normalized Pauli Choi projectors is I/4
        paulis = [np.eye(2), X, np.array([[0, -1j], [1j, 0]]), Z]
        r = np.zeros((4, 4), dtype=complex)
        for p in paulis:
            v = choi_oracle(p) / np.sqrt(2.0)
            r += 0.25 * np.outer(v, v.conj())
        np.testing.assert_allclose(r, np.eye(4) / 4, atol=1e-14)
        inv, _, rank = psd_inverse_sqrt(r)
        np.testing.assert_allclose(inv, 4 * np.eye(4), atol=1e-12)
        assert rank == 4

    def test_sqrt_squares_to_inverse_and_commutes(self):
        rng = np.random.default_rng(5)
        a = rng.standard_normal((6, 4)) + 1j * rng.standard_normal((6, 4))
        m = a.conj().T @ a  # PSD, full rank 4
        inv, inv_sqrt, rank = psd_inverse_sqrt(m)
        assert rank == 4
        assert np.linalg.norm(inv_sqrt @ inv_sqrt - inv) < 1e-9
        assert np.linalg.norm(m @ inv - inv @ m) < 1e-9
        assert np.linalg.norm(m @ inv_sqrt - inv_sqrt @ m) < 1e-9

    def test_rejects_non_hermitian_and_negative(self):
        with pytest.raises(ValueError):
            psd_inverse_sqrt(np.array([[0.0, 1.0], [0.0, 0.0]]))
        with pytest.raises(ValueError):
            psd_inverse_sqrt(np.diag([1.0, -0.5]))
