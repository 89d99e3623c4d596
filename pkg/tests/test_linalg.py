import numpy as np
import pytest

from loewner.errors import NonHermitian, ShapeMismatch
from loewner.linalg import (
    GradedSpace,
    eig_hermitian,
    graded_sum,
    loewner_leq,
    min_eigenvalue,
    require_hermitian,
    schur_product,
)


def _random_hermitian(n, rng):
    m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return 0.5 * (m + m.conj().T)


class TestEigHermitian:
    def test_reconstruction(self):
        rng = np.random.Generator(np.random.Philox(key=1))
        for n in (1, 2, 3, 5, 8):
            h = _random_hermitian(n, rng)
            w, q = eig_hermitian(h)
            err = np.linalg.norm(q @ np.diag(w) @ q.conj().T - h)
            assert err <= 1e-9 * (1.0 + np.linalg.norm(h))

    def test_eigenvalues_sorted_real(self):
        rng = np.random.Generator(np.random.Philox(key=2))
        h = _random_hermitian(6, rng)
        w, _ = eig_hermitian(h)
        assert np.all(np.diff(w) >= 0)
        assert w.dtype.kind == "f"

    def test_orthonormal_columns(self):
        rng = np.random.Generator(np.random.Philox(key=3))
        h = _random_hermitian(7, rng)
        _, q = eig_hermitian(h)
        assert np.linalg.norm(q.conj().T @ q - np.eye(7)) <= 1e-10

    def test_known_2x2(self):
        # [[2,1],[1,2]] has eigenvalues 1 and 3
        w, _ = eig_hermitian(np.array([[2.0, 1.0], [1.0, 2.0]]))
        assert np.allclose(w, [1.0, 3.0], atol=1e-12)

    def test_rejects_non_hermitian(self):
        with pytest.raises(NonHermitian):
            eig_hermitian(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_degenerate_spectrum(self):
        w, q = eig_hermitian(np.eye(4) * 2.5)
        assert np.allclose(w, 2.5)
        assert np.linalg.norm(q.conj().T @ q - np.eye(4)) <= 1e-12


class TestMinEigenvalue:
    def test_matches_full_decomposition(self):
        rng = np.random.Generator(np.random.Philox(key=4))
        h = _random_hermitian(5, rng)
        w, _ = eig_hermitian(h)
        assert abs(min_eigenvalue(h) - w[0]) <= 1e-11

    def test_psd_matrix(self):
        assert min_eigenvalue(np.eye(3)) == pytest.approx(1.0)


class TestLoewnerOrder:
    def test_identity_pair(self):
        a = np.diag([1.0, 2.0])
        assert loewner_leq(a, a + 0.5 * np.eye(2))
        assert not loewner_leq(a + 0.5 * np.eye(2), a)

    def test_indefinite_gap(self):
        a = np.zeros((2, 2))
        b = np.diag([1.0, -1.0])
        assert not loewner_leq(a, b)


class TestGradedSpace:
    def test_offsets_and_slices(self):
        g = GradedSpace((2, 3))
        assert g.d == 2 and g.total == 5
        assert g.offsets == (0, 2, 5)
        assert g.block_slice(1) == slice(2, 5)

    def test_rejects_empty_blocks(self):
        with pytest.raises(ShapeMismatch):
            GradedSpace((2, 0))
        with pytest.raises(ShapeMismatch):
            GradedSpace(())

    def test_blockwise_point(self):
        g = GradedSpace((1, 2))
        z = g.blockwise([2.0, 3.0 + 1j])
        assert np.allclose(z, [2.0, 3.0 + 1j, 3.0 + 1j])

    def test_graded_sum_scalar_case(self):
        # with 1x1 matrices the graded sum is the blockwise diagonal
        g = GradedSpace((1, 1))
        m = graded_sum((np.array([[2.0]]), np.array([[5.0]])), g)
        assert np.allclose(m, np.diag([2.0, 5.0]))

    def test_graded_sum_kron_structure(self):
        g = GradedSpace((1, 1))
        s1 = np.array([[0.0, 1.0], [1.0, 0.0]])
        s2 = np.array([[1.0, 0.0], [0.0, -1.0]])
        m = graded_sum((s1, s2), g)
        p1 = np.diag([1.0, 0.0])
        p2 = np.diag([0.0, 1.0])
        expected = np.kron(s1, p1) + np.kron(s2, p2)
        assert np.allclose(m, expected)


class TestHermitianGuard:
    def test_accepts_and_symmetrizes(self):
        h = require_hermitian(np.array([[1.0, 2.0], [2.0, 3.0]]))
        assert np.allclose(h, h.conj().T)

    def test_rejects_large_defect(self):
        with pytest.raises(NonHermitian):
            require_hermitian(np.array([[1.0, 2.0], [0.0, 3.0]]))


def test_schur_product_entrywise():
    a = np.array([[1.0, 2.0], [3.0, 4.0]])
    b = np.array([[2.0, 0.5], [1.0, 2.0]])
    assert np.allclose(schur_product(a, b), a * b)
    with pytest.raises(ShapeMismatch):
        schur_product(a, np.eye(3))
