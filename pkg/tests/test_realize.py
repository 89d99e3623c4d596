import numpy as np
import pytest

from loewner.errors import (
    DomainViolation,
    NotUnitary,
    PoleHit,
    ShapeMismatch,
)
from loewner.linalg import GradedSpace, min_eigenvalue
from loewner.tuples import commuting_tuple, joint_diagonalize
from loewner.harness import canonical_realization, random_commuting_tuple, trial_rng
from loewner.realize import (
    CauchyRealization,
    bpoint_check,
    bpoint_sum,
    box_segment_in_resolvent,
    complete_to_unitary,
    discrete_measure,
    eval_cauchy,
    eval_on_tuple,
    eval_selfadjoint,
    from_discrete_measure,
    herglotz_eval,
    in_mu_spectrum,
    lifted_pencil,
    mobius_alpha,
    mobius_beta,
    mobius_rho,
    model_residual,
    model_vector,
    mu_resolvent_norm,
    path_derivative_check,
    reduce_to_cauchy,
    rescale_to_box,
    select_tau,
    synthesize_selfadjoint,
    transfer_eval,
    transfer_realization,
    _upper_probe_points,
)


def _product_model():
    """Transfer realization of the product of the two coordinates."""
    g = GradedSpace((1, 1))
    return transfer_realization(
        0.0, np.array([0.0, 1.0]), np.array([1.0, 0.0]),
        np.array([[0.0, 0.0], [1.0, 0.0]]), g, unitary_flag=True)


class TestMobius:
    def test_alpha_beta_inverse_pair(self):
        rng = np.random.Generator(np.random.Philox(key=21))
        z = rng.standard_normal(30) + 1j * (0.1 + rng.random(30))
        lam = mobius_beta(z)
        assert np.all(np.abs(lam) < 1.0)
        assert np.allclose(mobius_alpha(lam), z, atol=1e-12)

    def test_rho_is_an_involution_up_to_sign(self):
        rng = np.random.Generator(np.random.Philox(key=22))
        z = rng.standard_normal(20) + 1j * (0.1 + rng.random(20))
        for t in (-1.0, -0.3, 0.4, 0.9):
            w = mobius_rho(t, z)
            assert np.all(w.imag > 0)
            assert np.allclose(mobius_rho(-t, w), z, atol=1e-10)

    def test_pole_raises(self):
        with pytest.raises(PoleHit):
            mobius_alpha(1.0)
        with pytest.raises(PoleHit):
            mobius_beta(-1j)


class TestTransferRealization:
    def test_product_model_values(self):
        tr = _product_model()
        assert transfer_eval(tr, (0.5, 0.5)) == pytest.approx(0.25)
        assert transfer_eval(tr, (0.3, -0.4)) == pytest.approx(-0.12)
        assert abs(transfer_eval(tr, (0.9j, 0.9))) <= 1.0

    def test_domain_check(self):
        tr = _product_model()
        with pytest.raises(DomainViolation):
            transfer_eval(tr, (1.5, 0.0))

    def test_rejects_expanding_block(self):
        g = GradedSpace((1,))
        with pytest.raises(NotUnitary):
            transfer_realization(2.0, np.array([0.0]), np.array([0.0]),
                                 np.array([[0.0]]), g)

    def test_rejects_false_unitary_flag(self):
        g = GradedSpace((1,))
        with pytest.raises(NotUnitary):
            transfer_realization(0.5, np.array([0.0]), np.array([0.0]),
                                 np.array([[0.0]]), g, unitary_flag=True)

    def test_model_identity(self):
        # the kernel identity 1 - phi(mu)* phi(lam) =
        # u_mu* (I - Lambda_mu* Lambda_lam) u_lam holds for unitary blocks
        tr = _product_model()
        rng = np.random.Generator(np.random.Philox(key=23))
        for _ in range(20):
            lam = 0.7 * (rng.standard_normal(2) + 1j * rng.standard_normal(2))
            lam /= max(1.0, np.max(np.abs(lam)) / 0.7)
            mu = 0.7 * (rng.standard_normal(2) + 1j * rng.standard_normal(2))
            mu /= max(1.0, np.max(np.abs(mu)) / 0.7)
            assert abs(model_residual(tr, lam, mu)) <= 1e-10

    def test_model_vector_shape(self):
        tr = _product_model()
        u = model_vector(tr, (0.5, 0.5))
        assert u.shape == (2,)


class TestBPoints:
    def test_regular_boundary_point(self):
        tr = _product_model()
        res = bpoint_check(tr, (1.0, 1.0))
        assert res.is_bpoint
        assert res.relative_residual <= 1e-10

    def test_bad_tau_rejected(self):
        tr = _product_model()
        with pytest.raises(DomainViolation):
            bpoint_check(tr, (0.5, 0.5))


class TestUnitaryCompletion:
    def test_completes_rank_deficient_partial_isometry(self):
        u = complete_to_unitary(np.array([[0.0, 0.0], [1.0, 0.0]]))
        assert u.shape == (2, 2)
        assert np.linalg.norm(u.conj().T @ u - np.eye(2)) <= 1e-12
        # the isometric part is preserved
        assert np.allclose(u[:, 0], [0.0, 1.0])

    def test_unitary_input_unchanged(self):
        q = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
        assert np.allclose(complete_to_unitary(q), q)

    def test_rejects_intermediate_singular_values(self):
        with pytest.raises(NotUnitary):
            complete_to_unitary(np.array([[0.5, 0.0], [0.0, 0.0]]))
        with pytest.raises(NotUnitary):
            complete_to_unitary(2.0 * np.eye(2))


class TestSynthesis:
    def test_frozen_synthesis_data(self):
        tr = _product_model()
        sr = synthesize_selfadjoint(tr, np.array([1j, 1j]), tau=1j)
        assert sr.t == pytest.approx(-1.0, abs=1e-12)
        assert sr.c == pytest.approx(0.0, abs=1e-10)
        assert np.allclose(sr.x, [[1.0, -1.0 + 1j], [-1.0 - 1j, 1.0]], atol=1e-10)
        assert np.allclose(sr.v, [1j, 0.0], atol=1e-10)
        assert sr.synthesis_residual <= 1e-8

    def test_automatic_tau_selection(self):
        tr = _product_model()
        u = tr.block_unitary()
        tau = select_tau(u)
        # the block spectrum is the cube roots of unity; tau keeps distance
        roots = np.exp(2j * np.pi * np.arange(3) / 3)
        assert abs(abs(tau) - 1.0) <= 1e-12
        assert np.min(np.abs(roots - tau)) >= 1e-3
        sr = synthesize_selfadjoint(tr, np.array([1j, 1j]))
        assert sr.synthesis_residual <= 1e-8

    def test_pick_property_of_synthesized_function(self):
        tr = _product_model()
        sr = synthesize_selfadjoint(tr, np.array([1j, 1j]), tau=1j)
        for z in _upper_probe_points(2, 40):
            assert eval_selfadjoint(sr, z).imag >= -1e-10

    def test_reduction_to_cauchy_form(self):
        tr = _product_model()
        sr = synthesize_selfadjoint(tr, np.array([1j, 1j]), tau=1j)
        cr = reduce_to_cauchy(sr)
        assert cr.c == pytest.approx(-1.0, abs=1e-10)
        assert np.allclose(cr.v1, [1.0 + 1j, 1.0 - 1j], atol=1e-10)
        assert cr.equivalence_residual <= 1e-8
        for z in _upper_probe_points(2, 20, key=0x51):
            lhs = eval_cauchy(cr, z)
            rhs = eval_selfadjoint(sr, z)
            assert abs(lhs - rhs) <= 1e-8 * (1.0 + abs(rhs))


class TestCanonicalRealization:
    def test_value_at_diagonal_imaginary_point(self):
        cr = canonical_realization()
        assert eval_cauchy(cr, (1j, 1j)) == pytest.approx(0.5j, abs=1e-12)

    def test_resolvent_norm_oracle(self):
        cr = canonical_realization()
        norm = mu_resolvent_norm(cr.x, cr.grading, (1j, 1j))
        assert norm == pytest.approx(1.0 / np.sqrt(2.0), abs=1e-12)

    def test_singular_set_is_the_product_hyperbola(self):
        cr = canonical_realization()
        assert in_mu_spectrum(cr.x, cr.grading, (1.0, 1.0))
        assert in_mu_spectrum(cr.x, cr.grading, (2.0, 0.5))
        assert not in_mu_spectrum(cr.x, cr.grading, (0.3, 0.2))
        assert not in_mu_spectrum(cr.x, cr.grading, (0.0, 0.0))

    def test_box_avoids_singular_set(self):
        cr = canonical_realization()
        box = ((-0.4, 0.4), (-0.4, 0.4))
        assert box_segment_in_resolvent(cr.x, cr.grading, box)


class TestResolventBound:
    def test_norm_bounded_by_imaginary_part(self):
        # 100 seeded (X, grading, z) triples with z in the upper or lower
        # product half-plane
        violations = 0
        for k in range(100):
            rng = trial_rng(0xD2, k)
            d = int(rng.integers(1, 4))
            dims = tuple(int(rng.integers(1, 4)) for _ in range(d))
            g = GradedSpace(dims)
            m = g.total
            h = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
            x = 0.5 * (h + h.conj().T)
            sign = 1.0 if rng.random() < 0.5 else -1.0
            z = rng.standard_normal(d) + 1j * sign * (0.05 + rng.random(d))
            bound = 1.0 / np.min(np.abs(z.imag))
            if mu_resolvent_norm(x, g, z) > bound + 1e-9:
                violations += 1
        assert violations == 0


class TestTupleEvaluation:
    def test_matches_spectral_calculus_on_diagonal_tuples(self):
        cr = canonical_realization()
        rng = np.random.Generator(np.random.Philox(key=31))
        pts = rng.uniform(-0.4, 0.4, size=(3, 2))
        s = commuting_tuple((np.diag(pts[:, 0]).astype(complex),
                             np.diag(pts[:, 1]).astype(complex)))
        m = eval_on_tuple(cr, s)
        expected = np.diag([eval_cauchy(cr, x) for x in pts]).real
        assert np.linalg.norm(m - expected) <= 1e-10

    def test_matches_spectral_calculus_after_conjugation(self):
        cr = canonical_realization()
        worst = 0.0
        for k in range(30):
            rng = trial_rng(0xE4, k)
            n = int(rng.integers(2, 5))
            s = random_commuting_tuple(n, 2, ((-0.4, 0.4), (-0.4, 0.4)), rng)
            js = joint_diagonalize(s)
            m = eval_on_tuple(cr, s)
            vals = np.array([eval_cauchy(cr, x).real for x in js.points])
            expected = js.q @ np.diag(vals) @ js.q.conj().T
            worst = max(worst, float(np.linalg.norm(m - expected)))
        assert worst <= 1e-8

    def test_lifted_pencil_shape(self):
        cr = canonical_realization()
        mats = (np.diag([0.1, 0.2]).astype(complex),
                np.diag([0.0, -0.1]).astype(complex))
        pencil = lifted_pencil(cr, mats)
        assert pencil.shape == (4, 4)

    def test_derivative_along_psd_segment_is_psd(self):
        cr = canonical_realization()
        rng = trial_rng(0xE5, 0)
        s = random_commuting_tuple(3, 2, ((-0.3, 0.0), (-0.3, 0.0)), rng)
        t = commuting_tuple(tuple(m + 0.05 * np.eye(3) for m in s.mats))
        g = path_derivative_check(cr, s.mats, t.mats, 0.5)
        assert min_eigenvalue(g) >= -1e-10


class TestBoxRescale:
    def test_identity_box_is_noop(self):
        cr = canonical_realization()
        box = ((-1.0, 1.0), (-1.0, 1.0))
        y, bm = rescale_to_box(cr.x, cr.grading, box)
        assert np.allclose(bm.midpoints, 0.0)
        assert np.allclose(bm.half_widths, 1.0)
        assert np.allclose(y, cr.x)

    def test_round_trip_of_points(self):
        cr = canonical_realization()
        _, bm = rescale_to_box(cr.x, cr.grading, ((0.5, 2.0), (-1.0, 3.0)))
        z = np.array([1.2 + 0.3j, 0.4 - 0.1j])
        assert np.allclose(bm.inverse_point(bm.forward_point(z)), z, atol=1e-12)

    def test_degenerate_interval_rejected(self):
        cr = canonical_realization()
        from loewner.errors import DegenerateBox
        with pytest.raises(DegenerateBox):
            rescale_to_box(cr.x, cr.grading, ((0.0, 0.0), (-1.0, 1.0)))


class TestDiscreteMeasures:
    def test_line_measure_cauchy_transform(self):
        dm = discrete_measure("line", [1.0, -2.0], [0.5, 2.0])
        cr = from_discrete_measure(dm)
        z = 0.3 + 0.7j
        expected = 0.5 / (1.0 - z) + 2.0 / (-2.0 - z)
        got = eval_cauchy(cr, (z,))
        assert got == pytest.approx(expected, abs=1e-12)
        assert got.imag > 0

    def test_herglotz_values_have_positive_real_part(self):
        dm = discrete_measure("circle", [0.3, 1.2, -2.0], [0.1, 0.7, 0.4])
        rng = np.random.Generator(np.random.Philox(key=33))
        for _ in range(20):
            lam = (rng.standard_normal() + 1j * rng.standard_normal())
            lam *= 0.9 / max(1.0, abs(lam) / 0.9)
            assert herglotz_eval(dm, lam).real >= -1e-12
        with pytest.raises(DomainViolation):
            herglotz_eval(dm, 1.0 + 0j)

    def test_boundary_sum_of_geometric_masses(self):
        # atoms at angles 2^-n carrying mass 2^-n |1 - e^{i 2^-n}|^2 make
        # the boundary sum at 1 a finite geometric series
        ns = np.arange(1, 21)
        thetas = 2.0 ** (-ns.astype(float))
        masses = 2.0 ** (-ns.astype(float)) * np.abs(1.0 - np.exp(1j * thetas)) ** 2
        dm = discrete_measure("circle", thetas, masses)
        res = bpoint_sum(dm, 1.0)
        assert not res.atom_at_tau
        assert res.value == pytest.approx(1.0 - 2.0 ** -20, rel=1e-12)

    def test_atom_hit_is_flagged(self):
        dm = discrete_measure("circle", [0.0, 1.0], [0.5, 0.5])
        res = bpoint_sum(dm, 1.0)
        assert res.atom_at_tau
        assert res.value == float("inf")

    def test_bad_support_values(self):
        with pytest.raises(ShapeMismatch):
            discrete_measure("plane", [0.0], [1.0])
        with pytest.raises(ShapeMismatch):
            discrete_measure("line", [0.0], [-1.0])
