import numpy as np
import pytest

from loewner.errors import ShapeMismatch
from loewner.linalg import eig_hermitian, loewner_leq, min_eigenvalue
from loewner.tuples import commuting_tuple
from loewner.harness import (
    EXI1_S,
    EXI1_T,
    TrialConfig,
    intermediate_search,
    random_commuting_tuple,
    random_ordered_pair,
    random_unitary,
    run_fuzz,
    trial_rng,
)
from loewner.cli import report_to_doc
from loewner.serialize import canonical_dumps


class TestRandomSources:
    def test_trial_rng_is_deterministic(self):
        a = trial_rng(3, 7).standard_normal(5)
        b = trial_rng(3, 7).standard_normal(5)
        c = trial_rng(3, 8).standard_normal(5)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_random_unitary(self):
        q = random_unitary(5, trial_rng(0, 0))
        assert np.linalg.norm(q.conj().T @ q - np.eye(5)) <= 1e-12

    def test_random_commuting_tuple_properties(self):
        rng = trial_rng(1, 0)
        box = ((-0.4, 0.4), (-0.4, 0.4))
        s = random_commuting_tuple(4, 2, box, rng)
        assert s.n == 4 and s.d == 2
        for r in range(2):
            for q in range(r + 1, 2):
                comm = s.mats[r] @ s.mats[q] - s.mats[q] @ s.mats[r]
                assert np.linalg.norm(comm) <= 1e-10
        for r, m in enumerate(s.mats):
            w, _ = eig_hermitian(m)
            assert np.all(w >= box[r][0] - 1e-9)
            assert np.all(w <= box[r][1] + 1e-9)

    def test_ordered_pair_is_ordered_and_in_box(self):
        box = ((-0.4, 0.4), (-0.4, 0.4))
        for k in range(10):
            rng = trial_rng(2, k)
            s, t = random_ordered_pair(3, 2, box, rng)
            for a, b in zip(s.mats, t.mats):
                assert loewner_leq(a, b)
            for tup in (s, t):
                for r, m in enumerate(tup.mats):
                    w, _ = eig_hermitian(m)
                    assert np.all(w >= box[r][0] - 1e-9)
                    assert np.all(w <= box[r][1] + 1e-9)


class TestTrialConfig:
    def test_mode_validated(self):
        with pytest.raises(ShapeMismatch):
            TrialConfig(seed=1, mode="nonsense")

    def test_box_dimension_must_match(self):
        with pytest.raises(ShapeMismatch):
            TrialConfig(seed=1, d=3, box=((0.0, 1.0), (0.0, 1.0)))


class TestFuzzModes:
    def test_global_mode_passes(self):
        rep = run_fuzz(TrialConfig(seed=11, trials=25, mode="global"))
        assert rep.failures == 0
        assert rep.passes == 25
        assert rep.worst_violation >= -1e-8

    def test_local_mode_passes(self):
        rep = run_fuzz(TrialConfig(seed=12, trials=25, mode="local",
                                   box=((0.5, 2.0), (0.5, 2.0))))
        assert rep.failures == 0

    def test_geomean_mode_passes(self):
        rep = run_fuzz(TrialConfig(seed=13, trials=25, mode="geomean",
                                   box=((0.5, 2.0), (0.5, 2.0)),
                                   s_exponent=0.5))
        assert rep.failures == 0
        assert rep.worst_violation >= -1e-8

    def test_geomean_zero_exponent_is_exact(self):
        rep = run_fuzz(TrialConfig(seed=14, trials=10, mode="geomean",
                                   box=((0.5, 2.0), (0.5, 2.0)),
                                   s_exponent=0.0))
        assert rep.failures == 0
        assert rep.worst_violation == 0.0

    def test_path_mode_passes_and_tracks_integral(self):
        rep = run_fuzz(TrialConfig(seed=15, trials=5, mode="path", panels=32))
        assert rep.failures == 0
        assert rep.stats["worst_integral_error"] <= 1e-6

    def test_reports_are_byte_identical(self):
        cfg = TrialConfig(seed=42, trials=15, mode="global")
        r1 = run_fuzz(cfg)
        r2 = run_fuzz(cfg)
        assert canonical_dumps(report_to_doc(r1)) == canonical_dumps(report_to_doc(r2))


class TestEndpointMatrices:
    def test_endpoints_commute_slotwise(self):
        commuting_tuple(EXI1_S)
        commuting_tuple(EXI1_T)

    def test_endpoints_are_ordered(self):
        for a, b in zip(EXI1_S, EXI1_T):
            assert loewner_leq(a, b)

    def test_endpoint_spectra(self):
        w1, _ = eig_hermitian(EXI1_T[0])
        w2, _ = eig_hermitian(EXI1_T[1])
        assert np.allclose(w1, [5.0 - np.sqrt(5.0), 5.0 + np.sqrt(5.0)], atol=1e-12)
        assert np.allclose(w2, [3.0 - np.sqrt(5.0), 3.0 + np.sqrt(5.0)], atol=1e-12)

    def test_no_commuting_intermediate_found_in_small_budget(self):
        res = intermediate_search(EXI1_S, EXI1_T, budget=5000, seed=99)
        assert not res.found
        assert res.evaluations <= 5000
        # annealing keeps the best separated candidate in view
        assert res.best_violation > 1e-4


class TestIntermediateViaRunFuzz:
    def test_report_shape(self):
        rep = run_fuzz(TrialConfig(seed=5, trials=4000, mode="intermediate"))
        assert rep.failures == 0
        assert rep.stats["found"] is False
        assert rep.stats["evaluations"] <= 4000
