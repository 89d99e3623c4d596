import numpy as np
from hypothesis import given, settings, strategies as st

from loewner.linalg import GradedSpace, eig_hermitian, min_eigenvalue
from loewner.realize import mobius_alpha, mobius_beta, mobius_rho
from loewner.serialize import canonical_dumps

finite_floats = st.floats(allow_nan=False, allow_infinity=False,
                          allow_subnormal=False, width=64)


@given(finite_floats)
def test_float_formatting_round_trips_exactly(x):
    assert float(canonical_dumps(x)) == x


@given(st.dictionaries(st.text(min_size=1, max_size=8), finite_floats,
                       max_size=6))
def test_canonical_serialization_is_idempotent(doc):
    import json
    text = canonical_dumps(doc)
    assert canonical_dumps(json.loads(text)) == text


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2 ** 32 - 1))
def test_hermitian_eigenvalues_bound_the_rayleigh_quotient(n, seed):
    rng = np.random.Generator(np.random.Philox(key=seed))
    m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    h = 0.5 * (m + m.conj().T)
    w, q = eig_hermitian(h)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    v /= np.linalg.norm(v)
    quot = float(np.real(v.conj() @ h @ v))
    assert w[0] - 1e-9 <= quot <= w[-1] + 1e-9
    assert abs(min_eigenvalue(h) - w[0]) <= 1e-10 * (1.0 + abs(w[0]))


@settings(max_examples=40, deadline=None)
@given(st.floats(-3.0, 3.0), st.floats(0.05, 3.0),
       st.floats(-0.95, 0.95))
def test_mobius_maps_are_mutually_inverse(re, im, t):
    z = complex(re, im)
    lam = complex(mobius_beta(z))
    assert abs(lam) < 1.0
    assert abs(complex(mobius_alpha(lam)) - z) <= 1e-9 * (1.0 + abs(z))
    w = complex(mobius_rho(t, z))
    assert w.imag > 0.0
    assert abs(complex(mobius_rho(-t, w)) - z) <= 1e-8 * (1.0 + abs(z))


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(1, 4), min_size=1, max_size=4))
def test_graded_space_partitions_indices(dims):
    g = GradedSpace(tuple(dims))
    assert g.total == sum(dims)
    covered = []
    for r in range(g.d):
        covered.extend(range(*g.block_slice(r).indices(g.total)))
    assert covered == list(range(g.total))
