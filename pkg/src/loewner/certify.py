"""Certification of matrix monotonicity from sampled first-order data.

A function f is locally matrix monotone on a finite node set {x_1,...,x_n} in
R^d exactly when there are positive semidefinite n x n kernels A^1,...,A^d
with

    A^r(i, i) = df/dx^r (x_i)                                     (diagonals)
    f(x_j) - f(x_i) = sum_r (x_j^r - x_i^r) A^r(i, j)   for all i, j   (pairs)

This module decides that feasibility problem by Dykstra's alternating
projections between the product of PSD cones and the affine constraint set.
When the problem is infeasible the limiting displacement between the two sets
encodes a separating functional; antisymmetrizing it gives a real skew matrix
K from which a constructive counterexample direction is built and verified
from scratch: a first-order-commuting perturbation Delta of the diagonal node
tuple whose directional derivative has a genuinely negative eigenvalue.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DegenerateNodes, NotSkewSymmetric, ShapeMismatch
from .linalg import DEFAULT_TOL, Tolerances, eig_hermitian, min_eigenvalue
from .tuples import (
    CommutingTuple,
    Direction,
    JointSpectrum,
    SmoothFunction,
    direction,
    directional_derivative,
)


@dataclass(frozen=True)
class SampledFunction:
    """First-order data of a function at distinct nodes in R^d.

    nodes: (n, d) real; values: (n,); gradients: (n, d).
    """

    nodes: np.ndarray
    values: np.ndarray
    gradients: np.ndarray

    @property
    def n(self) -> int:
        return self.nodes.shape[0]

    @property
    def d(self) -> int:
        return self.nodes.shape[1]


def sampled_function(nodes, values, gradients,
                     min_separation: float = 1e-10) -> SampledFunction:
    nodes = np.atleast_2d(np.asarray(nodes, dtype=float))
    values = np.asarray(values, dtype=float).ravel()
    gradients = np.atleast_2d(np.asarray(gradients, dtype=float))
    n, d = nodes.shape
    if values.shape != (n,) or gradients.shape != (n, d):
        raise ShapeMismatch(
            f"nodes {nodes.shape}, values {values.shape}, gradients {gradients.shape}")
    for i in range(n):
        for j in range(i + 1, n):
            if np.linalg.norm(nodes[i] - nodes[j]) <= min_separation:
                raise DegenerateNodes(f"nodes {i} and {j} coincide")
    return SampledFunction(nodes, values, gradients)


def sample(f: SmoothFunction, nodes) -> SampledFunction:
    """Evaluate a SmoothFunction's first-order data at the given nodes."""
    nodes = np.atleast_2d(np.asarray(nodes, dtype=float))
    vals = np.array([f.value(x) for x in nodes])
    grads = np.stack([f.gradient(x) for x in nodes])
    return sampled_function(nodes, vals, grads)


def node_tuple(sf: SampledFunction) -> CommutingTuple:
    """The diagonal commuting tuple whose joint spectrum is the node set."""
    mats = tuple(np.diag(sf.nodes[:, r]).astype(complex) for r in range(sf.d))
    return CommutingTuple(mats)


def node_spectrum(sf: SampledFunction) -> JointSpectrum:
    return JointSpectrum(np.eye(sf.n, dtype=complex), sf.nodes.copy())


def loewner_matrix_1d(sf: SampledFunction) -> np.ndarray:
    """Divided-difference matrix for d = 1 data: the unique candidate kernel."""
    if sf.d != 1:
        raise ShapeMismatch("divided-difference matrix needs d = 1 data")
    x = sf.nodes[:, 0]
    out = np.empty((sf.n, sf.n))
    for i in range(sf.n):
        for j in range(sf.n):
            if i == j:
                out[i, j] = sf.gradients[i, 0]
            else:
                out[i, j] = (sf.values[j] - sf.values[i]) / (x[j] - x[i])
    return out


@dataclass(frozen=True)
class LoewnerCertificate:
    kernels: tuple                  # d Hermitian PSD matrices
    min_psd_eig: float              # most negative kernel eigenvalue
    max_constraint_violation: float  # worst diagonal/pair residual
    iterations: int


@dataclass(frozen=True)
class Refutation:
    k_matrix: np.ndarray            # real skew-symmetric separating matrix
    witness: Optional[Direction]    # PSD first-order-commuting direction
    witness_min_eig: float          # min eig of the derivative along witness
    raw_min_eig: float              # same for the unrepaired direction from K
    iterations: int
    final_distance: float


@dataclass(frozen=True)
class Inconclusive:
    iterations: int
    final_distance: float
    max_constraint_violation: float
    min_psd_eig: float
    diagnostics: dict = field(default_factory=dict)


def _pair_weights(sf: SampledFunction):
    """For each i < j: weight vector w_r = x_j^r - x_i^r and rhs f_j - f_i."""
    pairs = []
    for i in range(sf.n):
        for j in range(i + 1, sf.n):
            w = sf.nodes[j] - sf.nodes[i]
            b = sf.values[j] - sf.values[i]
            pairs.append((i, j, w, b, float(np.dot(w, w))))
    return pairs


def _project_affine(a: np.ndarray, sf: SampledFunction, pairs) -> np.ndarray:
    """Exact projection onto the affine constraint set.

    Diagonals are overwritten by the gradients. For each unordered pair the
    d-vector of (i, j) entries is projected onto the hyperplane
    sum_r w_r a_r = b (real weights, real rhs); the (j, i) entries mirror
    conjugately so every slot stays Hermitian.
    """
    out = a.copy()
    d = sf.d
    for r in range(d):
        np.fill_diagonal(out[r], 0.0)
        out[r] += np.diag(sf.gradients[:, r].astype(complex))
    for i, j, w, b, wsq in pairs:
        if wsq == 0.0:
            continue
        vec = out[:, i, j]
        resid = (np.dot(w, vec) - b) / wsq
        vec = vec - resid * w
        out[:, i, j] = vec
        out[:, j, i] = vec.conjugate()
    return out


def _project_psd(a: np.ndarray) -> np.ndarray:
    """Eigenvalue clipping of each slot onto the PSD cone."""
    out = np.empty_like(a)
    for r in range(a.shape[0]):
        h = 0.5 * (a[r] + a[r].conj().T)
        w, q = eig_hermitian(h)
        w = np.clip(w, 0.0, None)
        out[r] = (q * w) @ q.conj().T
    return out


def _residuals(a: np.ndarray, sf: SampledFunction, pairs):
    """(max diag/pair violation, min eigenvalue across slots) for a candidate."""
    viol = 0.0
    for r in range(sf.d):
        viol = max(viol, float(np.max(np.abs(np.diag(a[r]) - sf.gradients[:, r]))))
    for i, j, w, b, _ in pairs:
        viol = max(viol, abs(np.dot(w, a[:, i, j]) - b))
    mineig = min(min_eigenvalue(0.5 * (a[r] + a[r].conj().T))
                 for r in range(sf.d))
    return viol, mineig


def verify_certificate(sf: SampledFunction, kernels,
                       tol: Tolerances = DEFAULT_TOL) -> dict:
    """Recompute every certificate condition from scratch."""
    a = np.stack([np.asarray(k, dtype=complex) for k in kernels])
    pairs = _pair_weights(sf)
    diag_viol = 0.0
    for r in range(sf.d):
        diag_viol = max(diag_viol,
                        float(np.max(np.abs(np.diag(a[r]).real - sf.gradients[:, r]))))
    pair_viol = 0.0
    for i, j, w, b, _ in pairs:
        pair_viol = max(pair_viol, abs(np.dot(w, a[:, i, j]) - b))
    herm = max(float(np.linalg.norm(a[r] - a[r].conj().T)) for r in range(sf.d))
    mineig = min(min_eigenvalue(0.5 * (a[r] + a[r].conj().T)) for r in range(sf.d))
    return {
        "diagonal_violation": diag_viol,
        "pair_violation": pair_viol,
        "hermitian_defect": herm,
        "min_psd_eig": mineig,
        "passed": bool(diag_viol <= tol.residual and pair_viol <= tol.residual
                       and herm <= tol.herm * 10 and mineig >= -tol.psd),
    }


def refutation_witness(sf: SampledFunction, k: np.ndarray,
                       tol: Tolerances = DEFAULT_TOL):
    """Counterexample direction built from a real skew-symmetric matrix K.

    Delta^r_ij = (x_j^r - x_i^r) K_ji. The direction is Hermitian with zero
    diagonal and first-order-commuting at the diagonal node tuple by
    construction; it is generally not PSD (that is reported in psd_flags).
    Returns (direction, min_eig of the directional derivative, psd_flags).
    """
    k = np.asarray(k, dtype=float)
    if k.shape != (sf.n, sf.n):
        raise ShapeMismatch(f"K shape {k.shape} vs n = {sf.n}")
    if np.linalg.norm(k + k.T) > 1e-10 * (1.0 + np.linalg.norm(k)):
        raise NotSkewSymmetric("K must be real skew-symmetric")
    mats = []
    for r in range(sf.d):
        gaps = sf.nodes[None, :, r] - sf.nodes[:, None, r]
        mats.append((gaps * k.T).astype(complex))
    delta = direction(mats)
    js = node_spectrum(sf)
    f = _sampled_as_smooth(sf)
    deriv = directional_derivative(f, js, delta)
    psd_flags = tuple(min_eigenvalue(m) >= -tol.psd for m in mats)
    return delta, float(min_eigenvalue(deriv)), psd_flags


def _sampled_as_smooth(sf: SampledFunction) -> SmoothFunction:
    """Wrap the sampled data as a function defined exactly at the nodes."""
    table = {tuple(np.round(x, 12)): (v, g)
             for x, v, g in zip(sf.nodes, sf.values, sf.gradients)}

    def look(x):
        key = tuple(np.round(np.asarray(x, dtype=float), 12))
        if key not in table:
            raise KeyError(f"point {x} is not a node")
        return table[key]

    return SmoothFunction(f=lambda x: look(x)[0], grad=lambda x: look(x)[1])


def derivative_from_certificate(sf: SampledFunction, kernels,
                                delta: Direction) -> np.ndarray:
    """sum_r Delta^r o A^r, the derivative reconstruction from a certificate."""
    a = np.stack([np.asarray(kk, dtype=complex) for kk in kernels])
    if a.shape[0] != delta.d or a.shape[1] != delta.n:
        raise ShapeMismatch("kernel and direction shapes differ")
    out = np.zeros((sf.n, sf.n), dtype=complex)
    for r in range(sf.d):
        out += delta.mats[r] * a[r]
    return 0.5 * (out + out.conj().T)


def _extract_skew(a_psd: np.ndarray, sf: SampledFunction, pairs) -> np.ndarray:
    """Normalized skew matrix from the affine residual of the PSD-side iterate."""
    k = np.zeros((sf.n, sf.n))
    for i, j, w, b, wsq in pairs:
        if wsq == 0.0:
            continue
        mu = (np.dot(w, a_psd[:, i, j]) - b) / wsq
        k[j, i] = mu.real
        k[i, j] = -mu.real
    top = np.max(np.abs(k))
    if top > 0:
        k = k / top
    return k


def _repair_witness(sf: SampledFunction, raw: Direction, raw_min: float,
                    tol: Tolerances):
    """Make the raw direction PSD by minimal diagonal shifts, then rescale.

    Shifting slot r by c_r I keeps the first-order structure and moves the
    directional derivative by the PSD matrix diag(sum_r c_r grad_i^r), so the
    repaired direction may lose some negativity; scaling (which is free by
    homogeneity) restores the raw magnitude. Returns (direction, min_eig) or
    (None, 0.0) when the repair destroys the witness.
    """
    shifts = [max(0.0, -min_eigenvalue(m)) for m in raw.mats]
    mats = [m + c * np.eye(sf.n) for m, c in zip(raw.mats, shifts)]
    delta = direction(mats)
    js = node_spectrum(sf)
    f = _sampled_as_smooth(sf)
    m_psd = float(min_eigenvalue(directional_derivative(f, js, delta)))
    if m_psd >= -max(tol.psd, 1e-3 * abs(raw_min)):
        return None, 0.0
    scale = raw_min / m_psd if m_psd < 0 else 1.0
    scaled = direction([scale * m for m in mats])
    m_final = float(min_eigenvalue(directional_derivative(f, js, scaled)))
    return scaled, m_final


def _random_witness_search(sf: SampledFunction, rng, tries: int,
                           tol: Tolerances):
    """Fallback: sample admissible PSD directions, keep any certified negative.

    Directions are drawn from the full parametrization at a diagonal tuple:
    Delta^r = [Y, diag(x^r)] + diag(delta^r) with Y skew-Hermitian, then made
    PSD by minimal diagonal shifts.
    """
    js = node_spectrum(sf)
    f = _sampled_as_smooth(sf)
    best = (None, 0.0)
    n = sf.n
    for _ in range(tries):
        g = rng.standard_normal((n, n))
        y = g - g.T
        mats = []
        for r in range(sf.d):
            gaps = sf.nodes[None, :, r] - sf.nodes[:, None, r]
            m = (y * gaps).astype(complex)
            m = 0.5 * (m + m.conj().T)
            mats.append(m)
        shifts = [max(0.0, -min_eigenvalue(m)) for m in mats]
        mats = [m + c * np.eye(n) for m, c in zip(mats, shifts)]
        delta = direction(mats)
        val = float(min_eigenvalue(directional_derivative(f, js, delta)))
        if val < best[1]:
            best = (delta, val)
    if best[0] is not None and best[1] < -tol.psd:
        return best
    return None, 0.0


def certify(sf: SampledFunction, tol: Tolerances = DEFAULT_TOL,
            check_every: int = 25, history_stride: int = 10):
    """Decide feasibility of the kernel problem at the given nodes.

    Returns a LoewnerCertificate, a Refutation, or Inconclusive. Dykstra's
    scheme alternates exact projections; the affine-side iterate is accepted
    as a certificate once its slots are PSD within tol.psd (its constraints
    hold exactly). Witness extraction is attempted whenever the inter-set
    distance indicates a gap; extraction is sound regardless of convergence
    state because the witness is verified from scratch.
    """
    pairs = _pair_weights(sf)
    d, n = sf.d, sf.n

    # Negative gradient fast path: a one-hot diagonal direction already
    # disproves monotonicity, no iteration needed.
    worst = np.unravel_index(np.argmin(sf.gradients), sf.gradients.shape)
    if sf.gradients[worst] < -tol.psd:
        i, r = worst
        mats = [np.zeros((n, n), dtype=complex) for _ in range(d)]
        mats[r][i, i] = 1.0
        delta = direction(mats)
        return Refutation(
            k_matrix=np.zeros((n, n)),
            witness=delta,
            witness_min_eig=float(sf.gradients[worst]),
            raw_min_eig=float(sf.gradients[worst]),
            iterations=0,
            final_distance=0.0,
        )

    # Constant-kernel fast path: when every slot has one nonnegative slope
    # shared by all nodes and the pair sums close exactly (affine data), the
    # rank-one kernels g_r * ones certify outright.
    g_mean = sf.gradients.mean(axis=0)
    g_spread = float(np.max(np.abs(sf.gradients - g_mean[None, :])))
    if g_spread <= 1e-12 * (1.0 + float(np.max(np.abs(g_mean)))) and np.all(g_mean >= 0.0):
        b_top = max((abs(b) for _, _, _, b, _ in pairs), default=0.0)
        pair_gap = max((abs(np.dot(w, g_mean) - b) for _, _, w, b, _ in pairs),
                       default=0.0)
        if pair_gap <= 1e-12 * (1.0 + b_top):
            kernels = tuple(g_mean[r] * np.ones((n, n), dtype=complex)
                            for r in range(d))
            mineig = min(min_eigenvalue(k) for k in kernels)
            return LoewnerCertificate(
                kernels=kernels,
                min_psd_eig=mineig,
                max_constraint_violation=max(pair_gap, g_spread),
                iterations=0,
            )

    # Least-norm affine start: gradients on the diagonal, b * w / |w|^2 on the
    # off-diagonal entries of each pair.
    a = np.zeros((d, n, n), dtype=complex)
    a = _project_affine(a, sf, pairs)

    p_corr = np.zeros_like(a)
    q_corr = np.zeros_like(a)
    dist_history = []
    last_extract = -1

    for it in range(1, tol.max_iter + 1):
        y = _project_psd(a + p_corr)
        p_corr = a + p_corr - y
        a_new = _project_affine(y + q_corr, sf, pairs)
        q_corr = y + q_corr - a_new
        dist = float(np.linalg.norm(a_new - y))
        a = a_new
        if it % history_stride == 0 or it == 1:
            dist_history.append((it, dist))

        if it % check_every == 0 or dist <= 1e-13:
            viol, mineig = _residuals(a, sf, pairs)
            if viol <= tol.residual and mineig >= -tol.psd:
                return LoewnerCertificate(
                    kernels=tuple(0.5 * (a[r] + a[r].conj().T) for r in range(d)),
                    min_psd_eig=mineig,
                    max_constraint_violation=viol,
                    iterations=it,
                )
            # A visible gap between the sets: try to turn the displacement
            # into a verified counterexample.
            if dist > 10.0 * tol.residual and it - last_extract >= 100:
                last_extract = it
                result = _try_refute(sf, y, pairs, it, dist, tol)
                if result is not None:
                    return result

        # Stall detector: distance stopped moving but constraints never met.
        if len(dist_history) >= 11:
            d_now = dist_history[-1][1]
            d_then = dist_history[-11][1]
            if abs(d_now - d_then) < 1e-10 * max(1.0, d_now) and d_now > tol.residual:
                result = _try_refute(sf, y, pairs, it, dist, tol)
                if result is not None:
                    return result
                break

    viol, mineig = _residuals(a, sf, pairs)
    if viol <= tol.residual and mineig >= -tol.psd:
        return LoewnerCertificate(
            kernels=tuple(0.5 * (a[r] + a[r].conj().T) for r in range(d)),
            min_psd_eig=mineig,
            max_constraint_violation=viol,
            iterations=tol.max_iter,
        )
    y = _project_psd(a + p_corr)
    dist = float(np.linalg.norm(a - y))
    result = _try_refute(sf, y, pairs, tol.max_iter, dist, tol)
    if result is not None:
        return result
    rng_fallback = np.random.Generator(np.random.Philox(key=0xFA11))
    delta, val = _random_witness_search(sf, rng_fallback, 200, tol)
    if delta is not None:
        return Refutation(np.zeros((n, n)), delta, val, val,
                          tol.max_iter, dist)
    return Inconclusive(
        iterations=tol.max_iter,
        final_distance=dist,
        max_constraint_violation=viol,
        min_psd_eig=mineig,
        diagnostics={"dist_history": dist_history},
    )


def _try_refute(sf: SampledFunction, y_psd: np.ndarray, pairs,
                iterations: int, dist: float, tol: Tolerances):
    k = _extract_skew(y_psd, sf, pairs)
    if np.max(np.abs(k)) == 0.0:
        return None
    best = None
    for sign in (1.0, -1.0):
        raw, raw_min, _ = refutation_witness(sf, sign * k, tol)
        if best is None or raw_min < best[2]:
            best = (sign * k, raw, raw_min)
    k_best, raw, raw_min = best
    if raw_min >= -10.0 * tol.psd:
        return None
    witness, wit_min = _repair_witness(sf, raw, raw_min, tol)
    if witness is None:
        return None
    return Refutation(
        k_matrix=k_best,
        witness=witness,
        witness_min_eig=wit_min,
        raw_min_eig=raw_min,
        iterations=iterations,
        final_distance=dist,
    )
