"""Realizations of monotone/positive-imaginary-part functions.

Three interchangeable finite-dimensional models of a function of d complex
variables are implemented, together with the maps between them:

* transfer form: phi(lambda) = a + beta^H Lambda (I - D Lambda)^{-1} gamma on
  the polydisk, with Lambda the blockwise action of lambda on a graded space
  and [[a, beta^H], [gamma, D]] a contraction (unitary for the lossless case);
* self-adjoint form on the upper polydomain:
  F(z) = c + <z v, v> + <(z - conj(z0)) (X - z)^{-1} (z - z0) v, v>
  with X Hermitian, obtained from a unitary transfer realization by a Cayley
  transform and compression;
* Cauchy form: F(z) = C + <(X - z)^{-1} v1, v1>, the self-adjoint form with
  the polynomial part absorbed, which lifts to tuples of matrix arguments.

Inner products conjugate the second slot: <x, y> = y^H x.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import errors
from .errors import (
    DegenerateBox,
    DomainViolation,
    NotUnitary,
    PoleHit,
    RealityViolation,
    ShapeMismatch,
    SingularLiftedResolvent,
    SingularResolvent,
    TauTooCloseToSpectrum,
)
from .linalg import (
    DEFAULT_TOL,
    GradedSpace,
    as_matrix,
    eig_hermitian,
    graded_sum,
    min_eigenvalue,
    require_hermitian,
)
from .tuples import CommutingTuple

_POLE_TOL = 1e-13


# ---------------------------------------------------------------------------
# Moebius maps between the disk and the upper half plane, componentwise.

def mobius_alpha(lam):
    """alpha(lambda) = i (1 + lambda) / (1 - lambda), disk -> upper half plane."""
    lam = np.asarray(lam, dtype=complex)
    denom = 1.0 - lam
    if np.any(np.abs(denom) < _POLE_TOL * (1.0 + np.abs(lam))):
        raise PoleHit("alpha has a pole at lambda = 1")
    return 1j * (1.0 + lam) / denom


def mobius_beta(z):
    """beta(z) = (z - i) / (z + i), upper half plane -> disk; inverse of alpha."""
    z = np.asarray(z, dtype=complex)
    denom = z + 1j
    if np.any(np.abs(denom) < _POLE_TOL * (1.0 + np.abs(z))):
        raise PoleHit("beta has a pole at z = -i")
    return (z - 1j) / denom


def mobius_rho(t: float, z):
    """rho_t(z) = (z + t) / (1 - t z), a real rotation of the half plane."""
    z = np.asarray(z, dtype=complex)
    denom = 1.0 - t * z
    if np.any(np.abs(denom) < _POLE_TOL * (1.0 + np.abs(t * z))):
        raise PoleHit(f"rho_{t} has a pole at z = 1/t")
    return (z + t) / denom


def mobius_on_diagonal_tuple(map_fn: Callable, s: CommutingTuple) -> CommutingTuple:
    """Apply a scalar Moebius map entrywise to a tuple of diagonal matrices."""
    mats = []
    for m in s.mats:
        if np.any(np.abs(m - np.diag(np.diag(m))) > 1e-12 * (1.0 + np.abs(m).max())):
            raise ShapeMismatch("tuple must be diagonal for componentwise maps")
        mats.append(np.diag(map_fn(np.diag(m))))
    return CommutingTuple(tuple(mats))


def conjugate_rho(f_eval: Callable, t: float) -> Callable:
    """The conjugated evaluator z -> rho_t(f(rho_t(z))), componentwise in z."""

    def g(z):
        w = mobius_rho(t, np.asarray(z, dtype=complex))
        val = f_eval(w)
        return complex(mobius_rho(t, np.asarray(val, dtype=complex)))

    return g


# ---------------------------------------------------------------------------
# Transfer realizations on the polydisk.

@dataclass(frozen=True)
class TransferRealization:
    """phi(lambda) = a + beta^H Lambda (I - D Lambda)^{-1} gamma.

    The model space is graded; Lambda acts blockwise. unitary_flag promises
    the block matrix [[a, beta^H], [gamma, D]] is unitary, which is validated
    on construction (contractivity is always required).
    """

    a: complex
    beta: np.ndarray
    gamma: np.ndarray
    d_op: np.ndarray
    grading: GradedSpace
    unitary_flag: bool = False

    @property
    def m(self) -> int:
        return self.grading.total

    def block_unitary(self) -> np.ndarray:
        m = self.m
        u = np.zeros((m + 1, m + 1), dtype=complex)
        u[0, 0] = self.a
        u[0, 1:] = self.beta.conj()
        u[1:, 0] = self.gamma
        u[1:, 1:] = self.d_op
        return u


def transfer_realization(a, beta, gamma, d_op, grading: GradedSpace,
                         unitary_flag: bool = False,
                         tol: float = 1e-8) -> TransferRealization:
    beta = np.asarray(beta, dtype=complex).ravel()
    gamma = np.asarray(gamma, dtype=complex).ravel()
    d_op = as_matrix(d_op)
    m = grading.total
    if beta.shape != (m,) or gamma.shape != (m,) or d_op.shape != (m, m):
        raise ShapeMismatch(
            f"grading total {m} vs beta {beta.shape}, gamma {gamma.shape}, D {d_op.shape}")
    tr = TransferRealization(complex(a), beta, gamma, d_op, grading, bool(unitary_flag))
    u = tr.block_unitary()
    sv = _singular_values(u)
    if sv.max() > 1.0 + tol:
        raise NotUnitary(f"block matrix is not a contraction: top singular value {sv.max():.6f}")
    if unitary_flag and (sv.max() > 1.0 + tol or sv.min() < 1.0 - tol):
        raise NotUnitary("unitary_flag set but block matrix is not unitary")
    return tr


def _singular_values(m: np.ndarray) -> np.ndarray:
    w, _ = eig_hermitian(m.conj().T @ m)
    return np.sqrt(np.clip(w, 0.0, None))


def _solve_checked(a: np.ndarray, b: np.ndarray, err) -> np.ndarray:
    try:
        x = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise err(str(exc)) from exc
    resid = np.linalg.norm(a @ x - b)
    scale = np.linalg.norm(a) * np.linalg.norm(x) + np.linalg.norm(b) + 1.0
    if not np.all(np.isfinite(x)) or resid > 1e-8 * scale:
        raise err(f"solve residual {resid:.3e} indicates near-singularity")
    return x


def model_vector(tr: TransferRealization, lam) -> np.ndarray:
    """u_lambda = (I - D Lambda)^{-1} gamma."""
    lam = np.asarray(lam, dtype=complex).ravel()
    lam_diag = tr.grading.blockwise(lam)
    m = tr.m
    a = np.eye(m, dtype=complex) - tr.d_op * lam_diag[None, :]
    return _solve_checked(a, tr.gamma, SingularResolvent)


def transfer_eval(tr: TransferRealization, lam) -> complex:
    """Value of the transfer function at a point of the closed polydisk."""
    lam = np.asarray(lam, dtype=complex).ravel()
    if lam.shape != (tr.grading.d,):
        raise ShapeMismatch(f"point has {lam.shape[0]} coordinates, expected {tr.grading.d}")
    if np.any(np.abs(lam) > 1.0 + 1e-10):
        raise DomainViolation("point outside the closed polydisk")
    u = model_vector(tr, lam)
    lam_diag = tr.grading.blockwise(lam)
    return complex(tr.a + np.vdot(tr.beta, lam_diag * u))


def model_residual(tr: TransferRealization, lam, mu) -> complex:
    """Defect of the reproducing identity
    1 - conj(phi(mu)) phi(lambda) = <(1 - mu^* lambda) u_lambda, u_mu>."""
    lam = np.asarray(lam, dtype=complex).ravel()
    mu = np.asarray(mu, dtype=complex).ravel()
    u_lam = model_vector(tr, lam)
    u_mu = model_vector(tr, mu)
    phi_lam = transfer_eval(tr, lam)
    phi_mu = transfer_eval(tr, mu)
    weight = 1.0 - np.conj(tr.grading.blockwise(mu)) * tr.grading.blockwise(lam)
    lhs = 1.0 - np.conj(phi_mu) * phi_lam
    rhs = np.vdot(u_mu, weight * u_lam)
    return complex(lhs - rhs)


@dataclass(frozen=True)
class BPointResult:
    is_bpoint: bool
    u_tau: np.ndarray
    relative_residual: float


def bpoint_check(tr: TransferRealization, tau, tol: float = 1e-8) -> BPointResult:
    """Boundary regularity test at tau on the torus: gamma in range(I - D T)."""
    tau = np.asarray(tau, dtype=complex).ravel()
    if np.any(np.abs(np.abs(tau) - 1.0) > 1e-8):
        raise DomainViolation("tau must lie on the unit torus")
    m = tr.m
    a = np.eye(m, dtype=complex) - tr.d_op * tr.grading.blockwise(tau)[None, :]
    u, *_ = np.linalg.lstsq(a, tr.gamma, rcond=None)
    resid = float(np.linalg.norm(a @ u - tr.gamma))
    rel = resid / max(float(np.linalg.norm(tr.gamma)), 1e-30)
    return BPointResult(bool(rel <= tol), u, rel)


def complete_to_unitary(u: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Promote a square partial isometry to a unitary; reject other contractions.

    Singular directions with sigma = 0 are matched orthonormally between the
    kernel and the cokernel (the defects of a square matrix always have equal
    dimension). Anything with singular values strictly between 0 and 1 cannot
    be completed and raises.
    """
    u = as_matrix(u)
    uu, sv, vh = np.linalg.svd(u)
    if sv.size and sv.max() > 1.0 + tol:
        raise NotUnitary("not a contraction")
    if np.all(np.abs(sv - 1.0) <= tol):
        return u
    ok = np.all((np.abs(sv - 1.0) <= tol) | (np.abs(sv) <= tol))
    if not ok:
        raise NotUnitary("contraction with intermediate singular values; unequal defects")
    zero = np.abs(sv) <= tol
    filled = sv.copy()
    filled[zero] = 1.0
    return uu @ np.diag(filled) @ vh


# ---------------------------------------------------------------------------
# Self-adjoint realizations on the upper polydomain.

@dataclass(frozen=True)
class SelfAdjointRealization:
    """F_t-form data (c, X, v, z0, t) on a graded space."""

    c: float
    x: np.ndarray
    v: np.ndarray
    z0: np.ndarray
    grading: GradedSpace
    t: float
    synthesis_residual: float = 0.0


@dataclass(frozen=True)
class CauchyRealization:
    """F(z) = C + <(X - z)^{-1} v1, v1> with Hermitian X on a graded space."""

    c: float
    x: np.ndarray
    v1: np.ndarray
    grading: GradedSpace
    equivalence_residual: float = 0.0


def eval_selfadjoint(sr: SelfAdjointRealization, z) -> complex:
    z = np.asarray(z, dtype=complex).ravel()
    zz = sr.grading.blockwise(z)
    z0 = sr.grading.blockwise(sr.z0)
    rhs = (zz - z0) * sr.v
    w = _solve_checked(sr.x - np.diag(zz), rhs, SingularResolvent)
    quad = np.vdot(sr.v, (zz - np.conj(z0)) * w)
    lead = np.vdot(sr.v, zz * sr.v)
    return complex(sr.c + lead + quad)


def eval_cauchy(cr: CauchyRealization, z) -> complex:
    z = np.asarray(z, dtype=complex).ravel()
    zz = cr.grading.blockwise(z)
    w = _solve_checked(cr.x - np.diag(zz), cr.v1, SingularResolvent)
    return complex(cr.c + np.vdot(cr.v1, w))


def _upper_probe_points(d: int, count: int, key: int = 0xBEEF) -> np.ndarray:
    rng = np.random.Generator(np.random.Philox(key=key))
    re = rng.uniform(-2.0, 2.0, size=(count, d))
    im = rng.uniform(0.3, 2.0, size=(count, d))
    return re + 1j * im


def select_tau(u: np.ndarray, candidates: int = 64,
               min_distance: float = 1e-3) -> complex:
    """Unit-circle point farthest from the spectrum of the unitary u.

    For a normal matrix dist(tau, spectrum) equals the smallest singular value
    of u - tau I, so no general eigensolver is needed.
    """
    best_tau, best_dist = None, -1.0
    for k in range(candidates):
        tau = np.exp(2j * np.pi * (k + 0.5) / candidates)
        sv = _singular_values(u - tau * np.eye(u.shape[0]))
        dist = float(sv.min())
        if dist > best_dist:
            best_tau, best_dist = tau, dist
    if best_dist < min_distance:
        raise TauTooCloseToSpectrum(
            f"no circle point farther than {best_dist:.2e} from the spectrum")
    return complex(best_tau)


def synthesize_selfadjoint(tr: TransferRealization, z0, tau=None,
                           tol: float = 1e-8, probes: int = 20,
                           probe_key: int = 0xBEEF) -> SelfAdjointRealization:
    """Self-adjoint realization of the conjugated transfer function.

    With F = alpha o phi o beta on the upper polydomain and t the real number
    -i (1 - tau)/(1 + tau), the conjugated function F_t = rho_t o F o rho_t
    acquires the representation

        F_t(z) = c + <z v, v> + <(z - conj(z0)) (X - z)^{-1} (z - z0) v, v>

    where X is the compression of the Cayley transform -(-i)(U - tau)^{-1}(U + tau)
    to the model block and v is the model vector transported to rho_t(z0).
    The identity is verified at `probes` random points of the upper
    polydomain before returning.
    """
    z0 = np.asarray(z0, dtype=complex).ravel()
    d = tr.grading.d
    if z0.shape != (d,):
        raise ShapeMismatch(f"z0 has {z0.shape[0]} coordinates, expected {d}")
    if np.any(z0.imag <= 0):
        raise DomainViolation("z0 must lie in the upper polydomain")
    u = tr.block_unitary()
    sv = _singular_values(u)
    if not np.all(np.abs(sv - 1.0) <= 1e-8):
        u = complete_to_unitary(u)
    if tau is None:
        tau = select_tau(u)
    tau = complex(tau)
    if abs(abs(tau) - 1.0) > 1e-8:
        raise DomainViolation("tau must lie on the unit circle")
    dist = float(_singular_values(u - tau * np.eye(u.shape[0])).min())
    if dist < 1e-3:
        raise TauTooCloseToSpectrum(f"tau within {dist:.2e} of the spectrum")
    if abs(1.0 + tau) < 1e-8:
        raise PoleHit("tau = -1 makes the rotation parameter infinite")
    t_param = -1j * (1.0 - tau) / (1.0 + tau)
    if abs(t_param.imag) > 1e-10 * (1.0 + abs(t_param)):
        raise RealityViolation("rotation parameter came out non-real")
    t_param = float(t_param.real)

    m_total = u.shape[0]
    y = -1j * _solve_checked(u - tau * np.eye(m_total),
                             u + tau * np.eye(m_total),
                             SingularResolvent)
    y = require_hermitian(y, 1e-8)
    x = -y[1:, 1:].copy()

    w0 = mobius_rho(t_param, z0)
    lam0 = mobius_beta(w0)
    u_vec = model_vector(tr, lam0)
    phi0 = transfer_eval(tr, lam0)
    if abs(phi0 - tau) < 1e-12:
        raise SingularResolvent("transfer value collides with tau")
    lam_diag = tr.grading.blockwise(lam0)
    v = (1.0 - tau * lam_diag) * u_vec / (phi0 - tau)

    f_t_z0 = complex(mobius_rho(t_param, mobius_alpha(phi0)))
    lead = np.vdot(v, tr.grading.blockwise(z0) * v)
    c = f_t_z0 - lead
    if abs(c.imag) > max(tol, 1e-8 * (1.0 + abs(c))):
        raise RealityViolation(f"constant term has imaginary part {c.imag:.3e}")
    sr = SelfAdjointRealization(float(c.real), x, v, z0, tr.grading, t_param)

    resid = _verify_synthesis(tr, sr, probes, probe_key)
    if resid > max(tol, 1e-8):
        raise RealityViolation(
            f"synthesized realization mismatches the transfer function: {resid:.3e}")
    return SelfAdjointRealization(float(c.real), x, v, z0, tr.grading,
                                  t_param, synthesis_residual=resid)


def conjugated_transfer_value(tr: TransferRealization, t_param: float, z) -> complex:
    """rho_t(alpha(phi(beta(rho_t(z))))) evaluated directly through the maps."""
    z = np.asarray(z, dtype=complex).ravel()
    w = mobius_rho(t_param, z)
    lam = mobius_beta(w)
    phi = transfer_eval(tr, lam)
    return complex(mobius_rho(t_param, np.asarray(mobius_alpha(phi))))


def _verify_synthesis(tr: TransferRealization, sr: SelfAdjointRealization,
                      probes: int, key: int) -> float:
    worst = 0.0
    for z in _upper_probe_points(tr.grading.d, probes, key):
        direct = conjugated_transfer_value(tr, sr.t, z)
        model = eval_selfadjoint(sr, z)
        worst = max(worst, abs(direct - model))
    return worst


def reduce_to_cauchy(sr: SelfAdjointRealization, tol: float = 1e-8,
                     probes: int = 20, probe_key: int = 0xBEEF) -> CauchyRealization:
    """Absorb the polynomial part: F(z) = C + <(X - z)^{-1} v1, v1>.

    v1 = (X - z0) v and C = (c + <z0 v, v>) - <v, v1>; both the reality of C
    and the pointwise equivalence with the self-adjoint form are verified.
    """
    z0 = sr.grading.blockwise(sr.z0)
    v1 = (sr.x - np.diag(z0)) @ sr.v
    a_val = sr.c + np.vdot(sr.v, z0 * sr.v)
    c_big = a_val - np.vdot(v1, sr.v)
    if abs(c_big.imag) > max(tol, 1e-8 * (1.0 + abs(c_big))):
        raise RealityViolation(f"constant term has imaginary part {c_big.imag:.3e}")
    cr = CauchyRealization(float(c_big.real), sr.x, v1, sr.grading)
    worst = 0.0
    for z in _upper_probe_points(sr.grading.d, probes, probe_key):
        worst = max(worst, abs(eval_selfadjoint(sr, z) - eval_cauchy(cr, z)))
    if worst > max(tol, 1e-8):
        raise RealityViolation(f"reduction mismatch {worst:.3e}")
    return CauchyRealization(float(c_big.real), sr.x, v1, sr.grading,
                             equivalence_residual=worst)


# ---------------------------------------------------------------------------
# Spectral geometry of the graded resolvent.

def mu_resolvent_norm(x: np.ndarray, grading: GradedSpace, z) -> float:
    """Operator norm of (X - z)^{-1} with z acting blockwise; inf if singular."""
    x = as_matrix(x)
    zz = grading.blockwise(np.asarray(z, dtype=complex).ravel())
    m = x - np.diag(zz)
    sv = _singular_values(m)
    smin = float(sv.min())
    if smin <= 1e-300:
        return float("inf")
    return 1.0 / smin


def in_mu_spectrum(x: np.ndarray, grading: GradedSpace, z,
                   tol: float = 1e-9) -> bool:
    """Singularity test of X - z (blockwise): the joint spectrum membership."""
    x = as_matrix(x)
    zz = grading.blockwise(np.asarray(z, dtype=complex).ravel())
    m = x - np.diag(zz)
    sv = _singular_values(m)
    return bool(sv.min() <= tol * max(1.0, float(sv.max())))


@dataclass(frozen=True)
class BoxMap:
    """Affine data of a per-coordinate box rescale T^r = (S^r - m^r)/c^r."""

    midpoints: np.ndarray
    half_widths: np.ndarray

    def forward_point(self, z):
        return (np.asarray(z, dtype=complex) - self.midpoints) / self.half_widths

    def inverse_point(self, w):
        return self.midpoints + self.half_widths * np.asarray(w, dtype=complex)

    def forward_tuple(self, mats):
        return [(as_matrix(m) - mu * np.eye(m.shape[0])) / c
                for m, mu, c in zip(mats, self.midpoints, self.half_widths)]


def rescale_to_box(x: np.ndarray, grading: GradedSpace, box,
                   sample_points: int = 8) -> tuple:
    """Congruence that moves a coordinate box to the standard centered one.

    Y = (sum_r c_r^{-1/2} P^r) (X - sum_r m^r P^r) (sum_r c_r^{-1/2} P^r) with
    m the box midpoints and c the half widths; the joint spectrum of Y is the
    image of X's under w = (z - m)/c, which is verified on sample points via
    the determinant identity det(Y - w) * prod_r c_r^{dim_r} = det(X - z).
    """
    x = require_hermitian(x)
    box = [(float(a), float(b)) for a, b in box]
    if len(box) != grading.d:
        raise ShapeMismatch(f"box has {len(box)} coordinates, grading {grading.d}")
    if any(b <= a for a, b in box):
        raise DegenerateBox("box must have positive widths")
    mid = np.array([(a + b) / 2 for a, b in box])
    half = np.array([(b - a) / 2 for a, b in box])
    scale = np.concatenate([
        np.full(grading.dims[r], 1.0 / np.sqrt(half[r])) for r in range(grading.d)])
    shift = grading.blockwise(mid).real
    y = (x - np.diag(shift)) * scale[:, None] * scale[None, :]
    y = 0.5 * (y + y.conj().T)
    bm = BoxMap(mid, half)

    rng = np.random.Generator(np.random.Philox(key=0xB0C5))
    factor = float(np.prod([half[r] ** grading.dims[r] for r in range(grading.d)]))
    for _ in range(sample_points):
        w = rng.uniform(-2, 2, grading.d) + 1j * rng.uniform(0.2, 2.0, grading.d)
        z = bm.inverse_point(w)
        lhs = np.linalg.det(y - np.diag(grading.blockwise(w))) * factor
        rhs = np.linalg.det(x - np.diag(grading.blockwise(z)))
        if abs(lhs - rhs) > 1e-7 * (1.0 + abs(lhs) + abs(rhs)):
            raise DegenerateBox(
                f"rescale check failed: det mismatch {abs(lhs - rhs):.3e}")
    return y, bm


# ---------------------------------------------------------------------------
# Lifted functional calculus on matrix tuples.

def lifted_pencil(cr: CauchyRealization, mats) -> np.ndarray:
    """I (x) X - sum_r S^r (x) P^r for plain matrix arguments."""
    mats = [as_matrix(m) for m in mats]
    n = mats[0].shape[0]
    return np.kron(np.eye(n, dtype=complex), cr.x) - graded_sum(mats, cr.grading)


def _embedding(cr: CauchyRealization, n: int) -> np.ndarray:
    return np.kron(np.eye(n, dtype=complex), cr.v1.reshape(-1, 1))


def eval_on_tuple(cr: CauchyRealization, s: CommutingTuple,
                  max_size: int = 4096) -> np.ndarray:
    """F(S) = C I + R_v^H (I (x) X - S (.) I)^{-1} R_v for a commuting tuple."""
    if s.d != cr.grading.d:
        raise ShapeMismatch(f"tuple has {s.d} slots, realization {cr.grading.d}")
    n = s.n
    if n * cr.grading.total > max_size:
        raise ShapeMismatch("lifted pencil exceeds the size cap")
    pencil = lifted_pencil(cr, s.mats)
    rv = _embedding(cr, n)
    w = _solve_checked(pencil, rv, SingularLiftedResolvent)
    out = cr.c * np.eye(n, dtype=complex) + rv.conj().T @ w
    return 0.5 * (out + out.conj().T)


def path_derivative_check(cr: CauchyRealization, s_mats, t_mats, t: float,
                          tol: float = DEFAULT_TOL.psd) -> np.ndarray:
    """Integrand of the fundamental theorem along the straight segment.

    G(t) = (Y^{-1} R_v)^H (Delta (.) I) (Y^{-1} R_v) with
    Y = I (x) X - R(t) (.) I and R(t) = (1-t) S + t T; manifestly Hermitian,
    and PSD whenever every Delta^r is. Asserted PSD within tol in that case.
    """
    s_mats = [as_matrix(m) for m in s_mats]
    t_mats = [as_matrix(m) for m in t_mats]
    n = s_mats[0].shape[0]
    r_mats = [(1.0 - t) * a + t * b for a, b in zip(s_mats, t_mats)]
    delta = [b - a for a, b in zip(s_mats, t_mats)]
    pencil = np.kron(np.eye(n, dtype=complex), cr.x) - graded_sum(r_mats, cr.grading)
    rv = _embedding(cr, n)
    w = _solve_checked(pencil, rv, SingularLiftedResolvent)
    mid = graded_sum(delta, cr.grading)
    g = w.conj().T @ mid @ w
    g = 0.5 * (g + g.conj().T)
    if all(min_eigenvalue(require_hermitian(m, 1e-8)) >= -tol for m in delta):
        me = min_eigenvalue(g)
        if me < -max(tol, 1e-8) * (1.0 + float(np.linalg.norm(g))):
            raise errors.InternalCheckFailed(
                f"derivative along a monotone segment not PSD: min eig {me:.3e}")
    return g


def box_segment_in_resolvent(x: np.ndarray, grading: GradedSpace, box,
                             samples: int = 64, tol: float = 1e-9) -> bool:
    """Sampled check that the box diagonal avoids the joint spectrum of X."""
    a = np.array([lo for lo, hi in box])
    b = np.array([hi for lo, hi in box])
    for t in np.linspace(0.0, 1.0, samples):
        z = (1 - t) * a + t * b
        if in_mu_spectrum(x, grading, z, tol):
            return False
    return True


# ---------------------------------------------------------------------------
# Discrete boundary measures.

@dataclass(frozen=True)
class DiscreteMeasure:
    """Finitely many positive atoms on the line or the unit circle.

    For support "line" the locations are real numbers; for "circle" they are
    angles theta with atom positions e^{i theta}.
    """

    support: str
    locations: np.ndarray
    masses: np.ndarray


def discrete_measure(support: str, locations, masses) -> DiscreteMeasure:
    if support not in ("line", "circle"):
        raise ShapeMismatch(f"unknown support {support!r}")
    locations = np.asarray(locations, dtype=float).ravel()
    masses = np.asarray(masses, dtype=float).ravel()
    if locations.shape != masses.shape or locations.size == 0:
        raise ShapeMismatch("locations and masses must be equal-length and nonempty")
    if np.any(masses <= 0):
        raise ShapeMismatch("masses must be positive")
    return DiscreteMeasure(support, locations, masses)


def from_discrete_measure(dm: DiscreteMeasure) -> CauchyRealization:
    """Cauchy realization of F(z) = sum_k nu_k / (t_k - z) for a line measure."""
    if dm.support != "line":
        raise ShapeMismatch("only line measures define a Cauchy form directly")
    k = dm.locations.size
    grading = GradedSpace((k,))
    x = np.diag(dm.locations.astype(complex))
    v1 = np.sqrt(dm.masses).astype(complex)
    return CauchyRealization(0.0, x, v1, grading)


def herglotz_eval(dm: DiscreteMeasure, lam: complex) -> complex:
    """psi(lambda) = sum_k nu_k (e^{i theta_k} + lambda)/(e^{i theta_k} - lambda)."""
    if dm.support != "circle":
        raise ShapeMismatch("herglotz evaluation needs a circle measure")
    lam = complex(lam)
    if abs(lam) >= 1.0:
        raise DomainViolation("evaluation point must lie in the open disk")
    e = np.exp(1j * dm.locations)
    return complex(np.sum(dm.masses * (e + lam) / (e - lam)))


@dataclass(frozen=True)
class BoundarySum:
    value: float
    atom_at_tau: bool


def bpoint_sum(dm: DiscreteMeasure, tau: complex,
               atom_tol: float = 1e-12) -> BoundarySum:
    """sum_k nu_k / |e^{i theta_k} - tau|^2, flagged infinite on an atom hit."""
    if dm.support != "circle":
        raise ShapeMismatch("boundary sums need a circle measure")
    tau = complex(tau)
    if abs(abs(tau) - 1.0) > 1e-8:
        raise DomainViolation("tau must lie on the unit circle")
    e = np.exp(1j * dm.locations)
    gaps = np.abs(e - tau)
    if np.any(gaps <= atom_tol):
        return BoundarySum(float("inf"), True)
    return BoundarySum(float(np.sum(dm.masses / gaps ** 2)), False)
