"""Calculus on commuting tuples of Hermitian matrices.

A d-tuple S = (S^1, ..., S^d) of pairwise commuting Hermitian matrices is
simultaneously diagonalizable; its joint spectrum is n points of R^d. Around a
tuple with distinct joint eigenvalues ("generic") there is a canonical family
of exactly commuting curves: a first-order-commuting perturbation direction
determines a rotation generator Y, and

    S^r(t) = e^{tY} (diag(x^r) + t diag(Delta^r)) e^{-tY}

is a commuting curve through S with velocity Delta. Functions act through the
joint spectrum, and the derivative of t -> f(S(t)) at 0 has a closed
divided-difference form implemented in directional_derivative.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (
    DiagonalizationFailed,
    DomainViolation,
    InconsistentDirection,
    InternalCheckFailed,
    NotCommuting,
    NotGeneric,
    ShapeMismatch,
)
from .linalg import DEFAULT_TOL, as_matrix, eig_hermitian, require_hermitian

# Fixed key for the random combination used by joint_diagonalize; part of the
# function's deterministic contract.
_COMBO_KEY = 0x1A5E


def _stack(mats) -> np.ndarray:
    arr = np.stack([as_matrix(m) for m in mats])
    return arr


@dataclass(frozen=True)
class CommutingTuple:
    """A validated tuple of pairwise commuting Hermitian matrices."""

    mats: tuple

    @property
    def d(self) -> int:
        return len(self.mats)

    @property
    def n(self) -> int:
        return self.mats[0].shape[0]

    def as_array(self) -> np.ndarray:
        return np.stack(self.mats)


def commuting_tuple(mats, tol: float = DEFAULT_TOL.commute) -> CommutingTuple:
    """Validate and wrap a sequence of matrices as a CommutingTuple."""
    herm = tuple(require_hermitian(m) for m in mats)
    if not herm:
        raise ShapeMismatch("empty tuple")
    n = herm[0].shape[0]
    for m in herm:
        if m.shape[0] != n:
            raise ShapeMismatch("tuple entries must share one size")
    for r in range(len(herm)):
        for s in range(r + 1, len(herm)):
            comm = herm[r] @ herm[s] - herm[s] @ herm[r]
            scale = 1.0 + np.linalg.norm(herm[r]) * np.linalg.norm(herm[s])
            if np.linalg.norm(comm) > tol * scale:
                raise NotCommuting(
                    f"slots {r} and {s}: commutator norm {np.linalg.norm(comm):.3e}")
    return CommutingTuple(herm)


@dataclass(frozen=True)
class Direction:
    """A tuple of Hermitian matrices used as a perturbation direction."""

    mats: tuple

    @property
    def d(self) -> int:
        return len(self.mats)

    @property
    def n(self) -> int:
        return self.mats[0].shape[0]


def direction(mats) -> Direction:
    herm = tuple(require_hermitian(m) for m in mats)
    n = herm[0].shape[0]
    if any(m.shape[0] != n for m in herm):
        raise ShapeMismatch("direction entries must share one size")
    return Direction(herm)


@dataclass(frozen=True)
class JointSpectrum:
    """Unitary Q and points x_i with S^r = Q diag(x[:, r]) Q^H."""

    q: np.ndarray
    points: np.ndarray  # (n, d) real

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def reconstruct(self) -> CommutingTuple:
        mats = []
        for r in range(self.d):
            m = self.q @ np.diag(self.points[:, r]) @ self.q.conj().T
            mats.append(0.5 * (m + m.conj().T))
        return CommutingTuple(tuple(mats))


def _offdiag_energy(arr: np.ndarray) -> float:
    # summed directly over off-diagonal entries: subtracting the diagonal
    # energy from the total cancels catastrophically once the family is
    # nearly diagonal
    n = arr.shape[-1]
    mask = ~np.eye(n, dtype=bool)
    total = 0.0
    for m in arr:
        total += float(np.sum(np.abs(m[mask]) ** 2))
    return total


def _refine_jointly(arr: np.ndarray, max_sweeps: int = 100, thresh: float = 1e-13):
    """Givens-angle sweeps driving all matrices in arr toward diagonal.

    The rotation for each pair maximizes the summed diagonal energy across the
    whole family, which for exactly commuting Hermitian inputs also resolves
    degeneracies of any single member. Returns the accumulated unitary.
    """
    d, n, _ = arr.shape
    v = np.eye(n, dtype=complex)
    for _ in range(max_sweeps):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                # 3-vector statistics per matrix; real because inputs are
                # Hermitian.
                u = (arr[:, p, p] - arr[:, q, q]).real
                y = 2.0 * arr[:, p, q].real
                z = 2.0 * arr[:, p, q].imag
                h = np.stack([u, y, z])
                g = h @ h.T
                w, vecs = eig_hermitian(g)
                ang = vecs[:, -1].real
                if ang[0] < 0:
                    ang = -ang
                c = np.sqrt(0.5 * (1.0 + ang[0]))
                s = 0.5 * (ang[1] - 1j * ang[2]) / c
                if abs(s) <= thresh:
                    continue
                rotated = True
                cp = arr[:, :, p].copy()
                cq = arr[:, :, q].copy()
                arr[:, :, p] = c * cp + s * cq
                arr[:, :, q] = -np.conj(s) * cp + c * cq
                rp = arr[:, p, :].copy()
                rq = arr[:, q, :].copy()
                arr[:, p, :] = c * rp + np.conj(s) * rq
                arr[:, q, :] = -s * rp + c * rq
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp + s * vq
                v[:, q] = -np.conj(s) * vp + c * vq
        if not rotated:
            break
    return v


def joint_diagonalize(s: CommutingTuple, tol: float = 1e-9) -> JointSpectrum:
    """Simultaneously diagonalize a commuting tuple.

    Strategy: eigendecompose a fixed random real combination of the slots,
    then run joint refinement sweeps to clean up any accidental degeneracy of
    the combination. Deterministic: the combination coefficients come from a
    fixed internal key. An already-diagonal tuple returns Q = I and the
    diagonal points in index order.
    """
    arr = s.as_array().copy()
    d, n, _ = arr.shape
    scale = 1.0 + max(float(np.linalg.norm(m)) for m in arr)
    if _offdiag_energy(arr) <= (1e-14 * scale) ** 2:
        points = np.stack([np.diag(m).real for m in arr], axis=1)
        return JointSpectrum(np.eye(n, dtype=complex), points)

    rng = np.random.Generator(np.random.Philox(key=_COMBO_KEY))
    coeffs = rng.standard_normal(d)
    coeffs /= np.linalg.norm(coeffs)
    combo = np.tensordot(coeffs, arr, axes=1)
    _, q0 = eig_hermitian(combo)
    work = np.stack([q0.conj().T @ m @ q0 for m in arr])
    v = _refine_jointly(work)
    q = q0 @ v

    residual = np.sqrt(_offdiag_energy(work))
    if residual > tol * scale * n:
        raise DiagonalizationFailed(
            f"off-diagonal residual {residual:.3e} after refinement")
    points = np.stack([np.diag(m).real for m in work], axis=1)
    return JointSpectrum(q, points)


def is_generic(js: JointSpectrum, gap_tol: float = 1e-8) -> bool:
    """True iff all joint eigenvalues are pairwise farther than gap_tol apart."""
    n = js.n
    if n == 1:
        return True
    diff = js.points[:, None, :] - js.points[None, :, :]
    dist = np.sqrt(np.sum(diff ** 2, axis=2))
    dist[np.diag_indices(n)] = np.inf
    return bool(dist.min() > gap_tol)


def min_gap(points: np.ndarray) -> float:
    n = points.shape[0]
    if n == 1:
        return np.inf
    diff = points[:, None, :] - points[None, :, :]
    dist = np.sqrt(np.sum(diff ** 2, axis=2))
    dist[np.diag_indices(n)] = np.inf
    return float(dist.min())


def check_first_order(s: CommutingTuple, delta: Direction) -> float:
    """max_{r != s} Frobenius norm of [S^r, D^s] - [S^s, D^r]."""
    if delta.n != s.n or delta.d != s.d:
        raise ShapeMismatch("direction shape does not match tuple")
    worst = 0.0
    for r in range(s.d):
        for t in range(r + 1, s.d):
            m = (s.mats[r] @ delta.mats[t] - delta.mats[t] @ s.mats[r]
                 - s.mats[t] @ delta.mats[r] + delta.mats[r] @ s.mats[t])
            worst = max(worst, float(np.linalg.norm(m)))
    return worst


def _direction_in_basis(js: JointSpectrum, delta: Direction) -> np.ndarray:
    if delta.n != js.n:
        raise ShapeMismatch("direction size does not match spectrum")
    q = js.q
    return np.stack([q.conj().T @ m @ q for m in delta.mats])


def _check_cross_consistency(js: JointSpectrum, dtil: np.ndarray,
                             tol: float) -> None:
    """Entrywise compatibility of the slots with one shared generator.

    For points x_i and the direction in the diagonalizing basis, every pair of
    slots must satisfy D^s_ij (x_j^r - x_i^r) = D^r_ij (x_j^s - x_i^s); a
    violation beyond tol means no commuting curve fits and we report the worst
    offending (i, j, r, s).
    """
    pts = js.points
    n, d = pts.shape
    scale = (1.0 + float(np.max(np.abs(dtil)))) * (1.0 + float(np.ptp(pts, axis=0).max()))
    worst = (0.0, None)
    for i in range(n):
        for j in range(i + 1, n):
            gaps = pts[j] - pts[i]
            for r in range(d):
                for s in range(r + 1, d):
                    res = abs(dtil[s, i, j] * gaps[r] - dtil[r, i, j] * gaps[s])
                    if res > worst[0]:
                        worst = (res, (i, j, r, s))
    if worst[0] > tol * scale:
        i, j, r, s = worst[1]
        raise InconsistentDirection(
            f"slots {r},{s} disagree at pair ({i},{j}): residual {worst[0]:.3e}")


def generator_Y(js: JointSpectrum, delta: Direction,
                tol: float = DEFAULT_TOL.commute,
                gap_tol: float = 1e-8) -> np.ndarray:
    """Skew-Hermitian generator of the commuting curve through js along delta.

    Y_ij = D^r_ij / (x_j^r - x_i^r) using the coordinate r with the largest
    gap; all other admissible coordinates are cross-checked. Zero diagonal;
    skew-Hermitian exactly by construction.
    """
    if not is_generic(js, gap_tol):
        raise NotGeneric("joint spectrum has (nearly) repeated points")
    dtil = _direction_in_basis(js, delta)
    _check_cross_consistency(js, dtil, tol)
    pts = js.points
    n = js.n
    y = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for j in range(i + 1, n):
            gaps = pts[j] - pts[i]
            r = int(np.argmax(np.abs(gaps)))
            y[i, j] = dtil[r, i, j] / gaps[r]
    y = y - y.conj().T
    return y


# Pade(6) numerator coefficients for expm, lowest order first.
_PADE6 = np.array([1.0, 1 / 2, 5 / 44, 1 / 66, 1 / 792, 1 / 15840, 1 / 665280])


def expm_skew(y: np.ndarray, t: float = 1.0) -> np.ndarray:
    """Unitary exponential exp(t*Y) for skew-Hermitian Y.

    Scaling-and-squaring with a diagonal Pade(6) approximant, followed by one
    polar correction to re-enforce unitarity after the squarings.
    """
    a = as_matrix(y) * t
    n = a.shape[0]
    norm = float(np.linalg.norm(a, np.inf))
    squarings = max(0, int(np.ceil(np.log2(norm / 0.25))) if norm > 0.25 else 0)
    a_scaled = a / (2.0 ** squarings)
    powers = [np.eye(n, dtype=complex)]
    for _ in range(6):
        powers.append(powers[-1] @ a_scaled)
    num = sum(c * p for c, p in zip(_PADE6, powers))
    den = sum(c * ((-1) ** k) * p for k, (c, p) in enumerate(zip(_PADE6, powers)))
    e = np.linalg.solve(den, num)
    for _ in range(squarings):
        e = e @ e
    # One polar step: E <- E (E^H E)^(-1/2).
    w, q = eig_hermitian(e.conj().T @ e)
    inv_sqrt = q @ np.diag(1.0 / np.sqrt(np.clip(w, 1e-30, None))) @ q.conj().T
    return e @ inv_sqrt


def curve_point(js: JointSpectrum, delta: Direction, t: float,
                tol: float = DEFAULT_TOL.commute) -> CommutingTuple:
    """Point S(t) on the exactly commuting curve through js with velocity delta."""
    y = generator_Y(js, delta, tol)
    dtil = _direction_in_basis(js, delta)
    e = expm_skew(y, t)
    q = js.q
    mats = []
    for r in range(js.d):
        core = np.diag(js.points[:, r] + t * np.diag(dtil[r]).real)
        m = q @ (e @ core @ e.conj().T) @ q.conj().T
        mats.append(0.5 * (m + m.conj().T))
    return CommutingTuple(tuple(mats))


@dataclass(frozen=True)
class SmoothFunction:
    """A scalar function of d real variables with a gradient evaluator.

    When no gradient is supplied a central difference with step
    1e-6 * (1 + |x|) fills in, and the instance is flagged numeric_gradient.
    domain, when given, is a per-coordinate box ((a_1,b_1),...,(a_d,b_d)).
    """

    f: Callable
    grad: Optional[Callable] = None
    domain: Optional[tuple] = None
    name: str = ""
    numeric_gradient: bool = field(default=False)

    def __post_init__(self):
        if self.grad is None:
            object.__setattr__(self, "numeric_gradient", True)

    def value(self, x) -> float:
        return float(self.f(np.asarray(x, dtype=float)))

    def gradient(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.grad is not None:
            return np.asarray(self.grad(x), dtype=float)
        g = np.empty_like(x)
        for r in range(x.size):
            h = 1e-6 * (1.0 + abs(x[r]))
            xp = x.copy(); xp[r] += h
            xm = x.copy(); xm[r] -= h
            g[r] = (self.f(xp) - self.f(xm)) / (2 * h)
        return g

    def check_domain(self, points: np.ndarray) -> None:
        if self.domain is None:
            return
        for i, x in enumerate(np.atleast_2d(points)):
            for r, (a, b) in enumerate(self.domain):
                if not (a <= x[r] <= b):
                    raise DomainViolation(
                        f"joint eigenvalue {i} coordinate {r} = {x[r]} outside [{a}, {b}]")


def apply_function(f: SmoothFunction, s: CommutingTuple,
                   js: Optional[JointSpectrum] = None) -> np.ndarray:
    """f(S) through the joint spectrum: Q diag(f(x_i)) Q^H."""
    if js is None:
        js = joint_diagonalize(s)
    f.check_domain(js.points)
    vals = np.array([f.value(x) for x in js.points])
    m = js.q @ np.diag(vals) @ js.q.conj().T
    return 0.5 * (m + m.conj().T)


def directional_derivative(f: SmoothFunction, js: JointSpectrum,
                           delta: Direction,
                           tol: float = DEFAULT_TOL.commute,
                           gap_tol: float = 1e-8) -> np.ndarray:
    """Derivative of t -> f(S(t)) at t = 0 along the commuting curve.

    In the diagonalizing basis the off-diagonal entries are divided
    differences D^r_ij (f(x_j) - f(x_i)) / (x_j^r - x_i^r) (independent of the
    admissible r), and the diagonal is sum_r D^r_ii df/dx^r(x_i). The result
    is conjugated back to the original basis.
    """
    if not is_generic(js, gap_tol):
        raise NotGeneric("joint spectrum has (nearly) repeated points")
    dtil = _direction_in_basis(js, delta)
    _check_cross_consistency(js, dtil, tol)
    f.check_domain(js.points)
    pts = js.points
    n = js.n
    vals = np.array([f.value(x) for x in pts])
    grads = np.stack([f.gradient(x) for x in pts])
    out = np.zeros((n, n), dtype=complex)
    for i in range(n):
        slot_diag = np.array([dtil[r, i, i].real for r in range(js.d)])
        out[i, i] = float(np.dot(grads[i], slot_diag))
        for j in range(i + 1, n):
            gaps = pts[j] - pts[i]
            r = int(np.argmax(np.abs(gaps)))
            out[i, j] = dtil[r, i, j] * (vals[j] - vals[i]) / gaps[r]
            out[j, i] = out[i, j].conjugate()
    m = js.q @ out @ js.q.conj().T
    return 0.5 * (m + m.conj().T)


def perturbation_check(r: CommutingTuple, s: CommutingTuple,
                       tol: float = 1e-9):
    """Worst distance from R's joint eigenvalues to S's, with its bound.

    Returns (max_min_distance, bound) where bound = sqrt(d*n) * max_r of the
    spectral norm of R^r - S^r. The inequality distance <= bound is a theorem
    for commuting tuples; a gross violation raises.
    """
    if r.d != s.d or r.n != s.n:
        raise ShapeMismatch("tuples have different shapes")
    js_r = joint_diagonalize(r)
    js_s = joint_diagonalize(s)
    dist = 0.0
    for mu in js_r.points:
        dmin = float(np.min(np.sqrt(np.sum((js_s.points - mu) ** 2, axis=1))))
        dist = max(dist, dmin)
    opnorm = 0.0
    for a, b in zip(r.mats, s.mats):
        w, _ = eig_hermitian(a - b)
        opnorm = max(opnorm, float(np.max(np.abs(w))))
    bound = np.sqrt(r.d * r.n) * opnorm
    if dist > bound + max(tol, 1e-9 * (1.0 + bound)):
        raise InternalCheckFailed(
            f"spectral perturbation bound violated: {dist:.3e} > {bound:.3e}")
    return dist, bound


@dataclass(frozen=True)
class TrackResult:
    tracks: np.ndarray        # (n, steps_done, d)
    ratios: np.ndarray        # (n, steps_done - 1) per-track Lipschitz ratios
    complete: bool
    steps_done: int


def track_eigenpaths(path: Sequence[CommutingTuple], tol: float = 1e-7,
                     gap_tol: float = 1e-8) -> TrackResult:
    """Follow the joint eigenvalues along a sampled path of commuting tuples.

    Greedy nearest-neighbor matching between consecutive joint spectra. Valid
    while the drift from the initial tuple keeps every eigenvalue inside a
    third of the initial minimal gap (scaled by sqrt(d*n)); when the margin
    fails the result is returned truncated with complete=False.
    """
    first = joint_diagonalize(path[0])
    if not is_generic(first, gap_tol):
        raise NotGeneric("initial tuple must have distinct joint eigenvalues")
    n, d = first.n, first.d
    gap0 = min_gap(first.points)
    sqdn = np.sqrt(d * n)

    def opdist(a: CommutingTuple, b: CommutingTuple) -> float:
        out = 0.0
        for x, y in zip(a.mats, b.mats):
            w, _ = eig_hermitian(x - y)
            out = max(out, float(np.max(np.abs(w))))
        return out

    tracks = [first.points.copy()]
    ratios = []
    complete = True
    prev = first.points.copy()
    for k in range(1, len(path)):
        if sqdn * opdist(path[k], path[0]) > gap0 / 3.0:
            complete = False
            break
        js = joint_diagonalize(path[k])
        pts = js.points
        # Greedy matching by increasing distance.
        cost = np.sqrt(np.sum((prev[:, None, :] - pts[None, :, :]) ** 2, axis=2))
        order = np.dstack(np.unravel_index(np.argsort(cost, axis=None), cost.shape))[0]
        match = -np.ones(n, dtype=int)
        used = np.zeros(n, dtype=bool)
        assigned = 0
        for a, b in order:
            if match[a] < 0 and not used[b]:
                match[a] = b
                used[b] = True
                assigned += 1
                if assigned == n:
                    break
        new_pts = pts[match]
        step = opdist(path[k], path[k - 1])
        moved = np.sqrt(np.sum((new_pts - prev) ** 2, axis=1))
        ratios.append(moved / step if step > 0 else np.zeros(n))
        tracks.append(new_pts)
        prev = new_pts
    tr = np.stack(tracks, axis=1)  # (n, steps_done, d)
    ra = np.stack(ratios, axis=1) if ratios else np.zeros((n, 0))
    if complete and ra.size:
        worst = float(ra.max())
        if worst > sqdn + max(tol, 1e-7):
            raise InternalCheckFailed(
                f"Lipschitz ratio {worst:.3f} exceeds sqrt(d n) = {sqdn:.3f}")
    return TrackResult(tr, ra, complete, tr.shape[1])
