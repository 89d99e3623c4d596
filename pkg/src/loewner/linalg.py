"""Dense Hermitian linear algebra on desk-scale matrices.

Everything here works on complex numpy arrays of modest size (n <= 64 is the
design point). The eigensolver is a cyclic Jacobi iteration with threshold
sweeps: it is deterministic given the input bits, needs no tuning, and at these
sizes its quadratic convergence makes it perfectly adequate. All positivity
tests in the package route through it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DiagonalizationFailed, NonHermitian, ShapeMismatch

# Imaginary parts below this (relative) level on a real input are roundoff dust.
_REAL_DUST = 1e-14


@dataclass(frozen=True)
class Tolerances:
    """Default numerical thresholds used across the package."""

    herm: float = 1e-10       # Hermiticity defect, relative
    psd: float = 1e-9         # eigenvalue floor for positivity tests
    commute: float = 1e-8     # commutator residual, relative
    residual: float = 1e-7    # certificate constraint residuals, absolute
    max_iter: int = 10000     # projection iteration cap


DEFAULT_TOL = Tolerances()


def as_matrix(a) -> np.ndarray:
    """Coerce to a square complex 2-d array."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ShapeMismatch(f"expected a square matrix, got shape {m.shape}")
    return m


def hermitian_defect(h) -> float:
    h = as_matrix(h)
    return float(np.linalg.norm(h - h.conj().T))


def require_hermitian(h, tol: float = DEFAULT_TOL.herm) -> np.ndarray:
    """Return the Hermitian part of h, raising if the defect is beyond tol."""
    h = as_matrix(h)
    defect = float(np.linalg.norm(h - h.conj().T))
    if defect > tol * (1.0 + float(np.linalg.norm(h))):
        raise NonHermitian(f"Hermiticity defect {defect:.3e} exceeds tolerance")
    return 0.5 * (h + h.conj().T)


def _fix_phases(q: np.ndarray) -> np.ndarray:
    """Make each eigenvector's first non-negligible component real positive."""
    n = q.shape[0]
    out = q.copy()
    for k in range(n):
        col = out[:, k]
        mags = np.abs(col)
        top = mags.max()
        if top == 0.0:
            continue
        idx = int(np.argmax(mags > 1e-12 * top))
        pivot = col[idx]
        out[:, k] = col * (pivot.conjugate() / abs(pivot))
    return out


def eig_hermitian(h, tol: float = DEFAULT_TOL.herm, max_sweeps: int = 64):
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Returns (w, q) with eigenvalues w ascending (stable tie order) and unitary
    q whose columns are eigenvectors, phase-fixed so the first sizeable
    component of each column is real positive. Real symmetric input yields a
    real q (any imaginary dust below 1e-14 relative is truncated).

    Each sweep visits all index pairs (p, q) in cyclic order and annihilates
    the off-diagonal entry with a complex Givens rotation; small entries are
    skipped against a decaying threshold in the early sweeps, following the
    classic recipe.
    """
    a = require_hermitian(h, tol)
    n = a.shape[0]
    was_real = float(np.max(np.abs(a.imag), initial=0.0)) <= _REAL_DUST * (
        1.0 + float(np.max(np.abs(a.real), initial=0.0)))
    scale = float(np.linalg.norm(a))
    vecs = np.eye(n, dtype=complex)
    if n == 1:
        return np.array([a[0, 0].real]), vecs

    converged = False
    for sweep in range(max_sweeps):
        off = float(np.sum(np.abs(a - np.diag(np.diag(a)))))
        if off <= 1e-15 * n * (1.0 + scale):
            converged = True
            break
        thresh = 0.2 * off / (n * n) if sweep < 3 else 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                g = abs(apq)
                if g == 0.0:
                    continue
                # Once well into the iteration, entries that are negligible
                # against both diagonal neighbours can be zeroed outright.
                dp, dq = abs(a[p, p].real), abs(a[q, q].real)
                if sweep > 3 and g <= 1e-18 * (dp + dq):
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    continue
                if g <= thresh:
                    continue
                phase = apq / g
                hgap = (a[q, q] - a[p, p]).real
                theta = 0.5 * hgap / g
                t = np.sign(theta) / (abs(theta) + np.hypot(theta, 1.0)) \
                    if theta != 0.0 else 1.0
                c = 1.0 / np.hypot(t, 1.0)
                s = t * c
                # Plane rotation J: [[c, s], [-s*conj(phase), c*conj(phase)]]
                # acting as a <- J^H a J, accumulated into vecs.
                sp = s * phase
                spc = s * phase.conjugate()
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - spc * col_q
                a[:, q] = s * col_p + c * phase.conjugate() * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - sp * row_q
                a[q, :] = s * row_p + c * phase * row_q
                # Clean the annihilated pair against roundoff drift.
                a[p, q] = 0.5 * (a[p, q] + a[q, p].conjugate())
                a[q, p] = a[p, q].conjugate()
                vp = vecs[:, p].copy()
                vq = vecs[:, q].copy()
                vecs[:, p] = c * vp - spc * vq
                vecs[:, q] = s * vp + c * phase.conjugate() * vq
    else:
        converged = False
    if not converged:
        off = float(np.sum(np.abs(a - np.diag(np.diag(a)))))
        if off > 1e-10 * n * (1.0 + scale):
            raise DiagonalizationFailed(
                f"Jacobi sweeps did not converge: off-diagonal mass {off:.3e}")

    w = np.diag(a).real.copy()
    order = np.argsort(w, kind="stable")
    w = w[order]
    vecs = vecs[:, order]
    vecs = _fix_phases(vecs)
    if was_real:
        dust = float(np.max(np.abs(vecs.imag), initial=0.0))
        if dust <= 1e-12:
            vecs = vecs.real.astype(complex)
    return w, vecs


def min_eigenvalue(h, tol: float = DEFAULT_TOL.herm) -> float:
    w, _ = eig_hermitian(h, tol)
    return float(w[0])


def is_psd(h, tol: float = DEFAULT_TOL.psd) -> bool:
    """Positive semidefiniteness up to an eigenvalue floor of -tol."""
    return min_eigenvalue(h) >= -tol


def spectral_norm_hermitian(h) -> float:
    w, _ = eig_hermitian(h)
    return float(np.max(np.abs(w)))


def loewner_leq(s, t, tol: float = DEFAULT_TOL.psd) -> bool:
    """Entrywise-in-r ordering S^r <= T^r for tuples of Hermitian matrices.

    Accepts single matrices or sequences of matrices of equal shapes.
    """
    s_list = [as_matrix(m) for m in _as_tuple(s)]
    t_list = [as_matrix(m) for m in _as_tuple(t)]
    if len(s_list) != len(t_list):
        raise ShapeMismatch("tuples have different lengths")
    for a, b in zip(s_list, t_list):
        if a.shape != b.shape:
            raise ShapeMismatch("matrix shapes differ between tuples")
        if not is_psd(require_hermitian(b) - require_hermitian(a), tol):
            return False
    return True


def _as_tuple(x):
    if isinstance(x, np.ndarray) and x.ndim == 2:
        return (x,)
    mats = getattr(x, "mats", None)
    if mats is not None:
        return tuple(mats)
    return tuple(x)


def schur_product(a, b) -> np.ndarray:
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape != b.shape:
        raise ShapeMismatch(f"shapes {a.shape} and {b.shape} differ")
    return a * b


@dataclass(frozen=True)
class GradedSpace:
    """A finite-dimensional space split into d labelled orthogonal blocks.

    dims[r] is the dimension of block r; the blocks are laid out
    consecutively, so block r occupies indices offsets[r]:offsets[r+1].
    """

    dims: tuple

    def __post_init__(self):
        if len(self.dims) == 0 or any(int(m) <= 0 for m in self.dims):
            raise ShapeMismatch("grading needs positive block dimensions")
        object.__setattr__(self, "dims", tuple(int(m) for m in self.dims))

    @property
    def d(self) -> int:
        return len(self.dims)

    @property
    def total(self) -> int:
        return int(sum(self.dims))

    @property
    def offsets(self):
        off = [0]
        for m in self.dims:
            off.append(off[-1] + m)
        return tuple(off)

    def block_slice(self, r: int) -> slice:
        off = self.offsets
        return slice(off[r], off[r + 1])

    def projector_diagonal(self, r: int) -> np.ndarray:
        """Indicator vector of block r (the diagonal of its projector)."""
        v = np.zeros(self.total)
        v[self.block_slice(r)] = 1.0
        return v

    def blockwise(self, z) -> np.ndarray:
        """Diagonal of sum_r z^r P^r for a point z with one entry per block."""
        z = np.asarray(z, dtype=complex).ravel()
        if z.shape[0] != self.d:
            raise ShapeMismatch(f"point has {z.shape[0]} entries, grading has {self.d}")
        out = np.empty(self.total, dtype=complex)
        for r in range(self.d):
            out[self.block_slice(r)] = z[r]
        return out


def graded_sum(mats, grading: GradedSpace) -> np.ndarray:
    """sum_r M^r (x) P^r on the tensor product, tuple index major.

    `mats` is a d-tuple of n x n matrices (scalars are promoted to 1 x 1), and
    P^r is the orthogonal projector onto block r of the grading. The result is
    (n*m) x (n*m) with m = grading.total. With n = 1 this reduces to the
    blockwise diagonal action of a point: (sum_r z^r P^r) eta = sum_r z^r eta^r.
    """
    mats = [as_matrix(np.atleast_2d(m)) for m in mats]
    if len(mats) != grading.d:
        raise ShapeMismatch(f"{len(mats)} matrices against a {grading.d}-block grading")
    n = mats[0].shape[0]
    for m in mats:
        if m.shape[0] != n:
            raise ShapeMismatch("tuple entries must share one size")
    total = grading.total
    out = np.zeros((n * total, n * total), dtype=complex)
    for r, m in enumerate(mats):
        proj = np.zeros((total, total), dtype=complex)
        sl = grading.block_slice(r)
        proj[sl, sl] = np.eye(grading.dims[r])
        out += np.kron(m, proj)
    return out
