"""Randomized verification harness for matrix monotonicity claims.

Five trial families over seeded random commuting tuples:

* global:       F(T) - F(S) PSD for ordered commuting pairs S <= T,
* local:        directional derivatives along admissible PSD directions PSD,
* geomean:      (B^1 B^2)^s - (A^1 A^2)^s PSD for ordered positive pairs
                (asserted for s <= 1/2, recorded only for s > 1/2),
* path:         the resolvent-path integrand stays PSD and its Simpson
                integral reproduces F(T) - F(S),
* intermediate: annealed search for a commuting pair strictly between a
                fixed ordered pair (expected to find none).

Determinism contract: trial k of a run draws every random quantity from a
counter-based generator keyed by (seed, k), so reports depend only on the
configuration and never on scheduling or wall clock.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DegenerateBox, DomainViolation, RetryExhausted, ShapeMismatch
from .linalg import (
    DEFAULT_TOL,
    GradedSpace,
    Tolerances,
    eig_hermitian,
    loewner_leq,
    min_eigenvalue,
)
from .realize import (
    CauchyRealization,
    box_segment_in_resolvent,
    eval_on_tuple,
    path_derivative_check,
)
from .tuples import (
    CommutingTuple,
    Direction,
    JointSpectrum,
    SmoothFunction,
    commuting_tuple,
    direction,
    directional_derivative,
    joint_diagonalize,
)

PASS_TOL = 1e-8
ENDPOINT_GAP = 1e-4


def trial_rng(seed: int, index: int) -> np.random.Generator:
    """Counter-based stream for one trial: keyed, not sequentially seeded."""
    return np.random.Generator(np.random.Philox(key=[seed & (2**64 - 1), index]))


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-ish unitary: QR of a complex Gaussian with R-diagonal phase fix."""
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(a)
    diag = np.diag(r)
    q = q * (diag / np.abs(diag)).conj()[None, :]
    return q


def _box_array(box, d: int) -> np.ndarray:
    box = np.asarray(box, dtype=float)
    if box.shape != (d, 2):
        raise ShapeMismatch(f"box shape {box.shape}, expected ({d}, 2)")
    if np.any(box[:, 1] <= box[:, 0]):
        raise DegenerateBox("box must have positive widths")
    return box


def random_commuting_tuple(n: int, d: int, box, rng: np.random.Generator,
                           gap_frac: float = 1e-6,
                           max_tries: int = 1000) -> CommutingTuple:
    """U diag(points) U^H with points uniform in box; resampled until generic."""
    box = _box_array(box, d)
    width = float(np.max(box[:, 1] - box[:, 0]))
    for _ in range(max_tries):
        pts = rng.uniform(box[:, 0], box[:, 1], size=(n, d))
        if n > 1:
            diff = pts[:, None, :] - pts[None, :, :]
            dist = np.sqrt((diff ** 2).sum(axis=2))
            dist[np.diag_indices(n)] = np.inf
            if dist.min() < gap_frac * width:
                continue
        q = random_unitary(n, rng)
        mats = []
        for r in range(d):
            m = (q * pts[:, r][None, :]) @ q.conj().T
            mats.append(0.5 * (m + m.conj().T))
        return CommutingTuple(tuple(mats))
    raise RetryExhausted(f"no generic point set after {max_tries} draws")


def random_ordered_pair(n: int, d: int, box, rng: np.random.Generator,
                        margin: float = 1e-2, max_tries: int = 100):
    """Ordered pair S <= T of commuting tuples with all spectra inside box.

    Draw A in the lower third and B in the upper third of the box, lift
    T = B + c_r I just far enough that T - S is PSD with the requested
    margin, then map both through one increasing affine change per slot so
    the combined spectra land back inside the box. Order and commutativity
    survive both steps.
    """
    box = _box_array(box, d)
    lo, hi = box[:, 0], box[:, 1]
    width = hi - lo
    lower = np.stack([lo, lo + width / 3], axis=1)
    upper = np.stack([hi - width / 3, hi], axis=1)
    for _ in range(max_tries):
        a = random_commuting_tuple(n, d, lower, rng)
        b = random_commuting_tuple(n, d, upper, rng)
        s_mats = list(a.mats)
        t_mats = []
        for r in range(d):
            gap = b.mats[r] - a.mats[r]
            c = max(0.0, -min_eigenvalue(0.5 * (gap + gap.conj().T)))
            t_mats.append(b.mats[r] + (c + margin * width[r]) * np.eye(n))
        ok = True
        for r in range(d):
            evs = np.concatenate([eig_hermitian(s_mats[r])[0],
                                  eig_hermitian(t_mats[r])[0]])
            m, mm = float(evs.min()), float(evs.max())
            if mm - m < 1e-12:
                ok = False
                break
            scale = width[r] / (mm - m)
            shift = lo[r] - m * scale
            s_mats[r] = s_mats[r] * scale + shift * np.eye(n)
            t_mats[r] = t_mats[r] * scale + shift * np.eye(n)
        if not ok:
            continue
        s = CommutingTuple(tuple(s_mats))
        t = CommutingTuple(tuple(t_mats))
        if loewner_leq(s, t):
            return s, t
    raise RetryExhausted(f"no ordered pair inside the box after {max_tries} tries")


def admissible_direction(js: JointSpectrum, rng: np.random.Generator,
                         psd: bool = True) -> Direction:
    """Random first-order-commuting direction at a generic tuple.

    In the joint eigenbasis: off-diagonal from a random skew-Hermitian
    generator scaled by the coordinate gaps, free random diagonal; optional
    minimal diagonal shift into the PSD cone.
    """
    n, d = js.n, js.d
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    y = 0.5 * (g - g.conj().T)
    np.fill_diagonal(y, 0.0)
    diags = rng.standard_normal((d, n))
    mats = []
    for r in range(d):
        gaps = js.points[None, :, r] - js.points[:, None, r]
        m = y * gaps
        np.fill_diagonal(m, diags[r])
        m = 0.5 * (m + m.conj().T)
        mats.append(m)
    if psd:
        mats = [m + max(0.0, -min_eigenvalue(m)) * np.eye(n) for m in mats]
    back = [js.q @ m @ js.q.conj().T for m in mats]
    return direction(back)


# ---------------------------------------------------------------------------
# Single-trial checks.

def global_trial(f, s: CommutingTuple, t: CommutingTuple) -> float:
    """min eig of f(T) - f(S); f is a CauchyRealization or a SmoothFunction."""
    if isinstance(f, CauchyRealization):
        fs = eval_on_tuple(f, s)
        ft = eval_on_tuple(f, t)
    elif isinstance(f, SmoothFunction):
        fs = _spectral_apply(f, s)
        ft = _spectral_apply(f, t)
    else:
        raise ShapeMismatch(f"unsupported evaluator {type(f).__name__}")
    return float(min_eigenvalue(0.5 * ((ft - fs) + (ft - fs).conj().T)))


def _spectral_apply(f: SmoothFunction, s: CommutingTuple) -> np.ndarray:
    js = joint_diagonalize(s)
    vals = np.array([f.value(js.points[i]) for i in range(js.n)])
    m = (js.q * vals[None, :]) @ js.q.conj().T
    return 0.5 * (m + m.conj().T)


def local_trial(f: SmoothFunction, s: CommutingTuple,
                delta: Direction) -> float:
    """min eig of the directional derivative of f at s along delta."""
    js = joint_diagonalize(s)
    deriv = directional_derivative(f, js, delta)
    return float(min_eigenvalue(deriv))


def _psd_power(m: np.ndarray, s: float, floor: float = 0.0) -> np.ndarray:
    w, q = eig_hermitian(0.5 * (m + m.conj().T))
    if np.any(w < -1e-9 * (1.0 + np.abs(w).max())):
        raise DomainViolation(f"matrix power of non-PSD input: min eig {w.min():.3e}")
    w = np.clip(w, floor, None)
    out = (q * (w ** s)[None, :]) @ q.conj().T
    return 0.5 * (out + out.conj().T)


def geomean_trial(s_exponent: float, a: CommutingTuple,
                  b: CommutingTuple) -> float:
    """min eig of (B^1 B^2)^s - (A^1 A^2)^s for positive commuting pairs."""
    if not (0.0 <= s_exponent <= 1.0):
        raise DomainViolation("exponent must lie in [0, 1]")
    if a.d != 2 or b.d != 2:
        raise ShapeMismatch("geometric-mean trials need d = 2")
    for tup in (a, b):
        for m in tup.mats:
            if min_eigenvalue(0.5 * (m + m.conj().T)) <= 0.0:
                raise DomainViolation("spectra must be strictly positive")
    if s_exponent == 0.0:
        return 0.0
    pa = _psd_power(a.mats[0] @ a.mats[1], s_exponent)
    pb = _psd_power(b.mats[0] @ b.mats[1], s_exponent)
    diff = pb - pa
    return float(min_eigenvalue(0.5 * (diff + diff.conj().T)))


# ---------------------------------------------------------------------------
# Intermediate-tuple search (annealing over 2x2 commuting pairs).

EXI1_S = (np.array([[0.0, 0.0], [0.0, 5.0]]),
          np.array([[1.0, 0.0], [0.0, 0.0]]))
EXI1_T = (np.array([[4.0, 2.0], [2.0, 6.0]]),
          np.array([[2.0, 2.0], [2.0, 4.0]]))


@dataclass(frozen=True)
class IntermediateResult:
    found: bool
    best_candidate: Optional[tuple]
    distance_from_endpoints: float
    best_violation: float
    evaluations: int


def _pair_from_params(theta, chi, d1a, d1b, d2a, d2b):
    """Batched 2x2 commuting pairs U diag U^H from angle/diagonal parameters."""
    c = np.cos(theta)
    s = np.sin(theta)
    ph = np.exp(1j * chi)
    # columns of U
    u00, u10 = c, s * ph
    u01, u11 = -s * np.conj(ph), c
    def conj_diag(da, db):
        m00 = da * np.abs(u00) ** 2 + db * np.abs(u01) ** 2
        m11 = da * np.abs(u10) ** 2 + db * np.abs(u11) ** 2
        m01 = da * u00 * np.conj(u10) + db * u01 * np.conj(u11)
        return m00, m01, m11
    return conj_diag(d1a, d1b), conj_diag(d2a, d2b)


def _min_eig_2x2(m00, m01, m11):
    tr = m00 + m11
    det_disc = np.sqrt(np.maximum((m00 - m11) ** 2 + 4.0 * np.abs(m01) ** 2, 0.0))
    return 0.5 * (tr - det_disc)


def _order_violation_batch(r1, r2, s_pair, t_pair):
    """max positive part of the most negative eigenvalue over the 4 order gaps."""
    out = None
    for (m00, m01, m11), fixed, sign in (
            (r1, s_pair[0], 1.0), (r2, s_pair[1], 1.0),
            (r1, t_pair[0], -1.0), (r2, t_pair[1], -1.0)):
        g00 = sign * (m00.real - fixed[0, 0].real)
        g11 = sign * (m11.real - fixed[1, 1].real)
        g01 = sign * (m01 - fixed[0, 1])
        me = _min_eig_2x2(g00, g01, g11)
        v = np.maximum(-me, 0.0)
        out = v if out is None else np.maximum(out, v)
    return out


def _pair_distance_batch(r1, r2, pair):
    d = np.zeros_like(r1[0].real)
    for (m00, m01, m11), fixed in ((r1, pair[0]), (r2, pair[1])):
        d = d + np.abs(m00 - fixed[0, 0]) ** 2 + np.abs(m11 - fixed[1, 1]) ** 2 \
              + 2.0 * np.abs(m01 - fixed[0, 1]) ** 2
    return np.sqrt(d)


def intermediate_search(s_pair=None, t_pair=None, budget: int = 100000,
                        seed: int = 0,
                        endpoint_gap: float = ENDPOINT_GAP,
                        feas_tol: float = PASS_TOL) -> IntermediateResult:
    """Search for a commuting 2x2 pair R with S <= R <= T away from S and T.

    Annealed batches over the 6-parameter family R = (U diag U^H, U diag U^H)
    with a shared unitary (the general commuting 2x2 pair up to the measure-
    zero degenerate stratum). The objective is the worst order violation plus
    a hinge pushing candidates at least endpoint_gap away from both
    endpoints. found only when a candidate is feasible within feas_tol and
    genuinely separated from the endpoints.
    """
    s_pair = EXI1_S if s_pair is None else tuple(np.asarray(m, dtype=complex) for m in s_pair)
    t_pair = EXI1_T if t_pair is None else tuple(np.asarray(m, dtype=complex) for m in t_pair)
    s_pair = tuple(np.asarray(m, dtype=complex) for m in s_pair)
    rng = trial_rng(seed, 0)

    lo = min(min_eigenvalue(m) for m in s_pair) - 1.0
    hi = max(float(eig_hermitian(m)[0].max()) for m in t_pair) + 1.0

    batch = 512
    rounds = max(1, budget // batch)
    # anneal state: keep the best-so-far parameter vector, perturb around it
    best_params = None
    best_obj = np.inf
    best_record = (False, None, 0.0, np.inf)
    evals = 0
    for k in range(rounds):
        temp = max(0.05, 1.0 - k / rounds)
        if best_params is None or rng.random() < 0.25:
            theta = rng.uniform(0.0, np.pi, batch)
            chi = rng.uniform(0.0, 2 * np.pi, batch)
            diag = rng.uniform(lo, hi, (4, batch))
        else:
            theta = best_params[0] + temp * rng.standard_normal(batch)
            chi = best_params[1] + temp * rng.standard_normal(batch)
            diag = best_params[2][:, None] + temp * (hi - lo) * 0.25 \
                * rng.standard_normal((4, batch))
        r1, r2 = _pair_from_params(theta, chi, diag[0], diag[1], diag[2], diag[3])
        viol = _order_violation_batch(r1, r2, s_pair, t_pair)
        dist_s = _pair_distance_batch(r1, r2, s_pair)
        dist_t = _pair_distance_batch(r1, r2, t_pair)
        sep = np.minimum(dist_s, dist_t)
        obj = viol + np.maximum(endpoint_gap * 2.0 - sep, 0.0)
        evals += batch
        i = int(np.argmin(obj))
        if obj[i] < best_obj:
            best_obj = float(obj[i])
            best_params = (theta[i], chi[i], diag[:, i])
        # track the best genuinely-separated candidate
        mask = sep > endpoint_gap
        if np.any(mask):
            j = int(np.argmin(np.where(mask, viol, np.inf)))
            if viol[j] < best_record[3]:
                cand1 = np.array([[r1[0][j], r1[1][j]],
                                  [np.conj(r1[1][j]), r1[2][j]]])
                cand2 = np.array([[r2[0][j], r2[1][j]],
                                  [np.conj(r2[1][j]), r2[2][j]]])
                best_record = (bool(viol[j] <= feas_tol), (cand1, cand2),
                               float(sep[j]), float(viol[j]))
        if evals >= budget:
            break
    found, cand, sep_best, viol_best = best_record
    return IntermediateResult(found, cand, sep_best, viol_best, evals)


# ---------------------------------------------------------------------------
# Path positivity and the fundamental-theorem integral.

@dataclass(frozen=True)
class PathResult:
    integral_error: float
    min_derivative_eig: float
    richardson_error: float
    panels: int


def _simpson_integral(cr: CauchyRealization, s_mats, t_mats, panels: int):
    """Composite Simpson of the path integrand; also returns worst min eig."""
    n = s_mats[0].shape[0]
    total = np.zeros((n, n), dtype=complex)
    worst = np.inf
    h = 1.0 / panels
    cache = {}

    def g_at(t: float):
        if t not in cache:
            g = path_derivative_check(cr, s_mats, t_mats, t)
            cache[t] = g
        return cache[t]

    for p in range(panels):
        a = p * h
        ga, gm, gb = g_at(a), g_at(a + h / 2), g_at(a + h)
        total = total + (h / 6.0) * (ga + 4.0 * gm + gb)
        for g in (ga, gm, gb):
            worst = min(worst, float(min_eigenvalue(g)))
    return total, worst


def path_positivity_trial(cr: CauchyRealization, s: CommutingTuple,
                          t: CommutingTuple, panels: int = 64,
                          box=None) -> PathResult:
    """Check the straight-segment path from S to T through the realization.

    The integrand G(t) = R_v^H Y(t)^{-1} (Delta . I) Y(t)^{-1} R_v is
    integrated with composite Simpson and compared against F(T) - F(S); a
    Richardson pass at twice the panel count estimates the quadrature error
    independently. When a box is supplied, its diagonal is prechecked against
    the joint spectrum of X before any solve.
    """
    if box is not None:
        if not box_segment_in_resolvent(cr.x, cr.grading, box):
            raise DomainViolation("box diagonal meets the joint spectrum of X")
    s_mats = [np.asarray(m, dtype=complex) for m in s.mats]
    t_mats = [np.asarray(m, dtype=complex) for m in t.mats]
    direct = eval_on_tuple(cr, t) - eval_on_tuple(cr, s)
    integral, worst = _simpson_integral(cr, s_mats, t_mats, panels)
    err = float(np.linalg.norm(integral - direct))
    fine, _ = _simpson_integral(cr, s_mats, t_mats, panels * 2)
    rich = float(np.linalg.norm(fine - direct))
    return PathResult(err, worst, rich, panels)


# ---------------------------------------------------------------------------
# Batch driver.

MODES = ("global", "local", "geomean", "path", "intermediate")


@dataclass(frozen=True)
class TrialConfig:
    seed: int
    trials: int = 200
    n: int = 4                      # per-trial sizes are drawn from 2..n
    d: int = 2
    box: tuple = ((-0.4, 0.4), (-0.4, 0.4))
    mode: str = "global"
    s_exponent: float = 0.5
    panels: int = 64
    tol: Tolerances = DEFAULT_TOL

    def __post_init__(self):
        if self.mode not in MODES:
            raise ShapeMismatch(f"unknown mode {self.mode!r}")
        if self.trials < 1:
            raise ShapeMismatch("trials must be >= 1")
        _box_array(self.box, self.d)


@dataclass(frozen=True)
class TrialReport:
    mode: str
    seed: int
    trials: int
    passes: int
    failures: int
    worst_violation: float
    failure_examples: list = field(default_factory=list)
    stats: dict = field(default_factory=dict)


def canonical_realization() -> CauchyRealization:
    """The running 2-variable model: X the 2x2 swap, grading (1,1), v1 = e1.

    Evaluates to F(z) = -z^2 / (z^1 z^2 - 1); monotone on boxes whose
    closure avoids the hyperbola z^1 z^2 = 1.
    """
    x = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    v1 = np.array([1.0, 0.0], dtype=complex)
    return CauchyRealization(0.0, x, v1, GradedSpace((1, 1)))


def _default_local_function() -> SmoothFunction:
    return SmoothFunction(
        f=lambda x: math.sqrt(x[0] * x[1]),
        grad=lambda x: np.array([math.sqrt(x[1] / x[0]) / 2.0,
                                 math.sqrt(x[0] / x[1]) / 2.0]),
        name="sqrt(x1*x2)",
    )


def _example_payload(kind: str, trial: int, violation: float, mats) -> dict:
    ex = {"trial": trial, "kind": kind, "violation": violation}
    for name, tup in mats.items():
        ex[name] = [
            [[[float(z.real), float(z.imag)] for z in row]
             for row in np.atleast_2d(np.asarray(m, dtype=complex))]
            for m in tup
        ]
    return ex


def run_fuzz(config: TrialConfig, f=None) -> TrialReport:
    """Execute a batch of trials; deterministic in (config, f).

    f overrides the evaluator where a mode needs one: a CauchyRealization
    for global/path modes (default: the canonical realization with its safe
    box) or a SmoothFunction for local mode (default sqrt(x1 x2) on its
    positive box).
    """
    if config.mode == "intermediate":
        return _run_intermediate(config)

    passes = failures = 0
    worst = np.inf
    examples = []
    stats = {"mode": config.mode, "n_max": config.n, "d": config.d,
             "box": [[float(a), float(b)] for a, b in config.box]}

    if config.mode in ("global", "path"):
        evaluator = f if f is not None else canonical_realization()
    elif config.mode == "local":
        evaluator = f if f is not None else _default_local_function()
    else:
        evaluator = None
    if config.mode == "geomean":
        stats["s_exponent"] = config.s_exponent
        stats["exploration"] = bool(config.s_exponent > 0.5)
    if config.mode == "path":
        stats["panels"] = config.panels

    worst_int_err = 0.0
    for k in range(config.trials):
        rng = trial_rng(config.seed, k)
        n = int(rng.integers(2, config.n + 1)) if config.n > 2 else 2

        if config.mode == "global":
            s, t = random_ordered_pair(n, config.d, config.box, rng)
            val = global_trial(evaluator, s, t)
            ok = val >= -PASS_TOL
            payload = {"S": s.mats, "T": t.mats}
        elif config.mode == "local":
            s = random_commuting_tuple(n, config.d, config.box, rng)
            js = joint_diagonalize(s)
            delta = admissible_direction(js, rng, psd=True)
            val = float(min_eigenvalue(directional_derivative(evaluator, js, delta)))
            ok = val >= -PASS_TOL
            payload = {"S": s.mats, "Delta": delta.mats}
        elif config.mode == "geomean":
            a, b = random_ordered_pair(n, 2, config.box, rng)
            val = geomean_trial(config.s_exponent, a, b)
            ok = (val >= -PASS_TOL) or stats["exploration"]
            payload = {"A": a.mats, "B": b.mats}
        elif config.mode == "path":
            s, t = random_ordered_pair(n, config.d, config.box, rng)
            res = path_positivity_trial(evaluator, s, t, panels=config.panels)
            val = res.min_derivative_eig
            worst_int_err = max(worst_int_err, res.integral_error)
            ok = val >= -PASS_TOL and res.integral_error <= 1e-6
            payload = {"S": s.mats, "T": t.mats}
        else:  # pragma: no cover - guarded by TrialConfig
            raise ShapeMismatch(config.mode)

        worst = min(worst, val)
        if ok:
            passes += 1
        else:
            failures += 1
            if len(examples) < 5:
                examples.append(_example_payload(config.mode, k, float(val), payload))

    if config.mode == "path":
        stats["worst_integral_error"] = float(worst_int_err)
    stats["trials"] = config.trials
    return TrialReport(
        mode=config.mode,
        seed=config.seed,
        trials=config.trials,
        passes=passes,
        failures=failures,
        worst_violation=float(worst),
        failure_examples=examples,
        stats=stats,
    )


def _run_intermediate(config: TrialConfig) -> TrialReport:
    res = intermediate_search(budget=config.trials, seed=config.seed)
    found = res.found
    stats = {
        "mode": "intermediate",
        "budget": config.trials,
        "evaluations": res.evaluations,
        "best_violation": res.best_violation,
        "distance_from_endpoints": res.distance_from_endpoints,
        "found": found,
    }
    examples = []
    if found and res.best_candidate is not None:
        examples.append(_example_payload(
            "intermediate", 0, res.best_violation,
            {"R": tuple(res.best_candidate)}))
    return TrialReport(
        mode="intermediate",
        seed=config.seed,
        trials=1,
        passes=0 if found else 1,
        failures=1 if found else 0,
        worst_violation=float(-res.best_violation if found else 0.0),
        failure_examples=examples,
        stats=stats,
    )
