"""Batch command-line front end.

Subcommands dispatch to certification, realization evaluation, synthesis,
and the randomized trial harness, reading and writing the canonical JSON
formats from the serialize module.  Exit codes are part of the contract:

    0   certified / all trials pass
    2   refuted or violation found (witness serialized in the report)
    3   inconclusive
    1   usage, input, or runtime error

A report document is always produced on exit codes 0, 2, and 3: written to
--out when given, printed to standard output otherwise.
"""

import argparse
import sys
from dataclasses import replace

import numpy as np

from .errors import (
    LoewnerError,
    NotUnitary,
    RealityViolation,
    SchemaError,
    TauTooCloseToSpectrum,
)
from .linalg import DEFAULT_TOL
from .certify import Inconclusive, LoewnerCertificate, Refutation, certify
from .harness import MODES, TrialConfig, TrialReport, run_fuzz
from .realize import (
    CauchyRealization,
    SelfAdjointRealization,
    TransferRealization,
    _upper_probe_points,
    bpoint_sum,
    eval_cauchy,
    eval_selfadjoint,
    from_discrete_measure,
    herglotz_eval,
    mobius_beta,
    mu_resolvent_norm,
    reduce_to_cauchy,
    synthesize_selfadjoint,
    transfer_eval,
)
from .serialize import (
    _array,
    _c,
    _cmat,
    _complex_vector,
    _cvec,
    _obj,
    canonical_dumps,
    doc_to_measure,
    doc_to_realization,
    load_realization,
    load_sampled_function,
    read_json,
    realization_to_doc,
    write_json,
)

_EVAL_PROBES = 20


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="loewner",
        description="Certify matrix monotonicity, evaluate and synthesize "
                    "realizations, and fuzz the monotonicity theorems.")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_common(p, inputs=True):
        if inputs:
            p.add_argument("--input", action="append", default=[],
                           help="input JSON path (repeatable)")
        p.add_argument("--out", help="output path for the report JSON")
        p.add_argument("--tol", type=float,
                       help="override the residual/pass tolerance")

    p = sub.add_parser("certify", help="decide kernel feasibility for sampled data")
    add_common(p)
    p.add_argument("--max-iter", type=int, help="projection iteration cap")

    p = sub.add_parser("eval", help="evaluate a realization; check positivity")
    add_common(p)
    p.add_argument("--trials", type=int, default=0,
                   help="number of probe points (default 20)")

    p = sub.add_parser("synth", help="synthesize a self-adjoint realization "
                                     "from a transfer realization")
    add_common(p)

    p = sub.add_parser("fuzz", help="randomized monotonicity trials")
    add_common(p, inputs=False)
    p.add_argument("--mode", choices=MODES, default="global")
    p.add_argument("--seed", type=int, help="PRNG seed (required)")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--s", type=float, default=0.5,
                   help="exponent for geomean mode")
    p.add_argument("--box", help='coordinate box "a1,b1;a2,b2"')
    p.add_argument("--panels", type=int, default=64,
                   help="integration panels for path mode")

    p = sub.add_parser("report", help="render a report JSON to figures and CSV")
    p.add_argument("--input", action="append", default=[],
                   help="report JSON path")
    p.add_argument("--out", help="output directory for figures (default .)")

    return parser


def _require_inputs(args, count: int, usage: str):
    if len(args.input) < count:
        raise SchemaError("", usage)


def _parse_box(text: str):
    out = []
    for part in text.split(";"):
        pieces = part.split(",")
        if len(pieces) != 2:
            raise SchemaError("", f"bad box interval {part!r}, expected \"a,b\"")
        try:
            lo, hi = float(pieces[0]), float(pieces[1])
        except ValueError:
            raise SchemaError("", f"bad box interval {part!r}") from None
        if not lo < hi:
            raise SchemaError("", f"empty box interval {part!r}")
        out.append((lo, hi))
    return tuple(out)


# ---------------------------------------------------------------------------
# Subcommand handlers.  Each returns (exit_code, report_doc).

def _real_rows(m) -> list:
    return [[float(x) for x in row] for row in np.asarray(m, dtype=float)]


def _cmd_certify(args):
    _require_inputs(args, 1, "certify needs --input sampled_function.json")
    sf = load_sampled_function(args.input[0])
    tol = DEFAULT_TOL
    if args.tol is not None:
        tol = replace(tol, residual=args.tol)
    if args.max_iter is not None:
        tol = replace(tol, max_iter=args.max_iter)
    res = certify(sf, tol)

    if isinstance(res, LoewnerCertificate):
        doc = {
            "outcome": "certified",
            "iterations": res.iterations,
            "min_psd_eig": float(res.min_psd_eig),
            "max_constraint_violation": float(res.max_constraint_violation),
            "kernels": [_cmat(k) for k in res.kernels],
        }
        return 0, doc
    if isinstance(res, Refutation):
        doc = {
            "outcome": "refuted",
            "iterations": res.iterations,
            "witness_min_eig": float(res.witness_min_eig),
            "raw_min_eig": float(res.raw_min_eig),
            "k_matrix": _real_rows(res.k_matrix),
            "witness": None if res.witness is None
            else [_cmat(m) for m in res.witness.mats],
        }
        return 2, doc
    assert isinstance(res, Inconclusive)
    doc = {
        "outcome": "inconclusive",
        "iterations": res.iterations,
        "final_distance": float(res.final_distance),
        "max_constraint_violation": float(res.max_constraint_violation),
        "min_psd_eig": float(res.min_psd_eig),
    }
    return 3, doc


def _load_points(path, d: int) -> np.ndarray:
    doc = read_json(path)
    _obj(doc, "", ("points",))
    raw = _array(doc["points"], "/points", min_len=1)
    return np.stack([
        _complex_vector(p, f"/points/{k}", length=d) for k, p in enumerate(raw)
    ])


def _eval_measure(dm, count: int, tol: float):
    if dm.support == "circle":
        rng = np.random.Generator(np.random.Philox(key=0xD15C))
        radii = np.sqrt(rng.random(count)) * 0.95
        pts = radii * np.exp(2j * np.pi * rng.random(count))
        vals = np.array([herglotz_eval(dm, lam) for lam in pts])
        defect = float(-np.min(vals.real))
        bs = bpoint_sum(dm, 1.0)
        extra = {
            "kind": "circle_measure",
            "positivity_defect": defect,
            "boundary_sum_at_one": None if bs.atom_at_tau else bs.value,
            "atom_at_one": bs.atom_at_tau,
        }
    else:
        cr = from_discrete_measure(dm)
        pts = _upper_probe_points(1, count)
        vals = np.array([eval_cauchy(cr, z) for z in pts])
        defect = float(-np.min(vals.imag))
        extra = {"kind": "line_measure", "positivity_defect": defect}
    violated = defect > tol
    doc = {
        "outcome": "violation" if violated else "evaluated",
        "points": [_c(p) for p in pts] if dm.support == "circle"
        else [_cvec(p) for p in pts],
        "values": [_c(v) for v in vals],
    }
    doc.update(extra)
    return (2 if violated else 0), doc


def _cmd_eval(args):
    _require_inputs(args, 1, "eval needs --input realization.json [--input points.json]")
    count = args.trials if args.trials else _EVAL_PROBES
    tol = args.tol if args.tol is not None else 1e-8

    head = read_json(args.input[0])
    if isinstance(head, dict) and "support" in head:
        return _eval_measure(doc_to_measure(head), count, tol)

    r = doc_to_realization(head)
    d = r.grading.d

    if isinstance(r, TransferRealization):
        if len(args.input) > 1:
            pts = _load_points(args.input[1], d)
        else:
            pts = mobius_beta(_upper_probe_points(d, count))
        vals = np.array([transfer_eval(r, lam) for lam in pts])
        defect = float(np.max(np.abs(vals)) - 1.0)
        violated = defect > tol
        doc_extra = {"kind": "transfer", "contraction_defect": defect}
    else:
        if len(args.input) > 1:
            pts = _load_points(args.input[1], d)
        else:
            pts = _upper_probe_points(d, count)
        if isinstance(r, SelfAdjointRealization):
            vals = np.array([eval_selfadjoint(r, z) for z in pts])
            kind = "selfadjoint"
        else:
            vals = np.array([eval_cauchy(r, z) for z in pts])
            kind = "cauchy"
        defect = float(-np.min(vals.imag))
        # the graded resolvent obeys the 1/min|Im z| bound; report the margin
        margins = []
        for z in pts:
            if np.all(z.imag > 0) or np.all(z.imag < 0):
                bound = 1.0 / float(np.min(np.abs(z.imag)))
                margins.append(mu_resolvent_norm(r.x, r.grading, z) - bound)
        res_margin = float(max(margins)) if margins else None
        violated = defect > tol or (res_margin is not None and res_margin > 1e-9)
        doc_extra = {
            "kind": kind,
            "positivity_defect": defect,
            "resolvent_bound_margin": res_margin,
        }

    doc = {
        "outcome": "violation" if violated else "evaluated",
        "points": [_cvec(p) for p in pts],
        "values": [_c(v) for v in vals],
    }
    doc.update(doc_extra)
    return (2 if violated else 0), doc


def _cmd_synth(args):
    _require_inputs(args, 1, "synth needs --input transfer.json")
    tr = load_realization(args.input[0])
    if not isinstance(tr, TransferRealization):
        raise SchemaError("/kind", "synth needs a transfer realization")
    z0 = np.full(tr.grading.d, 1j)
    try:
        sr = synthesize_selfadjoint(tr, z0)
        cr = reduce_to_cauchy(sr)
    except (RealityViolation, TauTooCloseToSpectrum, NotUnitary) as exc:
        doc = {"outcome": "violation", "detail": str(exc)}
        return 2, doc
    doc = {
        "outcome": "synthesized",
        "selfadjoint": realization_to_doc(sr),
        "cauchy": realization_to_doc(cr),
        "synthesis_residual": float(sr.synthesis_residual),
        "equivalence_residual": float(cr.equivalence_residual),
    }
    return 0, doc


_MODE_BOX = {
    "local": ((0.5, 2.0), (0.5, 2.0)),
    "geomean": ((0.5, 2.0), (0.5, 2.0)),
}
_DEFAULT_BOX = ((-0.4, 0.4), (-0.4, 0.4))


def report_to_doc(rep: TrialReport) -> dict:
    return {
        "mode": rep.mode,
        "seed": rep.seed,
        "trials": rep.trials,
        "passes": rep.passes,
        "failures": rep.failures,
        "worst_violation": float(rep.worst_violation),
        "failure_examples": rep.failure_examples,
        "stats": rep.stats,
    }


def _cmd_fuzz(args):
    if args.seed is None:
        raise SchemaError("", "--seed is required in fuzz mode")
    box = _parse_box(args.box) if args.box else _MODE_BOX.get(args.mode, _DEFAULT_BOX)
    tol = DEFAULT_TOL
    if args.tol is not None:
        tol = replace(tol, residual=args.tol)
    config = TrialConfig(
        seed=args.seed,
        trials=args.trials,
        d=len(box),
        box=box,
        mode=args.mode,
        s_exponent=args.s,
        panels=args.panels,
        tol=tol,
    )
    rep = run_fuzz(config)
    return (0 if rep.failures == 0 else 2), report_to_doc(rep)


def _cmd_report(args):
    _require_inputs(args, 1, "report needs --input report.json")
    doc = read_json(args.input[0])
    outdir = args.out if args.out else "."
    from .plots import render_report
    files = render_report(doc, outdir)
    manifest = {"outcome": "rendered", "files": [str(p) for p in files]}
    return 0, manifest


_HANDLERS = {
    "certify": _cmd_certify,
    "eval": _cmd_eval,
    "synth": _cmd_synth,
    "fuzz": _cmd_fuzz,
    "report": _cmd_report,
}


def run(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if (exc.code or 0) == 0 else 1

    try:
        code, doc = _HANDLERS[args.subcommand](args)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except LoewnerError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    # the report subcommand writes its artifacts itself; --out is a directory
    if args.subcommand == "report" or not args.out:
        print(canonical_dumps(doc))
    else:
        write_json(args.out, doc)
    return code


def main() -> None:
    sys.exit(run(sys.argv[1:]))
