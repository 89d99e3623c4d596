"""Render report documents to figures and delimited summaries.

Consumes the JSON reports emitted by the command-line front end and writes
PNG figures plus a flat CSV next to them.  Rendering is deterministic: the
same report document produces the same set of file names.
"""

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _from_pairs(nested) -> np.ndarray:
    """Rebuild a complex array from nested [re, im] leaves."""
    arr = np.asarray(nested, dtype=float)
    if arr.shape[-1] != 2:
        raise ValueError("complex payload leaves must be [re, im]")
    return arr[..., 0] + 1j * arr[..., 1]


def _flat_scalars(doc, prefix="") -> list:
    rows = []
    for key in sorted(doc):
        val = doc[key]
        name = f"{prefix}{key}"
        if isinstance(val, dict):
            rows.extend(_flat_scalars(val, prefix=f"{name}."))
        elif isinstance(val, (str, int, float, bool)) or val is None:
            rows.append((name, val))
        # matrices and example lists stay in the JSON; the CSV is scalars only
    return rows


def _write_csv(path: Path, doc) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["field", "value"])
        writer.writerows(_flat_scalars(doc))


def _save(fig, path: Path) -> None:
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)


def _render_fuzz(doc, outdir: Path) -> list:
    fig, ax = plt.subplots(figsize=(5, 3.2))
    counts = [doc.get("passes", 0), doc.get("failures", 0)]
    ax.bar(["pass", "fail"], counts, color=["#2a7e43", "#b3362b"])
    for x, c in enumerate(counts):
        ax.text(x, c, str(c), ha="center", va="bottom")
    ax.set_ylabel("trials")
    ax.set_title(f"mode={doc.get('mode')} seed={doc.get('seed')} "
                 f"worst={doc.get('worst_violation'):.3e}")
    path = outdir / f"fuzz_{doc.get('mode', 'run')}.png"
    _save(fig, path)
    return [path]


def _render_kernels(doc, outdir: Path) -> list:
    kernels = [np.abs(_from_pairs(k)) for k in doc["kernels"]]
    fig, axes = plt.subplots(1, len(kernels),
                             figsize=(3.4 * len(kernels), 3.2), squeeze=False)
    for r, (ax, k) in enumerate(zip(axes[0], kernels)):
        im = ax.imshow(k, cmap="viridis")
        ax.set_title(f"|kernel {r + 1}|")
        fig.colorbar(im, ax=ax, shrink=0.8)
    fig.suptitle(f"certified: min eig {doc['min_psd_eig']:.2e}, "
                 f"residual {doc['max_constraint_violation']:.2e}")
    path = outdir / "kernels.png"
    _save(fig, path)
    return [path]


def _render_refutation(doc, outdir: Path) -> list:
    k = np.asarray(doc["k_matrix"], dtype=float)
    fig, ax = plt.subplots(figsize=(4, 3.4))
    lim = float(np.abs(k).max()) or 1.0
    im = ax.imshow(k, cmap="coolwarm", vmin=-lim, vmax=lim)
    fig.colorbar(im, ax=ax, shrink=0.8)
    ax.set_title(f"separating matrix, witness eig {doc['witness_min_eig']:.3e}")
    path = outdir / "witness.png"
    _save(fig, path)
    return [path]


def _render_values(doc, outdir: Path) -> list:
    vals = _from_pairs(doc["values"])
    fig, ax = plt.subplots(figsize=(4.4, 3.6))
    ax.axhline(0.0, color="0.6", lw=0.8)
    ax.scatter(vals.real, vals.imag, s=22, c=np.arange(vals.size),
               cmap="plasma")
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    ax.set_title(f"{doc.get('kind')} values at {vals.size} points")
    path = outdir / "values.png"
    _save(fig, path)
    return [path]


def _render_residuals(doc, outdir: Path) -> list:
    names = ["synthesis", "equivalence"]
    vals = [max(doc["synthesis_residual"], 1e-18),
            max(doc["equivalence_residual"], 1e-18)]
    fig, ax = plt.subplots(figsize=(4, 3.2))
    ax.bar(names, vals, color="#40618f")
    ax.set_yscale("log")
    ax.set_ylabel("residual")
    ax.set_title("synthesized realization residuals")
    path = outdir / "residuals.png"
    _save(fig, path)
    return [path]


def _render_scalars(doc, outdir: Path, stem: str) -> list:
    rows = _flat_scalars(doc)
    numeric = [(k, v) for k, v in rows if isinstance(v, (int, float))
               and not isinstance(v, bool)]
    fig, ax = plt.subplots(figsize=(5, 0.5 + 0.4 * max(len(numeric), 1)))
    ax.axis("off")
    lines = [f"{k} = {v:.6g}" for k, v in numeric] or ["(no numeric fields)"]
    ax.text(0.02, 0.98, "\n".join(lines), va="top", family="monospace")
    path = outdir / f"{stem}.png"
    _save(fig, path)
    return [path]


def render_report(doc, outdir) -> list:
    """Write figures and a CSV for a report document; returns the paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    files = []

    if isinstance(doc, dict) and "mode" in doc and "passes" in doc:
        files.extend(_render_fuzz(doc, outdir))
    elif isinstance(doc, dict) and doc.get("outcome") == "certified":
        files.extend(_render_kernels(doc, outdir))
    elif isinstance(doc, dict) and doc.get("outcome") == "refuted":
        files.extend(_render_refutation(doc, outdir))
    elif isinstance(doc, dict) and doc.get("outcome") in ("evaluated", "violation") \
            and "values" in doc:
        files.extend(_render_values(doc, outdir))
    elif isinstance(doc, dict) and doc.get("outcome") == "synthesized":
        files.extend(_render_residuals(doc, outdir))
    elif isinstance(doc, dict):
        files.extend(_render_scalars(doc, outdir, "summary"))
    else:
        raise ValueError("report document must be a JSON object")

    csv_path = outdir / "summary.csv"
    _write_csv(csv_path, doc)
    files.append(csv_path)
    return files
