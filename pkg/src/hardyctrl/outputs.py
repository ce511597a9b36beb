"""File outputs: report JSON, CSV series, SVG plots and a hashed manifest.

All artifacts are plain text with stable field and column order, so reruns
with identical inputs are byte-identical and diffable.  The only inherently
volatile report content is the wall-time block; the manifest therefore also
records a content hash of the report with that block removed, which is the
hash a determinism check should compare.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
from typing import Optional

import numpy as np

from .pipeline import PipelineArtifacts, SynthesisReport


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def report_content_hash(report_dict: dict) -> str:
    """Hash of the report content with the volatile wall-time block removed."""
    stripped = {k: v for k, v in report_dict.items() if k != "wall_times_s"}
    blob = json.dumps(stripped, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def _write_csv(path: str, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) for v in row])


def _save_svg(fig, path: str) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None})


def _plot_frequency(freq, path: str) -> None:
    import matplotlib
    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "hardyctrl"
    import matplotlib.pyplot as plt
    fig, ax = plt.subplots(figsize=(6, 4))
    pos = freq.omegas > 0
    ax.loglog(freq.omegas[pos], freq.gains[pos], lw=1.2)
    ax.axhline(freq.peak_gain, color="tab:red", ls="--", lw=0.8,
               label=f"peak {freq.peak_gain:.4g}")
    ax.set_xlabel("frequency (rad/time)")
    ax.set_ylabel("gain")
    ax.legend(loc="best")
    fig.tight_layout()
    _save_svg(fig, path)
    plt.close(fig)


def _plot_decay(trajectories: dict, path: str) -> None:
    import matplotlib
    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "hardyctrl"
    import matplotlib.pyplot as plt
    fig, ax = plt.subplots(figsize=(6, 4))
    for name, traj in sorted(trajectories.items()):
        norms = np.sqrt(np.einsum("it,i,it->t", traj.states, traj.space_weights, traj.states))
        ax.semilogy(traj.times, np.maximum(norms, 1e-300), lw=1.0, label=name)
    ax.set_xlabel("time")
    ax.set_ylabel("state norm")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    _save_svg(fig, path)
    plt.close(fig)


def _plot_kernel(kernel_field, path: str) -> None:
    import matplotlib
    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "hardyctrl"
    import matplotlib.pyplot as plt
    fig, ax = plt.subplots(figsize=(5, 4))
    im = ax.imshow(kernel_field.values, origin="lower", cmap="viridis")
    fig.colorbar(im, ax=ax, label="kernel value")
    ax.set_xlabel("second variable index")
    ax.set_ylabel("first variable index")
    fig.tight_layout()
    _save_svg(fig, path)
    plt.close(fig)


def emit_outputs(report: SynthesisReport, artifacts: Optional[PipelineArtifacts],
                 out_dir: str) -> dict:
    """Write all artifacts and return the manifest (path -> sha256).

    Writes ``report.json`` always; frequency/trajectory CSVs and the three
    SVG plots only when the corresponding artifacts exist.  The manifest is
    itself written as ``manifest.json`` (not listed inside itself).
    """
    os.makedirs(out_dir, exist_ok=True)
    files = {}

    report_dict = report.to_dict()
    report_path = os.path.join(out_dir, "report.json")
    with open(report_path, "w", encoding="utf-8") as fh:
        json.dump(report_dict, fh, indent=2, sort_keys=True)
        fh.write("\n")
    files["report.json"] = _sha256(report_path)

    if artifacts is not None and artifacts.frequency_response is not None:
        freq = artifacts.frequency_response
        path = os.path.join(out_dir, "frequency_response.csv")
        _write_csv(path, ["omega", "gain"], zip(freq.omegas, freq.gains))
        files["frequency_response.csv"] = _sha256(path)
        svg = os.path.join(out_dir, "frequency_response.svg")
        _plot_frequency(freq, svg)
        files["frequency_response.svg"] = _sha256(svg)

    if artifacts is not None and artifacts.trajectories:
        for name, traj in sorted(artifacts.trajectories.items()):
            path = os.path.join(out_dir, f"trajectory_{name}.csv")
            norms = np.sqrt(np.einsum("it,i,it->t", traj.states, traj.space_weights, traj.states))
            _write_csv(path,
                       ["t", "state_norm", "energy_z", "energy_w", "energy_y"],
                       zip(traj.times, norms, traj.energy_z, traj.energy_w, traj.energy_y))
            files[f"trajectory_{name}.csv"] = _sha256(path)
        svg = os.path.join(out_dir, "decay_curves.svg")
        _plot_decay(artifacts.trajectories, svg)
        files["decay_curves.svg"] = _sha256(svg)

    if artifacts is not None and artifacts.kernel_field is not None:
        svg = os.path.join(out_dir, "kernel_heatmap.svg")
        _plot_kernel(artifacts.kernel_field, svg)
        files["kernel_heatmap.svg"] = _sha256(svg)

    manifest = {
        "files": files,
        "report_content_sha256": report_content_hash(report_dict),
    }
    manifest_path = os.path.join(out_dir, "manifest.json")
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest
