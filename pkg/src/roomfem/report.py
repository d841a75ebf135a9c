"""Render mesh-quality and solution figures to files, with CSV summaries."""

import csv
import logging
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .fem import SolutionField
from .meshgen import TetMesh, dihedral_angles, mesh_quality, radius_edge_ratios, tet_volumes

logger = logging.getLogger(__name__)


def value_color(t: float) -> tuple[float, float, float]:
    """Blue-to-red ramp through green used for solution values, t in [0, 1]."""
    t = min(max(float(t), 0.0), 1.0)
    if t < 0.5:
        return (0.0, 2.0 * t, 1.0 - 2.0 * t)
    return (2.0 * t - 1.0, 2.0 - 2.0 * t, 0.0)


def _write_csv(path: Path, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerows(rows)


def _hist(ax, data, bins, color):
    """Histogram that survives (near-)constant data.

    numpy refuses to split a range narrower than float spacing into many
    bins, which happens for perfectly uniform meshes; fall back to a
    single padded bin in that case.
    """
    lo, hi = float(np.min(data)), float(np.max(data))
    if hi - lo <= max(abs(lo), abs(hi), 1.0) * 1e-9:
        pad = max(abs(lo), 1.0) * 1e-3
        ax.hist(data, bins=1, range=(lo - pad, hi + pad), color=color)
    else:
        ax.hist(data, bins=bins, color=color)


def mesh_report(mesh: TetMesh, outdir) -> list[Path]:
    """Write mesh_quality.png and mesh_summary.csv into ``outdir``."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    quality = mesh_quality(mesh)
    angles = dihedral_angles(mesh).ravel()
    aspects = radius_edge_ratios(mesh)
    vols = tet_volumes(mesh)

    fig, axes = plt.subplots(1, 3, figsize=(12, 3.4))
    _hist(axes[0], angles, 36, "#4878cf")
    axes[0].set_xlabel("dihedral angle [deg]")
    axes[0].set_title("dihedral angles")
    _hist(axes[1], aspects, 24, "#6acc65")
    axes[1].set_xlabel("circumradius / min edge")
    axes[1].set_title("radius-edge ratio")
    _hist(axes[2], vols, 24, "#d65f5f")
    axes[2].set_xlabel("volume [m^3]")
    axes[2].set_title("tet volumes")
    fig.suptitle(f"{mesh.num_tets} tets, {mesh.num_vertices} vertices")
    fig.tight_layout()
    fig_path = outdir / "mesh_quality.png"
    fig.savefig(fig_path, dpi=110)
    plt.close(fig)

    csv_path = outdir / "mesh_summary.csv"
    rows = [["metric", "value"]] + [[k, v] for k, v in quality.as_dict().items()]
    _write_csv(csv_path, rows)
    logger.info("mesh report written to %s", outdir)
    return [fig_path, csv_path]


def solution_report(mesh: TetMesh, field: SolutionField, outdir) -> list[Path]:
    """Write solution_overview.png and solution_summary.csv into ``outdir``.

    The plan view mirrors the interactive display: one marker per mesh
    vertex, colored blue (minimum) through green to red (maximum) and
    sized by the normalized value.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    values = np.asarray(field.values, dtype=float)
    span = field.max - field.min
    normalized = (values - field.min) / span if span > 0 else np.zeros_like(values)
    colors = [value_color(t) for t in normalized]

    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    _hist(axes[0], values, 32, "#4878cf")
    axes[0].set_xlabel("solution value")
    axes[0].set_title("value distribution")
    axes[1].scatter(mesh.vertices[:, 0], mesh.vertices[:, 1],
                    c=colors, s=8 + 60 * normalized, edgecolors="none")
    axes[1].set_aspect("equal")
    axes[1].set_xlabel("x [m]")
    axes[1].set_ylabel("y [m]")
    axes[1].set_title("plan view (marker size ~ value)")
    fig.tight_layout()
    fig_path = outdir / "solution_overview.png"
    fig.savefig(fig_path, dpi=110)
    plt.close(fig)

    csv_path = outdir / "solution_summary.csv"
    rows = [
        ["metric", "value"],
        ["min", field.min],
        ["max", field.max],
        ["mean", float(values.mean())],
        ["median", float(np.median(values))],
        ["vertices", len(values)],
    ]
    _write_csv(csv_path, rows)
    logger.info("solution report written to %s", outdir)
    return [fig_path, csv_path]
