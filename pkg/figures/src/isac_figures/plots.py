"""CSV-to-image renderers for the three experiment outputs.

These are pure transforms: every plotted number is read from a CSV cell,
nothing is recomputed (the solver side already emits both linear and dB
columns). Each renderer returns the arrays it drew so callers and tests
can trace the figure back to the data. Rendering is deterministic: fixed
figure sizes, fixed fonts, Agg backend.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402
from matplotlib.colors import LogNorm  # noqa: E402

plt.rcParams.update({"font.size": 9, "figure.dpi": 110, "svg.hashsalt": "isac"})

GAIN_MATRIX_COLUMNS = ["row", "eta", "i", "k", "F_ik", "dominance_ratio"]
BEAMPATTERN_COLUMNS = ["eta", "azimuth_deg", "gain_linear", "gain_db"]
TRADEOFF_COLUMNS = [
    "architecture",
    "eta",
    "mean_rate",
    "mean_sensing_gain",
    "std_rate",
    "std_gain",
    "trials",
    "mean_sensing_gain_db",
]


class SchemaError(ValueError):
    """CSV does not match the expected experiment schema."""


@dataclass
class RenderResult:
    """What was drawn: output path plus the plotted data, per group."""

    path: Path
    groups: dict = field(default_factory=dict)
    legend_labels: list = field(default_factory=list)
    annotations: dict = field(default_factory=dict)


def read_table(path: str | Path, required: list[str]) -> tuple[list[str], list[dict]]:
    """Read a '#'-commented CSV and check the required columns exist."""
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"no such file: {path}")
    with path.open() as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.reader(lines)
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaError(f"{path} is empty") from None
    missing = [c for c in required if c not in header]
    if missing:
        raise SchemaError(f"{path} is missing column(s) {missing}")
    rows = [dict(zip(header, row)) for row in reader if row]
    if not rows:
        raise SchemaError(f"{path} has a header but no data rows")
    return header, rows


def _ordered_unique(values):
    seen = []
    for v in values:
        if v not in seen:
            seen.append(v)
    return seen


def plot_gain_matrix(csv_path: str | Path, out_image: str | Path) -> RenderResult:
    """One log-color heatmap of the beam-gain matrix per weight value."""
    _, rows = read_table(csv_path, GAIN_MATRIX_COLUMNS)
    gain_rows = [r for r in rows if r["row"] == "gain"]
    if not gain_rows:
        raise SchemaError(f"{csv_path} has no gain rows")
    etas = _ordered_unique(r["eta"] for r in gain_rows)
    panels = {}
    for eta in etas:
        sub = [r for r in gain_rows if r["eta"] == eta]
        k = max(int(r["i"]) for r in sub)
        F = np.zeros((k, k))
        for r in sub:
            F[int(r["i"]) - 1, int(r["k"]) - 1] = float(r["F_ik"])
        panels[eta] = F
    fig, axes = plt.subplots(1, len(etas), figsize=(3.2 * len(etas), 3.0), squeeze=False)
    for ax, eta in zip(axes[0], etas):
        F = panels[eta]
        positive = F[F > 0]
        floor = positive.min() if positive.size else 1e-30
        im = ax.imshow(np.maximum(F, floor), norm=LogNorm(), cmap="viridis")
        ax.set_title(f"eta = {float(eta):g}")
        ax.set_xlabel("intended user k")
        ax.set_ylabel("observing user i")
        fig.colorbar(im, ax=ax, shrink=0.85)
    fig.tight_layout()
    out = Path(out_image)
    fig.savefig(out)
    plt.close(fig)
    return RenderResult(path=out, groups=panels, legend_labels=list(etas))


def plot_beampattern(csv_path: str | Path, out_image: str | Path) -> RenderResult:
    """Beam gain in dB against azimuth, one curve per weight value."""
    _, rows = read_table(csv_path, BEAMPATTERN_COLUMNS)
    etas = _ordered_unique(r["eta"] for r in rows)
    fig, ax = plt.subplots(figsize=(5.5, 3.6))
    series = {}
    peaks = {}
    for eta in etas:
        sub = [r for r in rows if r["eta"] == eta]
        az = np.array([float(r["azimuth_deg"]) for r in sub])
        db = np.array([float(r["gain_db"]) for r in sub])
        series[eta] = np.column_stack([az, db])
        idx = int(np.argmax(db))
        peaks[eta] = (float(az[idx]), float(db[idx]))
        ax.plot(az, db, label=f"eta = {float(eta):g}")
        ax.plot(*peaks[eta], marker="v", color=ax.lines[-1].get_color())
    ax.axvline(45.0, linestyle=":", color="gray", linewidth=1)
    ax.set_xlabel("azimuth (deg)")
    ax.set_ylabel("beam gain (dB)")
    ax.legend()
    fig.tight_layout()
    out = Path(out_image)
    fig.savefig(out)
    plt.close(fig)
    return RenderResult(
        path=out, groups=series, legend_labels=list(etas), annotations=peaks
    )


def plot_tradeoff(csv_path: str | Path, out_image: str | Path) -> RenderResult:
    """Rate against sensing gain (dB), one error-barred series per architecture."""
    _, rows = read_table(csv_path, TRADEOFF_COLUMNS)
    archs = _ordered_unique(r["architecture"] for r in rows)
    fig, ax = plt.subplots(figsize=(5.5, 3.8))
    series = {}
    for arch in archs:
        sub = [r for r in rows if r["architecture"] == arch]
        gain_db = np.array([float(r["mean_sensing_gain_db"]) for r in sub])
        rate = np.array([float(r["mean_rate"]) for r in sub])
        err = np.array([float(r["std_rate"]) for r in sub])
        order = np.argsort(gain_db)
        series[arch] = np.column_stack([gain_db[order], rate[order], err[order]])
        ax.errorbar(
            gain_db[order], rate[order], yerr=err[order], marker="o",
            capsize=2, label=arch,
        )
    ax.set_xlabel("sensing beam gain (dB)")
    ax.set_ylabel("sum rate (bit/s/Hz)")
    ax.legend()
    fig.tight_layout()
    out = Path(out_image)
    fig.savefig(out)
    plt.close(fig)
    return RenderResult(path=out, groups=series, legend_labels=list(archs))
