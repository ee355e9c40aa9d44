"""Matplotlib rendering of report artifacts to image files.

Import this module only on the report path: it selects the Agg backend so
figure writing works in headless runs.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["render_figures"]

_FIGSIZE = (7.0, 4.4)
_DPI = 150


def _new_axes(xlabel: str, ylabel: str):
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(alpha=0.4)
    return fig, ax


def _save(fig, path: Path) -> str:
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return str(path)


def _plot_curves(path: Path, x, curves: dict[str, np.ndarray], ylabel: str) -> str:
    fig, ax = _new_axes("x", ylabel)
    for label, vals in curves.items():
        vals = np.asarray(vals, dtype=float)
        ax.plot(x, vals, label=label, linewidth=1.2)
    ax.legend()
    return _save(fig, path)


def _plot_spectrum(path: Path, spectra: dict[str, np.ndarray]) -> str:
    fig, ax = _new_axes("level index", "energy")
    markers = ["o", "s", "^", "d"]
    for (label, eigs), marker in zip(spectra.items(), markers):
        eigs = np.asarray(eigs, dtype=float)
        ax.plot(range(len(eigs)), eigs, marker, mfc="none", label=label)
    ax.legend()
    return _save(fig, path)


def _plot_invariants(path: Path, invariants: list[dict]) -> str:
    names = [inv["name"] for inv in invariants]
    values = [max(abs(inv["value"]), 1e-18) for inv in invariants]
    tols = [inv["tolerance"] for inv in invariants]
    fig, ax = plt.subplots(figsize=(7.0, 0.5 + 0.45 * len(names)))
    pos = np.arange(len(names))
    ax.barh(pos, values, color=["tab:green" if inv["passed"] else "tab:red" for inv in invariants])
    ax.plot(tols, pos, "k|", markersize=14, label="tolerance")
    ax.set_yticks(pos, names)
    ax.set_xscale("log")
    ax.set_xlabel("measured value")
    ax.invert_yaxis()
    ax.legend(loc="lower right")
    return _save(fig, path)


def render_figures(outdir: str | Path, artifacts: dict) -> list[str]:
    """Render the standard figure set for one command run.

    ``artifacts`` carries column arrays keyed like the JSON report:
    potentials and modes become overlay plots, spectra a level diagram,
    invariants a bar chart.  Returns the written paths.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written: list[str] = []
    x = artifacts.get("x")
    potentials = artifacts.get("potentials") or {}
    if x is not None and potentials:
        written.append(
            _plot_curves(outdir / "potentials.png", x, potentials, "V(x)")
        )
    modes = artifacts.get("modes") or {}
    if x is not None and modes:
        written.append(_plot_curves(outdir / "modes.png", x, modes, "amplitude"))
    spectra = artifacts.get("spectra") or {}
    if spectra:
        written.append(_plot_spectrum(outdir / "spectrum.png", spectra))
    invariants = artifacts.get("invariants") or []
    if invariants:
        written.append(_plot_invariants(outdir / "invariants.png", invariants))
    return written
