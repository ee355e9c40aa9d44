"""Workflow orchestration and report assembly for the command-line front end.

Each command produces one report dictionary with a fixed six-key schema
(config, spectra, potentials, modes, invariants, warnings); arrays are
column-oriented lists.  JSON output uses the shortest round-trip decimal for
floats, CSV output carries 17 significant digits, and both are byte-stable
across runs once timestamps are suppressed.
"""

from __future__ import annotations

import json
import warnings as _warnings
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import family, riccati, solver, susy
from .solver import ZeroMode
from .catalog import PotentialSpec, build_potential, default_grid, write_table
from .errors import SingularParameterError
from .grids import (
    Grid1D,
    GridFunction,
    common_window,
    derivative,
    integrate,
    second_derivative,
    window_l2,
)

__all__ = ["RunConfig", "prepare_problem", "run_solve", "run_deform", "run_chain", "run_verify", "emit_report"]

#: Deformation parameters exercised by the verify command's spectral sweep.
REFACTOR_LAMBDAS = (-2.0, 0.3, 7.0)


@dataclass(frozen=True)
class RunConfig:
    """Everything one command run depends on."""

    potential: PotentialSpec
    grid: tuple[float, float, int] | None = None
    k: int = 6
    lambdas: tuple[float, ...] = ()
    integral_origin: str = "left"
    output_format: str = "json"
    output_path: str | None = None
    figures_dir: str | None = None
    timestamp: bool = True

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("need k >= 1 eigenvalues")
        if self.grid is not None:
            n = self.grid[2]
            if n < 3 or n % 2 == 0:
                raise ValueError("grid point count must be odd and >= 3")
        if self.integral_origin not in ("left", "mid"):
            raise ValueError(f"unknown integral origin {self.integral_origin!r}")
        if self.output_format not in ("json", "csv"):
            raise ValueError(f"unknown output format {self.output_format!r}")
        if not all(np.isfinite(self.lambdas)):
            raise ValueError("deformation parameters must be finite")


@dataclass
class PreparedProblem:
    """Shared pipeline state: potential, ground mode, factorization."""

    config: RunConfig
    grid: Grid1D
    v_input: GridFunction
    u: ZeroMode
    v_shifted: GridFunction
    superpotential: susy.Superpotential
    pair: susy.PartnerPair
    v_plus_full: GridFunction
    warnings: list[str] = field(default_factory=list)


def prepare_problem(config: RunConfig) -> PreparedProblem:
    """Build the potential, solve for the ground mode, factorize."""
    with _warnings.catch_warnings(record=True) as caught:
        _warnings.simplefilter("always")
        if config.grid is not None:
            grid = Grid1D(*config.grid)
            v_input = build_potential(config.potential, grid)
        else:
            v_input = build_potential(config.potential)
            grid = v_input.grid
        u, v_shifted = solver.ground_state(v_input)
        s = susy.superpotential_from_mode(u)
        pair = susy.partner_potential(s)
        v_plus_full = susy.partner_potential_full(pair, v_shifted)
    messages = []
    for w in caught:
        msg = str(w.message)
        if msg not in messages:
            messages.append(msg)
    return PreparedProblem(
        config, grid, v_input, u, v_shifted, s, pair, v_plus_full, messages
    )


def _columns(arr: np.ndarray) -> list:
    return [float(v) if np.isfinite(v) else None for v in np.asarray(arr, dtype=float)]


def _spectrum_dict(report: solver.SpectrumReport) -> dict:
    return {
        "eigenvalues": _columns(report.eigenvalues),
        "residual_norms": _columns(report.residual_norms),
        "ground_energy_shift": report.ground_energy_shift,
    }


def _comparison_dict(cmp: solver.IsospectralComparison) -> dict:
    return {
        "mode": "partner" if cmp.partner_mode else "strict",
        "eigenvalues_a": _columns(cmp.eigenvalues_a),
        "eigenvalues_b": _columns(cmp.eigenvalues_b),
        "differences": _columns(cmp.differences),
        "max_abs_difference": cmp.max_abs_difference,
    }


def _invariant(name: str, value: float, tolerance: float) -> dict:
    value = float(value)
    return {
        "name": name,
        "value": value,
        "tolerance": tolerance,
        "passed": bool(abs(value) <= tolerance),
    }


def _base_report(problem: PreparedProblem, command: str) -> dict:
    cfg = problem.config
    config = {
        "command": command,
        "potential": {
            "kind": cfg.potential.kind,
            "name": cfg.potential.catalog_name,
            "params": dict(cfg.potential.params),
            "table_path": cfg.potential.table_path,
        },
        "grid": {
            "x_min": problem.grid.x_min,
            "x_max": problem.grid.x_max,
            "n": problem.grid.n,
            "h": problem.grid.h,
        },
        "k": cfg.k,
        "lambdas": list(cfg.lambdas),
        "integral_origin": cfg.integral_origin,
        "ground_energy_shift": problem.u.energy_shift,
    }
    if cfg.timestamp:
        config["generated_at"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return {
        "config": config,
        "spectra": {},
        "potentials": {"x": _columns(problem.grid.x)},
        "modes": {},
        "invariants": [],
        "warnings": list(problem.warnings),
    }


def _smooth_probe(problem: PreparedProblem) -> GridFunction:
    """Gaussian bump supported well inside the trusted window."""
    lo, hi = problem.superpotential.trusted_window
    x = problem.grid.x
    center = 0.5 * (x[lo] + x[hi - 1])
    width = (x[hi - 1] - x[lo]) / 10.0
    return GridFunction(problem.grid, np.exp(-(((x - center) / width) ** 2)))


def _hamiltonian_apply(v: GridFunction, f: GridFunction) -> GridFunction:
    curv = second_derivative(f)
    lo, hi = f.bounds
    vals = np.full(f.grid.n, np.nan)
    vals[lo:hi] = -curv.values[lo:hi] + v.values[lo:hi] * f.values[lo:hi]
    return GridFunction(f.grid, vals, window=f.window)


def _relative_window_diff(a: GridFunction, b: GridFunction, margin: int = 3) -> float:
    lo, hi = common_window(a, b)
    lo, hi = lo + margin, hi - margin
    diff = a.values[lo:hi] - b.values[lo:hi]
    scale = max(float(np.max(np.abs(b.values[lo:hi]))), np.finfo(float).tiny)
    return float(np.max(np.abs(diff)) / scale)


def intertwining_residual(problem: PreparedProblem, f: GridFunction, margin: int = 3) -> float:
    """Relative commutation defect of the first-order intertwiner on ``f``."""
    t1f = susy.apply_T1(problem.u, f)
    left = _hamiltonian_apply(problem.v_plus_full, t1f)
    hf = _hamiltonian_apply(problem.v_shifted, f)
    right = susy.apply_T1(problem.u, hf)
    lo, hi = common_window(left, right)
    lo, hi = lo + margin, hi - margin
    resid = left.values[lo:hi] - right.values[lo:hi]
    scale = max(window_l2(t1f), np.finfo(float).tiny)
    return float(np.sqrt(np.trapezoid(resid**2, dx=f.grid.h))) / scale


def mapping_residuals(problem: PreparedProblem, lam: float) -> tuple[float, float]:
    """Relative defects of the two deformed intertwining maps at ``lam``."""
    origin = problem.config.integral_origin
    raw, _unit = family.psi_lambda(problem.u, lam, origin)
    phi = susy.fermionic_zero_mode(problem.u, lam, origin)
    t_minus = susy.apply_T_minus_lambda(raw, phi)
    lo, hi = common_window(t_minus, phi)
    h = problem.grid.h
    d1 = t_minus.values[lo:hi] - raw.psi.values[lo:hi]
    n1 = np.sqrt(np.trapezoid(d1**2, dx=h)) / np.sqrt(
        np.trapezoid(raw.psi.values[lo:hi] ** 2, dx=h)
    )
    t_plus = susy.apply_T_plus_lambda(raw, raw.psi)
    lo, hi = common_window(t_plus, phi)
    d2 = t_plus.values[lo:hi] - phi.values[lo:hi]
    n2 = np.sqrt(np.trapezoid(d2**2, dx=h)) / np.sqrt(
        np.trapezoid(phi.values[lo:hi] ** 2, dx=h)
    )
    return float(n1), float(n2)


def refactorization_spread(problem: PreparedProblem, lambdas=REFACTOR_LAMBDAS) -> float:
    """Max pairwise deviation of potentials rebuilt from general zero modes.

    Every general zero mode ``lam_s * u + v`` reproduces the same potential
    through ``phi''/phi``.  The comparison runs over the well core (mode
    amplitude above 5% of peak) and skips points where ``phi`` nearly cancels
    between its two terms, since the quotient loses accuracy near a node.
    """
    from .grids import _stencil_d2

    u = problem.u
    v_sol = susy.second_solution_minus(u)
    clo, chi = susy.trusted_window(u.psi.values, 5e-2)
    vlo, vhi = v_sol.bounds
    clo, chi = max(clo, vlo), min(chi, vhi)
    h = problem.grid.h
    recons, guards = [], []
    for lam_s in lambdas:
        phi = lam_s * u.psi.values[clo:chi] + v_sol.values[clo:chi]
        recon = _stencil_d2(phi, h) / phi
        scale = np.abs(lam_s * u.psi.values[clo:chi]) + np.abs(v_sol.values[clo:chi])
        guard = np.abs(phi) >= 0.05 * scale
        guard[:3] = guard[-3:] = False  # one-sided stencil rows
        recons.append(recon)
        guards.append(guard)
    worst = 0.0
    for i in range(len(recons)):
        for j in range(i + 1, len(recons)):
            both = guards[i] & guards[j]
            if not np.any(both):
                continue
            diff = float(np.max(np.abs(recons[i][both] - recons[j][both])))
            worst = max(worst, diff)
    return worst


def run_solve(problem: PreparedProblem) -> dict:
    """Factorize and report both spectra with the partner-ladder comparison."""
    cfg = problem.config
    report = _base_report(problem, "solve")
    rep_minus, _ = solver.lowest_eigenpairs(
        solver.build_hamiltonian(problem.v_shifted), cfg.k
    )
    rep_minus = solver.SpectrumReport(
        rep_minus.eigenvalues,
        rep_minus.k,
        rep_minus.residual_norms,
        problem.u.energy_shift,
    )
    rep_plus, _ = solver.lowest_eigenpairs(
        solver.build_hamiltonian(problem.v_plus_full), cfg.k
    )
    ladder = solver.verify_isospectral(
        problem.v_shifted, problem.v_plus_full, cfg.k, skip_ground_of_a=True
    )
    report["spectra"] = {
        "v_minus": _spectrum_dict(rep_minus),
        "v_plus": _spectrum_dict(rep_plus),
        "comparison": _comparison_dict(ladder),
    }
    report["potentials"].update(
        {
            "v_input": _columns(problem.v_input.values),
            "v_minus_shifted": _columns(problem.v_shifted.values),
            "v_plus": _columns(problem.v_plus_full.values),
        }
    )
    report["modes"]["u"] = _columns(problem.u.psi.values)
    au = susy.apply_A(problem.superpotential, problem.u.psi)
    report["invariants"] = [
        _invariant(
            "annihilation", window_l2(au) / window_l2(problem.u.psi, au.window), 1e-6
        ),
        _invariant("partner_ladder", ladder.max_abs_difference, 5e-3),
    ]
    return report


def run_deform(problem: PreparedProblem) -> dict:
    """One-parameter deformation with a direct isospectrality check."""
    cfg = problem.config
    if len(cfg.lambdas) != 1:
        raise ValueError("deform requires exactly one deformation parameter")
    lam = cfg.lambdas[0]
    origin = cfg.integral_origin
    report = _base_report(problem, "deform")
    interval = family.excluded_interval(problem.u, origin)
    report["config"]["excluded_interval"] = list(interval)
    raw, unit = family.psi_lambda(problem.u, lam, origin)
    v_lam = family.deformed_potential(problem.v_shifted, problem.u, lam, origin)
    comparison = solver.verify_isospectral(problem.v_shifted, v_lam, cfg.k, False)
    rep_lam, _ = solver.lowest_eigenpairs(solver.build_hamiltonian(v_lam), cfg.k)
    report["spectra"] = {
        "v_minus": _spectrum_dict(
            solver.SpectrumReport(
                comparison.eigenvalues_a,
                cfg.k,
                np.zeros(0),
                problem.u.energy_shift,
            )
        ),
        "v_lambda": _spectrum_dict(rep_lam),
        "comparison": _comparison_dict(comparison),
    }
    report["potentials"].update(
        {
            "v_minus_shifted": _columns(problem.v_shifted.values),
            "v_lambda": _columns(v_lam.values),
        }
    )
    report["modes"].update(
        {
            "u": _columns(problem.u.psi.values),
            "psi_lambda_raw": _columns(raw.psi.values),
            "psi_lambda": _columns(unit.psi.values),
        }
    )
    lo, hi = problem.superpotential.trusted_window
    sup = float(np.max(np.abs(v_lam.values[lo:hi] - problem.v_shifted.values[lo:hi])))
    report["config"]["recovered_original"] = bool(sup < 1e-4)
    report["config"]["recovery_sup_norm"] = sup
    invariants = [
        _invariant("max_spectral_deviation", comparison.max_abs_difference, 5e-3),
        _invariant(
            "deformed_zero_mode_residual",
            solver.zero_mode_residual(v_lam, raw.psi),
            1e-3,
        ),
    ]
    if not -1.0 <= lam <= 0.0:
        constant = family.normalization_constant(lam)
        report["config"]["normalization_constant"] = constant
        raw_sq = GridFunction(problem.grid, raw.psi.values**2)
        invariants.append(
            _invariant(
                "normalization_identity",
                constant**2 * integrate(raw_sq) - 1.0,
                1e-4,
            )
        )
    report["invariants"] = invariants
    return report


def run_chain(problem: PreparedProblem) -> dict:
    """Multi-parameter deformation chain with per-step records."""
    cfg = problem.config
    if not cfg.lambdas:
        raise ValueError("chain requires at least one deformation parameter")
    report = _base_report(problem, "chain")
    chain = family.chain_deform(
        problem.v_shifted, problem.u, list(cfg.lambdas), cfg.integral_origin
    )
    report["config"]["normalization_constants"] = [
        step.normalization for step in chain.steps
    ]
    comparison = solver.verify_isospectral(
        problem.v_shifted, chain.final_potential, cfg.k, False
    )
    report["spectra"]["comparison"] = _comparison_dict(comparison)
    report["potentials"]["v_minus_shifted"] = _columns(problem.v_shifted.values)
    report["modes"]["u"] = _columns(problem.u.psi.values)
    for i, step in enumerate(chain.steps):
        report["potentials"][f"v_step_{i}"] = _columns(step.v_out.values)
        report["modes"][f"u_step_{i}"] = _columns(step.u_out.psi.values)
    lo, hi = problem.superpotential.trusted_window
    sup = float(
        np.max(
            np.abs(chain.final_potential.values[lo:hi] - problem.v_shifted.values[lo:hi])
        )
    )
    report["config"]["recovered_original"] = bool(sup < 1e-4)
    report["config"]["recovery_sup_norm"] = sup
    report["invariants"] = [
        _invariant("max_spectral_deviation", comparison.max_abs_difference, 8e-3),
    ]
    for i, step in enumerate(chain.steps):
        raw_sq = GridFunction(problem.grid, step.raw_mode.psi.values**2)
        report["invariants"].append(
            _invariant(
                f"normalization_identity_step_{i}",
                step.normalization**2 * integrate(raw_sq) - 1.0,
                1e-4,
            )
        )
    return report


def run_verify(problem: PreparedProblem) -> dict:
    """Full invariant suite; report records every measured value."""
    cfg = problem.config
    lam = cfg.lambdas[0] if cfg.lambdas else 1.5
    origin = cfg.integral_origin
    report = _base_report(problem, "verify")
    report["config"]["lambda"] = lam

    u, s, pair = problem.u, problem.superpotential, problem.pair
    probe = _smooth_probe(problem)
    invariants = []

    au = susy.apply_A(s, u.psi)
    invariants.append(
        _invariant("annihilation", window_l2(au) / window_l2(u.psi, au.window), 1e-6)
    )

    aaf = susy.apply_A_dagger(s, susy.apply_A(s, probe))
    hf = _hamiltonian_apply(problem.v_shifted, probe)
    lo, hi = common_window(aaf, hf)
    diff_vals = np.zeros(problem.grid.n)
    diff_vals[lo + 3 : hi - 3] = (aaf.values - hf.values)[lo + 3 : hi - 3]
    diff = GridFunction(problem.grid, diff_vals, window=(lo + 3, hi - 3))
    invariants.append(
        _invariant("factorization", window_l2(diff) / window_l2(probe), 1e-3)
    )

    gap = pair.v_plus.values - pair.v_minus.values - 2.0 * derivative(s.w_prime).values
    lo, hi = s.trusted_window
    gap_rel = np.nanmax(np.abs(gap[lo:hi])) / (1.0 + np.nanmax(np.abs(pair.v_plus.values[lo:hi])))
    invariants.append(_invariant("partner_gap", gap_rel, 1e-8))

    invariants.append(
        _invariant("intertwining_T1", intertwining_residual(problem, probe), 1e-3)
    )

    n_minus, n_plus = mapping_residuals(problem, lam)
    invariants.append(_invariant("t_minus_mapping", n_minus, 1e-6))
    invariants.append(_invariant("t_plus_mapping", n_plus, 1e-6))

    inst = riccati.RiccatiInstance.from_superpotential(s, lam)
    y1 = riccati.riccati_general_solution(inst)
    invariants.append(
        _invariant("riccati_residual", riccati.riccati_residual(y1, inst.f_rhs), 1e-4)
    )

    raw, unit = family.psi_lambda(u, lam, origin)
    raw_sq = GridFunction(problem.grid, raw.psi.values**2)
    norm_value = integrate(raw_sq)
    report["config"]["psi_lambda_norm_check"] = norm_value
    invariants.append(
        _invariant(
            "normalization_identity",
            family.normalization_constant(lam) ** 2 * norm_value - 1.0,
            1e-4,
        )
    )

    v_lam = family.deformed_potential(problem.v_shifted, u, lam, origin)
    invariants.append(
        _invariant(
            "deformed_zero_mode_residual",
            solver.zero_mode_residual(v_lam, raw.psi),
            1e-3,
        )
    )

    comparison = solver.verify_isospectral(problem.v_shifted, v_lam, cfg.k, False)
    invariants.append(
        _invariant("strict_isospectrality", comparison.max_abs_difference, 5e-3)
    )
    ladder = solver.verify_isospectral(
        problem.v_shifted, problem.v_plus_full, cfg.k, skip_ground_of_a=True
    )
    invariants.append(_invariant("partner_ladder", ladder.max_abs_difference, 5e-3))

    invariants.append(
        _invariant("refactorization_invariance", refactorization_spread(problem), 2e-3)
    )

    report["spectra"] = {
        "comparison": _comparison_dict(comparison),
        "partner_comparison": _comparison_dict(ladder),
    }
    report["potentials"].update(
        {
            "v_minus_shifted": _columns(problem.v_shifted.values),
            "v_plus": _columns(problem.v_plus_full.values),
            "v_lambda": _columns(v_lam.values),
        }
    )
    report["modes"].update(
        {"u": _columns(u.psi.values), "psi_lambda": _columns(unit.psi.values)}
    )
    report["invariants"] = invariants
    return report


def all_invariants_pass(report: dict) -> bool:
    return all(entry["passed"] for entry in report["invariants"])


def _figure_artifacts(report: dict) -> dict:
    potentials = {
        key: vals for key, vals in report["potentials"].items() if key != "x"
    }
    spectra = {}
    for name, spec in report["spectra"].items():
        if "eigenvalues" in spec:
            spectra[name] = spec["eigenvalues"]
        elif "eigenvalues_a" in spec:
            spectra[f"{name}_a"] = spec["eigenvalues_a"]
            spectra[f"{name}_b"] = spec["eigenvalues_b"]
    return {
        "x": report["potentials"].get("x"),
        "potentials": potentials,
        "modes": report["modes"],
        "spectra": spectra,
        "invariants": report["invariants"],
    }


def emit_report(report: dict, config: RunConfig) -> str:
    """Serialize the report, write requested files, return the text payload."""
    if config.output_format == "json":
        payload = json.dumps(report, indent=2, allow_nan=False) + "\n"
    else:
        payload = _csv_payload(report)
    if config.output_path:
        Path(config.output_path).write_text(payload, encoding="utf-8")
    if config.figures_dir:
        from .figures import render_figures

        written = render_figures(config.figures_dir, _figure_artifacts(report))
        report.setdefault("figures", written)
    return payload


def _csv_payload(report: dict) -> str:
    """Two-column table of the run's headline potential, re-ingestable."""
    potentials = report["potentials"]
    steps = [k for k in potentials if k.startswith("v_step_")]
    if steps:
        headline = potentials[max(steps, key=lambda k: int(k.rsplit("_", 1)[1]))]
    elif "v_lambda" in potentials:
        headline = potentials["v_lambda"]
    elif "v_minus_shifted" in potentials:
        headline = potentials["v_minus_shifted"]
    else:
        headline = potentials["v_input"]
    lines = ["x,V"]
    for x, v in zip(potentials["x"], headline):
        lines.append(f"{x:.17g},{v:.17g}")
    return "\n".join(lines) + "\n"
