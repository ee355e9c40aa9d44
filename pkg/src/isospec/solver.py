"""Finite-difference Hamiltonians ``-D^2 + V`` and their lowest eigenpairs.

The operator is discretized with the three-point stencil on interior points
and Dirichlet boundaries, giving a symmetric tridiagonal matrix over the
``n - 2`` interior nodes.  Eigenpairs come from LAPACK's tridiagonal
bisection / inverse-iteration path, which is deterministic: the same input
produces bit-identical output on one platform.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import BrokenSupersymmetryError, DomainTruncationWarning, EigensolverError
from .grids import Grid1D, GridFunction, common_window, l2_norm
from .grids import _stencil_d2

__all__ = [
    "TridiagonalOperator",
    "SpectrumReport",
    "ZeroMode",
    "IsospectralComparison",
    "build_hamiltonian",
    "lowest_eigenpairs",
    "ground_state",
    "verify_isospectral",
    "count_sign_changes",
    "zero_mode_residual",
]

#: Relative residual every returned eigenpair must satisfy.
RESIDUAL_TOL = 1e-8
#: A sign change counts as a node only between samples above this relative floor.
NODE_FLOOR = 1e-8
#: Tail amplitude at the wall neighbors above which the box is deemed too small.
TAIL_FLOOR = 1e-8


@dataclass(frozen=True)
class TridiagonalOperator:
    """Symmetric tridiagonal matrix over the interior points of a grid.

    ``diag[i] = 2/h^2 + V(x_{i+1})`` and ``offdiag[i] = -1/h^2``; a single
    off-diagonal array represents both bands.
    """

    diag: np.ndarray
    offdiag: np.ndarray
    grid: Grid1D

    def __post_init__(self):
        m = self.grid.n - 2
        if self.diag.shape != (m,) or self.offdiag.shape != (m - 1,):
            raise ValueError("band shapes inconsistent with the grid")

    @property
    def size(self) -> int:
        return self.diag.size

    def apply(self, vec: np.ndarray) -> np.ndarray:
        out = self.diag * vec
        out[:-1] += self.offdiag * vec[1:]
        out[1:] += self.offdiag * vec[:-1]
        return out


@dataclass(frozen=True)
class SpectrumReport:
    """Lowest-k eigenvalues with per-pair residual diagnostics."""

    eigenvalues: np.ndarray
    k: int
    residual_norms: np.ndarray
    ground_energy_shift: float = 0.0


@dataclass(frozen=True)
class ZeroMode:
    """Nodeless wavefunction annihilated by its (shifted) Hamiltonian.

    ``psi`` vanishes at both boundary points, carries a positive global
    phase, and ``norm`` records its L2 norm as stored (1.0 on the standard
    path).  ``energy_shift`` is the ground energy subtracted from the
    potential to place this mode at zero energy.
    """

    psi: GridFunction
    norm: float
    nodeless: bool
    energy_shift: float

    @classmethod
    def from_values(
        cls,
        grid: Grid1D,
        values: np.ndarray,
        energy_shift: float = 0.0,
        normalize: bool = True,
    ) -> "ZeroMode":
        """Wrap explicit samples (e.g. an analytic mode) as a ZeroMode.

        ``normalize=False`` keeps the given amplitude; ``norm`` then records
        the actual L2 norm instead of 1.
        """
        psi = GridFunction(grid, values)
        nrm = l2_norm(psi)
        if nrm == 0.0 or not np.isfinite(nrm):
            raise ValueError("cannot build a zero mode from a null function")
        if normalize:
            psi = GridFunction(grid, psi.values / nrm)
            nrm = 1.0
        nodeless = count_sign_changes(psi.values) == 0
        return cls(psi, nrm, nodeless, energy_shift)


@dataclass(frozen=True)
class IsospectralComparison:
    """Pairwise eigenvalue comparison between two potentials."""

    eigenvalues_a: np.ndarray
    eigenvalues_b: np.ndarray
    differences: np.ndarray
    max_abs_difference: float
    partner_mode: bool


def count_sign_changes(values: np.ndarray, floor_rel: float = NODE_FLOOR) -> int:
    """Sign changes between consecutive samples above the noise floor."""
    peak = float(np.max(np.abs(values[np.isfinite(values)])))
    if peak == 0.0:
        return 0
    v = values[np.isfinite(values)]
    sig = v[np.abs(v) > floor_rel * peak]
    if sig.size < 2:
        return 0
    s = np.sign(sig)
    return int(np.count_nonzero(s[1:] * s[:-1] < 0))


def build_hamiltonian(v: GridFunction) -> TridiagonalOperator:
    """Interior-point tridiagonal matrix for ``-D^2 + V`` with Dirichlet walls."""
    if v.window is not None or not np.all(np.isfinite(v.values)):
        raise ValueError("potential must be finite on the whole grid")
    h2 = v.grid.h ** 2
    diag = 2.0 / h2 + v.values[1:-1]
    offdiag = np.full(v.grid.n - 3, -1.0 / h2)
    return TridiagonalOperator(diag, offdiag, v.grid)


def lowest_eigenpairs(
    ham: TridiagonalOperator, k: int
) -> tuple[SpectrumReport, list[GridFunction]]:
    """k smallest eigenvalues (ascending) with orthonormal eigenvectors.

    Eigenvectors are re-embedded on the full grid with zero boundary values
    and scaled by ``1/sqrt(h)`` so the discrete quadrature norm is 1.  The
    relative residual of every pair is checked against ``RESIDUAL_TOL`` on
    the eigenvalue scale.
    """
    if k < 1 or k > ham.size:
        raise ValueError(f"eigenpair count k={k} outside [1, {ham.size}]")
    try:
        w, v = eigh_tridiagonal(
            ham.diag, ham.offdiag, select="i", select_range=(0, k - 1)
        )
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure path
        raise EigensolverError("tridiagonal eigensolver failed to converge", str(exc))
    order = np.argsort(w)
    w = w[order]
    v = v[:, order]

    scale = max(1.0, float(np.max(np.abs(w))))
    residuals = np.empty(k)
    grid = ham.grid
    vectors: list[GridFunction] = []
    for j in range(k):
        col = v[:, j]
        # pin the sign so output is deterministic regardless of LAPACK's choice
        peak = int(np.argmax(np.abs(col)))
        if col[peak] < 0:
            col = -col
        residuals[j] = float(
            np.linalg.norm(ham.apply(col) - w[j] * col) / np.linalg.norm(col)
        )
        if residuals[j] > RESIDUAL_TOL * scale:
            raise EigensolverError(
                f"eigenpair {j} residual {residuals[j]:.3e} exceeds "
                f"{RESIDUAL_TOL:.0e} on scale {scale:.3e}"
            )
        full = np.zeros(grid.n)
        full[1:-1] = col / np.sqrt(grid.h)
        vectors.append(GridFunction(grid, full))
    report = SpectrumReport(eigenvalues=w, k=k, residual_norms=residuals)
    return report, vectors


def ground_state(v: GridFunction) -> tuple[ZeroMode, GridFunction]:
    """Normalized nodeless ground state and the potential shifted so E0 = 0.

    Raises :class:`BrokenSupersymmetryError` if the lowest eigenvector has a
    node above the noise floor, and :class:`EigensolverError` if the ground
    eigenvalue is not isolated from the next one.
    """
    ham = build_hamiltonian(v)
    k = min(2, ham.size)
    report, vectors = lowest_eigenpairs(ham, k)
    e0 = float(report.eigenvalues[0])
    if k == 2:
        gap = float(report.eigenvalues[1]) - e0
        if gap <= RESIDUAL_TOL * max(1.0, abs(e0)):
            raise EigensolverError(
                f"ground eigenvalue not isolated: gap {gap:.3e} below tolerance"
            )
    psi = vectors[0]
    if count_sign_changes(psi.values) != 0:
        raise BrokenSupersymmetryError(
            "ground state has interior nodes; nodeless zero mode unavailable"
        )
    vals = psi.values.copy()
    if vals[np.argmax(np.abs(vals))] < 0:
        vals = -vals
    norm = l2_norm(GridFunction(v.grid, vals))
    vals /= norm
    peak = float(np.max(np.abs(vals)))
    if abs(vals[1]) > TAIL_FLOOR * peak or abs(vals[-2]) > TAIL_FLOOR * peak:
        warnings.warn(
            DomainTruncationWarning(
                "wavefunction tail is not negligible at the box walls; the "
                "domain truncates the mode"
            ),
            stacklevel=2,
        )
    mode = ZeroMode(GridFunction(v.grid, vals), 1.0, True, e0)
    shifted = GridFunction(v.grid, v.values - e0)
    return mode, shifted


def verify_isospectral(
    v_a: GridFunction, v_b: GridFunction, k: int, skip_ground_of_a: bool
) -> IsospectralComparison:
    """Compare the low spectra of two potentials on the same grid.

    In partner mode (``skip_ground_of_a=True``) eigenvalue ``n+1`` of ``v_a``
    is paired with eigenvalue ``n`` of ``v_b``; otherwise pairing is
    index-to-index.
    """
    if v_a.grid != v_b.grid:
        raise ValueError("potentials must share one grid")
    if k < 1:
        raise ValueError("need k >= 1 eigenvalues to compare")
    k_a = k + 1 if skip_ground_of_a else k
    rep_a, _ = lowest_eigenpairs(build_hamiltonian(v_a), k_a)
    rep_b, _ = lowest_eigenpairs(build_hamiltonian(v_b), k)
    eigs_a = rep_a.eigenvalues[1:] if skip_ground_of_a else rep_a.eigenvalues
    diffs = eigs_a - rep_b.eigenvalues
    return IsospectralComparison(
        eigenvalues_a=rep_a.eigenvalues,
        eigenvalues_b=rep_b.eigenvalues,
        differences=diffs,
        max_abs_difference=float(np.max(np.abs(diffs))),
        partner_mode=skip_ground_of_a,
    )


def zero_mode_residual(v: GridFunction, psi: GridFunction, margin: int = 3) -> float:
    """Relative residual of ``(-D^2 + V) psi = 0`` over the common window.

    Normalized by the larger of the two term norms, so the value measures how
    well the kinetic and potential terms cancel rather than the raw size of
    ``psi`` (which may grow steeply toward the window edges).  ``margin`` rows
    are dropped at each window edge: one-sided stencils on steeply growing
    modes lose accuracy exactly there, which would swamp the interior signal.
    """
    lo, hi = common_window(v, psi)
    seg = psi.values[lo:hi]
    curv = _stencil_d2(seg, psi.grid.h)
    term_v = v.values[lo:hi] * seg
    if hi - lo > 2 * margin + 3:
        sl = slice(margin, -margin if margin else None)
        curv, term_v = curv[sl], term_v[sl]
    scale = max(np.linalg.norm(curv), np.linalg.norm(term_v), np.finfo(float).tiny)
    return float(np.linalg.norm(-curv + term_v) / scale)
