"""General solutions of the Riccati equation ``y' = -y^2 + f(x)``.

Given one particular solution ``y0``, every other solution is

    y1 = y0 + g / (lambda_r + int(g)),      g = exp(-2 int(y0)),

with the integration constant ``lambda_r`` as the free parameter.  When
``y0`` is the log-derivative dressing of a nodeless zero mode, ``g`` is
proportional to the squared mode and ``y1`` is the log-derivative of the
deformed mode with the same parameter, tying this layer to the isospectral
family construction: the deformed potential equals the base potential plus
``-2 (y1 - y0)'``.

Both nested integrals are trapezoid cumulatives starting at the left edge of
the trusted data, the same convention used for the deformation denominators,
so the two parameters can be identified without rescaling whenever the
dressing mode equals one at that edge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SingularParameterError
from .grids import GridFunction, common_window, cumulative_integral, derivative
from .grids import _stencil_d1
from .susy import Superpotential

__all__ = [
    "RiccatiInstance",
    "riccati_general_solution",
    "riccati_residual",
    "general_darboux_term",
]

#: Residual bound a particular solution must satisfy at construction.
PARTICULAR_TOL = 1e-6
#: Denominators closer to zero than this are treated as singular.
DENOMINATOR_FLOOR = 1e-9


@dataclass(frozen=True)
class RiccatiInstance:
    """One equation ``y' = -y^2 + f`` together with a particular solution."""

    y0: GridFunction
    f_rhs: GridFunction
    lambda_r: float

    def __post_init__(self):
        if not math.isfinite(self.lambda_r):
            raise ValueError("integration constant must be finite")
        resid = riccati_residual(self.y0, self.f_rhs)
        if resid > PARTICULAR_TOL:
            raise ValueError(
                f"y0 is not a particular solution: residual {resid:.3e} "
                f"exceeds {PARTICULAR_TOL:.0e}"
            )

    @classmethod
    def from_particular(cls, y0: GridFunction, lambda_r: float) -> "RiccatiInstance":
        """Instance with the right-hand side induced by ``y0`` itself."""
        lo, hi = y0.bounds
        seg = y0.values[lo:hi]
        f_seg = _stencil_d1(seg, y0.grid.h) + seg * seg
        vals = np.full(y0.grid.n, np.nan)
        vals[lo:hi] = f_seg
        if y0.window is None:
            return cls(y0, GridFunction(y0.grid, vals), lambda_r)
        return cls(y0, GridFunction(y0.grid, vals, window=y0.window), lambda_r)

    @classmethod
    def from_superpotential(cls, s: Superpotential, lambda_r: float) -> "RiccatiInstance":
        """Instance dressed by a factorization: ``y0 = W'``, rhs the partner.

        The trusted window is cut down to start at the mode's peak, where the
        integration factor ``exp(-2 int(y0))`` equals one.  Rightward of the
        peak it decays like the squared mode and stays resolvable; anchoring
        at the window edge instead would make it span many orders of
        magnitude and vary faster than the grid can follow.
        """
        mode_vals = s.source_mode.psi.values
        peak = int(np.argmax(np.abs(mode_vals)))
        lo, hi = s.trusted_window
        start = min(max(peak, lo), hi - 3)
        y0 = GridFunction(s.w_prime.grid, s.w_prime.values, window=(start, hi))
        return cls.from_particular(y0, lambda_r)


def riccati_general_solution(inst: RiccatiInstance) -> GridFunction:
    """Solution ``y0 + g/(lambda_r + int(g))`` on the trusted window.

    Raises :class:`SingularParameterError` when the denominator vanishes
    somewhere on the grid, naming the offending location.
    """
    y0 = inst.y0
    lo, hi = y0.bounds
    log_factor = cumulative_integral(y0).values[lo:hi]
    g = np.exp(-2.0 * log_factor)
    g_masked = np.full(y0.grid.n, np.nan)
    g_masked[lo:hi] = g
    g_fn = GridFunction(y0.grid, g_masked, window=y0.window)
    mass = cumulative_integral(g_fn).values[lo:hi]
    den = inst.lambda_r + mass
    signs = np.sign(den)
    if not np.all(signs == signs[0]) or float(np.min(np.abs(den))) <= DENOMINATOR_FLOOR:
        where = int(np.argmin(np.abs(den)))
        raise SingularParameterError(
            f"integration constant {inst.lambda_r} makes the denominator vanish "
            f"near x = {y0.grid.x[lo + where]:.6g}",
            lam=inst.lambda_r,
            interval=(-float(mass.max()) + 0.0, -float(mass.min()) + 0.0),
            x_crossing=float(y0.grid.x[lo + where]),
        )
    vals = np.full(y0.grid.n, np.nan)
    vals[lo:hi] = y0.values[lo:hi] + g / den
    if y0.window is None:
        return GridFunction(y0.grid, vals)
    return GridFunction(y0.grid, vals, window=y0.window)


def riccati_residual(y: GridFunction, f_rhs: GridFunction) -> float:
    """Max of ``|y' + y^2 - f|`` over the common window, scaled by 1 + max|f|."""
    lo, hi = common_window(y, f_rhs)
    seg = y.values[lo:hi]
    f_seg = f_rhs.values[lo:hi]
    resid = _stencil_d1(seg, y.grid.h) + seg * seg - f_seg
    return float(np.max(np.abs(resid)) / (1.0 + np.max(np.abs(f_seg))))


def general_darboux_term(y0: GridFunction, y1: GridFunction) -> GridFunction:
    """Deformation term ``-2 (y1 - y0)'`` linking base and deformed potentials.

    Adding this to the potential solved by ``y0`` gives the member of the
    isospectral family whose log-derivative dressing is ``y1``.
    """
    lo, hi = common_window(y0, y1)
    diff = y1.values[lo:hi] - y0.values[lo:hi]
    vals = np.full(y0.grid.n, np.nan)
    vals[lo:hi] = -2.0 * _stencil_d1(diff, y0.grid.h)
    window = None if (lo, hi) == (0, y0.grid.n) else (lo, hi)
    if window is None:
        return GridFunction(y0.grid, vals)
    return GridFunction(y0.grid, vals, window=window)
