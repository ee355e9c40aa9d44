"""One- and multi-parameter strictly isospectral deformations.

Starting from a potential with its nodeless zero mode ``u`` (ground energy
already shifted to zero), the inverse of the general fermionic zero mode,

    psi_lambda = u / (lambda + I(x)),      I(x) = running integral of u^2,

is again a nodeless zero-energy mode, this time of the deformed potential

    V_lambda = V - 4 u u' / (lambda + I) + 2 u^4 / (lambda + I)^2,

whose entire spectrum coincides with that of ``V``.  The deformation is
admissible only when ``lambda + I(x)`` keeps one sign on the whole grid; the
set of rejected parameters is an interval ``[-I_max, -I_min]`` computed
numerically rather than assumed.  Deformations can be chained, renormalizing
the mode at every step, which yields multi-parameter families.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    AbrahamMosesLimitError,
    BrokenSupersymmetryError,
    PurseyLimitError,
    SingularParameterError,
)
from .grids import GridFunction, cumulative_integral, derivative, l2_norm
from .grids import _stencil_d2
from .solver import ZeroMode, count_sign_changes
from .susy import trusted_window

__all__ = [
    "DeformationStep",
    "DeformationChain",
    "psi_lambda",
    "deformed_potential",
    "excluded_interval",
    "normalization_constant",
    "chain_deform",
    "reconstruct_potential_from_mode",
]

#: Denominators closer to zero than this are treated as singular.
DENOMINATOR_FLOOR = 1e-9
#: Parameters within this distance of an interval endpoint get a named error.
LIMIT_TOL = 1e-6
#: Amplitude floor for potential reconstruction by psi''/psi (tighter than the
#: division floor: the stencil error scales with V^2 psi, so the comparison is
#: only meaningful where psi is not many orders below its peak).
RECONSTRUCTION_FLOOR = 1e-3


@dataclass(frozen=True)
class DeformationStep:
    """One deformation: parameter, input/output modes, deformed potential.

    ``normalization`` records the closed-form constant sqrt(lambda*(lambda+1))
    valid for a unit-normalized input mode with left-origin integrals;
    ``raw_mode`` keeps the unnormalized output for audit, since the nesting of
    integrals only shows up there.
    """

    lam: float
    u_in: ZeroMode
    u_out: ZeroMode
    v_out: GridFunction
    normalization: float
    valid: bool
    raw_mode: ZeroMode


@dataclass(frozen=True)
class DeformationChain:
    """Ordered deformation steps; step i consumes the outputs of step i-1."""

    steps: tuple[DeformationStep, ...]
    base_potential: GridFunction
    base_mode: ZeroMode

    @property
    def final_potential(self) -> GridFunction:
        return self.steps[-1].v_out if self.steps else self.base_potential

    @property
    def final_mode(self) -> ZeroMode:
        return self.steps[-1].u_out if self.steps else self.base_mode


def _mode_mass(u: ZeroMode, origin: str) -> np.ndarray:
    sq = GridFunction(u.psi.grid, u.psi.values * u.psi.values)
    return cumulative_integral(sq, origin).values


def excluded_interval(u: ZeroMode, origin: str = "left") -> tuple[float, float]:
    """Closed interval of parameters for which ``lambda + I(x)`` vanishes.

    With a unit-normalized mode and left origin this is [-1, 0] up to domain
    truncation; a mid origin makes it symmetric about zero.
    """
    mass = _mode_mass(u, origin)
    return (-float(mass.max()) + 0.0, -float(mass.min()) + 0.0)


def _checked_denominator(u: ZeroMode, lam: float, origin: str) -> np.ndarray:
    """``lambda + I(x)``, rejecting parameters that let it touch zero."""
    if not math.isfinite(lam):
        raise ValueError("deformation parameter must be finite")
    mass = _mode_mass(u, origin)
    den = lam + mass
    signs = np.sign(den)
    sign_ok = np.all(signs == signs[0])
    small = float(np.min(np.abs(den)))
    if sign_ok and small > DENOMINATOR_FLOOR:
        return den
    interval = (-float(mass.max()) + 0.0, -float(mass.min()) + 0.0)
    where = int(np.argmin(np.abs(den)))
    x_cross = float(u.psi.grid.x[where])
    msg = (
        f"deformation parameter {lam} is inside the excluded interval "
        f"[{interval[0]:.6g}, {interval[1]:.6g}]: denominator reaches "
        f"{small:.3e} at x = {x_cross:.6g}"
    )
    kwargs = dict(lam=lam, interval=interval, x_crossing=x_cross)
    if origin == "left":
        if abs(lam - interval[1]) <= LIMIT_TOL:
            raise PurseyLimitError(
                msg + "; this is the upper-endpoint limit, which connects to a "
                "different construction and is not implemented",
                **kwargs,
            )
        if abs(lam - interval[0]) <= LIMIT_TOL:
            raise AbrahamMosesLimitError(
                msg + "; this is the lower-endpoint limit, which connects to a "
                "different construction and is not implemented",
                **kwargs,
            )
    raise SingularParameterError(msg, **kwargs)


def normalization_constant(lam: float) -> float:
    """Closed-form norm constant sqrt(lambda*(lambda+1)) of the raw mode."""
    radicand = lam * (lam + 1.0)
    if -1.0 <= lam <= 0.0:
        raise SingularParameterError(
            f"normalization constant undefined for lambda = {lam} in [-1, 0] "
            f"(radicand {radicand:.6g})",
            lam=lam,
            interval=(-1.0, 0.0),
        )
    return math.sqrt(radicand)


def psi_lambda(
    u: ZeroMode, lam: float, origin: str = "left"
) -> tuple[ZeroMode, ZeroMode]:
    """Deformed zero mode ``u / (lambda + I)`` in raw and normalized form.

    The raw mode keeps the natural sign of the denominator (negative for the
    lower parameter branch); the normalized mode is rescaled to unit L2 norm
    with a positive global phase.
    """
    den = _checked_denominator(u, lam, origin)
    raw_vals = u.psi.values / den
    raw_psi = GridFunction(u.psi.grid, raw_vals)
    raw_norm = l2_norm(raw_psi)
    raw = ZeroMode(raw_psi, raw_norm, count_sign_changes(raw_vals) == 0, 0.0)
    unit_vals = raw_vals / raw_norm
    if unit_vals[np.argmax(np.abs(unit_vals))] < 0:
        unit_vals = -unit_vals
    unit = ZeroMode(
        GridFunction(u.psi.grid, unit_vals), 1.0, raw.nodeless, 0.0
    )
    return raw, unit


def deformed_potential(
    v_minus: GridFunction, u: ZeroMode, lam: float, origin: str = "left"
) -> GridFunction:
    """Strictly isospectral deformation of ``v_minus`` driven by ``u``.

    All terms vanish with ``u`` in the tails, so the output lives on the full
    grid and approaches ``v_minus`` as the parameter grows.
    """
    if v_minus.grid != u.psi.grid:
        raise ValueError("potential and mode live on different grids")
    if v_minus.window is not None:
        raise ValueError("base potential must be defined on the whole grid")
    den = _checked_denominator(u, lam, origin)
    uu = u.psi.values
    up = derivative(u.psi).values
    vals = v_minus.values - 4.0 * uu * up / den + 2.0 * uu**4 / den**2
    return GridFunction(v_minus.grid, vals)


def chain_deform(
    v_minus: GridFunction,
    u: ZeroMode,
    lambdas: list[float],
    origin: str = "left",
) -> DeformationChain:
    """Iterated deformation; every step renormalizes before the next.

    Validity is re-derived per step against the renormalized mode, so each
    step's excluded interval is [-1, 0] up to truncation regardless of depth.
    The first invalid parameter aborts the chain, reporting its step index.
    """
    steps: list[DeformationStep] = []
    v_in, u_in = v_minus, u
    for index, lam in enumerate(lambdas):
        try:
            constant = normalization_constant(lam)
            raw, unit = psi_lambda(u_in, lam, origin)
        except SingularParameterError as exc:
            exc.step_index = index
            exc.args = (f"chain step {index}: {exc.args[0]}",)
            raise
        v_out = deformed_potential(v_in, u_in, lam, origin)
        _check_step_normalization(lam, constant, raw)
        steps.append(
            DeformationStep(
                lam=lam,
                u_in=u_in,
                u_out=unit,
                v_out=v_out,
                normalization=constant,
                valid=True,
                raw_mode=raw,
            )
        )
        v_in, u_in = v_out, unit
    return DeformationChain(tuple(steps), v_minus, u)


def _check_step_normalization(lam: float, constant: float, raw: ZeroMode) -> None:
    # closed form assumes a unit-normalized input with left-origin integrals;
    # the chain maintains exactly that, so treat disagreement as a bug
    identity = constant**2 * raw.norm**2
    if abs(identity - 1.0) > 1e-4:
        raise SingularParameterError(
            f"normalization identity violated at lambda={lam}: "
            f"N^2 * ||raw||^2 = {identity:.8f}",
            lam=lam,
        )


def reconstruct_potential_from_mode(
    psi: ZeroMode, floor_rel: float = RECONSTRUCTION_FLOOR
) -> GridFunction:
    """Potential ``psi''/psi`` recovered from a zero-energy mode.

    Returned on the reconstruction window (amplitude above ``floor_rel`` of
    the peak) and masked outside, where the quotient of two second-order
    stencil values loses the stated accuracy.
    """
    if not psi.nodeless:
        raise BrokenSupersymmetryError("potential reconstruction requires a nodeless mode")
    win = trusted_window(psi.psi.values, floor_rel)
    lo, hi = win
    seg = psi.psi.values[lo:hi]
    curv = _stencil_d2(seg, psi.psi.grid.h)
    vals = np.full(psi.psi.grid.n, np.nan)
    vals[lo:hi] = curv / seg
    return GridFunction(psi.psi.grid, vals, window=win)
