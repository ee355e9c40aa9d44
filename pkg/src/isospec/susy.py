"""Factorization of ``-D^2 + V`` through a nodeless zero mode.

Given a normalized nodeless mode ``u`` with ``(-D^2 + V)u = 0``, this module
builds the superpotential derivative ``W' = -u'/u``, the ladder operators
``A = D + W'`` and its adjoint, the partner potential, second linearly
independent zero-energy solutions on both sides, the general one-parameter
zero modes, and the first-order intertwining maps between the two sectors.

Division by ``u`` (or by a deformed mode) is only meaningful where the mode
amplitude is well above eigenvector noise; every such operation is restricted
to a trusted window and masked outside it.

First-order operators are discretized in product form, e.g. ``A f`` is
computed as ``u * D[f/u]`` rather than ``D[f] + W' f``.  The two forms agree
in the continuum, but the product form makes the discrete operator annihilate
exactly the functions its continuum counterpart annihilates, keeping the
mapping identities between sectors at rounding level instead of O(h^2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BrokenSupersymmetryError, WindowTooSmallError
from .grids import (
    GridFunction,
    Window,
    common_window,
    cumulative_integral,
    fill_edges,
)
from .grids import _stencil_d1, _stencil_d2
from .solver import ZeroMode

__all__ = [
    "Superpotential",
    "PartnerPair",
    "trusted_window",
    "superpotential_from_mode",
    "apply_A",
    "apply_A_dagger",
    "apply_T1",
    "apply_T1_dagger",
    "partner_potential",
    "partner_potential_full",
    "second_solution_minus",
    "second_solution_plus",
    "general_zero_mode_minus",
    "fermionic_zero_mode",
    "apply_T_minus_lambda",
    "apply_T_plus_lambda",
]

#: Relative amplitude below which division by a mode is not trusted.
TRUST_FLOOR = 1e-6
#: Minimum trusted-window width for the integral-based second solutions.
MIN_WINDOW = 10


@dataclass(frozen=True)
class Superpotential:
    """Log-derivative data of a nodeless mode: ``w_prime = -u'/u``."""

    w_prime: GridFunction
    source_mode: ZeroMode
    trusted_window: Window


@dataclass(frozen=True)
class PartnerPair:
    """Bosonic/fermionic potentials rebuilt from one superpotential.

    ``v_minus = w'^2 - w''`` reconstructs the original (shifted) potential on
    the trusted window; ``v_plus = w'^2 + w''`` is its partner, whose spectrum
    coincides with the original apart from the missing ground level.
    """

    v_minus: GridFunction
    v_plus: GridFunction
    superpotential: Superpotential


def trusted_window(values: np.ndarray, floor_rel: float = TRUST_FLOOR) -> Window:
    """Largest contiguous index run around the peak with ``|v| >= floor*max``."""
    finite = np.nan_to_num(values)
    peak = float(np.max(np.abs(finite)))
    if peak == 0.0:
        raise ValueError("cannot window an identically zero function")
    idx = np.flatnonzero(np.abs(finite) >= floor_rel * peak)
    # split into contiguous runs, keep the one containing the peak
    breaks = np.flatnonzero(np.diff(idx) > 1)
    runs = np.split(idx, breaks + 1)
    peak_at = int(np.argmax(np.abs(finite)))
    for run in runs:
        if run[0] <= peak_at <= run[-1]:
            return int(run[0]), int(run[-1]) + 1
    return int(runs[0][0]), int(runs[0][-1]) + 1  # pragma: no cover - defensive


def _masked(f_like: GridFunction, seg: np.ndarray, window: Window) -> GridFunction:
    lo, hi = window
    vals = np.full(f_like.grid.n, np.nan)
    vals[lo:hi] = seg
    return GridFunction(f_like.grid, vals, window=window)


def superpotential_from_mode(u: ZeroMode) -> Superpotential:
    """``W' = -u'/u`` on the trusted window of ``u``."""
    if not u.nodeless:
        raise BrokenSupersymmetryError("superpotential requires a nodeless mode")
    win = trusted_window(u.psi.values)
    lo, hi = win
    seg = u.psi.values[lo:hi]
    wp = -_stencil_d1(seg, u.psi.grid.h) / seg
    return Superpotential(_masked(u.psi, wp, win), u, win)


def _ratio_first_order(
    phi: np.ndarray, f: GridFunction, window: Window, h: float, adjoint: bool
) -> GridFunction:
    """Product-form application of ``D - phi'/phi`` (or its adjoint) to f.

    ``(D - phi'/phi) f  = phi * D[f/phi]`` and
    ``(-D - phi'/phi) f = -(1/phi) * D[phi*f]``; both hold exactly in the
    continuum and by construction annihilate ``phi`` and ``1/phi`` exactly on
    the grid as well.
    """
    lo, hi = window
    seg_phi = phi[lo:hi]
    seg_f = f.values[lo:hi]
    if adjoint:
        seg = -_stencil_d1(seg_phi * seg_f, h) / seg_phi
    else:
        seg = seg_phi * _stencil_d1(seg_f / seg_phi, h)
    return _masked(f, seg, window)


def apply_A(s: Superpotential, f: GridFunction) -> GridFunction:
    """Annihilation-side operator ``(D + W') f`` on the trusted window."""
    win = common_window(s.w_prime, f)
    return _ratio_first_order(s.source_mode.psi.values, f, win, f.grid.h, adjoint=False)


def apply_A_dagger(s: Superpotential, f: GridFunction) -> GridFunction:
    """Creation-side operator ``(-D + W') f`` on the trusted window."""
    win = common_window(s.w_prime, f)
    return _ratio_first_order(s.source_mode.psi.values, f, win, f.grid.h, adjoint=True)


def apply_T1(u: ZeroMode, f: GridFunction) -> GridFunction:
    """First-order intertwiner ``(D - u'/u) f``; sends the bosonic sector up."""
    win = common_window(_as_windowed(u), f)
    return _ratio_first_order(u.psi.values, f, win, f.grid.h, adjoint=False)


def apply_T1_dagger(u: ZeroMode, f: GridFunction) -> GridFunction:
    """Adjoint intertwiner ``(-D - u'/u) f``; sends the fermionic sector down."""
    win = common_window(_as_windowed(u), f)
    return _ratio_first_order(u.psi.values, f, win, f.grid.h, adjoint=True)


def _as_windowed(u: ZeroMode) -> GridFunction:
    win = trusted_window(u.psi.values)
    return GridFunction(u.psi.grid, u.psi.values, window=win)


def partner_potential(s: Superpotential) -> PartnerPair:
    """Partner pair on the superpotential's window.

    The bosonic side is taken directly as ``u''/u`` (the tightest discrete
    realization of ``w'^2 - w''``) and the fermionic side as that plus the
    gap ``2 w''``, so the two defining identities of the pair hold at
    rounding level rather than stencil level.
    """
    lo, hi = s.trusted_window
    h = s.w_prime.grid.h
    seg_u = s.source_mode.psi.values[lo:hi]
    wpp = _stencil_d1(s.w_prime.values[lo:hi], h)
    v_minus_seg = _stencil_d2(seg_u, h) / seg_u
    v_minus = _masked(s.w_prime, v_minus_seg, s.trusted_window)
    v_plus = _masked(s.w_prime, v_minus_seg + 2.0 * wpp, s.trusted_window)
    return PartnerPair(v_minus, v_plus, s)


def partner_potential_full(pair: PartnerPair, v_minus_input: GridFunction) -> GridFunction:
    """Fermionic potential on the whole grid, suitable for diagonalization.

    The partner differs from the input potential by ``2 w''``, which is only
    trusted on the superpotential window; outside it the gap is continued by
    its edge values.  For modes that decay into the masked region the gap is
    already flat there, so the continuation does not disturb low eigenvalues.
    """
    if v_minus_input.grid != pair.v_plus.grid:
        raise ValueError("potential and partner pair live on different grids")
    gap_vals = pair.v_plus.values - pair.v_minus.values
    gap = fill_edges(
        GridFunction(v_minus_input.grid, np.nan_to_num(gap_vals), window=pair.superpotential.trusted_window)
    )
    return GridFunction(v_minus_input.grid, v_minus_input.values + gap.values)


def second_solution_minus(u: ZeroMode) -> GridFunction:
    """Second zero-energy solution ``u * int(1/u^2)`` of the bosonic side.

    The running integral of ``1/u^2`` is anchored at the mode's peak.  That
    pins the otherwise arbitrary additive multiple of ``u`` to zero there;
    anchoring at the window edge instead would fold in an enormous multiple
    of ``u`` (the integrand is largest exactly at the edges), hiding any
    finite admixture added later.  The pair ``(u, v)`` has unit Wronskian
    ``u v' - u' v = 1`` regardless of the anchor.
    """
    win = _integral_window(u)
    lo, hi = win
    seg_u = u.psi.values[lo:hi]
    inv_sq = 1.0 / (seg_u * seg_u)
    # accumulate outward from the peak: summing from the window edge instead
    # would park the core values on a ~1/u(edge)^2 plateau whose rounding
    # granularity, amplified by later differentiation, swamps the result
    peak = int(np.argmax(np.abs(seg_u)))
    h = u.psi.grid.h
    integral = np.empty_like(inv_sq)
    right = inv_sq[peak:]
    integral[peak:] = np.concatenate(
        ([0.0], np.cumsum(0.5 * h * (right[1:] + right[:-1])))
    )
    left = inv_sq[peak::-1]
    integral[: peak + 1] = -np.concatenate(
        ([0.0], np.cumsum(0.5 * h * (left[1:] + left[:-1])))
    )[::-1]
    return _masked(u.psi, seg_u * integral, win)


def second_solution_plus(u: ZeroMode, origin: str = "left") -> GridFunction:
    """Second zero-energy solution ``int(u^2) / u`` of the fermionic side."""
    win = _integral_window(u)
    lo, hi = win
    mass = cumulative_integral(_square(u), origin).values
    return _masked(u.psi, mass[lo:hi] / u.psi.values[lo:hi], win)


def general_zero_mode_minus(u: ZeroMode, lambda_s: float) -> GridFunction:
    """General bosonic zero mode ``lambda_s * u + v_minus``."""
    v = second_solution_minus(u)
    lo, hi = v.window
    seg = lambda_s * u.psi.values[lo:hi] + v.values[lo:hi]
    return _masked(u.psi, seg, v.window)


def fermionic_zero_mode(u: ZeroMode, lambda_s: float, origin: str = "left") -> GridFunction:
    """General fermionic zero mode ``(lambda_s + int(u^2)) / u``."""
    win = _integral_window(u)
    lo, hi = win
    mass = cumulative_integral(_square(u), origin).values
    seg = (lambda_s + mass[lo:hi]) / u.psi.values[lo:hi]
    return _masked(u.psi, seg, win)


def apply_T_minus_lambda(psi_lambda: ZeroMode, f: GridFunction) -> GridFunction:
    """Deformed adjoint-type intertwiner ``(-D + P^2 - P'/P) f``.

    ``P`` is the (raw) deformed zero mode; applied to the general fermionic
    zero mode with the same parameter this returns ``P`` itself.
    """
    win = common_window(_as_windowed(psi_lambda), f)
    lo, hi = win
    h = f.grid.h
    p = psi_lambda.psi.values[lo:hi]
    seg_f = f.values[lo:hi]
    # -D f - (P'/P) f == -(1/P) D[P f]; the quadratic dressing is added after
    seg = -_stencil_d1(p * seg_f, h) / p + p * p * seg_f
    return _masked(f, seg, win)


def apply_T_plus_lambda(psi_lambda: ZeroMode, f: GridFunction) -> GridFunction:
    """Deformed intertwiner ``(D + P^-2 - P'/P) f``; inverse map of T minus."""
    win = common_window(_as_windowed(psi_lambda), f)
    lo, hi = win
    h = f.grid.h
    p = psi_lambda.psi.values[lo:hi]
    seg_f = f.values[lo:hi]
    # D f - (P'/P) f == P * D[f/P]
    seg = p * _stencil_d1(seg_f / p, h) + seg_f / (p * p)
    return _masked(f, seg, win)


def _integral_window(u: ZeroMode) -> Window:
    if not u.nodeless:
        raise BrokenSupersymmetryError("second solutions require a nodeless mode")
    win = trusted_window(u.psi.values)
    if win[1] - win[0] < MIN_WINDOW:
        raise WindowTooSmallError(
            f"trusted window has {win[1] - win[0]} points, need {MIN_WINDOW}"
        )
    return win


def _square(u: ZeroMode) -> GridFunction:
    return GridFunction(u.psi.grid, u.psi.values * u.psi.values)
