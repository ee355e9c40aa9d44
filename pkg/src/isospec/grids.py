"""Uniform-grid containers and the numerics every other layer builds on.

A ``Grid1D`` is an immutable uniform sampling of ``[x_min, x_max]``; a
``GridFunction`` is a real-valued array sampled on it, optionally carrying a
trusted index window outside of which entries are masked to NaN.  All
operations here are pure functions returning new objects, so everything is
safe to share across threads.

Conventions
-----------
* Cumulative integrals run from the left edge of the trusted data by
  default; a ``mid`` origin (lower limit at the grid midpoint) is available
  for symmetric problems.
* Cumulative integrals use the composite trapezoid rule, which keeps the
  antiderivative of a nonnegative integrand monotone.  Whole-domain scalars
  use composite Simpson, falling back to trapezoid (with a warning) when the
  sample count is even.
* Derivatives use second-order central stencils with second-order one-sided
  stencils at segment edges, so no ghost points are needed.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np
from scipy.integrate import cumulative_trapezoid, simpson, trapezoid

from .errors import QuadratureWarning

__all__ = [
    "Grid1D",
    "GridFunction",
    "make_grid",
    "derivative",
    "second_derivative",
    "cumulative_integral",
    "integrate",
    "l2_norm",
    "common_window",
    "fill_edges",
    "restrict",
    "window_l2",
]

#: Half-open index range ``(lo, hi)`` delimiting trusted samples.
Window = tuple[int, int]


@dataclass(frozen=True)
class Grid1D:
    """Uniform spatial grid with ``n`` points on ``[x_min, x_max]``.

    Point ``i`` sits at ``x_min + i*h`` with a single rounding per index, so
    there is no accumulated drift along the axis.
    """

    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if not (np.isfinite(self.x_min) and np.isfinite(self.x_max)):
            raise ValueError("grid endpoints must be finite")
        if not self.x_min < self.x_max:
            raise ValueError(
                f"domain must satisfy x_min < x_max, got [{self.x_min}, {self.x_max}]"
            )
        if int(self.n) != self.n or self.n < 3:
            raise ValueError(f"need an integer point count n >= 3, got {self.n}")

    @property
    def h(self) -> float:
        """Grid spacing ``(x_max - x_min)/(n - 1)``."""
        return (self.x_max - self.x_min) / (self.n - 1)

    @cached_property
    def x(self) -> np.ndarray:
        x = self.x_min + self.h * np.arange(self.n)
        x.flags.writeable = False
        return x

    @property
    def mid_index(self) -> int:
        return (self.n - 1) // 2


@dataclass(frozen=True)
class GridFunction:
    """Real function sampled on a :class:`Grid1D`.

    ``window`` is an optional half-open trusted index range; entries outside
    it are forced to NaN at construction time and excluded from norms and
    residuals downstream.  Values inside the window (or everywhere, for an
    unwindowed function) must be finite.
    """

    grid: Grid1D
    values: np.ndarray
    window: Window | None = None

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.shape != (self.grid.n,):
            raise ValueError(
                f"values must have length {self.grid.n}, got shape {vals.shape}"
            )
        if self.window is not None:
            lo, hi = self.window
            if not (0 <= lo < hi <= self.grid.n):
                raise ValueError(f"window {self.window} out of range for n={self.grid.n}")
            if hi - lo < 3:
                raise ValueError("trusted window must span at least 3 points")
            if not np.all(np.isfinite(vals[lo:hi])):
                raise ValueError("non-finite values inside the trusted window")
            vals[:lo] = np.nan
            vals[hi:] = np.nan
            object.__setattr__(self, "window", (int(lo), int(hi)))
        elif not np.all(np.isfinite(vals)):
            raise ValueError("non-finite values in an unmasked grid function")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_callable(cls, grid: Grid1D, fn: Callable[[np.ndarray], np.ndarray]) -> "GridFunction":
        return cls(grid, np.asarray(fn(grid.x), dtype=float))

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    @property
    def bounds(self) -> Window:
        """Trusted index range, ``(0, n)`` for an unwindowed function."""
        return self.window if self.window is not None else (0, self.grid.n)

    @property
    def trusted_values(self) -> np.ndarray:
        lo, hi = self.bounds
        return self.values[lo:hi]

    @property
    def trusted_x(self) -> np.ndarray:
        lo, hi = self.bounds
        return self.grid.x[lo:hi]


def make_grid(x_min: float, x_max: float, n: int) -> Grid1D:
    """Build a uniform grid; raises ValueError on a degenerate domain."""
    return Grid1D(float(x_min), float(x_max), int(n))


def _stencil_d1(seg: np.ndarray, h: float) -> np.ndarray:
    out = np.empty_like(seg)
    out[1:-1] = (seg[2:] - seg[:-2]) / (2.0 * h)
    out[0] = (-3.0 * seg[0] + 4.0 * seg[1] - seg[2]) / (2.0 * h)
    out[-1] = (3.0 * seg[-1] - 4.0 * seg[-2] + seg[-3]) / (2.0 * h)
    return out


def _stencil_d2(seg: np.ndarray, h: float) -> np.ndarray:
    out = np.empty_like(seg)
    h2 = h * h
    out[1:-1] = (seg[2:] - 2.0 * seg[1:-1] + seg[:-2]) / h2
    if seg.size >= 4:
        out[0] = (2.0 * seg[0] - 5.0 * seg[1] + 4.0 * seg[2] - seg[3]) / h2
        out[-1] = (2.0 * seg[-1] - 5.0 * seg[-2] + 4.0 * seg[-3] - seg[-4]) / h2
    else:
        # 3-point segment: reuse the single interior value at both edges
        out[0] = out[1]
        out[-1] = out[1]
    return out


def _rebuild(f: GridFunction, seg: np.ndarray) -> GridFunction:
    lo, hi = f.bounds
    vals = np.full(f.grid.n, np.nan)
    vals[lo:hi] = seg
    return GridFunction(f.grid, vals, window=f.window)


def derivative(f: GridFunction) -> GridFunction:
    """First derivative: central differences, one-sided at segment edges.

    Exact for polynomials up to degree two, globally O(h^2).
    """
    return _rebuild(f, _stencil_d1(f.trusted_values, f.grid.h))


def second_derivative(f: GridFunction) -> GridFunction:
    """Second derivative from the three-point stencil, one-sided at edges."""
    return _rebuild(f, _stencil_d2(f.trusted_values, f.grid.h))


def cumulative_integral(f: GridFunction, origin: str = "left") -> GridFunction:
    """Trapezoid antiderivative of ``f`` over its trusted window.

    Parameters
    ----------
    f : GridFunction
        Integrand; only the trusted window contributes.
    origin : {"left", "mid"}
        Lower limit of the running integral.  ``left`` anchors the value 0 at
        the first trusted sample (the domain edge for unwindowed functions);
        ``mid`` anchors it at the grid midpoint, which must lie inside the
        trusted window.

    The output is monotone nondecreasing whenever ``f >= 0`` (left origin),
    because each trapezoid increment is itself nonnegative.
    """
    lo, hi = f.bounds
    seg = cumulative_trapezoid(f.trusted_values, dx=f.grid.h, initial=0.0)
    if origin == "mid":
        mid = f.grid.mid_index
        if not (lo <= mid < hi):
            raise ValueError("grid midpoint lies outside the trusted window")
        seg = seg - seg[mid - lo]
    elif origin != "left":
        raise ValueError(f"unknown integral origin {origin!r}")
    return _rebuild(f, seg)


def _integrate_seg(seg: np.ndarray, h: float) -> float:
    if seg.size % 2 == 1:
        return float(simpson(seg, dx=h))
    warnings.warn(
        QuadratureWarning(
            f"even sample count {seg.size}: whole-domain quadrature fell back "
            "to the trapezoid rule"
        ),
        stacklevel=3,
    )
    return float(trapezoid(seg, dx=h))


def integrate(f: GridFunction) -> float:
    """Whole-window quadrature: Simpson for an odd sample count, else trapezoid."""
    return _integrate_seg(f.trusted_values, f.grid.h)


def l2_norm(f: GridFunction) -> float:
    """sqrt of the quadrature of ``f**2`` over the trusted window."""
    seg = f.trusted_values
    return float(np.sqrt(_integrate_seg(seg * seg, f.grid.h)))


def window_l2(f: GridFunction, window: Window | None = None) -> float:
    """Trapezoid L2 norm over ``window`` (defaults to the trusted window).

    Used for residual bookkeeping where Simpson's odd-count requirement would
    get in the way; accuracy of the norm itself is not the point there.
    """
    lo, hi = window if window is not None else f.bounds
    seg = f.values[lo:hi]
    return float(np.sqrt(trapezoid(seg * seg, dx=f.grid.h)))


def common_window(*funcs: GridFunction) -> Window:
    """Intersection of trusted windows; raises if it has fewer than 3 points."""
    grid = funcs[0].grid
    for g in funcs[1:]:
        if g.grid != grid:
            raise ValueError("grid mismatch between functions")
    lo = max(g.bounds[0] for g in funcs)
    hi = min(g.bounds[1] for g in funcs)
    if hi - lo < 3:
        raise ValueError("trusted windows do not overlap on at least 3 points")
    return lo, hi


def fill_edges(f: GridFunction) -> GridFunction:
    """Extend a windowed function to the full grid by edge-value continuation."""
    if f.window is None:
        return f
    lo, hi = f.window
    vals = f.values.copy()
    vals[:lo] = vals[lo]
    vals[hi:] = vals[hi - 1]
    return GridFunction(f.grid, vals)


def restrict(f: GridFunction, lo: int, hi: int) -> GridFunction:
    """Restriction of ``f`` to the index range ``[lo, hi)`` as a new grid."""
    if not (0 <= lo < hi <= f.grid.n) or hi - lo < 3:
        raise ValueError(f"invalid restriction range ({lo}, {hi})")
    sub = Grid1D(float(f.grid.x[lo]), float(f.grid.x[hi - 1]), hi - lo)
    w = None
    if f.window is not None:
        wlo, whi = f.window
        w = (max(wlo, lo) - lo, min(whi, hi) - lo)
        if w[1] - w[0] < 3:
            raise ValueError("restriction leaves fewer than 3 trusted points")
    return GridFunction(sub, f.values[lo:hi], window=w)
