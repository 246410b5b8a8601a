"""SNAIL potential, flux-dependent Taylor coefficients and linear inductance.

The normalized potential of a loop with ``n`` large junctions and one small
junction of relative strength ``alpha`` is

    U(phi) = -alpha*cos(phi) - n*cos((phi - phi_ext)/n)

Its derivatives at the minimum give the dimensionless coefficients c2, c3, c4;
the effective linear inductance is L_s = L_J / c2.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import DegenerateMinimumError, NotFoundError, SolverError

TWO_PI = 2.0 * math.pi

SCAN_SAMPLES = 1000
BISECT_XTOL = 1e-14
MAX_BISECT_ITER = 200
RESIDUAL_TOL = 1e-12
# c2 below this fraction of its zero-flux value counts as a flat (quartic) minimum
DEGENERATE_C2_RTOL = 1e-9
TIE_RTOL = 1e-12


class BoundaryAsymmetryWarning(UserWarning):
    """alpha sits exactly at the 1/n limit where c2 can vanish."""


@dataclass(frozen=True)
class SnailParams:
    """Junction inductance (H), asymmetry ratio and number of large junctions."""

    l_j: float
    alpha: float
    n_large: int = 3
    at_boundary: bool = field(default=False, init=False, compare=False)

    def __post_init__(self):
        if not self.l_j > 0:
            raise ValueError(f"l_j must be positive, got {self.l_j!r}")
        if int(self.n_large) != self.n_large or self.n_large < 1:
            raise ValueError(f"n_large must be a positive integer, got {self.n_large!r}")
        limit = 1.0 / self.n_large
        if not 0 < self.alpha <= limit * (1 + 1e-12):
            raise ValueError(
                f"alpha must lie in (0, 1/n_large] = (0, {limit:.6g}], got {self.alpha!r}"
            )
        if math.isclose(self.alpha, limit, rel_tol=1e-12):
            object.__setattr__(self, "at_boundary", True)
            warnings.warn(
                f"alpha = 1/n_large = {limit:.6g} is the maximum asymmetry; "
                "c2 vanishes at half flux",
                BoundaryAsymmetryWarning,
                stacklevel=2,
            )


@dataclass(frozen=True)
class FluxBias:
    """External flux in units of the flux quantum."""

    phi_over_phi0: float

    @property
    def phi_ext(self) -> float:
        return TWO_PI * self.phi_over_phi0

    @classmethod
    def from_phase(cls, phi_ext: float) -> "FluxBias":
        return cls(phi_ext / TWO_PI)


@dataclass(frozen=True)
class FluxOperatingPoint:
    bias: FluxBias
    phi_min: float
    c2: float
    c3: float
    c4: float
    l_s: float


def potential(params: SnailParams, phi, phi_ext: float):
    n = params.n_large
    return -params.alpha * np.cos(phi) - n * np.cos((phi - phi_ext) / n)


def potential_derivative(params: SnailParams, phi, phi_ext: float, order: int):
    """k-th derivative of the normalized SNAIL potential at ``phi``.

    Works elementwise on arrays. Order 1 is the minimum condition c1 and
    order 2 the inductive coefficient c2.
    """
    a = params.alpha
    n = params.n_large
    x = (phi - phi_ext) / n
    if order == 1:
        return a * np.sin(phi) + np.sin(x)
    if order == 2:
        return a * np.cos(phi) + np.cos(x) / n
    if order == 3:
        return -a * np.sin(phi) - np.sin(x) / n**2
    if order == 4:
        return -a * np.cos(phi) - np.cos(x) / n**3
    raise ValueError(f"order must be one of 1, 2, 3, 4; got {order!r}")


def _bisect(fun, lo: float, hi: float, f_lo: float) -> tuple[float, float]:
    for _ in range(MAX_BISECT_ITER):
        mid = 0.5 * (lo + hi)
        f_mid = fun(mid)
        if f_mid == 0.0:
            return mid, 0.0
        if (f_mid < 0) == (f_lo < 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
        if hi - lo <= BISECT_XTOL:
            break
    root = 0.5 * (lo + hi)
    return root, fun(root)


def solve_phi_min(params: SnailParams, bias: FluxBias) -> float:
    """Phase at the potential minimum for the given flux bias.

    Roots of c1 are bracketed by a sign-change scan over one full period of
    the potential centred on ``phi_ext`` and refined by bisection. Of the
    minima found, the deepest one is returned; for alpha <= 1/n it is unique
    per period, so the result is the branch that passes through 0 at zero flux.
    """
    phi_ext = bias.phi_ext
    n = params.n_large

    def c1(phi):
        return float(potential_derivative(params, phi, phi_ext, 1))

    if phi_ext == 0.0:
        return 0.0

    grid = np.linspace(phi_ext - n * math.pi, phi_ext + n * math.pi, SCAN_SAMPLES + 1)
    vals = potential_derivative(params, grid, phi_ext, 1)
    candidates = []
    for i in range(SCAN_SAMPLES):
        f_a, f_b = vals[i], vals[i + 1]
        if f_a == 0.0:
            root, res = float(grid[i]), 0.0
        elif f_b != 0.0 and (f_a < 0) != (f_b < 0):
            root, res = _bisect(c1, float(grid[i]), float(grid[i + 1]), float(f_a))
        else:
            continue
        if potential_derivative(params, root, phi_ext, 2) > 0:
            candidates.append((root, res))
    if not candidates:
        raise SolverError(
            f"no minimum of the SNAIL potential found at phi_ext={phi_ext!r}",
            residual=float(np.min(np.abs(vals))),
        )
    root, res = min(candidates, key=lambda c: (float(potential(params, c[0], phi_ext)), abs(c[0])))
    if abs(res) >= RESIDUAL_TOL:
        raise SolverError(
            f"bisection stalled at phi={root!r} with residual {res:.3e}", residual=abs(res)
        )
    return root


def operating_point(params: SnailParams, bias: FluxBias) -> FluxOperatingPoint:
    phi_min = solve_phi_min(params, bias)
    phi_ext = bias.phi_ext
    c2, c3, c4 = (float(potential_derivative(params, phi_min, phi_ext, k)) for k in (2, 3, 4))
    if not c2 > DEGENERATE_C2_RTOL * (params.alpha + 1.0 / params.n_large):
        raise DegenerateMinimumError(
            f"c2 = {c2:.3e} is not a positive curvature at phi/phi0 = {bias.phi_over_phi0!r}; the inductance diverges"
        )
    return FluxOperatingPoint(bias, phi_min, c2, c3, c4, params.l_j / c2)


def bare_frequency(params: SnailParams, bias: FluxBias, c1_shunt: float) -> float:
    """Resonance frequency (Hz) of the SNAIL shunted by ``c1_shunt`` alone."""
    if not c1_shunt > 0:
        raise ValueError(f"c1_shunt must be positive, got {c1_shunt!r}")
    op = operating_point(params, bias)
    return 1.0 / (TWO_PI * math.sqrt(op.l_s * c1_shunt))


def tunable_range(
    params: SnailParams, c1_shunt: float, flux_grid: Sequence[FluxBias]
) -> tuple[float, float, list[tuple[float, float]]]:
    """Min and max bare frequency over a flux grid, plus the (flux, Hz) curve."""
    if len(flux_grid) == 0:
        raise ValueError("flux grid is empty")
    span = max(b.phi_over_phi0 for b in flux_grid) - min(b.phi_over_phi0 for b in flux_grid)
    if span > 1.0 + 1e-12:
        raise ValueError(f"flux grid spans {span:.6g} flux quanta; at most one period allowed")
    curve = [(b.phi_over_phi0, bare_frequency(params, b, c1_shunt)) for b in flux_grid]
    freqs = [f for _, f in curve]
    return min(freqs), max(freqs), curve


def find_3wm_operating_point(params: SnailParams, flux_grid: Sequence[FluxBias]) -> FluxBias:
    """Grid point with the largest |c3| among those with negative Kerr (c4 < 0).

    Ties (equal |c3| to ``TIE_RTOL``) go to the smaller |flux|, then to the
    non-negative point. A single-candidate grid returns that
    candidate even when its |c3| is zero.
    """
    if len(flux_grid) == 0:
        raise ValueError("flux grid is empty")
    scored = []
    for bias in flux_grid:
        op = operating_point(params, bias)
        if op.c4 < 0:
            scored.append((abs(op.c3), bias))
    if not scored:
        raise NotFoundError("no flux point in the grid has negative Kerr (c4 < 0)")
    top = max(s for s, _ in scored)
    # |c3| is even in flux, so mirror points tie up to rounding
    ties = [b for s, b in scored if s >= top * (1 - TIE_RTOL)]
    return min(ties, key=lambda b: (abs(b.phi_over_phi0), -b.phi_over_phi0))


def flux_for_frequency(
    params: SnailParams, c1_shunt: float, f_target: float, flux_bracket: tuple[float, float] = (0.0, 0.5)
) -> FluxBias:
    """Flux bias in ``flux_bracket`` that puts the bare resonance at ``f_target``.

    The bare frequency decreases monotonically from zero to half flux, so the
    default bracket holds exactly one solution when one exists.
    """
    lo, hi = flux_bracket

    def miss(phi):
        return bare_frequency(params, FluxBias(phi), c1_shunt) - f_target

    m_lo, m_hi = miss(lo), miss(hi)
    if m_lo * m_hi > 0:
        raise NotFoundError(
            f"{f_target / 1e9:.4g} GHz lies outside the bare tuning range "
            f"[{(min(m_lo, m_hi) + f_target) / 1e9:.4g}, {(max(m_lo, m_hi) + f_target) / 1e9:.4g}] GHz"
        )
    return FluxBias(brentq(miss, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps))
