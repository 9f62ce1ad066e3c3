"""Comparison ODE solver.

Solves the Jacobi equation

    y''(s) + kappa(s) * y(s) = 0,   y(0) = 0,  y'(0) = 1,

whose solution y and logarithmic derivative y'/y drive every comparison
inequality in the package.  The initial condition is singular for the
logarithmic derivative, so integration starts at s = eps from the series
seed y(eps) = eps - kappa(0) eps^3/6, y'(eps) = 1 - kappa(0) eps^2/2,
bounding startup error at O(eps^4).  Below ``_SERIES_SWITCH`` evaluation
uses the series expansion directly, which keeps the logarithmic derivative
accurate where it blows up like 1/s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq

from .errors import NonFiniteCurvature, OutOfDomain, StepUnderflow
from .profiles import CurvatureProfile

_SERIES_SWITCH = 0.01
_ZERO_BISECT_TOL = 1e-10
_GRAZING_TOL = 1e-12


@dataclass(frozen=True)
class JacobiSolution:
    """Sampled solution of the Jacobi equation plus its first conjugate point.

    ``conjugate_radius`` is the first positive zero of the solution (+inf
    when no zero exists up to ``s_end``; ``zero_found`` distinguishes "no
    zero at all" from "none located below the solve horizon").
    """

    profile: CurvatureProfile
    s: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    derivatives: np.ndarray = field(repr=False)
    conjugate_radius: float
    zero_found: bool
    s_end: float
    kappa0: float
    tol: float
    _value_interp: CubicHermiteSpline = field(repr=False, default=None)
    _deriv_interp: CubicHermiteSpline = field(repr=False, default=None)

    def __post_init__(self):
        # Hermite data is exact: y' is sampled and y'' = -kappa * y by the equation,
        # so both interpolants are O(h^4) with machine-level constants.
        second = -np.asarray(self.profile(self.s), dtype=float) * self.values
        object.__setattr__(
            self, "_value_interp", CubicHermiteSpline(self.s, self.values, self.derivatives)
        )
        object.__setattr__(
            self, "_deriv_interp", CubicHermiteSpline(self.s, self.derivatives, second)
        )

    def describe_conjugate_radius(self) -> str:
        if self.zero_found:
            return f"{self.conjugate_radius:.12g}"
        return f"> {self.s_end:g}"

    def _series_value(self, s):
        k0 = self.kappa0
        return s * (1.0 - k0 * s**2 / 6.0 + k0**2 * s**4 / 120.0)

    def _series_derivative(self, s):
        k0 = self.kappa0
        return 1.0 - k0 * s**2 / 2.0 + k0**2 * s**4 / 24.0

    def value(self, s):
        """y(s), valid on (0, s_end]."""
        s_arr = np.asarray(s, dtype=float)
        out = np.where(
            s_arr < _SERIES_SWITCH,
            self._series_value(s_arr),
            self._value_interp(np.clip(s_arr, self.s[0], self.s[-1])),
        )
        return float(out) if np.ndim(s) == 0 else out

    def derivative(self, s):
        s_arr = np.asarray(s, dtype=float)
        out = np.where(
            s_arr < _SERIES_SWITCH,
            self._series_derivative(s_arr),
            self._deriv_interp(np.clip(s_arr, self.s[0], self.s[-1])),
        )
        return float(out) if np.ndim(s) == 0 else out


def solve_jacobi(profile: CurvatureProfile, s_max: float, tol: float = 1e-9) -> JacobiSolution:
    """Integrate the Jacobi equation on (0, s_max] and locate the first zero.

    The integrator is the embedded RK45 pair with dense output; the first
    zero is bracketed on the sample grid and refined by bisection to
    1e-10 absolute.  A grazing zero (local minimum with |y| below 1e-12)
    counts as a zero.
    """
    if not s_max > 0:
        raise ValueError("s_max must be positive")
    if not 0 < tol <= 1e-3:
        raise ValueError("tol must lie in (0, 1e-3]")

    check_grid = np.linspace(0.0, s_max, 513)
    profile.check_finite(check_grid)

    kappa0 = float(profile(0.0))
    eps = 1e-6 * max(1.0, s_max)
    y0 = (eps - kappa0 * eps**3 / 6.0, 1.0 - kappa0 * eps**2 / 2.0)

    def rhs(s, y):
        return (y[1], -profile(s) * y[0])

    result = solve_ivp(
        rhs, (eps, s_max), y0, method="RK45",
        rtol=tol, atol=tol * 1e-4 * max(1.0, s_max), dense_output=True,
    )
    if not result.success:
        raise StepUnderflow(f"integrator failed: {result.message}")

    nodes = np.union1d(
        np.geomspace(eps, s_max, 2049),
        np.linspace(eps, s_max, 2049),
    )
    dense = result.sol(nodes)
    values, derivatives = dense[0], dense[1]
    if not (np.all(np.isfinite(values)) and np.all(np.isfinite(derivatives))):
        raise StepUnderflow("integrator produced non-finite samples")

    conjugate, found = _first_zero(result.sol, nodes, values)
    return JacobiSolution(
        profile=profile, s=nodes, values=values, derivatives=derivatives,
        conjugate_radius=conjugate, zero_found=found,
        s_end=s_max, kappa0=kappa0, tol=tol,
    )


def _first_zero(dense_sol, nodes: np.ndarray, values: np.ndarray) -> tuple[float, bool]:
    sign_change = np.nonzero((values[:-1] > 0) & (values[1:] <= 0))[0]
    if sign_change.size:
        i = sign_change[0]
        if values[i + 1] == 0.0:
            return float(nodes[i + 1]), True
        root = brentq(lambda s: dense_sol(s)[0], nodes[i], nodes[i + 1],
                      xtol=_ZERO_BISECT_TOL, rtol=1e-15)
        return float(root), True
    # grazing zero: interior local minimum that touches zero
    interior = slice(1, -1)
    is_min = (values[interior] <= values[:-2]) & (values[interior] <= values[2:])
    graze = np.nonzero(is_min & (np.abs(values[interior]) < _GRAZING_TOL))[0]
    if graze.size:
        return float(nodes[graze[0] + 1]), True
    return math.inf, False


def log_derivative(sol: JacobiSolution, s) -> float | np.ndarray:
    """y'(s)/y(s); blows up like +1/s at 0 and to -inf at the conjugate radius."""
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr <= 0.0) or np.any(s_arr >= sol.conjugate_radius) or np.any(s_arr > sol.s_end):
        raise OutOfDomain(
            f"s must lie in (0, {min(sol.conjugate_radius, sol.s_end):g}), got {s!r}"
        )
    small = s_arr < _SERIES_SWITCH
    k0 = sol.kappa0
    series = np.where(s_arr > 0, 1.0 / np.where(small, s_arr, 1.0) - k0 * s_arr / 3.0
                      - k0**2 * s_arr**3 / 45.0, np.inf)
    out = np.where(small, series, _safe_ratio(sol, s_arr))
    return float(out) if np.ndim(s) == 0 else out


def _safe_ratio(sol: JacobiSolution, s_arr: np.ndarray) -> np.ndarray:
    clipped = np.clip(s_arr, sol.s[0], sol.s[-1])
    return sol._deriv_interp(clipped) / sol._value_interp(clipped)


def comparison_laplacian(sol: JacobiSolution, s, n: int, m: float) -> float | np.ndarray:
    """(n - m) * y'(s)/y(s): the model value of the rescaled weighted Laplacian."""
    if m > 1:
        raise ValueError("requires m <= 1")
    if not n > m:
        raise ValueError("requires n > m")
    return (n - m) * log_derivative(sol, s)


def riccati_residual(sol: JacobiSolution, s_grid: np.ndarray) -> np.ndarray:
    """|a' + kappa + a^2| / (1 + a^2) for a = y'/y, via five-point differences.

    The residual is relative to 1 + a^2 so the pole at s = 0 does not
    dominate; stencil width scales with s.
    """
    s = np.asarray(s_grid, dtype=float)
    h = 0.01 * s
    a = log_derivative(sol, s)
    stencil = (
        -log_derivative(sol, s + 2 * h) + 8 * log_derivative(sol, s + h)
        - 8 * log_derivative(sol, s - h) + log_derivative(sol, s - 2 * h)
    ) / (12 * h)
    kappa = np.asarray(sol.profile(s), dtype=float)
    return np.abs(stencil + kappa + a**2) / (1.0 + a**2)
