"""Grid verification of the comparison inequalities.

Every verifier first checks the curvature hypothesis

    Ric(r) >= (n-m) * kappa(s_p(r)) * exp(-4 phi(r)/(n-m))

on its grid and refuses to issue a holds/violated verdict when the
hypothesis fails (the report then carries the failed hypothesis by name).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import DegenerateAnnulus, OutOfDomain
from .jacobi import JacobiSolution, comparison_laplacian, solve_jacobi
from .manifolds import WeightedModel, _adaptive_integral, _cumulative_gauss, unit_sphere_area
from .profiles import CurvatureProfile

HOLDS = "holds"
VIOLATED = "violated"
NOT_APPLICABLE = "not_applicable"

_DEFAULT_TOL = 1e-8     # closed-form quantities
_FD_TOL = 1e-4          # where finite differences enter
_SOLVE_TOL = 1e-10


@dataclass(frozen=True)
class ComparisonReport:
    """Per-grid-point evaluation of one inequality, lhs <= rhs."""

    inequality_id: str
    grid: np.ndarray = field(repr=False)
    lhs: np.ndarray = field(repr=False)
    rhs: np.ndarray = field(repr=False)
    margin: np.ndarray = field(repr=False)
    tolerance: float
    verdict: str
    worst_index: int | None = None
    reason: str = ""
    s_values: np.ndarray | None = field(default=None, repr=False)
    extras: dict = field(default_factory=dict, repr=False)

    @property
    def worst_margin(self) -> float:
        return float(self.margin[self.worst_index]) if self.worst_index is not None else math.nan

    @property
    def worst_point(self) -> float:
        return float(self.grid[self.worst_index]) if self.worst_index is not None else math.nan

    def summary(self) -> str:
        if self.verdict == NOT_APPLICABLE:
            return f"{self.inequality_id}: not applicable ({self.reason})"
        return (
            f"{self.inequality_id}: {self.verdict} "
            f"(worst margin {self.worst_margin:.3e} at {self.worst_point:.6g}, "
            f"tolerance {self.tolerance:g})"
        )


def _finish(inequality_id, grid, lhs, rhs, tolerance, s_values=None, extras=None,
            normalize: bool = False) -> ComparisonReport:
    lhs = np.asarray(lhs, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    margin = rhs - lhs
    if normalize:
        margin = margin / (1.0 + np.abs(lhs) + np.abs(rhs))
    worst = int(np.argmin(margin))
    verdict = HOLDS if margin[worst] >= -tolerance else VIOLATED
    reason = "" if verdict == HOLDS else f"margin {margin[worst]:.3e} at grid point {grid[worst]:.6g}"
    return ComparisonReport(
        inequality_id=inequality_id, grid=np.asarray(grid, dtype=float),
        lhs=lhs, rhs=rhs, margin=margin, tolerance=tolerance,
        verdict=verdict, worst_index=worst, reason=reason,
        s_values=None if s_values is None else np.asarray(s_values, dtype=float),
        extras=extras or {},
    )


def _not_applicable(inequality_id, grid, tolerance, reason) -> ComparisonReport:
    empty = np.array([])
    return ComparisonReport(
        inequality_id=inequality_id, grid=np.asarray(grid, dtype=float),
        lhs=empty, rhs=empty, margin=empty, tolerance=tolerance,
        verdict=NOT_APPLICABLE, worst_index=None, reason=reason,
    )


def make_grid(r_eval: float, n_points: int = 256, floor_factor: float = 1e-6) -> np.ndarray:
    """Geometric grid on (0, r_eval], dense near the pole."""
    return np.geomspace(floor_factor * r_eval, r_eval, n_points)


def _grid_for(model: WeightedModel, r_grid) -> np.ndarray:
    if r_grid is not None:
        return np.asarray(r_grid, dtype=float)
    r_eval = model.radius * (1 - 1e-9) if math.isfinite(model.radius) else 3.0
    return make_grid(r_eval)


def _s_on_grid(model: WeightedModel, grid: np.ndarray) -> np.ndarray:
    return _cumulative_gauss(model.reparam_weight, grid)


def _cd_deficit(model: WeightedModel, kappa: CurvatureProfile, grid, s_values):
    """Pointwise slack of the curvature hypothesis; negative where it fails."""
    ric = np.asarray(model.bakry_emery_ricci(grid), dtype=float)
    bound = model.nm * np.asarray(kappa(s_values), dtype=float) * np.exp(
        -4.0 * np.asarray(model.phi(grid)) / model.nm
    )
    scale = 1.0 + np.abs(ric) + np.abs(bound)
    return (ric - bound) / scale


def check_curvature_hypothesis(model, kappa, grid, s_values, tol: float = 1e-9):
    """Returns (ok, reason) for the lower-bound hypothesis on the grid."""
    deficit = _cd_deficit(model, kappa, grid, s_values)
    bad = np.nonzero(deficit < -tol)[0]
    if bad.size:
        i = bad[np.argmin(deficit[bad])]
        return False, (
            f"curvature hypothesis fails at r={grid[i]:.6g} "
            f"(relative deficit {deficit[i]:.3e})"
        )
    return True, ""


def _solve_for(kappa: CurvatureProfile, s_needed: float, solve_tol: float) -> JacobiSolution:
    return solve_jacobi(kappa, s_max=s_needed * (1 + 1e-9) + 1e-12, tol=solve_tol)


def fit_curvature_bound(model: WeightedModel, r_grid=None) -> CurvatureProfile:
    """Pointwise-largest admissible curvature profile in the s variable.

    kappa(s_p(r)) = Ric(r) * exp(4 phi(r)/(n-m)) / (n-m).
    """
    grid = _grid_for(model, r_grid)
    s = _s_on_grid(model, grid)
    kappa_vals = (
        np.asarray(model.bakry_emery_ricci(grid), dtype=float)
        * np.exp(4.0 * np.asarray(model.phi(grid)) / model.nm)
        / model.nm
    )
    return CurvatureProfile.from_samples(s, kappa_vals, label=f"fitted({model.name or 'model'})")


def fit_growth_envelope(model: WeightedModel, r_grid=None) -> CurvatureProfile:
    """Smallest non-negative non-decreasing growth profile compatible with the model.

    In the s variable this is the running maximum from the left of
    max(0, -(n-m) * kappa_fit), the tightest profile usable by the
    curvature-growth integral criteria.
    """
    grid = _grid_for(model, r_grid)
    s = _s_on_grid(model, grid)
    neg = -(
        np.asarray(model.bakry_emery_ricci(grid), dtype=float)
        * np.exp(4.0 * np.asarray(model.phi(grid)) / model.nm)
    )
    envelope = np.maximum.accumulate(np.maximum(neg, 0.0))
    return CurvatureProfile.from_samples(s, envelope, label=f"growth-envelope({model.name or 'model'})")


def verify_laplacian_comparison(
    model: WeightedModel,
    kappa: CurvatureProfile,
    r_grid=None,
    *,
    tolerance: float = _DEFAULT_TOL,
    solve_tol: float = _SOLVE_TOL,
) -> ComparisonReport:
    """L r_p <= exp(-2 phi/(n-m)) * (n-m) * y'/y (s_p), evaluated on the grid."""
    iid = "laplacian_comparison"
    grid = _grid_for(model, r_grid)
    s = _s_on_grid(model, grid)
    ok, reason = check_curvature_hypothesis(model, kappa, grid, s)
    if not ok:
        return _not_applicable(iid, grid, tolerance, reason)
    sol = _solve_for(kappa, s[-1], solve_tol)
    if sol.zero_found and s[-1] >= sol.conjugate_radius:
        return _not_applicable(
            iid, grid, tolerance,
            f"reparametrized distance {s[-1]:.6g} reaches the conjugate radius "
            f"{sol.conjugate_radius:.6g}",
        )
    lhs = np.asarray(model.radial_laplacian(grid), dtype=float)
    rhs = np.exp(-2.0 * np.asarray(model.phi(grid)) / model.nm) * comparison_laplacian(
        sol, s, model.n, model.m
    )
    return _finish(iid, grid, lhs, rhs, tolerance, s_values=s)


def verify_riccati_inequality(
    model: WeightedModel,
    r_grid=None,
    *,
    tolerance: float = _FD_TOL,
) -> ComparisonReport:
    """Differential inequality for lambda = exp(2 phi/(n-m)) L r_p in the s variable.

    d lambda/ds <= -lambda^2/(n-m) - exp(4 phi/(n-m)) Ric, with the left side
    obtained by the chain rule from a five-point stencil in r (step 1e-3 * r).
    Margins are normalized by 1 + |lhs| + |rhs|: both sides blow up like
    1/r^2 at the pole, where an absolute finite-difference tolerance would
    be meaningless.
    """
    iid = "riccati_inequality"
    grid = _grid_for(model, r_grid)
    interior = grid[1:-1]
    h = 1e-3 * interior
    lam = model.rescaled_laplacian
    dlam_dr = (
        -lam(interior + 2 * h) + 8 * lam(interior + h)
        - 8 * lam(interior - h) + lam(interior - 2 * h)
    ) / (12 * h)
    phi = np.asarray(model.phi(interior))
    dlam_ds = np.exp(2.0 * phi / model.nm) * dlam_dr
    lam_val = np.asarray(lam(interior), dtype=float)
    ric = np.asarray(model.bakry_emery_ricci(interior), dtype=float)
    rhs = -lam_val**2 / model.nm - np.exp(4.0 * phi / model.nm) * ric
    s = _s_on_grid(model, grid)[1:-1]
    return _finish(iid, interior, dlam_ds, rhs, tolerance, s_values=s, normalize=True)


def verify_volume_element_monotonicity(
    model: WeightedModel,
    kappa: CurvatureProfile,
    r_0: float,
    r_1: float,
    *,
    n_points: int = 100,
    tolerance: float = _DEFAULT_TOL,
    solve_tol: float = _SOLVE_TOL,
) -> ComparisonReport:
    """r -> J_phi(r) / y(s_p(r))^(n-m) is non-increasing on [r_0, r_1].

    The report also carries the worst pairwise ratio margin, the weaker form
    J(r_b)/J(r_a) <= (y(s_b)/y(s_a))^(n-m) over all grid pairs.
    """
    iid = "volume_element_comparison"
    if not 0 < r_0 < r_1 < model.radius * (1 + 1e-12):
        raise OutOfDomain("need 0 < r_0 < r_1 <= R")
    grid = np.linspace(r_0, r_1, n_points)
    s = _s_on_grid(model, grid)
    ok, reason = check_curvature_hypothesis(model, kappa, grid, s)
    if not ok:
        return _not_applicable(iid, grid, tolerance, reason)
    sol = _solve_for(kappa, s[-1], solve_tol)
    if sol.zero_found and s[-1] >= sol.conjugate_radius:
        return _not_applicable(
            iid, grid, tolerance,
            f"reparametrized distance reaches the conjugate radius {sol.conjugate_radius:.6g}",
        )
    ratio = np.asarray(model.density(grid), dtype=float) / sol.value(s) ** model.nm
    # monotone form: consecutive differences; pairwise worst goes to extras
    lhs = ratio[1:]
    rhs = ratio[:-1]
    running_min = np.minimum.accumulate(ratio)
    pairwise_worst = float(np.min(running_min[:-1] - ratio[1:]))
    report = _finish(iid, grid[1:], lhs, rhs, tolerance, s_values=s[1:],
                     extras={"pairwise_min_margin": pairwise_worst, "ratio_at_r0": float(ratio[0])})
    return report


def _model_nu(model: WeightedModel, sol: JacobiSolution, s_of_r, a: float, b: float) -> float:
    """omega_{n-1} * int_a^b y(s_p(r))^(n-m) dr."""
    nm = model.nm

    def integrand(r):
        return float(sol.value(float(s_of_r(r)))) ** nm

    return unit_sphere_area(model.n) * _adaptive_integral(integrand, a, b)


def verify_bishop_gromov(
    model: WeightedModel,
    kappa: CurvatureProfile,
    r_0: float,
    r_a: float,
    r_b: float,
    r_1: float,
    *,
    tolerance: float = _DEFAULT_TOL,
    solve_tol: float = _SOLVE_TOL,
) -> ComparisonReport:
    """Annulus volume ratio against the model ratio:

    mu(A(r_b, r_1)) / mu(A(r_0, r_a)) <= nu(r_b, r_1) / nu(r_0, r_a).
    """
    iid = "bishop_gromov"
    if not (0 <= r_0 < r_a <= r_1 and 0 <= r_0 <= r_b < r_1):
        raise OutOfDomain("need 0 <= r_0 < r_a <= r_1 and 0 <= r_0 <= r_b < r_1")
    if not r_1 < model.radius * (1 + 1e-12):
        raise OutOfDomain("need r_1 <= R")
    grid = make_grid(r_1)
    s = _s_on_grid(model, grid)
    ok, reason = check_curvature_hypothesis(model, kappa, grid, s)
    if not ok:
        return _not_applicable(iid, np.array([r_1]), tolerance, reason)
    sol = _solve_for(kappa, s[-1], solve_tol)
    if sol.zero_found and s[-1] >= sol.conjugate_radius:
        return _not_applicable(
            iid, np.array([r_1]), tolerance,
            f"reparametrized distance reaches the conjugate radius {sol.conjugate_radius:.6g}",
        )
    cache = model.radial_cache(r_1, n_points=1024)
    mu_hi = model.ball_volume(r_1) - model.ball_volume(r_b)
    mu_lo = model.ball_volume(r_a) - model.ball_volume(r_0)
    if mu_lo <= 0 or mu_hi <= 0:
        raise DegenerateAnnulus("annulus has zero weighted measure")
    nu_hi = _model_nu(model, sol, cache.s_of_r, r_b, r_1)
    nu_lo = _model_nu(model, sol, cache.s_of_r, r_0, r_a)
    if nu_lo <= 0 or nu_hi <= 0:
        raise DegenerateAnnulus("model annulus has zero measure")
    # margins on the normalized ratio so equality cases sit at 1 vs 1
    normalized = (mu_hi / mu_lo) / (nu_hi / nu_lo)
    return _finish(iid, np.array([r_1]), np.array([normalized]),
                   np.array([1.0]), tolerance,
                   extras={"radii": (r_0, r_a, r_b, r_1),
                           "measure_ratio": mu_hi / mu_lo, "model_ratio": nu_hi / nu_lo})


def bishop_gromov_sweep(
    model: WeightedModel,
    kappa: CurvatureProfile,
    r_grid=None,
    *,
    tolerance: float = _DEFAULT_TOL,
    solve_tol: float = _SOLVE_TOL,
) -> ComparisonReport:
    """Ball-ratio form of the annulus comparison swept along the grid.

    Anchors at the first quartile point a and reports, for every grid point
    r > a, the margin of mu(B_r)/mu(B_a) <= nu(0, r)/nu(0, a).
    """
    iid = "bishop_gromov"
    grid = _grid_for(model, r_grid)
    s = _s_on_grid(model, grid)
    ok, reason = check_curvature_hypothesis(model, kappa, grid, s)
    if not ok:
        return _not_applicable(iid, grid, tolerance, reason)
    sol = _solve_for(kappa, s[-1], solve_tol)
    if sol.zero_found and s[-1] >= sol.conjugate_radius:
        return _not_applicable(
            iid, grid, tolerance,
            f"reparametrized distance reaches the conjugate radius {sol.conjugate_radius:.6g}",
        )
    anchor = len(grid) // 4
    r_a = grid[anchor]
    nu_vals = unit_sphere_area(model.n) * _cumulative_gauss(
        lambda r: np.asarray(sol.value(_cumulative_interp(model, grid, s, r))) ** model.nm, grid
    )
    mu_vals = unit_sphere_area(model.n) * _cumulative_gauss(model.density, grid)
    sel = np.arange(anchor + 1, len(grid))
    normalized = (mu_vals[sel] / mu_vals[anchor]) / (nu_vals[sel] / nu_vals[anchor])
    return _finish(iid, grid[sel], normalized, np.ones_like(normalized), tolerance,
                   s_values=s[sel], extras={"anchor_radius": float(r_a)})


def _cumulative_interp(model, grid, s, r):
    """s_p at arbitrary points via the precomputed grid (linear below floor)."""
    r_arr = np.asarray(r, dtype=float)
    out = np.interp(r_arr, grid, s, left=np.nan, right=np.nan)
    below = r_arr < grid[0]
    out = np.where(below, r_arr * (s[0] / grid[0]), out)
    return out


def verify_volume_growth(
    model: WeightedModel,
    growth,
    r_1: float,
    r_2: float,
    *,
    tolerance: float = _DEFAULT_TOL,
) -> ComparisonReport:
    """Ball growth bound with the explicit exponential correction:

    mu(B_{r2})/mu(B_{r1}) <= exp(2(phi_hi(r1) - phi_lo(r2)))
                             * (r2/r1)^(n-m+1)
                             * exp(sqrt((n-m) G(T)) * T),

    where T = exp(-2 phi_lo(r2)/(n-m)) * r2 and G is the growth profile.
    """
    iid = "volume_growth_bound"
    if not 0 < r_1 < r_2 < model.radius * (1 + 1e-12):
        raise OutOfDomain("need 0 < r_1 < r_2 <= R")
    if not isinstance(growth, CurvatureProfile):
        growth = CurvatureProfile.constant(float(growth))
    grid = make_grid(r_2)
    s = _s_on_grid(model, grid)
    neg_kappa = CurvatureProfile.numeric(lambda x: -np.asarray(growth(x)) / model.nm,
                                         label=f"-({growth.label})/(n-m)")
    ok, reason = check_curvature_hypothesis(model, neg_kappa, grid, s)
    if not ok:
        return _not_applicable(iid, np.array([r_2]), tolerance, reason)
    nm = model.nm
    phi_hi_1 = float(model.phi_upper(r_1))
    phi_lo_2 = float(model.phi_lower(r_2))
    t_arg = math.exp(-2.0 * phi_lo_2 / nm) * r_2
    g_val = float(growth(t_arg))
    lhs = model.ball_volume(r_2) / model.ball_volume(r_1)
    rhs = (
        math.exp(2.0 * (phi_hi_1 - phi_lo_2))
        * (r_2 / r_1) ** (nm + 1.0)
        * math.exp(math.sqrt(nm * max(g_val, 0.0)) * t_arg)
    )
    return _finish(iid, np.array([r_2]), np.array([lhs]), np.array([rhs]), tolerance,
                   extras={"r_1": r_1, "r_2": r_2, "T": t_arg, "growth_at_T": g_val})


@dataclass(frozen=True)
class MyersReport:
    """Diameter diagnostic in the reparametrized variable."""

    s_sup: float
    conjugate_radius: float
    bound_radius: float | None
    verdict: str
    reason: str = ""

    def summary(self) -> str:
        if self.verdict == NOT_APPLICABLE:
            return f"myers_diagnostic: not applicable ({self.reason})"
        extra = "" if self.bound_radius is None else f", compactness radius {self.bound_radius:.6g}"
        return (
            f"myers_diagnostic: {self.verdict} (s_sup {self.s_sup:.9g} vs conjugate "
            f"radius {self.conjugate_radius:.9g}{extra})"
        )


def myers_diagnostic(
    model: WeightedModel,
    kappa: CurvatureProfile,
    *,
    tolerance: float = 1e-6,
    solve_tol: float = _SOLVE_TOL,
) -> MyersReport:
    """Check sup s_p <= conjugate radius of the comparison profile.

    Needs the curvature hypothesis on all of (0, R) and a finite conjugate
    radius; otherwise the verdict is not applicable.
    """
    r_top = model.radius * (1 - 1e-12) if math.isfinite(model.radius) else 3.0
    grid = make_grid(r_top)
    s = _s_on_grid(model, grid)
    ok, reason = check_curvature_hypothesis(model, kappa, grid, s)
    if not ok:
        return MyersReport(math.nan, math.nan, None, NOT_APPLICABLE, reason)
    s_sup = _s_sup(model)
    horizon = max(20.0, 2.0 * s_sup if math.isfinite(s_sup) else 50.0)
    sol = solve_jacobi(kappa, s_max=horizon, tol=solve_tol)
    if not sol.zero_found:
        return MyersReport(
            s_sup, math.inf, None, NOT_APPLICABLE,
            f"no finite conjugate radius below horizon {horizon:g}",
        )
    delta = sol.conjugate_radius
    verdict = HOLDS if s_sup <= delta + tolerance else VIOLATED
    bound_radius = None
    if math.isfinite(s_sup) and s_sup >= delta - tolerance:
        bound_radius = _invert_s(model, delta, s_sup)
    return MyersReport(s_sup, delta, bound_radius, verdict)


def _s_sup(model: WeightedModel) -> float:
    if math.isfinite(model.radius):
        return model.reparametrized_distance(model.radius * (1 - 1e-12))
    previous = model.reparametrized_distance(1.0)
    for k in range(1, 41):
        current = model.reparametrized_distance(2.0**k)
        if current - previous < 1e-9 * max(1.0, current):
            return current
        previous = current
    return math.inf


def _invert_s(model: WeightedModel, delta: float, s_sup: float) -> float:
    r_hi = model.radius * (1 - 1e-12) if math.isfinite(model.radius) else None
    if r_hi is None:
        r_hi = 1.0
        while model.reparametrized_distance(r_hi) < delta and r_hi < 2.0**40:
            r_hi *= 2.0
    if s_sup <= delta:
        return r_hi
    return brentq(lambda r: model.reparametrized_distance(r) - delta, 1e-9 * r_hi, r_hi,
                  xtol=1e-12, rtol=8e-16)


def verify_euclidean_hessian(
    n: int,
    m: float,
    bound_constant: float,
    radii,
    potential=None,
    *,
    tolerance: float = 1e-9,
) -> ComparisonReport:
    """Positivity of Hess(e^{phi/(n-m)}) + (K/(n-m)) e^{-3 phi/(n-m)} Id on R^n.

    For a radial potential the matrix has a radial eigenvalue and an
    (n-1)-fold tangential eigenvalue, both in closed form; the report margin
    at each radius is the smaller of the two.
    """
    iid = "euclidean_hessian_bound"
    nm = n - m
    if potential is None:
        from .profiles import Potential

        potential = Potential.log_power(-nm / 4.0, 2.0)
    rho = np.asarray(radii, dtype=float)
    radial_eig, tangential_eig = _hessian_eigenvalues(nm, bound_constant, potential, rho)
    min_eig = np.minimum(radial_eig, tangential_eig)
    return _finish(iid, rho, np.zeros_like(rho), min_eig, tolerance,
                   extras={"radial_eigenvalue": radial_eig, "tangential_eigenvalue": tangential_eig,
                           "bound_constant": float(bound_constant)})


def _hessian_eigenvalues(nm: float, bound_constant: float, potential, rho: np.ndarray):
    phi = np.asarray(potential.value(rho), dtype=float)
    d1 = np.asarray(potential.d1(rho), dtype=float)
    d2 = np.asarray(potential.d2(rho), dtype=float)
    g = np.exp(phi / nm)
    g_dd = g * (d2 / nm + (d1 / nm) ** 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        tangential_base = np.where(rho > 0, g * d1 / (nm * rho), g_dd)
    shift = (bound_constant / nm) * g**-3.0
    return g_dd + shift, tangential_base + shift


def minimal_hessian_constant(n: int, m: float, radii, potential=None) -> float:
    """Smallest K making the Hessian bound hold on the given radii (closed form)."""
    nm = n - m
    if potential is None:
        from .profiles import Potential

        potential = Potential.log_power(-nm / 4.0, 2.0)
    rho = np.asarray(radii, dtype=float)
    radial_eig, tangential_eig = _hessian_eigenvalues(nm, 0.0, potential, rho)
    phi = np.asarray(potential.value(rho), dtype=float)
    g = np.exp(phi / nm)
    requirement = np.maximum(-radial_eig, -tangential_eig) * nm * g**3.0
    return float(np.max(np.maximum(requirement, 0.0)))
