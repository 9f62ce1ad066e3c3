"""Rotationally symmetric weighted model manifolds.

A model is the metric dr^2 + f(r)^2 g_{S^{n-1}} on (0, R) together with a
radial potential phi, the drift operator acting on radial functions as
u'' + ((n-1) f'/f - phi') u', and the weighted measure with radial density
exp(-phi(r)) f(r)^{n-1}.  Everything the comparison theorems quantify over
(reparametrized distance, curvature in the radial direction, ball volumes,
running potential extrema) is computed here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import quad
from scipy.interpolate import PchipInterpolator
from scipy.special import gamma as _gamma

from .errors import FiniteRadius, OutOfDomain, PoleSingularity, QuadratureFailure
from .profiles import Potential, Warp

_GL_NODES, _GL_WEIGHTS = leggauss(21)


def unit_sphere_area(n: int) -> float:
    """Surface area of the unit sphere S^{n-1} in R^n."""
    return 2.0 * math.pi ** (n / 2.0) / _gamma(n / 2.0)


def _adaptive_integral(fn, lo: float, hi: float, rtol: float = 1e-9) -> float:
    if hi <= lo:
        return 0.0
    out = quad(fn, lo, hi, epsabs=0.0, epsrel=rtol, limit=200, full_output=1)
    value, abserr = out[0], out[1]
    if len(out) > 3:
        raise QuadratureFailure(f"quadrature on [{lo:g}, {hi:g}]: {out[3]}")
    if abserr > 1e3 * rtol * max(abs(value), 1e-300):
        raise QuadratureFailure(
            f"quadrature on [{lo:g}, {hi:g}] reached error {abserr:g} for value {value:g}"
        )
    return value


class _CumulativeIntegral:
    """Incremental adaptive quadrature of r -> int_0^r fn, cached at knots."""

    def __init__(self, fn, rtol: float = 1e-9):
        self._fn = fn
        self._rtol = rtol
        self._knots = [0.0]
        self._values = [0.0]

    def __call__(self, r: float) -> float:
        r = float(r)
        if r < 0:
            raise OutOfDomain("radius must be non-negative")
        if r == 0.0:
            return 0.0
        if r > self._knots[-1]:
            base_knot, base_val = self._knots[-1], self._values[-1]
            value = base_val + _adaptive_integral(self._fn, base_knot, r, self._rtol)
            self._knots.append(r)
            self._values.append(value)
            return value
        i = np.searchsorted(self._knots, r, side="right") - 1
        return self._values[i] + _adaptive_integral(self._fn, self._knots[i], r, self._rtol)


def _cumulative_gauss(fn, edges: np.ndarray) -> np.ndarray:
    """int_0^{edges[i]} fn by composite 21-point Gauss-Legendre segments."""
    lo = np.concatenate(([0.0], edges[:-1]))
    half = 0.5 * (edges - lo)
    mid = 0.5 * (edges + lo)
    pts = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    segments = (fn(pts) * _GL_WEIGHTS[None, :]).sum(axis=1) * half
    return np.cumsum(segments)


@dataclass(frozen=True)
class WeightedModel:
    """A weighted rotationally symmetric model manifold around its pole."""

    n: int
    m: float
    warp: Warp
    potential: Potential
    radius: float | None = None
    name: str = ""
    _caches: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError("dimension n must be an integer >= 2")
        object.__setattr__(self, "n", int(self.n))
        if not self.m <= 1.0:
            raise ValueError("requires m <= 1")
        if self.radius is None:
            object.__setattr__(self, "radius", self.warp.max_radius)
        if not 0.0 < self.radius <= self.warp.max_radius:
            raise ValueError(
                f"radius must lie in (0, {self.warp.max_radius:g}] for this warp"
            )
        self._validate_pole()

    def _validate_pole(self):
        h = 1e-7
        f_h = float(self.warp.value(h))
        if not math.isclose(f_h / h, 1.0, rel_tol=1e-4):
            raise ValueError("warp must satisfy f(0) = 0, f'(0) = 1")
        probe_hi = min(self.radius, 30.0)
        probe = np.geomspace(1e-6, probe_hi * (1 - 1e-9), 64)
        if np.any(self.warp.value(probe) <= 0):
            raise ValueError("warp must be positive on (0, R)")
        phi_probe = np.concatenate(([0.0], probe))
        for arr in (self.potential.value(phi_probe),
                    self.potential.d1(probe), self.potential.d2(probe)):
            if not np.all(np.isfinite(arr)):
                raise ValueError("potential and its derivatives must be finite on (0, R)")

    # -- basic quantities -------------------------------------------------

    @property
    def nm(self) -> float:
        """The positive gap n - m."""
        return self.n - self.m

    def _check_radius(self, r, *, allow_boundary: bool = False):
        arr = np.asarray(r, dtype=float)
        if np.any(arr < 1e-12):
            raise PoleSingularity(f"radius below the evaluation floor: {r!r}")
        hi = self.radius if allow_boundary else self.radius * (1 - 1e-15)
        if np.any(arr > hi):
            raise OutOfDomain(f"radius beyond the model boundary {self.radius:g}: {r!r}")

    def phi(self, r):
        return self.potential.value(r)

    def reparam_weight(self, r):
        """The integrand exp(-2 phi / (n-m)) of the reparametrized distance."""
        r = np.asarray(r, dtype=float)
        return np.exp(-2.0 * self.potential.value(r) / self.nm)

    def density(self, r):
        """Radial density exp(-phi(r)) f(r)^{n-1} of the weighted measure."""
        r = np.asarray(r, dtype=float)
        return np.exp(-self.potential.value(r)) * self.warp.value(r) ** (self.n - 1)

    def reparametrized_distance(self, r) -> float:
        """s_p(r) = int_0^r exp(-2 phi / (n-m)), adaptive quadrature to 1e-9."""
        if np.ndim(r) != 0:
            return np.array([self.reparametrized_distance(x) for x in np.asarray(r)])
        r = float(r)
        if not 0.0 <= r < self.radius * (1 + 1e-15):
            raise OutOfDomain(f"need 0 <= r <= R, got {r!r}")
        return self._cumulative("s")(r)

    def ball_volume(self, r) -> float:
        """Weighted volume of the ball of radius r around the pole."""
        if np.ndim(r) != 0:
            return np.array([self.ball_volume(x) for x in np.asarray(r)])
        if r == 0.0:
            return 0.0
        self._check_radius(r, allow_boundary=True)
        return unit_sphere_area(self.n) * self._cumulative("vol")(float(r))

    def radial_laplacian(self, r):
        """L r_p = (n-1) f'(r)/f(r) - phi'(r)."""
        self._check_radius(r)
        r = np.asarray(r, dtype=float)
        out = (self.n - 1) * self.warp.d1(r) / self.warp.value(r) - self.potential.d1(r)
        return float(out) if np.ndim(r) == 0 else out

    def drift(self, r):
        return self.radial_laplacian(r)

    def bakry_emery_ricci(self, r):
        """Radial m-Bakry-Emery curvature: -(n-1) f''/f + phi'' + phi'^2/(n-m)."""
        self._check_radius(r)
        r = np.asarray(r, dtype=float)
        ric = -(self.n - 1) * self.warp.d2(r) / self.warp.value(r)
        out = ric + self.potential.d2(r) + self.potential.d1(r) ** 2 / self.nm
        return float(out) if np.ndim(r) == 0 else out

    def rescaled_laplacian(self, r):
        """exp(2 phi/(n-m)) * L r_p, the quantity compared in the rescaled variable."""
        r_arr = np.asarray(r, dtype=float)
        out = np.exp(2.0 * self.potential.value(r_arr) / self.nm) * self.radial_laplacian(r_arr)
        return float(out) if np.ndim(r) == 0 else out

    # -- potential extrema -------------------------------------------------

    def phi_lower(self, r):
        """Running infimum of phi over the closed ball of radius r."""
        return self._phi_extremum(r, -1)

    def phi_upper(self, r):
        """Running supremum of phi over the closed ball of radius r."""
        return self._phi_extremum(r, +1)

    def _phi_extremum(self, r, sign: int):
        r_arr = np.asarray(r, dtype=float)
        mono = self.potential.monotone
        phi0 = self.potential.phi0
        if mono is not None:
            if (mono >= 0 and sign < 0) or (mono <= 0 and sign > 0):
                out = np.full_like(r_arr, phi0, dtype=float)
            else:
                out = np.asarray(self.potential.value(r_arr), dtype=float)
            return float(out) if np.ndim(r) == 0 else out
        grid, running_min, running_max = self._envelope(float(np.max(r_arr)))
        env = running_max if sign > 0 else running_min
        out = np.interp(r_arr, grid, env)
        return float(out) if np.ndim(r) == 0 else out

    def _envelope(self, r_needed: float):
        env = self._caches.get("envelope")
        if env is None or env[0][-1] < r_needed:
            hi = max(r_needed, 1.0)
            if math.isfinite(self.radius):
                hi = min(hi, self.radius)
            hi *= 1.0 + 1e-12
            grid = np.concatenate(([0.0], np.geomspace(1e-9, hi, 16384)))
            vals = np.asarray(self.potential.value(grid), dtype=float)
            env = (grid, np.minimum.accumulate(vals), np.maximum.accumulate(vals))
            self._caches["envelope"] = env
        return env

    # -- cached radial table -----------------------------------------------

    def radial_cache(self, r_eval: float, n_points: int = 512) -> "RadialProfileCache":
        key = ("cache", float(r_eval), int(n_points))
        if key not in self._caches:
            self._caches[key] = RadialProfileCache.build(self, float(r_eval), int(n_points))
        return self._caches[key]

    def _cumulative(self, which: str) -> _CumulativeIntegral:
        key = ("cum", which)
        if key not in self._caches:
            fn = self.reparam_weight if which == "s" else self.density
            self._caches[key] = _CumulativeIntegral(lambda x, f=fn: float(f(x)))
        return self._caches[key]

    # -- completeness -------------------------------------------------------

    def completeness_verdict(self) -> str:
        """Classify divergence of int_0^oo exp(-2 phi/(n-m)) along radial rays.

        Returns one of "complete", "incomplete", "inconclusive".
        """
        if math.isfinite(self.radius):
            raise FiniteRadius("completeness classification requires R = +inf")
        from .criteria import classify_divergence  # local import to avoid a cycle

        tail = None
        if self.potential.value_tail is not None:
            tail = self.potential.value_tail.exp_scaled(-2.0 / self.nm)
        verdict = classify_divergence(self.reparam_weight, r0=1.0, tail=tail)
        return {"diverges": "complete", "converges": "incomplete"}.get(
            verdict.verdict, "inconclusive"
        )


@dataclass(frozen=True)
class RadialProfileCache:
    """Radial table of s_p, potential extrema, density and ball volumes."""

    model: WeightedModel
    r: np.ndarray = field(repr=False)
    s: np.ndarray = field(repr=False)
    phi_lo: np.ndarray = field(repr=False)
    phi_hi: np.ndarray = field(repr=False)
    density: np.ndarray = field(repr=False)
    ball: np.ndarray = field(repr=False)
    _s_interp: PchipInterpolator = field(repr=False, default=None)
    _ball_interp: PchipInterpolator = field(repr=False, default=None)

    @classmethod
    def build(cls, model: WeightedModel, r_eval: float, n_points: int) -> "RadialProfileCache":
        if not 0 < r_eval <= model.radius:
            raise OutOfDomain(f"r_eval must lie in (0, {model.radius:g}]")
        if math.isfinite(model.radius) and r_eval == model.radius:
            r_eval = model.radius * (1 - 1e-12)  # keep f > 0 at the last node
        r = np.geomspace(1e-6 * r_eval, r_eval, n_points)
        s = _cumulative_gauss(model.reparam_weight, r)
        ball = unit_sphere_area(model.n) * _cumulative_gauss(model.density, r)
        cache = cls(
            model=model, r=r, s=s,
            phi_lo=np.asarray(model.phi_lower(r), dtype=float),
            phi_hi=np.asarray(model.phi_upper(r), dtype=float),
            density=np.asarray(model.density(r), dtype=float),
            ball=ball,
        )
        return cache

    def __post_init__(self):
        object.__setattr__(self, "_s_interp", PchipInterpolator(self.r, self.s))
        object.__setattr__(self, "_ball_interp", PchipInterpolator(self.r, self.ball))

    def s_of_r(self, r):
        """Interpolated reparametrized distance; linear below the grid floor."""
        r_arr = np.asarray(r, dtype=float)
        below = r_arr < self.r[0]
        out = np.where(
            below,
            r_arr * (self.s[0] / self.r[0]),
            self._s_interp(np.clip(r_arr, self.r[0], self.r[-1])),
        )
        return float(out) if np.ndim(r) == 0 else out

    def ball_of_r(self, r):
        r_arr = np.asarray(r, dtype=float)
        out = self._ball_interp(np.clip(r_arr, self.r[0], self.r[-1]))
        return float(out) if np.ndim(r) == 0 else out

    def sandwich_gap(self) -> np.ndarray:
        """Slack of exp(-2 phi_hi/(n-m)) r <= s_p(r) <= exp(-2 phi_lo/(n-m)) r.

        Returns the minimum of the two non-negative slacks at each grid point
        (negative values would violate the sandwich).
        """
        nm = self.model.nm
        lower = np.exp(-2.0 * self.phi_hi / nm) * self.r
        upper = np.exp(-2.0 * self.phi_lo / nm) * self.r
        return np.minimum(self.s - lower, upper - self.s)
