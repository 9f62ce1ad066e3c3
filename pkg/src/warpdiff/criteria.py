"""Integral divergence criteria with three-valued verdicts.

Divergence of an improper integral is undecidable from finitely many
samples, so the engine prefers symbolic tail classification (available for
all built-in potential/growth families) and requires a numeric candidate to
show sustained partial-integral growth before reporting divergence;
anything borderline comes back inconclusive rather than guessed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import FiniteRadius, NegativeIntegrand, ZeroProfile
from .manifolds import WeightedModel, _adaptive_integral
from .profiles import CurvatureProfile
from .tails import PowerTail

DIVERGES = "diverges"
CONVERGES = "converges"
INCONCLUSIVE = "inconclusive"

_N_DOUBLINGS = 16          # windows reach 2^16 * r0
_GROWTH_FACTOR = 1.05      # required partial-integral growth per doubling
_SLOPE_WINDOW_POINTS = 24


@dataclass(frozen=True)
class DivergenceVerdict:
    verdict: str
    evidence: dict = field(default_factory=dict)
    r0: float = 1.0

    @property
    def diverges(self) -> bool:
        return self.verdict == DIVERGES

    def summary(self) -> str:
        branch = self.evidence.get("branch", "?")
        detail = self.evidence.get("tail", self.evidence.get("fitted_exponents", ""))
        return f"{self.verdict} [{branch}] {detail}"


def classify_divergence(
    integrand: Callable,
    r0: float = 1.0,
    tail: PowerTail | None = None,
) -> DivergenceVerdict:
    """Classify int_{r0}^oo integrand(r) dr.

    With a symbolic tail the verdict follows the exact exponent rules (and
    is therefore independent of r0).  Otherwise the integrand is probed on
    dyadic windows [2^k r0, 2^{k+1} r0] up to 2^16 r0: log-log slopes are
    fitted on the last two windows, divergence additionally requires the
    partial integrals to keep growing by at least 5% per doubling over the
    last four doublings.
    """
    if not r0 > 0:
        raise ValueError("r0 must be positive")
    if tail is not None:
        verdict = DIVERGES if tail.integral_diverges() else CONVERGES
        return DivergenceVerdict(verdict, {"branch": "symbolic", "tail": tail.describe()}, r0)
    return _numeric_classification(integrand, r0)


def _numeric_classification(integrand: Callable, r0: float) -> DivergenceVerdict:
    edges = list(r0 * 2.0 ** np.arange(_N_DOUBLINGS + 1))
    # truncate the dyadic ladder where the integrand leaves double range
    usable = [edges[0]]
    for hi in edges[1:]:
        sample = np.geomspace(usable[-1], hi, 16)
        with np.errstate(over="ignore", under="ignore", invalid="ignore"):
            values = np.asarray([float(integrand(x)) for x in sample])
        finite = values[np.isfinite(values)]
        if finite.size and np.any(finite < -1e-12 * (1.0 + np.abs(finite).max())):
            raise NegativeIntegrand(f"integrand negative near r={sample[np.argmin(values)]:.6g}")
        if (not np.all(np.isfinite(values)) or values.max() > 1e250
                or values.min() < 1e-250):
            break
        usable.append(hi)
    if len(usable) < 7:
        return DivergenceVerdict(
            INCONCLUSIVE,
            {"branch": "numeric", "rule": "integrand leaves double range too early"},
            r0,
        )
    partials = []
    partial = 0.0
    for lo, hi in zip(usable[:-1], usable[1:]):
        partial += _adaptive_integral(lambda x: float(integrand(x)), lo, hi, rtol=1e-8)
        partials.append(partial)
    slopes = [_loglog_slope(integrand, usable[-3], usable[-2]),
              _loglog_slope(integrand, usable[-2], usable[-1])]
    evidence = {
        "branch": "numeric",
        "fitted_exponents": tuple(round(s, 4) for s in slopes),
        "partials": [(float(usable[k + 1]), float(partials[k])) for k in range(len(partials))],
    }
    growth_ok = all(
        partials[k] >= _GROWTH_FACTOR * partials[k - 1]
        for k in range(len(partials) - 4, len(partials))
    )
    s1, s2 = slopes
    if s2 > max(1.0, s1 + 0.1):
        verdict = DIVERGES if growth_ok else INCONCLUSIVE
        evidence["rule"] = "super-power growth"
        return DivergenceVerdict(verdict, evidence, r0)
    if s2 < min(-2.0, s1 - 0.1):
        evidence["rule"] = "super-power decay"
        return DivergenceVerdict(CONVERGES, evidence, r0)
    if abs(s1 - s2) > 0.1:
        evidence["rule"] = "window slopes disagree"
        return DivergenceVerdict(INCONCLUSIVE, evidence, r0)
    exponent = 0.5 * (s1 + s2)
    evidence["rule"] = f"power tail, exponent {exponent:.3f}"
    if exponent < -1.1:
        return DivergenceVerdict(CONVERGES, evidence, r0)
    if exponent >= -1.000001:
        # at or above the harmonic borderline the power rule says divergent,
        # but only sustained partial-integral growth counts as evidence
        verdict = DIVERGES if growth_ok else INCONCLUSIVE
        return DivergenceVerdict(verdict, evidence, r0)
    # slightly below the borderline a log factor could flip the answer
    return DivergenceVerdict(INCONCLUSIVE, evidence, r0)


def _loglog_slope(integrand: Callable, lo: float, hi: float) -> float:
    r = np.geomspace(lo, hi, _SLOPE_WINDOW_POINTS)
    h = np.maximum([float(integrand(x)) for x in r], 1e-300)
    coeffs = np.polyfit(np.log(r), np.log(h), 1)
    return float(coeffs[0])


# -- tails of the condition integrands --------------------------------------


def _require_unbounded(model: WeightedModel) -> None:
    if math.isfinite(model.radius):
        raise FiniteRadius("tail criteria require R = +inf")


def _env_exp_tail(model: WeightedModel, which: str, beta: float) -> PowerTail | None:
    """Tail of exp(beta * phi_env(r)) for the running min/max envelope."""
    tail = (model.potential.lower_env_tail() if which == "lower"
            else model.potential.upper_env_tail())
    return None if tail is None else tail.exp_scaled(beta)


def _u_tail(model: WeightedModel) -> PowerTail | None:
    """Tail of u(r) = exp(-2 phi_lo(r)/(n-m)) * r."""
    base = _env_exp_tail(model, "lower", -2.0 / model.nm)
    if base is None:
        return None
    return base.mul(PowerTail(coeff=1.0, power=1.0))


def _growth_floor(growth: CurvatureProfile, t0: float) -> float:
    """Positive floor applied where the growth profile vanishes."""
    probe = np.geomspace(max(t0, 1e-6), max(t0, 1e-6) * 2**12, 64)
    vals = np.asarray(growth(probe), dtype=float)
    positive = vals[vals > 0]
    if positive.size == 0:
        raise ZeroProfile("growth profile vanishes on the tail; use the potential criteria")
    return float(positive[0])


def _validate_growth(growth: CurvatureProfile) -> None:
    probe = np.geomspace(1e-3, 1e4, 128)
    vals = np.asarray(growth(probe), dtype=float)
    if np.any(vals < -1e-12):
        raise ValueError("growth profile must be non-negative")
    if np.any(np.diff(vals) < -1e-9 * (1.0 + np.abs(vals[:-1]))):
        raise ValueError("growth profile must be non-decreasing")


def _growth_of_u(model: WeightedModel, growth: CurvatureProfile, floor: float):
    def fn(r):
        r = np.asarray(r, dtype=float)
        u = np.exp(-2.0 * np.asarray(model.phi_lower(r)) / model.nm) * r
        return np.maximum(np.asarray(growth(u), dtype=float), floor)

    return fn


def _growth_of_u_tail(model: WeightedModel, growth: CurvatureProfile, floor: float) -> PowerTail | None:
    u = _u_tail(model)
    if u is None:
        return None
    composed = growth.composed_tail(u)
    if composed is None:
        return None
    if composed.tends_to_zero():
        return PowerTail(coeff=floor)
    return composed


def conservative_curvature_test(
    model: WeightedModel, growth: CurvatureProfile, r0: float = 1.0
) -> DivergenceVerdict:
    """Conservativeness criterion for a non-trivial growth profile G:

    int dr / ( sqrt(G(exp(-2 phi_lo/(n-m)) r)) * exp(-2 phi_lo(r)/(n-m)) ) = +inf.
    """
    _require_unbounded(model)
    _validate_growth(growth)
    floor = _growth_floor(growth, t0=r0)
    g_of_u = _growth_of_u(model, growth, floor)

    def integrand(r):
        r = np.asarray(r, dtype=float)
        return np.exp(2.0 * np.asarray(model.phi_lower(r)) / model.nm) / np.sqrt(g_of_u(r))

    tail = None
    lo_exp = _env_exp_tail(model, "lower", 2.0 / model.nm)
    gu_tail = _growth_of_u_tail(model, growth, floor)
    if lo_exp is not None and gu_tail is not None:
        tail = lo_exp.mul(gu_tail.powf(-0.5))
    return classify_divergence(integrand, r0, tail)


def feller_curvature_test(
    model: WeightedModel, growth: CurvatureProfile, r0: float = 1.0
) -> DivergenceVerdict:
    """Feller criterion for a non-trivial growth profile G:

    int dr / ( sqrt(G(exp(-2 phi_lo/(n-m)) r)) * exp(2(phi_hi - phi_lo)/(n-m)) ) = +inf.
    """
    _require_unbounded(model)
    _validate_growth(growth)
    floor = _growth_floor(growth, t0=r0)
    g_of_u = _growth_of_u(model, growth, floor)
    nm = model.nm

    def integrand(r):
        r = np.asarray(r, dtype=float)
        osc = np.asarray(model.phi_upper(r)) - np.asarray(model.phi_lower(r))
        return np.exp(-2.0 * osc / nm) / np.sqrt(g_of_u(r))

    tail = None
    hi_exp = _env_exp_tail(model, "upper", -2.0 / nm)
    lo_exp = _env_exp_tail(model, "lower", 2.0 / nm)
    gu_tail = _growth_of_u_tail(model, growth, floor)
    if hi_exp is not None and lo_exp is not None and gu_tail is not None:
        osc = hi_exp.mul(lo_exp)
        tail = None if osc is None else osc.mul(gu_tail.powf(-0.5))
    return classify_divergence(integrand, r0, tail)


def conservative_potential_test(model: WeightedModel, r0: float = 1.0) -> DivergenceVerdict:
    """Zero-growth conservativeness criterion: int exp(2 phi_lo/(n-m)) dr = +inf.

    A potential whose running infimum stays bounded below settles the
    verdict immediately (the integrand is bounded away from zero).
    """
    _require_unbounded(model)
    lower = model.potential.lower_env_tail()
    if lower is not None and lower.bounded_below():
        return DivergenceVerdict(
            DIVERGES, {"branch": "symbolic", "rule": "potential bounded below",
                       "tail": lower.exp_scaled(2.0 / model.nm).describe()}, r0)

    def integrand(r):
        return np.exp(2.0 * np.asarray(model.phi_lower(r)) / model.nm)

    tail = _env_exp_tail(model, "lower", 2.0 / model.nm)
    return classify_divergence(integrand, r0, tail)


def feller_potential_test(model: WeightedModel, r0: float = 1.0) -> DivergenceVerdict:
    """Zero-growth Feller criterion: int exp(-2(phi_hi - phi_lo)/(n-m)) dr = +inf."""
    _require_unbounded(model)
    nm = model.nm

    def integrand(r):
        r = np.asarray(r, dtype=float)
        osc = np.asarray(model.phi_upper(r)) - np.asarray(model.phi_lower(r))
        return np.exp(-2.0 * osc / nm)

    tail = None
    hi_exp = _env_exp_tail(model, "upper", -2.0 / nm)
    lo_exp = _env_exp_tail(model, "lower", 2.0 / nm)
    if hi_exp is not None and lo_exp is not None:
        tail = hi_exp.mul(lo_exp)
    return classify_divergence(integrand, r0, tail)


def grigoryan_volume_test(model: WeightedModel, r0: float = 1.0) -> DivergenceVerdict:
    """Volume test int r dr / log mu(B_r) = +inf (weighted measure).

    The denominator is floored at 1 (equivalently mu at e), which does not
    affect the verdict: scaling the measure shifts the logarithm by a
    constant, and a finite total measure makes the test divergent anyway.
    """
    _require_unbounded(model)

    def integrand(r):
        vol = model.ball_volume(float(r))
        return float(r) / math.log(max(vol, math.e))

    tail = _log_volume_reciprocal_tail(model)
    if tail is not None:
        tail = PowerTail(coeff=1.0, power=1.0).mul(tail)
    return classify_divergence(integrand, r0, tail)


def recurrence_test(model: WeightedModel, r0: float = 1.0) -> DivergenceVerdict:
    """Recurrence side of the zero-growth criterion: int r dr / mu(B_r) = +inf.

    The verdict only implies recurrence under the side conditions
    n <= m + 1 and inf phi > -inf, which are reported in the evidence.
    """
    _require_unbounded(model)

    def integrand(r):
        return float(r) / model.ball_volume(float(r))

    density_tail = _density_tail(model)
    tail = None
    if density_tail is not None:
        mu_tail = density_tail.antiderivative()
        tail = PowerTail(coeff=1.0, power=1.0).mul(mu_tail.reciprocal())
    verdict = classify_divergence(integrand, r0, tail)
    side = {
        "dimension_condition": model.n <= model.m + 1,
        "potential_bounded_below": model.potential.bounded_below(),
    }
    evidence = dict(verdict.evidence)
    evidence["side_conditions"] = side
    return DivergenceVerdict(verdict.verdict, evidence, r0)


def hsu_curvature_test(growth: CurvatureProfile, r0: float = 1.0) -> DivergenceVerdict:
    """Classical curvature-only test: int dr / sqrt(G(r)) = +inf."""
    _validate_growth(growth)
    floor = _growth_floor(growth, t0=r0)

    def integrand(r):
        return 1.0 / np.sqrt(np.maximum(np.asarray(growth(r), dtype=float), floor))

    tail = growth.composed_tail(PowerTail(coeff=1.0, power=1.0))
    if tail is not None:
        if tail.tends_to_zero():
            tail = PowerTail(coeff=floor)
        tail = tail.powf(-0.5)
    return classify_divergence(integrand, r0, tail)


def _density_tail(model: WeightedModel) -> PowerTail | None:
    if model.warp.tail is None or model.potential.value_tail is None:
        return None
    f_pow = model.warp.tail.powf(model.n - 1.0)
    return f_pow.mul(model.potential.value_tail.exp_scaled(-1.0))


def _log_volume_reciprocal_tail(model: WeightedModel) -> PowerTail | None:
    """Tail of 1 / log mu(B_r), with the same flooring as the numeric path."""
    density_tail = _density_tail(model)
    if density_tail is None:
        return None
    mu_tail = density_tail.antiderivative()
    log_mu = mu_tail.logarithm()
    if log_mu is None:
        # measure stays bounded: floored logarithm is a positive constant
        return PowerTail(coeff=1.0)
    return log_mu.reciprocal()
