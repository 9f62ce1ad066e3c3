"""Curvature profiles, warp functions and radial potentials.

The built-in families carry closed-form derivatives and symbolic tail
metadata; custom numeric profiles fall back to five-point finite
differences and purely numeric divergence classification.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import NonFiniteCurvature
from .tails import LogAffineTail, PowerTail

ArrayLike = "float | np.ndarray"


def _fd_first(value: Callable, r: np.ndarray) -> np.ndarray:
    h = np.maximum(1e-5, 1e-5 * np.abs(r))
    h = np.minimum(h, np.where(r > 0, r / 4.0, h))
    return (-value(r + 2 * h) + 8 * value(r + h) - 8 * value(r - h) + value(r - 2 * h)) / (12 * h)


def _fd_second(value: Callable, r: np.ndarray) -> np.ndarray:
    h = np.maximum(1e-5, 1e-5 * np.abs(r))
    h = np.minimum(h, np.where(r > 0, r / 4.0, h))
    return (
        -value(r + 2 * h) + 16 * value(r + h) - 30 * value(r) + 16 * value(r - h) - value(r - 2 * h)
    ) / (12 * h**2)


def _vectorize(fn: Callable) -> Callable:
    def wrapped(s):
        arr = np.asarray(s, dtype=float)
        out = np.asarray(fn(arr), dtype=float)
        if np.ndim(s) == 0:
            return float(out)
        return out

    return wrapped


@dataclass(frozen=True)
class CurvatureProfile:
    """A continuous profile s -> value, with optional symbolic tail class.

    The same type serves the comparison ODEs (where the profile plays the
    role of a curvature lower bound in the rescaled arclength variable) and
    the integral divergence criteria (where it is a non-negative,
    non-decreasing growth function).
    """

    fn: Callable = field(repr=False)
    kind: str = "numeric"  # constant | power_law | log_power | numeric
    params: tuple = ()
    label: str = ""

    def __call__(self, s):
        return self.fn(s)

    @classmethod
    def constant(cls, c: float) -> "CurvatureProfile":
        c = float(c)
        return cls(fn=_vectorize(lambda s: np.full_like(s, c)), kind="constant",
                   params=(c,), label=f"constant({c:g})")

    @classmethod
    def power_law(cls, coeff: float, exponent: float) -> "CurvatureProfile":
        coeff, exponent = float(coeff), float(exponent)
        return cls(fn=_vectorize(lambda s: coeff * np.abs(s) ** exponent), kind="power_law",
                   params=(coeff, exponent), label=f"power_law({coeff:g}, {exponent:g})")

    @classmethod
    def log_power(cls, coeff: float, exponent: float) -> "CurvatureProfile":
        coeff, exponent = float(coeff), float(exponent)
        return cls(fn=_vectorize(lambda s: coeff * np.log(np.e + np.abs(s)) ** exponent),
                   kind="log_power", params=(coeff, exponent),
                   label=f"log_power({coeff:g}, {exponent:g})")

    @classmethod
    def numeric(cls, fn: Callable, label: str = "numeric") -> "CurvatureProfile":
        return cls(fn=_vectorize(fn), kind="numeric", label=label)

    @classmethod
    def from_samples(cls, s: np.ndarray, values: np.ndarray, label: str = "fitted") -> "CurvatureProfile":
        s = np.asarray(s, dtype=float)
        values = np.asarray(values, dtype=float)
        interp = PchipInterpolator(s, values, extrapolate=False)
        lo, hi = s[0], s[-1]
        vlo, vhi = values[0], values[-1]

        def fn(x):
            x = np.asarray(x, dtype=float)
            out = interp(np.clip(x, lo, hi))
            out = np.where(x < lo, vlo, out)
            out = np.where(x > hi, vhi, out)
            return out

        return cls(fn=_vectorize(fn), kind="numeric", label=label)

    def check_finite(self, s_grid: np.ndarray) -> None:
        vals = np.asarray(self.fn(np.asarray(s_grid, dtype=float)))
        if not np.all(np.isfinite(vals)):
            bad = np.asarray(s_grid)[~np.isfinite(vals)][0]
            raise NonFiniteCurvature(f"profile {self.label!r} is not finite at s={bad!r}")

    def check_continuity(self, s_grid: np.ndarray, h: float = 1e-7, tol: float = 1e-3) -> bool:
        """Dense-sampling continuity check: |k(s+h)-k(s)| small relative to scale."""
        s = np.asarray(s_grid, dtype=float)
        a, b = np.asarray(self.fn(s)), np.asarray(self.fn(s + h))
        scale = 1.0 + np.maximum(np.abs(a), np.abs(b))
        return bool(np.all(np.abs(b - a) <= tol * scale))

    def check_tail_agreement(self, s_tail: np.ndarray, rtol: float = 0.01) -> bool:
        """Symbolic tag must reproduce the evaluated profile on a tail grid."""
        if self.kind == "numeric":
            return True
        s = np.asarray(s_tail, dtype=float)
        actual = np.asarray(self.fn(s))
        if self.kind == "constant":
            expected = np.full_like(s, self.params[0])
        elif self.kind == "power_law":
            expected = self.params[0] * s ** self.params[1]
        else:
            expected = self.params[0] * np.log(np.e + s) ** self.params[1]
        scale = np.maximum(np.abs(expected), 1e-300)
        return bool(np.all(np.abs(actual - expected) <= rtol * scale))

    def composed_tail(self, inner: PowerTail) -> PowerTail | None:
        """Tail of s -> self(inner(r)) for a known inner argument tail."""
        if self.kind == "constant":
            c = self.params[0]
            return PowerTail(coeff=c) if c > 0 else None
        if self.kind == "numeric":
            return None
        coeff, exponent = self.params
        if coeff <= 0:
            return None
        if self.kind == "power_law":
            if exponent == 0.0:
                return PowerTail(coeff=coeff)
            if inner.tends_to_infinity() or inner.tends_to_zero():
                out = inner.powf(exponent)
                return PowerTail(coeff * out.coeff, out.power, out.log_power, out.rate, out.exp_power)
            return PowerTail(coeff=coeff * inner.coeff**exponent)
        # log_power
        if inner.tends_to_infinity():
            log_inner = inner.logarithm()
            if log_inner is None:
                return None
            out = log_inner.powf(exponent)
            return PowerTail(coeff * out.coeff, out.power, out.log_power, out.rate, out.exp_power)
        return PowerTail(coeff=coeff * math.log(np.e + inner.coeff) ** exponent)


@dataclass(frozen=True)
class Warp:
    """Warp function f of the metric dr^2 + f(r)^2 g_{S^{n-1}}."""

    kind: str
    params: tuple = ()
    _value: Callable = field(default=None, repr=False)
    _d1: Callable = field(default=None, repr=False)
    _d2: Callable = field(default=None, repr=False)
    tail: PowerTail | None = None  # tail of f as r -> oo, when it exists
    max_radius: float = math.inf   # largest R with f > 0 on (0, R)

    def value(self, r):
        return self._value(np.asarray(r, dtype=float))

    def d1(self, r):
        r = np.asarray(r, dtype=float)
        if self._d1 is not None:
            return self._d1(r)
        return _fd_first(self._value, r)

    def d2(self, r):
        r = np.asarray(r, dtype=float)
        if self._d2 is not None:
            return self._d2(r)
        return _fd_second(self._value, r)

    @classmethod
    def euclidean(cls) -> "Warp":
        return cls(kind="euclidean",
                   _value=lambda r: r,
                   _d1=lambda r: np.ones_like(r),
                   _d2=lambda r: np.zeros_like(r),
                   tail=PowerTail(coeff=1.0, power=1.0))

    @classmethod
    def sphere(cls) -> "Warp":
        return cls(kind="sphere",
                   _value=np.sin, _d1=np.cos, _d2=lambda r: -np.sin(r),
                   tail=None, max_radius=math.pi)

    @classmethod
    def hyperbolic(cls) -> "Warp":
        return cls(kind="hyperbolic",
                   _value=np.sinh, _d1=np.cosh, _d2=np.sinh,
                   tail=PowerTail(coeff=0.5, rate=1.0, exp_power=1.0))

    @classmethod
    def from_callables(cls, f: Callable, d1: Callable | None = None, d2: Callable | None = None,
                       tail: PowerTail | None = None, max_radius: float = math.inf) -> "Warp":
        return cls(kind="custom", _value=f, _d1=d1, _d2=d2, tail=tail, max_radius=max_radius)


@dataclass(frozen=True)
class Potential:
    """Radial potential phi with derivatives and symbolic tail metadata.

    ``monotone`` is +1/-1/0 for non-decreasing/non-increasing/constant
    profiles on (0, oo); None means unknown (custom), in which case running
    extrema are computed on dense grids instead of closed form.
    """

    kind: str
    params: tuple = ()
    _value: Callable = field(default=None, repr=False)
    _d1: Callable = field(default=None, repr=False)
    _d2: Callable = field(default=None, repr=False)
    value_tail: LogAffineTail | None = None
    monotone: int | None = None

    def value(self, r):
        return self._value(np.asarray(r, dtype=float))

    def d1(self, r):
        r = np.asarray(r, dtype=float)
        if self._d1 is not None:
            return self._d1(r)
        return _fd_first(self._value, r)

    def d2(self, r):
        r = np.asarray(r, dtype=float)
        if self._d2 is not None:
            return self._d2(r)
        return _fd_second(self._value, r)

    @property
    def phi0(self) -> float:
        return float(self.value(0.0))

    def bounded_below(self) -> bool | None:
        if self.value_tail is None:
            return None
        return self.value_tail.bounded_below()

    def bounded_above(self) -> bool | None:
        if self.value_tail is None:
            return None
        return self.value_tail.bounded_above()

    def lower_env_tail(self) -> LogAffineTail | None:
        """Tail of the running infimum of phi over [0, r]."""
        if self.monotone is None or self.value_tail is None:
            return None
        if self.monotone >= 0:
            return LogAffineTail(const=self.phi0)
        return self.value_tail

    def upper_env_tail(self) -> LogAffineTail | None:
        """Tail of the running supremum of phi over [0, r]."""
        if self.monotone is None or self.value_tail is None:
            return None
        if self.monotone <= 0:
            return LogAffineTail(const=self.phi0)
        return self.value_tail

    @classmethod
    def zero(cls) -> "Potential":
        z = lambda r: np.zeros_like(r)
        return cls(kind="zero", _value=z, _d1=z, _d2=z,
                   value_tail=LogAffineTail(), monotone=0)

    @classmethod
    def power(cls, a: float, p: float) -> "Potential":
        """phi(r) = a * r**p with p > 0."""
        a, p = float(a), float(p)
        if p <= 0:
            raise ValueError("power potential requires p > 0")
        if a == 0.0:
            return cls.zero()
        return cls(kind="power", params=(a, p),
                   _value=lambda r: a * r**p,
                   _d1=lambda r: a * p * r ** (p - 1),
                   _d2=lambda r: a * p * (p - 1) * r ** (p - 2),
                   value_tail=LogAffineTail(lead=a, lead_power=p),
                   monotone=1 if a > 0 else -1)

    @classmethod
    def quadratic(cls, a: float) -> "Potential":
        return cls.power(a, 2.0)

    @classmethod
    def log_power(cls, c: float, q: float) -> "Potential":
        """phi(r) = c * log(1 + r**q) with q > 0."""
        c, q = float(c), float(q)
        if q <= 0:
            raise ValueError("log_power potential requires q > 0")
        if c == 0.0:
            return cls.zero()
        return cls(kind="log_power", params=(c, q),
                   _value=lambda r: c * np.log1p(r**q),
                   _d1=lambda r: c * q * r ** (q - 1) / (1 + r**q),
                   _d2=lambda r: c * q * r ** (q - 2) * ((q - 1) - r**q) / (1 + r**q) ** 2,
                   value_tail=LogAffineTail(log_coeff=c * q),
                   monotone=1 if c > 0 else -1)

    @classmethod
    def from_callables(cls, phi: Callable, d1: Callable | None = None, d2: Callable | None = None,
                       value_tail: LogAffineTail | None = None,
                       monotone: int | None = None) -> "Potential":
        return cls(kind="custom", _value=phi, _d1=d1, _d2=d2,
                   value_tail=value_tail, monotone=monotone)


def log_well_potential(n: int, m: float, epsilon: float) -> Potential:
    """The logarithmic-well family phi(r) = -((n-m) * eps / 4) * log(1 + r^2)."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must lie in [0, 1]")
    if epsilon == 0.0:
        return Potential.zero()
    return Potential.log_power(-(n - m) * epsilon / 4.0, 2.0)
