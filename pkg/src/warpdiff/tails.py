"""Symbolic tail algebra for classifying improper integrals.

A tail describes the leading behaviour of a positive function as r -> oo in
the closed family

    h(r) ~ coeff * r**power * (log r)**log_power * exp(rate * r**exp_power),

which is stable under products, real powers and (where the result stays in
the family) antiderivatives.  Divergence of int h(r) dr over a tail
[r0, oo) depends only on these exponents, so verdicts derived from a tail
are independent of the cutoff r0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class PowerTail:
    """Leading asymptotic form of a positive function as r -> oo."""

    coeff: float = 1.0
    power: float = 0.0
    log_power: float = 0.0
    rate: float = 0.0
    exp_power: float = 0.0

    def __post_init__(self):
        if not (self.coeff > 0.0 and math.isfinite(self.coeff)):
            raise ValueError(f"tail coefficient must be positive and finite, got {self.coeff}")
        if self.rate == 0.0 and self.exp_power != 0.0:
            object.__setattr__(self, "exp_power", 0.0)

    def mul(self, other: "PowerTail") -> "PowerTail | None":
        """Product tail, or None when the exponentials do not combine."""
        if self.rate != 0.0 and other.rate != 0.0 and self.exp_power != other.exp_power:
            return None
        rate = self.rate + other.rate if self.exp_power == other.exp_power else (
            self.rate if self.rate != 0.0 else other.rate
        )
        exp_power = self.exp_power if self.rate != 0.0 else other.exp_power
        return PowerTail(
            coeff=self.coeff * other.coeff,
            power=self.power + other.power,
            log_power=self.log_power + other.log_power,
            rate=rate,
            exp_power=exp_power,
        )

    def powf(self, alpha: float) -> "PowerTail":
        return PowerTail(
            coeff=self.coeff**alpha,
            power=self.power * alpha,
            log_power=self.log_power * alpha,
            rate=self.rate * alpha,
            exp_power=self.exp_power,
        )

    def reciprocal(self) -> "PowerTail":
        return self.powf(-1.0)

    def tends_to_zero(self) -> bool:
        if self.rate != 0.0:
            return self.rate < 0.0
        if self.power != 0.0:
            return self.power < 0.0
        return self.log_power < 0.0

    def tends_to_infinity(self) -> bool:
        if self.rate != 0.0:
            return self.rate > 0.0
        if self.power != 0.0:
            return self.power > 0.0
        return self.log_power > 0.0

    def integral_diverges(self) -> bool:
        """Whether int_{r0}^oo of this tail diverges (any r0 in the tail)."""
        if self.rate > 0.0:
            return True
        if self.rate < 0.0:
            return False
        if self.power > -1.0:
            return True
        if self.power < -1.0:
            return False
        # power == -1: int (log r)^q / r dr = (log r)^{q+1}/(q+1)
        return self.log_power >= -1.0

    def antiderivative(self) -> "PowerTail":
        """Tail of r -> int_{r0}^r h; a positive constant when the integral converges."""
        if not self.integral_diverges():
            return PowerTail(coeff=1.0)
        if self.rate > 0.0:
            # int h ~ h / (rate * exp_power * r**(exp_power-1))
            return PowerTail(
                coeff=self.coeff / (self.rate * self.exp_power),
                power=self.power - self.exp_power + 1.0,
                log_power=self.log_power,
                rate=self.rate,
                exp_power=self.exp_power,
            )
        if self.power > -1.0:
            return PowerTail(
                coeff=self.coeff / (self.power + 1.0),
                power=self.power + 1.0,
                log_power=self.log_power,
            )
        # borderline power == -1 divergent log scale
        if self.log_power == -1.0:
            return PowerTail(coeff=self.coeff, log_power=0.0)  # ~ coeff*log log r, treat as slowly varying
        return PowerTail(coeff=self.coeff / (self.log_power + 1.0), log_power=self.log_power + 1.0)

    def logarithm(self) -> "PowerTail | None":
        """Tail of log h when h -> oo; None when log h does not grow."""
        if self.rate > 0.0:
            return PowerTail(coeff=self.rate, power=self.exp_power)
        if self.rate == 0.0 and self.power > 0.0:
            return PowerTail(coeff=self.power, log_power=1.0)
        return None

    def describe(self) -> str:
        parts = [f"{self.coeff:.6g}"]
        if self.power:
            parts.append(f"r^{self.power:g}")
        if self.log_power:
            parts.append(f"(log r)^{self.log_power:g}")
        if self.rate:
            parts.append(f"exp({self.rate:g} r^{self.exp_power:g})")
        return " * ".join(parts)


@dataclass(frozen=True)
class LogAffineTail:
    """Asymptotic form g(r) ~ lead * r**lead_power + log_coeff * log r + const.

    Used for potentials and their running extrema, whose exponentials then
    land in the :class:`PowerTail` family.
    """

    lead: float = 0.0
    lead_power: float = 0.0
    log_coeff: float = 0.0
    const: float = 0.0

    def exp_scaled(self, beta: float) -> PowerTail:
        """Tail of exp(beta * g(r))."""
        lead = beta * self.lead
        return PowerTail(
            coeff=math.exp(beta * self.const),
            power=beta * self.log_coeff,
            rate=lead if self.lead != 0.0 else 0.0,
            exp_power=self.lead_power if self.lead != 0.0 else 0.0,
        )

    def bounded_below(self) -> bool:
        if self.lead != 0.0:
            return self.lead > 0.0
        return self.log_coeff >= 0.0

    def bounded_above(self) -> bool:
        if self.lead != 0.0:
            return self.lead < 0.0
        return self.log_coeff <= 0.0

    def is_constant(self) -> bool:
        return self.lead == 0.0 and self.log_coeff == 0.0
