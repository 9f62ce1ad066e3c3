"""Exception types shared across the package."""

from __future__ import annotations


class WarpdiffError(Exception):
    """Base class for all package errors."""


class NonFiniteCurvature(WarpdiffError):
    """A curvature profile evaluated to NaN or infinity on the sample grid."""


class StepUnderflow(WarpdiffError):
    """The adaptive ODE integrator could not meet the requested tolerance."""


class OutOfDomain(WarpdiffError, ValueError):
    """Evaluation point lies outside the valid domain of a solution."""


class PoleSingularity(WarpdiffError, ValueError):
    """Radius is below the grid floor where pole-singular quantities blow up."""


class QuadratureFailure(WarpdiffError):
    """An adaptive quadrature did not reach the requested tolerance."""


class FiniteRadius(WarpdiffError, ValueError):
    """Operation requires an unbounded radial domain."""


class DegenerateAnnulus(WarpdiffError, ValueError):
    """An annulus in a volume comparison has zero measure."""


class NegativeIntegrand(WarpdiffError, ValueError):
    """Divergence classification requires a non-negative integrand."""


class ZeroProfile(WarpdiffError, ValueError):
    """A curvature growth profile is identically zero where positivity is required."""


class InvalidStart(WarpdiffError, ValueError):
    """Simulation start radius is outside the admissible range."""


class DriftOverflow(WarpdiffError):
    """Drift evaluated to a non-finite value at a reached point."""


class ConfigError(WarpdiffError, ValueError):
    """Scenario configuration is malformed or incomplete."""
