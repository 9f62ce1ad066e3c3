"""Weighted rotationally symmetric model manifolds and their diffusions.

The package has four layers:

* :mod:`warpdiff.jacobi` solves the comparison ODE and exposes the model
  Laplacian in the rescaled arclength variable;
* :mod:`warpdiff.manifolds` represents the weighted models and their radial
  geometry (reparametrized distance, curvature, volumes);
* :mod:`warpdiff.comparisons` and :mod:`warpdiff.criteria` verify the
  comparison inequalities and the integral divergence criteria;
* :mod:`warpdiff.diffusion` estimates explosion and hitting probabilities of
  the radial diffusion by Monte Carlo, with a Feller boundary test as an
  independent oracle.

``warpdiff.scenarios`` bundles ready-made configurations and the ``warpdiff``
command line runs them; see README.md.
"""

from .comparisons import (
    ComparisonReport,
    MyersReport,
    bishop_gromov_sweep,
    fit_curvature_bound,
    fit_growth_envelope,
    make_grid,
    minimal_hessian_constant,
    myers_diagnostic,
    verify_bishop_gromov,
    verify_euclidean_hessian,
    verify_laplacian_comparison,
    verify_riccati_inequality,
    verify_volume_element_monotonicity,
    verify_volume_growth,
)
from .criteria import (
    DivergenceVerdict,
    classify_divergence,
    conservative_curvature_test,
    conservative_potential_test,
    feller_curvature_test,
    feller_potential_test,
    grigoryan_volume_test,
    hsu_curvature_test,
    recurrence_test,
)
from .diffusion import (
    BoundaryClassification,
    FellerScan,
    SimulationEstimate,
    classify_boundaries,
    estimate_hitting_probability,
    feller_decay_scan,
    simulate_explosion,
    wilson_interval,
)
from .jacobi import JacobiSolution, comparison_laplacian, log_derivative, riccati_residual, solve_jacobi
from .manifolds import RadialProfileCache, WeightedModel, unit_sphere_area
from .profiles import CurvatureProfile, Potential, Warp, log_well_potential

__all__ = [
    "BoundaryClassification",
    "ComparisonReport",
    "CurvatureProfile",
    "DivergenceVerdict",
    "FellerScan",
    "JacobiSolution",
    "MyersReport",
    "Potential",
    "RadialProfileCache",
    "SimulationEstimate",
    "Warp",
    "WeightedModel",
    "bishop_gromov_sweep",
    "classify_boundaries",
    "classify_divergence",
    "comparison_laplacian",
    "conservative_curvature_test",
    "conservative_potential_test",
    "estimate_hitting_probability",
    "feller_curvature_test",
    "feller_decay_scan",
    "feller_potential_test",
    "fit_curvature_bound",
    "fit_growth_envelope",
    "grigoryan_volume_test",
    "hsu_curvature_test",
    "log_derivative",
    "log_well_potential",
    "make_grid",
    "minimal_hessian_constant",
    "myers_diagnostic",
    "recurrence_test",
    "riccati_residual",
    "simulate_explosion",
    "solve_jacobi",
    "unit_sphere_area",
    "verify_bishop_gromov",
    "verify_euclidean_hessian",
    "verify_laplacian_comparison",
    "verify_riccati_inequality",
    "verify_volume_element_monotonicity",
    "verify_volume_growth",
    "wilson_interval",
]

__version__ = "0.1.0"
