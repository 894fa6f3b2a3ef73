"""Walk-on-spheres Monte Carlo solver for the fractional Dirichlet and
Poisson problems on bounded domains, driven by exact ball-exit sampling of
the isotropic alpha-stable process."""

from .geometry import Ball, Box, Domain, HalfSpaceIntersection, UnionOfBalls, \
    parse_domain, swiss_cheese
from .montecarlo import Estimate, StepHistogram, ToleranceNotReached, \
    estimate_adaptive, estimate_fixed, geometric_parameter, step_statistics
from .reference import ExteriorData, ProblemSpec, SourceData, \
    ball_poisson_reference, dyda_exact, dyda_source, green_reference
from .specfun import BetaParams, beta, inv_reg_inc_beta, log_gamma, reg_inc_beta
from .stable_sampler import RngStream, StableParams, exit_density, \
    exit_radius_cdf, exit_radius_density, exit_radius_quantile, kappa_const, \
    occupation_density, occupation_profile, sample_exit_ball, \
    sample_exit_unit_ball, sample_occupation_radius
from .wos_engine import PathRecord, StepCapExceeded, Termination, WalkResult, \
    chi_sample, dirichlet_payoff, run_walk, simulate_path, source_increment

__version__ = "0.1.0"
