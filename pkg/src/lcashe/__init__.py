"""Stochastic heat equations on locally compact abelian groups.

Second-moment engines (exact Volterra solver, analytic lower and upper
bounds), Monte Carlo simulation on finite groups, and noise-excitation
index estimation.
"""
from .errors import (ConfigError, GridTooCoarse, HypothesisViolated, IncompatibleMap, NonFinite,
                     NotAutomorphism, NotDiscrete, NotLinear, NumericFailure, OutOfRange,
                     ResolutionError, SheError, TooFewPoints, Unstable)
from .groups import (Cyclic, DualSpec, Isomorphism, Lattice, Product, RealLine, Torus, Trivial,
                     character_matrix, compose, convolve, dual, dual_points, fourier, haar_weight,
                     inverse, inverse_fourier, modulus, pairing, points)
from .initial import InitialCondition
from .sigma import Bounded, Linear, SinPlusSlope
from .spectral import (CyclicRates, DalangStatus, LatticeWalk, ProductIndependent, Stable,
                       TorusBrownian, Zero, dalang_check, heat_kernel, pbar0, pbar0_integral,
                       projection_compare, psi, psi_values, tauberian_check, upsilon,
                       upsilon_inverse, upsilon_profile, upsilon_time_domain)
from .moments import (EnergyCurve, deterministic_energy, lemma_sums_floor, lower_bound_constant,
                      lower_bound_series, nbeta_norm, solve_volterra, upper_bound_picard)
from .montecarlo import (SimConfig, invariance_check, local_time_identity, simulate_energy,
                         simulate_grid)
from .excitation import (constant_sigma_energy, dichotomy_report, fit_index,
                         linear_excitation_check, predicted_index, sweep)
from .catalog import catalog, discrete_catalog

__version__ = "0.1.0"
