"""Occupation-number dynamics of an oscillator fully coupled to fermionic and bosonic baths."""

from .analysis import OscillationInfo, ScanResult, classify, scan
from .bathintegrals import BathIntegralTable, QuadratureSpec, I_lambda_inf, I_lambda_t
from .errors import (ConfigError, DegenerateRoots, DenominatorFloor, DomainError, GridTooCoarse,
                     MixbathError, NodeCollision, NonConvergence, PreconditionError,
                     QuadratureNonConvergence, ResourceLimit, UnitsError, UnstableRoots,
                     VerificationFailure, WindowTooShort)
from .estimator import OccupationModel
from .evolution import (AsymptoticReport, Method, Trajectory, asymptotics, evolve_closed_form,
                        evolve_diffusion, markov_limit, time_grid)
from .io import parse_config, parse_config_text
from .kernels import J_decomposition, eval_AB, eval_MN
from .oracle import discrete_bath_solve, evolve_volterra
from .polyroots import RootData, build_char_poly, solve_roots
from .scenario import (BathSpec, FrequencyMode, Scenario, Statistics, SystemSpec,
                       build_scenario, reference_scenario, thermal_occupation_reference)
from .transport import TransportSample, mixed_transport

__all__ = [
    "AsymptoticReport", "BathIntegralTable", "BathSpec", "ConfigError", "DegenerateRoots",
    "DenominatorFloor", "DomainError", "FrequencyMode", "GridTooCoarse", "I_lambda_inf",
    "I_lambda_t", "J_decomposition", "Method", "MixbathError", "NodeCollision", "NonConvergence",
    "OccupationModel", "OscillationInfo", "PreconditionError", "QuadratureNonConvergence",
    "QuadratureSpec", "ResourceLimit", "RootData", "ScanResult", "Scenario", "Statistics",
    "SystemSpec", "Trajectory", "TransportSample", "UnitsError", "UnstableRoots",
    "VerificationFailure", "WindowTooShort", "asymptotics", "build_char_poly", "build_scenario",
    "classify", "discrete_bath_solve", "eval_AB", "eval_MN", "evolve_closed_form",
    "evolve_diffusion", "evolve_volterra", "markov_limit", "mixed_transport", "parse_config",
    "parse_config_text", "scan", "reference_scenario", "solve_roots",
    "thermal_occupation_reference", "time_grid",
]
