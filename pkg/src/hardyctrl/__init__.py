"""Robust state-feedback synthesis for diffusion with inverse-square potentials.

The package builds weighted finite-difference realizations of singular
parabolic operators (interior or boundary singularity), converts Dirichlet
boundary control into interior control columns through singular Dirichlet
maps, solves the game-type Riccati equation of suboptimal disturbance
attenuation by Newton iteration with stability certificates, locates the
minimal certified attenuation level by bisection, measures the achieved gain
by two independent methods plus time-domain simulation, and exposes the
integral-kernel diagnostics of the solution operator.
"""

from .grids import Grid, build_grid, hardy_constant, hardy_rayleigh_min
from .system import (BOUNDARY_1D, BOUNDARY_RADIAL, DISTRIBUTED,
                     SystemRealization, accretivity_margin, assemble_operator,
                     assemble_scenario, detectability_gain, mask_from_interval)
from .dirichlet import (DirichletMapSet, b2_adjoint_boundary, build_b2_boundary,
                        build_dirichlet_maps, d0_map, d_map)
from .riccati import (RiccatiSolution, lqr_initialize, lyapunov_solve,
                      newton_kleinman, riccati_residual, spectral_abscissa)
from .gammasearch import GammaSearchResult, ProbeResult, bisect_gamma, feasibility_probe
from .hinf import (FrequencyResponse, frequency_sweep, hamiltonian_bisection,
                   hamiltonian_test, transfer_value)
from .simulate import (FeedbackDisturbance, Trajectory, decay_rate, gain_ratio,
                       integrate_closed_loop, peak_sinusoid, white_noise,
                       worst_case_disturbance, worst_case_gain, worst_case_signal)
from .kernel import (KernelField, default_test_pairs, feedback_from_kernel,
                     kernel_from_matrix, kernel_pde_residual)
from .pipeline import (ConfigError, ScenarioConfig, SynthesisReport,
                       parse_config, run_pipeline)
from .outputs import emit_outputs

__version__ = "0.1.0"

__all__ = [
    "Grid", "build_grid", "hardy_constant", "hardy_rayleigh_min",
    "SystemRealization", "assemble_operator", "assemble_scenario",
    "accretivity_margin", "detectability_gain", "mask_from_interval",
    "DISTRIBUTED", "BOUNDARY_RADIAL", "BOUNDARY_1D",
    "DirichletMapSet", "d0_map", "d_map", "build_b2_boundary",
    "build_dirichlet_maps", "b2_adjoint_boundary",
    "RiccatiSolution", "lyapunov_solve", "lqr_initialize", "newton_kleinman",
    "riccati_residual", "spectral_abscissa",
    "GammaSearchResult", "ProbeResult", "feasibility_probe", "bisect_gamma",
    "FrequencyResponse", "transfer_value", "frequency_sweep",
    "hamiltonian_test", "hamiltonian_bisection",
    "Trajectory", "FeedbackDisturbance", "integrate_closed_loop",
    "worst_case_disturbance", "worst_case_gain", "worst_case_signal",
    "white_noise", "peak_sinusoid", "gain_ratio", "decay_rate",
    "KernelField", "kernel_from_matrix", "kernel_pde_residual",
    "feedback_from_kernel", "default_test_pairs",
    "ScenarioConfig", "SynthesisReport", "ConfigError", "parse_config",
    "run_pipeline", "emit_outputs",
]
