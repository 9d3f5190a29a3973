"""honls: a spectral laboratory for the spatially localized higher-order
nonlinear Schrodinger equation.

Simulates i u_t + (1/2n)(-Lap)^n u = beta(x) G(|u|^2) u on a periodic box
with two independent integrators, constructs small-amplitude geometric-
optics wave packets, measures approximation-error scaling in the
coefficient-sum (Wiener) norm, and recovers the localized coefficient
beta from the nonlinear phase of solved fields via line integrals
(total integral in 1-d, filtered backprojection in 2-d).
"""

__version__ = "0.1.0"

from .errors import (ConfigError, ConvergenceError, DomainError, HonlsError,
                     ThresholdError, ValidationError)
from .grid import (ComplexField, Grid, SpectralField, fl1_norm, forward_dft,
                   free_propagate, grid_mass, inverse_dft, l2_coeff_norm,
                   linf_norm, sobolev_norm)
from .nonlinearity import AnalyticNonlinearity, BumpCoefficient, apply_nonlinearity
from .ansatz import (PhaseIntegralTable, ProbeParams, approximate_solution,
                     approximate_solution_at, envelope_derivative_scaling,
                     initial_data, packet_envelope, pde_defect, segment_integral)
from .solver import (PicardReport, Trajectory, compare_solutions,
                     duhamel_defect_norm, picard_solve, splitstep_solve)
from .recovery import (FbpResult, PhaseField, Sinogram, SinogramRow,
                       exact_packet_row, extract_phase, fbp_invert,
                       line_integrals_from_phase, recover_integral_1d,
                       reference_free_flow, xray_forward)
from .config import ExperimentConfig
from .fitting import FitResult, fit_loglog
