"""Numerical tools for the infinite harmonic chain q_k'' = omega^2 (Delta q)_k.

Submodules
----------
lattice     lattice sequences, the discrete Laplacian, initial conditions
spectral    Fourier data of q^Delta, membership evidence, limits L+, L-, nu
dynamics    trajectories by time stepping, spectral formula, Bessel series
bessel      J_n, running integrals G_n and alternating Bessel sums
bounds      oscillatory integrals I_n, C_n, V_n, R_n, M_n, L_n and sweeps
"""

from .bessel import (BesselEvaluator, alternating_sums, bessel_j, identity_residual,
                     integral_G)
from .bounds import (eval_C, eval_I, eval_L, eval_main_gest, eval_R_M, eval_V,
                     regime_sweep, sweep)
from .dynamics import (Trajectory, boundedness_sweep, cross_validate, solve_bessel,
                       solve_bessel_sign, solve_closed_form, solve_ode, solve_spectral)
from .lattice import (InitialCondition, LatticeSlice, discrete_laplacian, evaluate_ic,
                      first_difference, parse_ic)
from .reports import BoundSweepReport
from .spectral import (ClassificationReport, InconclusiveError, SpectralProfile,
                       c2_criterion, classify, compute_A, dirichlet_kernel_integral,
                       limits_and_nu, limits_for_ic, phi_decompose, q_delta_fourier,
                       spectral_profile)

__version__ = "0.1.0"
