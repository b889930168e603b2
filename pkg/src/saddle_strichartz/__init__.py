"""Numerical toolkit for Fourier extension on hyperbolic paraboloids.

Closed-form Gaussian extensions, Euler-Lagrange moment witnesses showing that
Gaussians are not critical points, the saddle-surface convolution kernel and
its divergence diagnostics, and a gradient-ascent search for the
L^2 -> L^4 saddle Strichartz inequality.
"""

from .errors import (BranchCutError, BudgetExceededError, DegenerateChangeError, DivergenceError,
                     DomainError, ParaboloidSignatureError, ResolutionError, SingularityError)
from .exponents import (ExponentTriple, Signature, admissible_range, critical_exponent,
                        critical_exponent_bisection, dual_exponent, eval_Q, kappa, strichartz_q)
from .grid import GridFunction, read_gridfunction, write_gridfunction
from .quadrature import (QuadratureResult, integrate_grid, integrate_halfline, integrate_interval,
                         integrate_line, principal_half_power)

__version__ = "0.1.0"

from .euler_lagrange import (CriticalityReport, MomentReport, criticality_residual, diagonal_moment,
                             diagonal_moments, el_lhs_normalized, el_weight, first_variation,
                             first_variation_fd, first_variation_witness, gamma_inverse, moment,
                             moments, phi_inverse, project_orthogonal)
from .extremizer_search import (AscentReport, SliceConfig, ascend, extension_slices,
                                lambda_functional, lambda_gradient, strichartz_norm4)
from .gaussian_extension import (extension_abs_gaussian, extension_gaussian_closed, extension_numeric,
                                 gaussian, gaussian_grid, gaussian_strichartz_norm,
                                 gaussian_strichartz_norm_grid)
from .saddle_kernel import (HyperbolaSlice, bessel_K0, k_apply_line_integral, k_pairing, kg_closed,
                            reflection_R, symmetric_decompose, truncated_k1, truncated_kg_l2)
