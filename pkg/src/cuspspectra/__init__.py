"""Eigenvalue asymptotics of one-particle density operators with cusp structure."""

from .cusp_states import (
    CuspState,
    DiagonalProfile,
    Symmetry,
    coefficient_A,
    coefficient_A_exact,
    diagonal_profile,
    evaluate_psi,
)
from .density_operator import (
    ChannelOperator,
    assemble_spectrum,
    channel_operator,
    channel_spectrum,
    partial_wave_amplitude,
    trace_sum,
)
from .errors import DomainError, UnderResolvedError
from .homokernel import (
    HomogeneousKernelSpec,
    KernelFamily,
    ModelWeightProfile,
    Weight,
    fourier_symbol,
    model_coefficient,
    model_weight_profile,
    mu_coefficient,
    nu_coefficient,
    nystrom_1d_spectrum,
)
from .quadrature import RadialGrid
from .spectral_analysis import (
    PlateauEstimate,
    counting_function,
    finite_matrix_identities,
    plateau_estimate,
    quasi_norm,
)
from .spectrum import SpectrumSeries

__version__ = "0.1.0"
