"""Nodal lines of three-dimensional complex Gaussian random waves.

Modules
-------
spectrum    power spectra and wavevector sampling
covariance  radial covariance profiles, the Dr functional, box covariograms
synthesis   random-cosine field synthesis, grids, exact Gaussian oracle
nodal       marching-tetrahedra nodal-line length
kacrice     expected length (isotropic, anisotropic, perturbation audit)
chaos       Hermite coefficients, Mehler expectations, second-chaos variance
harness     configs, ensembles, reports, acceptance suite and CLI
"""

from ._accel import HAS_NUMBA
from .errors import (ConfigError, DivergentIntegral, DivergentMoment, GridTooLarge, IndexTooLarge,
                     Nodal3DError, NotPositiveDefinite, ParameterOutOfRange, QuadratureFailure)
from .spectrum import AnisotropicSpectrum, RadialSpectrum, make_model, sample_wavevector, second_moment
from .synthesis import FieldRealization, GridSample, exact_gaussian_oracle, new_realization, sample_grid
from .nodal import NodalResult, extract_nodal_length, length_convergence_study
from .kacrice import (cross_product_moment, expected_length_anisotropic, expected_length_isotropic,
                      perturbation_check)

__version__ = "0.1.0"
