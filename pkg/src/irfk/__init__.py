"""Operator self-similar intrinsic random functions of order k.

Construction, evaluation, simulation, and verification of vector-valued
random fields that are stationary and self-similar relative to polynomials
of degree at most k, specified by an angular spectral measure and a scaling
exponent (scalar or matrix).
"""

__version__ = "0.1.0"

from .covariance import (CondPsdReport, IJConstants, IntegerTwoH,
                         K_closed_form, K_quadrature, K_spectral,
                         NotAnnihilating, OutOfRange, QuadratureValue,
                         cond_psd_check, cross_covariance, ij_constants,
                         ij_integer_constant, node_covariance, random_probe,
                         random_probes, reversibility_gap)
from .linops import (AdmissibilityReport, NotPsd, OperatorExponent, PsdMatrix,
                     admissibility, c_pow_H, psd_factor, scaling_action_check,
                     trace_norm)
from .measures import (FiniteMeasure, MonomialBasis, RepresentationFrame,
                       SingularFrame, annihilation_order, build_frame,
                       convolve_reflect, lambda_t, monomial_basis)
from .simulate import (FieldSample, NotHermitian, SpectralNoiseBasis,
                       StationaryConfig, degree_exponents, model_hash,
                       rescaled_increments, resolve_threads, sample_irfk,
                       sample_nfbm, sample_polynomial, sample_stationary_field,
                       tangent_model)
from .spectral import (AngularSignedMeasure, AngularSpectralMeasure,
                       Inadmissible, RadialQuadrature, ScalarH,
                       SelfSimilarModel, TraceIntegrabilityReport,
                       chi_k_weight, hermitize, is_hermitian,
                       sym_antisym_split, trace_integrability)
from .verify import (VerificationReport, check_holder_scaling,
                     check_intrinsic_stationarity, check_mc_covariance,
                     check_self_similarity, check_tangent_convergence)

__all__ = [name for name in dir() if not name.startswith("_")]
