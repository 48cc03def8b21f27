"""Shared model builders and hypothesis configuration."""

import numpy as np
from hypothesis import HealthCheck, settings

from irfk import (
    AngularSpectralMeasure,
    OperatorExponent,
    RadialQuadrature,
    ScalarH,
    SelfSimilarModel,
)

settings.register_profile(
    "numeric",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much],
)
settings.load_profile("numeric")


def symmetric_sigma(m=1, w=0.5):
    # equal mass at +1 and -1 on the 0-sphere
    S = w * np.eye(m)
    return AngularSpectralMeasure(1, m, [((1.0,), S), ((-1.0,), S)])


def one_sided_sigma(m=1, w=1.0):
    return AngularSpectralMeasure(1, m, [((1.0,), w * np.eye(m))])


def hermitian_sigma_2x2(w=1.0):
    # complex off-diagonal; Hermitian as an angular measure via S(-1) = conj(S(1))
    S = w * np.array([[1.0, 0.2 + 0.1j], [0.2 - 0.1j, 0.8]])
    return AngularSpectralMeasure(1, 2, [((1.0,), S), ((-1.0,), S.conj())])


def scalar_model(h, d=1, k=0, m=1, w=0.5, q=512):
    if d != 1:
        raise ValueError("scalar_model builds d=1 fixtures only")
    return SelfSimilarModel(
        d=1, k=k, m=m, exponent=ScalarH(h), sigma=symmetric_sigma(m, w),
        quad=RadialQuadrature(q=q))


def operator_model(q=512, k=0):
    H = np.diag([0.3, 0.7]).astype(complex)
    return SelfSimilarModel(
        d=1, k=k, m=2, exponent=OperatorExponent(H),
        sigma=hermitian_sigma_2x2(), quad=RadialQuadrature(q=q))


def one_sided_model(h, q=512):
    return SelfSimilarModel(
        d=1, k=0, m=1, exponent=ScalarH(h), sigma=one_sided_sigma(),
        quad=RadialQuadrature(q=q))
