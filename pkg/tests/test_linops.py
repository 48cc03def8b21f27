"""Operator exponents, scaling actions, and PSD factorizations."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from irfk import (
    NotPsd,
    OperatorExponent,
    PsdMatrix,
    admissibility,
    c_pow_H,
    psd_factor,
    scaling_action_check,
    trace_norm,
)

log_scales = st.floats(-3.0, 3.0, allow_nan=False, allow_infinity=False)


def random_exponent(seed, m=2):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
    # pull the spectrum into the right half plane so powers stay tame
    return OperatorExponent(0.1 * A + 0.6 * np.eye(m))


def test_exponent_basic_fields():
    H = OperatorExponent(np.diag([0.3, 0.7]).astype(complex))
    assert H.m == 2
    assert H.is_normal
    assert sorted(ev.real for ev in H.eigenvalues) == pytest.approx([0.3, 0.7])


def test_exponent_round_trip():
    H = random_exponent(5)
    back = OperatorExponent.from_dict(H.to_dict())
    np.testing.assert_allclose(back.H, H.H, rtol=0, atol=1e-15)


def test_c_pow_identity():
    H = random_exponent(1)
    np.testing.assert_allclose(c_pow_H(H, 1.0), np.eye(2), atol=1e-14)


@given(st.integers(0, 50), log_scales, log_scales)
def test_c_pow_group_law(seed, la, lb):
    H = random_exponent(seed)
    a, b = np.exp(la), np.exp(lb)
    left = c_pow_H(H, a) @ c_pow_H(H, b)
    right = c_pow_H(H, a * b)
    scale = max(np.linalg.norm(right), 1.0)
    np.testing.assert_allclose(left, right, atol=1e-9 * scale)


def test_c_pow_matches_scalar():
    h = 0.37
    H = OperatorExponent(h * np.eye(3, dtype=complex))
    for c in (0.2, 1.7, 9.0):
        np.testing.assert_allclose(c_pow_H(H, c), c**h * np.eye(3), rtol=1e-13)


def test_scaling_action():
    assert scaling_action_check(random_exponent(2)).ok


def test_admissibility_accepts_interior_spectrum():
    H = OperatorExponent(np.diag([0.3, 0.7]).astype(complex))
    rep = admissibility(H, 0)
    assert rep.ok
    assert rep.is_normal
    assert rep.epsilon == pytest.approx(0.3)
    assert rep.delta == pytest.approx(0.3)


def test_admissibility_rejects_out_of_range():
    H = OperatorExponent(np.array([[1.5]], dtype=complex))
    rep = admissibility(H, 0)
    assert not rep.ok
    assert rep.reasons


def test_admissibility_non_normal_criterion():
    H = OperatorExponent(np.array([[0.4, 0.3], [0.0, 0.6]], dtype=complex))
    rep = admissibility(H, 0)
    assert rep.ok
    assert not rep.is_normal
    assert "sufficient" in rep.criterion


def test_psd_matrix_factor_reconstructs():
    rng = np.random.default_rng(3)
    B = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    S = B @ B.conj().T
    P = PsdMatrix(S)
    A = P.chol
    assert P.rank == 3
    np.testing.assert_allclose(A @ A.conj().T, S, atol=1e-12 * np.trace(S).real)


def test_psd_matrix_rank_deficient():
    v = np.array([[1.0], [2.0]])
    P = PsdMatrix(v @ v.T)
    assert P.rank == 1
    assert P.chol.shape == (2, 1)
    np.testing.assert_allclose(P.chol @ P.chol.conj().T, v @ v.T, atol=1e-12)


def test_indefinite_rejected():
    with pytest.raises(NotPsd):
        PsdMatrix(np.diag([1.0, -0.5]))
    with pytest.raises(NotPsd):
        PsdMatrix(np.array([[0.0, 1.0], [0.0, 0.0]]))  # not Hermitian


def test_psd_factor_function():
    S = np.diag([4.0, 0.0, 1.0])
    P = psd_factor(S)
    assert P.rank == 2
    np.testing.assert_allclose(P.chol @ P.chol.conj().T, S, atol=1e-13)


def test_trace_norm():
    S = np.diag([2.0, 3.0])
    assert trace_norm(S) == pytest.approx(5.0)
