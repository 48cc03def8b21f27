"""Angular measures, radial grids, and model validation."""

import numpy as np
import pytest

from conftest import hermitian_sigma_2x2, one_sided_sigma, symmetric_sigma

from irfk import (
    AngularSpectralMeasure,
    Inadmissible,
    OperatorExponent,
    RadialQuadrature,
    ScalarH,
    SelfSimilarModel,
    chi_k_weight,
    hermitize,
    is_hermitian,
    sym_antisym_split,
    trace_integrability,
)


def test_angular_measure_fields():
    sig = hermitian_sigma_2x2()
    assert sig.d == 1
    assert sig.m == 2
    assert sig.n_atoms == 2
    assert sig.total_trace() == pytest.approx(3.6)
    stacked = sum(M.S for M in sig.matrices)
    np.testing.assert_allclose(sig.total_matrix(), stacked)


def test_angular_measure_round_trip():
    sig = hermitian_sigma_2x2()
    back = AngularSpectralMeasure.from_dict(sig.d, sig.m, sig.to_dict())
    np.testing.assert_array_equal(back.thetas, sig.thetas)
    for a, b in zip(back.matrices, sig.matrices):
        np.testing.assert_array_equal(a.S, b.S)


def test_angular_measure_rejects_bad_shapes():
    with pytest.raises(Exception):
        AngularSpectralMeasure(1, 2, [((1.0,), np.eye(3))])


def test_is_hermitian():
    assert is_hermitian(symmetric_sigma(2))
    assert is_hermitian(hermitian_sigma_2x2())
    assert not is_hermitian(one_sided_sigma())


def test_hermitize_and_split():
    sig = one_sided_sigma(w=2.0)
    herm = hermitize(sig)
    assert is_hermitian(herm)
    # one-sided atom gets its mirrored conjugate added outright
    assert herm.total_trace() == pytest.approx(2.0 * sig.total_trace())
    sym, anti = sym_antisym_split(sig)
    assert is_hermitian(sym)
    total = {tuple(t): np.zeros((1, 1), dtype=complex)
             for t in np.vstack([sym.thetas, anti.thetas])}
    for t, S in zip(sym.thetas, sym.matrices):
        total[tuple(t)] += S.S
    for t, S in zip(anti.thetas, anti.matrices):
        total[tuple(t)] += S
    # symmetric + antisymmetric parts reassemble the original measure
    np.testing.assert_allclose(total[(1.0,)], [[2.0]], atol=1e-14)
    np.testing.assert_allclose(total[(-1.0,)], [[0.0]], atol=1e-14)


def test_radial_quadrature_geometry():
    q = RadialQuadrature(r_min=1e-4, r_max=1e4, q=512)
    assert q.h == pytest.approx(np.log(1e8) / 512)
    ratios = q.nodes[1:] / q.nodes[:-1]
    np.testing.assert_allclose(ratios, np.exp(q.h), rtol=1e-12)
    np.testing.assert_allclose(q.weights, q.h)
    assert q.nodes[0] > 1e-4 and q.nodes[-1] < 1e4  # midpoints stay interior
    q2 = q.with_q(128)
    assert len(q2.nodes) == 128
    back = RadialQuadrature.from_dict(q.to_dict())
    assert back == q


def test_model_fields_and_round_trip():
    model = SelfSimilarModel(d=1, k=0, m=2,
                             exponent=OperatorExponent(np.diag([0.3, 0.7]).astype(complex)),
                             sigma=hermitian_sigma_2x2())
    assert not model.is_scalar
    assert model.min_re == pytest.approx(0.3)
    assert model.max_re == pytest.approx(0.7)
    np.testing.assert_allclose(model.H_matrix(), np.diag([0.3, 0.7]))
    P = model.r_pow_minus_H(np.array([1.0, 2.0]))
    assert P.shape == (2, 2, 2)
    np.testing.assert_allclose(P[0], np.eye(2), atol=1e-14)
    back = SelfSimilarModel.from_dict(model.to_dict())
    assert back.d == model.d and back.k == model.k and back.m == model.m
    np.testing.assert_allclose(back.H_matrix(), model.H_matrix())


def test_scalar_model_flag():
    model = SelfSimilarModel(d=1, k=0, m=2, exponent=ScalarH(0.4),
                             sigma=symmetric_sigma(2))
    assert model.is_scalar
    assert model.min_re == model.max_re == pytest.approx(0.4)


def test_inadmissible_exponent_rejected():
    with pytest.raises(Inadmissible):
        SelfSimilarModel(d=1, k=0, m=1, exponent=ScalarH(1.5),
                         sigma=symmetric_sigma())
    with pytest.raises(Inadmissible):
        SelfSimilarModel(d=1, k=0, m=1, exponent=ScalarH(-0.1),
                         sigma=symmetric_sigma())


def test_dimension_mismatch_rejected():
    with pytest.raises(Exception):
        SelfSimilarModel(d=1, k=0, m=2, exponent=ScalarH(0.4),
                         sigma=symmetric_sigma(1))


def test_chi_k_weight_scaling_law():
    model = SelfSimilarModel(d=1, k=0, m=1, exponent=ScalarH(0.3),
                             sigma=symmetric_sigma())
    # r = 1 leaves the angular atom bare
    np.testing.assert_allclose(chi_k_weight(model, 1.0, 0), 0.5 * np.eye(1),
                               atol=1e-14)
    W1 = chi_k_weight(model, 0.7, 0)
    W2 = chi_k_weight(model, 1.4, 0)
    np.testing.assert_allclose(W2, 2.0 ** (-2 * 0.3) * W1, rtol=1e-13)
    with pytest.raises(ValueError):
        chi_k_weight(model, 0.0, 0)


def test_trace_integrability():
    model = SelfSimilarModel(d=1, k=0, m=2,
                             exponent=OperatorExponent(np.diag([0.3, 0.7]).astype(complex)),
                             sigma=hermitian_sigma_2x2())
    rep = trace_integrability(model)
    assert rep.ok
    assert rep.value > 0
    if rep.analytic_value is not None:
        assert rep.value == pytest.approx(rep.analytic_value, rel=1e-3)
