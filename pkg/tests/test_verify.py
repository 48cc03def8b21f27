"""Verification harness behavior on known-good and deliberately broken inputs."""

import numpy as np
import pytest

from conftest import operator_model, scalar_model

from test_simulate import frame_1d, stationary_config

from irfk import (
    OperatorExponent,
    RadialQuadrature,
    SelfSimilarModel,
    build_frame,
    check_holder_scaling,
    check_intrinsic_stationarity,
    check_mc_covariance,
    check_self_similarity,
    check_tangent_convergence,
    lambda_t,
    monomial_basis,
    sample_irfk,
)

from conftest import hermitian_sigma_2x2, symmetric_sigma


def default_pairs(model, n=3, seed=0):
    frame = frame_1d(model.k)
    rng = np.random.default_rng(seed)
    pts = rng.uniform(0.3, 1.6, size=(2 * n, model.d))
    probes = [lambda_t(frame, p) for p in pts]
    return list(zip(probes[0::2], probes[1::2]))


def test_self_similarity_scalar_closed_form_exact():
    rep = check_self_similarity(scalar_model(0.3), seed=1)
    assert rep.passed
    assert rep.threshold == 1e-6
    assert rep.statistic <= 1e-12
    assert rep.details["route"] == "closed"
    assert rep.details["c_used"] == [0.5, 2.0, 7.3]


def test_self_similarity_unit_scale_trivial():
    rep = check_self_similarity(scalar_model(0.7), c_values=(1.0,), seed=0)
    assert rep.statistic == 0.0


def test_self_similarity_operator_quadrature():
    rep = check_self_similarity(operator_model(), seed=3)
    assert rep.passed
    assert rep.threshold == 1e-3
    assert rep.details["route"] == "quadrature"
    # quadrature-route scale factors snap to the node-ratio lattice
    h = operator_model().quad.h
    for c in rep.details["c_used"]:
        assert abs(np.log(c) / h - round(np.log(c) / h)) < 1e-9


def test_self_similarity_report_shape():
    rep = check_self_similarity(scalar_model(0.3), seed=0)
    d = rep.to_dict()
    for key in ("name", "statistic", "threshold", "passed", "witnesses"):
        assert key in d
    line = rep.summary_line()
    assert "self_similarity" in line and "PASS" in line


def test_intrinsic_stationarity_analytic():
    shifts = np.array([[0.0], [0.9], [-2.3]])
    for model in (scalar_model(0.45), operator_model()):
        rep = check_intrinsic_stationarity(model, shifts, seed=2)
        assert rep.passed
        assert rep.statistic <= 1e-10


def test_intrinsic_stationarity_empirical():
    model = operator_model(q=128)
    frame = frame_1d()
    pts = [0.4, 0.9]
    shift = 0.5
    # the grid must carry every probe atom, shifted and unshifted
    locs = sorted({0.0, shift} | {p for p in pts} | {p + shift for p in pts})
    grid = np.array([[p] for p in locs])
    sample = sample_irfk(model, frame, grid, replicates=1500, seed=12)
    pairs = [(lambda_t(frame, [pts[0]]), lambda_t(frame, [pts[1]]))]
    rep = check_intrinsic_stationarity(model, np.array([[shift]]),
                                       probe_pairs=pairs, sample=sample, seed=2)
    assert rep.passed


def test_mc_covariance_passes_on_matched_model():
    model = operator_model(q=128)
    frame = frame_1d()
    pts = [0.4, 1.0, 1.6]
    grid = np.vstack([frame.nodes, [[p] for p in pts]])
    sample = sample_irfk(model, frame, grid, replicates=3000, seed=7)
    probes = [lambda_t(frame, [p]) for p in pts]
    pairs = [(probes[0], probes[1]), (probes[1], probes[2])]
    rep = check_mc_covariance(sample, model, pairs)
    assert rep.passed
    assert rep.details["fraction_within_3se"] >= 0.99


def test_mc_covariance_small_sample_flags_power():
    model = scalar_model(0.3, q=64)
    frame = frame_1d()
    grid = np.array([[0.0], [0.5], [1.0]])
    sample = sample_irfk(model, frame, grid, replicates=10, seed=1)
    probes = [lambda_t(frame, [0.5]), lambda_t(frame, [1.0])]
    rep = check_mc_covariance(sample, model, [(probes[0], probes[1])])
    assert rep.passed
    assert rep.details.get("insufficient_power") is True


def test_mc_covariance_detects_wrong_model():
    model = scalar_model(0.3, q=128)
    wrong = scalar_model(0.5, q=128)
    frame = frame_1d()
    pts = [0.4, 1.0, 1.6]
    grid = np.vstack([frame.nodes, [[p] for p in pts]])
    sample = sample_irfk(model, frame, grid, replicates=4000, seed=3)
    probes = [lambda_t(frame, [p]) for p in pts]
    pairs = [(probes[0], probes[1]), (probes[1], probes[2])]
    rep = check_mc_covariance(sample, wrong, pairs)
    assert not rep.passed
    assert rep.witnesses


def test_tangent_convergence_strictly_decreasing():
    rep = check_tangent_convergence(stationary_config(q=256),
                                    r_ladder=(1.0, 0.3, 0.1, 0.03), seed=0)
    assert rep.passed
    errs = rep.details["e"]
    assert all(b < a for a, b in zip(errs, errs[1:]))
    assert errs[-1] <= 0.05


def test_holder_scaling_scalar():
    rep = check_holder_scaling(scalar_model(0.3), seed=0)
    assert rep.passed
    assert rep.details["slope"] == pytest.approx(0.6, abs=1e-6)
    assert rep.details["target"] == pytest.approx(0.6)


def test_holder_scaling_min_direction_dominates():
    rep = check_holder_scaling(operator_model(), seed=0)
    assert rep.passed
    assert rep.details["target"] == pytest.approx(0.6)   # 2 * min Re H


def test_holder_scaling_sigma_masks_directions():
    # sigma excites only the slow eigendirection; its exponent sets the target
    H = OperatorExponent(np.diag([0.3, 0.7]).astype(complex))
    e2 = np.array([[0.0, 0.0], [0.0, 1.0]])
    from irfk import AngularSpectralMeasure
    sig = AngularSpectralMeasure(1, 2, [((1.0,), e2), ((-1.0,), e2)])
    model = SelfSimilarModel(d=1, k=0, m=2, exponent=H, sigma=sig,
                             quad=RadialQuadrature(q=256))
    rep = check_holder_scaling(model, seed=0)
    assert rep.details["target"] == pytest.approx(1.4)
    assert rep.passed


def test_holder_scaling_guards_short_ladders():
    with pytest.raises(ValueError):
        check_holder_scaling(scalar_model(0.3), lags=[0.1])
    with pytest.raises(ValueError):
        check_holder_scaling(scalar_model(0.3), lags=[0.1, 0.2])


def test_reports_are_reproducible():
    a = check_self_similarity(operator_model(), seed=5)
    b = check_self_similarity(operator_model(), seed=5)
    assert a.statistic == b.statistic
    assert a.to_dict() == b.to_dict()
