"""Covariance evaluation against frozen oracle constants and dual routes.

The I/J reference values below were generated by scripts/ij_reference.py,
which evaluates the defining integral

    I(H) + i J(H) = int_0^inf (e^{ir} - sum_{j<=floor(2H)} (ir)^j/j!) r^{-2H-1} dr

with mpmath at 50 digits via the reflection identity Gamma(-2H) e^{-i pi H}
and cross-checks it by direct high-precision quadrature.  They are frozen
here so the test never shares code with the package's own evaluation.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import (
    hermitian_sigma_2x2,
    one_sided_model,
    operator_model,
    scalar_model,
    symmetric_sigma,
)

from irfk import (
    FiniteMeasure,
    IntegerTwoH,
    K_closed_form,
    K_quadrature,
    NotAnnihilating,
    build_frame,
    cond_psd_check,
    convolve_reflect,
    cross_covariance,
    ij_constants,
    ij_integer_constant,
    lambda_t,
    monomial_basis,
    node_covariance,
    random_probes,
    reversibility_gap,
)

# (I(H), J(H)) keyed by H as a string; 25 significant digits
IJ_REFERENCE = {
    "0.05": (-10.55472109508566271489096, 1.671703593426719507829063),
    "0.15": (-3.855252567154920293147865, 1.9643492971941613559337),
    "0.25": (-2.506628274631000502415765, 2.506628274631000502415765),
    "0.3": (-2.173002445087616436477397, 2.990881278558249329647168),
    "0.35": (-1.940205571036599102901856, 3.807867836556049112828604),
    "0.4": (-1.773310906908746094211898, 5.457689784486366185719776),
    "0.45": (-1.653600541663734398989615, 10.44042292459687477463337),
    "0.4995": (-1.57146200714565110620408, 1000.42296245764870472375),
    "0.5005": (-1.570133789946161308534301, -999.5773938219078171317072),
    "0.65": (-1.511037920918585658410538, -2.965578897811477148575281),
    "0.7": (-1.563080788715066282687196, -2.151396137823239568814859),
    "0.9": (-3.032049880270203436510987, -0.985172726060414496784388),
    "0.95": (-5.494959433998355144543877, -0.870316074559860209994534),
    "1.3": (0.5223563569922154895378359, -0.718961845807271473472877),
    "1.35": (0.4227027387879300877781822, -0.8296008358509910921195217),
    "1.7": (0.191554018224885573858725, 0.2636514874783381824528014),
    "1.9": (0.2849670940103574658374987, 0.09259142162221940759251766),
}

# at integer 2H one constant stays finite: ("I" or "J", value)
IJ_INTEGER_REFERENCE = {
    1: ("I", -1.570796326794896619231322),
    2: ("J", -0.7853981633974483096156608),
    3: ("I", 0.2617993877991494365385536),
}


def test_ij_constants_match_frozen_oracle():
    for hs, (iref, jref) in IJ_REFERENCE.items():
        h = float(hs)
        k = 0 if h < 1.0 else 1
        c = ij_constants(h, k)
        assert c.I == pytest.approx(iref, rel=1e-10), f"I({hs})"
        assert c.J == pytest.approx(jref, rel=1e-10), f"J({hs})"


def test_ij_integer_constants():
    for two_h, (which, val) in IJ_INTEGER_REFERENCE.items():
        c = ij_integer_constant(two_h, k=1)
        got = c.I if which == "I" else c.J
        assert got == pytest.approx(val, rel=1e-13), f"2H={two_h}"


def test_ij_constants_reject_integer_two_h():
    with pytest.raises(IntegerTwoH):
        ij_constants(0.5, 0)
    with pytest.raises(IntegerTwoH):
        ij_constants(1.0, 1)


def frame_1d():
    return build_frame(monomial_basis(1, 0), nodes=[[0.0]])


def probe(frame, t):
    return lambda_t(frame, [t])


def test_closed_form_fbm_shape():
    # d=1, k=0, symmetric sigma(+-1) = w: the two-point function collapses to
    # the two-parameter fBm kernel with amplitude 2 w |I(H)|
    w = 0.5
    frame = frame_1d()
    for hs in ("0.3", "0.7"):
        h = float(hs)
        model = scalar_model(h, w=w)
        amp = 2.0 * w * abs(IJ_REFERENCE[hs][0])
        for s in (0.4, 1.0, 1.7):
            for t in (0.6, 1.2):
                nu = convolve_reflect(probe(frame, s), probe(frame, t))
                want = amp * (abs(s) ** (2 * h) + abs(t) ** (2 * h)
                              - abs(s - t) ** (2 * h))
                got = K_closed_form(nu, model)
                assert got.shape == (1, 1)
                assert got[0, 0].real == pytest.approx(want, rel=1e-10)
                assert got[0, 0].imag == pytest.approx(0.0, abs=1e-12 * abs(want))


def test_closed_vs_quadrature_scalar():
    frame = frame_1d()
    rng = np.random.default_rng(11)
    for h in (0.15, 0.35, 0.65, 0.9):
        model = scalar_model(h)
        for lam, mu in zip(random_probes(frame, 6, rng, low=0.3, high=1.5),
                           random_probes(frame, 6, rng, low=0.3, high=1.5)):
            closed = K_closed_form(convolve_reflect(lam, mu), model)
            quad = K_quadrature(lam, mu, model)
            scale = max(np.linalg.norm(closed), 1e-30)
            assert np.linalg.norm(closed - quad.C) <= 1e-3 * scale
            assert np.isfinite(quad.err_est) and quad.err_est >= 0.0


def test_closed_vs_quadrature_matrix_sigma():
    # m=2 with complex off-diagonal sigma, scalar exponent: both routes apply
    from irfk import RadialQuadrature, ScalarH, SelfSimilarModel
    model = SelfSimilarModel(d=1, k=0, m=2, exponent=ScalarH(0.4),
                             sigma=hermitian_sigma_2x2(),
                             quad=RadialQuadrature(q=512))
    frame = frame_1d()
    rng = np.random.default_rng(4)
    for lam, mu in zip(random_probes(frame, 4, rng, low=0.3, high=1.5),
                       random_probes(frame, 4, rng, low=0.3, high=1.5)):
        closed = K_closed_form(convolve_reflect(lam, mu), model)
        quad = K_quadrature(lam, mu, model).C
        scale = max(np.linalg.norm(closed), 1e-30)
        assert np.linalg.norm(closed - quad) <= 1e-3 * scale


def test_integer_branch_continuity():
    # 2H = 1 log branch is the limit of the generic branch; probes keep all
    # pairwise differences inside [0.5, 2] with mixed signs so the limit
    # kernel is nondegenerate
    frame = frame_1d()
    pairs = [(0.8, 1.5), (0.6, 1.3), (0.9, 1.7)]
    center = scalar_model(0.5)
    for s, t in pairs:
        nu = convolve_reflect(probe(frame, s), probe(frame, t))
        K_mid = K_closed_form(nu, center)
        scale = np.linalg.norm(K_mid)
        assert scale > 0
        for h in (0.5 - 5e-4, 0.5 + 5e-4):
            K_near = K_closed_form(nu, scalar_model(h))
            assert np.linalg.norm(K_near - K_mid) <= 1e-2 * scale


def test_even_integer_branch_runs():
    # 2H = 2 inside k=1: log branch on the I side
    frame = build_frame(monomial_basis(1, 1), nodes=[[0.0], [1.0]])
    model = scalar_model(1.0, k=1)
    lam = lambda_t(frame, [0.4])
    mu = lambda_t(frame, [1.7])
    K_mid = K_closed_form(convolve_reflect(lam, mu), model)
    K_near = K_closed_form(convolve_reflect(lam, mu), scalar_model(1.0005, k=1))
    scale = np.linalg.norm(K_mid)
    assert scale > 0
    assert np.linalg.norm(K_near - K_mid) <= 1e-2 * scale


def test_not_annihilating_rejected():
    model = scalar_model(0.3)
    bad = FiniteMeasure(1, [([1.0], 1.0)])   # point mass, not in Lambda_0
    with pytest.raises(NotAnnihilating):
        K_quadrature(bad, bad, model)
    with pytest.raises(NotAnnihilating):
        K_closed_form(convolve_reflect(bad, bad), model)


def test_node_covariance_is_plain_riemann_sum():
    # tiny Q so the reference sum is cheap to write out longhand
    from irfk import RadialQuadrature, ScalarH, SelfSimilarModel
    model = SelfSimilarModel(d=1, k=0, m=1, exponent=ScalarH(0.3),
                             sigma=symmetric_sigma(),
                             quad=RadialQuadrature(r_min=0.1, r_max=10.0, q=16))
    frame = frame_1d()
    lam, mu = probe(frame, 0.7), probe(frame, 1.1)
    got = node_covariance(lam, mu, model)
    quad = model.quad
    acc = np.zeros((1, 1), dtype=complex)
    for r, w in zip(quad.nodes, quad.weights):
        for th, S in zip(model.sigma.thetas, model.sigma.matrices):
            lh = lam.fourier((r * th).reshape(1, 1))[0]
            mh = mu.fourier((r * th).reshape(1, 1))[0]
            acc += w * lh * np.conj(mh) * r ** (-2 * 0.3) * S.S
    np.testing.assert_allclose(got, acc, rtol=1e-13)


def test_cross_covariance_hermitian_pair():
    model = operator_model()
    frame = frame_1d()
    lam, mu = probe(frame, 0.5), probe(frame, 1.2)
    C_lm = cross_covariance(lam, mu, model)
    C_ml = cross_covariance(mu, lam, model)
    np.testing.assert_allclose(C_lm, C_ml.conj().T, atol=1e-12 * np.linalg.norm(C_lm))


def test_cond_psd_scalar_and_operator():
    for model in (scalar_model(0.3), operator_model(q=256)):
        rep = cond_psd_check(model, trials=10, seed=1)
        assert rep.ok
        assert rep.min_eig >= -1e-8 * rep.scale


def test_reversibility_symmetric_is_exact():
    frame = frame_1d()
    model = scalar_model(0.3)
    probes = [convolve_reflect(probe(frame, 0.5), probe(frame, 1.2))]
    assert reversibility_gap(model, probes) <= 1e-12


def test_reversibility_one_sided_matches_J():
    # gap = 2 w |J(H)| |sum_a c_a sign(y_a) |y_a|^{2H}| for a single atom at +1
    h = 0.3
    model = one_sided_model(h)
    frame = frame_1d()
    nu = convolve_reflect(probe(frame, 0.5), probe(frame, 1.2))
    gap = reversibility_gap(model, [nu])
    signed = sum(w.real * math.copysign(abs(y[0]) ** (2 * h), y[0])
                 for y, w in zip(nu.locations, nu.weights))
    expected = 2.0 * abs(IJ_REFERENCE["0.3"][1]) * abs(signed)
    assert gap == pytest.approx(expected, rel=1e-6)
    scale = np.linalg.norm(K_closed_form(nu, model))
    assert gap >= 1e-3 * scale


@settings(max_examples=25)
@given(st.integers(0, 2**31 - 1))
def test_quadrature_hermitian_in_probes(seed):
    rng = np.random.default_rng(seed)
    model = scalar_model(0.45)
    frame = frame_1d()
    lam, mu = random_probes(frame, 2, rng, low=0.2, high=1.4)
    A = K_quadrature(lam, mu, model).C
    B = K_quadrature(mu, lam, model).C
    np.testing.assert_allclose(A, B.conj().T, atol=1e-10 * max(np.linalg.norm(A), 1e-30))
