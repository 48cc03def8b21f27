"""Measure algebra, annihilation orders, and frame construction."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from irfk import (
    FiniteMeasure,
    SingularFrame,
    annihilation_order,
    build_frame,
    convolve_reflect,
    lambda_t,
    monomial_basis,
)

finite_floats = st.floats(-5.0, 5.0, allow_nan=False, allow_infinity=False)


def measures(dim, max_atoms=4):
    def build(pairs):
        return FiniteMeasure(dim, [(loc, complex(re, im)) for loc, re, im in pairs])
    atom = st.tuples(
        st.lists(finite_floats, min_size=dim, max_size=dim),
        finite_floats, finite_floats)
    return st.lists(atom, min_size=1, max_size=max_atoms).map(build)


def test_construction_and_mass():
    mu = FiniteMeasure(1, [([0.5], 1.0), ([0.0], -1.0)])
    assert mu.dim == 1
    assert mu.n_atoms == 2
    assert mu.total_mass() == pytest.approx(0.0)
    assert mu.total_variation() == pytest.approx(2.0)
    assert not mu.is_null
    assert FiniteMeasure(1).is_null


def test_duplicate_locations_merge():
    mu = FiniteMeasure(1, [([1.0], 1.0), ([1.0], 2.0)])
    assert mu.n_atoms == 1
    assert mu.weights[0] == pytest.approx(3.0)


def test_delta():
    d = FiniteMeasure.delta([0.3, -0.4])
    assert d.dim == 2
    assert d.n_atoms == 1
    assert d.total_mass() == pytest.approx(1.0)
    np.testing.assert_allclose(d.locations[0], [0.3, -0.4])
    with pytest.raises(ValueError):
        FiniteMeasure(1, [([0.5], [1.0, 2.0])])


def test_fourier_at_zero_is_total_mass():
    mu = FiniteMeasure(2, [([1.0, 0.0], 2.0), ([0.0, 1.0], -0.5 + 1.0j)])
    val = mu.fourier(np.zeros((1, 2)))
    assert val[0] == pytest.approx(1.5 + 1.0j)


def test_scale_translate_reflect():
    mu = FiniteMeasure(1, [([2.0], 1.0)])
    np.testing.assert_allclose(mu.scale(3.0).locations[0], [6.0])
    np.testing.assert_allclose(mu.translate([1.0]).locations[0], [3.0])
    np.testing.assert_allclose(mu.reflect().locations[0], [-2.0])
    w = FiniteMeasure(1, [([2.0], 1.0 + 1.0j)]).conj_reflect()
    assert w.weights[0] == pytest.approx(1.0 - 1.0j)
    np.testing.assert_allclose(w.locations[0], [-2.0])


@given(measures(1), measures(1), st.lists(finite_floats, min_size=3, max_size=3))
def test_convolve_reflect_fourier_factorizes(lam, mu, xi_vals):
    # nu = lam * reflect(conj(mu)) has Fourier transform lam_hat * conj(mu_hat)
    xi = np.array(xi_vals).reshape(3, 1)
    nu = convolve_reflect(lam, mu)
    lhs = nu.fourier(xi)
    rhs = lam.fourier(xi) * np.conj(mu.fourier(xi))
    scale = max(np.max(np.abs(rhs)), 1.0)
    np.testing.assert_allclose(lhs, rhs, atol=1e-12 * scale)


def test_annihilation_order_sentinels():
    assert annihilation_order(FiniteMeasure.delta([1.0]), 2) == -1
    diff = FiniteMeasure(1, [([1.0], 1.0), ([0.0], -1.0)])
    assert annihilation_order(diff, 3) == 0
    null = FiniteMeasure(1)
    assert annihilation_order(null, 2) == 3  # k_max + 1: annihilates everything


def test_monomial_basis_counts():
    from math import comb
    for d in (1, 2, 3):
        for k in (0, 1, 2):
            basis = monomial_basis(d, k)
            assert basis.size == comb(k + d, d)
            assert len(basis.exponents) == basis.size


def test_build_frame_deterministic():
    basis = monomial_basis(2, 1)
    fa = build_frame(basis, seed=7)
    fb = build_frame(basis, seed=7)
    np.testing.assert_array_equal(fa.nodes, fb.nodes)
    fc = build_frame(basis, seed=8)
    assert not np.array_equal(fa.nodes, fc.nodes)


def test_build_frame_explicit_nodes():
    basis = monomial_basis(1, 1)
    frame = build_frame(basis, nodes=[[0.0], [1.0]])
    np.testing.assert_allclose(frame.nodes, [[0.0], [1.0]])


def test_singular_nodes_rejected():
    basis = monomial_basis(1, 1)
    with pytest.raises(SingularFrame):
        build_frame(basis, nodes=[[1.0], [1.0]])


def test_lambda_t_at_frame_node_is_null():
    frame = build_frame(monomial_basis(2, 1), seed=3)
    for node in frame.nodes:
        assert lambda_t(frame, node).is_null


@given(st.integers(1, 3), st.integers(0, 2), st.integers(0, 2**31 - 1))
def test_lambda_t_annihilates(d, k, seed):
    rng = np.random.default_rng(seed)
    frame = build_frame(monomial_basis(d, k), seed=seed % 1000)
    t = rng.uniform(-2.0, 2.0, size=d)
    lam = lambda_t(frame, t)
    assert annihilation_order(lam, k) >= k


@given(st.integers(1, 2), st.integers(0, 1), st.integers(0, 2**31 - 1))
def test_convolve_reflect_doubles_order(d, k, seed):
    rng = np.random.default_rng(seed)
    frame = build_frame(monomial_basis(d, k), seed=seed % 1000)
    lam = lambda_t(frame, rng.uniform(-1.5, 1.5, size=d))
    mu = lambda_t(frame, rng.uniform(-1.5, 1.5, size=d))
    nu = convolve_reflect(lam, mu)
    assert annihilation_order(nu, 2 * k + 1) >= 2 * k + 1


def test_round_trip_dict():
    mu = FiniteMeasure(2, [([1.0, -0.5], 1.0 - 2.0j), ([0.0, 0.0], 0.5)])
    back = FiniteMeasure.from_dict(mu.to_dict())
    np.testing.assert_array_equal(back.locations, mu.locations)
    np.testing.assert_array_equal(back.weights, mu.weights)
