"""Gaussian samplers driven by the discretized spectral representation.

Every sampler shares one noise scheme: independent standard complex Gaussian
vectors per (radial node, angular atom), shaped by factors whose squares
reproduce the node weights of the covariance quadrature exactly.  Empirical
covariances therefore estimate node_covariance with zero discretization bias,
which keeps the Monte-Carlo checks sharp.

Real-valued output uses Hermitian pairing: noise lives on a half set of the
angular atoms (first nonzero coordinate positive) and the mirrored atoms
carry the conjugate noise, so realness holds by construction instead of by
projection.

Reproducibility: replicate n draws from a counter-based stream at counter
n << 128 under the master seed, in a fixed (node, atom) order, so results are
bit-identical for any worker count.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .linops import OperatorExponent, PsdMatrix, admissibility, c_pow_H
from .measures import lambda_t
from .spectral import (AngularSpectralMeasure, Inadmissible, RadialQuadrature,
                       ScalarH, SelfSimilarModel, is_hermitian)


class NotHermitian(ValueError):
    """Real output requested but the spectral data cannot produce a real field."""


def model_hash(model):
    payload = json.dumps(model.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def resolve_threads(threads):
    """0 means auto: IRFK_THREADS if set, else the CPU count."""
    if threads and threads > 0:
        return int(threads)
    env = os.environ.get("IRFK_THREADS")
    if env:
        return max(1, int(env))
    return max(1, os.cpu_count() or 1)


@dataclass(frozen=True)
class FieldSample:
    grid: np.ndarray                 # (n_pts, d)
    values: np.ndarray               # (replicates, n_pts, m); real or complex
    seed: int
    frame: object = None             # RepresentationFrame or None
    metadata: dict = field(default_factory=dict)

    @property
    def replicates(self):
        return self.values.shape[0]


def _first_nonzero_positive(theta):
    for x in theta:
        if x != 0.0:
            return x > 0.0
    return False


def _complex_normal(gen, shape):
    x = gen.standard_normal(size=shape + (2,))
    return (x[..., 0] + 1j * x[..., 1]) / math.sqrt(2.0)


class SpectralNoiseBasis:
    """Per-(node, atom) factors turning unit complex noise into spectral mass.

    factor[q, j] = radial_scale_q sqrt(w_q) r_q^{-H} A_j where by default
    A_j A_j* = S_j, so factor factor* matches the (q, j) term of the
    covariance node sum.  atom_factors overrides A_j (the stationary sampler
    passes A(theta) chol(mu) there); radial_scale carries its low-frequency
    taper.  With real output the atoms reduce to a half set (first nonzero
    coordinate of theta positive) and the mirrored half is realized by
    conjugation rather than fresh noise.
    """

    def __init__(self, model, real_output=True, radial_scale=None,
                 atom_factors=None):
        if real_output:
            if not is_hermitian(model.sigma):
                raise NotHermitian("real output needs sigma closed under "
                                   "theta -> -theta with conjugated matrices")
            H = model.H_matrix()
            if np.max(np.abs(H.imag)) > 1.0e-12 * max(np.linalg.norm(H), 1.0):
                raise NotHermitian("real output needs a real-entried exponent")
        quad = model.quad
        scale = np.sqrt(quad.weights)
        if radial_scale is not None:
            scale = scale * np.asarray(radial_scale, dtype=float)
        P = model.r_pow_minus_H(quad.nodes)
        if real_output:
            kept = [j for j, th in enumerate(model.sigma.thetas)
                    if _first_nonzero_positive(th)]
            if not kept:
                raise NotHermitian("no angular atoms on the positive half set")
        else:
            kept = list(range(model.sigma.n_atoms))
        factors = []
        for j in kept:
            A = (np.asarray(atom_factors[j], dtype=complex)
                 if atom_factors is not None else model.sigma.matrices[j].chol)
            F = np.einsum("qab,br->qar", P, A) * scale[:, None, None]
            factors.append(F)
        self.model = model
        self.real_output = bool(real_output)
        self.kept = tuple(kept)
        self.factors = tuple(factors)
        self.ranks = tuple(F.shape[2] for F in factors)
        self.total_rank = int(sum(self.ranks))

    def phase_table(self, measures):
        """lambda-hat at every (node, kept atom) for each measure: (n, Q, J)."""
        quad = self.model.quad
        thetas = self.model.sigma.thetas[list(self.kept)]
        pts = quad.nodes[:, None, None] * thetas[None, :, :]
        return np.array([mu.fourier(pts) for mu in measures])

    def field_values(self, phases, replicates, seed, threads=1):
        """Evaluate the noise expansion: (replicates, n_eval, m).

        phases is (n_eval, Q, J) of lambda-hat (or plain exponential) values.
        Real output takes twice the real part, which is exactly the mirrored
        half's conjugate contribution.
        """
        n_eval = phases.shape[0]
        m = self.model.m
        quad_q = self.model.quad.q
        dtype = np.float64 if self.real_output else np.complex128
        out = np.empty((replicates, n_eval, m), dtype=dtype)
        offsets = np.concatenate([[0], np.cumsum(self.ranks)]).astype(int)

        def one(rep):
            gen = np.random.Generator(
                np.random.Philox(key=seed, counter=rep << 128))
            G = _complex_normal(gen, (quad_q, self.total_rank))
            N = np.empty((quad_q, len(self.factors), m), dtype=complex)
            for j, F in enumerate(self.factors):
                Gj = G[:, offsets[j]:offsets[j + 1]]
                N[:, j, :] = np.einsum("qar,qr->qa", F, Gj)
            Y = np.tensordot(phases, N, axes=([1, 2], [0, 1]))
            out[rep] = 2.0 * Y.real if self.real_output else Y

        n_threads = resolve_threads(threads)
        if n_threads <= 1 or replicates <= 1:
            for rep in range(replicates):
                one(rep)
        else:
            with ThreadPoolExecutor(max_workers=n_threads) as pool:
                list(pool.map(one, range(replicates)))
        return out


def sample_irfk(model, frame, grid, replicates, seed, real_output=True, threads=1):
    """Sample the representer field Y(lambda_t) on a point grid.

    Values at frame nodes are exactly zero: the canonical measure there is
    null, so its phase row vanishes identically before any noise enters.
    """
    grid = np.asarray(grid, dtype=float).reshape(-1, model.d)
    basis = SpectralNoiseBasis(model, real_output=real_output)
    probes = [lambda_t(frame, t) for t in grid]
    phases = basis.phase_table(probes)
    values = basis.field_values(phases, replicates, seed, threads=threads)
    meta = {"model_hash": model_hash(model), "kind": "irfk",
            "real_output": bool(real_output)}
    return FieldSample(grid=grid, values=values, seed=int(seed), frame=frame,
                       metadata=meta)


def sample_nfbm(n, H, grid, replicates, seed, quad=None, threads=1):
    """Fractional Brownian motion of order n on the line: a preset of
    sample_irfk with k = n-1, unit-mass symmetric sigma, nodes 0..n-1.

    Valid for every H in (0, n), integer values included; nothing in the
    sampling path needs 2H to avoid integers.
    """
    if not 0.0 < H < n:
        raise Inadmissible(f"H = {H:g} outside (0, {n})")
    sigma = AngularSpectralMeasure(1, 1, [([1.0], [[0.5]]), ([-1.0], [[0.5]])])
    model = SelfSimilarModel(1, n - 1, 1, ScalarH(float(H)), sigma,
                             quad if quad is not None else RadialQuadrature())
    from .measures import build_frame, monomial_basis
    frame = build_frame(monomial_basis(1, n - 1),
                        nodes=[[float(i)] for i in range(n)])
    sample = sample_irfk(model, frame, grid, replicates, seed,
                         real_output=True, threads=threads)
    sample.metadata["kind"] = "nfbm"
    sample.metadata["n"] = int(n)
    return sample


# ---------------------------------------------------------------------------
# random polynomial component (the H = k+1 endpoint)

def degree_exponents(d, degree):
    """Multi-indices of total degree exactly `degree`, lexicographic."""
    return [e for e in itertools.product(range(degree + 1), repeat=d)
            if sum(e) == degree]


def sample_polynomial(k, d, m, coeff_cov, grid, replicates, seed):
    """Homogeneous degree-(k+1) random polynomial field.

    One uncorrelated coefficient vector per multi-index, drawn circular
    complex with the given PSD covariance.  Applying an order-k annihilating
    measure to these values realizes the corresponding functional; the field
    is exactly (k+1)-self-similar pathwise.
    """
    exps = degree_exponents(d, k + 1)
    if len(coeff_cov) != len(exps):
        raise ValueError(f"need {len(exps)} covariances for degree {k + 1} "
                         f"in dimension {d}, got {len(coeff_cov)}")
    chols = [(S if isinstance(S, PsdMatrix) else PsdMatrix(S)).chol
             for S in coeff_cov]
    ranks = [A.shape[1] for A in chols]
    total_rank = int(sum(ranks))
    grid = np.asarray(grid, dtype=float).reshape(-1, d)
    mono = np.prod(grid[:, None, :] ** np.asarray(exps, dtype=float)[None, :, :],
                   axis=2)                       # (n_pts, n_exps)
    values = np.empty((replicates, grid.shape[0], m), dtype=complex)
    offsets = np.concatenate([[0], np.cumsum(ranks)]).astype(int)
    for rep in range(replicates):
        gen = np.random.Generator(np.random.Philox(key=seed, counter=rep << 128))
        G = _complex_normal(gen, (total_rank,))
        Z = np.stack([A @ G[offsets[a]:offsets[a + 1]]
                      for a, A in enumerate(chols)])   # (n_exps, m)
        values[rep] = mono @ Z
    meta = {"kind": "polynomial", "k": int(k), "exponents": exps}
    return FieldSample(grid=grid, values=values, seed=int(seed), metadata=meta)


# ---------------------------------------------------------------------------
# stationary field with tunable local structure

@dataclass(frozen=True)
class StationaryConfig:
    """Stationary spectral field: exponent, per-atom shaping matrices A(theta),
    base angular measure mu, and the low-frequency taper order k."""
    k: int
    exponent: object                 # ScalarH or OperatorExponent
    A: tuple                         # one (m, m) matrix per mu atom
    mu: AngularSpectralMeasure
    quad: RadialQuadrature = RadialQuadrature()

    @property
    def d(self):
        return self.mu.d

    @property
    def m(self):
        return self.mu.m

    def to_dict(self):
        from .linops import matrix_to_dict
        if isinstance(self.exponent, ScalarH):
            exp = {"kind": "scalar", "h": float(self.exponent.h)}
        else:
            exp = {"kind": "operator", "H": self.exponent.to_dict()}
        return {"k": self.k, "exponent": exp,
                "A": [matrix_to_dict(np.asarray(a, dtype=complex)) for a in self.A],
                "mu": self.mu.to_dict(), "quad": self.quad.to_dict(),
                "d": self.d, "m": self.m}

    @classmethod
    def from_dict(cls, data):
        from .linops import matrix_from_dict
        exp_data = data["exponent"]
        if exp_data["kind"] == "scalar":
            exponent = ScalarH(float(exp_data["h"]))
        else:
            exponent = OperatorExponent.from_dict(exp_data["H"])
        mu = AngularSpectralMeasure.from_dict(int(data["d"]), int(data["m"]),
                                              data["mu"])
        A = tuple(matrix_from_dict(a) for a in data["A"])
        quad = RadialQuadrature.from_dict(data.get("quad", {}))
        return cls(k=int(data["k"]), exponent=exponent, A=A, mu=mu, quad=quad)


def tangent_model(config):
    """The self-similar model the stationary field localizes to: same angular
    atoms with matrices S_j = A_j mu_j A_j*."""
    atoms = []
    for th, Mj, Aj in zip(config.mu.thetas, config.mu.matrices, config.A):
        Aj = np.asarray(Aj, dtype=complex)
        atoms.append((th, Aj @ Mj.S @ Aj.conj().T))
    sigma = AngularSpectralMeasure(config.d, config.m, atoms)
    return SelfSimilarModel(config.d, config.k, config.m, config.exponent,
                            sigma, config.quad)


def sample_stationary_field(config, grid, replicates, seed, real_output=True,
                            threads=1):
    """Stationary Gaussian field from the tapered spectral density.

    Node factors sqrt(w_q) (1 ^ r_q)^{k+1} r_q^{-H} A_j chol(mu_j); the taper
    suppresses low frequencies so the spectral integral converges without any
    annihilation from the probe side.
    """
    if isinstance(config.exponent, ScalarH):
        if not 0.0 < config.exponent.h < config.k + 1:
            raise Inadmissible(f"h = {config.exponent.h:g} outside "
                               f"(0, {config.k + 1})")
    else:
        rep = admissibility(config.exponent, config.k)
        if not rep.ok:
            raise Inadmissible("; ".join(rep.reasons))
    model = tangent_model(config)        # reuses validation and radial powers
    grid = np.asarray(grid, dtype=float).reshape(-1, config.d)

    taper = np.minimum(1.0, model.quad.nodes) ** (config.k + 1)
    atom_factors = [np.asarray(Aj, dtype=complex) @ Mj.chol
                    for Aj, Mj in zip(config.A, config.mu.matrices)]
    basis = SpectralNoiseBasis(model, real_output=real_output,
                               radial_scale=taper, atom_factors=atom_factors)
    thetas = model.sigma.thetas[list(basis.kept)]
    pts = model.quad.nodes[:, None, None] * thetas[None, :, :]
    phases = np.exp(1j * np.einsum("gd,qjd->gqj", grid, pts))
    values = basis.field_values(phases, replicates, seed, threads=threads)
    meta = {"kind": "stationary", "model_hash": model_hash(model)}
    return FieldSample(grid=grid, values=values, seed=int(seed), metadata=meta)


def rescaled_increments(sample, s0, r, H, probes):
    """Per-replicate values of r^{-H} sum_atoms c X(s0 + r t).

    The sample grid must contain every point s0 + r t exactly (up to 1e-9
    placement tolerance); annihilating probes kill any degree <= k polynomial
    trend in X by construction.
    """
    if not r > 0:
        raise ValueError("scale r must be positive")
    grid = sample.grid
    s0 = np.asarray(s0, dtype=float).reshape(grid.shape[1])
    N, _, m = sample.values.shape
    out = np.empty((N, len(probes), m), dtype=complex)
    for p, probe in enumerate(probes):
        acc = np.zeros((N, m), dtype=complex)
        for t, c in zip(probe.locations, probe.weights):
            point = s0 + r * t
            dist = np.max(np.abs(grid - point[None, :]), axis=1)
            idx = int(np.argmin(dist))
            if dist[idx] > 1.0e-9 * max(1.0, float(np.max(np.abs(point)))):
                raise ValueError(f"grid point {point} missing from the sample")
            acc += c * sample.values[:, idx, :]
        out[:, p, :] = acc
    if isinstance(H, ScalarH):
        out *= float(r) ** (-H.h)
    elif isinstance(H, OperatorExponent):
        out = np.einsum("ab,npb->npa", c_pow_H(H, 1.0 / float(r)), out)
    else:
        out *= float(r) ** (-float(H))
    if not np.iscomplexobj(sample.values) and np.max(np.abs(out.imag)) == 0.0:
        return out.real
    return out
