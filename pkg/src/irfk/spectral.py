"""Angular spectral measures, radial quadrature, and the self-similar model bundle.

A model is (d, k, m, exponent, sigma, quad): the spectral measure of an
order-k intrinsically stationary field whose covariance is homogeneous under
the scaling family c^H.  In polar form the spectral measure has an atomic
angular part sigma on the unit sphere and the radial density r^{-H} . r^{-H*}
against dr/r; the quadrature object discretizes that radial integral on a
log-spaced grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .linops import OperatorExponent, PsdMatrix, _pow_family, admissibility

unit_tol = 1.0e-12


class Inadmissible(ValueError):
    """Exponent spectrum incompatible with a finite order-k spectral model."""


class AngularSpectralMeasure:
    """Finite list of (unit direction theta, PSD matrix S) atoms on the sphere.

    Duplicate directions (within tolerance) are merged by summing their
    matrices.  Total trace mass must be positive for a usable model, which is
    enforced at model construction rather than here.
    """

    __slots__ = ("d", "m", "thetas", "matrices")

    def __init__(self, d, m, atoms):
        thetas, mats = [], []
        for theta, S in atoms:
            theta = np.asarray(theta, dtype=float).reshape(d)
            nrm = np.linalg.norm(theta)
            if abs(nrm - 1.0) > 1.0e-6:
                raise ValueError(f"direction must be unit length, |theta| = {nrm:.6g}")
            theta = theta / nrm   # clean residual below unit_tol
            if not isinstance(S, PsdMatrix):
                S = PsdMatrix(S)
            if S.m != m:
                raise ValueError("atom matrix dimension mismatch")
            for i, seen in enumerate(thetas):
                if np.linalg.norm(seen - theta) <= unit_tol:
                    mats[i] = PsdMatrix(mats[i].S + S.S)
                    break
            else:
                thetas.append(theta)
                mats.append(S)
        if not thetas:
            raise ValueError("need at least one angular atom")
        th = np.array(thetas)
        th.setflags(write=False)
        object.__setattr__(self, "d", int(d))
        object.__setattr__(self, "m", int(m))
        object.__setattr__(self, "thetas", th)
        object.__setattr__(self, "matrices", tuple(mats))

    def __setattr__(self, name, value):
        raise AttributeError("AngularSpectralMeasure is immutable")

    @property
    def n_atoms(self):
        return len(self.matrices)

    def total_matrix(self):
        """sigma(S): the sum of all atom matrices."""
        return sum(S.S for S in self.matrices)

    def total_trace(self):
        return float(np.real(np.trace(self.total_matrix())))

    def to_dict(self):
        return {"atoms": [{"theta": [float(x) for x in th], "S": S.to_dict()}
                          for th, S in zip(self.thetas, self.matrices)]}

    @classmethod
    def from_dict(cls, d, m, data):
        return cls(d, m, [(a["theta"], PsdMatrix.from_dict(a["S"]))
                          for a in data["atoms"]])


class AngularSignedMeasure:
    """Like AngularSpectralMeasure but atoms carry arbitrary Hermitian matrices.

    This is the widened type the anti-symmetric component of a split lives in;
    its atoms are generally not PSD.
    """

    __slots__ = ("d", "m", "thetas", "matrices")

    def __init__(self, d, m, atoms):
        thetas, mats = [], []
        for theta, S in atoms:
            thetas.append(np.asarray(theta, dtype=float).reshape(d))
            mats.append(np.asarray(S, dtype=complex))
        object.__setattr__(self, "d", int(d))
        object.__setattr__(self, "m", int(m))
        object.__setattr__(self, "thetas", np.array(thetas) if thetas else np.zeros((0, d)))
        object.__setattr__(self, "matrices", tuple(mats))

    def __setattr__(self, name, value):
        raise AttributeError("AngularSignedMeasure is immutable")

    @property
    def n_atoms(self):
        return len(self.matrices)

    def max_norm(self):
        return max((float(np.linalg.norm(S)) for S in self.matrices), default=0.0)


def _find_atom(thetas, theta):
    for i, seen in enumerate(thetas):
        if np.linalg.norm(seen - theta) <= unit_tol:
            return i
    return -1


def is_hermitian(sigma, tol=1.0e-10):
    """True when the atom set is closed under reflection with S_{-theta} = conj(S_theta)."""
    scale = max(np.linalg.norm(S.S) for S in sigma.matrices)
    for th, S in zip(sigma.thetas, sigma.matrices):
        j = _find_atom(sigma.thetas, -th)
        if j < 0:
            return False
        if np.linalg.norm(sigma.matrices[j].S - np.conj(S.S)) > tol * max(scale, 1.0):
            return False
    return True


def hermitize(sigma):
    """Closure of sigma under theta -> -theta with S_{-theta} = conj(S_theta).

    Where both directions are present the pair is averaged into Hermitian
    form; a one-sided atom gets its mirrored conjugate added outright (so a
    one-sided input doubles its total mass).  Idempotent, and the result
    always satisfies is_hermitian.
    """
    handled = set()
    atoms = []
    for i, (th, S) in enumerate(zip(sigma.thetas, sigma.matrices)):
        if i in handled:
            continue
        j = _find_atom(sigma.thetas, -th)
        if j == i:   # cannot happen for unit vectors, kept for clarity
            continue
        if j >= 0:
            handled.add(j)
            Sp = 0.5 * (S.S + np.conj(sigma.matrices[j].S))
            atoms.append((th, PsdMatrix(Sp)))
            atoms.append((-th, PsdMatrix(np.conj(Sp))))
        else:
            atoms.append((th, S))
            atoms.append((-th, PsdMatrix(np.conj(S.S))))
        handled.add(i)
    return AngularSpectralMeasure(sigma.d, sigma.m, atoms)


def sym_antisym_split(sigma):
    """Split sigma into reflection-symmetric and anti-symmetric parts.

    sigma_s(A) = (sigma(A) + sigma(-A))/2 stays PSD atom-wise; the
    anti-symmetric remainder sigma_a = sigma - sigma_s is returned in the
    widened signed type.  sigma_a == 0 exactly when sigma is symmetric.
    """
    sym_atoms, anti_atoms = [], []
    handled = set()
    for i, (th, S) in enumerate(zip(sigma.thetas, sigma.matrices)):
        if i in handled:
            continue
        j = _find_atom(sigma.thetas, -th)
        S_here = S.S
        S_there = sigma.matrices[j].S if j >= 0 else np.zeros_like(S_here)
        if j >= 0:
            handled.add(j)
        half_sum = 0.5 * (S_here + S_there)
        half_diff = 0.5 * (S_here - S_there)
        sym_atoms.append((th, PsdMatrix(half_sum)))
        sym_atoms.append((-th, PsdMatrix(half_sum)))
        anti_atoms.append((th, half_diff))
        anti_atoms.append((-th, -half_diff))
        handled.add(i)
    sigma_s = AngularSpectralMeasure(sigma.d, sigma.m, sym_atoms)
    sigma_a = AngularSignedMeasure(sigma.d, sigma.m, anti_atoms)
    return sigma_s, sigma_a


@dataclass(frozen=True)
class RadialQuadrature:
    """Log-midpoint rule for integrals against dr/r on [r_min, r_max].

    Weights are the constant log spacing h, so sum(weights) equals
    ln(r_max / r_min) exactly; nodes sit at panel midpoints in log space.
    """

    r_min: float = 1.0e-4
    r_max: float = 1.0e4
    q: int = 512

    def __post_init__(self):
        if not (0 < self.r_min < self.r_max):
            raise ValueError("need 0 < r_min < r_max")
        if self.q < 2:
            raise ValueError("need at least two nodes")

    @property
    def h(self):
        return np.log(self.r_max / self.r_min) / self.q

    @property
    def nodes(self):
        return self.r_min * np.exp((np.arange(self.q) + 0.5) * self.h)

    @property
    def weights(self):
        return np.full(self.q, self.h)

    def panel_edge(self, n):
        """Edge r_min * e^{n h}; n = 0 is r_min, n = q is r_max."""
        return self.r_min * np.exp(n * self.h)

    def with_q(self, q):
        return RadialQuadrature(self.r_min, self.r_max, int(q))

    def to_dict(self):
        return {"r_min": float(self.r_min), "r_max": float(self.r_max), "Q": int(self.q)}

    @classmethod
    def from_dict(cls, data):
        return cls(float(data.get("r_min", 1e-4)), float(data.get("r_max", 1e4)),
                   int(data.get("Q", 512)))


@dataclass(frozen=True)
class ScalarH:
    """Scalar self-similarity exponent; admissible range is the open (0, k+1)."""
    h: float


class SelfSimilarModel:
    """Bundle (d, k, m, exponent, sigma, quad) defining one spectral model.

    The exponent is either ScalarH with h in (0, k+1) or an OperatorExponent
    whose spectrum passes the order-k admissibility check.  The boundary case
    h = k+1 carries no spectral density and is handled only by the random
    polynomial sampler, not by this class.
    """

    __slots__ = ("d", "k", "m", "exponent", "sigma", "quad")

    def __init__(self, d, k, m, exponent, sigma, quad=None):
        if d < 1 or k < 0 or m < 1:
            raise ValueError("need d >= 1, k >= 0, m >= 1")
        quad = quad if quad is not None else RadialQuadrature()
        if isinstance(exponent, ScalarH):
            if not (0.0 < exponent.h < k + 1):
                raise Inadmissible(
                    f"scalar exponent {exponent.h:g} outside (0, {k + 1})")
        elif isinstance(exponent, OperatorExponent):
            if exponent.m != m:
                raise ValueError("exponent dimension mismatch")
            rep = admissibility(exponent, k)
            if not rep.ok:
                raise Inadmissible("; ".join(rep.reasons))
        else:
            raise TypeError("exponent must be ScalarH or OperatorExponent")
        if sigma.d != d or sigma.m != m:
            raise ValueError("sigma dimensions do not match the model")
        if not sigma.total_trace() > 0:
            raise ValueError("angular measure must carry positive total trace")
        for name, value in (("d", int(d)), ("k", int(k)), ("m", int(m)),
                            ("exponent", exponent), ("sigma", sigma), ("quad", quad)):
            object.__setattr__(self, name, value)

    def __setattr__(self, name, value):
        raise AttributeError("SelfSimilarModel is immutable")

    @property
    def is_scalar(self):
        return isinstance(self.exponent, ScalarH)

    @property
    def min_re(self):
        if self.is_scalar:
            return self.exponent.h
        return float(self.exponent.eigenvalues.real.min())

    @property
    def max_re(self):
        if self.is_scalar:
            return self.exponent.h
        return float(self.exponent.eigenvalues.real.max())

    def H_matrix(self):
        if self.is_scalar:
            return self.exponent.h * np.eye(self.m, dtype=complex)
        return self.exponent.H

    def r_pow_minus_H(self, r_values):
        """r^{-H} over a radius batch: (len(r), m, m)."""
        r = np.asarray(r_values, dtype=float)
        if self.is_scalar:
            return (r ** -self.exponent.h)[:, None, None] * np.eye(self.m)[None]
        return _pow_family(self.exponent, r)

    def to_dict(self):
        if self.is_scalar:
            exp = {"kind": "scalar", "h": float(self.exponent.h)}
        else:
            exp = {"kind": "operator", "H": self.exponent.to_dict()}
        return {"d": self.d, "k": self.k, "m": self.m, "exponent": exp,
                "sigma": self.sigma.to_dict(), "quad": self.quad.to_dict()}

    @classmethod
    def from_dict(cls, data):
        d, k, m = int(data["d"]), int(data["k"]), int(data["m"])
        exp_data = data["exponent"]
        if exp_data["kind"] == "scalar":
            exponent = ScalarH(float(exp_data["h"]))
        elif exp_data["kind"] == "operator":
            exponent = OperatorExponent.from_dict(exp_data["H"])
        else:
            raise ValueError(f"unknown exponent kind {exp_data['kind']!r}")
        sigma = AngularSpectralMeasure.from_dict(d, m, data["sigma"])
        quad = RadialQuadrature.from_dict(data.get("quad", {}))
        return cls(d, k, m, exponent, sigma, quad)


def chi_k_weight(model, r, atom_index):
    """Angular-atom density of the polar spectral measure against dr/r.

    Returns r^{-H} S_j r^{-H*} for the operator exponent, r^{-2H} S_j for the
    scalar one; satisfies the scaling law
    chi_k_weight(c r) = c^{-H} chi_k_weight(r) c^{-H*}.
    """
    if not r > 0:
        raise ValueError("radius must be positive")
    S = model.sigma.matrices[atom_index].S
    if model.is_scalar:
        return float(r) ** (-2.0 * model.exponent.h) * S
    P = model.r_pow_minus_H([float(r)])[0]
    return P @ S @ P.conj().T


@dataclass(frozen=True)
class TraceIntegrabilityReport:
    value: float
    ok: bool
    quad_value: float
    head_bound: float
    tail_bound: float
    analytic_value: float | None = None


def trace_integrability(model):
    """Evaluate the total-trace integral that must be finite for a valid model.

    Integrates r^-1 (1 ^ r^{2k+2}) trace(r^{-H} sigma(S) r^{-H*}) over (0, inf)
    by the model quadrature plus analytic endpoint bounds driven by the
    spectral margins (epsilon, delta).  For a normal exponent the closed form
    (1/2) sum_j (1/(k+1-Re l_j) + 1/Re l_j) <sigma(S) e_j, e_j> over the
    eigenpairs (l_j, e_j) is evaluated as well and reported.
    """
    Sigma = model.sigma.total_matrix()
    quad = model.quad
    r = quad.nodes
    P = model.r_pow_minus_H(r)
    integrand = np.minimum(1.0, r ** (2 * model.k + 2)) * np.real(
        np.einsum("qab,bc,qac->q", P, Sigma, np.conj(P)))
    quad_value = float(np.sum(quad.weights * integrand))

    eps = model.min_re
    delta = model.k + 1 - model.max_re
    # endpoint decay: r^{2k+2-2 maxRe} near 0, r^{-2 minRe} at infinity
    f_lo = np.minimum(1.0, quad.r_min ** (2 * model.k + 2)) * float(np.real(
        np.einsum("ab,bc,ac->", model.r_pow_minus_H([quad.r_min])[0], Sigma,
                  np.conj(model.r_pow_minus_H([quad.r_min])[0]))))
    f_hi = float(np.real(np.einsum("ab,bc,ac->",
                                   model.r_pow_minus_H([quad.r_max])[0], Sigma,
                                   np.conj(model.r_pow_minus_H([quad.r_max])[0]))))
    head_bound = f_lo / (2 * delta) if delta > 0 else np.inf
    tail_bound = f_hi / (2 * eps) if eps > 0 else np.inf

    analytic = None
    if model.is_scalar:
        h = model.exponent.h
        analytic = 0.5 * (1.0 / (model.k + 1 - h) + 1.0 / h) * float(
            np.real(np.trace(Sigma)))
    else:
        He = model.exponent
        if He.is_normal:
            # Schur vectors give an orthonormal eigenbasis even with repeats
            T, Z = scipy.linalg.schur(He.H, output="complex")
            w = np.diag(T)
            diag = np.real(np.einsum("aj,ab,bj->j", np.conj(Z), Sigma, Z))
            analytic = float(0.5 * np.sum(
                (1.0 / (model.k + 1 - w.real) + 1.0 / w.real) * diag))

    value = quad_value + head_bound + tail_bound
    ok = bool(np.isfinite(value))
    return TraceIntegrabilityReport(value=value, ok=ok, quad_value=quad_value,
                                    head_bound=head_bound, tail_bound=tail_bound,
                                    analytic_value=analytic)
