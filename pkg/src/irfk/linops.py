"""Complex matrix utilities: c^H powers, admissibility of exponents, PSD factors.

The scaling family c^H = exp(ln(c) H) drives every self-similarity statement
in the library; this module owns its evaluation and the spectrum checks that
decide whether a given exponent H produces a finite-variance model of order k.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

normality_tol = 1.0e-10    # ||HH* - H*H|| <= tol * ||H||^2 classifies normal
hermitian_tol = 1.0e-12
psd_eig_tol = 1.0e-8       # min eig >= -tol * ||S|| to accept as PSD


class NotPsd(Exception):
    """Matrix failed the positive-semidefiniteness tolerance."""


def _as_complex_matrix(M):
    arr = np.asarray(M, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {arr.shape}")
    return arr


class OperatorExponent:
    """An m x m complex exponent H with cached spectrum data.

    `eigenvalues` are computed once at construction; `is_normal` records
    whether H commutes with its adjoint to tolerance, which determines whether
    the spectral admissibility criterion is necessary-and-sufficient or only
    sufficient.
    """

    __slots__ = ("m", "H", "eigenvalues", "is_normal")

    def __init__(self, H):
        H = _as_complex_matrix(H).copy()
        H.setflags(write=False)
        eig = np.linalg.eigvals(H)
        eig.setflags(write=False)
        hn2 = np.linalg.norm(H) ** 2
        comm = np.linalg.norm(H @ H.conj().T - H.conj().T @ H)
        object.__setattr__(self, "m", H.shape[0])
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "eigenvalues", eig)
        object.__setattr__(self, "is_normal", bool(comm <= normality_tol * max(hn2, 1e-300)))

    def __setattr__(self, name, value):
        raise AttributeError("OperatorExponent is immutable")

    def to_dict(self):
        return matrix_to_dict(self.H)

    @classmethod
    def from_dict(cls, data):
        return cls(matrix_from_dict(data))

    def __repr__(self):
        return f"OperatorExponent(m={self.m}, is_normal={self.is_normal})"


def matrix_to_dict(M):
    M = _as_complex_matrix(M)
    return {"m": M.shape[0],
            "re": [[float(x) for x in row] for row in M.real],
            "im": [[float(x) for x in row] for row in M.imag]}


def matrix_from_dict(data):
    re = np.asarray(data["re"], dtype=float)
    im = np.asarray(data.get("im") or np.zeros_like(re), dtype=float)
    return re + 1j * im


def c_pow_H(H, c):
    """c^H = exp(ln(c) H) for c > 0.

    Accepts an OperatorExponent or a raw square matrix.  Evaluation uses
    scaling-and-squaring with Pade approximation (scipy's expm), which stays
    accurate for non-normal H where an eigendecomposition would not.
    """
    if not c > 0:
        raise ValueError("c must be positive")
    Hm = H.H if isinstance(H, OperatorExponent) else _as_complex_matrix(H)
    if c == 1.0:
        return np.eye(Hm.shape[0], dtype=complex)
    return scipy.linalg.expm(np.log(float(c)) * Hm)


def _pow_family(H, r_values):
    """r^{-H} for a batch of radii: shape (len(r_values), m, m).

    Diagonalizable H goes through one eigendecomposition; defective or badly
    conditioned eigenvector matrices fall back to per-radius expm.
    """
    Hm = H.H if isinstance(H, OperatorExponent) else _as_complex_matrix(H)
    r = np.asarray(r_values, dtype=float)
    m = Hm.shape[0]
    w, V = np.linalg.eig(Hm)
    cond_V = np.linalg.cond(V)
    if np.isfinite(cond_V) and cond_V < 1.0e8:
        Vinv = np.linalg.inv(V)
        # r^{-H} = V diag(r^{-w}) V^{-1}
        powers = np.exp(-np.log(r)[:, None] * w[None, :])
        out = np.einsum("ab,qb,bc->qac", V, powers, Vinv)
    else:
        out = np.empty((r.size, m, m), dtype=complex)
        for i, ri in enumerate(r):
            out[i] = scipy.linalg.expm(-np.log(ri) * Hm)
    return out


@dataclass(frozen=True)
class AdmissibilityReport:
    ok: bool
    epsilon: float            # min Re eigenvalue
    delta: float              # k + 1 - max Re eigenvalue
    is_normal: bool
    criterion: str            # "necessary and sufficient" or "sufficient only"
    reasons: tuple = ()
    eigenvalues: tuple = ()


def admissibility(H, k):
    """Check 0 < Re(lambda) < k+1 for every eigenvalue of H.

    For normal H the condition is necessary and sufficient for a finite-trace
    order-k spectral model; for non-normal H it is sufficient only, and the
    report says which criterion applies.
    """
    if not isinstance(H, OperatorExponent):
        H = OperatorExponent(H)
    re = H.eigenvalues.real
    eps = float(re.min())
    delta = float(k + 1 - re.max())
    reasons = []
    if eps <= 0:
        reasons.append(f"Re(sp) reaches {eps:.6g} <= 0")
    if delta <= 0:
        reasons.append(f"Re(sp) exceeds k+1: max Re = {float(re.max()):.6g}")
    criterion = "necessary and sufficient" if H.is_normal else "sufficient only"
    return AdmissibilityReport(
        ok=not reasons, epsilon=eps, delta=delta, is_normal=H.is_normal,
        criterion=criterion, reasons=tuple(reasons),
        eigenvalues=tuple(complex(z) for z in H.eigenvalues))


@dataclass(frozen=True)
class ScalingActionReport:
    ok: bool
    eig_ok: bool              # Re(sp(H)) subset of (0, inf)
    form_ok: bool             # <(H+H*)x, x> > 0 on all probes
    monotone_ok: bool         # c -> ||c^H x|| increasing on the c grid
    min_form_value: float
    witnesses: tuple = ()


def scaling_action_check(H, samples=32, seed=0):
    """Numerically test the hypotheses under which c^H is a scaling action.

    Checks Re(sp(H)) > 0, positivity of the quadratic form <(H+H*)x, x> over
    `samples` random unit vectors (plus the eigenvectors of H + H*, which
    carry the extremal values), and radial monotonicity of c -> ||c^H x|| on
    64 log-spaced c in [1e-2, 1e2].  Any violation is reported with a witness.
    """
    if not isinstance(H, OperatorExponent):
        H = OperatorExponent(H)
    rng = np.random.default_rng(seed)
    m = H.m
    eig_ok = bool(np.all(H.eigenvalues.real > 0))
    witnesses = []
    if not eig_ok:
        bad = H.eigenvalues[np.argmin(H.eigenvalues.real)]
        witnesses.append(("eigenvalue", complex(bad)))

    sym = H.H + H.H.conj().T
    probes = rng.standard_normal((samples, m)) + 1j * rng.standard_normal((samples, m))
    probes /= np.linalg.norm(probes, axis=1, keepdims=True)
    _, sym_vecs = np.linalg.eigh(sym)
    probes = np.vstack([probes, sym_vecs.T])
    form_vals = np.real(np.einsum("pa,ab,pb->p", np.conj(probes), sym, probes))
    form_ok = bool(np.all(form_vals > 0))
    min_form = float(form_vals.min())
    if not form_ok:
        witnesses.append(("form", probes[int(np.argmin(form_vals))].tolist(), min_form))

    cs = np.logspace(-2, 2, 64)
    pows = _pow_family(H, 1.0 / cs)   # (c grid)^{+H}
    norms = np.linalg.norm(np.einsum("qab,pb->qpa", pows, probes), axis=2)
    diffs = np.diff(norms, axis=0)
    mono_ok = bool(np.all(diffs > -1e-12 * norms[:-1]))
    if not mono_ok:
        qi, pi = np.unravel_index(int(np.argmin(diffs)), diffs.shape)
        witnesses.append(("monotonicity", float(cs[qi]), float(cs[qi + 1]),
                          probes[pi].tolist()))

    return ScalingActionReport(ok=eig_ok and form_ok and mono_ok,
                               eig_ok=eig_ok, form_ok=form_ok, monotone_ok=mono_ok,
                               min_form_value=min_form, witnesses=tuple(witnesses))


def _pivoted_cholesky(S, rank_tol):
    """Outer-product Cholesky with greedy diagonal pivoting.

    Returns (A, rank) with A of shape (m, rank) (columns in pivot order, rows
    in original indexing) and A A* = S up to the rank tolerance.  Works for
    singular PSD input.
    """
    m = S.shape[0]
    R = S.astype(complex).copy()
    A = np.zeros((m, m), dtype=complex)
    thresh = rank_tol * max(float(np.max(np.real(np.diag(S)))), 0.0)
    rank = 0
    for j in range(m):
        dvals = np.real(np.diag(R))
        p = int(np.argmax(dvals))
        pv = dvals[p]
        if pv <= thresh or pv <= 0.0:
            break
        col = R[:, p] / np.sqrt(pv)
        A[:, j] = col
        R -= np.outer(col, np.conj(col))
        rank += 1
    return A[:, :rank], rank


class PsdMatrix:
    """A Hermitian positive-semidefinite matrix with a rank-revealing factor.

    `chol` satisfies chol @ chol.conj().T == S to within 1e-10 ||S||; it is
    produced by pivoted Cholesky so singular input is handled.
    """

    __slots__ = ("m", "S", "chol", "rank")

    def __init__(self, S):
        S = _as_complex_matrix(S)
        scale = max(float(np.linalg.norm(S)), 0.0)
        if np.linalg.norm(S - S.conj().T) > hermitian_tol * max(scale, 1.0):
            raise NotPsd("matrix is not Hermitian to tolerance")
        S = 0.5 * (S + S.conj().T)
        if scale > 0:
            min_eig = float(np.min(np.linalg.eigvalsh(S)))
            if min_eig < -psd_eig_tol * scale:
                raise NotPsd(f"min eigenvalue {min_eig:.3g} below -{psd_eig_tol:g}*||S||")
        A, rank = _pivoted_cholesky(S, rank_tol=1.0e-12)
        S.setflags(write=False)
        A.setflags(write=False)
        object.__setattr__(self, "m", S.shape[0])
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "chol", A)
        object.__setattr__(self, "rank", rank)

    def __setattr__(self, name, value):
        raise AttributeError("PsdMatrix is immutable")

    def to_dict(self):
        return matrix_to_dict(self.S)

    @classmethod
    def from_dict(cls, data):
        return cls(matrix_from_dict(data))

    def __repr__(self):
        return f"PsdMatrix(m={self.m}, rank={self.rank})"


def psd_factor(S):
    """Factor a Hermitian PSD matrix; raises NotPsd outside tolerance."""
    return PsdMatrix(S)


def trace_norm(M):
    """Sum of singular values."""
    return float(np.sum(np.linalg.svd(_as_complex_matrix(M), compute_uv=False)))
