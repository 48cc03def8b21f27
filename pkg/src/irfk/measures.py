"""Finitely supported complex measures on R^d and the order-k annihilation calculus.

A measure here is a finite list of weighted point atoms.  The module provides
the operations the rest of the library is built on: scaling, translation,
reflection, convolution with a reflected-conjugated measure, Fourier
transforms, polynomial annihilation tests, and the canonical representation
measures lambda_t built from a monomial interpolation frame.
"""

from __future__ import annotations

import itertools

import numpy as np

merge_tol = 1.0e-12      # atoms closer than this (Euclidean) are one atom
annihilation_tol = 1.0e-9


class SingularFrame(Exception):
    """Node set cannot support polynomial interpolation of the requested order."""


def _as_location_array(dim, locations):
    arr = np.asarray(locations, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, dim) if dim > 1 else arr.reshape(-1, 1)
    if arr.ndim != 2 or arr.shape[1] != dim:
        raise ValueError(f"locations must be (n, {dim}) arrays, got shape {arr.shape}")
    return arr


def _merge_atoms(locations, weights):
    """Merge coincident atoms (within merge_tol) and drop exact-zero weights.

    Quadratic in the atom count, which stays small for every use in this
    library; the payoff is a deterministic, order-independent result.
    """
    n = len(weights)
    if n == 0:
        return locations.reshape(0, locations.shape[1] if locations.ndim == 2 else 1), weights
    # sort by location for determinism regardless of input order
    order = np.lexsort(locations.T[::-1])
    locations = locations[order]
    weights = weights[order]
    kept_loc = []
    kept_w = []
    for i in range(n):
        loc = locations[i]
        for j in range(len(kept_loc) - 1, -1, -1):
            if np.linalg.norm(kept_loc[j] - loc) <= merge_tol:
                kept_w[j] += weights[i]
                break
        else:
            kept_loc.append(loc)
            kept_w.append(weights[i])
    loc_arr = np.array(kept_loc, dtype=float)
    w_arr = np.array(kept_w, dtype=complex)
    nz = w_arr != 0.0
    return loc_arr[nz], w_arr[nz]


class FiniteMeasure:
    """A complex measure supported on finitely many points of R^d.

    Parameters
    ----------
    dim : int
        Ambient dimension d >= 1.
    atoms : iterable of (location, weight)
        Locations are length-d reals, weights complex.  Coincident locations
        are merged by summing weights; atoms whose weight is exactly zero are
        dropped.  The empty atom list is the null measure.
    """

    __slots__ = ("dim", "locations", "weights")

    def __init__(self, dim, atoms=()):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        atoms = list(atoms)
        if atoms:
            locs = _as_location_array(dim, [a[0] for a in atoms])
            ws = np.asarray([a[1] for a in atoms], dtype=complex)
            if ws.ndim != 1:
                raise ValueError("atom weights must be scalars")
        else:
            locs = np.zeros((0, dim))
            ws = np.zeros(0, dtype=complex)
        locs, ws = _merge_atoms(locs, ws)
        locs.setflags(write=False)
        ws.setflags(write=False)
        object.__setattr__(self, "dim", int(dim))
        object.__setattr__(self, "locations", locs)
        object.__setattr__(self, "weights", ws)

    def __setattr__(self, name, value):
        raise AttributeError("FiniteMeasure is immutable")

    @classmethod
    def from_arrays(cls, dim, locations, weights):
        return cls(dim, zip(np.atleast_2d(np.asarray(locations, dtype=float)).reshape(-1, dim),
                            np.asarray(weights, dtype=complex)))

    @classmethod
    def delta(cls, location, weight=1.0):
        """Point mass at `location`."""
        loc = np.atleast_1d(np.asarray(location, dtype=float))
        return cls(loc.size, [(loc, weight)])

    @property
    def n_atoms(self):
        return len(self.weights)

    @property
    def is_null(self):
        return self.n_atoms == 0

    def total_mass(self):
        return complex(self.weights.sum()) if self.n_atoms else 0.0 + 0.0j

    def total_variation(self):
        return float(np.abs(self.weights).sum()) if self.n_atoms else 0.0

    # -- algebra -------------------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, FiniteMeasure) or other.dim != self.dim:
            return NotImplemented
        return FiniteMeasure(self.dim,
                             list(zip(self.locations, self.weights))
                             + list(zip(other.locations, other.weights)))

    def __sub__(self, other):
        if not isinstance(other, FiniteMeasure):
            return NotImplemented
        return self + (-other)

    def __neg__(self):
        return FiniteMeasure(self.dim, zip(self.locations, -self.weights))

    def __mul__(self, c):
        return FiniteMeasure(self.dim, zip(self.locations, self.weights * complex(c)))

    __rmul__ = __mul__

    def __repr__(self):
        return f"FiniteMeasure(dim={self.dim}, n_atoms={self.n_atoms})"

    # -- measure operations ----------------------------------------------------

    def scale(self, r):
        """Image under t -> r*t, i.e. the measure A -> mu(A/r).  Requires r > 0."""
        if not r > 0:
            raise ValueError("scale factor must be positive")
        return FiniteMeasure(self.dim, zip(self.locations * float(r), self.weights))

    def translate(self, s):
        s = np.asarray(s, dtype=float).reshape(self.dim)
        return FiniteMeasure(self.dim, zip(self.locations + s, self.weights))

    def reflect(self):
        """Image under t -> -t, weights unchanged."""
        return FiniteMeasure(self.dim, zip(-self.locations, self.weights))

    def conj_reflect(self):
        """The measure mu~ with atoms at -t and conjugated weights."""
        return FiniteMeasure(self.dim, zip(-self.locations, np.conj(self.weights)))

    def fourier(self, u):
        """mu^(u) = sum_i c_i exp(i u . t_i), vectorized over trailing axes of u.

        `u` has shape (d,) or (..., d); the result has the leading shape of u.
        """
        u = np.asarray(u, dtype=float)
        scalar = u.ndim == 1
        u2 = u.reshape(-1, self.dim)
        if self.n_atoms == 0:
            out = np.zeros(u2.shape[0], dtype=complex)
        else:
            out = np.exp(1j * (u2 @ self.locations.T)) @ self.weights
        return complex(out[0]) if scalar else out.reshape(u.shape[:-1])

    # -- serialization ---------------------------------------------------------

    def to_dict(self):
        return {
            "dim": self.dim,
            "atoms": [
                {"t": [float(x) for x in loc], "re": float(w.real), "im": float(w.imag)}
                for loc, w in zip(self.locations, self.weights)
            ],
        }

    @classmethod
    def from_dict(cls, data):
        return cls(int(data["dim"]),
                   [(a["t"], complex(a.get("re", 0.0), a.get("im", 0.0)))
                    for a in data["atoms"]])


class MonomialBasis:
    """All monomials of total degree <= k on R^d, in degree-then-lex order.

    The ordering is fixed so interpolation matrices and serialized frames are
    reproducible: multi-indices are sorted first by total degree, then
    lexicographically ascending on the exponent tuple.
    """

    __slots__ = ("dim", "order", "exponents", "size")

    def __init__(self, dim, order):
        if dim < 1 or order < 0:
            raise ValueError("need dim >= 1 and order >= 0")
        exps = sorted(
            (e for e in itertools.product(range(order + 1), repeat=dim) if sum(e) <= order),
            key=lambda e: (sum(e), e),
        )
        object.__setattr__(self, "dim", int(dim))
        object.__setattr__(self, "order", int(order))
        object.__setattr__(self, "exponents", tuple(exps))
        object.__setattr__(self, "size", len(exps))

    def __setattr__(self, name, value):
        raise AttributeError("MonomialBasis is immutable")

    def evaluate(self, points):
        """Rows b(t)^T for each point: shape (n_points, size)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        exps = np.asarray(self.exponents, dtype=float)
        # pts: (n, d), exps: (M, d) -> (n, M)
        return np.prod(pts[:, None, :] ** exps[None, :, :], axis=2)

    def to_dict(self):
        return {"dim": self.dim, "order": self.order,
                "exponents": [list(e) for e in self.exponents]}


def monomial_basis(d, k):
    """Basis of all monomials of degree <= k in d variables; size binom(k+d, k)."""
    return MonomialBasis(d, k)


class RepresentationFrame:
    """Interpolation frame: nodes t_1..t_M and B = (b(t_1), ..., b(t_M)).

    Columns of B are the monomial vectors at the nodes.  Invertibility of B is
    what makes the representation measures lambda_t well defined; lambda_{t_i}
    is the null measure at every node.
    """

    __slots__ = ("basis", "nodes", "B", "B_inv", "cond")

    def __init__(self, basis, nodes, B, B_inv, cond):
        for name, value in (("basis", basis), ("nodes", nodes), ("B", B),
                            ("B_inv", B_inv), ("cond", cond)):
            object.__setattr__(self, name, value)

    def __setattr__(self, name, value):
        raise AttributeError("RepresentationFrame is immutable")

    def to_dict(self):
        return {"basis": self.basis.to_dict(),
                "nodes": [[float(x) for x in t] for t in self.nodes],
                "B": [[float(x) for x in row] for row in self.B],
                "cond": float(self.cond)}


def build_frame(basis, nodes=None, *, seed=0, cond_bound=1.0e8, max_tries=32):
    """Build a RepresentationFrame from explicit or auto-selected nodes.

    With `nodes=None`, samples M_k nodes uniformly from [0, 1]^d (deterministic
    for a given seed) and retries, up to `max_tries` times, until the
    interpolation matrix has condition number below `cond_bound`.  Random node
    sets give a full-rank matrix almost surely; degenerate sets (e.g. collinear
    nodes for d=2, k=1) are rejected.

    Raises
    ------
    SingularFrame
        If explicit nodes give a numerically singular matrix, or auto
        selection exhausts its retries.
    """
    M = basis.size
    if nodes is not None:
        cand = [np.asarray(nodes, dtype=float).reshape(M, basis.dim)]
    else:
        rng = np.random.default_rng(seed)
        cand = (rng.uniform(0.0, 1.0, size=(M, basis.dim)) for _ in range(max_tries))
    last_cond = np.inf
    for node_set in cand:
        B = basis.evaluate(node_set).T
        cond = np.linalg.cond(B)
        if np.isfinite(cond) and cond < cond_bound:
            node_arr = np.array(node_set, dtype=float)
            node_arr.setflags(write=False)
            B = np.ascontiguousarray(B)
            B.setflags(write=False)
            B_inv = np.linalg.inv(B)
            B_inv.setflags(write=False)
            return RepresentationFrame(basis, node_arr, B, B_inv, float(cond))
        last_cond = cond
    raise SingularFrame(
        f"no node set with cond(B) < {cond_bound:g} (last cond {last_cond:.3g})")


def lambda_t(frame, t):
    """Representation measure lambda_t = delta_t - sum_j (B^-1 b(t))_j delta_{t_j}.

    Annihilates every polynomial of degree <= k by construction.  When t
    coincides (bitwise) with a frame node the null measure is returned, so
    representer samples vanish exactly at the nodes.
    """
    t = np.asarray(t, dtype=float).reshape(frame.basis.dim)
    for node in frame.nodes:
        if np.array_equal(node, t):
            return FiniteMeasure(frame.basis.dim)
    coeffs = frame.B_inv @ frame.basis.evaluate(t[None, :])[0]
    atoms = [(t, 1.0 + 0.0j)]
    atoms.extend((node, -complex(c)) for node, c in zip(frame.nodes, coeffs))
    return FiniteMeasure(frame.basis.dim, atoms)


def annihilation_order(mu, k_max):
    """Largest k <= k_max with all moments of degree <= k vanishing.

    Returns -1 when the total mass is nonzero, and k_max + 1 when every tested
    degree up to k_max vanishes (the order may then be higher than k_max).
    Moments are compared against a size-aware tolerance:
    |sum c_i t_i^a| <= annihilation_tol * sum |c_i| max(1, |t_i|_inf)^|a|.
    """
    if mu.is_null:
        return k_max + 1
    absw = np.abs(mu.weights)
    tinf = np.maximum(1.0, np.max(np.abs(mu.locations), axis=1))
    for deg in range(k_max + 1):
        for exp in itertools.product(range(deg + 1), repeat=mu.dim):
            if sum(exp) != deg:
                continue
            vals = np.prod(mu.locations ** np.asarray(exp, dtype=float), axis=1)
            moment = np.sum(mu.weights * vals)
            scale = np.sum(absw * tinf ** deg)
            if abs(moment) > annihilation_tol * scale:
                return deg - 1
    return k_max + 1


def scale(mu, r):
    return mu.scale(r)


def translate(mu, s):
    return mu.translate(s)


def convolve_reflect(lam, mu):
    """lambda * mu~: atoms at all differences t_j - s_j' with weights c_j conj(d_j').

    Satisfies (lambda * mu~)^ = lambda^ . conj(mu^); maps a pair of order-k
    annihilating measures into the order-(2k+1) class.
    """
    if lam.dim != mu.dim:
        raise ValueError("dimension mismatch")
    if lam.is_null or mu.is_null:
        return FiniteMeasure(lam.dim)
    locs = (lam.locations[:, None, :] - mu.locations[None, :, :]).reshape(-1, lam.dim)
    ws = (lam.weights[:, None] * np.conj(mu.weights)[None, :]).ravel()
    return FiniteMeasure(lam.dim, zip(locs, ws))


def fourier(mu, u):
    return mu.fourier(u)
