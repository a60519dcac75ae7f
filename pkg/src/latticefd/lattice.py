"""Direct and reciprocal lattices, Bragg-plane Brillouin zones and sublattices.

Direct basis vectors are rational multiples of eps.  Reciprocal vectors and
momenta are kept in units of pi/eps, so a plane n.p = c carries a rational
offset c and every duality check is exact.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, HalfspaceIntersection

from .errors import DegenerateBasis, UnboundedRegion, UnsupportedDimension


def _frac_vec(v):
    return tuple(Fraction(x) for x in v)


def _det(rows):
    """Exact determinant by cofactor expansion (dim <= 4)."""
    n = len(rows)
    if n == 1:
        return rows[0][0]
    total = Fraction(0)
    for j in range(n):
        if rows[0][j] == 0:
            continue
        minor = [r[:j] + r[j + 1:] for r in rows[1:]]
        total += (-1) ** j * rows[0][j] * _det(minor)
    return total


def exterior_normal(vectors):
    """Generalized cross product of dim-1 vectors in dim dimensions.

    The result w satisfies w . v = det[v, vectors...] for every v, so it is
    orthogonal to all inputs.
    """
    dim = len(vectors) + 1
    out = []
    for j in range(dim):
        minor = [tuple(v[:j]) + tuple(v[j + 1:]) for v in vectors]
        out.append((-1) ** j * _det(minor))
    return tuple(out)


@dataclass(frozen=True)
class DirectLattice:
    basis: tuple  # rows, units of eps
    epsilon: float = 1.0

    def __post_init__(self):
        rows = tuple(_frac_vec(v) for v in self.basis)
        dim = len(rows)
        if dim not in (1, 2, 3, 4) or any(len(r) != dim for r in rows):
            raise UnsupportedDimension(f"need a square basis of dimension 1..4, got {len(rows)} rows")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        object.__setattr__(self, "basis", rows)

    @property
    def dim(self):
        return len(self.basis)

    def gram_det(self):
        g = [[sum(a * b for a, b in zip(u, v)) for v in self.basis] for u in self.basis]
        return _det(g)

    def physical(self):
        return np.array(self.basis, dtype=float) * self.epsilon

    def to_dict(self):
        return {"dim": self.dim, "basis": [[float(x) for x in v] for v in self.basis],
                "epsilon": self.epsilon}


@dataclass(frozen=True)
class ReciprocalBasis:
    vectors: tuple  # rows, units of pi/eps
    epsilon: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "vectors", tuple(_frac_vec(v) for v in self.vectors))

    @property
    def dim(self):
        return len(self.vectors[0])

    def physical(self):
        return np.array(self.vectors, dtype=float) * math.pi / self.epsilon

    def duality(self, lat):
        """a_i . k_j in units of 2 pi, exact."""
        return [[sum(a * k for a, k in zip(ai, kj)) / 2 for kj in self.vectors]
                for ai in lat.basis]


def reciprocal_basis(lat):
    """k_j with a_i . k_j = 2 pi delta_ij, from exterior products of the a_i."""
    if abs(lat.gram_det()) < Fraction(1, 10**12):
        raise DegenerateBasis("basis vectors are linearly dependent")
    a = lat.basis
    dim = lat.dim
    if dim == 1:
        return ReciprocalBasis(((Fraction(2) / a[0][0],),), lat.epsilon)
    vol = _det([list(v) for v in a])
    out = []
    for j in range(dim):
        others = [a[i] for i in range(dim) if i != j]
        w = exterior_normal(others)
        # w . a_j = det[a_j, others] = (-1)^j det[a]
        scale = Fraction(2) * (-1) ** j / vol
        out.append(tuple(scale * x for x in w))
    return ReciprocalBasis(tuple(out), lat.epsilon)


@dataclass(frozen=True, order=True)
class Constraint:
    """Half space normal . p <= offset * pi/eps with a primitive integer normal."""

    normal: tuple
    offset: Fraction

    def family(self):
        """(normal with positive leading entry, |offset|): the pair n.p = +-c."""
        n = self.normal
        lead = next(x for x in n if x != 0)
        if lead < 0:
            n = tuple(-x for x in n)
        return n, abs(self.offset)

    def to_dict(self, epsilon=1.0):
        return {"normal": list(self.normal),
                "offset": float(self.offset) * math.pi / epsilon,
                "offset_pi_over_eps": str(self.offset)}


def _primitive(vec):
    """Scale a rational vector to a primitive integer vector; returns (vector, factor)."""
    den = reduce(lambda x, y: x * y // math.gcd(x, y), (f.denominator for f in vec), 1)
    ints = [int(f * den) for f in vec]
    g = reduce(math.gcd, (abs(i) for i in ints), 0)
    ints = [i // g for i in ints]
    return tuple(ints), Fraction(den, g)


def bragg_constraint(k):
    """Half space of the Bragg plane 2 p.k = k.k that contains the origin."""
    kk = sum(x * x for x in k)
    normal, factor = _primitive(k)
    # p.k <= k.k/2  with k = normal / factor
    return Constraint(normal, kk / 2 * factor)


def _candidate_vectors(vectors, bound):
    """All nonzero sum c_i v_i with |c_i| <= bound, exact."""
    den = reduce(lambda x, y: x * y // math.gcd(x, y),
                 (f.denominator for v in vectors for f in v), 1)
    ints = np.array([[int(f * den) for f in v] for v in vectors], dtype=np.int64)
    coeffs = np.array(list(itertools.product(range(-bound, bound + 1), repeat=len(vectors))),
                      dtype=np.int64)
    ks = np.unique(coeffs @ ints, axis=0)
    ks = ks[np.any(ks != 0, axis=1)]
    return [tuple(Fraction(int(x), den) for x in k) for k in ks]


def _lp_prune(cons, dim):
    A = np.array([c.normal for c in cons], dtype=float)
    b = np.array([float(c.offset) for c in cons])
    keep = []
    for i, c in enumerate(cons):
        mask = np.arange(len(cons)) != i
        res = linprog(-A[i], A_ub=A[mask], b_ub=b[mask], bounds=[(None, None)] * dim, method="highs")
        if res.status == 3 or (res.status == 0 and -res.fun > b[i] + 1e-9):
            keep.append(c)
    return keep


def _is_bounded(A, b, dim):
    for axis in range(dim):
        for sgn in (1, -1):
            obj = np.zeros(dim)
            obj[axis] = -sgn
            res = linprog(obj, A_ub=A, b_ub=b, bounds=[(None, None)] * dim, method="highs")
            if res.status == 3:
                return False
    return True


def _polytope_vertices(cons, dim):
    if dim == 1:
        return np.array([[float(c.offset) / c.normal[0]] for c in cons])
    hs = np.array([list(c.normal) + [-float(c.offset)] for c in cons])
    return HalfspaceIntersection(hs, np.zeros(dim)).intersections


def _prune(constraints, dim):
    """Drop parallel duplicates and constraints implied by the rest.

    Planes nearest the origin are pruned exactly by LP; every farther plane is
    then tested against the vertices of that polytope and pulled in only if it
    cuts a vertex.
    """
    best = {}
    for c in constraints:
        if c.normal not in best or c.offset < best[c.normal].offset:
            best[c.normal] = c
    cons = sorted(best.values(), key=lambda c: (float(c.offset) / math.hypot(*c.normal), c))
    A = np.array([c.normal for c in cons], dtype=float)
    b = np.array([float(c.offset) for c in cons])
    if not _is_bounded(A, b, dim):
        raise UnboundedRegion("Bragg planes do not enclose a bounded zone; raise the bound")
    size = 2 * dim
    while not _is_bounded(A[:size], b[:size], dim):
        size += 1
    active = _lp_prune(cons[:size], dim)
    while True:
        verts = _polytope_vertices(active, dim)
        cut = np.any(A @ verts.T > b[:, None] + 1e-9, axis=1)
        extra = [c for c, hit in zip(cons, cut) if hit and c not in active]
        if not extra:
            return sorted(active)
        active = _lp_prune(active + extra, dim)


@dataclass(frozen=True)
class BrillouinZone:
    dim: int
    half_space_constraints: tuple
    torus_identification: tuple
    sheet_count: int = 1
    epsilon: float = 1.0

    def families(self):
        return {c.family() for c in self.half_space_constraints}

    def _halfspaces(self):
        # scipy form: A x + b <= 0, in units of pi/eps
        return np.array([list(c.normal) + [-float(c.offset)] for c in self.half_space_constraints])

    def vertices(self):
        """Vertices in physical units (1/length)."""
        if self.dim == 1:
            pts = sorted(float(c.offset) / c.normal[0] for c in self.half_space_constraints)
            return np.array(pts)[:, None] * math.pi / self.epsilon
        hs = HalfspaceIntersection(self._halfspaces(), np.zeros(self.dim))
        pts = np.unique(np.round(hs.intersections, 12), axis=0)
        return pts * math.pi / self.epsilon

    def volume(self):
        if self.dim == 1:
            v = self.vertices()[:, 0]
            return float(v.max() - v.min())
        return float(ConvexHull(self.vertices()).volume)

    def contains(self, p, tol=1e-12):
        p = np.asarray(p, dtype=float) * self.epsilon / math.pi
        A = np.array([c.normal for c in self.half_space_constraints], dtype=float)
        b = np.array([float(c.offset) for c in self.half_space_constraints])
        return bool(np.all(A @ p <= b + tol))

    def to_dict(self):
        return {"dim": self.dim, "sheet_count": self.sheet_count, "epsilon": self.epsilon,
                "constraints": [c.to_dict(self.epsilon) for c in self.half_space_constraints],
                "torus_identification": [[float(x) * math.pi / self.epsilon for x in v]
                                         for v in self.torus_identification]}


def bragg_bz(recip, coefficient_bound=2, sheet_count=1):
    if coefficient_bound < 1:
        raise ValueError("coefficient_bound must be at least 1")
    ks = _candidate_vectors(recip.vectors, coefficient_bound)
    kept = _prune([bragg_constraint(k) for k in ks], recip.dim)
    return BrillouinZone(recip.dim, tuple(kept), tuple(recip.vectors), sheet_count, recip.epsilon)


def degenerate_bz_constraints(vectors, coefficient_bound=2):
    """Minimal Bragg constraint set generated by a possibly redundant vector list."""
    vecs = [_frac_vec(v) for v in vectors]
    dim = len(vecs[0])
    ks = _candidate_vectors(vecs, coefficient_bound)
    return _prune([bragg_constraint(k) for k in ks], dim)


# lattices used throughout

def square_2d(epsilon=1.0):
    return DirectLattice(((1, 0), (0, 1)), epsilon)


def oblique_2d_embedded(epsilon=1.0):
    """eps(y-x), eps(x+y) plus the inert eps z direction."""
    return DirectLattice(((-1, 1, 0), (1, 1, 0), (0, 0, 1)), epsilon)


def oblique_2d(epsilon=1.0):
    return DirectLattice(((-1, 1), (1, 1)), epsilon)


def body_centered_cubic(epsilon=1.0):
    return DirectLattice(((-1, 1, 1), (1, -1, 1), (1, 1, -1)), epsilon)


def oblique_4d(epsilon=1.0):
    return DirectLattice(((1, 1, 1, 1), (1, -1, 1, 1), (1, 1, -1, 1), (1, 1, 1, -1)), epsilon)


# (E, px, py, pz) frame, units of pi/eps
DEGENERATE_4D = ((1, 1, 0, 0), (1, -1, 0, 0), (1, 0, 1, 0), (1, 0, -1, 0), (1, 0, 0, 1), (1, 0, 0, -1))
# the two rhombus bases of the px-py and px-pz cross sections
DEGENERATE_BCC = ((1, 1, 0), (1, -1, 0), (1, 0, 1), (1, 0, -1))


COLORS = {(0, 0, 0): "red", (1, 0, 0): "orange", (0, 1, 0): "blue", (0, 0, 1): "green",
          (0, 1, 1): "yellow", (1, 0, 1): "brown", (1, 1, 0): "cyan", (1, 1, 1): "pink"}


@dataclass(frozen=True)
class SublatticePartition:
    """Flavor of each spacetime site (n, k[, l, m]) of the orthogonal lattice."""

    dim: int

    @property
    def flavor_count(self):
        return 2 if self.dim == 2 else 8

    def flavor_bits(self, site):
        site = tuple(int(x) for x in site)
        if len(site) != self.dim:
            raise ValueError(f"expected a site with {self.dim} coordinates")
        n = site[0]
        return tuple((n + k) % 2 for k in site[1:])

    def site_flavor(self, site):
        """Flavor index; in 4D the x bit is the most significant."""
        bits = self.flavor_bits(site)
        return sum(b << (len(bits) - 1 - i) for i, b in enumerate(bits))

    def color(self, site):
        bits = self.flavor_bits(site)
        if self.dim == 2:
            return "red" if bits[0] == 0 else "blue"
        return COLORS[bits]

    def flavor_grid(self, n, sizes):
        """Flavor index of every site of a spatial box at time n."""
        grids = np.meshgrid(*[np.arange(s) for s in sizes], indexing="ij")
        out = np.zeros(tuple(sizes), dtype=int)
        for i, g in enumerate(grids):
            out = out * 2 + (n + g) % 2
        return out


def sublattice_partition(scheme_dim):
    if scheme_dim not in (2, 4):
        raise UnsupportedDimension(f"spacetime dimension must be 2 or 4, got {scheme_dim}")
    return SublatticePartition(scheme_dim)
