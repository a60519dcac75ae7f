"""Discrete Dirac schemes as direct-space stencils.

A stencil is a list of taps ``(dt, dx, C)``; applied to a field it gives

    (M psi)(n, k) = sum_taps C @ psi(n + dt, k + dx)

so a plane wave exp(-i E n eps + i p.k eps) v picks up the factor
sum_taps C exp(-i E dt eps + i p.dx eps).  The shift S psi(k) = psi(k-1) is
therefore the tap at dx = -1 and carries exp(-i p eps).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import InvalidSpec, NotApplicable
from .pauli import I2, S1, S2, S3, flavor_flip, kron


class SchemeKind(str, Enum):
    NAIVE = "NaiveSymmetric1D"
    QW1D = "DiracQW1D"
    QW3D = "DiracQW3D"
    FQW1D = "FlavoredQW1D"
    FQW3D = "FlavoredQW3D"


_DIMS = {
    # kind: (space_dim, internal_dim, flavor_dim)
    SchemeKind.NAIVE: (1, 2, 1),
    SchemeKind.QW1D: (1, 2, 1),
    SchemeKind.QW3D: (3, 4, 1),
    SchemeKind.FQW1D: (1, 2, 2),
    SchemeKind.FQW3D: (3, 4, 8),
}


@dataclass(frozen=True)
class SchemeSpec:
    kind: SchemeKind
    mass: float
    epsilon: float

    def __post_init__(self):
        try:
            object.__setattr__(self, "kind", SchemeKind(self.kind))
        except ValueError:
            raise InvalidSpec(f"unknown scheme kind {self.kind!r}") from None
        m, eps = float(self.mass), float(self.epsilon)
        if not (eps > 0 and math.isfinite(eps)):
            raise InvalidSpec(f"epsilon must be positive, got {self.epsilon}")
        if not (m >= 0 and math.isfinite(m)):
            raise InvalidSpec(f"mass must be nonnegative, got {self.mass}")
        if m * eps >= math.pi:
            raise InvalidSpec(f"m*eps = {m * eps} must stay below pi")
        object.__setattr__(self, "mass", m)
        object.__setattr__(self, "epsilon", eps)

    @property
    def space_dim(self):
        return _DIMS[self.kind][0]

    @property
    def internal_dim(self):
        return _DIMS[self.kind][1]

    @property
    def flavor_dim(self):
        return _DIMS[self.kind][2]

    @property
    def matrix_dim(self):
        return self.internal_dim * self.flavor_dim

    @property
    def flavored(self):
        return self.flavor_dim > 1

    @property
    def is_walk(self):
        return self.kind is not SchemeKind.NAIVE

    def with_mass(self, mass):
        return SchemeSpec(self.kind, mass, self.epsilon)

    def with_epsilon(self, epsilon):
        return SchemeSpec(self.kind, self.mass, epsilon)

    def to_dict(self):
        return {"kind": self.kind.value, "mass": self.mass, "epsilon": self.epsilon}

    @classmethod
    def from_dict(cls, d):
        missing = {"kind", "mass", "epsilon"} - set(d)
        if missing:
            raise InvalidSpec(f"scheme spec is missing {sorted(missing)}")
        return cls(d["kind"], d["mass"], d["epsilon"])

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class Tap:
    dt: int
    dx: tuple
    coeff: np.ndarray = field(compare=False)


def _merge(taps, atol=0.0):
    """Sum taps sharing an offset and drop the ones that cancel."""
    acc = {}
    for t in taps:
        key = (t.dt, tuple(t.dx))
        acc[key] = acc[key] + t.coeff if key in acc else np.array(t.coeff, dtype=complex)
    out = [Tap(dt, dx, c) for (dt, dx), c in acc.items() if np.abs(c).max() > atol]
    out.sort(key=lambda t: (t.dt, t.dx))
    return tuple(out)


@dataclass(frozen=True)
class UpdateStencil:
    taps: tuple
    order_in_time: int
    space_dim: int
    matrix_dim: int

    def symbol(self, E, p, epsilon):
        """Plane-wave multiplier of the stencil, vectorized over leading axes."""
        E = np.asarray(E, dtype=float)
        p = _as_momenta(p, self.space_dim)
        out = np.zeros(E.shape + (self.matrix_dim, self.matrix_dim), dtype=complex)
        for t in self.taps:
            phase = -E * t.dt + np.tensordot(p, np.array(t.dx, dtype=float), axes=([-1], [0]))
            out += np.exp(1j * epsilon * phase)[..., None, None] * t.coeff
        return out

    def time_tap(self):
        """The single dt=+1 coefficient of a first-order stencil."""
        fwd = [t for t in self.taps if t.dt == 1]
        if self.order_in_time != 1 or len(fwd) != 1 or fwd[0].dx != (0,) * self.space_dim:
            raise NotApplicable("stencil has no single forward time tap")
        return fwd[0].coeff

    def slice_taps(self, dt=0):
        return tuple(t for t in self.taps if t.dt == dt)

    def spatial_range(self):
        return max((max(abs(d) for d in t.dx) for t in self.taps), default=0)

    def adjoint(self):
        return UpdateStencil(
            _merge(Tap(-t.dt, tuple(-d for d in t.dx), t.coeff.conj().T) for t in self.taps),
            self.order_in_time, self.space_dim, self.matrix_dim)

    def to_json(self):
        return json.dumps({
            "order_in_time": self.order_in_time,
            "taps": [{"dt": t.dt, "dx": list(t.dx),
                      "coeff": [[[z.real, z.imag] for z in row] for row in t.coeff]}
                     for t in self.taps]})


def _as_momenta(p, space_dim):
    p = np.asarray(p, dtype=float)
    if space_dim == 1 and (p.ndim == 0 or p.shape[-1] != 1):
        p = p[..., None]
    if p.shape[-1] != space_dim:
        raise InvalidSpec(f"expected {space_dim} momentum components, got shape {p.shape}")
    return p


def compose(a, b):
    """Operator product a∘b of two equal-time spatial tap lists."""
    return _merge(Tap(0, tuple(x + y for x, y in zip(ta.dx, tb.dx)), ta.coeff @ tb.coeff)
                  for ta in a for tb in b)


# generators of the three transport substeps and of the mass substep, 3D walk
QW3D_GENERATORS = (kron(S3, S1), kron(S3, S2), kron(S3, S3))
QW3D_MASS_GENERATOR = kron(S2, I2)


def _axis_offset(axis, step, dim):
    dx = [0] * dim
    dx[axis] = step
    return tuple(dx)


def _transport_substep(axis, generator, flavor=None):
    # exp(-i p eps G) = e^{-ip eps}(I+G)/2 + e^{+ip eps}(I-G)/2, i.e. S on the
    # +1 eigenspace of G and S^dagger on the -1 eigenspace
    n = generator.shape[0]
    plus = (np.eye(n) + generator) / 2
    minus = (np.eye(n) - generator) / 2
    if flavor is not None:
        plus, minus = np.kron(plus, flavor), np.kron(minus, flavor)
    return (Tap(0, _axis_offset(axis, -1, 3), plus), Tap(0, _axis_offset(axis, +1, 3), minus))


def walk_transport_3d(spec):
    """Equal-time taps of U = U_m U_x U_y U_z (flavored shifts for FQW3D)."""
    c, s = math.cos(spec.mass * spec.epsilon), math.sin(spec.mass * spec.epsilon)
    mass = c * np.eye(4) - 1j * s * QW3D_MASS_GENERATOR
    if spec.flavored:
        mass = np.kron(mass, np.eye(8))
    ops = [(Tap(0, (0, 0, 0), mass),)]
    for axis, g in enumerate(QW3D_GENERATORS):
        flav = flavor_flip({axis}, 3) if spec.flavored else None
        ops.append(_transport_substep(axis, g, flav))
    taps = ops[0]
    for op in ops[1:]:
        taps = compose(taps, op)
    return taps


def time_flip(spec):
    """Flavor factor carried by the time translation (identity if unflavored)."""
    if spec.kind is SchemeKind.FQW1D:
        return np.kron(I2, flavor_flip({0}, 1))
    if spec.kind is SchemeKind.FQW3D:
        return np.kron(np.eye(4), flavor_flip({0, 1, 2}, 3))
    return np.eye(spec.matrix_dim, dtype=complex)


def build_scheme(spec):
    m, eps = spec.mass, spec.epsilon
    c, s = math.cos(m * eps), math.sin(m * eps)
    kind = spec.kind
    if kind is SchemeKind.NAIVE:
        # (i/2eps)[psi(n+1) - psi(n-1)] + (i sigma_3/2eps)[psi(k+1) - psi(k-1)] - m sigma_1 psi
        h = 1j / (2 * eps)
        taps = (Tap(1, (0,), h * I2), Tap(-1, (0,), -h * I2),
                Tap(0, (1,), h * S3), Tap(0, (-1,), -h * S3), Tap(0, (0,), -m * S1))
        return UpdateStencil(_merge(taps), 2, 1, 2)
    if kind in (SchemeKind.QW1D, SchemeKind.FQW1D):
        right = c * np.diag([1, 0]).astype(complex)
        left = c * np.diag([0, 1]).astype(complex)
        mix = -1j * s * S1
        if kind is SchemeKind.FQW1D:
            right, left = np.kron(right, S1), np.kron(left, S1)
            mix = np.kron(mix, I2)
        taps = (Tap(0, (-1,), right), Tap(0, (1,), left), Tap(0, (0,), mix),
                Tap(1, (0,), -time_flip(spec)))
        return UpdateStencil(_merge(taps), 1, 1, spec.matrix_dim)
    taps = walk_transport_3d(spec) + (Tap(1, (0, 0, 0), -time_flip(spec)),)
    return UpdateStencil(_merge(taps), 1, 3, spec.matrix_dim)


def walk_unitary(spec, p):
    """Equal-time block U(p) of a walk stencil, vectorized over momenta."""
    if not spec.is_walk:
        raise NotApplicable("the naive scheme is two-step and has no one-step unitary")
    st = build_scheme(spec)
    zero = UpdateStencil(st.slice_taps(0), 1, st.space_dim, st.matrix_dim)
    p = _as_momenta(p, spec.space_dim)
    return zero.symbol(np.zeros(p.shape[:-1]), p, spec.epsilon)


def random_momenta(spec, samples, rng):
    lim = math.pi / spec.epsilon
    return rng.uniform(-lim, lim, size=(samples, spec.space_dim))


def evolution_unitary_check(spec, samples=100, seed=1234):
    rng = np.random.default_rng(seed)
    U = walk_unitary(spec, random_momenta(spec, samples, rng))
    eye = np.eye(spec.matrix_dim)
    return float(np.abs(U @ np.conj(np.swapaxes(U, -1, -2)) - eye).max())


def difference_matrix(derivative, N, epsilon=1.0):
    """i * (lattice derivative) on N sites with zero field outside the box."""
    if N < 4:
        raise InvalidSpec("need at least 4 sites")
    A = np.zeros((N, N), dtype=complex)
    for k in range(N):
        if derivative == "forward":
            A[k, k] = -1j / epsilon
            if k + 1 < N:
                A[k, k + 1] = 1j / epsilon
        elif derivative == "symmetric":
            if k + 1 < N:
                A[k, k + 1] = 1j / (2 * epsilon)
            if k - 1 >= 0:
                A[k, k - 1] = -1j / (2 * epsilon)
        else:
            raise InvalidSpec(f"unknown derivative {derivative!r}")
    return A


def hermiticity_test(derivative, axis="space", N=16, epsilon=1.0):
    """max |A - A^dagger| for the chosen lattice derivative.

    Time and space derivatives share the same matrix on a uniform lattice, so
    ``axis`` only labels which direction is being checked.
    """
    if axis not in ("space", "time"):
        raise InvalidSpec(f"unknown axis {axis!r}")
    A = difference_matrix(derivative, N, epsilon)
    return float(np.abs(A - A.conj().T).max())


def anti_hermitian_reduction(spec):
    """Stencil of -(i/2eps)(M - M^dagger) for the (1+1)D walk."""
    if spec.kind is not SchemeKind.QW1D:
        raise NotApplicable("defined for DiracQW1D only")
    st = build_scheme(spec)
    k = -1j / (2 * spec.epsilon)
    adj = st.adjoint()
    taps = [Tap(t.dt, t.dx, k * t.coeff) for t in st.taps]
    taps += [Tap(t.dt, t.dx, -k * t.coeff) for t in adj.taps]
    return UpdateStencil(_merge(taps, atol=1e-15), 2, 1, 2)


def same_taps(a, b, atol=1e-14):
    """True if two stencils have the same offsets and coefficients."""
    if len(a.taps) != len(b.taps):
        return False
    tb = {(t.dt, t.dx): t.coeff for t in b.taps}
    return all((t.dt, t.dx) in tb and np.allclose(t.coeff, tb[(t.dt, t.dx)], atol=atol, rtol=0)
               for t in a.taps)
