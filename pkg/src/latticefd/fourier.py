"""Fourier symbols of the schemes and their determinants.

Symbols are written directly from the shift rules S -> exp(-i p eps),
T^dagger -> exp(-i E eps), independently of the direct-space stencils in
:mod:`latticefd.schemes`, so that the two can be checked against each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DegenerateFit, InvalidSpec
from .pauli import I2, S1, S3, flavor_flip
from .schemes import QW3D_GENERATORS, QW3D_MASS_GENERATOR, SchemeKind, _as_momenta


@dataclass(frozen=True)
class FourierSymbol:
    spec: object
    dim_spacetime: int
    matrix_dim: int
    eval: Callable
    # stencil plane-wave multiplier = stencil_scale * symbol
    stencil_scale: float = 1.0

    def __call__(self, E, p):
        return self.eval(E, p)


@dataclass(frozen=True)
class DispersionExpression:
    symbol: FourierSymbol
    det: Callable

    def __call__(self, E, p):
        return self.det(E, p)


def _sub(theta, gen):
    # exp(-i theta G) with G^2 = I
    th = np.asarray(theta)[..., None, None]
    return np.cos(th) * np.eye(gen.shape[0]) - 1j * np.sin(th) * gen


def _flavored_sub(theta, gen, flav):
    # the shift exp(-i p eps) gets the flavor flip attached, both directions
    n = gen.shape[0]
    th = np.asarray(theta)[..., None, None]
    plus = np.kron((np.eye(n) + gen) / 2, flav)
    minus = np.kron((np.eye(n) - gen) / 2, flav)
    return np.exp(-1j * th) * plus + np.exp(1j * th) * minus


def qw3d_unitary(p, mass, eps):
    """U(p) = U_m U_x U_y U_z from the four substep exponentials."""
    p = _as_momenta(p, 3)
    U = _sub(np.full(p.shape[:-1], mass * eps), QW3D_MASS_GENERATOR)
    for axis, g in enumerate(QW3D_GENERATORS):
        U = U @ _sub(eps * p[..., axis], g)
    return U


def fqw3d_unitary(p, mass, eps):
    p = _as_momenta(p, 3)
    U = np.kron(_sub(np.full(p.shape[:-1], mass * eps), QW3D_MASS_GENERATOR), np.eye(8))
    for axis, g in enumerate(QW3D_GENERATORS):
        U = U @ _flavored_sub(eps * p[..., axis], g, flavor_flip({axis}, 3))
    return U


def explicit_u3_matrix(p, mass, eps):
    """The fully expanded 4x4 matrix of the 3D walk in terms of S_i^2.

    Entries are written as polynomials in X = S_x^2, Y = S_y^2, Z = S_z^2 with
    the overall factor S_x^dagger S_y^dagger S_z^dagger / 4.  This matrix is
    the substep product in a basis rotated by :func:`u3_basis_change`.
    """
    p = _as_momenta(p, 3)
    Sx, Sy, Sz = (np.exp(-1j * eps * p[..., a]) for a in range(3))
    X, Y, Z = Sx**2, Sy**2, Sz**2
    c, s = math.cos(mass * eps), math.sin(mass * eps)
    i = 1j
    a = (1 + i) * (X * (1 - i * Y) + Y - i)
    b = (1 + i) * Z * (i * (X + i) * Y + X - i)
    d = (-1 + i) * (i * X * (Y + i) + Y - i)
    e = (1 + i) * Z * (X * (Y - i) - i * Y + 1)
    rows = [
        [a * c, b * c, (-1 + i) * Z * (X * (Y + i) + i * Y + 1) * s, (1 + i) * (i * (X + i) * Y + X - i) * s],
        [d * c, e * c, (-1 + i) * Z * (i * X * (Y + i) + Y - i) * s, (-1 + i) * (X * (1 + i * Y) + Y + i) * s],
        [a * s, b * s, (1 + i) * Z * (X * (1 - i * Y) + Y - i) * c, (1 + i) * (X * (-1 - i * Y) + Y + i) * c],
        [d * s, e * s, (1 + i) * Z * (X * (Y + i) - i * Y - 1) * c, (1 - i) * (X * (1 + i * Y) + Y + i) * c],
    ]
    M = np.stack([np.stack(r, axis=-1) for r in rows], axis=-2)
    return 0.25 * np.conj(Sx * Sy * Sz)[..., None, None] * M


def u3_basis_change():
    """W with explicit_u3_matrix = W U W^dagger, acting on the second qubit.

    Conjugation by W sends the second-factor generators (s1, s2, s3) to
    (-s2, -s1, -s3), i.e. the expanded matrix uses x <-> y relabelled
    generators with flipped signs.
    """
    return np.kron(I2, np.array([[0, 1], [-1j, 0]]))


def symbol_of(spec):
    m, eps = spec.mass, spec.epsilon
    c, s = math.cos(m * eps), math.sin(m * eps)
    kind = spec.kind
    n = spec.matrix_dim

    if kind is SchemeKind.NAIVE:
        def ev(E, p):
            E = np.asarray(E, dtype=float)
            p = _as_momenta(p, 1)[..., 0]
            return (np.sin(E * eps)[..., None, None] * I2
                    - np.sin(p * eps)[..., None, None] * S3 - m * eps * S1)
        return FourierSymbol(spec, 2, 2, ev, stencil_scale=1.0 / eps)

    if kind is SchemeKind.QW1D:
        def ev(E, p):
            E = np.asarray(E, dtype=float)
            p = _as_momenta(p, 1)[..., 0]
            t = np.exp(-1j * E * eps)
            out = np.empty(np.broadcast(E, p).shape + (2, 2), dtype=complex)
            out[..., 0, 0] = c * np.exp(-1j * p * eps) - t
            out[..., 0, 1] = -1j * s
            out[..., 1, 0] = -1j * s
            out[..., 1, 1] = c * np.exp(1j * p * eps) - t
            return out
        return FourierSymbol(spec, 2, 2, ev)

    if kind is SchemeKind.FQW1D:
        def ev(E, p):
            E = np.asarray(E, dtype=float)
            p = _as_momenta(p, 1)[..., 0]
            t = np.exp(-1j * E * eps)[..., None, None]
            shape = np.broadcast(E, p).shape
            out = np.zeros(shape + (4, 4), dtype=complex)
            out[..., :2, :2] = (c * np.exp(-1j * p * eps)[..., None, None] - t) * S1
            out[..., 2:, 2:] = (c * np.exp(1j * p * eps)[..., None, None] - t) * S1
            out[..., :2, 2:] = -1j * s * I2
            out[..., 2:, :2] = -1j * s * I2
            return out
        return FourierSymbol(spec, 2, 4, ev)

    if kind is SchemeKind.QW3D:
        def ev(E, p):
            E = np.asarray(E, dtype=float)
            U = qw3d_unitary(p, m, eps)
            return U - np.exp(-1j * E * eps)[..., None, None] * np.eye(4)
        return FourierSymbol(spec, 4, 4, ev)

    if kind is SchemeKind.FQW3D:
        X = np.kron(np.eye(4), flavor_flip({0, 1, 2}, 3))

        def ev(E, p):
            E = np.asarray(E, dtype=float)
            U = fqw3d_unitary(p, m, eps)
            return U - np.exp(-1j * E * eps)[..., None, None] * X
        return FourierSymbol(spec, 4, n, ev)

    raise InvalidSpec(f"unsupported kind {kind}")


def numerical_det(mats):
    mats = np.asarray(mats)
    if mats.shape[-1] == 2:
        return mats[..., 0, 0] * mats[..., 1, 1] - mats[..., 0, 1] * mats[..., 1, 0]
    return np.linalg.det(mats)


def _d1(E, p, c, eps):
    return 2 * np.exp(-1j * E * eps) * (np.cos(E * eps) - np.cos(p * eps) * c)


def _d3(E, p, m, eps):
    px, py, pz = p[..., 0], p[..., 1], p[..., 2]
    e = lambda x: np.exp(1j * eps * x)
    P = px + py + pz
    cm = math.cos(eps * m)
    first = e(2 * E) * math.cos(2 * eps * m) * (
        8 * e(2 * P) + e(4 * P) + e(4 * (px + py)) + e(4 * (px + pz)) + e(4 * px)
        + e(4 * (py + pz)) + e(4 * py) + e(4 * pz) + 1)
    second = 4 * (
        -8 * (1 + e(2 * E)) * cm * np.cos(eps * px) * np.cos(eps * py) * np.cos(eps * pz) * e(E + 2 * P)
        + 2 * e(2 * (E + P)) + 2 * e(2 * (2 * E + P))
        + e(2 * (E + 2 * px + py + pz)) + e(2 * (E + px + 2 * py + pz)) + e(2 * (E + px + py + 2 * pz))
        + e(2 * (E + px + py)) + e(2 * (E + px + pz)) + e(2 * (E + py + pz)) + 2 * e(2 * P))
    return np.exp(-2j * eps * (2 * E + P)) * (first + second) / 8


def closed_form_det(spec):
    m, eps = spec.mass, spec.epsilon
    c = math.cos(m * eps)
    kind = spec.kind

    def det(E, p):
        E = np.asarray(E, dtype=float)
        q = _as_momenta(p, spec.space_dim)
        if kind is SchemeKind.NAIVE:
            return (np.sin(E * eps) ** 2 - np.sin(q[..., 0] * eps) ** 2 - (m * eps) ** 2).astype(complex)
        if kind is SchemeKind.QW1D:
            return _d1(E, q[..., 0], c, eps)
        if kind is SchemeKind.FQW1D:
            return 4 * np.exp(-2j * E * eps) * (np.cos(E * eps) - c * np.cos(q[..., 0] * eps)) ** 2
        if kind is SchemeKind.QW3D:
            return _d3(E, q, m, eps)
        return _d3(E, q, m, eps) ** 8

    return DispersionExpression(symbol_of(spec), det)


def random_bz_points(spec, samples, rng):
    lim = math.pi / spec.epsilon
    E = rng.uniform(-lim, lim, size=samples)
    p = rng.uniform(-lim, lim, size=(samples, spec.space_dim))
    return E, p


def det_consistency(spec, samples=1000, seed=1234):
    """max |closed form - numerical det| / (1 + |det|) over random BZ points."""
    rng = np.random.default_rng(seed)
    E, p = random_bz_points(spec, samples, rng)
    num = numerical_det(symbol_of(spec)(E, p))
    closed = closed_form_det(spec)(E, p)
    return float(np.max(np.abs(closed - num) / (1 + np.abs(num))))


def continuum_polynomial(kind, E, p, m):
    """Leading continuum term of det/eps^d for each scheme kind."""
    kind = SchemeKind(kind)
    E = np.asarray(E, dtype=float)
    q = _as_momenta(p, 3 if kind in (SchemeKind.QW3D, SchemeKind.FQW3D) else 1)
    shell = E**2 - np.sum(q**2, axis=-1) - m**2
    if kind is SchemeKind.NAIVE:
        return shell
    if kind is SchemeKind.QW1D:
        return -shell
    if kind in (SchemeKind.FQW1D, SchemeKind.QW3D):
        return shell**2
    return shell**16


_DET_POWER = {SchemeKind.NAIVE: 2, SchemeKind.QW1D: 2, SchemeKind.FQW1D: 4,
              SchemeKind.QW3D: 4, SchemeKind.FQW3D: 32}


@dataclass(frozen=True)
class TaylorFit:
    order: float
    eps: tuple
    residuals: tuple


def taylor_continuum_check(spec, point, eps_sequence, underflow=1e-300):
    """Slope of log|det/eps^d - continuum| against log eps."""
    eps_seq = [float(e) for e in eps_sequence]
    if len(eps_seq) < 2 or any(b >= a for a, b in zip(eps_seq, eps_seq[1:])):
        raise InvalidSpec("eps_sequence must be strictly decreasing with at least two entries")
    E, p = point
    d = _DET_POWER[spec.kind]
    target = continuum_polynomial(spec.kind, E, np.asarray(p, dtype=float), spec.mass)
    res = []
    for eps in eps_seq:
        s = spec.with_epsilon(eps)
        det = numerical_det(symbol_of(s)(np.asarray(E, float), np.asarray(p, float)))
        res.append(float(abs(det / eps**d - target)))
    if max(res) <= underflow:
        raise DegenerateFit("residual vanishes at every spacing; the point converges exactly")
    r = np.array(res)
    keep = r > underflow
    slope = np.polyfit(np.log(np.array(eps_seq)[keep]), np.log(r[keep]), 1)[0]
    return TaylorFit(float(slope), tuple(eps_seq), tuple(res))


def flavored_power_identity(spec_pair, samples=500, seed=1234):
    plain, flav = spec_pair
    pairs = {SchemeKind.QW1D: (SchemeKind.FQW1D, 2), SchemeKind.QW3D: (SchemeKind.FQW3D, 8)}
    if plain.kind not in pairs or pairs[plain.kind][0] is not flav.kind:
        raise InvalidSpec("expected (DiracQW1D, FlavoredQW1D) or (DiracQW3D, FlavoredQW3D)")
    if (plain.mass, plain.epsilon) != (flav.mass, flav.epsilon):
        raise InvalidSpec("the pair must share mass and spacing")
    k = pairs[plain.kind][1]
    rng = np.random.default_rng(seed)
    E, p = random_bz_points(plain, samples, rng)
    d = numerical_det(symbol_of(plain)(E, p))
    df = numerical_det(symbol_of(flav)(E, p))
    return float(np.max(np.abs(df - d**k) / np.maximum(np.abs(d**k), 1e-300)))


def check_periodicity(spec, samples=50, seed=1234):
    rng = np.random.default_rng(seed)
    E, p = random_bz_points(spec, samples, rng)
    sym = symbol_of(spec)
    base = sym(E, p)
    period = 2 * math.pi / spec.epsilon
    worst = float(np.abs(sym(E + period, p) - base).max())
    for a in range(spec.space_dim):
        q = p.copy()
        q[:, a] += period
        worst = max(worst, float(np.abs(sym(E, q) - base).max()))
    return worst
