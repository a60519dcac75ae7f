"""Covering maps of the complexified Brillouin zone.

A point (E, p) is encoded as z = eps (E + i p) / 2 pi, so the square zone is
the torus C / Lambda with Lambda = Z + iZ and fundamental domain [-1/2, 1/2)^2.
The reduced (rhombus) zone is C / Gamma with Gamma spanned by j = (1 - i)/2 and
(1 + i)/2; Lambda has index 2 in Gamma.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fourier import closed_form_det
from .schemes import SchemeKind, SchemeSpec

J = (1 - 1j) / 2
K = (1 + 1j) / 2
_TOL = 1e-12


def _square(t):
    """Reduce reals to [-1/2, 1/2)."""
    t = np.asarray(t, dtype=float)
    return t - np.floor(t + 0.5)


def reduce_square(z):
    z = np.asarray(z, dtype=complex)
    return _square(z.real) + 1j * _square(z.imag)


def rhombus_coords(z):
    """(a, b) with z = a j + b (1+i)/2."""
    z = np.asarray(z, dtype=complex)
    return z.real - z.imag, z.real + z.imag


def from_rhombus(a, b):
    return a * J + b * K


def _snap(t):
    # keep values a rounding error away from a tie on the closed side
    t = np.asarray(t, dtype=float)
    r = np.round(t * 2) / 2
    return np.where(np.abs(t - r) < _TOL, r, t)


def phi(z):
    """Project a point of the square torus to its representative in the rhombus.

    The rhombus is |Re| + |Im| <= 1/2 with the half-open convention a, b in
    (-1/2, 1/2]; on the rhombus the map is the identity.
    """
    a, b = rhombus_coords(z)
    a, b = _snap(a), _snap(b)
    a = a - np.ceil(a - 0.5)
    b = b - np.ceil(b - 0.5)
    return from_rhombus(a, b)


def in_rhombus(z, tol=_TOL):
    a, b = rhombus_coords(z)
    return bool(np.all((a > -0.5 + tol) & (a <= 0.5 + tol) & (b > -0.5 + tol) & (b <= 0.5 + tol)))


def torus_distance(z, w):
    """Distance on the square torus C / Lambda."""
    d = reduce_square(np.asarray(z, dtype=complex) - np.asarray(w, dtype=complex))
    return np.abs(d)


def _dedupe(points, tol=1e-9):
    out = []
    for w in points:
        if all(torus_distance(w, u) > tol for u in out):
            out.append(w)
    return out


def fiber(z_prime):
    """All points of the square torus that phi sends to z_prime.

    Candidates z' + a j + b (1+i)/2 over a small coefficient window are reduced
    into [-1/2, 1/2)^2 and deduplicated.
    """
    z_prime = complex(phi(z_prime))
    cands = [complex(reduce_square(z_prime + a * J + b * K))
             for a in range(-2, 3) for b in range(-2, 3)]
    return _dedupe(cands)


def phi3(z, w, x):
    return phi(z), phi(w), phi(x)


def fiber3(z, w, x):
    fz, fw, fx = fiber(z), fiber(w), fiber(x)
    return [(a, b, c) for a in fz for b in fw for c in fx]


def pi_projection(z, w, x):
    """(E + i px, py + i pz) read off the section coordinates."""
    z, w, x = (np.asarray(v, dtype=complex) for v in (z, w, x))
    return z.real + 1j * z.imag, w.imag + 1j * x.imag


def section(u, v):
    """A preimage under pi_projection with equal real parts."""
    u, v = np.asarray(u, dtype=complex), np.asarray(v, dtype=complex)
    E = u.real
    return u, E + 1j * v.real, E + 1j * v.imag


def phi2(u, v, shift=(0, 0, 0, 0)):
    """pi o phi3 o section, optionally through a shifted section representative.

    shift = (n, a, b, c) adds (n + ia, n + ib, n + ic), a Lambda^3 translation
    that keeps the three real parts equal.
    """
    n, a, b, c = shift
    z, w, x = section(u, v)
    z, w, x = z + n + 1j * a, w + n + 1j * b, x + n + 1j * c
    return pi_projection(*phi3(z, w, x))


def phi2_difference(out1, out2):
    """Distance between two phi2 outputs modulo the image of Gamma^3.

    The first coordinate is compared on the rhombus torus, the imaginary parts
    carried by the second coordinate modulo 1/2.
    """
    d1 = np.asarray(out1[0]) - np.asarray(out2[0])
    a, b = rhombus_coords(d1)
    first = np.hypot(a - np.round(a), b - np.round(b))
    d2 = np.asarray(out1[1]) - np.asarray(out2[1])
    second = np.hypot(d2.real * 2 - np.round(d2.real * 2), d2.imag * 2 - np.round(d2.imag * 2)) / 2
    return np.maximum(first, second)


def phi2_well_defined(samples=200, seed=1234):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        u = complex(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5))
        v = complex(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5))
        shift = tuple(int(s) for s in rng.integers(-3, 4, size=4))
        d = phi2_difference(phi2(u, v), phi2(u, v, shift))
        worst = max(worst, float(d))
    return worst


def to_energy_momentum(z, epsilon):
    z = np.asarray(z, dtype=complex)
    return 2 * math.pi / epsilon * z.real, 2 * math.pi / epsilon * z.imag


def random_rhombus_points(samples, rng):
    a = rng.uniform(-0.5, 0.5, samples)
    b = rng.uniform(-0.5, 0.5, samples)
    return from_rhombus(a, b)


def det_sheet_consistency(mass, epsilon, samples=500, seed=1234):
    """max | |D(sheet 1)| - |D(sheet 2)| | over sampled reduced-zone points."""
    det = closed_form_det(SchemeSpec(SchemeKind.QW1D, mass, epsilon))
    rng = np.random.default_rng(seed)
    worst = 0.0
    for zp in random_rhombus_points(samples, rng):
        pts = fiber(zp)
        vals = []
        for z in pts:
            E, p = to_energy_momentum(z, epsilon)
            vals.append(abs(complex(det(E, np.array([p])))))
        worst = max(worst, max(vals) - min(vals))
    return worst


def fiber_histogram(samples=1000, seed=1234, triple=False):
    rng = np.random.default_rng(seed)
    counts = {}
    for _ in range(samples):
        if triple:
            pts = random_rhombus_points(3, rng)
            n = len(fiber3(*pts))
        else:
            n = len(fiber(random_rhombus_points(1, rng)[0]))
        counts[n] = counts.get(n, 0) + 1
    return counts


@dataclass(frozen=True)
class CoveringMap:
    kind: str
    multiplicity: int

    def __call__(self, *args):
        if self.kind == "phi_1d":
            return phi(*args)
        if self.kind == "phi3_3d":
            return phi3(*args)
        return pi_projection(*args)


PHI = CoveringMap("phi_1d", 2)
PHI3 = CoveringMap("phi3_3d", 8)
PI = CoveringMap("pi_projection", 1)
