"""Doubler detection via half-period shift symmetries of |det|."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NotApplicable, NotFlavored
from .fourier import closed_form_det, numerical_det, random_bz_points, symbol_of

DEFAULT_SEED = 20240607


@dataclass(frozen=True)
class ShiftClass:
    shift: tuple  # 0/1 flags in units of pi/eps, order (E, p...)
    classification: str

    @property
    def axes(self):
        names = ["E", "px", "py", "pz"] if len(self.shift) == 4 else ["E", "p"]
        return tuple(n for n, f in zip(names, self.shift) if f)

    def to_dict(self):
        return {"shift": list(self.shift), "class": self.classification}


def classify(shift):
    if not any(shift):
        raise ValueError("the zero shift is not a doubler class")
    if shift[0] and not any(shift[1:]):
        return "temporal"
    if not shift[0]:
        return "spatial"
    return "spatiotemporal"


@dataclass(frozen=True)
class DoublerReport:
    scheme: object
    invariant_classes: tuple
    candidate_count: int
    tolerance: float
    seed: int
    samples: int
    deviations: dict = field(default_factory=dict, compare=False)

    def to_dict(self):
        return {"scheme": self.scheme.to_dict(),
                "invariant_classes": [c.to_dict() for c in self.invariant_classes],
                "candidate_count": self.candidate_count, "tolerance": self.tolerance,
                "seed": self.seed, "samples": self.samples,
                "max_deviation": {",".join(map(str, k)): v for k, v in self.deviations.items()}}


def half_period_shifts(dim):
    return [s for s in itertools.product((0, 1), repeat=dim) if any(s)]


def _det_fn(spec):
    sym = symbol_of(spec)
    return lambda E, p: numerical_det(sym(E, p))


def shift_deviation(spec, shift, E, p, sign=1):
    """max | |det(q+s)| - |det(q)| | / (1 + |det(q)|) over the sample points."""
    det = _det_fn(spec)
    h = sign * math.pi / spec.epsilon
    s = np.asarray(shift, dtype=float) * h
    base = np.abs(det(E, p))
    moved = np.abs(det(E + s[0], p + s[1:]))
    return float(np.max(np.abs(moved - base) / (1 + base)))


def scan_doublers(spec, samples=200, tol=1e-9, seed=DEFAULT_SEED):
    if samples < 100:
        raise ValueError("use at least 100 samples")
    rng = np.random.default_rng(seed)
    E, p = random_bz_points(spec, samples, rng)
    dim = 1 + spec.space_dim
    found, devs = [], {}
    for s in half_period_shifts(dim):
        dev = shift_deviation(spec, s, E, p)
        devs[s] = dev
        if dev <= tol:
            found.append(ShiftClass(s, classify(s)))
    return DoublerReport(spec, tuple(found), len(devs), tol, seed, samples, devs)


def rhombus_vertices(spec):
    """Vertices of the reduced (flavored) Brillouin zone, rows (E, p...)."""
    h = math.pi / spec.epsilon
    if spec.space_dim == 1:
        return np.array([[h, 0], [-h, 0], [0, h], [0, -h]], dtype=float)
    from .lattice import bragg_bz, oblique_4d, reciprocal_basis
    bz = bragg_bz(reciprocal_basis(oblique_4d(spec.epsilon)))
    return bz.vertices()


def _disk_points(center, radius, grid):
    dim = len(center)
    ticks = np.linspace(-radius, radius, grid)
    mesh = np.stack(np.meshgrid(*([ticks] * dim), indexing="ij"), axis=-1).reshape(-1, dim)
    mesh = mesh[np.sum(mesh**2, axis=1) <= radius**2 * (1 + 1e-12)]
    return center + mesh


def disk_minimum(spec, center, disk_radius, grid):
    """min |det| over grid points inside a disk (ball in 4D) and the point count."""
    pts = _disk_points(np.asarray(center, dtype=float), disk_radius, grid)
    det = closed_form_det(spec)
    vals = np.abs(det(pts[:, 0], pts[:, 1:]))
    return float(vals.min()), len(pts)


def _require_massive_flavored(spec):
    if not spec.flavored:
        raise NotFlavored(f"{spec.kind.value} is not a flavored scheme")
    if spec.mass <= 0:
        raise NotApplicable("massless dispersion crosses the whole reduced zone")


def _default_grid(spec):
    # 36 ticks give ~1000 disk points in 2D; 9 ticks keep the 4D ball near 3000
    return 36 if spec.space_dim == 1 else 9


def rhombus_corner_gap(flavored_spec, disk_radius=None, grid=None):
    """min |D_f| over disks around the vertices of the reduced zone."""
    _require_massive_flavored(flavored_spec)
    grid = grid or _default_grid(flavored_spec)
    if disk_radius is None:
        disk_radius = 0.1 * math.pi / flavored_spec.epsilon
    return min(disk_minimum(flavored_spec, v, disk_radius, grid)[0]
               for v in rhombus_vertices(flavored_spec))


def origin_gap(flavored_spec, disk_radius=None, grid=None):
    """Same minimum over the disk around the origin, where the physical mode lives."""
    _require_massive_flavored(flavored_spec)
    grid = grid or _default_grid(flavored_spec)
    if disk_radius is None:
        disk_radius = 0.1 * math.pi / flavored_spec.epsilon
    center = np.zeros(1 + flavored_spec.space_dim)
    return disk_minimum(flavored_spec, center, disk_radius, grid)[0]


def rest_gap(spec):
    """|det| at E = p = 0."""
    z = np.zeros(spec.space_dim)
    return float(abs(closed_form_det(spec)(0.0, z)))


@dataclass(frozen=True)
class ShiftRelation:
    shift: tuple
    phase: complex
    residual: float
    constant: bool


def symmetry_identities(spec, samples=200, seed=DEFAULT_SEED, tol=1e-8):
    """Fit det(q+s)/det(q) to a constant phase for each invariant class."""
    report = scan_doublers(spec, samples=samples, seed=seed)
    rng = np.random.default_rng(seed + 1)
    E, p = random_bz_points(spec, samples, rng)
    det = _det_fn(spec)
    base = det(E, p)
    keep = np.abs(base) > 1e-6
    out = []
    for cls in report.invariant_classes:
        s = np.asarray(cls.shift, dtype=float) * math.pi / spec.epsilon
        ratio = det(E + s[0], p + s[1:])[keep] / base[keep]
        phase = complex(np.mean(ratio))
        residual = float(np.max(np.abs(ratio - phase)))
        out.append(ShiftRelation(cls.shift, phase, residual, residual <= tol))
    return out
