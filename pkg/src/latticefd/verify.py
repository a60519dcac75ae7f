"""The acceptance gate: thirteen checks, each returning a CheckResult."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import covering, doublers, fourier, greens, lattice, symmetry
from .evolve import Packet, Stepper, StateVector, conforming_state, continuum_convergence, flavor_form_defect
from .schemes import SchemeKind, SchemeSpec, hermiticity_test

K = SchemeKind
SWEEP = (0.1, 0.05, 0.025, 0.0125)


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    budget: float
    seconds: float = 0.0
    details: dict = field(default_factory=dict)

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.number:2d} {self.name} ({self.seconds:.2f}s, budget {self.budget:g}s)"

    def to_dict(self):
        return {"number": self.number, "name": self.name, "passed": self.passed,
                "seconds": round(self.seconds, 3), "budget": self.budget, "details": self.details}


def _det_equivalence(quick):
    n = 200 if quick else 1000
    devs = {k.value: fourier.det_consistency(SchemeSpec(k, 0.7, 0.1), samples=n, seed=11) for k in K}
    return max(devs.values()) <= 1e-10, devs


def _u3_identity(quick):
    rng = np.random.default_rng(12)
    p = rng.uniform(-math.pi / 0.1, math.pi / 0.1, size=(200, 3))
    W = fourier.u3_basis_change()
    U = fourier.qw3d_unitary(p, 0.8, 0.1)
    dev = float(np.abs(fourier.explicit_u3_matrix(p, 0.8, 0.1) - W @ U @ W.conj().T).max())
    return dev <= 1e-12, {"max_entry_deviation": dev}


QW3D_CLASSES = {(1, 1, 0, 0), (1, 0, 1, 0), (1, 0, 0, 1), (0, 1, 1, 0), (0, 1, 0, 1),
                (0, 0, 1, 1), (1, 1, 1, 1)}
EXPECTED_CLASSES = {
    K.NAIVE: {(1, 0), (0, 1), (1, 1)},
    K.QW1D: {(1, 1)},
    K.QW3D: QW3D_CLASSES,
}


def _doubler_counts(quick):
    out, ok = {}, True
    for kind, want in EXPECTED_CLASSES.items():
        for m in (0.0, 0.5, 1.5):
            for eps in (0.05, 0.2):
                rep = doublers.scan_doublers(SchemeSpec(kind, m, eps), samples=100 if quick else 200)
                got = {c.shift for c in rep.invariant_classes}
                out[f"{kind.value} m={m} eps={eps}"] = len(got)
                ok &= got == want
    return ok, out


def _power_identities(quick):
    one = fourier.flavored_power_identity(
        (SchemeSpec(K.QW1D, 0.5, 0.1), SchemeSpec(K.FQW1D, 0.5, 0.1)), samples=500)
    three = fourier.flavored_power_identity(
        (SchemeSpec(K.QW3D, 1.0, 0.05), SchemeSpec(K.FQW3D, 1.0, 0.05)), samples=200)
    return max(one, three) <= 1e-8, {"1d": one, "3d": three}


def _flavored_gap(quick):
    ok, out = True, {}
    for m in (0.3, 1.0):
        spec = SchemeSpec(K.FQW1D, m, 0.1)
        corner = doublers.rhombus_corner_gap(spec)
        origin = doublers.origin_gap(spec)
        bound = 0.5 * (2 * (1 - math.cos(m * spec.epsilon))) ** 2
        out[f"m={m}"] = {"corner_min": corner, "origin_min": origin, "bound": bound}
        ok &= corner > bound and origin < 1e-6 * corner
    return ok, out


def _taylor(quick):
    rng = np.random.default_rng(16)
    out, ok = {}, True
    for kind in (K.NAIVE, K.QW1D, K.QW3D):
        spec = SchemeSpec(kind, 0.5, 0.1)
        orders = []
        for _ in range(10):
            E = rng.uniform(-2, 2)
            p = rng.uniform(-2, 2, size=spec.space_dim)
            orders.append(fourier.taylor_continuum_check(spec, (E, p), SWEEP).order)
        out[kind.value] = min(orders)
        ok &= min(orders) >= 0.9
    return ok, out


def _green(quick):
    naive = SchemeSpec(K.NAIVE, 0.7, 0.2)
    walk = SchemeSpec(K.QW1D, 0.7, 0.2)
    d_naive = greens.defining_identity_deviation(greens.green_function(naive, 16, 16))
    # the periodic grid hits the on-shell mode (4, 4) for the walk; use antiperiodic time
    d_walk = greens.defining_identity_deviation(greens.green_function(walk, 16, 16, time_offset=0.5))
    cramer = greens.cramer_deviation(naive, 16, 16)
    ok = max(d_naive, d_walk) <= 1e-10 and cramer <= 1e-12
    return ok, {"naive": d_naive, "walk": d_walk, "cramer": cramer}


def _norm_drift(spec, state, steps):
    stepper = Stepper(spec)
    drift, defect = 0.0, 0.0
    prev = state.norm()
    for _ in range(steps):
        state = stepper(state)
        now = state.norm()
        drift = max(drift, abs(now - prev))
        prev = now
        if spec.flavored:
            defect = max(defect, flavor_form_defect(state))
    return drift, defect


def _evolution(quick):
    rng = np.random.default_rng(18)
    steps = 200
    out, ok = {}, True
    for kind, sizes in ((K.QW1D, (128,)), (K.FQW1D, (128,)), (K.QW3D, (6, 6, 6)), (K.FQW3D, (6, 6, 6))):
        spec = SchemeSpec(kind, 0.6, 0.1)
        f = rng.normal(size=sizes + (spec.internal_dim,)) + 1j * rng.normal(size=sizes + (spec.internal_dim,))
        f /= np.linalg.norm(f)
        state = conforming_state(spec, f) if spec.flavored else StateVector(f, spec.internal_dim)
        drift, defect = _norm_drift(spec, state, steps)
        out[kind.value] = {"norm_drift_per_step": drift, "flavor_defect": defect}
        ok &= drift <= 1e-12 and defect <= 1e-12
    for kind in (K.QW1D, K.FQW1D):
        res = continuum_convergence(SchemeSpec(kind, 0.5, 0.1), Packet(), 2.0, SWEEP)
        orders = [res.order] + list(res.flavor_orders.values())
        out[kind.value]["order"] = min(orders)
        ok &= min(orders) >= 0.9
    return ok, out


def _chiral(quick):
    out, ok = {}, True
    for kind in K:
        massless = symmetry.chiral_commutator(SchemeSpec(kind, 0.0, 0.1))
        power = symmetry.commutator_mass_power(kind).power
        out[kind.value] = {"massless": massless, "power": power}
        ok &= massless <= 1e-12 and abs(power - 1) <= 0.1
    return ok, out


def _neutrino(quick):
    spec = SchemeSpec(K.FQW1D, 0.0, 0.1)
    rng = np.random.default_rng(20)
    left = rng.normal(size=64) + 1j * rng.normal(size=64)
    init = symmetry.left_red_state(spec, left)
    res = symmetry.neutrino_sector_run(symmetry.GaugePhaseField(g_L=-1.0, g_R=0.0, seed=20), init, 100)
    return res.leakage <= 1e-12, {"leakage": res.leakage}


def _covering(quick):
    hist1 = covering.fiber_histogram(1000, seed=21)
    hist3 = covering.fiber_histogram(200, seed=22, triple=True)
    phi2 = covering.phi2_well_defined(200, seed=23)
    sheet = covering.det_sheet_consistency(0.5, 0.1, samples=500, seed=24)
    ok = set(hist1) == {2} and set(hist3) == {8} and phi2 <= 1e-12 and sheet <= 1e-10
    return ok, {"phi_fibers": hist1, "phi3_fibers": hist3, "phi2": phi2, "sheet": sheet}


F = Fraction
# the 2D list is stated for a.k = -2 pi on the first two vectors, hence the signs
EXPECTED_RECIPROCAL = {
    "oblique_2d": ((1, -1, 0), (-1, -1, 0), (0, 0, 2)),
    "oblique_4d": ((-1, 1, 1, 1), (1, -1, 0, 0), (1, 0, -1, 0), (1, 0, 0, -1)),
}


def _families(normals):
    return {(tuple(n), F(1)) for n in normals}


EXPECTED_FAMILIES = {
    "rhombus": _families([(1, 1), (1, -1)]),
    "bcc": _families([(1, 1, 0), (1, -1, 0), (1, 0, 1), (1, 0, -1), (0, 1, 1), (0, 1, -1)]),
    "4d": _families([(1, 1, 0, 0), (1, -1, 0, 0), (1, 0, 1, 0), (1, 0, -1, 0), (1, 0, 0, 1),
                     (1, 0, 0, -1), (0, 1, 1, 0), (0, 1, -1, 0), (0, 1, 0, 1), (0, 1, 0, -1),
                     (0, 0, 1, 1), (0, 0, 1, -1)]),
}


def _bz(quick):
    r2 = lattice.reciprocal_basis(lattice.oblique_2d_embedded())
    r4 = lattice.reciprocal_basis(lattice.oblique_4d())
    listed2 = EXPECTED_RECIPROCAL["oblique_2d"]
    signs2 = (-1, -1, 1)
    rec_ok = (r2.vectors == tuple(tuple(F(s * x) for x in v) for s, v in zip(signs2, listed2))
              and r4.vectors == tuple(tuple(F(x) for x in v) for v in EXPECTED_RECIPROCAL["oblique_4d"])
              and all(r.duality(lat) == [[int(i == j) for j in range(lat.dim)] for i in range(lat.dim)]
                      for r, lat in ((r2, lattice.oblique_2d_embedded()), (r4, lattice.oblique_4d()))))
    rhombus = lattice.bragg_bz(lattice.reciprocal_basis(lattice.oblique_2d())).families()
    bcc = lattice.bragg_bz(lattice.reciprocal_basis(lattice.body_centered_cubic())).families()
    bz4 = lattice.bragg_bz(r4).families()
    deg4 = {c.family() for c in lattice.degenerate_bz_constraints(lattice.DEGENERATE_4D)}
    degb = {c.family() for c in lattice.degenerate_bz_constraints(lattice.DEGENERATE_BCC)}
    ok = (rec_ok and rhombus == EXPECTED_FAMILIES["rhombus"] and bcc == EXPECTED_FAMILIES["bcc"]
          and bz4 == EXPECTED_FAMILIES["4d"] and deg4 == EXPECTED_FAMILIES["4d"]
          and degb == EXPECTED_FAMILIES["bcc"])
    return ok, {"reciprocal": rec_ok, "rhombus": len(rhombus), "bcc": len(bcc), "4d": len(bz4),
                "degenerate_4d": len(deg4), "degenerate_bcc": len(degb)}


def _hermiticity(quick):
    eps = 0.1
    sym = hermiticity_test("symmetric", N=16, epsilon=eps)
    fwd = hermiticity_test("forward", N=16, epsilon=eps)
    return sym <= 1e-15 and fwd >= 1 / eps, {"symmetric": sym, "forward": fwd}


CHECKS = (
    (1, "closed-form determinants", 10, _det_equivalence),
    (2, "3D walk matrix identity", 5, _u3_identity),
    (3, "doubler counts", 30, _doubler_counts),
    (4, "flavored power identities", 10, _power_identities),
    (5, "flavored zone has no doublers", 10, _flavored_gap),
    (6, "continuum Taylor order", 10, _taylor),
    (7, "Green's function identity", 10, _green),
    (8, "evolution contracts", 60, _evolution),
    (9, "chiral symmetry", 10, _chiral),
    (10, "neutrino sector stability", 5, _neutrino),
    (11, "covering multiplicities", 10, _covering),
    (12, "Brillouin zone geometry", 5, _bz),
    (13, "lattice derivative hermiticity", 1, _hermiticity),
)


def run_check(number, quick=False):
    num, name, budget, fn = CHECKS[number - 1]
    t = time.perf_counter()
    passed, details = fn(quick)
    return CheckResult(num, name, bool(passed), budget, time.perf_counter() - t, details)


def run_all(quick=False, report=None):
    results = []
    for num, *_ in CHECKS:
        res = run_check(num, quick)
        if report is not None:
            report(res)
        results.append(res)
    return results
