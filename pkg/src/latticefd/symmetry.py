"""Chiral projectors, commutator checks and the gauged neutrino-sector run."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateFit, InvalidSpec, MassNotZero, NotFlavored
from .fourier import random_bz_points, symbol_of
from .schemes import SchemeKind, SchemeSpec
from .evolve import Stepper, StateVector

R, L = 0, 1  # chirality index: + movers are right-handed


@dataclass(frozen=True)
class ChiralProjectors:
    P_R: np.ndarray
    P_L: np.ndarray

    def algebra_deviation(self):
        eye = np.eye(self.P_R.shape[0])
        checks = (self.P_R @ self.P_R - self.P_R, self.P_L @ self.P_L - self.P_L,
                  self.P_R + self.P_L - eye, self.P_R @ self.P_L)
        return float(max(np.abs(c).max() for c in checks))


def chiral_projectors(spec):
    """Chirality projectors on internal (x) flavor; the flavor factor is the identity."""
    if spec.space_dim == 1:
        right = np.diag([1.0, 0.0]).astype(complex)
    else:
        right = np.diag([1.0, 1.0, 0.0, 0.0]).astype(complex)
    P_R = np.kron(right, np.eye(spec.flavor_dim))
    return ChiralProjectors(P_R, np.eye(P_R.shape[0]) - P_R)


def chiral_commutator(spec, samples=200, seed=1234):
    """max |[symbol(E, p), P_R]| over random zone points."""
    rng = np.random.default_rng(seed)
    E, p = random_bz_points(spec, samples, rng)
    D = symbol_of(spec)(E, p)
    P = chiral_projectors(spec).P_R
    return float(np.abs(D @ P - P @ D).max())


@dataclass(frozen=True)
class MassFit:
    power: float
    mass_eps: tuple
    norms: tuple


def commutator_mass_power(kind, epsilon=0.1, mass_eps=None, samples=200, seed=1234):
    """Log-log slope of the commutator norm against m eps at fixed samples."""
    if mass_eps is None:
        mass_eps = tuple(np.geomspace(0.01, 0.3, 8))
    norms = []
    for me in mass_eps:
        spec = SchemeSpec(kind, me / epsilon, epsilon)
        norms.append(chiral_commutator(spec, samples, seed))
    norms = np.asarray(norms)
    if np.any(norms <= 0):
        raise DegenerateFit("commutator vanished at a massive point")
    slope = float(np.polyfit(np.log(mass_eps), np.log(norms), 1)[0])
    return MassFit(slope, tuple(float(x) for x in mass_eps), tuple(float(x) for x in norms))


@dataclass(frozen=True)
class GaugePhaseField:
    """Per-site angles theta_c(n, k) with couplings g_R, g_L.

    Angles at time n come from a generator seeded with (seed, n), uniform in
    [-scale, scale]; seed None gives zero angles.
    """

    g_L: float = -1.0
    g_R: float = 0.0
    seed: int | None = 0
    scale: float = math.pi

    def angles(self, n, sizes):
        if self.seed is None:
            z = np.zeros(sizes)
            return z, z
        rng = np.random.default_rng([self.seed, n])
        theta = rng.uniform(-self.scale, self.scale, size=(2,) + tuple(sizes))
        return theta[R], theta[L]

    def phases(self, n, sizes):
        th_r, th_l = self.angles(n, sizes)
        return np.exp(1j * self.g_R * th_r), np.exp(1j * self.g_L * th_l)


def sector_masses(state):
    """l2 mass per (chirality, flavor) sector."""
    comp = state.components()
    axes = tuple(range(state.space_dim))
    mass = np.sum(np.abs(comp) ** 2, axis=axes)
    return {(c, f): float(mass[c, f]) for c in range(mass.shape[0]) for f in range(mass.shape[1])}


@dataclass
class NeutrinoResult:
    leakage: float
    populated: tuple
    history: list = field(default_factory=list)


def neutrino_sector_run(phases, initial, steps, spec=None, threshold=0.0):
    """Massless flavored walk with a chirality-dependent phase after every step.

    Returns the largest total mass ever found outside the sectors the initial
    state populates (flavor 0 is red, chirality 1 is left-handed).
    """
    if spec is None:
        spec = SchemeSpec(SchemeKind.FQW1D, 0.0, 0.1)
    if spec.kind is not SchemeKind.FQW1D:
        raise NotFlavored("the sector run uses the 1D flavored walk")
    if spec.mass != 0:
        raise MassNotZero("chirality sectors are only invariant for a massless walk")
    if phases.g_R != 0:
        raise InvalidSpec("g_R must be 0")
    stepper = Stepper(spec)
    masses = sector_masses(initial)
    populated = tuple(k for k, v in masses.items() if v > threshold)
    history = [masses]
    leak = 0.0
    state = initial
    for _ in range(steps):
        state = stepper(state)
        ph_r, ph_l = phases.phases(state.time_index, state.sizes)
        comp = state.components().copy()
        comp[..., R, :] *= ph_r[..., None]
        comp[..., L, :] *= ph_l[..., None]
        state.amplitudes = comp.reshape(state.amplitudes.shape)
        masses = sector_masses(state)
        history.append(masses)
        leak = max(leak, sum(v for k, v in masses.items() if k not in populated))
    return NeutrinoResult(leak, populated, history)


def left_red_state(spec, field_, right_field=None):
    """State on the red sublattice with the given left (and optional right) profiles."""
    N = len(field_)
    state = StateVector.zeros(spec, (N,))
    comp = state.components()
    red = (state.time_index + np.arange(N)) % 2 == 0
    comp[red, L, 0] = np.asarray(field_)[red]
    if right_field is not None:
        comp[red, R, 0] = np.asarray(right_field)[red]
    state.amplitudes = comp.reshape(state.amplitudes.shape)
    return state
