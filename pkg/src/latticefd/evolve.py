"""Direct-space evolution of the schemes and comparison with the continuum Dirac flow."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import BandwidthViolation, BoundaryWrap, NotApplicable, NotFlavored, ShapeMismatch
from .lattice import sublattice_partition
from .pauli import S1, S3, kron
from .schemes import QW3D_GENERATORS, QW3D_MASS_GENERATOR, SchemeKind, build_scheme


@dataclass
class StateVector:
    """Amplitudes indexed by (site..., internal * flavor_dim + flavor) at time n."""

    amplitudes: np.ndarray
    internal_dim: int
    flavor_dim: int = 1
    time_index: int = 0

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape[-1] != self.internal_dim * self.flavor_dim:
            raise ShapeMismatch(
                f"last axis has {self.amplitudes.shape[-1]} entries, expected "
                f"{self.internal_dim} x {self.flavor_dim}")

    @classmethod
    def zeros(cls, spec, sizes, time_index=0):
        sizes = tuple(int(s) for s in np.atleast_1d(sizes))
        if len(sizes) != spec.space_dim:
            raise ShapeMismatch(f"{spec.kind.value} needs {spec.space_dim} lattice sizes")
        amp = np.zeros(sizes + (spec.matrix_dim,), dtype=complex)
        return cls(amp, spec.internal_dim, spec.flavor_dim, time_index)

    @property
    def sizes(self):
        return self.amplitudes.shape[:-1]

    @property
    def space_dim(self):
        return self.amplitudes.ndim - 1

    def components(self):
        """View with separate internal and flavor axes."""
        return self.amplitudes.reshape(self.sizes + (self.internal_dim, self.flavor_dim))

    def norm(self):
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)))

    def copy(self):
        return replace(self, amplitudes=self.amplitudes.copy())

    def compatible(self, spec):
        return (self.space_dim == spec.space_dim and self.internal_dim == spec.internal_dim
                and self.flavor_dim == spec.flavor_dim)


def _check(spec, state):
    if not state.compatible(spec):
        raise ShapeMismatch(
            f"state with {state.space_dim}D sites and {state.internal_dim}x{state.flavor_dim} "
            f"components does not fit {spec.kind.value}")


def _apply_taps(taps, psi):
    """sum_t C_t psi(k + dx_t) on the periodic lattice."""
    axes = tuple(range(psi.ndim - 1))
    out = np.zeros_like(psi)
    for t in taps:
        shifted = np.roll(psi, tuple(-d for d in t.dx), axis=axes)
        out += shifted @ t.coeff.T
    return out


class Stepper:
    """One-step map of a walk scheme, with the stencil built once."""

    def __init__(self, spec):
        if not spec.is_walk:
            raise NotApplicable("use naive_two_step_evolve for the two-step scheme")
        self.spec = spec
        st = build_scheme(spec)
        self.taps = st.slice_taps(0)
        # C_t psi(n+1) + sum_0 C psi(n) = 0 with C_t = -X
        self.back = np.linalg.inv(st.time_tap())

    def __call__(self, state):
        _check(self.spec, state)
        out = -(_apply_taps(self.taps, state.amplitudes) @ self.back.T)
        return replace(state, amplitudes=out, time_index=state.time_index + 1)


def step(spec, state, previous=None):
    """Advance one time slice.  The naive scheme also needs the previous slice."""
    if spec.kind is SchemeKind.NAIVE:
        if previous is None:
            raise ShapeMismatch("the naive scheme needs the previous time slice too")
        return _naive_step(spec, previous, state)
    return Stepper(spec)(state)


def evolve(spec, state, steps, observer=None):
    stepper = Stepper(spec)
    for _ in range(steps):
        state = stepper(state)
        if observer is not None:
            observer(state)
    return state


def _naive_step(spec, prev, cur):
    _check(spec, prev)
    _check(spec, cur)
    if prev.sizes != cur.sizes:
        raise ShapeMismatch("time slices have different lattice sizes")
    psi = cur.amplitudes
    up = np.roll(psi, -1, axis=0)
    down = np.roll(psi, 1, axis=0)
    nxt = (prev.amplitudes - (up - down) @ S3.T
           - 2j * spec.epsilon * spec.mass * (psi @ S1.T))
    return replace(cur, amplitudes=nxt, time_index=cur.time_index + 1)


def naive_two_step_evolve(spec, slice0, slice1, steps):
    """Leapfrog the naive scheme; returns the slice `steps` after slice1."""
    if spec.kind is not SchemeKind.NAIVE:
        raise NotApplicable("two-step evolution is only defined for the naive scheme")
    prev, cur = slice0, slice1
    _check(spec, prev)
    _check(spec, cur)
    for _ in range(steps):
        prev, cur = cur, _naive_step(spec, prev, cur)
    return cur


# flavored states

def _flavor_grid(state):
    dim = 1 + state.space_dim
    return sublattice_partition(2 if dim == 2 else 4).flavor_grid(state.time_index, state.sizes)


def flavor_form_defect(state):
    """l2 mass sitting on a flavor other than the one its site parity prescribes."""
    if state.flavor_dim == 1:
        raise NotFlavored("state carries no flavor index")
    comp = state.components()
    allowed = _flavor_grid(state)
    mask = np.ones(comp.shape, dtype=bool)
    idx = np.indices(state.sizes)
    mask[tuple(idx) + (slice(None), allowed)] = False
    return float(np.sum(np.abs(comp[mask]) ** 2))


def conforming_state(spec, spinor_field, time_index=0):
    """Place a spinor field (sites..., internal) on the parity-prescribed flavor."""
    if not spec.flavored:
        raise NotFlavored(f"{spec.kind.value} is not flavored")
    field_ = np.asarray(spinor_field, dtype=complex)
    sizes = field_.shape[:-1]
    state = StateVector.zeros(spec, sizes, time_index)
    comp = state.components()
    allowed = _flavor_grid(state)
    idx = np.indices(sizes)
    comp[tuple(idx) + (slice(None), allowed)] = field_
    state.amplitudes = comp.reshape(state.amplitudes.shape)
    return state


def unflavored_view(state):
    """Spinor field read off the parity-prescribed flavor at every site."""
    comp = state.components()
    idx = np.indices(state.sizes)
    return comp[tuple(idx) + (slice(None), _flavor_grid(state))]


# continuum oracle

def hamiltonian_1d(p, m):
    return p * S3 + m * S1


def hamiltonian_3d(p, m):
    out = m * QW3D_MASS_GENERATOR
    for pi, g in zip(p, QW3D_GENERATORS):
        out = out + pi * g
    return out


@dataclass(frozen=True)
class ContinuumOracle:
    """Exact free Dirac flow i d_t psi = H(-i grad) psi on a periodic box."""

    mass: float
    space_dim: int = 1

    def hamiltonian(self, p):
        if self.space_dim == 1:
            return hamiltonian_1d(float(np.atleast_1d(p)[0]), self.mass)
        return hamiltonian_3d(p, self.mass)

    def _momenta(self, sizes, spacing):
        axes = [2 * np.pi * np.fft.fftfreq(n, d=spacing) for n in sizes]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    def _propagators(self, sizes, spacing, t):
        P = self._momenta(sizes, spacing)
        d = 2 if self.space_dim == 1 else 4
        if self.space_dim == 1:
            # H^2 = (p^2 + m^2) I, so exp(-iHt) = cos(wt) - i sin(wt) H / w
            p = P[..., 0]
            w = np.sqrt(p**2 + self.mass**2)
            H = p[..., None, None] * S3 + self.mass * S1
        else:
            w = np.sqrt(np.sum(P**2, axis=-1) + self.mass**2)
            H = self.mass * QW3D_MASS_GENERATOR + sum(
                P[..., i, None, None] * g for i, g in enumerate(QW3D_GENERATORS))
        wt = (w * t)[..., None, None]
        sinc = np.where(w > 0, np.sin(w * t) / np.where(w > 0, w, 1), t)[..., None, None]
        return np.cos(wt) * np.eye(d) - 1j * sinc * H

    def evolve(self, field_, spacing, t):
        """Evolve samples (sites..., d) on a grid of the given spacing for time t."""
        field_ = np.asarray(field_, dtype=complex)
        axes = tuple(range(field_.ndim - 1))
        F = np.fft.fftn(field_, axes=axes)
        U = self._propagators(field_.shape[:-1], spacing, t)
        return np.fft.ifftn(np.einsum("...ij,...j->...i", U, F), axes=axes)

    def positive_energy_spinor(self, p):
        vals, vecs = np.linalg.eigh(self.hamiltonian(p))
        v = vecs[:, -1]
        k = np.argmax(np.abs(v))
        return v * np.exp(-1j * np.angle(v[k]))


@dataclass(frozen=True)
class Packet:
    """Gaussian positive-energy packet; lengths in physical units."""

    center: tuple = (0.0,)
    width: float = 1.0
    momentum: tuple = (1.0,)
    box: float | None = None

    def box_length(self, T):
        return self.box if self.box is not None else 2 * (T + 12 * self.width)

    def sample(self, oracle, sizes, spacing, box):
        dim = len(sizes)
        center = np.broadcast_to(np.asarray(self.center, dtype=float), (dim,))
        k0 = np.broadcast_to(np.asarray(self.momentum, dtype=float), (dim,))
        axes = [np.arange(n) * spacing for n in sizes]
        X = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
        offset = X - (box / 2 + center)
        env = np.exp(-np.sum(offset**2, axis=-1) / (2 * self.width**2))
        phase = np.exp(1j * offset @ k0)
        spinor = oracle.positive_energy_spinor(k0 if dim > 1 else k0[0])
        return (env * phase)[..., None] * spinor


def bandwidth_leak(field_, spacing):
    """Spectral mass fraction outside |p_i| <= pi / (4 spacing)."""
    axes = tuple(range(field_.ndim - 1))
    F = np.fft.fftn(field_, axes=axes)
    power = np.sum(np.abs(F) ** 2, axis=-1)
    freqs = [2 * np.pi * np.fft.fftfreq(n, d=spacing) for n in field_.shape[:-1]]
    grids = np.meshgrid(*freqs, indexing="ij")
    inside = np.all([np.abs(g) <= math.pi / (4 * spacing) for g in grids], axis=0)
    total = power.sum()
    return float(power[~inside].sum() / total) if total else 0.0


def edge_mass(field_, margin=0.05):
    """Largest |psi| within the outer margin of the box, relative to the peak."""
    amp = np.sqrt(np.sum(np.abs(field_) ** 2, axis=-1))
    peak = amp.max()
    worst = 0.0
    for ax, n in enumerate(amp.shape):
        w = max(1, int(margin * n))
        sl = np.take(amp, np.r_[0:w, n - w:n], axis=ax)
        worst = max(worst, float(sl.max()))
    return worst / peak if peak else 0.0


# flavor rotation M = exp(-i pi/4 sigma_x) used by the red/blue comparison
FLAVOR_ROTATION = np.array([[1, -1j], [-1j, 1]]) / math.sqrt(2)


def rotated_flavor_fields(state):
    """Red and blue spinors after sigma_x (x) M, one pair per red site.

    Red sites at time n are those with (n + k) even; the blue partner of red
    site k is its right neighbour.  Returns (sites, red spinors, blue spinors).
    """
    if state.flavor_dim != 2 or state.space_dim != 1:
        raise NotFlavored("the rotated comparison is defined for the 1D flavored walk")
    comp = state.components()  # (k, chirality, flavor)
    N = state.sizes[0]
    n = state.time_index
    red = np.array([k for k in range(N) if (n + k) % 2 == 0])
    r = comp[red, :, 0]
    b = comp[(red + 1) % N, :, 1]
    vec = np.stack([r[:, 0], b[:, 0], r[:, 1], b[:, 1]], axis=-1)
    rot = kron(S1, FLAVOR_ROTATION)
    out = vec @ rot.T
    red_out = out[:, [0, 2]]
    blue_out = out[:, [1, 3]]
    return red, red_out, blue_out


@dataclass
class ConvergenceResult:
    epsilons: list
    errors: list
    order: float
    steps: list
    flavor_errors: dict = field(default_factory=dict)
    flavor_orders: dict = field(default_factory=dict)

    def to_dict(self):
        return {"epsilon": self.epsilons, "error": self.errors, "order": self.order,
                "steps": self.steps, "flavor_errors": self.flavor_errors,
                "flavor_orders": self.flavor_orders}


def fitted_order(eps, errors):
    eps, errors = np.asarray(eps, dtype=float), np.asarray(errors, dtype=float)
    if np.any(errors <= 0):
        return math.inf
    return float(np.polyfit(np.log(eps), np.log(errors), 1)[0])


def _single_run(spec, packet, T, eps):
    sp = spec.with_epsilon(eps)
    oracle = ContinuumOracle(sp.mass, sp.space_dim)
    box = packet.box_length(T)
    n_sites = int(round(box / eps))
    if n_sites % 2:
        n_sites += 1
    sizes = (n_sites,) * sp.space_dim
    field0 = packet.sample(oracle, sizes, eps, n_sites * eps)
    leak = bandwidth_leak(field0, eps)
    if leak > 1e-6:
        raise BandwidthViolation(f"spectral mass {leak:.2e} outside |p| <= pi/(4 eps) at eps={eps}")
    steps = int(round(T / eps))
    exact = oracle.evolve(field0, eps, steps * eps)
    if edge_mass(exact) > 1e-8 or edge_mass(field0) > 1e-8:
        raise BoundaryWrap("packet reaches the edge of the periodic box; enlarge it")
    if sp.flavored:
        state = conforming_state(sp, field0)
    else:
        state = StateVector(field0, sp.internal_dim, 1)
    final = evolve(sp, state, steps)
    if sp.kind is SchemeKind.FQW1D:
        red, r, b = rotated_flavor_fields(final)
        target = np.exp(-1j * math.pi / 4) * (exact[red] @ S1.T)
        errs = {"red": float(np.abs(r - target).max()), "blue": float(np.abs(b - target).max())}
        return max(errs.values()), steps, errs
    got = unflavored_view(final) if sp.flavored else final.amplitudes
    return float(np.abs(got - exact).max()), steps, {}


def continuum_convergence(spec, packet, T, eps_sequence):
    if not spec.is_walk:
        raise NotApplicable("convergence is measured for the one-step walks")
    eps_sequence = [float(e) for e in eps_sequence]
    errors, steps, flav = [], [], {}
    for eps in eps_sequence:
        err, n, per = _single_run(spec, packet, T, eps)
        errors.append(err)
        steps.append(n)
        for k, v in per.items():
            flav.setdefault(k, []).append(v)
    orders = {k: fitted_order(eps_sequence, v) for k, v in flav.items()}
    return ConvergenceResult(eps_sequence, errors, fitted_order(eps_sequence, errors), steps,
                             flav, orders)
