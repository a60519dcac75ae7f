"""Green's functions of the schemes on a finite (optionally twisted) periodic lattice.

G(n, k) is the inverse DFT of the inverse Fourier multiplier of the stencil, so
that applying the stencil to G gives the discrete delta.  Mode offsets shift
the grid to E_j = 2 pi (j + a) / (N_t eps), p_l = 2 pi (l + b) / (N_x eps),
which makes G twisted-periodic: G(n + N_t) = e^{-2 pi i a} G(n) and
G(k + N_x) = e^{2 pi i b} G(k).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidSpec, NotApplicable, OrderTwoUnsupported, ShapeMismatch, SingularMode
from .fourier import numerical_det, symbol_of
from .pauli import I2, S1, S3
from .schemes import SchemeKind, build_scheme

SINGULAR_TOL = 1e-12


@dataclass(frozen=True)
class GreenTable:
    spec: object
    N_t: int
    N_x: int
    time_offset: float
    space_offset: float
    values: np.ndarray  # (N_t, N_x, ..., d, d) indexed by displacement

    @property
    def space_dim(self):
        return self.values.ndim - 3

    def __call__(self, dn, *dk):
        """G at any displacement, unfolding the twisted periodicity."""
        qn, rn = divmod(int(dn), self.N_t)
        phase = np.exp(-2j * math.pi * self.time_offset * qn)
        idx = [rn]
        for d in dk:
            q, r = divmod(int(d), self.N_x)
            phase *= np.exp(2j * math.pi * self.space_offset * q)
            idx.append(r)
        return phase * self.values[tuple(idx)]

    def rows(self):
        """(dn, dk..., row, col, re, im) tuples in index order."""
        it = np.ndindex(self.values.shape)
        for ix in it:
            z = self.values[ix]
            yield ix + (float(z.real), float(z.imag))


def _mode_grid(spec, N_t, N_x, a, b):
    eps = spec.epsilon
    E = 2 * math.pi * (np.arange(N_t) + a) / (N_t * eps)
    ps = [2 * math.pi * (np.arange(N_x) + b) / (N_x * eps)] * spec.space_dim
    grids = np.meshgrid(E, *ps, indexing="ij")
    return grids[0], np.stack(grids[1:], axis=-1)


def mode_determinants(spec, N_t, N_x, time_offset=0.0, space_offset=0.0):
    E, p = _mode_grid(spec, N_t, N_x, time_offset, space_offset)
    return numerical_det(symbol_of(spec)(E, p))


def _inverse(mats):
    if mats.shape[-1] == 2:
        det = numerical_det(mats)
        adj = np.empty_like(mats)
        adj[..., 0, 0] = mats[..., 1, 1]
        adj[..., 1, 1] = mats[..., 0, 0]
        adj[..., 0, 1] = -mats[..., 0, 1]
        adj[..., 1, 0] = -mats[..., 1, 0]
        return adj / det[..., None, None]
    return np.linalg.inv(mats)


def green_function(spec, N_t, N_x, time_offset=0.0, space_offset=0.0):
    if N_t < 4 or N_x < 4:
        raise InvalidSpec("lattice sizes must be at least 4")
    sym = symbol_of(spec)
    E, p = _mode_grid(spec, N_t, N_x, time_offset, space_offset)
    S = sym(E, p)
    det = numerical_det(S)
    bad = np.abs(det) < SINGULAR_TOL
    if bad.any():
        mode = np.argwhere(bad)[0]
        raise SingularMode(mode, det[tuple(mode)])
    # the stencil multiplies plane waves by stencil_scale * symbol
    Ginv = _inverse(S) / sym.stencil_scale
    dim = spec.space_dim
    axes_x = tuple(range(1, 1 + dim))
    # sum_j e^{-i E_j n eps} and sum_l e^{+i p_l k eps}
    vals = np.fft.fft(Ginv, axis=0) / N_t
    vals = np.fft.ifftn(vals, axes=axes_x)
    n = np.arange(N_t).reshape((N_t,) + (1,) * (dim + 2))
    twist = np.exp(-2j * math.pi * time_offset * n / N_t)
    for ax in range(dim):
        shape = [1] * (dim + 3)
        shape[1 + ax] = N_x
        k = np.arange(N_x).reshape(shape)
        twist = twist * np.exp(2j * math.pi * space_offset * k / N_x)
    return GreenTable(spec, N_t, N_x, float(time_offset), float(space_offset), vals * twist)


def _twisted_roll(arr, shift, axis, size, boundary_phase):
    """arr[i + shift] with arr[i + size] = boundary_phase * arr[i]."""
    out = np.roll(arr, -shift, axis=axis)
    idx = np.arange(size) + shift
    wraps = np.floor_divide(idx, size)
    shape = [1] * arr.ndim
    shape[axis] = size
    return out * (boundary_phase ** wraps).reshape(shape)


def apply_stencil(spec, table):
    """(M G)(n, k) = sum_taps C G(n + dt, k + dx), honouring the twist."""
    st = build_scheme(spec)
    G = table.values
    tphase = np.exp(-2j * math.pi * table.time_offset)
    xphase = np.exp(2j * math.pi * table.space_offset)
    out = np.zeros_like(G)
    for t in st.taps:
        moved = _twisted_roll(G, t.dt, 0, table.N_t, tphase)
        for ax, d in enumerate(t.dx):
            if d:
                moved = _twisted_roll(moved, d, 1 + ax, table.N_x, xphase)
        out += np.einsum("ij,...jk->...ik", t.coeff, moved)
    return out


def defining_identity_deviation(table):
    """max |(M G) - delta I| over the whole table."""
    MG = apply_stencil(table.spec, table)
    target = np.zeros_like(MG)
    origin = (0,) * (1 + table.space_dim)
    target[origin] = np.eye(MG.shape[-1])
    return float(np.abs(MG - target).max())


def naive_green_symbol(spec, E, p):
    """eps [I sin(E eps) + sigma_3 sin(p eps) + m eps sigma_1] / det D_B."""
    if spec.kind is not SchemeKind.NAIVE:
        raise NotApplicable("the explicit 2x2 formula is for the naive scheme")
    eps, m = spec.epsilon, spec.mass
    E = np.asarray(E, dtype=float)
    p = np.asarray(p, dtype=float)
    se, sp = np.sin(E * eps), np.sin(p * eps)
    det = se**2 - sp**2 - (m * eps) ** 2
    num = se[..., None, None] * I2 + sp[..., None, None] * S3 + m * eps * S1
    return eps * num / det[..., None, None]


def cramer_deviation(spec, N_t, N_x, time_offset=0.0, space_offset=0.0):
    """Explicit 2x2 formula against the inverse of the stencil multiplier on the mode grid."""
    E, p = _mode_grid(spec, N_t, N_x, time_offset, space_offset)
    st = build_scheme(spec)
    inv = np.linalg.inv(st.symbol(E, p, spec.epsilon))
    explicit = naive_green_symbol(spec, E, p[..., 0])
    return float(np.abs(inv - explicit).max())


def _slice_hat(green, n):
    """Spatial DFT of G(n, .) with the time twist unfolded."""
    q, r = divmod(n, green.N_t)
    g = np.exp(-2j * math.pi * green.time_offset * q) * green.values[r]
    return np.fft.fftn(g, axes=tuple(range(green.space_dim)))


def propagate_with_green(green, initial, steps):
    """psi(steps) from psi(0) through G alone.

    For a one-step walk G(n + 1) = V G(n) for n != 0 (mod N_t), with V the
    one-step map, so V^s = G(s + 1) G(1)^{-1} as spatial convolutions.
    """
    spec = green.spec
    if not spec.is_walk:
        raise OrderTwoUnsupported("the two-step naive scheme needs two initial slices")
    if not 0 <= steps < green.N_t:
        raise ValueError(f"steps must lie in [0, {green.N_t - 1}] for this table")
    if initial.sizes != (green.N_x,) * spec.space_dim or not initial.compatible(spec):
        raise ShapeMismatch("initial state does not match the Green's table")
    if green.space_offset:
        raise NotApplicable("propagation needs a spatially periodic table")
    if steps == 0:
        return initial.copy()
    axes = tuple(range(spec.space_dim))
    K = _slice_hat(green, steps + 1) @ np.linalg.inv(_slice_hat(green, 1))
    psi_hat = np.fft.fftn(initial.amplitudes, axes=axes)
    out = np.fft.ifftn(np.einsum("...ij,...j->...i", K, psi_hat), axes=axes)
    return replace(initial, amplitudes=out, time_index=initial.time_index + steps)
