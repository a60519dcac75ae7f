import math

import numpy as np
import pytest

from latticefd import greens
from latticefd.errors import NotApplicable, OrderTwoUnsupported, ShapeMismatch, SingularMode
from latticefd.evolve import StateVector, evolve
from latticefd.schemes import SchemeKind as K, SchemeSpec, build_scheme


def dense_green_column(spec, N_t, N_x, a):
    """Solve M G = delta on the twisted 1D lattice by dense linear algebra."""
    d = spec.matrix_dim
    size = N_t * N_x * d
    M = np.zeros((size, size), dtype=complex)
    for n in range(N_t):
        for k in range(N_x):
            row = (n * N_x + k) * d
            for t in build_scheme(spec).taps:
                q, nn = divmod(n + t.dt, N_t)
                col = (nn * N_x + (k + t.dx[0]) % N_x) * d
                M[row:row + d, col:col + d] += np.exp(-2j * math.pi * a * q) * t.coeff
    rhs = np.zeros((size, d), dtype=complex)
    rhs[:d] = np.eye(d)
    return np.linalg.solve(M, rhs).reshape(N_t, N_x, d, d)


@pytest.mark.parametrize("kind,a", [(K.NAIVE, 0.0), (K.QW1D, 0.5), (K.FQW1D, 0.5)])
def test_green_matches_dense_inverse(kind, a):
    spec = SchemeSpec(kind, 0.6, 0.2)
    table = greens.green_function(spec, 8, 8, time_offset=a)
    assert np.abs(table.values - dense_green_column(spec, 8, 8, a)).max() < 1e-11


@pytest.mark.parametrize("kind,a", [(K.NAIVE, 0.0), (K.QW1D, 0.5), (K.FQW1D, 0.5), (K.QW3D, 0.5)])
def test_defining_identity(kind, a):
    spec = SchemeSpec(kind, 0.6, 0.2)
    n = 6 if spec.space_dim == 3 else 16
    table = greens.green_function(spec, n, n, time_offset=a)
    assert greens.defining_identity_deviation(table) <= 1e-10


def test_singular_mode_is_reported():
    # QW1D on 16x16: cos(E eps) = cos(m eps) cos(p eps) has no solution but the
    # massless light cone lands exactly on the untwisted grid
    with pytest.raises(SingularMode):
        greens.green_function(SchemeSpec(K.QW1D, 0.0, 0.2), 16, 16)


def test_periodic_and_twisted_images():
    spec = SchemeSpec(K.QW1D, 0.6, 0.2)
    table = greens.green_function(spec, 8, 8, time_offset=0.5)
    assert np.allclose(table(3, 2 + 8), table(3, 2))
    assert np.allclose(table(3 + 8, 2), -table(3, 2))
    assert np.allclose(table(-1, -1), -table.values[7, 7])


def test_space_twist():
    spec = SchemeSpec(K.NAIVE, 0.6, 0.2)
    table = greens.green_function(spec, 8, 8, space_offset=0.25)
    assert np.allclose(table(1, 3 + 8), 1j * table(1, 3))
    assert greens.defining_identity_deviation(table) <= 1e-10


def test_cramer_inverse():
    assert greens.cramer_deviation(SchemeSpec(K.NAIVE, 0.7, 0.2), 16, 16) <= 1e-12


def test_rows_cover_table():
    table = greens.green_function(SchemeSpec(K.NAIVE, 0.7, 0.2), 4, 4)
    rows = list(table.rows())
    assert len(rows) == 4 * 4 * 2 * 2 and len(rows[0]) == 6


def _delta(spec, N, k0, comp):
    s = StateVector.zeros(spec, (N,))
    c = s.components()
    c[k0, comp] = 1.0
    s.amplitudes = c.reshape(s.amplitudes.shape)
    return s


def test_massless_delta_moves_right():
    spec = SchemeSpec(K.QW1D, 0.0, 0.1)
    # a quarter twist keeps every mode off the massless light cone
    table = greens.green_function(spec, 16, 32, time_offset=0.25)
    out = greens.propagate_with_green(table, _delta(spec, 32, 10, 0), 5)
    comp = out.components()
    assert abs(comp[15, 0] - 1) < 1e-12
    assert np.abs(comp).sum() - 1 < 1e-10
    assert out.time_index == 5


def test_propagation_matches_stepping():
    spec = SchemeSpec(K.QW1D, 0.5, 0.1)
    table = greens.green_function(spec, 16, 32, time_offset=0.5)
    rng = np.random.default_rng(2)
    k = np.arange(32)
    prof = np.exp(-((k - 16) / 3.0) ** 2)[:, None] * (rng.normal(size=(32, 2)) + 1j)
    init = StateVector(prof, 2)
    assert np.abs(greens.propagate_with_green(table, init, 8).amplitudes
                  - evolve(spec, init, 8).amplitudes).max() < 1e-10


def test_propagation_edge_cases():
    spec = SchemeSpec(K.QW1D, 0.5, 0.1)
    table = greens.green_function(spec, 8, 16, time_offset=0.5)
    init = _delta(spec, 16, 3, 1)
    assert np.array_equal(greens.propagate_with_green(table, init, 0).amplitudes, init.amplitudes)
    with pytest.raises(ValueError):
        greens.propagate_with_green(table, init, 8)
    with pytest.raises(ShapeMismatch):
        greens.propagate_with_green(table, _delta(spec, 12, 3, 1), 2)
    naive = greens.green_function(SchemeSpec(K.NAIVE, 0.5, 0.1), 8, 16)
    with pytest.raises(OrderTwoUnsupported):
        greens.propagate_with_green(naive, init, 2)
    twisted = greens.green_function(spec, 8, 16, time_offset=0.5, space_offset=0.5)
    with pytest.raises(NotApplicable):
        greens.propagate_with_green(twisted, init, 2)
