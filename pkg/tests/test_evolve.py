import math

import numpy as np
import pytest

from latticefd.errors import (BandwidthViolation, BoundaryWrap, NotApplicable, NotFlavored,
                              ShapeMismatch)
from latticefd.evolve import (ContinuumOracle, Packet, StateVector, Stepper, conforming_state,
                              continuum_convergence, evolve, flavor_form_defect,
                              naive_two_step_evolve, step, unflavored_view)
from latticefd.schemes import SchemeKind as K, SchemeSpec

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)


def _random_field(rng, shape):
    f = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    return f / np.linalg.norm(f)


def test_massless_qw1d_is_translation():
    spec = SchemeSpec(K.QW1D, 0.0, 0.1)
    f = _random_field(np.random.default_rng(0), (40, 2))
    out = evolve(spec, StateVector(f, 2), 7).amplitudes
    assert np.array_equal(out[:, 0], np.roll(f[:, 0], 7))
    assert np.array_equal(out[:, 1], np.roll(f[:, 1], -7))


@pytest.mark.parametrize("kind,sizes", [(K.QW1D, (50,)), (K.FQW1D, (50,)),
                                        (K.QW3D, (5, 5, 5)), (K.FQW3D, (4, 4, 4))])
def test_norm_is_preserved(kind, sizes):
    spec = SchemeSpec(kind, 0.8, 0.1)
    rng = np.random.default_rng(1)
    f = _random_field(rng, sizes + (spec.internal_dim,))
    state = conforming_state(spec, f) if spec.flavored else StateVector(f, spec.internal_dim)
    out = evolve(spec, state, 40)
    assert abs(out.norm() - 1) < 1e-12
    assert out.time_index == 40


def test_zero_state_stays_zero():
    spec = SchemeSpec(K.QW3D, 0.8, 0.1)
    out = evolve(spec, StateVector.zeros(spec, (4, 4, 4)), 3)
    assert not out.amplitudes.any()


def test_qw3d_delta_support():
    spec = SchemeSpec(K.QW3D, 0.8, 0.1)
    s = StateVector.zeros(spec, (9, 9, 9))
    s.amplitudes[4, 4, 4, 2] = 1
    out = np.abs(step(spec, s).amplitudes).sum(axis=-1)
    idx = np.argwhere(out > 0)
    assert np.abs(idx - 4).max() <= 3


@pytest.mark.parametrize("kind,plain,sizes", [(K.FQW1D, K.QW1D, (24,)), (K.FQW3D, K.QW3D, (6, 6, 6))])
def test_flavored_form_is_preserved_and_matches_plain_walk(kind, plain, sizes):
    spec = SchemeSpec(kind, 0.7, 0.1)
    rng = np.random.default_rng(2)
    f = _random_field(rng, sizes + (spec.internal_dim,))
    state = conforming_state(spec, f)
    for _ in range(20):
        state = Stepper(spec)(state)
        assert flavor_form_defect(state) <= 1e-12
    plain_out = evolve(SchemeSpec(plain, 0.7, 0.1), StateVector(f, spec.internal_dim), 20)
    assert np.abs(unflavored_view(state) - plain_out.amplitudes).max() < 1e-12


def test_corrupted_flavor_is_detected():
    spec = SchemeSpec(K.FQW1D, 0.7, 0.1)
    state = conforming_state(spec, np.zeros((8, 2)))
    # site 0 at time 0 is red, so a unit amplitude on the blue flavor is all defect
    state.amplitudes[0, 1] = 1.0
    assert flavor_form_defect(state) == pytest.approx(1.0)
    with pytest.raises(NotFlavored):
        flavor_form_defect(StateVector(np.zeros((8, 2)), 2))
    with pytest.raises(NotFlavored):
        conforming_state(SchemeSpec(K.QW1D, 0.7, 0.1), np.zeros((8, 2)))


def test_shape_errors():
    spec = SchemeSpec(K.QW1D, 0.7, 0.1)
    with pytest.raises(ShapeMismatch):
        Stepper(spec)(StateVector(np.zeros((4, 4, 4, 4)), 4))
    with pytest.raises(ShapeMismatch):
        StateVector.zeros(spec, (4, 4))
    naive = SchemeSpec(K.NAIVE, 0.7, 0.1)
    with pytest.raises(ShapeMismatch):
        step(naive, StateVector.zeros(naive, (8,)))
    with pytest.raises(NotApplicable):
        Stepper(naive)
    with pytest.raises(NotApplicable):
        naive_two_step_evolve(spec, StateVector.zeros(spec, (8,)), StateVector.zeros(spec, (8,)), 1)


def _naive_plane_wave(m, eps, N, l, n, positive=True):
    """Exact plane-wave solution of the naive scheme and its energy."""
    p = 2 * math.pi * l / (N * eps)
    sp = math.sin(p * eps)
    sE = math.sqrt(sp**2 + (m * eps) ** 2)
    E = math.asin(sE) / eps if positive else (math.pi - math.asin(sE)) / eps
    v = np.array([m * eps, sE - sp]) if m else np.array([0.0, 1.0]) if sp > 0 else np.array([1.0, 0.0])
    k = np.arange(N)
    amp = np.exp(-1j * E * n * eps + 1j * p * k * eps)[:, None] * v
    return StateVector(amp, 2, time_index=n), E


def test_naive_plane_wave_follows_lattice_dispersion():
    m, eps, N = 0.9, 0.1, 64
    spec = SchemeSpec(K.NAIVE, m, eps)
    s0, E = _naive_plane_wave(m, eps, N, 3, 0)
    s1, _ = _naive_plane_wave(m, eps, N, 3, 1)
    out = naive_two_step_evolve(spec, s0, s1, 10)
    want, _ = _naive_plane_wave(m, eps, N, 3, 11)
    assert np.abs(out.amplitudes - want.amplitudes).max() < 1e-12


def test_naive_doubler_mode_propagates():
    # p' = pi/eps - p has the same sin(p eps), hence the same lattice energy:
    # the high-frequency mode is a genuine solution, not a damped artefact
    m, eps, N = 0.9, 0.1, 64
    spec = SchemeSpec(K.NAIVE, m, eps)
    lo = [_naive_plane_wave(m, eps, N, 3, n) for n in (0, 1, 11)]
    hi = [_naive_plane_wave(m, eps, N, N // 2 - 3, n) for n in (0, 1, 11)]
    assert lo[0][1] == pytest.approx(hi[0][1])
    out = naive_two_step_evolve(spec, hi[0][0], hi[1][0], 10)
    assert np.abs(out.amplitudes - hi[2][0].amplitudes).max() < 1e-12
    assert out.norm() == pytest.approx(hi[0][0].norm(), rel=1e-12)


def test_continuum_oracle_matches_matrix_exponential():
    from scipy.linalg import expm
    oracle = ContinuumOracle(0.7, 1)
    N, h, t = 32, 0.2, 1.3
    f = _random_field(np.random.default_rng(4), (N, 2))
    out = oracle.evolve(f, h, t)
    F = np.fft.fft(f, axis=0)
    p = 2 * np.pi * np.fft.fftfreq(N, d=h)
    G = np.stack([expm(-1j * t * (pi * SZ + 0.7 * SX)) @ F[j] for j, pi in enumerate(p)])
    assert np.abs(out - np.fft.ifft(G, axis=0)).max() < 1e-12


@pytest.mark.parametrize("kind", [K.QW1D, K.FQW1D])
def test_convergence_order_1d(kind):
    res = continuum_convergence(SchemeSpec(kind, 0.5, 0.1), Packet(), 2.0, [0.1, 0.05, 0.025])
    assert res.order >= 0.9
    assert all(v >= 0.9 for v in res.flavor_orders.values())
    assert res.steps == [20, 40, 80]


def test_massless_walk_is_exact():
    res = continuum_convergence(SchemeSpec(K.QW1D, 0.0, 0.1), Packet(), 2.0, [0.1, 0.05])
    assert max(res.errors) <= 1e-12


def test_narrow_packet_violates_bandwidth():
    with pytest.raises(BandwidthViolation):
        continuum_convergence(SchemeSpec(K.QW1D, 0.5, 0.1), Packet(width=0.05), 1.0, [0.1, 0.05])


def test_small_box_wraps():
    with pytest.raises(BoundaryWrap):
        continuum_convergence(SchemeSpec(K.QW1D, 0.5, 0.1), Packet(box=6.0), 2.0, [0.1, 0.05])


def test_naive_has_no_convergence_run():
    with pytest.raises(NotApplicable):
        continuum_convergence(SchemeSpec(K.NAIVE, 0.5, 0.1), Packet(), 1.0, [0.1, 0.05])
