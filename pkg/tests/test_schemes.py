import itertools
import json
import math

import numpy as np
import pytest
from scipy.linalg import expm

from latticefd.errors import InvalidSpec, NotApplicable
from latticefd.schemes import (SchemeKind as K, SchemeSpec, anti_hermitian_reduction, build_scheme,
                               difference_matrix, evolution_unitary_check, hermiticity_test,
                               same_taps, walk_unitary)
from latticefd.fourier import symbol_of

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
I2 = np.eye(2)


def test_spec_validation():
    with pytest.raises(InvalidSpec):
        SchemeSpec(K.QW1D, -1.0, 0.1)
    with pytest.raises(InvalidSpec):
        SchemeSpec(K.QW1D, 1.0, 0.0)
    with pytest.raises(InvalidSpec):
        SchemeSpec(K.QW1D, 40.0, 0.1)  # m eps > pi
    with pytest.raises(InvalidSpec):
        SchemeSpec("Wilson", 1.0, 0.1)
    with pytest.raises(InvalidSpec):
        SchemeSpec.from_dict({"kind": "DiracQW1D", "mass": 1.0})


def test_spec_json_round_trip():
    spec = SchemeSpec(K.FQW3D, 1.25, 0.05)
    assert SchemeSpec.from_json(json.dumps(spec.to_dict())) == spec
    assert spec.matrix_dim == 32 and spec.flavored and spec.space_dim == 3


def test_qw1d_direct_taps():
    m, eps = 0.5, 0.1
    c, s = math.cos(m * eps), math.sin(m * eps)
    taps = {(t.dt, t.dx): t.coeff for t in build_scheme(SchemeSpec(K.QW1D, m, eps)).taps}
    assert set(taps) == {(0, (-1,)), (0, (1,)), (0, (0,)), (1, (0,))}
    assert np.allclose(taps[(0, (-1,))], [[c, 0], [0, 0]])
    assert np.allclose(taps[(0, (1,))], [[0, 0], [0, c]])
    assert np.allclose(taps[(0, (0,))], -1j * s * SX)
    assert np.allclose(taps[(1, (0,))], -I2)


@pytest.mark.parametrize("kind", list(K))
def test_stencil_multiplier_matches_symbol(kind):
    spec = SchemeSpec(kind, 0.7, 0.1)
    rng = np.random.default_rng(3)
    E = rng.uniform(-30, 30, 20)
    p = rng.uniform(-30, 30, (20, spec.space_dim))
    sym = symbol_of(spec)
    direct = build_scheme(spec).symbol(E, p, spec.epsilon)
    assert np.abs(direct - sym.stencil_scale * sym(E, p)).max() < 1e-12


@pytest.mark.parametrize("kind,m,eps", [(K.QW1D, 0.5, 0.1), (K.FQW1D, 0.5, 0.1),
                                        (K.QW3D, 1.0, 0.05), (K.FQW3D, 1.0, 0.05)])
def test_walks_are_unitary(kind, m, eps):
    assert evolution_unitary_check(SchemeSpec(kind, m, eps)) <= 1e-12


def test_naive_has_no_one_step_unitary():
    with pytest.raises(NotApplicable):
        walk_unitary(SchemeSpec(K.NAIVE, 1.0, 0.1), [0.3])


def _qw3d_expm(p, m, eps):
    U = expm(-1j * m * eps * np.kron(SY, I2))
    for pi, s in zip(p, (SX, SY, SZ)):
        U = U @ expm(-1j * pi * eps * np.kron(SZ, s))
    return U


def test_qw3d_unitary_matches_substep_exponentials():
    spec = SchemeSpec(K.QW3D, 0.9, 0.1)
    rng = np.random.default_rng(5)
    for p in rng.uniform(-31, 31, (20, 3)):
        assert np.abs(walk_unitary(spec, p) - _qw3d_expm(p, 0.9, 0.1)).max() < 1e-12


def test_fqw3d_unitary_decomposes_over_flavor_sectors():
    # every flavor flip X_a is diagonal in the joint eigenbasis; on the sector with
    # eigenvalues chi the flavored walk is (chi_x chi_y chi_z) times the plain one
    spec = SchemeSpec(K.FQW3D, 0.9, 0.1)
    H = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    Hf = np.kron(np.kron(H, H), H)
    rng = np.random.default_rng(6)
    for p in rng.uniform(-31, 31, (5, 3)):
        Uf = walk_unitary(spec, p)
        U = _qw3d_expm(p, 0.9, 0.1)
        expect = np.zeros((32, 32), dtype=complex)
        for idx, chi in enumerate(itertools.product((1, -1), repeat=3)):
            proj = np.outer(Hf[:, idx], Hf[:, idx])
            expect += np.prod(chi) * np.kron(U, proj)
        assert np.abs(Uf - expect).max() < 1e-12


@pytest.mark.parametrize("kind", [K.QW3D, K.FQW3D])
def test_3d_walk_locality(kind):
    st = build_scheme(SchemeSpec(kind, 1.0, 0.1))
    assert 1 <= st.spatial_range() <= 3


def test_hermiticity_of_lattice_derivatives():
    for N in (4, 16, 64):
        assert hermiticity_test("symmetric", N=N, epsilon=0.1) == 0.0
        assert hermiticity_test("symmetric", axis="time", N=N) == 0.0
        assert hermiticity_test("forward", N=N, epsilon=0.1) >= 1 / 0.1
    A = difference_matrix("forward", 8, 0.5)
    # off-diagonal mismatch is 1/eps, the diagonal one 2/eps
    assert abs((A - A.conj().T)[0, 1]) == pytest.approx(2.0)
    assert abs((A - A.conj().T)[0, 0]) == pytest.approx(4.0)
    with pytest.raises(InvalidSpec):
        difference_matrix("central", 8)
    with pytest.raises(InvalidSpec):
        difference_matrix("forward", 3)


def test_anti_hermitian_reduction_massless_is_naive():
    red = anti_hermitian_reduction(SchemeSpec(K.QW1D, 0.0, 0.1))
    assert same_taps(red, build_scheme(SchemeSpec(K.NAIVE, 0.0, 0.1)))


def test_anti_hermitian_reduction_massive_coefficients():
    m, eps = 0.3, 0.1
    red = anti_hermitian_reduction(SchemeSpec(K.QW1D, m, eps))
    taps = {(t.dt, t.dx): t.coeff for t in red.taps}
    assert np.allclose(taps[(0, (0,))], -math.sin(m * eps) / eps * SX, atol=1e-15)
    assert np.allclose(np.abs(taps[(0, (1,))]).max(), math.cos(m * eps) / (2 * eps))
    assert np.allclose(taps[(1, (0,))], 1j / (2 * eps) * I2)
    # m -> 0 limit of the mass tap is the naive -m sigma_1
    assert np.allclose(math.sin(m * eps) / eps, m, rtol=1e-3)


def test_anti_hermitian_reduction_rejects_other_kinds():
    with pytest.raises(NotApplicable):
        anti_hermitian_reduction(SchemeSpec(K.FQW1D, 0.3, 0.1))


def test_adjoint_is_involution():
    st = build_scheme(SchemeSpec(K.QW3D, 0.4, 0.1))
    assert same_taps(st.adjoint().adjoint(), st)
