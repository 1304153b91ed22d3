import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import expm

from cavityteleport import model
from cavityteleport.exceptions import ConfigError, DimMismatchError
from cavityteleport.model import FockTruncation, SystemParams
from conftest import random_density


def test_single_atom_conventions():
    np.testing.assert_array_equal(model.LOWER @ model.KET_E, model.KET_G)
    np.testing.assert_array_equal(model.LOWER @ model.KET_G, 0)
    np.testing.assert_array_equal(model.SIGMA_Z @ model.KET_E, model.KET_E)
    comm = model.RAISE @ model.LOWER - model.LOWER @ model.RAISE
    np.testing.assert_array_equal(comm, model.SIGMA_Z)


def test_two_atom_basis_order():
    for i, label in enumerate(model.BASIS_LABELS):
        assert model.basis_ket(label)[i] == 1
    s1 = model.atom_operator(1, "lower")
    s2 = model.atom_operator(2, "lower")
    np.testing.assert_array_equal(s1 @ model.basis_ket("eg"), model.basis_ket("gg"))
    np.testing.assert_array_equal(s2 @ model.basis_ket("ge"), model.basis_ket("gg"))
    np.testing.assert_array_equal(s1 @ model.basis_ket("ee"), model.basis_ket("ge"))
    with pytest.raises(ValueError):
        model.basis_ket("xx")
    with pytest.raises(ValueError):
        model.atom_operator(3, "lower")


def test_effective_hamiltonian_elements():
    p = SystemParams(lam=1.0, delta=4.0)
    h = model.effective_hamiltonian(p)
    om = 0.25
    assert p.omega_eff == om
    expected = om * np.array([[2, 0, 0, 0], [0, 1, 1, 0], [0, 1, 1, 0], [0, 0, 0, 0]])
    np.testing.assert_allclose(h, expected, atol=1e-15)
    n = model.excitation_number()
    np.testing.assert_allclose(h @ n - n @ h, 0, atol=1e-15)


def test_effective_dynamics_exchanges_excitation():
    p = SystemParams.from_omega(1.0)
    t = np.pi / 4
    ket = expm(-1j * model.effective_hamiltonian(p) * t) @ model.basis_ket("eg")
    ref = np.exp(-1j * t) * (np.cos(t) * model.basis_ket("eg") - 1j * np.sin(t) * model.basis_ket("ge"))
    np.testing.assert_allclose(ket, ref, atol=1e-14)


@given(t=st.floats(0, 50), n_max=st.integers(1, 4))
def test_full_hamiltonian_hermitian_and_conserving(t, n_max):
    p = SystemParams(lam=1.0, delta=10.0)
    trunc = FockTruncation(n_max)
    h = model.full_hamiltonian(p, t, trunc)
    assert h.shape == (4 * trunc.dim, 4 * trunc.dim)
    np.testing.assert_allclose(h, h.conj().T, atol=1e-14)
    n = model.full_excitation_number(trunc)
    np.testing.assert_allclose(h @ n - n @ h, 0, atol=1e-12)


def test_full_hamiltonian_couples_to_one_photon():
    p = SystemParams(lam=0.5, delta=3.0)
    trunc = FockTruncation(2)
    h = model.full_hamiltonian(p, 0.0, trunc)
    eg0 = np.kron(model.basis_ket("eg"), np.eye(3)[0])
    gg1 = np.kron(model.basis_ket("gg"), np.eye(3)[1])
    assert gg1.conj() @ h @ eg0 == pytest.approx(0.5)


def test_annihilation_number_operator():
    a = model.annihilation(3)
    np.testing.assert_allclose(np.diag(a.conj().T @ a).real, [0, 1, 2, 3])


@given(seed=st.integers(0, 2**32 - 1), gamma=st.floats(0, 2), field=st.sampled_from([None, 2, 3]))
def test_liouvillian_matches_rhs(seed, gamma, field):
    rng = np.random.default_rng(seed)
    dim = 4 if field is None else 4 * field
    rho = random_density(rng, dim)
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    h = a + a.conj().T
    jumps = model.atom_jumps(field)
    direct = model.lindblad_rhs(rho, h, gamma, jumps)
    sup = model.liouvillian(h, gamma, jumps)
    np.testing.assert_allclose(sup @ rho.ravel(), direct.ravel(), atol=1e-11)
    assert abs(np.trace(direct)) < 1e-12
    np.testing.assert_allclose(direct, direct.conj().T, atol=1e-12)


def test_decay_rate_convention():
    gamma = 0.3
    rho = model.projector("eg")
    d = model.lindblad_rhs(rho, np.zeros((4, 4)), gamma, model.atom_jumps())
    assert d[1, 1].real == pytest.approx(-2 * gamma)
    assert d[3, 3].real == pytest.approx(2 * gamma)


def test_shape_mismatch():
    with pytest.raises(DimMismatchError):
        model.lindblad_rhs(np.eye(4) / 4, np.eye(2), 0.0, [])


@pytest.mark.parametrize("kwargs", [dict(lam=0, delta=1), dict(lam=1, delta=-1),
                                    dict(lam=1, delta=1, gamma=-0.1), dict(lam=np.nan, delta=1)])
def test_params_validation(kwargs):
    with pytest.raises(ConfigError):
        SystemParams(**kwargs)


def test_from_omega():
    p = SystemParams.from_omega(2.0, 0.1, delta_over_lambda=5.0)
    assert p.omega_eff == pytest.approx(2.0)
    assert p.delta / p.lam == pytest.approx(5.0)
    assert p.gamma == 0.1
    with pytest.raises(ConfigError):
        FockTruncation(0)
