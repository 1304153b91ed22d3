"""
Closed-form lossy dynamics of the dispersive two-atom system.

The master equation is solved in a rotated frame. ``transform_u`` mixes
|eg> and |ge> by a quarter turn and so diagonalizes the exchange coupling;
``transform_v`` is the diagonal phase frame that removes what is left of the
Hamiltonian. In that frame only spontaneous emission acts, and the state is
known in closed form (:func:`rho_tilde`).

Only initial states with at most one excitation are handled, starting from
|eg><eg|.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import qmat
from .exceptions import NegativeTimeError
from .model import SystemParams, atom_operator, basis_ket, projector

_EG, _GE, _GG = basis_ket("eg"), basis_ket("ge"), basis_ket("gg")

EPR_KET = (_EG - 1j * _GE) / np.sqrt(2.0)
EPR_STATE = np.outer(EPR_KET, EPR_KET.conj())

# excitation count of each two-atom basis state (ee, eg, ge, gg)
_EXCITATIONS = np.array([2.0, 1.0, 1.0, 0.0])
# eigenvalues of (sigma_1^dag sigma_1 + sigma_1^z / 2) on the same basis
_V_GENERATOR = np.array([1.5, 1.5, -0.5, -0.5])


def _check_time(t):
    if not np.isfinite(t) or t < 0:
        raise NegativeTimeError(f"time must be finite and >= 0, got {t}")


def interaction_time(k: int, omega: float) -> float:
    """``(2k + 1) pi / (4 omega)``: the k-th time the ideal dynamics makes an EPR pair."""
    if int(k) != k or k < 0:
        raise ValueError(f"k must be a nonnegative integer, got {k}")
    if omega <= 0:
        raise ValueError("omega must be positive")
    return (2 * k + 1) * np.pi / (4.0 * omega)


def exchange_generator() -> np.ndarray:
    """``sigma_1^dag sigma_2 - sigma_1 sigma_2^dag``."""
    s1, s2 = atom_operator(1, "lower"), atom_operator(2, "lower")
    return qmat.dag(s1) @ s2 - s1 @ qmat.dag(s2)


def transform_u() -> np.ndarray:
    """``exp[-(pi/4) G]`` with G the exchange generator.

    G squares to minus the projector onto span{|eg>, |ge>}, so the
    exponential is evaluated exactly as a plane rotation there.
    """
    g = exchange_generator()
    p = projector("eg") + projector("ge")
    theta = -np.pi / 4.0
    return (np.eye(4) - p) + np.cos(theta) * p + np.sin(theta) * g


def transform_v(t: float, omega: float) -> np.ndarray:
    """``exp[i omega (sigma_1^dag sigma_1 + sigma_1^z / 2) t]`` (diagonal)."""
    return np.diag(np.exp(1j * omega * t * _V_GENERATOR))


def frame_transform(t: float, omega: float) -> np.ndarray:
    """Unitary ``T`` with ``rho = T rho_tilde T^dag``.

    The phase frame enters conjugated, ``T = U V(t)^dag``; with ``T = U V(t)``
    the rotating-frame state would follow the time-reversed coherent
    dynamics.
    """
    return transform_u() @ qmat.dag(transform_v(t, omega))


# -- superoperators in the rotated frame ------------------------------------

def jump_superop(rho) -> np.ndarray:
    """``J rho = sum_i sigma_i rho sigma_i^dag``."""
    r = np.asarray(rho, dtype=complex)
    out = np.zeros_like(r)
    for i in (1, 2):
        s = atom_operator(i, "lower")
        out += s @ r @ qmat.dag(s)
    return out


def decay_superop(rho) -> np.ndarray:
    """``L rho = -1/2 {n_1 + n_2, rho}``."""
    r = np.asarray(rho, dtype=complex)
    return -0.5 * (_EXCITATIONS[:, None] + _EXCITATIONS[None, :]) * r


def exp_decay_superop(x: float, rho) -> np.ndarray:
    """``exp(x L) rho``; L is diagonal on matrix units, so this is exact."""
    r = np.asarray(rho, dtype=complex)
    return np.exp(-0.5 * x * (_EXCITATIONS[:, None] + _EXCITATIONS[None, :])) * r


def exp_jump_superop(x: float, rho) -> np.ndarray:
    """``exp(x J) rho`` as a finite series (J cubed vanishes on two atoms)."""
    r = np.asarray(rho, dtype=complex)
    j1 = jump_superop(r)
    return r + x * j1 + 0.5 * x * x * jump_superop(j1)


def rho_tilde_initial() -> np.ndarray:
    """Rotated-frame image of |eg><eg| at t = 0."""
    a = (_EG - _GE) / np.sqrt(2.0)
    return np.outer(a, a.conj())


def rho_tilde(t: float, gamma: float) -> qmat.DensityMatrix:
    """Rotated-frame state at time ``t`` for the |eg> preparation."""
    _check_time(t)
    p = np.exp(-2.0 * gamma * t)
    m = p * rho_tilde_initial() + (1.0 - p) * projector("gg")
    return qmat.DensityMatrix(m, (2, 2))


def rho_tilde_superoperator(t: float, gamma: float, rho0=None) -> np.ndarray:
    """Same state propagated as ``exp[(e^{2 gamma t} - 1) J] exp(2 gamma t L) rho0``."""
    _check_time(t)
    r0 = rho_tilde_initial() if rho0 is None else np.asarray(rho0, dtype=complex)
    x = 2.0 * gamma * t
    return exp_jump_superop(np.expm1(x), exp_decay_superop(x, r0))


@dataclass(frozen=True)
class ClosedFormState:
    t: float
    gamma: float
    omega: float
    rho: qmat.DensityMatrix

    @property
    def matrix(self) -> np.ndarray:
        return self.rho.matrix

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.rho.matrix, dtype=dtype)


def evolved_state(t: float, gamma: float, omega: float) -> np.ndarray:
    """Original-frame 4x4 density matrix at time ``t`` (bare array)."""
    T = frame_transform(t, omega)
    m = T @ rho_tilde(t, gamma).matrix @ qmat.dag(T)
    return 0.5 * (m + qmat.dag(m))


def rho_exact(t: float, p: SystemParams) -> ClosedFormState:
    """Exact lossy state for the |eg> preparation under the effective model."""
    _check_time(t)
    omega = p.omega_eff
    rho = qmat.DensityMatrix(evolved_state(t, p.gamma, omega), (2, 2))
    return ClosedFormState(t=t, gamma=p.gamma, omega=omega, rho=rho)


def ideal_ket(t: float, omega: float) -> np.ndarray:
    """Lossless state ``e^{-i omega t}(cos(omega t)|eg> - i sin(omega t)|ge>)``."""
    return np.exp(-1j * omega * t) * (np.cos(omega * t) * _EG - 1j * np.sin(omega * t) * _GE)


# -- closed-form observables ------------------------------------------------

def closed_form_joint_probs(t: float, gamma: float, omega: float):
    """``(p_eg, p_ge, p_gg, p_ee)``."""
    _check_time(t)
    surv = np.exp(-2.0 * gamma * t)
    return (surv * np.cos(omega * t) ** 2, surv * np.sin(omega * t) ** 2, -np.expm1(-2.0 * gamma * t), 0.0)


def _decay_at_tk(k: int, gamma: float, omega: float) -> float:
    if int(k) != k or k < 0:
        raise ValueError(f"k must be a nonnegative integer, got {k}")
    return float(np.exp(-gamma * (2 * k + 1) * np.pi / (2.0 * omega)))


def closed_form_bell_amplitude(k: int, gamma: float, omega: float) -> float:
    return _decay_at_tk(k, gamma, omega)


def closed_form_concurrence_tk(k: int, gamma: float, omega: float) -> float:
    return _decay_at_tk(k, gamma, omega)


def closed_form_fmax(k: int, gamma: float, omega: float) -> float:
    """Best teleportation fidelity at ``t_k``; 2/3 above the decay threshold."""
    if gamma / omega <= np.log(4.0) / ((2 * k + 1) * np.pi):
        return 1.0 / 3.0 + 2.0 / 3.0 * _decay_at_tk(k, gamma, omega)
    return 2.0 / 3.0


def gamma_max(k: int, omega: float) -> float:
    """Largest decay rate that still beats the classical 2/3 at ``t_k``."""
    if omega <= 0:
        raise ValueError("omega must be positive")
    if int(k) != k or k < 0:
        raise ValueError(f"k must be a nonnegative integer, got {k}")
    return omega * np.log(4.0) / ((2 * k + 1) * np.pi)
