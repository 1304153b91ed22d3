"""Operators, Hamiltonians and the Lindblad generator for two atoms in a cavity.

Units have hbar = 1. Decay follows the ``2*gamma`` prefactor convention, so an
isolated excited atom loses population as ``exp(-2*gamma*t)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import qmat
from .exceptions import ConfigError, DimMismatchError

# single-atom operators in the (|e>, |g>) basis
IDENTITY = np.eye(2, dtype=complex)
LOWER = np.array([[0, 0], [1, 0]], dtype=complex)  # |g><e|
RAISE = LOWER.T.copy()
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

_SINGLE = {"lower": LOWER, "raise": RAISE, "x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}

KET_E = np.array([1, 0], dtype=complex)
KET_G = np.array([0, 1], dtype=complex)
BASIS_LABELS = ("ee", "eg", "ge", "gg")


def basis_ket(label: str) -> np.ndarray:
    """Two-atom basis ket from a label such as ``"eg"``."""
    if len(label) != 2 or set(label) - {"e", "g"}:
        raise ValueError(f"bad two-atom label {label!r}")
    one = {"e": KET_E, "g": KET_G}
    return np.kron(one[label[0]], one[label[1]])


def projector(label: str) -> np.ndarray:
    k = basis_ket(label)
    return np.outer(k, k.conj())


@dataclass(frozen=True)
class SystemParams:
    """Coupling ``lam``, detuning ``delta`` and decay ``gamma`` (same units)."""

    lam: float
    delta: float
    gamma: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.lam) and self.lam > 0):
            raise ConfigError(f"lambda must be > 0, got {self.lam}")
        if not (np.isfinite(self.delta) and self.delta > 0):
            raise ConfigError(f"delta must be > 0, got {self.delta}")
        if not (np.isfinite(self.gamma) and self.gamma >= 0):
            raise ConfigError(f"gamma must be >= 0, got {self.gamma}")

    @property
    def omega_eff(self) -> float:
        return self.lam ** 2 / self.delta

    @classmethod
    def from_omega(cls, omega: float = 1.0, gamma: float = 0.0, delta_over_lambda: float = 10.0):
        """Parameters with a prescribed effective coupling ``lam**2/delta``."""
        if omega <= 0 or delta_over_lambda <= 0:
            raise ConfigError("omega and delta_over_lambda must be positive")
        lam = omega * delta_over_lambda
        return cls(lam=lam, delta=lam * delta_over_lambda, gamma=gamma)


@dataclass(frozen=True)
class FockTruncation:
    n_max: int = 2

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise ConfigError(f"n_max must be an integer >= 1, got {self.n_max}")

    @property
    def dim(self) -> int:
        return self.n_max + 1


def atom_operator(which: int, kind: str) -> np.ndarray:
    """Single-atom operator ``kind`` acting on atom ``which`` (1 or 2), as 4x4."""
    if which not in (1, 2):
        raise ValueError("which must be 1 or 2")
    try:
        op = _SINGLE[kind]
    except KeyError:
        raise ValueError(f"unknown operator kind {kind!r}") from None
    return qmat.kron(op, IDENTITY) if which == 1 else qmat.kron(IDENTITY, op)


def excitation_number() -> np.ndarray:
    """sigma_z of atom 1 plus sigma_z of atom 2."""
    return atom_operator(1, "z") + atom_operator(2, "z")


def effective_hamiltonian(p: SystemParams) -> np.ndarray:
    """Dispersive two-atom Hamiltonian with coupling ``p.omega_eff``."""
    s1, s2 = atom_operator(1, "lower"), atom_operator(2, "lower")
    d1, d2 = qmat.dag(s1), qmat.dag(s2)
    return p.omega_eff * (d1 @ s1 + d2 @ s2 + d1 @ s2 + s1 @ d2)


def annihilation(n_max: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n_max + 1)), k=1).astype(complex)


@lru_cache(maxsize=16)
def _full_coupling(n_max: int) -> np.ndarray:
    """a^dag (sigma_1 + sigma_2) on atoms x field."""
    a = annihilation(n_max)
    idf = np.eye(n_max + 1, dtype=complex)
    s = qmat.kron_all(LOWER, IDENTITY, idf) + qmat.kron_all(IDENTITY, LOWER, idf)
    out = s @ qmat.kron_all(IDENTITY, IDENTITY, qmat.dag(a))
    out.setflags(write=False)
    return out


def full_hamiltonian(p: SystemParams, t: float, trunc: FockTruncation = FockTruncation()) -> np.ndarray:
    """Time-dependent atom-field Hamiltonian in the interaction picture.

    ``lam * sum_j (exp(-i delta t) a^dag sigma_j + exp(i delta t) a sigma_j^dag)``
    on the (atom 1, atom 2, field) space truncated at ``trunc.n_max`` photons.
    """
    if not np.isfinite(t):
        raise ValueError("t must be finite")
    c = _full_coupling(trunc.n_max)
    term = np.exp(-1j * p.delta * t) * c
    return p.lam * (term + qmat.dag(term))


def full_excitation_number(trunc: FockTruncation) -> np.ndarray:
    """sigma_z1 + sigma_z2 + 2 a^dag a on atoms x field."""
    a = annihilation(trunc.n_max)
    idf = np.eye(trunc.dim, dtype=complex)
    return (qmat.kron(excitation_number(), idf)
            + 2.0 * qmat.kron_all(IDENTITY, IDENTITY, qmat.dag(a) @ a))


def atom_jumps(field_dim: int | None = None) -> list[np.ndarray]:
    """Lowering operators of both atoms, optionally padded with a field identity."""
    ops = [atom_operator(1, "lower"), atom_operator(2, "lower")]
    if field_dim is None:
        return ops
    idf = np.eye(field_dim, dtype=complex)
    return [qmat.kron(o, idf) for o in ops]


def lindblad_rhs(rho, h, gamma: float, jumps) -> np.ndarray:
    """``-i[H, rho] + 2 gamma sum_j (L rho L^dag - {L^dag L, rho}/2)``."""
    r = qmat.as_density(rho)
    h = np.asarray(h, dtype=complex)
    if h.shape != r.shape:
        raise DimMismatchError(f"H has shape {h.shape}, rho has {r.shape}")
    out = -1j * (h @ r - r @ h)
    if gamma:
        for L in jumps:
            L = np.asarray(L, dtype=complex)
            if L.shape != r.shape:
                raise DimMismatchError(f"jump operator shape {L.shape} vs {r.shape}")
            Ld = qmat.dag(L)
            LdL = Ld @ L
            out += 2.0 * gamma * (L @ r @ Ld - 0.5 * (LdL @ r + r @ LdL))
    return out


def liouvillian(h, gamma: float, jumps) -> np.ndarray:
    """Matrix of :func:`lindblad_rhs` acting on row-major ``rho.ravel()``."""
    h = np.asarray(h, dtype=complex)
    n = h.shape[0]
    eye = np.eye(n, dtype=complex)
    sup = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    if gamma:
        for L in jumps:
            L = np.asarray(L, dtype=complex)
            LdL = qmat.dag(L) @ L
            sup += 2.0 * gamma * (np.kron(L, L.conj())
                                  - 0.5 * (np.kron(LdL, eye) + np.kron(eye, LdL.T)))
    return sup
