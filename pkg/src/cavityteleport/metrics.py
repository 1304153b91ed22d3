"""
Observables and channel-quality measures for a two-atom state.

All functions take a 4x4 density matrix (array or :class:`DensityMatrix`) in
the (|ee>, |eg>, |ge>, |gg>) basis.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from . import qmat
from .analytic import EPR_KET
from .exceptions import InvalidStateError
from .model import IDENTITY, SIGMA_X, SIGMA_Y, SIGMA_Z

PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)
_YY = np.kron(SIGMA_Y, SIGMA_Y)
_PAULI_CORRECTIONS = (IDENTITY, SIGMA_X, SIGMA_Y, SIGMA_Z)

# state weights below this fraction of the trace are treated as roundoff
SPECTRUM_NOISE_FLOOR = 1e-14
IMAG_TOL = 1e-9
# below this the fitted Bell phase is roundoff
BELL_AMPLITUDE_FLOOR = 1e-10


def _two_qubit(rho) -> np.ndarray:
    return qmat.as_density(rho, (2, 2))


def joint_probabilities(rho):
    """Detection probabilities ``(p_eg, p_ge, p_gg, p_ee)``."""
    d = np.real(np.diag(_two_qubit(rho)))
    return float(d[1]), float(d[2]), float(d[3]), float(d[0])


def bell_signal(rho, phi: float) -> float:
    """``<sigma_1^x (cos(phi) sigma_2^x + sin(phi) sigma_2^y)>``."""
    r = _two_qubit(rho)
    op = np.kron(SIGMA_X, np.cos(phi) * SIGMA_X + np.sin(phi) * SIGMA_Y)
    return float(np.real(np.trace(r @ op)))


def bell_fit(rho):
    """Amplitude ``A`` and offset ``phi0`` with ``beta(phi) = A cos(phi + phi0)``.

    The offset is reported as 0 when ``A`` is below ``BELL_AMPLITUDE_FLOOR``.
    """
    b0 = bell_signal(rho, 0.0)
    b1 = bell_signal(rho, np.pi / 2)
    amp = float(np.hypot(b0, b1))
    if amp <= BELL_AMPLITUDE_FLOOR:
        return amp, 0.0
    return amp, float(np.arctan2(-b1, b0))


def spin_flip(rho) -> np.ndarray:
    """``(sigma_y x sigma_y) rho* (sigma_y x sigma_y)`` in the standard basis."""
    return _YY @ np.conj(_two_qubit(rho)) @ _YY


def wootters_lambdas(rho) -> np.ndarray:
    """Descending square roots of the spectrum of ``rho @ spin_flip(rho)``.

    Evaluated without forming the product: with ``rho = sum_i |v_i><v_i|``
    (eigenvectors scaled by the square roots of their weights) the values
    are the singular values of ``tau[i, j] = <v_i| YY |v_j*>``. Weights
    below ``SPECTRUM_NOISE_FLOOR`` are roundoff and dropped.
    """
    r = _two_qubit(rho)
    w, vecs = qmat.herm_eig(r)
    if w[-1] < -qmat.POSITIVITY_TOL:
        raise InvalidStateError(f"state has negative eigenvalue {w[-1]:.3g}")
    keep = w > SPECTRUM_NOISE_FLOOR * max(w[0], 1.0)
    v = vecs[:, keep] * np.sqrt(w[keep])
    lam = np.zeros(4)
    if v.shape[1]:
        tau = v.T @ _YY @ v  # <v_i| YY |v_j*> = (v_i^dag YY v_j^*), conjugated; same singular values
        lam[:v.shape[1]] = qmat.singular_values(tau)
    return lam


def wootters_lambdas_eigen(rho) -> np.ndarray:
    """Same values from the eigenvalues of the non-Hermitian ``rho rho_sf``.

    Square roots amplify the roundoff in eigenvalues that should be zero, so
    this path is only accurate to about ``sqrt(eps)``; it is kept as an
    independent cross-check of :func:`wootters_lambdas`.
    """
    r = _two_qubit(rho)
    ev = qmat.general_eigenvalues(r @ spin_flip(r))
    if np.max(np.abs(ev.imag)) > IMAG_TOL:
        raise InvalidStateError(f"rho rho_sf has complex eigenvalues (imag {np.max(np.abs(ev.imag)):.3g})")
    mu = ev.real
    if mu.min() < -qmat.POSITIVITY_TOL:
        raise InvalidStateError(f"rho rho_sf has negative eigenvalue {mu.min():.3g}")
    return np.sort(np.sqrt(np.clip(mu, 0.0, None)))[::-1]


def concurrence(rho) -> float:
    """Wootters concurrence ``max(0, l1 - l2 - l3 - l4)``."""
    lam = wootters_lambdas(rho)
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def correlation_matrix(rho) -> np.ndarray:
    """Real 3x3 matrix ``t[n, m] = Tr[rho (sigma_n x sigma_m)]``, order (x, y, z)."""
    r = _two_qubit(rho)
    t = np.empty((3, 3))
    for n, sn in enumerate(PAULIS):
        for m, sm in enumerate(PAULIS):
            t[n, m] = np.real(np.trace(r @ np.kron(sn, sm)))
    return t


def max_teleport_fidelity(rho) -> float:
    """Optimal teleportation fidelity from the correlation-matrix trace norm."""
    sv = qmat.singular_values(correlation_matrix(rho))
    return float(0.5 * (1.0 + np.sum(sv) / 3.0))


def epr_fidelity(rho) -> float:
    """Overlap with ``(|eg> - i|ge>)/sqrt(2)``."""
    return qmat.fidelity_pure(EPR_KET, _two_qubit(rho))


def purity(rho) -> float:
    r = _two_qubit(rho)
    return float(np.real(np.trace(r @ r)))


# -- standard teleportation protocol ----------------------------------------

@dataclass(frozen=True)
class UnknownQubit:
    """Pure input ``a|e> + b|g>``."""

    a: complex
    b: complex

    def __post_init__(self):
        norm = abs(self.a) ** 2 + abs(self.b) ** 2
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"qubit amplitudes are not normalized (|a|^2+|b|^2 = {norm})")

    @property
    def ket(self) -> np.ndarray:
        return np.array([self.a, self.b], dtype=complex)

    @classmethod
    def from_bloch(cls, theta: float, phi: float) -> "UnknownQubit":
        return cls(complex(np.cos(theta / 2)), complex(np.exp(1j * phi) * np.sin(theta / 2)))


def _measurement_basis(reference=EPR_KET) -> list[np.ndarray]:
    """Alice's Bell basis on (input, her atom), adapted to ``reference``.

    With ``chi* = M^{-1} / 2`` (M the 2x2 amplitude matrix of the shared
    pair), projecting onto ``(sigma_j x 1)|chi>`` leaves Bob holding
    ``sigma_j |psi>``, so every outcome is undone by a single Pauli.
    """
    m = np.asarray(reference, dtype=complex).reshape(2, 2)
    chi = np.conj(0.5 * np.linalg.inv(m)).reshape(4)
    return [np.kron(s, IDENTITY) @ chi for s in _PAULI_CORRECTIONS]


_BASIS = _measurement_basis()


def teleport_output(channel, qubit: UnknownQubit) -> np.ndarray:
    """Bob's corrected state, averaged over Alice's four outcomes."""
    ch = _two_qubit(channel)
    psi = qubit.ket
    total = np.kron(np.outer(psi, psi.conj()), ch).reshape(4, 2, 4, 2)
    out = np.zeros((2, 2), dtype=complex)
    for vec, fix in zip(_BASIS, _PAULI_CORRECTIONS):
        bob = np.einsum("x,xbyc,y->bc", vec.conj(), total, vec)
        out += fix @ bob @ qmat.dag(fix)
    return out


def teleport_fidelity(channel, qubit: UnknownQubit) -> float:
    psi = qubit.ket
    return float(np.real(psi.conj() @ teleport_output(channel, qubit) @ psi))


SIX_STATES = (
    UnknownQubit(1.0, 0.0),
    UnknownQubit(0.0, 1.0),
    UnknownQubit(1 / np.sqrt(2), 1 / np.sqrt(2)),
    UnknownQubit(1 / np.sqrt(2), -1 / np.sqrt(2)),
    UnknownQubit(1 / np.sqrt(2), 1j / np.sqrt(2)),
    UnknownQubit(1 / np.sqrt(2), -1j / np.sqrt(2)),
)


def average_teleport_fidelity(channel) -> float:
    """Protocol fidelity averaged over the six Pauli eigenstates.

    Fidelity is quadratic in the input Bloch vector, so the six-state mean
    equals the uniform average over all pure inputs.
    """
    return float(np.mean([teleport_fidelity(channel, q) for q in SIX_STATES]))


@dataclass(frozen=True)
class ChannelReport:
    probs: tuple
    bell_amplitude: float
    bell_phase: float
    concurrence: float
    fmax: float
    epr_fidelity: float
    purity: float
    average_fidelity: float

    def as_row(self) -> dict:
        row = asdict(self)
        p_eg, p_ge, p_gg, p_ee = row.pop("probs")
        return {"p_eg": p_eg, "p_ge": p_ge, "p_gg": p_gg, "p_ee": p_ee, **row}


def channel_report(rho) -> ChannelReport:
    r = _two_qubit(rho)
    amp, phase = bell_fit(r)
    return ChannelReport(
        probs=joint_probabilities(r),
        bell_amplitude=amp,
        bell_phase=phase,
        concurrence=concurrence(r),
        fmax=max_teleport_fidelity(r),
        epr_fidelity=epr_fidelity(r),
        purity=purity(r),
        average_fidelity=average_teleport_fidelity(r),
    )
