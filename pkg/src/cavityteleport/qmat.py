"""
Small dense complex linear algebra.

Everything here is sized for two qubits times a short Fock ladder (dimension
at most a few dozen). The eigen-solvers are written out explicitly: cyclic
Jacobi for Hermitian input and Hessenberg reduction followed by shifted QR
for general input.

Basis convention used across the package: a single atom is ordered
(|e>, |g>), two atoms (|ee>, |eg>, |ge>, |gg>), and atoms-times-field is
ordered (atom 1, atom 2, field) with the Fock basis |0>, ..., |n_max>.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .exceptions import (
    BadLayoutError,
    DimMismatchError,
    InvalidStateError,
    NoConvergenceError,
    NotHermitianError,
)

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
POSITIVITY_TOL = 1e-9

_EPS = np.finfo(float).eps


def as_matrix(m) -> np.ndarray:
    """Return ``m`` as a finite, square complex array."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimMismatchError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def dag(m) -> np.ndarray:
    return np.conj(np.transpose(m))


def kron(a, b) -> np.ndarray:
    """Kronecker product, ``dim = dim_a * dim_b``."""
    a = as_matrix(a)
    b = as_matrix(b)
    na, nb = a.shape[0], b.shape[0]
    return (a[:, None, :, None] * b[None, :, None, :]).reshape(na * nb, na * nb)


def kron_all(*mats) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for m in mats:
        out = kron(out, m)
    return out


def is_hermitian(m, tol: float = HERMITIAN_TOL) -> bool:
    m = np.asarray(m)
    return bool(np.max(np.abs(m - dag(m)), initial=0.0) <= tol)


# ---------------------------------------------------------------------------
# Hermitian eigenproblem: cyclic Jacobi
# ---------------------------------------------------------------------------

def herm_eig(m, tol: float = HERMITIAN_TOL, max_sweeps: int = 60):
    """Eigen-decomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Parameters
    ----------
    m : array_like
        Hermitian matrix (checked to ``tol`` in the max norm).
    tol : float
        Hermiticity tolerance.
    max_sweeps : int
        Sweep budget before :class:`NoConvergenceError` is raised.

    Returns
    -------
    eigenvalues : ndarray of float
        Sorted in descending order.
    eigenvectors : ndarray
        Unitary matrix whose columns match ``eigenvalues``.
    """
    a = as_matrix(m)
    if not is_hermitian(a, tol):
        raise NotHermitianError("herm_eig requires a Hermitian matrix")
    n = a.shape[0]
    a = 0.5 * (a + dag(a))
    v = np.eye(n, dtype=complex)
    scale = np.linalg.norm(a)
    if n == 1 or scale == 0.0:
        return np.real(np.diag(a)).copy(), v

    for _ in range(max_sweeps):
        off = np.linalg.norm(a[~np.eye(n, dtype=bool)])
        if off <= _EPS * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag <= 1e-300 or mag <= _EPS * 1e-2 * scale:
                    continue
                phase = apq / mag
                zeta = (a[q, q].real - a[p, p].real) / (2.0 * mag)
                t = (1.0 if zeta >= 0 else -1.0) / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                # phase fix on column q followed by a real plane rotation
                j = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ j
                a[idx, :] = dag(j) @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                v[:, idx] = v[:, idx] @ j
    else:
        raise NoConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps")

    w = np.real(np.diag(a))
    order = np.argsort(-w, kind="stable")
    return w[order], v[:, order]


def eigvalsh(m, tol: float = HERMITIAN_TOL) -> np.ndarray:
    return herm_eig(m, tol)[0]


# ---------------------------------------------------------------------------
# General eigenvalues: Householder-Hessenberg + shifted QR
# ---------------------------------------------------------------------------

def hessenberg(m) -> np.ndarray:
    """Unitarily similar upper Hessenberg form (Householder reflections)."""
    h = as_matrix(m).copy()
    n = h.shape[0]
    for k in range(n - 2):
        x = h[k + 1:, k].copy()
        normx = np.linalg.norm(x)
        if normx == 0.0:
            continue
        ph = x[0] / abs(x[0]) if x[0] != 0 else 1.0
        u = x.copy()
        u[0] += ph * normx
        u /= np.linalg.norm(u)
        h[k + 1:, :] -= 2.0 * np.outer(u, np.conj(u) @ h[k + 1:, :])
        h[:, k + 1:] -= 2.0 * np.outer(h[:, k + 1:] @ u, np.conj(u))
        h[k + 2:, k] = 0.0
    return h


def _givens(a, b):
    """(c, s) with c real so that [[c, s], [-conj(s), c]] @ [a, b] = [r, 0]."""
    if b == 0:
        return 1.0, 0.0
    if a == 0:
        return 0.0, np.conj(b) / abs(b)
    r = np.hypot(abs(a), abs(b))
    c = abs(a) / r
    s = (a / abs(a)) * np.conj(b) / r
    return c, s


def _wilkinson_shift(a, b, c, d):
    """Eigenvalue of [[a, b], [c, d]] closer to d."""
    tr = 0.5 * (a + d)
    disc = np.sqrt(0.25 * (a - d) ** 2 + b * c)
    l1, l2 = tr + disc, tr - disc
    return l1 if abs(l1 - d) <= abs(l2 - d) else l2


def general_eigenvalues(m, max_iter: int = 200) -> np.ndarray:
    """All eigenvalues of a small general complex matrix.

    Reduces to Hessenberg form, then runs single-shift QR steps (Wilkinson
    shifts, Givens rotations) with deflation on the active block. The total
    number of QR steps is capped at ``max_iter``.
    """
    h = hessenberg(m)
    n = h.shape[0]
    if n > 8:
        raise DimMismatchError("general_eigenvalues supports dimension <= 8")
    eig = np.zeros(n, dtype=complex)
    scale = max(np.max(np.abs(h), initial=0.0), 1e-300)
    hi = n - 1
    iters = 0
    since_deflation = 0
    while hi >= 0:
        if hi == 0:
            eig[0] = h[0, 0]
            break
        # locate the start of the unreduced block ending at hi
        lo = hi
        while lo > 0:
            sub = abs(h[lo, lo - 1])
            if sub <= _EPS * (abs(h[lo, lo]) + abs(h[lo - 1, lo - 1])) or sub <= _EPS * 1e-2 * scale:
                h[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            eig[hi] = h[hi, hi]
            hi -= 1
            since_deflation = 0
            continue
        if iters >= max_iter:
            raise NoConvergenceError(f"shifted QR exceeded {max_iter} iterations")
        iters += 1
        since_deflation += 1

        if since_deflation % 11 == 0:
            # exceptional shift to break cycles
            mu = h[hi, hi] + 0.75 * abs(h[hi, hi - 1])
        else:
            mu = _wilkinson_shift(h[hi - 1, hi - 1], h[hi - 1, hi], h[hi, hi - 1], h[hi, hi])

        blk = slice(lo, hi + 1)
        b = h[blk, blk] - mu * np.eye(hi - lo + 1)
        rots = []
        for k in range(hi - lo):
            c, s = _givens(b[k, k], b[k + 1, k])
            g = np.array([[c, s], [-np.conj(s), c]])
            b[k:k + 2, :] = g @ b[k:k + 2, :]
            b[k + 1, k] = 0.0
            rots.append(g)
        for k, g in enumerate(rots):
            b[:, k:k + 2] = b[:, k:k + 2] @ dag(g)
        h[blk, blk] = b + mu * np.eye(hi - lo + 1)
    return eig


# ---------------------------------------------------------------------------
# Singular values (one-sided Jacobi)
# ---------------------------------------------------------------------------

def singular_values(m, max_sweeps: int = 60) -> np.ndarray:
    """Singular values in descending order.

    One-sided Jacobi: orthogonalize the columns by plane rotations, i.e.
    diagonalize ``m^dag m`` implicitly, and return the column norms. Small
    singular values stay accurate to working precision because ``m^dag m``
    is never formed. Real or complex input.
    """
    u = np.array(m, dtype=complex if np.iscomplexobj(m) else float)
    if u.ndim != 2:
        raise DimMismatchError("singular_values expects a 2-D matrix")
    if not np.all(np.isfinite(u)):
        raise ValueError("matrix has non-finite entries")
    if u.shape[0] < u.shape[1]:
        u = u.conj().T.copy()
    ncol = u.shape[1]
    # overlaps below this involve a column that is zero to working precision
    floor = (_EPS * np.linalg.norm(u)) ** 2
    for _ in range(max_sweeps):
        rotated = False
        for p in range(ncol - 1):
            for q in range(p + 1, ncol):
                alpha = np.real(np.vdot(u[:, p], u[:, p]))
                beta = np.real(np.vdot(u[:, q], u[:, q]))
                gamma = np.vdot(u[:, p], u[:, q])
                mag = abs(gamma)
                if mag <= floor or mag <= _EPS * np.sqrt(alpha * beta):
                    continue
                rotated = True
                # rephase column q so the overlap is real, then rotate
                uq = u[:, q] * np.conj(gamma / mag)
                zeta = (beta - alpha) / (2.0 * mag)
                t = (1.0 if zeta >= 0 else -1.0) / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                up = u[:, p].copy()
                u[:, p] = c * up - s * uq
                u[:, q] = s * up + c * uq
        if not rotated:
            break
    else:
        raise NoConvergenceError("one-sided Jacobi did not converge")
    return np.sort(np.linalg.norm(u, axis=0))[::-1]


# ---------------------------------------------------------------------------
# Density matrices
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DensityMatrix:
    """A density matrix tagged with its tensor layout.

    ``dims`` lists the subsystem dimensions in tensor order, e.g. ``(2, 2)``
    for two atoms or ``(2, 2, n_max + 1)`` for atoms plus field. Construction
    only checks shape and finiteness; call :meth:`validate` for the physical
    invariants.
    """

    matrix: np.ndarray
    dims: tuple = field(default=(2, 2))

    def __post_init__(self):
        mat = as_matrix(self.matrix)
        dims = tuple(int(d) for d in self.dims)
        if any(d < 1 for d in dims) or int(np.prod(dims)) != mat.shape[0]:
            raise BadLayoutError(f"layout {dims} does not match dimension {mat.shape[0]}")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "dims", dims)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def from_ket(cls, ket, dims=(2, 2)) -> "DensityMatrix":
        k = np.asarray(ket, dtype=complex).ravel()
        return cls(np.outer(k, np.conj(k)), dims)

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def violations(self, trace_tol: float = TRACE_TOL) -> list[str]:
        m = self.matrix
        out = []
        herm = np.max(np.abs(m - dag(m)))
        if herm > HERMITIAN_TOL:
            out.append(f"not Hermitian (deviation {herm:.3g})")
            return out
        tr = np.trace(m)
        if abs(tr - 1.0) > trace_tol:
            out.append(f"trace {tr.real:.12g} differs from 1")
        lmin = herm_eig(m)[0][-1]
        if lmin < -POSITIVITY_TOL:
            out.append(f"negative eigenvalue {lmin:.3g}")
        return out

    def validate(self, trace_tol: float = TRACE_TOL) -> "DensityMatrix":
        problems = self.violations(trace_tol)
        if problems:
            raise InvalidStateError("; ".join(problems))
        return self


def as_density(rho, dims=None) -> np.ndarray:
    """Matrix of ``rho`` (a DensityMatrix or array), checked against ``dims``."""
    if isinstance(rho, DensityMatrix):
        if dims is not None and tuple(dims) != rho.dims:
            raise BadLayoutError(f"expected layout {tuple(dims)}, got {rho.dims}")
        return rho.matrix
    m = as_matrix(rho)
    if dims is not None and int(np.prod(dims)) != m.shape[0]:
        raise BadLayoutError(f"expected dimension {int(np.prod(dims))}, got {m.shape[0]}")
    return m


def partial_trace(rho, keep: Sequence[int] | int, dims=None) -> DensityMatrix:
    """Trace out every subsystem not listed in ``keep``.

    ``dims`` is required when ``rho`` is a bare array; for a
    :class:`DensityMatrix` its own layout is used.
    """
    if isinstance(rho, DensityMatrix):
        layout = rho.dims if dims is None else tuple(dims)
        m = rho.matrix
    else:
        if dims is None:
            raise BadLayoutError("dims must be given for a bare matrix")
        layout = tuple(int(d) for d in dims)
        m = as_matrix(rho)
    if int(np.prod(layout)) != m.shape[0]:
        raise BadLayoutError(f"layout {layout} does not match dimension {m.shape[0]}")
    if isinstance(keep, (int, np.integer)):
        keep = [int(keep)]
    keep = sorted(set(int(k) for k in keep))
    nsub = len(layout)
    if not keep or keep[0] < 0 or keep[-1] >= nsub:
        raise BadLayoutError(f"keep={keep} is invalid for {nsub} subsystems")

    t = m.reshape(layout + layout)
    letters = "abcdefghijklmnopqrstuvwxyz"
    row = list(letters[:nsub])
    col = list(letters[nsub:2 * nsub])
    for i in range(nsub):
        if i not in keep:
            col[i] = row[i]
    out = "".join(row[i] for i in keep) + "".join(col[i] for i in keep)
    reduced = np.einsum("".join(row) + "".join(col) + "->" + out, t)
    kd = tuple(layout[i] for i in keep)
    n = int(np.prod(kd))
    return DensityMatrix(reduced.reshape(n, n), kd)


def trace_distance(rho, sigma) -> float:
    """Half the trace norm of ``rho - sigma``."""
    a = as_density(rho)
    b = as_density(sigma)
    if a.shape != b.shape:
        raise DimMismatchError(f"dimension mismatch {a.shape} vs {b.shape}")
    diff = a - b
    diff = 0.5 * (diff + dag(diff))
    return float(0.5 * np.sum(np.abs(eigvalsh(diff))))


def fidelity_pure(ket, rho) -> float:
    k = np.asarray(ket, dtype=complex).ravel()
    return float(np.real(np.conj(k) @ as_density(rho) @ k))
