"""
Brute-force propagators used to check the closed forms.

Both integrators are fixed-step classical RK4. The effective model is
autonomous and linear, so one RK4 step is a fixed 16x16 matrix acting on the
vectorized state; the full atom-field model is stepped directly with H(t)
sampled at t, t + dt/2 and t + dt.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from . import qmat
from .exceptions import ConfigError, StepTooLargeError, TruncationLeakError
from .model import (
    FockTruncation,
    SystemParams,
    atom_jumps,
    effective_hamiltonian,
    full_hamiltonian,
    lindblad_rhs,
    liouvillian,
    projector,
)

TRACE_DRIFT_LIMIT = 1e-6
LEAK_LIMIT = 1e-3


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float = 1e-3
    method: str = "rk4"

    def __post_init__(self):
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise ConfigError(f"dt must be > 0, got {self.dt}")
        if self.method not in ("rk4", "expm_step"):
            raise ConfigError(f"unknown method {self.method!r}")


@dataclass
class Trajectory:
    times: np.ndarray
    states: list
    max_trace_drift: float = 0.0
    max_symmetrization: float = 0.0
    full_states: list | None = None
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if len(self.times) != len(self.states):
            raise ValueError("times and states differ in length")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    def __len__(self):
        return len(self.times)

    def array(self) -> np.ndarray:
        return np.stack([s.matrix for s in self.states])


def _check_grid(t_grid) -> np.ndarray:
    t = np.asarray(t_grid, dtype=float).ravel()
    if t.size == 0:
        raise ConfigError("time grid is empty")
    if t[0] < 0 or np.any(np.diff(t) <= 0) or not np.all(np.isfinite(t)):
        raise ConfigError("time grid must be finite, nonnegative and strictly increasing")
    return t


def _substeps(span: float, dt: float) -> tuple[int, float]:
    if span <= 0:
        return 0, 0.0
    n = max(1, math.ceil(span / dt - 1e-9))
    return n, span / n


def _rk4_propagator(sup: np.ndarray, h: float) -> np.ndarray:
    """One classical RK4 step for ``y' = sup @ y`` written as a matrix."""
    hl = h * sup
    eye = np.eye(sup.shape[0], dtype=complex)
    # Horner form of I + hL + (hL)^2/2 + (hL)^3/6 + (hL)^4/24
    return eye + hl @ (eye + hl @ (eye + hl @ (eye + hl / 4.0) / 3.0) / 2.0)


class _Guard:
    """Tracks symmetrization and trace drift; raises when the step is unstable."""

    def __init__(self, n: int):
        self.n = n
        self.max_sym = 0.0
        self.max_drift = 0.0

    def clean(self, rho: np.ndarray) -> np.ndarray:
        herm = 0.5 * (rho + rho.conj().T)
        self.max_sym = max(self.max_sym, float(np.max(np.abs(herm - rho))))
        return herm

    def check(self, rho: np.ndarray, t: float):
        drift = abs(np.trace(rho) - 1.0)
        self.max_drift = max(self.max_drift, drift)
        if drift > TRACE_DRIFT_LIMIT:
            raise StepTooLargeError(f"trace drift {drift:.3g} at t={t:.6g}")
        # purity <= 1 bounds the Frobenius norm of any physical state
        if np.linalg.norm(rho) > 1.0 + TRACE_DRIFT_LIMIT:
            raise StepTooLargeError(f"state norm blew up at t={t:.6g}; reduce dt")


def integrate_effective(rho0, p: SystemParams, t_grid, cfg: IntegratorConfig = IntegratorConfig()) -> Trajectory:
    """Propagate the effective two-atom master equation and sample at ``t_grid``.

    ``cfg.dt`` is in the same time units as ``t_grid``.
    """
    r = qmat.as_density(rho0, (2, 2)).copy()
    times = _check_grid(t_grid)
    sup = liouvillian(effective_hamiltonian(p), p.gamma, atom_jumps())
    guard = _Guard(4)
    cache: dict[float, np.ndarray] = {}

    def step_matrix(h):
        key = round(h, 15)
        if key not in cache:
            cache[key] = _rk4_propagator(sup, h) if cfg.method == "rk4" else expm(h * sup)
        return cache[key]

    states = []
    t_now = 0.0
    vec = r.ravel()
    for t_target in times:
        n, h = _substeps(t_target - t_now, cfg.dt)
        if n:
            prop = step_matrix(h)
            for _ in range(n):
                vec = guard.clean((prop @ vec).reshape(4, 4)).ravel()
            guard.check(vec.reshape(4, 4), t_target)
        t_now = t_target
        states.append(qmat.DensityMatrix(vec.reshape(4, 4).copy(), (2, 2)))
    return Trajectory(times, states, guard.max_drift, guard.max_sym,
                      info={"dt": cfg.dt, "method": cfg.method, "model": "effective"})


def integrate_full(atoms0, p: SystemParams, trunc: FockTruncation, t_grid,
                   cfg: IntegratorConfig = IntegratorConfig(), keep_full: bool = False) -> Trajectory:
    """Propagate atoms plus cavity mode under the time-dependent Hamiltonian.

    The field starts in vacuum. Returned states are the two-atom reductions;
    with ``keep_full`` the unreduced states are kept in ``full_states``.
    """
    a0 = qmat.as_density(atoms0, (2, 2))
    nf = trunc.dim
    vac = np.zeros((nf, nf), dtype=complex)
    vac[0, 0] = 1.0
    rho = qmat.kron(a0, vac)
    dims = (2, 2, nf)
    dim = rho.shape[0]
    times = _check_grid(t_grid)
    jumps = atom_jumps(nf)
    top = qmat.kron(np.eye(4), np.diag(np.eye(nf)[-1]).astype(complex))
    guard = _Guard(dim)

    def rhs(t, r):
        return lindblad_rhs(r, full_hamiltonian(p, t, trunc), p.gamma, jumps)

    states, full = [], []
    t_now = 0.0
    for t_target in times:
        n, h = _substeps(t_target - t_now, cfg.dt)
        for i in range(n):
            t = t_now + i * h
            if cfg.method == "rk4":
                k1 = rhs(t, rho)
                k2 = rhs(t + h / 2, rho + (h / 2) * k1)
                k3 = rhs(t + h / 2, rho + (h / 2) * k2)
                k4 = rhs(t + h, rho + h * k3)
                rho = rho + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            else:
                # exponential midpoint rule (second order)
                sup = liouvillian(full_hamiltonian(p, t + h / 2, trunc), p.gamma, jumps)
                rho = (expm(h * sup) @ rho.ravel()).reshape(dim, dim)
            rho = guard.clean(rho)
        if n:
            guard.check(rho, t_target)
        leak = float(np.real(np.trace(top @ rho)))
        if leak > LEAK_LIMIT:
            raise TruncationLeakError(f"population {leak:.3g} in |n_max={trunc.n_max}> at t={t_target:.6g}")
        t_now = t_target
        states.append(qmat.partial_trace(qmat.DensityMatrix(rho.copy(), dims), [0, 1]))
        if keep_full:
            full.append(qmat.DensityMatrix(rho.copy(), dims))
    return Trajectory(times, states, guard.max_drift, guard.max_sym,
                      full_states=full if keep_full else None,
                      info={"dt": cfg.dt, "method": cfg.method, "model": "full", "n_max": trunc.n_max})


@dataclass(frozen=True)
class StationaryReport:
    t_end: float
    distance: float
    bound: float
    passed: bool
    monotone: bool


def stationary_check(p: SystemParams, decay_exponent: float = 10.0, samples: int = 200,
                     cfg: IntegratorConfig | None = None) -> StationaryReport:
    """Integrate from |eg> until ``2 gamma t_end = decay_exponent`` and compare with |gg>."""
    if p.gamma <= 0:
        raise ConfigError("stationary_check needs gamma > 0")
    if decay_exponent < 10:
        raise ConfigError("decay_exponent must be at least 10")
    cfg = cfg or IntegratorConfig(dt=1e-3 / p.omega_eff)
    t_end = decay_exponent / (2.0 * p.gamma)
    grid = np.linspace(0.0, t_end, samples + 1)[1:]
    traj = integrate_effective(projector("eg"), p, grid, cfg)
    gg = projector("gg")
    dist = np.array([qmat.trace_distance(s, gg) for s in traj.states])
    bound = float(np.exp(-2.0 * p.gamma * t_end) + 1e-6)
    return StationaryReport(
        t_end=float(t_end),
        distance=float(dist[-1]),
        bound=bound,
        passed=bool(dist[-1] <= bound),
        monotone=bool(np.all(np.diff(dist) <= 1e-12)),
    )
