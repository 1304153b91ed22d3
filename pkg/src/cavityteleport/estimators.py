"""
scikit-learn compatible wrappers.

``LossyCavityDynamics`` maps interaction times to two-atom density matrices,
``ChannelMetrics`` maps density matrices to a feature table, and
``TeleportationUsability`` labels states that beat the classical 2/3 bound.
They chain in a :class:`sklearn.pipeline.Pipeline`::

    pipe = make_pipeline(LossyCavityDynamics(gamma=0.2), ChannelMetrics())
    table = pipe.fit_transform(times)
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import analytic, metrics, qmat
from .model import SystemParams, projector
from .oracle import IntegratorConfig, integrate_effective

METRIC_FUNCS = {
    "p_eg": lambda r: metrics.joint_probabilities(r)[0],
    "p_ge": lambda r: metrics.joint_probabilities(r)[1],
    "p_gg": lambda r: metrics.joint_probabilities(r)[2],
    "p_ee": lambda r: metrics.joint_probabilities(r)[3],
    "bell_amplitude": lambda r: metrics.bell_fit(r)[0],
    "bell_phase": lambda r: metrics.bell_fit(r)[1],
    "concurrence": metrics.concurrence,
    "fmax": metrics.max_teleport_fidelity,
    "epr_fidelity": metrics.epr_fidelity,
    "purity": metrics.purity,
    "average_fidelity": metrics.average_teleport_fidelity,
}

DEFAULT_METRICS = ("p_eg", "p_ge", "p_gg", "p_ee", "bell_amplitude", "concurrence", "fmax", "epr_fidelity", "purity")


def check_times(X) -> np.ndarray:
    """Flatten a column of nonnegative, finite times."""
    t = np.asarray(X, dtype=float)
    if t.ndim == 2 and t.shape[1] == 1:
        t = t[:, 0]
    if t.ndim != 1:
        raise ValueError(f"expected a 1-D array or a single column of times, got shape {t.shape}")
    if t.size == 0:
        raise ValueError("no times given")
    if not np.all(np.isfinite(t)) or np.any(t < 0):
        raise ValueError("times must be finite and nonnegative")
    return t


def check_states(X, dim: int = 4) -> np.ndarray:
    """Validate a stack of ``dim x dim`` density matrices, shape (n, dim, dim)."""
    a = np.asarray(X, dtype=complex)
    if a.ndim == 2 and a.shape == (dim, dim):
        a = a[None]
    if a.ndim != 3 or a.shape[1:] != (dim, dim):
        raise ValueError(f"expected shape (n, {dim}, {dim}), got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("states contain non-finite entries")
    herm = np.max(np.abs(a - np.conj(np.swapaxes(a, 1, 2))))
    if herm > qmat.HERMITIAN_TOL:
        raise ValueError(f"states are not Hermitian (deviation {herm:.3g})")
    tr = np.abs(np.trace(a, axis1=1, axis2=2) - 1.0)
    if np.max(tr) > 1e-8:
        raise ValueError(f"states do not have unit trace (max deviation {np.max(tr):.3g})")
    return a


class LossyCavityDynamics(TransformerMixin, BaseEstimator):
    """Two-atom state after interaction time ``t``, starting from |eg>.

    Parameters
    ----------
    omega : float
        Effective atom-atom coupling ``lambda**2 / delta``.
    gamma : float
        Spontaneous emission rate (``2*gamma`` convention).
    method : {"closed_form", "rk4"}
        Exact solution or brute-force integration of the master equation.
    dt : float
        RK4 step in units of ``1/omega``; ignored for the closed form.
    """

    def __init__(self, omega=1.0, gamma=0.0, method="closed_form", dt=1e-3):
        self.omega = omega
        self.gamma = gamma
        self.method = method
        self.dt = dt

    def fit(self, X=None, y=None):
        if self.method not in ("closed_form", "rk4"):
            raise ValueError(f"method must be 'closed_form' or 'rk4', got {self.method!r}")
        self.params_ = SystemParams.from_omega(float(self.omega), float(self.gamma))
        self.config_ = IntegratorConfig(dt=float(self.dt) / float(self.omega))
        if X is not None:
            check_times(X)
        self.n_features_in_ = 1
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "params_")
        t = check_times(X)
        if self.method == "closed_form":
            return np.stack([analytic.evolved_state(ti, self.gamma, self.params_.omega_eff) for ti in t])
        uniq, inverse = np.unique(t, return_inverse=True)
        traj = integrate_effective(projector("eg"), self.params_, uniq, self.config_)
        return traj.array()[inverse]


class ChannelMetrics(TransformerMixin, BaseEstimator):
    """Feature table of channel-quality measures, one row per state."""

    def __init__(self, metrics=DEFAULT_METRICS):
        self.metrics = metrics

    def fit(self, X=None, y=None):
        unknown = [m for m in self.metrics if m not in METRIC_FUNCS]
        if unknown:
            raise ValueError(f"unknown metrics {unknown}; choose from {sorted(METRIC_FUNCS)}")
        if X is not None:
            check_states(X)
        self.feature_names_out_ = np.array(list(self.metrics), dtype=object)
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "feature_names_out_")
        states = check_states(X)
        funcs = [METRIC_FUNCS[m] for m in self.feature_names_out_]
        return np.array([[f(r) for f in funcs] for r in states], dtype=float)

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "feature_names_out_")
        return self.feature_names_out_.copy()


class TeleportationUsability(ClassifierMixin, BaseEstimator):
    """Predicts whether a shared pair teleports better than a classical channel.

    The decision function is ``F_max - 2/3``; ``margin`` guards against
    roundoff right at the bound.
    """

    def __init__(self, margin=1e-9):
        self.margin = margin

    def fit(self, X=None, y=None):
        if X is not None:
            check_states(X)
        self.classes_ = np.array([False, True])
        return self

    def decision_function(self, X) -> np.ndarray:
        check_is_fitted(self, "classes_")
        return np.array([metrics.max_teleport_fidelity(r) - 2.0 / 3.0 for r in check_states(X)])

    def predict(self, X) -> np.ndarray:
        return self.decision_function(X) > self.margin
