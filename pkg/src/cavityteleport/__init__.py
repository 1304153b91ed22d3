"""Two atoms in a lossy dispersive cavity as a teleportation channel."""
from . import analytic, metrics, model, oracle, qmat
from .analytic import evolved_state, gamma_max, interaction_time, rho_exact
from .estimators import ChannelMetrics, LossyCavityDynamics, TeleportationUsability
from .exceptions import CavityTeleportError, ConfigError
from .metrics import (
    average_teleport_fidelity,
    channel_report,
    concurrence,
    joint_probabilities,
    max_teleport_fidelity,
)
from .model import FockTruncation, SystemParams

__version__ = "0.1.0"

__all__ = [
    "analytic", "metrics", "model", "oracle", "qmat",
    "evolved_state", "gamma_max", "interaction_time", "rho_exact",
    "ChannelMetrics", "LossyCavityDynamics", "TeleportationUsability",
    "CavityTeleportError", "ConfigError",
    "average_teleport_fidelity", "channel_report", "concurrence", "joint_probabilities", "max_teleport_fidelity",
    "FockTruncation", "SystemParams",
]
