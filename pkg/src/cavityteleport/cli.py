"""
Command-line front end.

Every figure command writes long-format data (one row per grid cell) as CSV
or JSON, with the effective run configuration echoed into the output. Times
and decay rates are in units of the effective coupling ``omega = lambda**2/delta``
except for ``fig2``, which works in units of ``lambda``.

Exit status: 0 on success, 1 when ``verify`` finds a failing check, 2 on a
configuration error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import analytic, metrics, verification
from .exceptions import ConfigError
from .model import FockTruncation, SystemParams, projector
from .oracle import IntegratorConfig, integrate_effective, integrate_full

COMMANDS = ("fig2", "fig3", "fig5", "fig6", "threshold", "verify", "sweep")

# default step for the atom-field model, in units of 1/delta
FULL_MODEL_DT = 0.05


@dataclass
class RunConfig:
    """Resolved parameters of one CLI run.

    ``dt`` is in units of ``1/omega`` for the effective model and ``1/delta``
    for the full atom-field model.
    """

    command: str
    gamma_ratio: list | None = None
    k: list | None = None
    grid: int | None = None
    t_max: float | None = None
    gamma_max: float = 1.0
    ld_min: float = 0.01
    ld_max: float = 0.33
    oracle: bool = False
    full_model: bool = False
    dt: float | None = None
    n_max: int = 2
    only: list = field(default_factory=list)
    out: str | None = None
    format: str = "csv"

    def validate(self) -> "RunConfig":
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.gamma_ratio is not None:
            if len(self.gamma_ratio) == 0:
                raise ConfigError("gamma_ratio list is empty")
            for g in self.gamma_ratio:
                if not (isinstance(g, (int, float)) and math.isfinite(g) and g >= 0):
                    raise ConfigError(f"gamma ratios must be finite and >= 0, got {g!r}")
        if self.k is not None:
            if len(self.k) == 0:
                raise ConfigError("k list is empty")
            for k in self.k:
                if isinstance(k, bool) or not isinstance(k, int) or k < 0:
                    raise ConfigError(f"k must be a nonnegative integer, got {k!r}")
        if self.grid is not None and (isinstance(self.grid, bool) or not isinstance(self.grid, int) or self.grid < 1):
            raise ConfigError(f"grid must be a positive integer, got {self.grid!r}")
        for name in ("t_max", "dt"):
            v = getattr(self, name)
            if v is not None and not (math.isfinite(v) and v > 0):
                raise ConfigError(f"{name} must be > 0, got {v!r}")
        if not (math.isfinite(self.gamma_max) and self.gamma_max >= 0):
            raise ConfigError(f"gamma_max must be >= 0, got {self.gamma_max!r}")
        if not (0 < self.ld_min <= self.ld_max <= 1.0 / 3.0 + 1e-12):
            raise ConfigError(f"need 0 < ld_min <= ld_max <= 1/3, got [{self.ld_min}, {self.ld_max}]")
        if isinstance(self.n_max, bool) or not isinstance(self.n_max, int) or self.n_max < 1:
            raise ConfigError(f"n_max must be a positive integer, got {self.n_max!r}")
        unknown = [g for g in self.only if g not in verification.GROUPS]
        if unknown:
            raise ConfigError(f"unknown check groups {unknown}; choose from {list(verification.GROUPS)}")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.format!r}")
        if self.out is not None:
            parent = Path(self.out).expanduser().resolve().parent
            if not parent.is_dir():
                raise ConfigError(f"output directory {parent} does not exist")
        return self

    def echo(self, keys) -> dict:
        d = asdict(self)
        return {"command": self.command, **{k: d[k] for k in keys}}


CONFIG_KEYS = {f.name for f in fields(RunConfig)} - {"command"}

# per-command defaults, applied below config-file values and CLI flags
DEFAULTS = {
    "fig2": {"gamma_ratio": [0.0, 0.01, 0.05, 0.1], "grid": 65, "t_max": 3 * math.pi},
    "fig3": {"gamma_ratio": [0.0, 0.2, 0.4], "k": [0], "grid": 181},
    "fig5": {"grid": 101, "t_max": 2 * math.pi},
    "fig6": {"grid": 101, "t_max": 2 * math.pi},
    "threshold": {"k": [0, 1, 2, 3, 4]},
    "verify": {},
    "sweep": {"grid": 33, "t_max": math.pi},
}

# keys echoed into each command's output
ECHO = {
    "fig2": ("gamma_ratio", "grid", "t_max", "ld_min", "ld_max", "oracle", "full_model", "dt", "n_max"),
    "fig3": ("gamma_ratio", "k", "grid", "oracle", "dt"),
    "fig5": ("gamma_ratio", "grid", "t_max", "gamma_max", "oracle", "dt"),
    "fig6": ("gamma_ratio", "grid", "t_max", "gamma_max", "oracle", "dt"),
    "threshold": ("k", "oracle", "dt"),
    "verify": ("only",),
    "sweep": ("gamma_ratio", "grid", "t_max", "gamma_max", "oracle", "dt"),
}


def load_config_file(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    data = {k.replace("-", "_"): v for k, v in data.items()}
    unknown = sorted(set(data) - CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys {unknown}")
    return data


def resolve_config(command: str, cli: dict, file_values: dict | None = None) -> RunConfig:
    """CLI flags override config-file values, which override defaults."""
    merged = dict(DEFAULTS[command])
    merged.update(file_values or {})
    merged.update({k: v for k, v in cli.items() if v is not None})
    if merged.get("dt") is None:
        merged["dt"] = FULL_MODEL_DT if merged.get("full_model") else 1e-3
    for key in ("gamma_ratio", "k", "only"):
        if isinstance(merged.get(key), (int, float)) and not isinstance(merged.get(key), bool):
            merged[key] = [merged[key]]
    if merged.get("gamma_ratio") is not None:
        merged["gamma_ratio"] = [float(g) if isinstance(g, int) and not isinstance(g, bool) else g
                                 for g in merged["gamma_ratio"]]
    return RunConfig(command=command, **merged).validate()


# -- output ------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _jsonable(v):
    if isinstance(v, np.generic):
        return v.item()
    return v


def render(columns: dict, config: dict, fmt: str) -> str:
    names = list(columns)
    if fmt == "json":
        doc = {"config": config, "columns": {n: [_jsonable(v) for v in columns[n]] for n in names}}
        return json.dumps(doc, indent=1) + "\n"
    buf = io.StringIO()
    buf.write("# config: " + json.dumps(config, sort_keys=False) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(names)
    n = len(columns[names[0]]) if names else 0
    for i in range(n):
        w.writerow([_fmt(columns[c][i]) for c in names])
    return buf.getvalue()


def write_output(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


# -- state providers ---------------------------------------------------------

def _effective_trajectory(times, gamma: float, omega: float, dt: float) -> list[np.ndarray]:
    """RK4 states at ``times`` for the |eg> preparation (``dt`` in units of 1/omega)."""
    p = SystemParams.from_omega(omega, gamma)
    times = np.asarray(times, dtype=float)
    order = np.argsort(times, kind="stable")
    uniq, inverse = np.unique(times[order], return_inverse=True)
    traj = integrate_effective(projector("eg"), p, uniq, IntegratorConfig(dt=dt / omega))
    states = [None] * len(times)
    for pos, idx in zip(order, inverse):
        states[pos] = traj.states[idx].matrix
    return states


def _states(cfg: RunConfig, times, gamma: float, omega: float = 1.0) -> list[np.ndarray]:
    if cfg.oracle:
        return _effective_trajectory(times, gamma, omega, cfg.dt)
    return [analytic.evolved_state(t, gamma, omega) for t in times]


def _gamma_axis(cfg: RunConfig) -> list[float]:
    if cfg.gamma_ratio is not None:
        return list(cfg.gamma_ratio)
    return [float(g) for g in np.linspace(0.0, cfg.gamma_max, cfg.grid)]


def _time_axis(cfg: RunConfig) -> np.ndarray:
    return np.linspace(0.0, cfg.t_max, cfg.grid)


# -- commands ----------------------------------------------------------------

def cmd_fig2(cfg: RunConfig) -> dict:
    """Joint probabilities at fixed ``lambda t`` versus ``lambda/delta``."""
    lt = cfg.t_max
    ratios = np.linspace(cfg.ld_min, cfg.ld_max, cfg.grid)
    cols = {"gamma_over_lambda": [], "lambda_over_delta": [], "p_eg": [], "p_ge": [], "p_gg": []}
    for g in cfg.gamma_ratio:
        for ld in ratios:
            ld = float(ld)
            p = SystemParams(lam=1.0, delta=1.0 / ld, gamma=g)
            if cfg.full_model:
                step = IntegratorConfig(dt=cfg.dt / p.delta)
                rho = integrate_full(projector("eg"), p, FockTruncation(cfg.n_max), [lt], step).states[0].matrix
            elif cfg.oracle:
                rho = _effective_trajectory([lt], g, ld, cfg.dt)[0]
            else:
                rho = analytic.evolved_state(lt, g, ld)
            p_eg, p_ge, p_gg, _ = metrics.joint_probabilities(rho)
            for key, val in zip(cols, (g, ld, p_eg, p_ge, p_gg)):
                cols[key].append(val)
    return cols


def cmd_fig3(cfg: RunConfig) -> dict:
    """Bell signal versus analyzer angle at the interaction times ``t_k``."""
    phis = np.linspace(0.0, 2.0 * np.pi, cfg.grid)
    cols = {"k": [], "gamma_over_omega": [], "phi": [], "beta": []}
    for k in cfg.k:
        tk = analytic.interaction_time(k, 1.0)
        for g in cfg.gamma_ratio:
            rho = _states(cfg, [tk], g)[0]
            for phi in phis:
                cols["k"].append(k)
                cols["gamma_over_omega"].append(g)
                cols["phi"].append(float(phi))
                cols["beta"].append(metrics.bell_signal(rho, float(phi)))
    return cols


def _time_gamma_grid(cfg: RunConfig, name: str, func) -> dict:
    times = _time_axis(cfg)
    cols = {"gamma_over_omega": [], "omega_t": [], name: []}
    for g in _gamma_axis(cfg):
        for t, rho in zip(times, _states(cfg, times, g)):
            cols["gamma_over_omega"].append(g)
            cols["omega_t"].append(float(t))
            cols[name].append(func(rho))
    return cols


def cmd_fig5(cfg: RunConfig) -> dict:
    """Best teleportation fidelity on an (omega t, gamma/omega) grid."""
    return _time_gamma_grid(cfg, "fmax", metrics.max_teleport_fidelity)


def cmd_fig6(cfg: RunConfig) -> dict:
    """Concurrence on an (omega t, gamma/omega) grid."""
    return _time_gamma_grid(cfg, "concurrence", metrics.concurrence)


def cmd_threshold(cfg: RunConfig) -> dict:
    """Closed-form decay threshold per ``k`` next to a bisection on F_max."""
    state = None
    xtol = 1e-13
    if cfg.oracle:
        xtol = 1e-10

        def state(t, g):
            return _effective_trajectory([t], g, 1.0, cfg.dt)[0]

    cols = {"k": [], "omega_t_k": [], "gamma_max_over_omega": [], "bisection_gamma_over_omega": [],
            "relative_error": []}
    for k in cfg.k:
        formula = analytic.gamma_max(k, 1.0)
        found = verification.bisect_gamma_max(k, 1.0, xtol=xtol, state=state)
        for key, val in zip(cols, (k, analytic.interaction_time(k, 1.0), formula, found,
                                   abs(found - formula) / formula)):
            cols[key].append(val)
    return cols


def cmd_sweep(cfg: RunConfig) -> dict:
    """Every channel measure on an (omega t, gamma/omega) grid."""
    times = _time_axis(cfg)
    cols: dict = {"gamma_over_omega": [], "omega_t": []}
    for g in _gamma_axis(cfg):
        for t, rho in zip(times, _states(cfg, times, g)):
            row = metrics.channel_report(rho).as_row()
            cols["gamma_over_omega"].append(g)
            cols["omega_t"].append(float(t))
            for key, val in row.items():
                cols.setdefault(key, []).append(val)
    return cols


def cmd_verify(cfg: RunConfig) -> tuple[dict, bool]:
    """Run the acceptance checks; returns the report columns and overall status."""
    checks = verification.run_checks(cfg.only or None)
    cols = {"group": [], "name": [], "passed": [], "value": [], "expected": [], "tolerance": [], "detail": []}
    for c in checks:
        for key in cols:
            cols[key].append(getattr(c, key))
        print(c.line(), file=sys.stderr)
    ok = all(c.passed for c in checks)
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks)} checks, {failed} failed", file=sys.stderr)
    return cols, ok


HANDLERS = {
    "fig2": cmd_fig2,
    "fig3": cmd_fig3,
    "fig5": cmd_fig5,
    "fig6": cmd_fig6,
    "threshold": cmd_threshold,
    "sweep": cmd_sweep,
}


# -- argument parsing --------------------------------------------------------

def _common(p: argparse.ArgumentParser):
    p.add_argument("--gamma-ratio", type=float, action="append", dest="gamma_ratio",
                   help="decay ratio (gamma/omega, or gamma/lambda for fig2); repeatable")
    p.add_argument("--k", type=int, action="append", help="interaction-time index; repeatable")
    p.add_argument("--grid", type=int, help="number of grid points per axis")
    p.add_argument("--t-max", type=float, dest="t_max", help="end of the time axis (omega t; lambda t for fig2)")
    p.add_argument("--oracle", action="store_true", default=None, help="use RK4 integration instead of the closed form")
    p.add_argument("--dt", type=float, help="RK4 step (units of 1/omega; 1/delta with --full-model)")
    p.add_argument("--n-max", type=int, dest="n_max", help="Fock-space cutoff for the full model")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), help="output format (default csv)")
    p.add_argument("--config", help="JSON file of defaults; flags take precedence")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cavityteleport", description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "fig2": "joint detection probabilities versus lambda/delta",
        "fig3": "Bell signal versus analyzer angle",
        "fig5": "best teleportation fidelity over (omega t, gamma/omega)",
        "fig6": "concurrence over (omega t, gamma/omega)",
        "threshold": "maximum decay rate that beats the classical 2/3",
        "verify": "run the acceptance checks",
        "sweep": "all channel measures over (omega t, gamma/omega)",
    }
    for name in COMMANDS:
        p = sub.add_parser(name, help=helps[name])
        _common(p)
        if name == "fig2":
            p.add_argument("--ld-min", type=float, dest="ld_min", help="smallest lambda/delta (default 0.01)")
            p.add_argument("--ld-max", type=float, dest="ld_max", help="largest lambda/delta (default 0.33)")
            p.add_argument("--full-model", action="store_true", default=None, dest="full_model",
                           help="integrate the atom-field model instead of the effective one")
        if name in ("fig5", "fig6", "sweep"):
            p.add_argument("--gamma-max", type=float, dest="gamma_max",
                           help="upper end of the gamma/omega axis when no --gamma-ratio is given (default 1)")
        if name == "verify":
            p.add_argument("--only", action="append", choices=verification.GROUPS,
                           help="run only this check group; repeatable")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cli = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    try:
        file_values = load_config_file(args.config) if args.config else None
        cfg = resolve_config(args.command, cli, file_values)
        echo = cfg.echo(ECHO[cfg.command])
        if cfg.command == "verify":
            cols, ok = cmd_verify(cfg)
            write_output(render(cols, echo, cfg.format), cfg.out)
            return 0 if ok else 1
        cols = HANDLERS[cfg.command](cfg)
        write_output(render(cols, echo, cfg.format), cfg.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
