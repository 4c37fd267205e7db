"""JSON problem configs: schema validation, loading, saving, and the docking preset.

Schema (version 1), matrices as row-major nested arrays, SI units throughout:

    {
      "schema": 1,
      "dynamics": {"A": [[...]], "B": [[...]], "w": [...]}          # w optional
                  or {"rotating_station": {"omega": [wx, wy, wz]}}  # rad/s
                  or {"rotating_station": {"omega_rpm": [...]}},    # converted once
      "cones": [{"type": "ray", "direction": [...]},
                {"type": "facets", "C": [[...]]},
                {"type": "unconstrained"}],
      "rho1": ..., "rho2": ..., "K": ...,
      "x0": [...],
      "terminal": {"type": "fixed_state", "x_f": [...]}
                  or {"type": "fix_components", "indices": [...], "values": [...]}
                  or {"type": "free"},                    # optional "pins_time": bool
      "cost": {"kind": "min_time"}
              or {"kind": "affine", "q": [...], "time_weight": ...}
              or {"kind": "quadratic", "target": [...], "W": [[...]]},
      "N": ...,
      "t_f": ... or "bracket": [lo, hi],                  # both optional, not both
      "tol_t": ...,                                       # optional, default 1e-2
      "solver": {"tol_feas": ..., "tol_gap": ..., "max_iters": ..., "verbose": ...}
    }

Every validation error names the failing field path.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .conic import SolverOptions
from .dynamics import LtiSystem, station_dynamics
from .geometry import PointingCone
from .problem import (
    AffineTerminalCost,
    MinimumTimeCost,
    ProblemSpec,
    QuadraticTerminalCost,
    TerminalSpec,
)

__all__ = ["ConfigError", "ProblemConfig", "load_config", "save_config", "docking_preset"]

SCHEMA_VERSION = 1

RPM_TO_RAD_S = np.pi / 30.0


class ConfigError(ValueError):
    """Config validation failure; `path` names the offending field."""

    def __init__(self, path: str, message: str):
        self.path = path or "<root>"
        super().__init__(f"{self.path}: {message}")


@dataclass(frozen=True)
class ProblemConfig:
    """A parsed config: the problem spec plus solve directives."""

    spec: ProblemSpec
    N: int
    t_f: float = None
    bracket: tuple = None
    tol_t: float = 1e-2
    solver_options: SolverOptions = None

    def options(self) -> SolverOptions:
        return self.solver_options if self.solver_options is not None else SolverOptions()


def _require(obj: dict, key: str, path: str):
    if key not in obj:
        raise ConfigError(f"{path}.{key}" if path else key, "missing required field")
    return obj[key]


def _no_extras(obj: dict, allowed, path: str):
    for key in obj:
        if key not in allowed:
            raise ConfigError(f"{path}.{key}" if path else key, "unknown field")


def _vector(value, path: str, length: int = None) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(path, "expected a numeric vector") from None
    if arr.ndim != 1:
        raise ConfigError(path, f"expected a 1-D vector, got shape {arr.shape}")
    if length is not None and arr.size != length:
        raise ConfigError(path, f"expected length {length}, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ConfigError(path, "entries must be finite")
    return arr


def _matrix(value, path: str, cols: int = None) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(path, "expected a numeric matrix") from None
    if arr.ndim != 2:
        raise ConfigError(path, f"expected a 2-D matrix, got shape {arr.shape}")
    if cols is not None and arr.shape[1] != cols:
        raise ConfigError(path, f"expected {cols} columns, got {arr.shape[1]}")
    if not np.all(np.isfinite(arr)):
        raise ConfigError(path, "entries must be finite")
    return arr


def _number(value, path: str, positive: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, "expected a number")
    v = float(value)
    if not np.isfinite(v):
        raise ConfigError(path, "must be finite")
    if positive and v <= 0:
        raise ConfigError(path, "must be positive")
    return v


def _integer(value, path: str, minimum: int = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(path, "expected an integer")
    if minimum is not None and value < minimum:
        raise ConfigError(path, f"must be at least {minimum}")
    return value


def _parse_dynamics(block, path: str) -> LtiSystem:
    if not isinstance(block, dict):
        raise ConfigError(path, "expected an object")
    if "rotating_station" in block:
        _no_extras(block, {"rotating_station"}, path)
        sub = block["rotating_station"]
        spath = f"{path}.rotating_station"
        if not isinstance(sub, dict):
            raise ConfigError(spath, "expected an object")
        _no_extras(sub, {"omega", "omega_rpm"}, spath)
        if ("omega" in sub) == ("omega_rpm" in sub):
            raise ConfigError(spath, "give exactly one of omega (rad/s) or omega_rpm")
        if "omega" in sub:
            omega = _vector(sub["omega"], f"{spath}.omega", 3)
        else:
            omega = _vector(sub["omega_rpm"], f"{spath}.omega_rpm", 3) * RPM_TO_RAD_S
        return station_dynamics(omega)
    _no_extras(block, {"A", "B", "w"}, path)
    A = _matrix(_require(block, "A", path), f"{path}.A")
    if A.shape[0] != A.shape[1]:
        raise ConfigError(f"{path}.A", "must be square")
    B = _matrix(_require(block, "B", path), f"{path}.B")
    if B.shape[0] != A.shape[0]:
        raise ConfigError(f"{path}.B", f"row count must match A ({A.shape[0]})")
    w = None
    if "w" in block:
        w = _vector(block["w"], f"{path}.w", A.shape[0])
    try:
        return LtiSystem(A=A, B=B, w=w)
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from None


def _parse_cone(entry, path: str, m: int) -> PointingCone:
    if not isinstance(entry, dict):
        raise ConfigError(path, "expected an object")
    kind = _require(entry, "type", path)
    try:
        if kind == "ray":
            _no_extras(entry, {"type", "direction"}, path)
            direction = _vector(_require(entry, "direction", path), f"{path}.direction", m)
            return PointingCone.from_ray(direction)
        if kind == "facets":
            _no_extras(entry, {"type", "C"}, path)
            C = _matrix(_require(entry, "C", path), f"{path}.C", m)
            return PointingCone.from_facets(C)
        if kind == "unconstrained":
            _no_extras(entry, {"type"}, path)
            return PointingCone.unconstrained(m)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from None
    raise ConfigError(f"{path}.type", f"unknown cone type {kind!r}")


def _parse_cost(block, path: str, n: int):
    if not isinstance(block, dict):
        raise ConfigError(path, "expected an object")
    kind = _require(block, "kind", path)
    if kind == "min_time":
        _no_extras(block, {"kind"}, path)
        return MinimumTimeCost()
    if kind == "affine":
        _no_extras(block, {"kind", "q", "time_weight"}, path)
        q = _vector(_require(block, "q", path), f"{path}.q", n)
        tw = _number(block.get("time_weight", 0.0), f"{path}.time_weight")
        try:
            return AffineTerminalCost(q=q, time_weight=tw)
        except ValueError as exc:
            raise ConfigError(path, str(exc)) from None
    if kind == "quadratic":
        _no_extras(block, {"kind", "target", "W"}, path)
        target = _vector(_require(block, "target", path), f"{path}.target", n)
        W = None
        if "W" in block:
            W = _matrix(block["W"], f"{path}.W", n)
        return QuadraticTerminalCost(target=target, W=W)
    raise ConfigError(f"{path}.kind", f"unknown cost kind {kind!r}")


def _parse_terminal(block, path: str, n: int, cost) -> TerminalSpec:
    if not isinstance(block, dict):
        raise ConfigError(path, "expected an object")
    kind = _require(block, "type", path)
    pins_time = block.get("pins_time", False)
    if not isinstance(pins_time, bool):
        raise ConfigError(f"{path}.pins_time", "expected a boolean")
    try:
        if kind == "fixed_state":
            _no_extras(block, {"type", "x_f", "pins_time"}, path)
            x_f = _vector(_require(block, "x_f", path), f"{path}.x_f", n)
            return TerminalSpec.fixed_state(x_f, cost, pins_time=pins_time)
        if kind == "fix_components":
            _no_extras(block, {"type", "indices", "values", "pins_time"}, path)
            idx_raw = _require(block, "indices", path)
            if not isinstance(idx_raw, list) or not all(
                isinstance(i, int) and not isinstance(i, bool) for i in idx_raw
            ):
                raise ConfigError(f"{path}.indices", "expected a list of integers")
            if any(i < 0 or i >= n for i in idx_raw):
                raise ConfigError(f"{path}.indices", f"indices must lie in [0, {n})")
            values = _vector(_require(block, "values", path), f"{path}.values", len(idx_raw))
            return TerminalSpec.fix_components(n, idx_raw, values, cost, pins_time=pins_time)
        if kind == "free":
            _no_extras(block, {"type", "pins_time"}, path)
            return TerminalSpec.free(n, cost, pins_time=pins_time)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from None
    raise ConfigError(f"{path}.type", f"unknown terminal type {kind!r}")


def _parse_solver(block, path: str) -> SolverOptions:
    if not isinstance(block, dict):
        raise ConfigError(path, "expected an object")
    _no_extras(block, {"tol_feas", "tol_gap", "max_iters", "verbose"}, path)
    kwargs = {}
    if "tol_feas" in block:
        kwargs["tol_feas"] = _number(block["tol_feas"], f"{path}.tol_feas", positive=True)
    if "tol_gap" in block:
        kwargs["tol_gap"] = _number(block["tol_gap"], f"{path}.tol_gap", positive=True)
    if "max_iters" in block:
        kwargs["max_iters"] = _integer(block["max_iters"], f"{path}.max_iters", minimum=1)
    if "verbose" in block:
        if not isinstance(block["verbose"], bool):
            raise ConfigError(f"{path}.verbose", "expected a boolean")
        kwargs["verbose"] = block["verbose"]
    return SolverOptions(**kwargs)


def load_config(source) -> ProblemConfig:
    """Parse a config from a dict, a JSON string, or a file path.

    Raises ConfigError naming the failing field on any schema violation.
    """
    if isinstance(source, dict):
        data = source
    elif isinstance(source, str) and source.lstrip().startswith("{"):
        try:
            data = json.loads(source)
        except json.JSONDecodeError as exc:
            raise ConfigError("", f"invalid JSON: {exc}") from None
    else:
        try:
            with open(source) as f:
                data = json.load(f)
        except OSError as exc:
            raise ConfigError("", f"cannot read config: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError("", f"invalid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("", "top level must be an object")

    allowed = {
        "schema", "dynamics", "cones", "rho1", "rho2", "K", "x0",
        "terminal", "cost", "N", "t_f", "bracket", "tol_t", "solver",
    }
    _no_extras(data, allowed, "")
    version = _require(data, "schema", "")
    if version != SCHEMA_VERSION:
        raise ConfigError("schema", f"unsupported schema version {version!r}")

    sys = _parse_dynamics(_require(data, "dynamics", ""), "dynamics")
    cones_raw = _require(data, "cones", "")
    if not isinstance(cones_raw, list) or not cones_raw:
        raise ConfigError("cones", "expected a non-empty list")
    cones = tuple(
        _parse_cone(entry, f"cones[{j}]", sys.m) for j, entry in enumerate(cones_raw)
    )
    rho1 = _number(_require(data, "rho1", ""), "rho1", positive=True)
    rho2 = _number(_require(data, "rho2", ""), "rho2", positive=True)
    K = _integer(_require(data, "K", ""), "K", minimum=1)
    x0 = _vector(_require(data, "x0", ""), "x0", sys.n)
    cost = _parse_cost(_require(data, "cost", ""), "cost", sys.n)
    terminal = _parse_terminal(_require(data, "terminal", ""), "terminal", sys.n, cost)
    N = _integer(_require(data, "N", ""), "N", minimum=2)

    t_f = None
    bracket = None
    if "t_f" in data and "bracket" in data:
        raise ConfigError("t_f", "give t_f or bracket, not both")
    if "t_f" in data:
        t_f = _number(data["t_f"], "t_f", positive=True)
    if "bracket" in data:
        pair = _vector(data["bracket"], "bracket", 2)
        if not (0 < pair[0] < pair[1]):
            raise ConfigError("bracket", "must satisfy 0 < lo < hi")
        bracket = (float(pair[0]), float(pair[1]))
    tol_t = _number(data.get("tol_t", 1e-2), "tol_t", positive=True)
    solver_options = _parse_solver(data["solver"], "solver") if "solver" in data else None

    try:
        spec = ProblemSpec(
            sys=sys, cones=cones, rho1=rho1, rho2=rho2, K=K, x0=x0, terminal=terminal
        )
    except ValueError as exc:
        raise ConfigError("", str(exc)) from None
    return ProblemConfig(
        spec=spec, N=N, t_f=t_f, bracket=bracket, tol_t=tol_t, solver_options=solver_options
    )


def save_config(data: dict, path: str) -> None:
    """Write a config dict as formatted JSON."""
    with open(path, "w") as f:
        json.dump(data, f, indent=2, sort_keys=True)
        f.write("\n")


def _canted(axis_sign_pairs, base, angle_deg):
    """Directions obtained by rotating `base` by angle_deg about each listed axis."""
    out = []
    theta = np.deg2rad(angle_deg)
    for axis in axis_sign_pairs:
        a = np.asarray(axis, dtype=float)
        # Rodrigues rotation of base about unit axis a.
        v = np.asarray(base, dtype=float)
        rotated = (
            v * np.cos(theta)
            + np.cross(a, v) * np.sin(theta)
            + a * (a @ v) * (1.0 - np.cos(theta))
        )
        out.append([float(c) for c in rotated])
    return out


def docking_thruster_directions() -> list:
    """Twelve body-frame thrust directions: four canted 40 degrees off +z,
    four canted 30 degrees off -z, and the four lateral unit vectors."""
    x, y = (1.0, 0.0, 0.0), (0.0, 1.0, 0.0)
    neg_x, neg_y = (-1.0, 0.0, 0.0), (0.0, -1.0, 0.0)
    dirs = []
    dirs += _canted([x, neg_x, y, neg_y], (0.0, 0.0, 1.0), 40.0)
    dirs += _canted([x, neg_x, y, neg_y], (0.0, 0.0, -1.0), 30.0)
    dirs += [[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, -1.0, 0.0]]
    return dirs


def docking_preset() -> dict:
    """Config for the rotating-station docking benchmark: 12 thrust directions
    with an activation budget of 4, millimeter-per-second-squared thrust
    bounds, approach from (5, 5, 100) m to a gentle -z contact velocity,
    minimum time over a 300-node grid."""
    return {
        "schema": SCHEMA_VERSION,
        "dynamics": {"rotating_station": {"omega_rpm": [0.0, 0.0, 1.0]}},
        "cones": [{"type": "ray", "direction": d} for d in docking_thruster_directions()],
        "rho1": 1.0e-3,
        "rho2": 1.0e-2,
        "K": 4,
        "x0": [5.0, 5.0, 100.0, 0.0, 0.0, 0.0],
        "terminal": {
            "type": "fixed_state",
            "x_f": [0.0, 0.0, 0.0, 0.0, 0.0, -0.01],
        },
        "cost": {"kind": "min_time"},
        "N": 300,
        "bracket": [60.0, 240.0],
        "tol_t": 0.5,
    }
