"""Run configuration: TOML (primary) or JSON, validated before any compute.

Every block is checked against its known keys and unknown keys are
rejected by name, so typos fail fast instead of silently running with
defaults. The canonical JSON serialization of the parsed file is hashed
into every output file's metadata line, which is what makes reruns
byte-identical and attributable.
"""

from __future__ import annotations

import hashlib
import json
import sys
from dataclasses import dataclass, field

import numpy as np

try:
    import tomllib as _toml
except ModuleNotFoundError:  # python < 3.11
    import tomli as _toml

from .bands import BrillouinGrid
from .errors import ConfigError, InvalidArgumentError
from .oracle import OracleConfig
from .potential import FourierPotential, potential_from_config

_TOP_KEYS = {"potential", "grid", "solver", "amplitude", "sweep", "times", "oracle", "output"}


@dataclass(frozen=True)
class SolverSettings:
    M: int = 100
    j_max: int = 1


@dataclass(frozen=True)
class RunConfig:
    raw: dict
    config_sha256: str
    potential: FourierPotential | None
    grid: BrillouinGrid
    solver: SolverSettings
    amplitude: dict | None  # validated block, built against a grid later
    sweep_alphas: np.ndarray | None
    times: np.ndarray | None
    oracle: OracleConfig
    output_dir: str | None

    def require(self, name: str):
        value = getattr(self, {"sweep": "sweep_alphas"}.get(name, name))
        if value is None:
            raise ConfigError(f"this command needs a '{name}' block in the config")
        return value


def _reject_unknown(block: dict, allowed: set, context: str):
    extra = set(block) - allowed
    if extra:
        raise ConfigError(f"unknown key in {context}: {sorted(extra)[0]!r}")


def _as_float(block: dict, key: str, context: str, default=None):
    if key not in block:
        if default is None:
            raise ConfigError(f"{context} needs '{key}'")
        return default
    try:
        return float(block[key])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{context}.{key}: {exc}") from exc


def _as_int(block: dict, key: str, context: str, default=None):
    if key not in block:
        if default is None:
            raise ConfigError(f"{context} needs '{key}'")
        return default
    v = block[key]
    if isinstance(v, bool) or v != int(v):
        raise ConfigError(f"{context}.{key} must be an integer, got {v!r}")
    return int(v)


def _parse_grid(block: dict) -> BrillouinGrid:
    _reject_unknown(block, {"count", "delta_z"}, "grid block")
    try:
        return BrillouinGrid(
            count=_as_int(block, "count", "grid", default=2001),
            delta_z=_as_float(block, "delta_z", "grid", default=1e-6),
        )
    except InvalidArgumentError as exc:
        raise ConfigError(str(exc)) from exc


def _parse_solver(block: dict) -> SolverSettings:
    _reject_unknown(block, {"M", "j_max"}, "solver block")
    M = _as_int(block, "M", "solver", default=100)
    j_max = _as_int(block, "j_max", "solver", default=1)
    if M < 1:
        raise ConfigError(f"solver.M must be >= 1, got {M}")
    if j_max < 0:
        raise ConfigError(f"solver.j_max must be >= 0, got {j_max}")
    return SolverSettings(M=M, j_max=j_max)


def _parse_sweep(block: dict) -> np.ndarray:
    _reject_unknown(block, {"alphas", "log_range"}, "sweep block")
    if ("alphas" in block) == ("log_range" in block):
        raise ConfigError("sweep block needs exactly one of 'alphas' or 'log_range'")
    if "alphas" in block:
        try:
            alphas = np.array([float(a) for a in block["alphas"]], dtype=float)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"sweep.alphas: {exc}") from exc
    else:
        rng = block["log_range"]
        if not isinstance(rng, dict):
            raise ConfigError("sweep.log_range must be a table")
        _reject_unknown(rng, {"start", "stop", "points"}, "sweep.log_range")
        start = _as_float(rng, "start", "sweep.log_range")
        stop = _as_float(rng, "stop", "sweep.log_range")
        points = _as_int(rng, "points", "sweep.log_range")
        if start <= 0 or stop <= 0 or points < 2:
            raise ConfigError("sweep.log_range needs positive start/stop and points >= 2")
        alphas = np.geomspace(start, stop, points)
    if len(alphas) == 0 or np.any(alphas <= 0) or not np.all(np.isfinite(alphas)):
        raise ConfigError("sweep must produce a nonempty list of positive couplings")
    return alphas


def _parse_times(block: dict) -> np.ndarray:
    _reject_unknown(block, {"values", "start", "stop", "count"}, "times block")
    if "values" in block:
        if set(block) != {"values"}:
            raise ConfigError("times block: 'values' excludes start/stop/count")
        try:
            ts = np.array([float(t) for t in block["values"]], dtype=float)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"times.values: {exc}") from exc
    else:
        start = _as_float(block, "start", "times")
        stop = _as_float(block, "stop", "times")
        count = _as_int(block, "count", "times")
        if count < 1 or stop < start:
            raise ConfigError("times block needs stop >= start and count >= 1")
        ts = np.linspace(start, stop, count)
    if len(ts) == 0 or not np.all(np.isfinite(ts)):
        raise ConfigError("times must be a nonempty finite list")
    return ts


def _parse_oracle(block: dict) -> OracleConfig:
    _reject_unknown(block, {"window", "samples_log2", "t"}, "oracle block")
    try:
        return OracleConfig(
            window=_as_float(block, "window", "oracle", default=512.0),
            samples_log2=_as_int(block, "samples_log2", "oracle", default=16),
            t=_as_float(block, "t", "oracle", default=0.0),
        )
    except InvalidArgumentError as exc:
        raise ConfigError(str(exc)) from exc


def _parse_amplitude(block: dict) -> dict:
    if not isinstance(block, dict):
        raise ConfigError("amplitude block must be a table")
    if "csv" in block:
        _reject_unknown(block, {"csv"}, "amplitude block")
        if not isinstance(block["csv"], str):
            raise ConfigError("amplitude.csv must be a path string")
        return dict(block)
    _reject_unknown(block, {"bands"}, "amplitude block")
    if "bands" not in block:
        raise ConfigError("amplitude block needs 'bands' entries or a 'csv' path")
    return dict(block)


def _parse_output(block: dict) -> str:
    _reject_unknown(block, {"dir"}, "output block")
    if not isinstance(block.get("dir"), str):
        raise ConfigError("output.dir must be a path string")
    return block["dir"]


def validate_config(raw: dict) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a table")
    _reject_unknown(raw, _TOP_KEYS, "config")
    for key in raw:
        if not isinstance(raw[key], dict):
            raise ConfigError(f"config block {key!r} must be a table")
    digest = hashlib.sha256(
        json.dumps(raw, sort_keys=True, separators=(",", ":"), default=str).encode()
    ).hexdigest()
    return RunConfig(
        raw=raw,
        config_sha256=digest,
        potential=potential_from_config(raw["potential"]) if "potential" in raw else None,
        grid=_parse_grid(raw.get("grid", {})),
        solver=_parse_solver(raw.get("solver", {})),
        amplitude=_parse_amplitude(raw["amplitude"]) if "amplitude" in raw else None,
        sweep_alphas=_parse_sweep(raw["sweep"]) if "sweep" in raw else None,
        times=_parse_times(raw["times"]) if "times" in raw else None,
        oracle=_parse_oracle(raw.get("oracle", {})),
        output_dir=_parse_output(raw["output"]) if "output" in raw else None,
    )


def load_config(path: str) -> RunConfig:
    """Parse and validate a config file; '-' reads stdin.

    TOML is the primary format; content whose first non-space byte is '{'
    (or a .json path) is parsed as JSON instead.
    """
    if path == "-":
        text = sys.stdin.read()
        name = "<stdin>"
    else:
        try:
            with open(path, "r") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
        name = path
    stripped = text.lstrip()
    as_json = name.endswith(".json") or stripped.startswith("{")
    try:
        if as_json:
            raw = json.loads(text)
        else:
            raw = _toml.loads(text)
    except (json.JSONDecodeError, _toml.TOMLDecodeError) as exc:
        raise ConfigError(f"{name}: cannot parse config: {exc}") from exc
    return validate_config(raw)
