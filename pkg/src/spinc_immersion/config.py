"""Scenario run configuration, loaded from YAML.

Example::

    kind: torus_family
    params: {a: 0.6}
    resolutions: [32, 64, 128]    # or a single `resolution: 64`
    A1: ["0", "0"]                # du, dv coefficients (expression grammar)
    A2: ["0", "0"]
    gauge_twist: "u"              # phase used by the gauge covariance check
    eta: ["cos(u)"]               # f-basis coefficients of a normal section
    tolerances: {killing_residual: 5.0e-3}
    ratio_window: [3.2, 4.8]
    debug: {zero_b: false, zero_nu: false, zero_a: false, perturb_a: 0.0}

See ``expressions`` for the grammar accepted in A1, A2, gauge_twist and eta.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping, Optional

import yaml

from .expressions import ExpressionError, ScalarField
from .geometry import MIN_RESOLUTION, Scenario, ScenarioError

DEFAULT_RATIO_WINDOW = (3.2, 4.8)
_KEYS = {"kind", "params", "resolution", "resolutions", "A1", "A2", "gauge_twist", "eta", "tolerances", "ratio_window", "debug"}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class DebugFlags:
    zero_b: bool = False
    zero_nu: bool = False
    zero_a: bool = False
    perturb_a: float = 0.0

    def as_dict(self) -> dict[str, Any]:
        return {"zero_b": self.zero_b, "zero_nu": self.zero_nu, "zero_a": self.zero_a, "perturb_a": self.perturb_a}


@dataclass(frozen=True)
class RunConfig:
    scenario: Scenario
    resolutions: tuple[tuple[int, ...], ...]
    gauge_twist: Optional[ScalarField] = None
    eta: Optional[tuple[ScalarField, ...]] = None
    tolerances: Mapping[str, float] = field(default_factory=dict)
    ratio_window: tuple[float, float] = DEFAULT_RATIO_WINDOW
    debug: DebugFlags = DebugFlags()

    def with_resolutions(self, resolutions) -> RunConfig:
        return replace(self, resolutions=normalize_resolutions(resolutions, self.scenario.p))


def parse_resolution(r, p: int) -> tuple[int, ...]:
    if isinstance(r, bool):
        raise ConfigError("resolution must be an integer or a list of integers")
    if isinstance(r, int):
        res = (r,) * p
    elif isinstance(r, (list, tuple)) and all(isinstance(v, int) and not isinstance(v, bool) for v in r):
        res = tuple(r)
    else:
        raise ConfigError(f"invalid resolution {r!r}")
    if len(res) != p:
        raise ConfigError(f"resolution {r!r} needs {p} entr{'y' if p == 1 else 'ies'}")
    if min(res) < MIN_RESOLUTION:
        raise ConfigError(f"resolution {r!r} is below the minimum of {MIN_RESOLUTION} per axis")
    return res


def normalize_resolutions(value, p: int) -> tuple[tuple[int, ...], ...]:
    """A list of levels; each level is an int (all axes) or a list of p ints."""
    if not isinstance(value, (list, tuple)):
        return (parse_resolution(value, p),)
    if not value:
        raise ConfigError("resolutions must not be empty")
    return tuple(parse_resolution(v, p) for v in value)


def _one_form(value, name: str) -> tuple[ScalarField, ScalarField]:
    if value is None:
        return (ScalarField.zero(), ScalarField.zero())
    if not isinstance(value, (list, tuple)) or not 1 <= len(value) <= 2:
        raise ConfigError(f"{name} must be a list of one or two coefficient expressions (du, dv)")
    try:
        parts = [ScalarField.parse(v) for v in value]
    except ExpressionError as exc:
        raise ConfigError(f"{name}: {exc}") from None
    return tuple(parts + [ScalarField.zero()] * (2 - len(parts)))


def config_from_mapping(data: Mapping[str, Any]) -> RunConfig:
    if not isinstance(data, Mapping):
        raise ConfigError("config must be a mapping")
    unknown = set(data) - _KEYS
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    if "kind" not in data:
        raise ConfigError("config is missing 'kind'")
    params = data.get("params") or {}
    if not isinstance(params, Mapping) or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in params.values()):
        raise ConfigError("params must map names to numbers")
    try:
        scenario = Scenario(
            str(data["kind"]), dict(params), _one_form(data.get("A1"), "A1"), _one_form(data.get("A2"), "A2")
        )
    except ScenarioError as exc:
        raise ConfigError(str(exc)) from None
    if "resolutions" in data:
        resolutions = normalize_resolutions(data["resolutions"], scenario.p)
    elif "resolution" in data:
        resolutions = (parse_resolution(data["resolution"], scenario.p),)
    else:
        resolutions = ((64,) * scenario.p,)
    try:
        twist = ScalarField.parse(data["gauge_twist"]) if data.get("gauge_twist") is not None else None
        eta = tuple(ScalarField.parse(v) for v in data["eta"]) if data.get("eta") is not None else None
    except ExpressionError as exc:
        raise ConfigError(str(exc)) from None
    q = scenario.ambient - 1 - scenario.p
    if eta is not None and len(eta) != q:
        raise ConfigError(f"eta needs {q} coefficient(s) for this scenario, got {len(eta)}")
    tolerances = data.get("tolerances") or {}
    if not isinstance(tolerances, Mapping) or not all(isinstance(v, (int, float)) and v > 0 for v in tolerances.values()):
        raise ConfigError("tolerances must map check names to positive numbers")
    window = tuple(data.get("ratio_window") or DEFAULT_RATIO_WINDOW)
    if len(window) != 2 or not 0 < window[0] < window[1]:
        raise ConfigError(f"invalid ratio_window {window!r}")
    dbg = data.get("debug") or {}
    try:
        debug = DebugFlags(**dbg)
    except TypeError as exc:
        raise ConfigError(f"debug: {exc}") from None
    return RunConfig(scenario, resolutions, twist, eta, dict(tolerances), (float(window[0]), float(window[1])), debug)


def load_config(path: str | Path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None
    return config_from_mapping(data)
