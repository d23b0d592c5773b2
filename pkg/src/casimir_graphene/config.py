"""Scenario configuration files.

Configs are YAML documents with a ``version`` field.  Lengths are given in
nm (sphere radius in um), temperatures in K and the mass gap in eV.  Unknown
keys are errors, reported with their line numbers.  Every subcommand has a
built-in default config; a user file overrides individual keys.
"""
from __future__ import annotations

import copy
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .core import ConfigError, DomainError, GrapheneParams
from .materials import IngestionError, PermittivityModel, load_materials
from .poltensor import EvaluationMethod
from .reflect import IDEAL_METAL, VACUUM, LayerStack

CONFIG_VERSION = 1

_GRAPHENE_SHEET = {"graphene": True, "films": [], "substrate": "vacuum"}

DEFAULTS = {
    "fig1": {
        "temperature": 300.0,
        "graphene": {"delta_eV": 0.0},
        "fig1": {"points": 200, "k_over_xi1": 10.0, "xi_max_over_xi1": 10.0},
    },
    "fig3": {
        "temperature": 300.0,
        "separations": {"min_nm": 10.0, "max_nm": 100.0, "count": 60, "spacing": "log"},
        "graphene": {"delta_eV": 0.0},
        "body1": _GRAPHENE_SHEET,
        "body2": _GRAPHENE_SHEET,
    },
    "fig4": {
        "temperature": 300.0,
        "separations": {"min_nm": 20.0, "max_nm": 600.0, "count": 60, "spacing": "log"},
        "graphene": {"delta_eV": 0.0},
        "body1": _GRAPHENE_SHEET,
        "body2": _GRAPHENE_SHEET,
    },
    "thermal": {
        "temperature": 300.0,
        "separations": {"min_nm": 20.0, "max_nm": 600.0, "count": 60, "spacing": "log"},
        "graphene": {"delta_eV": 0.0},
        "body1": _GRAPHENE_SHEET,
        "body2": _GRAPHENE_SHEET,
        "thermal": {"static_term": "zero_t"},
    },
    "experiment": {
        "temperature": 300.0,
        "separations": {"min_nm": 224.0, "max_nm": 500.0, "count": 30, "spacing": "linear"},
        "graphene": {"delta_eV": 0.0},
        "body1": {"graphene": False, "films": [], "substrate": "Au"},
        "body2": {"graphene": True, "films": [{"material": "SiO2", "thickness_nm": 300.0}], "substrate": "Si_B_doped"},
        "method": "exact",
        "experiment": {"sphere_radius_um": 54.1},
    },
    "pressure": {
        "temperature": 300.0,
        "separations": {"values_nm": [100.0]},
        "graphene": {"delta_eV": 0.0},
        "body1": _GRAPHENE_SHEET,
        "body2": _GRAPHENE_SHEET,
        "method": "exact",
    },
    "responses": {
        "temperature": 300.0,
        "graphene": {"delta_eV": 0.0},
        "method": "exact",
        "responses": {
            "l_values": [1, 2, 5],
            "k": {"min": 1e6, "max": 1e9, "count": 7, "spacing": "log"},
        },
    },
}

_COMMON_KEYS = {"version", "scenario", "temperature", "graphene", "materials_file", "tolerance", "method"}
_ALLOWED = {
    "fig1": _COMMON_KEYS | {"fig1"},
    "fig3": _COMMON_KEYS | {"separations", "body1", "body2"},
    "fig4": _COMMON_KEYS | {"separations", "body1", "body2"},
    "thermal": _COMMON_KEYS | {"separations", "body1", "body2", "thermal"},
    "experiment": _COMMON_KEYS | {"separations", "body1", "body2", "experiment"},
    "pressure": _COMMON_KEYS | {"separations", "body1", "body2"},
    "responses": _COMMON_KEYS | {"responses"},
}
_SUBKEYS = {
    "graphene": {"delta_eV", "vf_ratio", "alpha"},
    "separations": {"min_nm", "max_nm", "count", "spacing", "values_nm"},
    "tolerance": {"k_rtol"},
    "fig1": {"points", "k_over_xi1", "xi_max_over_xi1"},
    "thermal": {"static_term"},
    "experiment": {"sphere_radius_um", "compare_thickness_nm"},
    "responses": {"l_values", "k"},
    "body1": {"graphene", "films", "substrate"},
    "body2": {"graphene", "films", "substrate"},
}

SUBCOMMANDS = tuple(DEFAULTS)


# ---------------------------------------------------------------------------
# YAML with line numbers

_SCALARS = yaml.SafeLoader("")


def _to_python(node, path, lines):
    lines[path] = node.start_mark.line + 1
    if isinstance(node, yaml.MappingNode):
        out = {}
        for key_node, value_node in node.value:
            key = key_node.value
            if key in out:
                raise ConfigError(f"line {key_node.start_mark.line + 1}: duplicate key {key!r}")
            out[key] = _to_python(value_node, path + (key,), lines)
        return out
    if isinstance(node, yaml.SequenceNode):
        return [_to_python(v, path + (i,), lines) for i, v in enumerate(node.value)]
    return _SCALARS.construct_object(node)


def load_yaml_with_lines(text):
    """Parse YAML; returns ``(data, lines)`` with ``lines[key_path] = line number``."""
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config is not valid YAML: {exc}") from exc
    lines = {}
    if node is None:
        return {}, lines
    return _to_python(node, (), lines), lines


# ---------------------------------------------------------------------------
# scenario config


@dataclass
class ScenarioConfig:
    subcommand: str
    data: dict
    lines: dict = field(default_factory=dict)
    base_dir: Path | None = None

    def where(self, *path):
        line = self.lines.get(tuple(path))
        return f"line {line}: " if line else ""

    def error(self, path, message):
        return ConfigError(f"{self.where(*path)}{'.'.join(map(str, path))}: {message}")

    # -- typed accessors -------------------------------------------------
    @property
    def temperature(self) -> float:
        T = self._number(("temperature",))
        if not T > 0:
            raise self.error(("temperature",), "must be positive")
        return T

    @property
    def method(self) -> EvaluationMethod:
        try:
            return EvaluationMethod.parse(self.data.get("method", "exact"))
        except ValueError as exc:
            raise self.error(("method",), str(exc)) from exc

    @property
    def k_rtol(self) -> float:
        tol = self.data.get("tolerance", {}).get("k_rtol", 1e-8)
        if not (isinstance(tol, (int, float)) and 0 < tol < 1):
            raise self.error(("tolerance", "k_rtol"), "must be a number in (0, 1)")
        return float(tol)

    def graphene_params(self) -> GrapheneParams:
        g = self.data.get("graphene", {})
        try:
            return GrapheneParams(
                delta=float(g.get("delta_eV", 0.0)),
                vf_ratio=float(g.get("vf_ratio", 1.0 / 300.0)),
                alpha_override=None if g.get("alpha") is None else float(g["alpha"]),
            )
        except (DomainError, TypeError, ValueError) as exc:
            raise self.error(("graphene",), str(exc)) from exc

    def separations(self) -> np.ndarray:
        s = self.data.get("separations")
        if s is None:
            raise self.error(("separations",), "missing")
        if "values_nm" in s:
            if set(s) - {"values_nm"}:
                raise self.error(("separations",), "values_nm excludes min/max/count/spacing")
            vals = np.asarray(s["values_nm"], dtype=float)
        else:
            missing = {"min_nm", "max_nm", "count"} - set(s)
            if missing:
                raise self.error(("separations",), f"missing {sorted(missing)}")
            lo, hi, n = float(s["min_nm"]), float(s["max_nm"]), s["count"]
            spacing = s.get("spacing", "log")
            if not isinstance(n, int) or n < 1:
                raise self.error(("separations", "count"), "must be a positive integer")
            if not 0 < lo <= hi:
                raise self.error(("separations",), "need 0 < min_nm <= max_nm")
            if spacing == "log":
                vals = np.geomspace(lo, hi, n)
            elif spacing == "linear":
                vals = np.linspace(lo, hi, n)
            else:
                raise self.error(("separations", "spacing"), "must be 'log' or 'linear'")
        if vals.ndim != 1 or vals.size == 0 or np.any(vals <= 0) or np.any(np.diff(vals) <= 0):
            raise self.error(("separations",), "separations must be positive and strictly increasing")
        return vals * 1e-9

    def materials(self):
        path = self.data.get("materials_file")
        if path is not None:
            path = Path(path)
            if not path.is_absolute() and self.base_dir is not None:
                path = self.base_dir / path
        try:
            return load_materials(path)
        except IngestionError as exc:
            raise ConfigError(f"{self.where('materials_file')}{exc}") from exc

    def body(self, name) -> LayerStack:
        spec = self.data.get(name)
        if spec is None:
            raise self.error((name,), "missing")
        mats = self.materials()

        def medium(value, path):
            if value == "vacuum":
                return VACUUM
            if value == "ideal_metal":
                return IDEAL_METAL
            if value not in mats:
                raise self.error(path, f"unknown material {value!r}; known: {sorted(mats)}")
            return mats[value]

        films = []
        for i, f in enumerate(spec.get("films") or []):
            path = (name, "films", i)
            if not isinstance(f, dict) or set(f) != {"material", "thickness_nm"}:
                raise self.error(path, "a film needs exactly 'material' and 'thickness_nm'")
            model = medium(f["material"], path + ("material",))
            if not isinstance(model, PermittivityModel):
                raise self.error(path, "films must be permittivity models")
            d = f["thickness_nm"]
            if not (isinstance(d, (int, float)) and d > 0):
                raise self.error(path + ("thickness_nm",), "must be positive")
            films.append((model, float(d) * 1e-9))
        use_graphene = spec.get("graphene", False)
        if not isinstance(use_graphene, bool):
            raise self.error((name, "graphene"), "must be true or false")
        try:
            return LayerStack(
                graphene=self.graphene_params() if use_graphene else None,
                films=tuple(films),
                substrate=medium(spec.get("substrate", "vacuum"), (name, "substrate")),
            )
        except ConfigError as exc:
            raise self.error((name,), str(exc)) from exc

    def section(self, name) -> dict:
        return self.data.get(name, {})

    def _number(self, path):
        v = self.data
        for p in path:
            v = v.get(p) if isinstance(v, dict) else None
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            raise self.error(path, "must be a number")
        return float(v)

    def effective_yaml(self) -> str:
        doc = {"version": CONFIG_VERSION, "scenario": self.subcommand}
        doc.update({k: v for k, v in self.data.items() if k not in ("version", "scenario")})
        return yaml.safe_dump(doc, sort_keys=True, default_flow_style=False)


def _merge(base, override):
    out = copy.deepcopy(base)
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict) and k not in ("separations",):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def _validate_keys(sub, data, lines):
    for key in data:
        if key not in _ALLOWED[sub]:
            line = lines.get((key,))
            where = f"line {line}: " if line else ""
            raise ConfigError(f"{where}unknown key {key!r} for '{sub}' (allowed: {sorted(_ALLOWED[sub])})")
        allowed = _SUBKEYS.get(key)
        if allowed is not None:
            if not isinstance(data[key], dict):
                line = lines.get((key,))
                raise ConfigError(f"{'line %d: ' % line if line else ''}{key!r} must be a mapping")
            for sk in data[key]:
                if sk not in allowed:
                    line = lines.get((key, sk))
                    where = f"line {line}: " if line else ""
                    raise ConfigError(f"{where}unknown key {key}.{sk} (allowed: {sorted(allowed)})")


def load_config(subcommand, path=None, text=None) -> ScenarioConfig:
    """Build the effective config of ``subcommand`` from its defaults and a YAML file."""
    if subcommand not in DEFAULTS:
        raise ConfigError(f"unknown subcommand {subcommand!r}")
    user, lines, base_dir = {}, {}, None
    if path is not None:
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        base_dir = path.parent
    if text is not None:
        user, lines = load_yaml_with_lines(text)
        if not isinstance(user, dict):
            raise ConfigError("config must be a mapping at the top level")
        if "version" not in user:
            raise ConfigError("config needs a 'version' field")
        if user["version"] != CONFIG_VERSION:
            raise ConfigError(f"{'line %d: ' % lines.get(('version',), 0)}unsupported config version {user['version']!r}")
        scen = user.get("scenario")
        if scen is not None and scen != subcommand:
            raise ConfigError(f"line {lines.get(('scenario',))}: config is for '{scen}', not '{subcommand}'")
        _validate_keys(subcommand, user, lines)
    data = _merge(DEFAULTS[subcommand], user)
    data.pop("version", None)
    data.pop("scenario", None)
    _validate_keys(subcommand, data, lines)
    return ScenarioConfig(subcommand, data, lines, base_dir)
