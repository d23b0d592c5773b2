"""Dielectric permittivity models on the imaginary frequency axis.

Four kinds are supported: Drude metals, Lorentz oscillator sums (an
oscillator with zero resonance frequency is a Drude term, which is how doped
semiconductors are written), monotone interpolation of tabulated
eps(i xi) data and constants.  Default models live in ``data/materials.yaml``;
a different directory can be selected with the ``CASIMIR_MATERIALS_DIR``
environment variable.
"""
from __future__ import annotations

import enum
import math
import os
import warnings
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
import yaml
from scipy.interpolate import PchipInterpolator

from .core import EV_TO_RAD_S, ConfigError, DomainError

MATERIALS_ENV = "CASIMIR_MATERIALS_DIR"
MATERIALS_FILE = "materials.yaml"


class IngestionError(ConfigError):
    """A permittivity table or material definition failed validation."""


class ExtrapolationWarning(UserWarning):
    """A tabulated model was queried outside its frequency range."""


class ModelKind(enum.Enum):
    DRUDE = "drude"
    LORENTZ_OSCILLATORS = "lorentz"
    TABULATED = "tabulated"
    CONSTANT = "constant"


@dataclass(frozen=True)
class Oscillator:
    """Term f / (omega0^2 + xi^2 + gamma xi); all frequencies in rad/s, f in (rad/s)^2."""

    f: float
    omega0: float
    gamma: float = 0.0


@dataclass(frozen=True, eq=False)
class PermittivityModel:
    kind: ModelKind
    name: str = ""
    value: float = 1.0
    plasma: float = 0.0
    damping: float = 0.0
    oscillators: tuple = ()
    table_xi: np.ndarray | None = None
    table_eps: np.ndarray | None = None

    @classmethod
    def constant(cls, value, name=""):
        if not value >= 1:
            raise DomainError(f"a passive medium needs eps >= 1 on the imaginary axis, got {value}")
        return cls(ModelKind.CONSTANT, name, value=float(value))

    @classmethod
    def drude(cls, plasma_ev, damping_ev, name=""):
        if plasma_ev < 0 or damping_ev < 0:
            raise DomainError("Drude parameters must be non-negative")
        return cls(ModelKind.DRUDE, name, plasma=plasma_ev * EV_TO_RAD_S, damping=damping_ev * EV_TO_RAD_S)

    @classmethod
    def lorentz(cls, oscillators, eps_inf=1.0, name=""):
        oscillators = tuple(oscillators)
        if eps_inf < 1:
            raise DomainError("eps_inf must be >= 1")
        for osc in oscillators:
            if osc.f < 0 or osc.omega0 < 0 or osc.gamma < 0:
                raise DomainError("oscillator parameters must be non-negative")
        return cls(ModelKind.LORENTZ_OSCILLATORS, name, value=float(eps_inf), oscillators=oscillators)

    @classmethod
    def tabulated(cls, xi, eps, name=""):
        xi = np.asarray(xi, dtype=float)
        eps = np.asarray(eps, dtype=float)
        if xi.ndim != 1 or xi.shape != eps.shape or xi.size < 2:
            raise IngestionError("a table needs at least two (xi, eps) rows")
        if np.any(xi <= 0):
            raise IngestionError("tabulated frequencies must be positive")
        if np.any(np.diff(xi) <= 0):
            raise IngestionError("tabulated frequencies must be strictly increasing")
        if np.any(eps < 1):
            raise IngestionError("tabulated eps(i xi) must be >= 1")
        xi.setflags(write=False)
        eps.setflags(write=False)
        return cls(ModelKind.TABULATED, name, table_xi=xi, table_eps=eps)

    def __call__(self, xi):
        return eps_imag_axis(self, xi)


_PCHIP_CACHE: dict[int, PchipInterpolator] = {}


def _pchip(model):
    key = id(model.table_xi)
    interp = _PCHIP_CACHE.get(key)
    if interp is None:
        interp = PchipInterpolator(np.log(model.table_xi), model.table_eps, extrapolate=False)
        _PCHIP_CACHE[key] = interp
    return interp


def eps_imag_axis(model: PermittivityModel, xi):
    """eps(i xi) for ``xi`` >= 0 in rad/s (scalar or array).

    Drude models return +inf at xi = 0.
    """
    x = np.asarray(xi, dtype=float)
    if np.any(x < 0):
        raise DomainError("xi must be non-negative")
    kind = model.kind
    if kind is ModelKind.CONSTANT:
        out = np.full(x.shape, model.value)
    elif kind is ModelKind.DRUDE:
        with np.errstate(divide="ignore"):
            out = 1.0 + model.plasma**2 / (x * (x + model.damping))
        out = np.where(x == 0, math.inf, out) if model.plasma > 0 else np.ones(x.shape)
    elif kind is ModelKind.LORENTZ_OSCILLATORS:
        out = np.full(x.shape, model.value)
        with np.errstate(divide="ignore"):
            for osc in model.oscillators:
                out = out + osc.f / (osc.omega0**2 + x * x + osc.gamma * x)
    else:
        lo, hi = model.table_xi[0], model.table_xi[-1]
        if np.any((x < lo) | (x > hi)):
            warnings.warn(
                f"table {model.name or '<unnamed>'} queried outside [{lo:.3e}, {hi:.3e}] rad/s; "
                "using the nearest end value",
                ExtrapolationWarning,
                stacklevel=2,
            )
        xc = np.clip(x, lo, hi)
        out = _pchip(model)(np.log(xc))
        # pass exactly through the nodes
        out = np.where(xc == lo, model.table_eps[0], np.where(xc == hi, model.table_eps[-1], out))
    return float(out) if out.ndim == 0 else out


def eps_xi2(model: PermittivityModel, xi):
    """eps(i xi) * xi^2 in (rad/s)^2 with the finite xi -> 0 limit of metals.

    A plasma model (zero damping) keeps omega_p^2 at xi = 0, a Drude metal
    with damping and a zero-frequency Lorentz term with damping go to 0.
    """
    x = np.asarray(xi, dtype=float)
    kind = model.kind
    if kind is ModelKind.DRUDE:
        with np.errstate(divide="ignore", invalid="ignore"):
            out = x * x + model.plasma**2 * np.where(x > 0, x / (x + model.damping), 1.0 if model.damping == 0 else 0.0)
    elif kind is ModelKind.LORENTZ_OSCILLATORS:
        out = model.value * x * x
        for osc in model.oscillators:
            if osc.omega0 > 0:
                out = out + osc.f * x * x / (osc.omega0**2 + x * x + osc.gamma * x)
            else:
                with np.errstate(divide="ignore", invalid="ignore"):
                    frac = np.where(x > 0, x / (x + osc.gamma), 1.0 if osc.gamma == 0 else 0.0)
                out = out + osc.f * frac
    else:
        out = np.asarray(eps_imag_axis(model, x)) * x * x
    return float(out) if np.ndim(out) == 0 else out


def is_metallic(model: PermittivityModel) -> bool:
    """True when eps(i xi) diverges at xi = 0."""
    if model.kind is ModelKind.DRUDE:
        return model.plasma > 0
    if model.kind is ModelKind.LORENTZ_OSCILLATORS:
        return any(o.omega0 == 0 and o.f > 0 for o in model.oscillators)
    return False


# ---------------------------------------------------------------------------
# ingestion


def load_table(path, format="two_column", name=None) -> PermittivityModel:
    """Read a two-column ``xi  eps(i xi)`` table.

    ``#`` starts a comment; an optional header line ``units: rad/s`` or
    ``units: eV`` sets the frequency unit (default rad/s).
    """
    if format != "two_column":
        raise IngestionError(f"unsupported table format {format!r}")
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise IngestionError(f"cannot read table {path}: {exc}") from exc
    scale = 1.0
    rows = []
    problems = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.lower().startswith("units:"):
            unit = line.split(":", 1)[1].strip()
            if unit == "eV":
                scale = EV_TO_RAD_S
            elif unit in ("rad/s", "rad s^-1"):
                scale = 1.0
            else:
                problems.append(f"line {lineno}: unknown unit {unit!r}")
            continue
        parts = line.split()
        try:
            if len(parts) != 2:
                raise ValueError
            x, e = float(parts[0]), float(parts[1])
        except ValueError:
            problems.append(f"line {lineno}: expected two numbers, got {raw.strip()!r}")
            continue
        if not (math.isfinite(x) and math.isfinite(e)):
            problems.append(f"line {lineno}: non-finite value")
        elif e < 1:
            problems.append(f"line {lineno}: eps = {e} < 1")
        rows.append((lineno, x, e))
    for (l1, x1, _), (l2, x2, _) in zip(rows, rows[1:]):
        if not x2 > x1:
            problems.append(f"line {l2}: frequency {x2} not above line {l1} ({x1})")
    if problems:
        raise IngestionError(f"invalid permittivity table {path}:\n  " + "\n  ".join(problems))
    if len(rows) < 2:
        raise IngestionError(f"table {path} has fewer than two rows")
    xi = np.array([r[1] for r in rows]) * scale
    eps = np.array([r[2] for r in rows])
    return PermittivityModel.tabulated(xi, eps, name=name or path.stem)


_FREQ_UNITS = {"rad/s": 1.0, "eV": EV_TO_RAD_S}


def model_from_dict(name, spec, base_dir=None) -> PermittivityModel:
    """Build a model from a mapping as found in ``materials.yaml``."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise IngestionError(f"material {name!r} needs a mapping with a 'kind'")
    spec = dict(spec)
    kind = spec.pop("kind")
    try:
        if kind == "constant":
            model = PermittivityModel.constant(float(spec.pop("eps")), name)
        elif kind == "drude":
            model = PermittivityModel.drude(float(spec.pop("plasma_eV")), float(spec.pop("damping_eV")), name)
        elif kind == "lorentz":
            unit = spec.pop("units", "rad/s")
            if unit not in _FREQ_UNITS:
                raise IngestionError(f"material {name!r}: unknown unit {unit!r}")
            scale = _FREQ_UNITS[unit]
            oscs = []
            for entry in spec.pop("oscillators", []):
                entry = dict(entry)
                w0 = float(entry.pop("frequency", 0.0)) * scale
                g = float(entry.pop("damping", 0.0)) * scale
                if "strength" in entry:
                    f = float(entry.pop("strength")) * w0 * w0
                elif "plasma" in entry:
                    f = (float(entry.pop("plasma")) * scale) ** 2
                else:
                    raise IngestionError(f"material {name!r}: oscillator needs 'strength' or 'plasma'")
                if entry:
                    raise IngestionError(f"material {name!r}: unknown oscillator keys {sorted(entry)}")
                oscs.append(Oscillator(f, w0, g))
            model = PermittivityModel.lorentz(oscs, float(spec.pop("eps_inf", 1.0)), name)
        elif kind == "tabulated":
            table = Path(spec.pop("path"))
            if not table.is_absolute() and base_dir is not None:
                table = Path(base_dir) / table
            model = load_table(table, spec.pop("format", "two_column"), name=name)
        else:
            raise IngestionError(f"material {name!r}: unknown kind {kind!r}")
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, DomainError):
            raise IngestionError(f"material {name!r}: {exc}") from exc
        raise IngestionError(f"material {name!r}: missing or malformed field ({exc})") from exc
    if spec:
        raise IngestionError(f"material {name!r}: unknown keys {sorted(spec)}")
    return model


def materials_dir() -> Path | None:
    env = os.environ.get(MATERIALS_ENV)
    return Path(env) if env else None


def load_materials(path=None) -> dict[str, PermittivityModel]:
    """Load a material library; defaults to ``$CASIMIR_MATERIALS_DIR`` or the shipped file."""
    if path is None:
        d = materials_dir()
        if d is not None:
            path = d / MATERIALS_FILE
    if path is None:
        ref = resources.files("casimir_graphene") / "data" / MATERIALS_FILE
        text = ref.read_text()
        base = None
    else:
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise IngestionError(f"cannot read material library {path}: {exc}") from exc
        base = path.parent
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise IngestionError(f"material library is not valid YAML: {exc}") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("materials"), dict):
        raise IngestionError("material library needs a top-level 'materials' mapping")
    unknown = set(doc) - {"version", "materials"}
    if unknown:
        raise IngestionError(f"material library: unknown keys {sorted(unknown)}")
    return {name: model_from_dict(name, spec, base) for name, spec in doc["materials"].items()}
