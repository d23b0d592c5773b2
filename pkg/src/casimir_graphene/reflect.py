"""Reflection coefficients at imaginary Matsubara frequencies.

A boundary is described by a :class:`LayerStack`: an optional graphene sheet
on top of zero or more dielectric films on top of a substrate.  Films are
folded in from the substrate upwards with the two-interface recursion.  The
sheet is then combined with the layered medium below it through its surface
admittance (TM: pi00/k^2, TE: pi/k^2), written so that a vacuum substrate
reproduces the free-sheet coefficients exactly.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .core import CONSTANTS, ConfigError, DomainError, GrapheneParams, matsubara_frequency
from .materials import PermittivityModel, eps_imag_axis, eps_xi2
from .poltensor import EvaluationMethod, PolTensorValue, pol_tensor_multi, y_l, _require_gapless


@dataclass(frozen=True)
class ReflectionPair:
    r_tm: float
    r_te: float
    l: Optional[int] = None
    k_perp: Optional[float] = None


class Boundary(enum.Enum):
    VACUUM = "vacuum"
    IDEAL_METAL = "ideal_metal"


VACUUM = Boundary.VACUUM
IDEAL_METAL = Boundary.IDEAL_METAL

Medium = Union[PermittivityModel, Boundary]


@dataclass(frozen=True)
class LayerStack:
    """Half-space boundary: optional graphene on films on a substrate.

    ``films`` is ordered from the top (facing the gap) downwards, each entry a
    ``(PermittivityModel, thickness_m)`` pair.
    """

    graphene: Optional[GrapheneParams] = None
    films: tuple = ()
    substrate: Medium = VACUUM

    def __post_init__(self):
        films = tuple(tuple(f) for f in self.films)
        object.__setattr__(self, "films", films)
        for entry in films:
            if len(entry) != 2:
                raise ConfigError("each film is a (model, thickness) pair")
            model, d = entry
            if not isinstance(model, PermittivityModel):
                raise ConfigError(f"film material must be a permittivity model, got {model!r}")
            if not (isinstance(d, (int, float)) and d > 0 and math.isfinite(d)):
                raise ConfigError(f"film thickness must be positive and finite, got {d!r}")
        if not isinstance(self.substrate, (PermittivityModel, Boundary)):
            raise ConfigError(f"substrate must be a permittivity model, VACUUM or IDEAL_METAL, got {self.substrate!r}")
        if self.graphene is not None and not isinstance(self.graphene, GrapheneParams):
            raise ConfigError("graphene must be GrapheneParams or None")

    @property
    def is_vacuum(self) -> bool:
        return self.graphene is None and not self.films and self.substrate is VACUUM


# ---------------------------------------------------------------------------
# elementary coefficients


def graphene_free(pt: PolTensorValue, l, k_perp, T) -> ReflectionPair:
    """Free-standing sheet: r_TM = q pi00/(q pi00 + 2k^2), r_TE = -pi/(pi + 2k^2 q)."""
    if not k_perp > 0:
        raise DomainError("graphene reflection needs k_perp > 0")
    xi = matsubara_frequency(l, T)
    q = math.hypot(k_perp, xi / CONSTANTS.c)
    p00, p = pt.pi00_over_hbar, pt.pi_over_hbar
    k2 = k_perp * k_perp
    return ReflectionPair(q * p00 / (q * p00 + 2.0 * k2), -p / (p + 2.0 * k2 * q), l, float(k_perp))


def graphene_asymptotic_arrays(l, k_perp, T, params: GrapheneParams, y=None):
    """Closed-form coefficients with the asymptotic thermal correction (``l`` >= 1)."""
    _require_gapless(params)
    if np.any(np.asarray(l) < 1):
        raise DomainError("the asymptotic coefficients apply to l >= 1")
    l, k = np.broadcast_arrays(np.asarray(l), np.asarray(k_perp, dtype=float))
    s = matsubara_frequency(l, T) / CONSTANTS.c
    q = np.hypot(k, s)
    qt = np.hypot(params.vf_ratio * k, s)
    if y is None:
        uniq, inverse = np.unique(l, return_inverse=True)
        y = np.array([y_l(int(v)) for v in uniq])[inverse].reshape(k.shape)
    g = params.alpha * (math.pi + y)
    return g * q / (g * q + 2.0 * qt), -g * qt / (g * qt + 2.0 * q)


def graphene_asymptotic(l, k_perp, T, params: GrapheneParams) -> ReflectionPair:
    rtm, rte = graphene_asymptotic_arrays(l, k_perp, T, params)
    return ReflectionPair(float(rtm), float(rte), l, float(k_perp))


def fresnel_halfspace(eps, xi, k_perp) -> ReflectionPair:
    """Fresnel coefficients of a half-space with permittivity ``eps`` = eps(i xi)."""
    if not eps >= 1:
        raise DomainError(f"eps(i xi) must be >= 1 for a passive medium, got {eps}")
    if xi < 0 or k_perp < 0:
        raise DomainError("xi and k_perp must be non-negative")
    if math.isinf(eps):
        return ReflectionPair(1.0, -1.0, None, float(k_perp))
    s = xi / CONSTANTS.c
    q = math.hypot(k_perp, s)
    qe = math.sqrt(k_perp * k_perp + eps * s * s)
    return ReflectionPair((eps * q - qe) / (eps * q + qe), (q - qe) / (q + qe), None, float(k_perp))


# ---------------------------------------------------------------------------
# layered media


def _q_medium(k, exi2):
    return np.sqrt(k * k + exi2 / CONSTANTS.c**2)


def _medium_props(medium, xi, k):
    """``(eps, q_m)`` of a bulk medium; eps may be +inf for metals at xi = 0."""
    if medium is VACUUM:
        return np.ones_like(k), _q_medium(k, xi * xi)
    eps = np.broadcast_to(np.asarray(eps_imag_axis(medium, xi)), k.shape)
    return eps, _q_medium(k, np.broadcast_to(np.asarray(eps_xi2(medium, xi)), k.shape))


def _interface(eps_i, q_i, eps_j, q_j):
    """TM and TE coefficients for a wave in medium i reflected at medium j."""
    with np.errstate(invalid="ignore", divide="ignore"):
        tm = (eps_j * q_i - eps_i * q_j) / (eps_j * q_i + eps_i * q_j)
    inf_i = np.isinf(eps_i)
    inf_j = np.isinf(eps_j)
    tm = np.where(inf_j & ~inf_i, 1.0, np.where(inf_i & ~inf_j, -1.0, np.where(inf_i & inf_j, 0.0, tm)))
    te = (q_i - q_j) / (q_i + q_j)
    return tm, te


def _fold(r_top, R_below):
    return (r_top + R_below) / (1.0 + r_top * R_below)


def stack_reflection_arrays(stack: LayerStack, xi, k_perp, T, method=EvaluationMethod.EXACT, l=None, tensor=None):
    """``(r_tm, r_te)`` on broadcast arrays of ``xi`` and ``k_perp``.

    ``l`` gives the Matsubara indices for ``xi`` (needed by the approximate
    tensor methods); ``tensor`` may supply a precomputed ``(pi00, pi)`` pair
    for the graphene sheet.
    """
    xi, k = np.broadcast_arrays(np.asarray(xi, dtype=float), np.asarray(k_perp, dtype=float))
    if stack.substrate is IDEAL_METAL and not stack.films:
        return np.ones(k.shape), -np.ones(k.shape)
    if stack.graphene is None and not stack.films and stack.substrate is VACUUM:
        return np.zeros(k.shape), np.zeros(k.shape)

    # innermost first: rho is the reflection at the bottom of the current
    # film seen from inside it, folded upwards through every film
    if stack.films:
        props = [_medium_props(m, xi, k) for m, _ in stack.films]
        if stack.substrate is IDEAL_METAL:
            rho_tm, rho_te = np.ones(k.shape), -np.ones(k.shape)
        else:
            rho_tm, rho_te = _interface(*props[-1], *_medium_props(stack.substrate, xi, k))
        for idx in range(len(props) - 1, -1, -1):
            decay = np.exp(-2.0 * props[idx][1] * stack.films[idx][1])
            rho_tm, rho_te = rho_tm * decay, rho_te * decay
            if idx > 0:
                t_tm, t_te = _interface(*props[idx - 1], *props[idx])
                rho_tm, rho_te = _fold(t_tm, rho_tm), _fold(t_te, rho_te)
        top_eps, top_q = props[0]
    else:
        top_eps, top_q = _medium_props(stack.substrate, xi, k)
        rho_tm = rho_te = np.zeros(k.shape)

    q = _q_medium(k, xi * xi)
    if stack.graphene is not None:
        if tensor is None:
            tensor = pol_tensor_multi(xi, k, T, stack.graphene, [method], l)[EvaluationMethod.parse(method)]
        p00, p = tensor
        with np.errstate(divide="ignore", invalid="ignore"):
            ys_tm = p00 / (k * k)
            ys_te = p / (k * k)
    else:
        ys_tm = ys_te = 0.0

    # TM in impedance-ratio form so that a metal (eps = inf) gives r = 1
    with np.errstate(divide="ignore", invalid="ignore"):
        zf = top_q / top_eps
        ratio = top_q / (top_eps * q)
    a = 1.0 + rho_tm
    b = 1.0 - rho_tm
    base = a - ratio * b
    sheet = ys_tm * zf * b
    rtm = (base + sheet) / (a + ratio * b + sheet)
    a = 1.0 + rho_te
    b = 1.0 - rho_te
    base = q * a - top_q * b
    sheet = ys_te * a
    rte = (base - sheet) / (q * a + top_q * b + sheet)
    return rtm, rte


def stack_reflection(stack: LayerStack, l, k_perp, T, method=EvaluationMethod.EXACT) -> ReflectionPair:
    """Reflection pair of ``stack`` at Matsubara index ``l``."""
    if stack.graphene is not None and not k_perp > 0:
        raise DomainError("a graphene-coated stack needs k_perp > 0")
    if k_perp < 0:
        raise DomainError("k_perp must be non-negative")
    xi = matsubara_frequency(l, T)
    rtm, rte = stack_reflection_arrays(stack, xi, np.array([float(k_perp)]), T, method, l=np.array([l]))
    return ReflectionPair(float(rtm[0]), float(rte[0]), l, float(k_perp))
