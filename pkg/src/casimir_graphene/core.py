"""Physical constants, parameter types and exceptions shared by all modules.

Everything is SI internally: frequencies in rad/s, wave numbers in rad/m,
energies in J.  The graphene mass gap is accepted in eV and converted once.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import constants as _sc


class CasimirError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(CasimirError, ValueError):
    """An argument lies outside the domain of the requested quantity."""


class UnsupportedConfigurationError(CasimirError):
    """The requested method is not available for the given parameters."""


class NumericalError(CasimirError, ArithmeticError):
    """A quadrature or summation failed to reach its tolerance."""

    def __init__(self, message: str, **diagnostics):
        self.diagnostics = diagnostics
        if diagnostics:
            details = ", ".join(f"{k}={v!r}" for k, v in diagnostics.items())
            message = f"{message} ({details})"
        super().__init__(message)


class ConfigError(CasimirError):
    """Malformed stack, material table or scenario configuration."""


@dataclass(frozen=True)
class PhysicalConstants:
    c: float = _sc.c
    hbar: float = _sc.hbar
    k_B: float = _sc.k
    alpha: float = _sc.fine_structure
    e: float = _sc.e

    def __post_init__(self):
        for name in ("c", "hbar", "k_B", "alpha", "e"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")


CONSTANTS = PhysicalConstants()

#: conversion factor from eV to rad/s (E = hbar * omega)
EV_TO_RAD_S = CONSTANTS.e / CONSTANTS.hbar

DEFAULT_VF_RATIO = 1.0 / 300.0


@dataclass(frozen=True)
class GrapheneParams:
    """Dirac-model graphene sheet.

    Parameters
    ----------
    delta : float
        mass-gap parameter in eV (0 for pristine graphene)
    vf_ratio : float
        Fermi velocity in units of the speed of light
    alpha_override : float, optional
        replaces the fine-structure constant (useful for the transparent limit)
    """

    delta: float = 0.0
    vf_ratio: float = DEFAULT_VF_RATIO
    alpha_override: Optional[float] = None

    def __post_init__(self):
        if not (self.delta >= 0 and math.isfinite(self.delta)):
            raise DomainError(f"mass gap must be >= 0 eV, got {self.delta}")
        if not 0 < self.vf_ratio < 1:
            raise DomainError(f"vf_ratio must lie in (0, 1), got {self.vf_ratio}")
        if self.alpha_override is not None and self.alpha_override < 0:
            raise DomainError("alpha_override must be non-negative")

    @property
    def alpha(self) -> float:
        return CONSTANTS.alpha if self.alpha_override is None else self.alpha_override

    @property
    def delta_joule(self) -> float:
        return self.delta * CONSTANTS.e

    @property
    def gap_wavenumber(self) -> float:
        """Mass gap expressed as a wave number, Delta / (hbar c), in rad/m."""
        return self.delta_joule / (CONSTANTS.hbar * CONSTANTS.c)


def matsubara_frequency(l, T):
    """Matsubara frequency xi_l = 2 pi k_B T l / hbar in rad/s."""
    if not T > 0:
        raise DomainError(f"temperature must be positive, got {T}")
    if np.any(np.asarray(l) < 0):
        raise DomainError("Matsubara index must be non-negative")
    return 2.0 * math.pi * CONSTANTS.k_B * T / CONSTANTS.hbar * l


@dataclass(frozen=True)
class ThermalState:
    temperature: float
    matsubara_index: int

    def __post_init__(self):
        if not self.temperature > 0:
            raise DomainError("temperature must be positive")
        if self.matsubara_index < 0:
            raise DomainError("Matsubara index must be non-negative")

    @property
    def xi_l(self) -> float:
        return matsubara_frequency(self.matsubara_index, self.temperature)


def q_factors(xi, k_perp, params: GrapheneParams):
    """Return ``(q, q_tilde)`` for imaginary frequency ``xi`` and wave number ``k_perp``.

    q^2 = k^2 + xi^2/c^2 and q_tilde^2 = (v_F/c)^2 k^2 + xi^2/c^2.
    Works elementwise on arrays.
    """
    s = np.asarray(xi, dtype=float) / CONSTANTS.c
    k = np.asarray(k_perp, dtype=float)
    q = np.hypot(k, s)
    q_tilde = np.hypot(params.vf_ratio * k, s)
    if q.ndim == 0:
        return float(q), float(q_tilde)
    return q, q_tilde
