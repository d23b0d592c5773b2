"""Response functions of graphene derived from the polarization tensor.

Polarizabilities and permittivities are dimensionless and unit-free.  The
density-density correlation functions and conductivities are Gaussian-unit
quantities; they are reported in the Gaussian system with ``e^2 = alpha hbar c``
(e^2 in J m) and carry a unit tag instead of being converted to SI:

* chi: 1/(J m^2)  (density response per unit potential energy)
* sigma: m/s      (2D sheet conductivity has velocity dimension)

Entries that divide by the frequency are NaN at xi = 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .core import CONSTANTS, DomainError
from .poltensor import PolTensorValue
from .reflect import ReflectionPair

GAUSSIAN_UNITS = {
    "chi": "1/(J m^2), Gaussian, e^2 = alpha hbar c",
    "sigma": "m/s, Gaussian",
}


@dataclass(frozen=True)
class ResponseSet:
    alpha_par: float
    alpha_perp: float
    eps_par: float
    eps_perp: float
    chi_par: float
    chi_perp: float
    sigma_par: float
    sigma_perp: float
    units: dict = field(default_factory=lambda: dict(GAUSSIAN_UNITS), compare=False)


def _e2():
    # squared electron charge in Gaussian units, expressed in J m
    return CONSTANTS.alpha * CONSTANTS.hbar * CONSTANTS.c


def responses_from_tensor(pt: PolTensorValue, xi_l: float, k_perp: float) -> ResponseSet:
    """Polarizabilities, permittivities, correlation functions and conductivities.

    Parameters
    ----------
    pt : PolTensorValue
        tensor at (xi_l, k_perp), as Pi/hbar values
    xi_l : float
        imaginary frequency in rad/s
    k_perp : float
        in-plane wave number in rad/m, must be positive
    """
    if not k_perp > 0:
        raise DomainError("response functions need k_perp > 0")
    if xi_l < 0:
        raise DomainError("xi must be non-negative")
    c = CONSTANTS.c
    e2 = _e2()
    pi00 = pt.pi00_over_hbar
    pi = pt.pi_over_hbar
    a_par = pi00 / (2.0 * k_perp)
    chi_par = -pi00 / (4.0 * math.pi * e2)
    sig_par = xi_l * pi00 / (4.0 * math.pi * k_perp**2)
    if xi_l > 0:
        a_perp = c * c * pi / (2.0 * k_perp * xi_l**2)
        chi_perp = -c * c * pi / (4.0 * math.pi * e2 * xi_l**2)
        sig_perp = c * c * pi / (4.0 * math.pi * k_perp**2 * xi_l)
    else:
        a_perp = chi_perp = sig_perp = math.nan
        sig_par = math.nan
    return ResponseSet(
        alpha_par=a_par,
        alpha_perp=a_perp,
        eps_par=1.0 + a_par,
        eps_perp=1.0 + a_perp,
        chi_par=chi_par,
        chi_perp=chi_perp,
        sigma_par=sig_par,
        sigma_perp=sig_perp,
    )


def reflection_from_responses(rs: ResponseSet, xi_l: float, k_perp: float) -> ReflectionPair:
    """Rebuild the free-sheet reflection pair from the polarizabilities.

    r_TM = q alpha_par / (q alpha_par + k) and
    r_TE = -(xi/c)^2 alpha_perp / ((xi/c)^2 alpha_perp + k q).
    """
    s = xi_l / CONSTANTS.c
    q = math.hypot(k_perp, s)
    rtm = q * rs.alpha_par / (q * rs.alpha_par + k_perp)
    if xi_l > 0:
        x = s * s * rs.alpha_perp
        rte = -x / (x + k_perp * q)
    else:
        rte = math.nan
    return ReflectionPair(rtm, rte, None, k_perp)
