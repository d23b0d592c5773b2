"""Polarization tensor of Dirac-model graphene on the imaginary frequency axis.

Values are exchanged as ``Pi/hbar`` quantities: ``pi00_over_hbar`` in rad/m and
``pi_over_hbar`` in (rad/m)^3, where ``Pi = k^2 Pi_tr - q^2 Pi_00``.  The
tensor is split into its zero-temperature part (continuous frequency allowed)
and the thermal correction, which is a one-dimensional Fermi-weighted
integral over the loop momentum.

The mass gap enters every formula through the wave number
``m = Delta / (hbar c)``.
"""
from __future__ import annotations

import enum
import math
import threading
from dataclasses import dataclass

import numpy as np
from scipy import integrate as _integrate

from . import _quadrature
from .core import (
    CONSTANTS,
    DomainError,
    GrapheneParams,
    NumericalError,
    UnsupportedConfigurationError,
    matsubara_frequency,
)

# width of the Fermi window in units of k_B T / (hbar c); exp(-40) < 1e-16
FERMI_WINDOW = 40.0
THERMAL_RTOL = 1e-9
# below this q_tilde/(2m) the arctan form cancels badly; the 5-term series is
# accurate to ~1e-14 there
_PHI_SERIES_SWITCH = 0.05


class EvaluationMethod(enum.Enum):
    EXACT = "exact"
    ASYMPTOTIC_L_GE_1 = "asymptotic"
    ZERO_T_TENSOR_AT_MATSUBARA = "zero_t_tensor"
    ZERO_TEMPERATURE = "zero_temperature"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        for member in cls:
            if key in (member.value, member.name.lower()):
                return member
        raise ValueError(f"unknown evaluation method {value!r}")


@dataclass(frozen=True)
class PolTensorValue:
    pi00_over_hbar: float
    pi_over_hbar: float
    l: int | None = None
    k_perp: float | None = None

    def __add__(self, other: "PolTensorValue") -> "PolTensorValue":
        return PolTensorValue(
            self.pi00_over_hbar + other.pi00_over_hbar,
            self.pi_over_hbar + other.pi_over_hbar,
            self.l,
            self.k_perp,
        )


def _phi_reduced(q_tilde, m):
    """Phi as a function of q_tilde and the gap wave number m (both rad/m)."""
    q_tilde = np.asarray(q_tilde, dtype=float)
    if m == 0.0:
        if np.any(q_tilde == 0):
            raise DomainError("Phi is undefined at q_tilde = 0 for a gapless sheet")
        return math.pi * q_tilde
    x = q_tilde / (2.0 * m)
    small = x < _PHI_SERIES_SWITCH
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = 4.0 * m * (1.0 + (x * x - 1.0) * np.arctan(x) / x)
    x2 = x * x
    # 1 + (x^2 - 1) arctan(x)/x = sum_n (-1)^(n+1) 4n/(4n^2 - 1) x^(2n)
    series = np.zeros_like(x2)
    for n in range(5, 0, -1):
        series = x2 * ((-1) ** (n + 1) * 4.0 * n / (4.0 * n * n - 1.0) + series)
    return np.where(small, 4.0 * m * series, direct)


def phi(q_tilde, delta):
    """Phi(q_tilde) in rad/m for mass gap ``delta`` given in joules."""
    if delta < 0 or np.any(np.asarray(q_tilde) < 0):
        raise DomainError("q_tilde and delta must be non-negative")
    m = delta / (CONSTANTS.hbar * CONSTANTS.c)
    out = _phi_reduced(q_tilde, m)
    return float(out) if np.ndim(out) == 0 else out


def zero_temperature_arrays(xi, k_perp, params: GrapheneParams):
    """Zero-temperature ``(pi00/hbar, pi/hbar)`` on arrays of ``k_perp``."""
    k = np.asarray(k_perp, dtype=float)
    s = xi / CONSTANTS.c
    qt2 = (params.vf_ratio * k) ** 2 + s * s
    q_tilde = np.sqrt(qt2)
    ph = _phi_reduced(q_tilde, params.gap_wavenumber)
    pi = params.alpha * k * k * ph
    with np.errstate(invalid="ignore", divide="ignore"):
        pi00 = np.where(qt2 > 0, pi / qt2, 0.0)
    return pi00, pi


def pol_zero_temperature(xi, k_perp, params: GrapheneParams) -> PolTensorValue:
    if xi < 0 or k_perp < 0:
        raise DomainError("xi and k_perp must be non-negative")
    pi00, pi = zero_temperature_arrays(xi, k_perp, params)
    return PolTensorValue(float(pi00), float(pi), None, float(k_perp))


# ---------------------------------------------------------------------------
# thermal correction


def _thermal_brackets(dG, xi, k, params: GrapheneParams, both_signs=False):
    """Lambda-averaged brackets of the 00 and Pi thermal integrands.

    ``dG`` is Gamma - m in rad/m (Gamma the loop energy variable, m the gap
    wave number), broadcast against ``k``; passing the offset keeps q_perp^2
    accurate right above the gap threshold.  With
    P = q_tilde^2 - 2i s G (s = xi/c) and N = sqrt(P^2 - b^2), the exact
    identity N - P = -b^2/(N + P) splits each bracket into a manifestly real
    leading term plus b^2 M/(P N (N + P)); the literal form cancels to about
    (G/s)(v_F k/xi)^2 relative and is useless at large index or small k.

    The lambda = -1 term is the complex conjugate of the lambda = +1 term, so
    only the latter is evaluated unless ``both_signs`` is set, in which case
    the complex lambda-averages are returned.
    """
    w = params.vf_ratio
    m = params.gap_wavenumber
    s = xi / CONSTANTS.c
    wk2 = (w * k) ** 2
    qt2 = wk2 + s * s
    G = m + dG
    q2 = dG * (2.0 * m + dG)
    b2 = 4.0 * wk2 * q2
    lead00 = None
    b00 = 0.0
    bpi = 0.0
    for lam in ((1.0, -1.0) if both_signs else (1.0,)):
        P = qt2 - 2j * lam * s * G
        N = np.sqrt(P * P - b2)
        M00 = 4.0 * G * G - qt2 + 4j * lam * s * G
        M = s * s * qt2 - 4.0 * q2 * qt2 - 4.0 * m * m * s * s - 4j * lam * s * G * qt2
        with np.errstate(divide="ignore", invalid="ignore"):
            tail = b2 / (P * N * (N + P))
        abs_p2 = (P * P.conjugate()).real
        lead00 = 4.0 * G * G * wk2 / abs_p2
        leadpi = 4.0 * wk2 * (m * m * s * s - q2 * wk2) / abs_p2
        if both_signs:
            # imaginary parts of the leading terms cancel pairwise
            lead00 = lead00 + 1j * ((4 * G * G + 2j * lam * s * G) / P).imag
            leadpi = leadpi + 1j * ((M - s * s * P) / P).imag
        b00 = b00 + lead00 + tail * M00
        bpi = bpi + leadpi + tail * M
    if both_signs:
        return 0.5 * b00, 0.5 * bpi
    b00, bpi = b00.real, bpi.real
    # static case: where N is imaginary M/N has no real part
    evanescent = (s == 0.0) & (qt2 * qt2 - b2 < 0)
    b00 = np.where(evanescent, 1.0, b00)
    bpi = np.where(evanescent, 0.0, bpi)
    return b00, bpi


def _kink_offset(xi, k, params: GrapheneParams):
    """Gamma - m at which Re N_lambda^2 changes sign (q_perp ~ q_tilde/2)."""
    w = params.vf_ratio
    m = params.gap_wavenumber
    s = xi / CONSTANTS.c
    qt2 = (w * k) ** 2 + s * s
    with np.errstate(invalid="ignore", divide="ignore"):
        qstar2 = np.where(qt2 > 0, (qt2 * qt2 - 4.0 * s * s * m * m) / (4.0 * qt2), 0.0)
    qstar2 = np.maximum(qstar2, 0.0)
    return qstar2 / (np.sqrt(qstar2 + m * m) + m) if m > 0 else np.sqrt(qstar2)


def _thermal_prefactor(T, params: GrapheneParams):
    # 16 alpha (c/v_F)^2 * k_B T/(hbar c): converts the t-integral to Pi/hbar
    return 16.0 * params.alpha / params.vf_ratio**2 * (CONSTANTS.k_B * T / (CONSTANTS.hbar * CONSTANTS.c))


def _segments(offset):
    """Left/right lengths around the kink offset (in t), clipped to the window."""
    inside = (offset > 0) & (offset < FERMI_WINDOW)
    left = np.where(inside, offset, 0.5 * FERMI_WINDOW)
    return left, FERMI_WINDOW - left


def thermal_correction_arrays(xi, k_perp, T, params: GrapheneParams, rtol=THERMAL_RTOL):
    """Thermal correction ``(dpi00/hbar, dpi/hbar)`` on arrays of ``xi``, ``k_perp``.

    The loop integral is taken in ``t = hbar c Gamma / (k_B T)`` over the Fermi
    window, split at the kink and mapped quadratically on both sides so that
    square-root behaviour at the kink becomes analytic.
    """
    if not T > 0:
        raise DomainError("temperature must be positive for the thermal correction")
    xi, k = np.broadcast_arrays(np.asarray(xi, dtype=float), np.asarray(k_perp, dtype=float))
    shape = k.shape
    xi = xi.ravel()
    k = k.ravel()
    kt = CONSTANTS.k_B * T / (CONSTANTS.hbar * CONSTANTS.c)
    t0 = params.gap_wavenumber / kt
    left, right = _segments(_kink_offset(xi, k, params) / kt)
    # u = t - t0; v in [-1, 0]: u = left (1 - v^2), v in [0, 1]: u = left + right v^2
    edges = np.tile(np.linspace(-1.0, 1.0, 9), (k.size, 1))

    def integrand(v, rows):
        kr = k[rows][:, None]
        L = left[rows][:, None]
        Rr = right[rows][:, None]
        u = np.where(v < 0, L * (1.0 - v) * (1.0 + v), L + Rr * v * v)
        jac = 2.0 * np.abs(v) * np.where(v < 0, L, Rr)
        e = np.exp(-(t0 + u))
        fermi = e / (1.0 + e)
        b00, bpi = _thermal_brackets(u * kt, xi[rows][:, None], kr, params)
        weight = fermi * jac
        return np.stack([weight * b00, weight * bpi])

    vals, _ = _quadrature.integrate(
        integrand, edges, rtol, l1_relative=True, max_levels=12,
        context={"T": T},
    )
    pref = _thermal_prefactor(T, params)
    return (pref * vals[0]).reshape(shape), (pref * vals[1]).reshape(shape)


def thermal_correction(xi_l, k_perp, T, params: GrapheneParams, l=None) -> PolTensorValue:
    """Thermal correction at one point, by adaptive Gauss-Kronrod (QUADPACK).

    Raises
    ------
    NumericalError
        if QUADPACK reports non-convergence.
    """
    if not T > 0:
        raise DomainError("temperature must be positive for the thermal correction")
    if xi_l < 0 or k_perp < 0:
        raise DomainError("xi and k_perp must be non-negative")
    kt = CONSTANTS.k_B * T / (CONSTANTS.hbar * CONSTANTS.c)
    t0 = params.gap_wavenumber / kt
    left, right = (float(x) for x in _segments(_kink_offset(xi_l, np.float64(k_perp), params) / kt))

    def piece(component, sign, length):
        def f(v):
            u = left * (1.0 - v) * (1.0 + v) if sign < 0 else left + right * v * v
            b = _thermal_brackets(np.float64(u * kt), xi_l, np.float64(k_perp), params)[component]
            e = math.exp(-(t0 + u))
            return float(b) * 2.0 * v * length * e / (1.0 + e)

        l1 = _integrate.quad(lambda v: abs(f(v)), 0.0, 1.0, epsrel=1e-4, limit=200)[0]
        val, err = _integrate.quad(f, 0.0, 1.0, epsabs=THERMAL_RTOL * l1, epsrel=THERMAL_RTOL, limit=400)
        return val, err, l1

    pref = _thermal_prefactor(T, params)
    out = []
    for component in (0, 1):
        (v1, e1, n1), (v2, e2, n2) = piece(component, -1.0, left), piece(component, 1.0, right)
        total = v1 + v2
        if not math.isfinite(total) or e1 + e2 > 100 * THERMAL_RTOL * max(abs(total), n1 + n2) + 1e-300:
            raise NumericalError(
                "thermal correction quadrature failed", l=l, k_perp=k_perp, achieved_error=e1 + e2
            )
        out.append(pref * total)
    return PolTensorValue(out[0], out[1], l, float(k_perp))


# ---------------------------------------------------------------------------
# asymptotic form for l >= 1, gapless graphene

_Y_CACHE: dict[int, float] = {}
_Y_LOCK = threading.Lock()


def y_l(l: int) -> float:
    """Y_l = 4 int_0^inf du/(exp(pi l u) + 1) * u^2/(1 + u^2), cached per l."""
    if int(l) != l or l < 1:
        raise DomainError(f"Y_l requires an integer l >= 1, got {l}")
    l = int(l)
    with _Y_LOCK:
        cached = _Y_CACHE.get(l)
    if cached is not None:
        return cached
    a = math.pi * l

    # v = pi l u
    def f(v):
        return math.exp(-v) / (1.0 + math.exp(-v)) * v * v / (v * v + a * a)

    val, err = _integrate.quad(f, 0.0, 60.0, epsabs=0.0, epsrel=1e-12, limit=200)
    value = 4.0 * val / a
    with _Y_LOCK:
        _Y_CACHE.setdefault(l, value)
    return value


def _require_gapless(params: GrapheneParams):
    if params.delta != 0:
        raise UnsupportedConfigurationError("the asymptotic thermal correction is derived for a zero mass gap")


def asymptotic_correction_arrays(l, k_perp, T, params: GrapheneParams):
    """Asymptotic ``(dpi00/hbar, dpi/hbar)``; ``l`` (>= 1) broadcasts against ``k_perp``."""
    _require_gapless(params)
    l_arr, k = np.broadcast_arrays(np.asarray(l), np.asarray(k_perp, dtype=float))
    if np.any(l_arr < 1):
        raise DomainError("the asymptotic correction applies to l >= 1 only")
    s = matsubara_frequency(l_arr, T) / CONSTANTS.c
    q_tilde = np.hypot(params.vf_ratio * k, s)
    uniq, inverse = np.unique(l_arr, return_inverse=True)
    yl = np.array([y_l(int(v)) for v in uniq])[inverse].reshape(k.shape)
    base = params.alpha * k * k * yl
    return base / q_tilde, base * q_tilde


def thermal_correction_asymptotic(l, k_perp, T, params: GrapheneParams) -> PolTensorValue:
    pi00, pi = asymptotic_correction_arrays(l, k_perp, T, params)
    return PolTensorValue(float(pi00), float(pi), l, float(k_perp))


def small_parameter(l, k_perp, T, params: GrapheneParams):
    """Expansion parameter 4 v_F^2 k^2 / (c^2 q_tilde_l^2) of the asymptotic form."""
    if l < 1:
        raise DomainError("the small parameter is defined for l >= 1")
    s = matsubara_frequency(l, T) / CONSTANTS.c
    wk2 = (params.vf_ratio * np.asarray(k_perp, dtype=float)) ** 2
    return 4.0 * wk2 / (wk2 + s * s)


# ---------------------------------------------------------------------------
# dispatch


def pol_tensor_multi(xi, k_perp, T, params: GrapheneParams, methods, l=None):
    """Tensor ``(pi00/hbar, pi/hbar)`` for several methods on shared points.

    ``xi`` and ``k_perp`` broadcast together; ``l`` holds the Matsubara
    indices belonging to ``xi`` (``None`` for continuous frequencies, allowed
    with ZERO_TEMPERATURE and EXACT only).  The zero-temperature part and the
    exact thermal correction are computed once and shared.  Returns a dict
    keyed by method.
    """
    methods = [EvaluationMethod.parse(m) for m in methods]
    if EvaluationMethod.ASYMPTOTIC_L_GE_1 in methods:
        _require_gapless(params)
    xi, k = np.broadcast_arrays(np.asarray(xi, dtype=float), np.asarray(k_perp, dtype=float))
    pi00, pi = zero_temperature_arrays(xi, k, params)
    thermal_methods = [m for m in methods if m is not EvaluationMethod.ZERO_TEMPERATURE]
    partial = [m for m in thermal_methods if m is not EvaluationMethod.EXACT]
    if partial and l is None:
        raise DomainError(f"{partial[0].name} needs Matsubara indices")
    if l is not None:
        l = np.broadcast_to(np.asarray(l), k.shape)
    exact = None
    if EvaluationMethod.EXACT in methods:
        exact = thermal_correction_arrays(xi, k, T, params)
    out = {}
    for method in methods:
        if method is EvaluationMethod.ZERO_TEMPERATURE:
            out[method] = (pi00, pi)
        elif method is EvaluationMethod.EXACT:
            out[method] = (pi00 + exact[0], pi + exact[1])
        else:
            static = l == 0
            d00 = np.zeros(k.shape)
            dpi = np.zeros(k.shape)
            if np.any(static):
                if exact is not None:
                    d00[static], dpi[static] = exact[0][static], exact[1][static]
                else:
                    exact_static = thermal_correction_arrays(xi[static], k[static], T, params)
                    d00[static], dpi[static] = exact_static
                    exact = np.zeros(k.shape), np.zeros(k.shape)
                    exact[0][static], exact[1][static] = exact_static
            if method is EvaluationMethod.ASYMPTOTIC_L_GE_1 and not np.all(static):
                d00[~static], dpi[~static] = asymptotic_correction_arrays(l[~static], k[~static], T, params)
            out[method] = (pi00 + d00, pi + dpi)
    return out


def pol_tensor_arrays(xi, k_perp, T, params: GrapheneParams, method: EvaluationMethod, l=None):
    """Tensor ``(pi00/hbar, pi/hbar)`` for one method; see :func:`pol_tensor_multi`."""
    method = EvaluationMethod.parse(method)
    return pol_tensor_multi(xi, k_perp, T, params, [method], l)[method]


def pol_tensor(l, k_perp, T, params: GrapheneParams, method=EvaluationMethod.EXACT) -> PolTensorValue:
    """Full tensor at Matsubara index ``l``.

    At ``l = 0`` all thermal methods use the exact thermal correction;
    ZERO_TEMPERATURE returns the zero-temperature tensor at xi_l.
    """
    method = EvaluationMethod.parse(method)
    xi = matsubara_frequency(l, T)
    zero = pol_zero_temperature(xi, k_perp, params)
    if method is EvaluationMethod.ZERO_TEMPERATURE:
        return PolTensorValue(zero.pi00_over_hbar, zero.pi_over_hbar, l, float(k_perp))
    if method is EvaluationMethod.ASYMPTOTIC_L_GE_1:
        _require_gapless(params)
    if l == 0 or method is EvaluationMethod.EXACT:
        inc = thermal_correction(xi, k_perp, T, params, l=l)
    elif method is EvaluationMethod.ASYMPTOTIC_L_GE_1:
        inc = thermal_correction_asymptotic(l, k_perp, T, params)
    else:
        return PolTensorValue(zero.pi00_over_hbar, zero.pi_over_hbar, l, float(k_perp))
    return PolTensorValue(
        zero.pi00_over_hbar + inc.pi00_over_hbar, zero.pi_over_hbar + inc.pi_over_hbar, l, float(k_perp)
    )
