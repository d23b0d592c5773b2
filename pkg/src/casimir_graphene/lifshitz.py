"""Lifshitz free energy, pressure and sphere-plate force gradient.

For each Matsubara index the k-integral is taken in ``y = 2 a q_l`` over
``[2 a xi_l / c, 2 a xi_l / c + 80]`` with k dk = y dy / (4 a^2).  Indices are
processed in fixed-size blocks (so results do not depend on the number of
threads), several tensor methods can share one set of quadrature nodes, and
the Matsubara sum is formed with ``math.fsum`` in index order.

The ZERO_TEMPERATURE method replaces the sum by a frequency integral in
``x = 2 a xi / c``.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import zeta

from . import _quadrature
from .core import CONSTANTS, DomainError, GrapheneParams, NumericalError, matsubara_frequency
from .poltensor import EvaluationMethod, pol_tensor_multi
from .reflect import LayerStack, stack_reflection_arrays

K_RTOL = 1e-8
SUM_RTOL = 1e-10
L_FLOOR = 10
L_CAP = 100_000
Y_TAIL = 80.0
BLOCK = 8
# initial panel edges in y - y_min, graded towards the lower limit
_Y_EDGES = np.array([0.0, 1e-3, 1e-2, 0.1, 0.4, 1.0, 2.5, 5.0, 10.0, 20.0, 40.0, Y_TAIL])
_X_EDGES = np.array([0.0, 1e-3, 1e-2, 0.05, 0.2, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, Y_TAIL])


@dataclass
class LifshitzResult:
    free_energy_per_area: float
    pressure: float
    per_l_terms: list = field(default_factory=list)
    l_max_used: int = 0
    quadrature_diagnostics: dict = field(default_factory=dict)
    method: EvaluationMethod = EvaluationMethod.EXACT
    separation: float = 0.0
    temperature: float = 0.0


@dataclass(frozen=True)
class ThermalDecomposition:
    total_pressure: float
    pressure_T0: float
    pressure_implicit_only: float
    explicit_effect: float
    implicit_effect: float
    total_effect: float


def _check(a, T):
    if not a > 0:
        raise DomainError(f"separation must be positive, got {a}")
    if not T > 0:
        raise DomainError(f"temperature must be positive, got {T}")


def _tensors(bodies, xi, k, T, methods, l):
    """Graphene tensors per distinct sheet, shared across methods."""
    out = {}
    for body in bodies:
        g = body.graphene
        if g is not None and g not in out:
            out[g] = pol_tensor_multi(xi, k, T, g, methods, l)
    return out


def _reflections(body, xi, k, T, method, l, tensors):
    tensor = tensors[body.graphene][method] if body.graphene is not None else None
    return stack_reflection_arrays(body, xi, k, T, method, l, tensor=tensor)


def _integrand_terms(y, body1, body2, xi, k, T, methods, l):
    """Rows of [y ln(1 - X e^-y) summed, y^2 X e^-y / (1 - X e^-y) summed] per method."""
    same = body1 == body2
    tensors = _tensors((body1,) if same else (body1, body2), xi, k, T, methods, l)
    e = np.exp(-y)
    comps = []
    for method in methods:
        r1 = _reflections(body1, xi, k, T, method, l, tensors)
        r2 = r1 if same else _reflections(body2, xi, k, T, method, l, tensors)
        f_val = 0.0
        p_val = 0.0
        for ra, rb in zip(r1, r2):
            x = ra * rb * e
            if np.any(x >= 1.0):
                raise NumericalError("internal consistency: |r1 r2 exp(-2aq)| >= 1", method=method.name)
            f_val = f_val + y * np.log1p(-x)
            p_val = p_val + y * y * x / (1.0 - x)
        comps.extend([f_val, p_val])
    return comps


def _block_integrals(ls, a, T, body1, body2, methods, rtol):
    """Per-index y-integrals for the indices ``ls``; shape (2 * nmethods, len(ls))."""
    ls = np.asarray(ls)
    xi_rows = matsubara_frequency(ls, T)
    y0 = 2.0 * a * xi_rows / CONSTANTS.c
    edges = y0[:, None] + _Y_EDGES[None, :]

    def func(y, rows):
        y0r = y0[rows][:, None]
        xi = np.broadcast_to(xi_rows[rows][:, None], y.shape)
        lr = np.broadcast_to(ls[rows][:, None], y.shape)
        k = np.sqrt(np.maximum((y - y0r) * (y + y0r), 0.0)) / (2.0 * a)
        return np.stack(_integrand_terms(y, body1, body2, xi, k, T, methods, lr))

    return _quadrature.integrate(func, edges, rtol, max_levels=14, context={"l": ls.tolist(), "a": a})


def _matsubara_sum(a, T, body1, body2, methods, rtol=K_RTOL, threads=1):
    """Matsubara-summed free energy and pressure for several tensor methods.

    Inside the sum ZERO_TEMPERATURE means the zero-temperature tensor taken at
    every Matsubara frequency, l = 0 included.
    """
    methods = [EvaluationMethod.parse(m) for m in methods]
    ncomp = 2 * len(methods)
    f_scale = CONSTANTS.k_B * T / (2.0 * math.pi) / (4.0 * a * a)
    p_scale = -CONSTANTS.k_B * T / math.pi / (8.0 * a**3)
    if body1.is_vacuum or body2.is_vacuum:
        return {m: LifshitzResult(0.0, 0.0, [], 0, {"evaluations": 0}, m, a, T) for m in methods}

    terms = []  # per l: array (ncomp,)
    evaluations = 0
    max_err = 0.0
    running = np.zeros(ncomp)
    scales = np.where(np.arange(ncomp) % 2 == 0, f_scale, p_scale)
    stop = None
    next_block = 0
    workers = max(1, int(threads))
    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        while stop is None:
            starts = [next_block + i * BLOCK for i in range(workers)]
            starts = [s for s in starts if s <= L_CAP]
            if not starts:
                break
            blocks = [np.arange(s, min(s + BLOCK, L_CAP + 1)) for s in starts]
            job = lambda ls: _block_integrals(ls, a, T, body1, body2, methods, rtol)  # noqa: E731
            results = list(pool.map(job, blocks)) if pool else [job(b) for b in blocks]
            next_block = starts[-1] + BLOCK
            for ls, (vals, report) in zip(blocks, results):
                evaluations += report.evaluations
                max_err = max(max_err, report.max_error)
                for j, l in enumerate(ls):
                    term = vals[:, j] * scales
                    if l == 0:
                        term = 0.5 * term
                    terms.append(term)
                    running = running + term
                    if l >= L_FLOOR and np.all(np.abs(term) <= SUM_RTOL * np.abs(running)):
                        stop = int(l)
                        break
                if stop is not None:
                    break
    finally:
        if pool:
            pool.shutdown()
    if stop is None:
        raise NumericalError("Matsubara sum did not converge", a=a, l_cap=L_CAP)
    terms = np.array(terms[: stop + 1])
    out = {}
    for i, m in enumerate(methods):
        fe = math.fsum(terms[:, 2 * i])
        pr = math.fsum(terms[:, 2 * i + 1])
        per_l = [
            (l, float(terms[l, 2 * i + 1]), abs(float(terms[l, 2 * i + 1])) / abs(pr) if pr else 0.0)
            for l in range(stop + 1)
        ]
        diag = {"evaluations": evaluations, "max_k_error": max_err, "k_rtol": rtol}
        out[m] = LifshitzResult(fe, pr, per_l, stop, diag, m, a, T)
    return out


def _zero_temperature(a, body1, body2, rtol=K_RTOL, T_ref=300.0):
    """Free energy and pressure at T = 0 (continuous frequency)."""
    if body1.is_vacuum or body2.is_vacuum:
        return LifshitzResult(0.0, 0.0, [], 0, {"evaluations": 0}, EvaluationMethod.ZERO_TEMPERATURE, a, 0.0)
    methods = [EvaluationMethod.ZERO_TEMPERATURE]
    inner_evals = [0]

    def outer(x, rows):
        xs = x.ravel()
        xi_rows = xs * CONSTANTS.c / (2.0 * a)
        edges = xs[:, None] + _Y_EDGES[None, :]

        def func(y, r):
            y0r = xs[r][:, None]
            xi = np.broadcast_to(xi_rows[r][:, None], y.shape)
            k = np.sqrt(np.maximum((y - y0r) * (y + y0r), 0.0)) / (2.0 * a)
            return np.stack(_integrand_terms(y, body1, body2, xi, k, T_ref, methods, None))

        vals, rep = _quadrature.integrate(func, edges, 0.01 * rtol, max_levels=14, context={"a": a})
        inner_evals[0] += rep.evaluations
        return vals.reshape(2, *x.shape)

    vals, rep = _quadrature.integrate(outer, _X_EDGES[None, :], rtol, max_levels=14, context={"a": a})
    hbar_c = CONSTANTS.hbar * CONSTANTS.c
    fe = hbar_c / (4.0 * math.pi**2) / (2.0 * a) / (4.0 * a * a) * vals[0, 0]
    pr = -hbar_c / (2.0 * math.pi**2) / (2.0 * a) / (8.0 * a**3) * vals[1, 0]
    diag = {"evaluations": rep.evaluations + inner_evals[0], "max_k_error": rep.max_error, "k_rtol": rtol}
    return LifshitzResult(fe, pr, [], 0, diag, EvaluationMethod.ZERO_TEMPERATURE, a, 0.0)


def compute(a, T, body1: LayerStack, body2: LayerStack, methods, rtol=K_RTOL, threads=1):
    """Results for several methods; Matsubara methods share quadrature nodes."""
    _check(a, T)
    methods = [EvaluationMethod.parse(m) for m in methods]
    matsubara = [m for m in methods if m is not EvaluationMethod.ZERO_TEMPERATURE]
    out = _matsubara_sum(a, T, body1, body2, matsubara, rtol, threads) if matsubara else {}
    if EvaluationMethod.ZERO_TEMPERATURE in methods:
        out[EvaluationMethod.ZERO_TEMPERATURE] = _zero_temperature(a, body1, body2, rtol, T)
    return out


def free_energy(a, T, body1, body2, method=EvaluationMethod.EXACT, rtol=K_RTOL, threads=1) -> LifshitzResult:
    """Free energy per unit area (J/m^2); the result also carries the pressure."""
    method = EvaluationMethod.parse(method)
    return compute(a, T, body1, body2, [method], rtol, threads)[method]


def pressure(a, T, body1, body2, method=EvaluationMethod.EXACT, rtol=K_RTOL, threads=1) -> LifshitzResult:
    """Casimir pressure (Pa, negative for attraction) from the differentiated integrand."""
    return free_energy(a, T, body1, body2, method, rtol, threads)


def force_gradient_sphere_plate(a, T, R, sphere, plate, method=EvaluationMethod.EXACT, rtol=K_RTOL, threads=1):
    """Proximity-force gradient 2 pi R |P| (N/m), positive for attraction."""
    if not R > 0:
        raise DomainError("sphere radius must be positive")
    if a / R > 0.01:
        warnings.warn(f"a/R = {a / R:.3g} > 0.01: the proximity force approximation is doubtful", stacklevel=2)
    return -2.0 * math.pi * R * pressure(a, T, sphere, plate, method, rtol, threads).pressure


def _graphene_pair(params=None):
    g = params if params is not None else GrapheneParams()
    body = LayerStack(graphene=g)
    return body, body


def pressure_relative_difference(a, T, method_k, body1=None, body2=None, rtol=K_RTOL, threads=1):
    """(P - P_k) / P with P from the exact tensor; two free gapless sheets by default."""
    method_k = EvaluationMethod.parse(method_k)
    if method_k not in (EvaluationMethod.ASYMPTOTIC_L_GE_1, EvaluationMethod.ZERO_T_TENSOR_AT_MATSUBARA):
        raise DomainError("method_k must be ASYMPTOTIC_L_GE_1 or ZERO_T_TENSOR_AT_MATSUBARA")
    if body1 is None or body2 is None:
        body1, body2 = _graphene_pair()
    res = compute(a, T, body1, body2, [EvaluationMethod.EXACT, method_k], rtol, threads)
    p = res[EvaluationMethod.EXACT].pressure
    return (p - res[method_k].pressure) / p


def relative_differences(a, T, body1=None, body2=None, rtol=K_RTOL, threads=1):
    """Both relative errors (asymptotic, zero-T tensor) from one shared computation."""
    if body1 is None or body2 is None:
        body1, body2 = _graphene_pair()
    ms = [EvaluationMethod.EXACT, EvaluationMethod.ASYMPTOTIC_L_GE_1, EvaluationMethod.ZERO_T_TENSOR_AT_MATSUBARA]
    res = compute(a, T, body1, body2, ms, rtol, threads)
    p = res[ms[0]].pressure
    return (p - res[ms[1]].pressure) / p, (p - res[ms[2]].pressure) / p


def decomposition_from(total, implicit_only, zero_t) -> ThermalDecomposition:
    return ThermalDecomposition(
        total_pressure=total,
        pressure_T0=zero_t,
        pressure_implicit_only=implicit_only,
        explicit_effect=total - implicit_only,
        implicit_effect=implicit_only - zero_t,
        total_effect=total - zero_t,
    )


def thermal_decomposition(a, T, body1, body2, static_term="zero_t", rtol=K_RTOL, threads=1) -> ThermalDecomposition:
    """Split the thermal change of the pressure into explicit and implicit parts.

    The implicit-only pressure is the Matsubara sum evaluated with the
    zero-temperature tensor.  With ``static_term="zero_t"`` (default) this
    tensor is used at every index including l = 0; with ``"exact"`` the l = 0
    term keeps the full thermal tensor (ZERO_T_TENSOR_AT_MATSUBARA).
    """
    _check(a, T)
    if static_term == "zero_t":
        implicit = EvaluationMethod.ZERO_TEMPERATURE
    elif static_term == "exact":
        implicit = EvaluationMethod.ZERO_T_TENSOR_AT_MATSUBARA
    else:
        raise DomainError("static_term must be 'zero_t' or 'exact'")
    res = _matsubara_sum(a, T, body1, body2, [EvaluationMethod.EXACT, implicit], rtol, threads)
    zero_t = _zero_temperature(a, body1, body2, rtol, T)
    return decomposition_from(res[EvaluationMethod.EXACT].pressure, res[implicit].pressure, zero_t.pressure)


def classical_limit_pressure(a, T, ideal_metals=False):
    """High-temperature pressure: -k_B T zeta(3)/(8 pi a^3), doubled for two ideal metals."""
    base = -CONSTANTS.k_B * T * zeta(3) / (8.0 * math.pi * a**3)
    return 2.0 * base if ideal_metals else base
