"""Vectorized adaptive Gauss-Kronrod (7/15) quadrature over panel sets.

Many independent integrals (rows) are evaluated at once.  Each row starts
from its own panel edges.  In rows whose error estimate misses the tolerance
the panels carrying the largest errors are bisected and the row is
re-evaluated; converged rows are frozen.  Rows are padded with zero-width
panels to keep the arrays rectangular, and panel contributions are added in
a fixed left-to-right order, so a row's result never depends on which other
rows share the batch.  The error estimate per panel is the QUADPACK one.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import NumericalError

_XK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

# full 15-point node set on [-1, 1]
NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WK[:-1], _WK[::-1]])
GAUSS_WEIGHTS = np.zeros(15)
# Gauss nodes are the odd-indexed entries of _XK (xgk[1], xgk[3], ...)
_g = np.concatenate([_WG[:-1], [0.0], _WG[::-1]])
for _i, _xk in enumerate(NODES):
    _j = int(np.argmin(np.abs(_XK - abs(_xk))))
    if _j % 2 == 1:
        GAUSS_WEIGHTS[_i] = _WG[(_j - 1) // 2]


@dataclass
class QuadratureReport:
    evaluations: int
    max_error: float
    levels: int


def panel_nodes(edges):
    """Map the 15 Kronrod nodes into every panel; returns ``(nodes, half)``."""
    lo = edges[..., :-1]
    hi = edges[..., 1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    return mid[..., None] + half[..., None] * NODES, half


# integrals below this are treated as converged (underflowing tails)
_ABS_FLOOR = 1e-280


def integrate(func, edges, rtol, *, atol=0.0, l1_relative=False, max_levels=10, context=None):
    """Integrate ``func`` row-wise over the panels given by ``edges``.

    Parameters
    ----------
    func : callable
        ``func(nodes, rows)`` with ``nodes`` of shape (nrows_sel, n) and the
        integer index array ``rows`` of the selected rows; returns an array of
        shape (ncomp, nrows_sel, n).
    edges : ndarray
        (nrows, npanels + 1) increasing panel boundaries.
    rtol, atol : float
        per-component acceptance: error <= max(rtol * |I|, atol).
    l1_relative : bool
        measure the relative error against the integral of |f| instead of
        |I|; for integrals that cancel internally and only matter next to a
        larger companion term.

    Returns
    -------
    values : ndarray, shape (ncomp, nrows)
    report : QuadratureReport
    """
    edges = np.atleast_2d(np.asarray(edges, dtype=float))
    nrows = edges.shape[0]
    rows = np.arange(nrows)
    values = None
    errors = None
    evaluations = 0
    for level in range(max_levels + 1):
        nodes, half = panel_nodes(edges)
        npan = nodes.shape[1]
        f = np.asarray(func(nodes.reshape(len(rows), -1), rows), dtype=float)
        f = f.reshape(f.shape[0], len(rows), npan, 15)
        evaluations += f[0].size
        if not np.all(np.isfinite(f)):
            raise NumericalError("non-finite integrand", context=context, level=level)
        kron = np.einsum("crpn,n->crp", f, KRONROD_WEIGHTS) * half
        gauss = np.einsum("crpn,n->crp", f, GAUSS_WEIGHTS) * half
        with np.errstate(divide="ignore", invalid="ignore"):
            mean = np.where(half > 0, kron / (2.0 * half), 0.0)
        resasc = np.einsum("crpn,n->crp", np.abs(f - mean[..., None]), KRONROD_WEIGHTS) * np.abs(half)
        diff = np.abs(kron - gauss)
        with np.errstate(divide="ignore", invalid="ignore"):
            scale = np.where(resasc > 0, np.minimum(1.0, (200.0 * diff / resasc) ** 1.5), 1.0)
        err_p = np.where(resasc > 0, resasc * scale, diff)
        total = _ordered_sum(kron)
        err = _ordered_sum(err_p)
        if l1_relative:
            ref = _ordered_sum(np.einsum("crpn,n->crp", np.abs(f), KRONROD_WEIGHTS) * np.abs(half))
        else:
            ref = np.abs(total)
        if values is None:
            values = np.zeros((f.shape[0], nrows))
            errors = np.zeros((f.shape[0], nrows))
        tol = np.maximum(rtol * ref, max(atol, _ABS_FLOOR))
        ok = np.all(err <= tol, axis=0)
        values[:, rows] = total
        errors[:, rows] = err
        if np.all(ok) or level == max_levels:
            if not np.all(ok):
                raise NumericalError(
                    "quadrature did not converge",
                    context=context,
                    achieved_error=float(np.max(err[:, ~ok])),
                    levels=level,
                )
            break
        # split every panel whose error exceeds its fair share of the budget
        # (and at least the worst one), per component
        bad = ~ok
        ep = err_p[:, bad]
        share = (tol[:, bad] / npan)[..., None]
        worst = ep >= ep.max(axis=-1, keepdims=True)
        split = np.any((ep > 0.5 * share) | worst, axis=0) & (half[bad] > 0)
        rows = rows[bad]
        edges = _split_panels(edges[bad], split)
    return values, QuadratureReport(evaluations, float(np.max(errors)) if errors.size else 0.0, level)


def _ordered_sum(a):
    """Sum over the last axis strictly left to right."""
    out = np.zeros(a.shape[:-1])
    for p in range(a.shape[-1]):
        out = out + a[..., p]
    return out


def _split_panels(edges, split):
    """Bisect the flagged panels of each row; pad rows with zero-width panels."""
    lo = edges[:, :-1]
    hi = edges[:, 1:]
    cand = np.stack([0.5 * (lo + hi), hi], axis=-1).reshape(edges.shape[0], -1)
    keep = np.stack([split, np.ones_like(split)], axis=-1).reshape(edges.shape[0], -1)
    order = np.argsort(~keep, axis=1, kind="stable")
    cand = np.take_along_axis(cand, order, axis=1)
    nkeep = keep.sum(axis=1)
    width = int(nkeep.max())
    cand = cand[:, :width]
    # pad each row with its last edge (zero-width panels)
    idx = np.minimum(np.arange(width)[None, :], nkeep[:, None] - 1)
    cand = np.take_along_axis(cand, idx, axis=1)
    return np.concatenate([edges[:, :1], cand], axis=1)
