"""Command-line front end: ``casimir <subcommand> --config <file>``.

Every subcommand writes ``<subcommand>.csv`` (header with column names and
units, 12 significant digits) and the effective config
``<subcommand>.config.yaml`` into the output directory; ``--gnuplot`` adds a
plotting script.  Files are written atomically.

Exit codes: 0 success, 2 configuration error, 3 numerical error.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
import tempfile
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .config import SUBCOMMANDS, ScenarioConfig, load_config
from .core import (
    CONSTANTS,
    CasimirError,
    ConfigError,
    DomainError,
    NumericalError,
    UnsupportedConfigurationError,
    matsubara_frequency,
)
from .lifshitz import compute, decomposition_from, _matsubara_sum, _zero_temperature
from .poltensor import EvaluationMethod, pol_tensor, thermal_correction_arrays
from .reflect import LayerStack
from .response import GAUSSIAN_UNITS, responses_from_tensor

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

E = EvaluationMethod


class Table:
    def __init__(self, columns, comments=()):
        self.columns = list(columns)
        self.comments = list(comments)
        self.rows = []

    def add(self, *values):
        if len(values) != len(self.columns):
            raise AssertionError("row length does not match the header")
        self.rows.append(values)

    def render(self, name):
        out = [f"# casimir-graphene {__version__} {name}"]
        out += [f"# {c}" for c in self.comments]
        out.append(",".join(self.columns))
        for row in self.rows:
            out.append(",".join(_fmt(v) for v in row))
        return "\n".join(out) + "\n"


def _fmt(v):
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return "nan"
    return "%.11e" % v


def write_atomic(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _b_norm(a, T):
    return CONSTANTS.k_B * T / (8.0 * math.pi * a**3)


# ---------------------------------------------------------------------------
# scenarios


def run_fig1(cfg: ScenarioConfig, threads=1, rtol=None):
    T = cfg.temperature
    params = cfg.graphene_params()
    sec = cfg.section("fig1")
    n = int(sec["points"])
    xi1 = matsubara_frequency(1, T)
    k = float(sec["k_over_xi1"]) * xi1 / CONSTANTS.c
    ratio = np.linspace(0.0, float(sec["xi_max_over_xi1"]), n)
    d00, _ = thermal_correction_arrays(ratio * xi1, np.full(n, k), T, params)
    C = 16.0 * params.alpha * CONSTANTS.c * CONSTANTS.k_B * T / (params.vf_ratio * CONSTANTS.c) ** 2
    tab = Table(
        ["xi_over_xi1 [1]", "dT_Pi00_over_C [1]"],
        [
            f"T = {T} K, delta = {params.delta} eV, v_F/c = {params.vf_ratio!r}",
            f"k_perp = {sec['k_over_xi1']} * xi_1 / c = {k!r} rad/m (k read as a wave number xi_1/c)",
            "C = 16 alpha c k_B T / v_F^2; dT_Pi00/C = (dT_Pi00/hbar)/(C/hbar)",
        ],
    )
    for r, v in zip(ratio, d00 * CONSTANTS.hbar / C):
        tab.add(r, v)
    return tab


def run_fig3(cfg, threads=1, rtol=None):
    T = cfg.temperature
    b1, b2 = cfg.body("body1"), cfg.body("body2")
    ms = [E.EXACT, E.ASYMPTOTIC_L_GE_1, E.ZERO_T_TENSOR_AT_MATSUBARA]
    tab = Table(
        ["a [nm]", "dP1 [1]", "dP2 [1]", "P_exact [Pa]"],
        ["dP1: asymptotic tensor at l >= 1; dP2: thermal correction omitted at l >= 1", f"T = {T} K"],
    )
    for a in cfg.separations():
        res = compute(a, T, b1, b2, ms, rtol or cfg.k_rtol, threads)
        p = res[E.EXACT].pressure
        tab.add(a * 1e9, (p - res[ms[1]].pressure) / p, (p - res[ms[2]].pressure) / p, p)
    return tab


def _fig4_rows(cfg, threads, rtol, static_term="zero_t"):
    T = cfg.temperature
    b1, b2 = cfg.body("body1"), cfg.body("body2")
    implicit = E.ZERO_TEMPERATURE if static_term == "zero_t" else E.ZERO_T_TENSOR_AT_MATSUBARA
    for a in cfg.separations():
        res = _matsubara_sum(a, T, b1, b2, [E.EXACT, implicit], rtol or cfg.k_rtol, threads)
        zero = _zero_temperature(a, b1, b2, rtol or cfg.k_rtol, T)
        yield a, res[E.EXACT].pressure, res[implicit].pressure, zero.pressure


def run_fig4(cfg, threads=1, rtol=None):
    T = cfg.temperature
    tab = Table(
        ["a [nm]", "P_exact_over_B [1]", "P_implicit_over_B [1]", "P_T0_over_B [1]"],
        [
            "magnitudes |P|/B with B = k_B T/(8 pi a^3)",
            "implicit: zero-temperature tensor at the Matsubara frequencies (l = 0 included)",
            f"T = {T} K",
        ],
    )
    for a, pe, pi, p0 in _fig4_rows(cfg, threads, rtol):
        b = _b_norm(a, T)
        tab.add(a * 1e9, abs(pe) / b, abs(pi) / b, abs(p0) / b)
    return tab


def run_thermal(cfg, threads=1, rtol=None):
    static = cfg.section("thermal").get("static_term", "zero_t")
    if static not in ("zero_t", "exact"):
        raise cfg.error(("thermal", "static_term"), "must be 'zero_t' or 'exact'")
    tab = Table(
        [
            "a [nm]",
            "total_pressure [Pa]",
            "pressure_T0 [Pa]",
            "pressure_implicit_only [Pa]",
            "explicit_effect [Pa]",
            "implicit_effect [Pa]",
            "total_effect [Pa]",
        ],
        [f"T = {cfg.temperature} K, static_term = {static}"],
    )
    for a, pe, pi, p0 in _fig4_rows(cfg, threads, rtol, static):
        d = decomposition_from(pe, pi, p0)
        tab.add(a * 1e9, d.total_pressure, d.pressure_T0, d.pressure_implicit_only,
                d.explicit_effect, d.implicit_effect, d.total_effect)
    return tab


def run_experiment(cfg, threads=1, rtol=None):
    T = cfg.temperature
    sec = cfg.section("experiment")
    R = float(sec["sphere_radius_um"]) * 1e-6
    if not R > 0:
        raise cfg.error(("experiment", "sphere_radius_um"), "must be positive")
    sphere = cfg.body("body1")
    plate = cfg.body("body2")
    bare = LayerStack(None, plate.films, plate.substrate)
    plates = [("", plate, bare)]
    thick = sec.get("compare_thickness_nm")
    if thick is not None:
        if not plate.films:
            raise cfg.error(("experiment", "compare_thickness_nm"), "needs a plate with a film")
        films = ((plate.films[0][0], float(thick) * 1e-9),) + plate.films[1:]
        alt = LayerStack(plate.graphene, films, plate.substrate)
        plates.append(("_thick", alt, LayerStack(None, films, plate.substrate)))
    method = cfg.method
    cols = ["a [nm]"]
    for tag, _, _ in plates:
        cols += [f"gradient_graphene{tag} [N/m]", f"gradient_bare{tag} [N/m]",
                 f"gradient_graphene_T0{tag} [N/m]", f"thermal_graphene{tag} [N/m]"]
    tab = Table(cols, [f"proximity force gradient 2 pi R |P|, R = {R!r} m, T = {T} K, method = {method.value}"])
    scale = 2.0 * math.pi * R
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for a in cfg.separations():
            row = [a * 1e9]
            for _, with_g, without in plates:
                res = compute(a, T, sphere, with_g, [method, E.ZERO_TEMPERATURE], rtol or cfg.k_rtol, threads)
                bare_p = compute(a, T, sphere, without, [method], rtol or cfg.k_rtol, threads)[method].pressure
                g = -scale * res[method].pressure
                g0 = -scale * res[E.ZERO_TEMPERATURE].pressure
                row += [g, -scale * bare_p, g0, g - g0]
            tab.add(*row)
    return tab


def run_pressure(cfg, threads=1, rtol=None):
    T = cfg.temperature
    b1, b2 = cfg.body("body1"), cfg.body("body2")
    method = cfg.method
    tab = Table(
        ["a [nm]", "l [1]", "pressure_term [Pa]", "relative_contribution [1]"],
        [f"T = {T} K, method = {method.value}"],
    )
    summary = []
    for a in cfg.separations():
        res = compute(a, T, b1, b2, [method], rtol or cfg.k_rtol, threads)[method]
        diag = res.quadrature_diagnostics
        summary.append(
            f"a = {float(a) * 1e9:.6g} nm: free_energy = {_fmt(res.free_energy_per_area)} J/m^2, "
            f"pressure = {_fmt(res.pressure)} Pa, l_max = {res.l_max_used}, "
            f"evaluations = {diag.get('evaluations', 0)}, max_k_error = {_fmt(diag.get('max_k_error', 0.0))}"
        )
        if res.per_l_terms:
            for l, term, rel in res.per_l_terms:
                tab.add(a * 1e9, l, term, rel)
        else:
            tab.add(a * 1e9, -1, res.pressure, 1.0 if res.pressure else 0.0)
    tab.comments += summary
    return tab


def run_responses(cfg, threads=1, rtol=None):
    T = cfg.temperature
    params = cfg.graphene_params()
    method = cfg.method
    sec = cfg.section("responses")
    kspec = sec["k"]
    n = int(kspec["count"])
    if kspec.get("spacing", "log") == "log":
        ks = np.geomspace(float(kspec["min"]), float(kspec["max"]), n)
    else:
        ks = np.linspace(float(kspec["min"]), float(kspec["max"]), n)
    if np.any(ks <= 0):
        raise cfg.error(("responses", "k"), "wave numbers must be positive")
    tab = Table(
        ["l [1]", "k [rad/m]", "xi [rad/s]", "pi00_over_hbar [rad/m]", "pi_over_hbar [rad^3/m^3]",
         "alpha_par [1]", "alpha_perp [1]", "eps_par [1]", "eps_perp [1]",
         "chi_par [1/(J m^2)]", "chi_perp [1/(J m^2)]", "sigma_par [m/s]", "sigma_perp [m/s]"],
        [f"T = {T} K, delta = {params.delta} eV, method = {method.value}",
         f"chi: {GAUSSIAN_UNITS['chi']}; sigma: {GAUSSIAN_UNITS['sigma']}; nan = undefined at xi = 0"],
    )
    for l in sec["l_values"]:
        if not (isinstance(l, int) and l >= 0):
            raise cfg.error(("responses", "l_values"), "indices must be non-negative integers")
        xi = matsubara_frequency(l, T)
        for k in ks:
            pt = pol_tensor(l, float(k), T, params, method)
            rs = responses_from_tensor(pt, xi, float(k))
            tab.add(l, k, xi, pt.pi00_over_hbar, pt.pi_over_hbar, rs.alpha_par, rs.alpha_perp,
                    rs.eps_par, rs.eps_perp, rs.chi_par, rs.chi_perp, rs.sigma_par, rs.sigma_perp)
    return tab


RUNNERS = {
    "fig1": run_fig1,
    "fig3": run_fig3,
    "fig4": run_fig4,
    "thermal": run_thermal,
    "experiment": run_experiment,
    "pressure": run_pressure,
    "responses": run_responses,
}


def gnuplot_script(name, tab: Table):
    lines = [
        f"# gnuplot script for {name}.csv",
        "set datafile separator ','",
        "set datafile commentschars '#'",
        "set key autotitle columnhead",
        f"set xlabel '{tab.columns[0]}'",
    ]
    if name in ("fig3", "fig4"):
        lines.append("set logscale x")
    plots = [f"'{name}.csv' using 1:{i} with lines" for i in range(2, len(tab.columns) + 1)]
    lines.append("plot " + ", \\\n     ".join(plots))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# entry point


def build_parser():
    parser = argparse.ArgumentParser(prog="casimir", description="Casimir interaction with graphene: figure data and scenarios")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="scenario YAML file (defaults are built in)")
        p.add_argument("--out", type=Path, default=Path("."), help="output directory")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--tolerance", type=float, default=None, help="relative tolerance of the k-integrals")
        p.add_argument("--gnuplot", action="store_true", help="also write a gnuplot script")
    return parser


def run(subcommand, config_path=None, out=Path("."), threads=1, tolerance=None, gnuplot=False):
    """Run one subcommand; returns the process exit status."""
    try:
        if threads < 1:
            raise ConfigError("--threads must be >= 1")
        if tolerance is not None and not 0 < tolerance < 1:
            raise ConfigError("--tolerance must lie in (0, 1)")
        cfg = load_config(subcommand, config_path)
        if tolerance is not None:
            cfg.data.setdefault("tolerance", {})["k_rtol"] = float(tolerance)
        tab = RUNNERS[subcommand](cfg, threads=threads)
    except (ConfigError, DomainError, UnsupportedConfigurationError) as exc:
        print(f"casimir {subcommand}: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"casimir {subcommand}: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except CasimirError as exc:
        print(f"casimir {subcommand}: error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    out = Path(out)
    write_atomic(out / f"{subcommand}.csv", tab.render(subcommand))
    write_atomic(out / f"{subcommand}.config.yaml", cfg.effective_yaml())
    if gnuplot:
        write_atomic(out / f"{subcommand}.gp", gnuplot_script(subcommand, tab))
    return EXIT_OK


def main(argv=None):
    args = build_parser().parse_args(argv)
    return run(args.subcommand, args.config, args.out, args.threads, args.tolerance, args.gnuplot)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
