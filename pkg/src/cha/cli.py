"""Command line front end: solve, compare, and figures subcommands.

Outputs are plot-ready two-column CSV (or JSON) files plus gnuplot scripts
for the figure recipes.  Exit codes: 0 success, 2 usage or configuration
error, 3 I/O failure.
"""

import argparse
import json
import os
import sys
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid

from . import oracles, solver
from .core import (
    InitialData,
    builtin_flux,
    gaussian_data,
    piecewise_constant_data,
    polynomial_flux,
    riemann_data,
    tabulated_data,
    make_grid,
)
from .parametrization import initial_map

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    flux: str = "burgers"
    init: str = "gaussian"
    times: tuple = (0.0,)
    n: int = 100
    mode: str = "dissipative"
    outputs: str = "."
    format: str = "csv"
    spike_filter: bool = False
    rho_max: float = 10.0
    projection: str = "fast"

    def __post_init__(self):
        if self.n < 2:
            raise ConfigError("n must be at least 2")
        if any(t < 0.0 for t in self.times):
            raise ConfigError("times must be nonnegative")
        times = tuple(sorted(dict.fromkeys(float(t) for t in self.times)))
        object.__setattr__(self, "times", times)
        if self.mode not in ("dissipative", "conservative", "both"):
            raise ConfigError("mode must be dissipative, conservative, or both")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        if self.projection not in ("fast", "gram"):
            raise ConfigError("projection must be fast or gram")


def parse_flux(spec):
    if spec in ("burgers", "cubic", "quintic"):
        return builtin_flux(spec)
    if spec.startswith("poly:"):
        try:
            coeffs = [float(c) for c in spec[len("poly:"):].split(",")]
        except ValueError:
            raise ConfigError(f"bad polynomial coefficients in {spec!r}") from None
        if len(coeffs) < 2:
            raise ConfigError("polynomial flux needs at least two coefficients")
        return polynomial_flux(coeffs)
    raise ConfigError(f"unknown flux spec {spec!r}")


def parse_init(spec) -> InitialData:
    if spec == "gaussian":
        return gaussian_data()
    if spec.startswith("gaussian:"):
        a, b = (float(v) for v in spec[len("gaussian:"):].split(","))
        return gaussian_data(domain=(a, b))
    if spec.startswith("riemann:"):
        parts = [float(v) for v in spec[len("riemann:"):].split(",")]
        if len(parts) == 2:
            return riemann_data(parts[0], parts[1])
        if len(parts) == 3:
            return riemann_data(parts[0], parts[1], x0=parts[2])
        raise ConfigError("riemann init takes UL,UR or UL,UR,X0")
    if spec.startswith("pwc:"):
        body = spec[len("pwc:"):]
        if "@" not in body:
            raise ConfigError("pwc init takes V0,...,Vk@X1,...,Xk")
        vals, locs = body.split("@", 1)
        return piecewise_constant_data(
            [float(v) for v in vals.split(",")],
            [float(x) for x in locs.split(",")],
        )
    if spec.startswith("tabulated:"):
        path = spec[len("tabulated:"):]
        rows = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
        return tabulated_data(rows[:, 0], rows[:, 1])
    raise ConfigError(f"unknown init spec {spec!r}")


def _format_time(t):
    return f"{t:g}".replace("-", "m").replace(".", "p")


def _write_cloud_csv(path, cloud, n, flux_label):
    lines = [f"# t={cloud.time:g} mode={cloud.mode} n={n} flux={flux_label}"]
    lines += [f"{x:.17g},{u:.17g}" for x, u in zip(cloud.xs, cloud.us)]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _write_cloud_json(path, cloud, n, flux_label):
    payload = {
        "t": cloud.time,
        "mode": cloud.mode,
        "n": n,
        "flux": flux_label,
        "points": [[float(x), float(u)] for x, u in zip(cloud.xs, cloud.us)],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")


def read_cloud_csv(path):
    """Round-trip reader for files written by cmd_solve."""
    meta = {}
    xs, us = [], []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                for token in line[1:].split():
                    key, _, value = token.partition("=")
                    meta[key] = value
                continue
            x, u = line.split(",")
            xs.append(float(x))
            us.append(float(u))
    from .core import SolutionCloud

    return SolutionCloud(
        time=float(meta.get("t", 0.0)),
        xs=np.array(xs),
        us=np.array(us),
        mode=meta.get("mode", "dissipative"),
    )


def cmd_solve(cfg: RunConfig) -> int:
    flux = parse_flux(cfg.flux)
    data = parse_init(cfg.init)
    grid = make_grid(cfg.n)
    param = initial_map(data, grid)
    modes = ("dissipative", "conservative") if cfg.mode == "both" else (cfg.mode,)
    os.makedirs(cfg.outputs, exist_ok=True)
    writer = _write_cloud_csv if cfg.format == "csv" else _write_cloud_json
    for t in cfg.times:
        for mode in modes:
            if mode == "dissipative":
                cloud = solver.solve_dissipative(
                    param, flux, t, method=cfg.projection, spike_filter=cfg.spike_filter
                )
            else:
                cloud = solver.solve_conservative(param, flux, t)
            name = f"solve_t{_format_time(t)}_{mode}.{cfg.format}"
            writer(os.path.join(cfg.outputs, name), cloud, cfg.n, flux.label)
    return EXIT_OK


def _potential_from_data(data, samples=20001):
    """w0(z) = integral of u0 from the domain left edge, by quadrature."""
    a, b = data.domain
    xs = np.linspace(a, b, samples)
    us = np.asarray(data.evaluate(xs), dtype=float)
    ws = np.concatenate([[0.0], cumulative_trapezoid(us, xs)])

    def w0(z):
        return np.interp(z, xs, ws)

    return w0


def _data_value_range(data, pad=0.5):
    if data.kind in ("riemann", "piecewise-constant", "tabulated"):
        vals = np.asarray(data.values, dtype=float)
    else:
        xs = np.linspace(data.domain[0], data.domain[1], 2001)
        vals = np.asarray(data.evaluate(xs), dtype=float)
    lo, hi = float(vals.min()), float(vals.max())
    span = max(hi - lo, 1e-6)
    return lo - pad * span, hi + pad * span


def cmd_compare(cfg: RunConfig, oracle: str) -> int:
    flux = parse_flux(cfg.flux)
    data = parse_init(cfg.init)
    grid = make_grid(cfg.n)
    param = initial_map(data, grid)

    if oracle not in ("riemann", "godunov", "hopflax", "characteristics"):
        raise ConfigError(f"unknown oracle {oracle!r}")
    if oracle == "riemann" and data.kind != "riemann":
        raise ConfigError("the riemann oracle needs riemann initial data")
    if oracle == "characteristics" and data.is_atomic:
        raise ConfigError("the characteristics oracle needs smooth initial data")
    if oracle == "hopflax":
        u_range = _data_value_range(data)
        try:
            oracles._check_convex(flux, u_range)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    results = []
    for t in cfg.times:
        cloud = solver.solve_dissipative(param, flux, t, method=cfg.projection)
        lo, hi = float(cloud.xs[0]), float(cloud.xs[-1])
        report = {"t": t, "oracle": oracle}
        if oracle == "hopflax":
            w0 = _potential_from_data(data)
            _, w_cha = solver.hamilton_jacobi_solve(param, flux, t, w0=w0)
            if t == 0.0:
                w_ref = np.asarray(w0(cloud.xs))
            else:
                u_range = _data_value_range(data)
                w_ref = np.array(
                    [oracles.hopf_lax(flux, w0, t, x, u_range=u_range) for x in cloud.xs]
                )
            diff = np.abs(w_cha - w_ref)
            weights = np.gradient(cloud.xs)
            report["linf"] = float(diff.max())
            report["l1"] = float(np.sum(diff * np.abs(weights)))
        else:
            if hi <= lo:
                qs = np.array([lo])
            else:
                qs = np.linspace(lo, hi, 2000)
            u_cha = solver.evaluate_many(cloud, qs)
            if oracle == "characteristics":
                u_ref = oracles.characteristics_solution(
                    flux, data.evaluate, t, qs, foot_bracket=data.domain
                )
            elif oracle == "riemann":
                sol = oracles.riemann_exact(flux, *data.values)
                x0 = data.locations[0]
                if t == 0.0:
                    u_ref = np.asarray(data.evaluate(qs), dtype=float)
                else:
                    u_ref = sol.sample_many((qs - x0) / t)
            else:
                xg, ug = oracles.godunov_solve(flux, data, t, cells=2000)
                mask = (xg >= lo) & (xg <= hi)
                qs = xg[mask]
                u_ref = ug[mask]
                u_cha = solver.evaluate_many(cloud, qs)
            diff = np.abs(u_cha - u_ref)
            dx = np.gradient(qs) if len(qs) > 1 else np.array([1.0])
            report["linf"] = float(diff.max())
            report["l1"] = float(np.sum(diff * np.abs(dx)))
        report["jumps"] = [
            {"position": j.position, "u_left": j.u_left, "u_right": j.u_right,
             "speed": j.speed}
            for j in solver.jump_set(cloud, flux)
        ]
        if oracle == "riemann":
            sol = oracles.riemann_exact(flux, *data.values)
            report["oracle_waves"] = [
                {"type": type(w).__name__.lower(), **w._asdict()} for w in sol.waves
            ]
        results.append(report)

    payload = json.dumps({"results": results}, indent=1, sort_keys=True)
    os.makedirs(cfg.outputs, exist_ok=True)
    out_path = os.path.join(cfg.outputs, "compare.json")
    with open(out_path, "w") as fh:
        fh.write(payload + "\n")
    print(payload)
    return EXIT_OK


_BURGERS_TIMES = (0.0, 3.0, 6.0, 106.0)


def _write_columns_csv(path, header, cols):
    rows = zip(*cols)
    lines = [header] + [",".join(f"{v:.17g}" for v in row) for row in rows]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _gnuplot_script(path, title, files, ylabel):
    lines = [
        "set datafile separator ','",
        f"set title '{title}'",
        "set xlabel 'x'",
        f"set ylabel '{ylabel}'",
        "plot \\",
    ]
    plots = [f"  '{os.path.basename(f)}' using 1:2 with points pt 7 ps 0.3 title '{lab}'"
             for f, lab in files]
    lines.append(", \\\n".join(plots))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def cmd_figures(figure_id, outputs=".", n=100) -> int:
    """Regenerate the data behind one of the nine study figures."""
    if figure_id not in range(1, 10):
        raise ConfigError("figure id must be between 1 and 9")
    os.makedirs(outputs, exist_ok=True)
    grid = make_grid(n)
    made = []

    def emit(name, header, cols, label):
        path = os.path.join(outputs, name)
        _write_columns_csv(path, header, cols)
        made.append((path, label))

    if figure_id in (1, 2):
        flux = builtin_flux("burgers")
        param = initial_map(gaussian_data(), grid)
        mode = "dissipative" if figure_id == 1 else "conservative"
        for t in _BURGERS_TIMES:
            cloud = (
                solver.solve_dissipative(param, flux, t)
                if mode == "dissipative"
                else solver.solve_conservative(param, flux, t)
            )
            emit(
                f"figure{figure_id}_t{_format_time(t)}.csv",
                f"# t={t:g} mode={mode} n={n} flux=burgers",
                (cloud.xs, cloud.us),
                f"t={t:g}",
            )
        ylabel = "u"
    elif figure_id in (3, 4, 5):
        flux = builtin_flux("burgers")
        param = initial_map(gaussian_data(), grid)
        from .hodge import cumulative_potential
        from .hull import lower_convex_hull

        for t in _BURGERS_TIMES:
            fieldc = solver.characteristic_map(param, flux, t)
            h = cumulative_potential(grid, fieldc.s_t)
            hulled = lower_convex_hull(grid, h, gradients=fieldc.s_t)
            if figure_id == 3:
                emit(
                    f"figure3_t{_format_time(t)}.csv",
                    f"# t={t:g} quantity=S n={n} flux=burgers",
                    (grid.points, fieldc.s_t),
                    f"t={t:g}",
                )
            elif figure_id == 4:
                emit(
                    f"figure4_t{_format_time(t)}_h.csv",
                    f"# t={t:g} quantity=h n={n} flux=burgers",
                    (grid.points, h),
                    f"h t={t:g}",
                )
                emit(
                    f"figure4_t{_format_time(t)}_hplus.csv",
                    f"# t={t:g} quantity=hplus n={n} flux=burgers",
                    (grid.points, hulled.h_plus),
                    f"h+ t={t:g}",
                )
            else:
                emit(
                    f"figure5_t{_format_time(t)}.csv",
                    f"# t={t:g} quantity=Splus n={n} flux=burgers",
                    (grid.points, hulled.s_plus),
                    f"t={t:g}",
                )
        ylabel = {3: "S(t,y)", 4: "h(t,y)", 5: "S+(t,y)"}[figure_id]
    elif figure_id in (6, 7, 8):
        if figure_id == 6:
            flux, data, times = builtin_flux("cubic"), riemann_data(-0.5, 0.5), (0.0, 10.0)
        elif figure_id == 7:
            flux = builtin_flux("cubic")
            data = piecewise_constant_data([1.0, -0.5, 0.25], [-0.5, 0.5])
            times = (0.0, 10.0)
        else:
            flux, data, times = builtin_flux("quintic"), riemann_data(0.0, 4.5), (0.0, 20.0)
        param = initial_map(data, grid)
        for t in times:
            cloud = solver.solve_dissipative(param, flux, t)
            emit(
                f"figure{figure_id}_t{_format_time(t)}.csv",
                f"# t={t:g} mode=dissipative n={n} flux={flux.label}",
                (cloud.xs, cloud.us),
                f"t={t:g}",
            )
        ylabel = "u"
    else:  # figure 9: fluid coupling, scalar w and density rho
        from scipy.special import ndtr

        flux = builtin_flux("burgers")
        param = initial_map(gaussian_data(), grid)
        for t in _BURGERS_TIMES:
            fieldw = solver.passive_scalar(param, flux, ndtr, t, rho_max=10.0)
            emit(
                f"figure9_t{_format_time(t)}_w.csv",
                f"# t={t:g} quantity=w n={n} flux=burgers",
                (fieldw.xs, fieldw.ws),
                f"w t={t:g}",
            )
            emit(
                f"figure9_t{_format_time(t)}_rho.csv",
                f"# t={t:g} quantity=rho n={n} flux=burgers",
                (fieldw.xs, fieldw.rhos),
                f"rho t={t:g}",
            )
        ylabel = "w, rho"

    script = os.path.join(outputs, f"figure{figure_id}.gp")
    _gnuplot_script(script, f"figure {figure_id}", made, ylabel)
    return EXIT_OK


def _build_parser():
    parser = argparse.ArgumentParser(prog="cha", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="JSON file whose keys mirror the flags")
        p.add_argument("--flux", help="burgers | cubic | quintic | poly:c0,c1,...")
        p.add_argument("--init", help="gaussian | riemann:UL,UR[,X0] | pwc:V@X | tabulated:PATH")
        p.add_argument("--times", help="comma separated times, e.g. 0,3,6,106")
        p.add_argument("--n", type=int, help="number of cloud points")
        p.add_argument("--mode", help="dissipative | conservative | both")
        p.add_argument("--out", help="output directory (default $CHA_OUTPUT_DIR or .)")
        p.add_argument("--format", help="csv | json")
        p.add_argument("--spike-filter", action="store_true", default=None)
        p.add_argument("--rho-max", type=float)
        p.add_argument("--projection", help="fast | gram")

    p_solve = sub.add_parser("solve", help="write solution cloud files")
    add_common(p_solve)
    p_cmp = sub.add_parser("compare", help="compare against an oracle")
    add_common(p_cmp)
    p_cmp.add_argument("--oracle", required=True,
                       help="riemann | godunov | hopflax | characteristics")
    p_fig = sub.add_parser("figures", help="regenerate figure data")
    p_fig.add_argument("--id", type=int, required=True, help="figure id, 1..9")
    p_fig.add_argument("--out", help="output directory")
    p_fig.add_argument("--n", type=int, default=100)
    return parser


_CONFIG_KEYS = {
    "flux": "flux",
    "init": "init",
    "times": "times",
    "n": "n",
    "mode": "mode",
    "out": "outputs",
    "format": "format",
    "spike_filter": "spike_filter",
    "rho_max": "rho_max",
    "projection": "projection",
}


def _parse_times(value):
    if isinstance(value, (list, tuple)):
        return tuple(float(t) for t in value)
    return tuple(float(t) for t in str(value).split(","))


def _config_from_args(args):
    settings = {}
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file: {exc}") from None
        for key, value in raw.items():
            if key not in _CONFIG_KEYS:
                raise ConfigError(f"unknown config key {key!r}")
            settings[_CONFIG_KEYS[key]] = value
    for arg_name, cfg_name in _CONFIG_KEYS.items():
        value = getattr(args, arg_name, None)
        if value is not None:
            settings[cfg_name] = value
    if "times" in settings:
        settings["times"] = _parse_times(settings["times"])
    if "outputs" not in settings:
        settings["outputs"] = os.environ.get("CHA_OUTPUT_DIR", ".")
    if "n" in settings:
        settings["n"] = int(settings["n"])
    if "spike_filter" in settings:
        settings["spike_filter"] = bool(settings["spike_filter"])
    if "rho_max" in settings:
        settings["rho_max"] = float(settings["rho_max"])
    return RunConfig(**settings)


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "figures":
            out = args.out or os.environ.get("CHA_OUTPUT_DIR", ".")
            return cmd_figures(args.id, outputs=out, n=args.n)
        cfg = _config_from_args(args)
        if args.command == "solve":
            return cmd_solve(cfg)
        return cmd_compare(cfg, args.oracle)
    except (ConfigError, ValueError) as exc:
        print(f"cha: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"cha: i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


def console_main():
    sys.exit(main())


if __name__ == "__main__":
    console_main()
