"""Command line: ``genea-sel <command> [options]``.

Every command writes into its output directory the resolved configuration
(``config.json``), a ``summary.json`` with version, seed, timings and gate
results, and its tables as CSV (or JSON with ``--format json``).

Exit status: 0 all gates pass, 1 a verification gate failed, 2 bad
configuration.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import __version__

OUT_ENV = "GENEA_SEL_OUT"
COMMANDS = ("simulate-moran", "simulate-families", "simulate-sde", "equilibrium",
            "analytic-curves", "verify-generators", "compare", "reproduce-figures")

COMMON_DEFAULTS = {
    "n": 100, "alpha": "0", "theta0": 0.5, "theta1": 0.5, "t": 8.0, "h_grid": None,
    "reps": 200, "dt": 1e-3, "families": 64, "seed": 0, "out": None, "format": "csv",
    "backend": "moran", "workers": None, "sample_size": 16, "burn_in": None,
}

COMMAND_DEFAULTS = {
    "simulate-moran": {"theta0": 0.0, "theta1": 0.0},
    "simulate-families": {"n": 50, "alpha": "2", "t": 2.0, "h_grid": "0.5,1,2", "reps": 1000},
    "simulate-sde": {"alpha": "0", "t": 4.0, "h_grid": "0.5,1,2", "reps": 500},
    "equilibrium": {"alpha": "1", "reps": 100000},
    "analytic-curves": {"alpha": "0.3", "t": 8.0},
    "verify-generators": {"families": "2,3,4,5"},
    "compare": {"n": 50, "alpha": "2", "t": 2.0, "h_grid": "0.5,1,2", "reps": 1000, "families": "16,32,64"},
    "reproduce-figures": {"n": 100, "alpha": "0,1,2,5,10", "t": 6.0, "reps": 200},
}


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# configuration


def parse_h_grid(spec, t: float) -> np.ndarray:
    """``start:stop:count`` (inclusive linspace) or a comma list; default ``0:t:81``."""
    if spec is None:
        grid = np.linspace(0.0, t, 81)
    elif isinstance(spec, (list, tuple)):
        grid = np.asarray(spec, dtype=float)
    else:
        s = str(spec)
        try:
            if ":" in s:
                a, b, k = s.split(":")
                grid = np.linspace(float(a), float(b), int(k))
            else:
                grid = np.array([float(v) for v in s.split(",") if v.strip()])
        except ValueError as exc:
            raise ConfigError(f"cannot parse h grid {spec!r}") from exc
    if grid.size == 0 or np.any(np.diff(grid) <= 0) or np.any(grid < 0):
        raise ConfigError("h grid must be nonempty, nonnegative and strictly increasing")
    return grid


def parse_list(spec, kind=float) -> list:
    if isinstance(spec, (list, tuple)):
        return [kind(v) for v in spec]
    try:
        return [kind(v) for v in str(spec).split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"cannot parse list {spec!r}") from exc


def load_config_file(path: str | None) -> dict:
    if not path:
        return {}
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {p}: {exc}") from exc
    if p.suffix in (".yaml", ".yml"):
        import yaml
        data = yaml.safe_load(text) or {}
    else:
        data = json.loads(text)
    if not isinstance(data, dict):
        raise ConfigError(f"config file {p} must hold a mapping")
    data = {k.replace("-", "_"): v for k, v in data.items()}
    unknown = set(data) - set(COMMON_DEFAULTS)
    if unknown:
        raise ConfigError(f"unknown config keys in {p}: {sorted(unknown)}")
    return data


def resolve_config(command: str, args: argparse.Namespace) -> dict:
    """Defaults, then the config file, then explicit flags."""
    cfg = dict(COMMON_DEFAULTS)
    cfg.update(COMMAND_DEFAULTS.get(command, {}))
    cfg.update(load_config_file(args.config))
    for key in COMMON_DEFAULTS:
        v = getattr(args, key, None)
        if v is not None:
            cfg[key] = v
    if cfg["format"] not in ("csv", "json"):
        raise ConfigError("format must be csv or json")
    if cfg["backend"] not in ("moran", "sde"):
        raise ConfigError("backend must be moran or sde")
    if cfg["out"] is None:
        cfg["out"] = str(Path(os.environ.get(OUT_ENV, "genea-sel-out")) / command)
    if cfg["workers"] is None:
        cfg["workers"] = os.cpu_count() or 1
    for key in ("n", "reps", "seed", "workers", "sample_size"):
        try:
            cfg[key] = int(cfg[key])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{key} must be an integer") from exc
    for key in ("theta0", "theta1", "t", "dt"):
        try:
            cfg[key] = float(cfg[key])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{key} must be a number") from exc
    if cfg["reps"] < 1:
        raise ConfigError("reps must be >= 1")
    if cfg["t"] <= 0:
        raise ConfigError("t must be > 0")
    cfg["command"] = command
    return cfg


# ---------------------------------------------------------------------------
# output helpers


class Output:
    def __init__(self, cfg: dict):
        self.dir = Path(cfg["out"])
        self.fmt = cfg["format"]
        self.files: list[str] = []
        try:
            self.dir.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise OSError(f"cannot create output directory {self.dir}: {exc}") from exc
        self.json("config", cfg)

    def path(self, name: str) -> Path:
        p = self.dir / name
        self.files.append(p.name)
        return p

    def json(self, name: str, data) -> Path:
        p = self.path(f"{name}.json")
        with open(p, "w") as fh:
            json.dump(data, fh, indent=2, sort_keys=True, default=_jsonable)
            fh.write("\n")
        return p

    def table(self, name: str, header: list[str], rows) -> Path:
        rows = [list(r) for r in rows]
        if self.fmt == "json":
            return self.json(name, {"columns": header, "rows": rows})
        p = self.path(f"{name}.csv")
        with open(p, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for r in rows:
                w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
        return p


def _jsonable(v):
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, Path):
        return str(v)
    return str(v)


def _single_alpha(cfg) -> float:
    vals = parse_list(cfg["alpha"])
    if len(vals) != 1:
        raise ConfigError(f"{cfg['command']} takes a single --alpha")
    if vals[0] < 0:
        raise ConfigError("alpha must be >= 0")
    return vals[0]


def _model(cfg, alpha=None):
    from .moran import ModelParams
    return ModelParams(cfg["n"], _single_alpha(cfg) if alpha is None else alpha,
                       cfg["theta0"], cfg["theta1"])


# ---------------------------------------------------------------------------
# commands; each returns (results, gates) with gates a name -> bool mapping


def cmd_simulate_moran(cfg, out: Output):
    from .analytics import neutral_cdf
    from .experiments import run_moran
    from .stats import cdf_table_is_valid, read_cdf_table

    params = _model(cfg)
    h = parse_h_grid(cfg["h_grid"], cfg["t"])
    run = run_moran(params, cfg["t"], cfg["reps"], seed=cfg["seed"], sample_size=cfg["sample_size"],
                    burn_in=cfg["burn_in"] or 0.0, workers=cfg["workers"])
    F = run.pooled()
    per = run.replicate_cdfs(h)
    N = params.N
    full = 1.0 / N + (1.0 - 1.0 / N) * per
    band = F.band(0.01)
    table = out.table("cdf", ["h", "offdiag", "offdiag_band", "full_matrix"],
                      zip(h, F.query(h), [band] * h.size, full.mean(axis=0)))
    out.table("replicates", ["replicate_id", "t", "h", "offdiag_cdf", "full_cdf"],
              ((r, cfg["t"], h[j], per[r, j], full[r, j]) for r in range(per.shape[0]) for j in range(h.size)))
    results = {"mean_distance": run.mean_distance().as_dict(), "band": band,
               "mean_frequency": float(run.frequencies.mean())}
    gates = {}
    if cfg["format"] == "csv":
        gates["cdf_file_valid"] = cdf_table_is_valid(read_cdf_table(table))
    if params.alpha == 0:
        hi = min(cfg["t"], float(h[-1]))
        sup = F.sup_distance(lambda x: neutral_cdf(x, cfg["t"]), 0.0, hi)
        results["sup_distance_to_neutral"] = sup
        gates["neutral_law"] = sup <= band
    return results, gates


def cmd_simulate_families(cfg, out: Output):
    from .families import (estimate_cdf_via_families, init_families_from_population,
                           record_trajectory, write_trajectory_csv)
    from .moran import initial_types, simulate_log
    from .rng import replicate_rng

    params = _model(cfg)
    h = parse_h_grid(cfg["h_grid"], cfg["t"])
    rows, ests = [], []
    for hv in h:
        e = estimate_cdf_via_families(params, cfg["t"], float(hv), cfg["reps"], seed=cfg["seed"],
                                      workers=cfg["workers"])
        ests.append(e.as_dict())
        rows.append((hv, e.mean, e.stderr, e.count))
    out.table("estimates", ["h", "estimate", "stderr", "replicates"], rows)
    rng = replicate_rng(cfg["seed"], 0, stream=5)
    types = initial_types(params, rng)
    simulate_log(types, params, cfg["t"], rng, record=False)
    traj = record_trajectory(init_families_from_population(types), params, float(h[-1]),
                             float(h[-1]) / 100, rng)
    if cfg["format"] == "csv":
        write_trajectory_csv(out.path("trajectory.csv"), traj)
    else:
        out.json("trajectory", {"columns": ["t", "family_statistic", "nonzero_families"], "rows": traj})
    gates = {"statistic_in_unit_interval": all(0 <= r[1] <= 1 for r in rows)}
    return {"estimates": ests}, gates


def cmd_simulate_sde(cfg, out: Output):
    from .rng import replicate_rng
    from .wf import SdeConfig, integrate_paths, neutral_phi1_mean, thm_key_estimator, thm_key_initial, write_path_summary

    alpha = _single_alpha(cfg)
    n = parse_list(cfg["families"], int)[0]
    h = parse_h_grid(cfg["h_grid"], cfg["t"])
    sde = SdeConfig(n=n, dt=cfg["dt"], alpha=alpha, theta0=cfg["theta0"], theta1=cfg["theta1"],
                    seed=cfg["seed"], paths=cfg["reps"])
    rows, gates = [], {}
    for hv in h:
        if hv <= 0 or hv >= cfg["t"]:
            continue
        e = thm_key_estimator(sde, cfg["t"], float(hv), workers=cfg["workers"])
        ref = float(neutral_phi1_mean(n, hv))
        rows.append((hv, e.mean, e.stderr, e.extra["phi2_mean"], ref))
        if alpha == 0:
            gates[f"neutral_moment_h={hv:g}"] = abs(e.mean - ref) <= 3 * e.stderr + 0.01
    out.table("estimates", ["h", "phi1_mean", "stderr", "phi2_mean", "neutral_formula"], rows)
    rng = replicate_rng(cfg["seed"], 0, stream=6)
    rec = integrate_paths(thm_key_initial(np.full(10, sde.y0), n), sde, float(h[-1]), rng,
                          record_every=max(1, int(round(float(h[-1]) / sde.dt / 50))))
    if cfg["format"] == "csv":
        write_path_summary(out.path("paths.csv"), rec)
    gates["simplex_preserved"] = bool(np.allclose(rec.final.sum(axis=1), 1.0) and (rec.final >= 0).all())
    return {"rows": rows}, gates


def cmd_equilibrium(cfg, out: Output):
    from .analytics import EquilibriumSpec, equilibrium_density, equilibrium_moments, equilibrium_sampler, moments_quadrature
    from .rng import replicate_rng

    alpha = _single_alpha(cfg)
    spec = EquilibriumSpec(alpha, cfg["theta0"], cfg["theta1"])
    mom = equilibrium_moments(alpha, cfg["theta0"], cfg["theta1"])
    sampler = equilibrium_sampler(spec)
    draws = 1 - sampler.sample(replicate_rng(cfg["seed"], 0, stream=4), cfg["reps"])
    s1, s2 = draws.mean(), (draws ** 2).mean()
    se1 = draws.std(ddof=1) / math.sqrt(draws.size)
    se2 = (draws ** 2).std(ddof=1) / math.sqrt(draws.size)
    x = np.linspace(0.0005, 0.9995, 1000)
    out.table("density", ["x", "density", "cdf"], zip(x, equilibrium_density(x, spec), sampler.cdf_at(x)))
    results = {"moments": mom.as_dict(), "sample_m1": s1, "sample_m2": s2, "stderr_m1": se1, "stderr_m2": se2,
               "alpha_m1": alpha * mom.m1, "alpha2_m2": alpha ** 2 * mom.m2}
    gates = {"sampler_m1": abs(s1 - mom.m1) <= 3 * se1, "sampler_m2": abs(s2 - mom.m2) <= 3 * se2}
    if mom.method == "closed":
        q1, q2 = moments_quadrature(alpha, cfg["theta0"], cfg["theta1"])
        results["quadrature"] = [q1, q2]
        gates["closed_vs_quadrature"] = abs(q1 - mom.m1) <= 1e-9 and abs(q2 - mom.m2) <= 1e-9
    return results, gates


def cmd_analytic_curves(cfg, out: Output):
    from scipy import integrate

    from . import plotting
    from .analytics import (ExpansionValidityWarning, laplace_expansion, neutral_cdf, small_alpha_cdf,
                            small_alpha_density, tau_at_zero_exact, tau_prime, upper_bound_curve,
                            write_curves_csv)

    alpha = _single_alpha(cfg)
    theta = cfg["theta0"]
    h = parse_h_grid(cfg["h_grid"], cfg["t"])
    if cfg["format"] == "csv":
        write_curves_csv(out.path("curves.csv"), h, alpha, theta)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ExpansionValidityWarning)
        small = small_alpha_cdf(h, alpha)
        eps = 1e-5
        hh = h[h > eps]
        fd = (small_alpha_cdf(hh + eps, alpha) - small_alpha_cdf(hh - eps, alpha)) / (2 * eps)
        deriv_err = float(np.max(np.abs(fd - small_alpha_density(hh, alpha)))) if hh.size else 0.0
    if cfg["format"] == "json":
        out.json("curves", {"h": h, "neutral": neutral_cdf(h), "small_alpha": small,
                            "upper_bound": upper_bound_curve(h, alpha, theta) if alpha > 0 else None})
    rows = []
    for lam in (0.5, 1.0, 2.0):
        quad = integrate.quad(lambda s: math.exp(-2 * lam * s) * tau_prime(s), 0, math.inf,
                              epsabs=1e-14, epsrel=1e-13, limit=200)[0]
        exact = (laplace_expansion(lam, 1.0) - laplace_expansion(lam, 0.0))
        rows.append((lam, exact, quad, abs(exact - quad)))
    out.table("laplace", ["lambda", "alpha2_coefficient", "quadrature", "abs_error"], rows)
    curves = {"neutral": (h, neutral_cdf(h)), f"small alpha={alpha:g}": (h, small)}
    if alpha > 0:
        curves[f"upper curve alpha={alpha:g}"] = (h, upper_bound_curve(h, alpha, theta))
    plotting.plot_cdfs(out.path("curves.svg"), curves, title="analytic distance laws")
    gates = {"tau_zero_exact": tau_at_zero_exact() == 0,
             "laplace_quadrature": max(r[3] for r in rows) <= 1e-8,
             "density_is_derivative": deriv_err <= 1e-10}
    return {"derivative_max_error": deriv_err, "laplace": rows,
            "expansion_valid": alpha <= 0.5}, gates


def cmd_verify_generators(cfg, out: Output):
    from .generator import family_ring, verify_mapping_table, verify_pair_identities

    ns = parse_list(cfg["families"], int)
    if any(n < 2 for n in ns):
        raise ConfigError("family counts must be >= 2")
    overrides = {}
    if cfg.get("corrupt"):
        name = cfg["corrupt"]
        for n in ns:
            r = family_ring(n)
            overrides.setdefault(n, {})[name] = r.alpha * r.y(0)
    lines, gates, t0 = [], {}, time.perf_counter()
    for n in ns:
        checks = verify_pair_identities(n) + verify_mapping_table(n, overrides=overrides.get(n))
        for c in checks:
            lines.append(c.line())
            gates[f"n={n}: {c.name}"] = c.passed
    elapsed = time.perf_counter() - t0
    text = "\n".join(lines) + "\n"
    with open(out.path("report.txt"), "w") as fh:
        fh.write(text)
    print(text, end="")
    return {"checks": len(lines), "seconds": elapsed}, gates


def cmd_compare(cfg, out: Output):
    from .experiments import compare_estimators

    params = _model(cfg)
    h = parse_h_grid(cfg["h_grid"], cfg["t"])
    ns = parse_list(cfg["families"], int)
    rep = compare_estimators(params, cfg["t"], [float(v) for v in h if v > 0], cfg["reps"], sde_n=ns,
                             dt=cfg["dt"], sde_paths=min(cfg["reps"], 500), seed=cfg["seed"],
                             workers=cfg["workers"])
    rows = []
    for r in rep["rows"]:
        rows.append((r["h"], "matrix_full", 0, r["matrix_full"]["mean"], r["matrix_full"]["stderr"]))
        rows.append((r["h"], "matrix_offdiag", 0, r["matrix_offdiag"]["mean"], r["matrix_offdiag"]["stderr"]))
        rows.append((r["h"], "family", 0, r["family"]["mean"], r["family"]["stderr"]))
        for s in r["sde"]:
            rows.append((r["h"], "sde", s["n"], s["mean"], s["stderr"]))
    out.table("estimates", ["h", "estimator", "sde_families", "mean", "stderr"], rows)
    gates = {f"matrix_vs_family_h={r['h']:g}": r["matrix_vs_family"]["agree"] for r in rep["rows"]}
    trend = {}
    for r in rep["rows"]:
        gaps = [abs(s["vs_matrix"]["gap"]) for s in r["sde"]]
        trend[f"h={r['h']:g}"] = {"gaps": gaps, "shrinking": all(b <= a for a, b in zip(gaps, gaps[1:]))}
    rep["sde_trend"] = trend
    return rep, gates


def cmd_reproduce_figures(cfg, out: Output):
    from . import plotting
    from .analytics import neutral_cdf, upper_bound_curve
    from .experiments import DEFAULT_EQUILIBRIUM_BURN_IN, alpha_sweep, sde_equilibrium_curve
    from scipy.integrate import trapezoid

    from .analytics import equilibrium_moments
    from .wf import SdeConfig, bounding_ode

    alphas = parse_list(cfg["alpha"])
    if any(a < 0 for a in alphas):
        raise ConfigError("alpha must be >= 0")
    theta = cfg["theta0"]
    if cfg["theta1"] != theta:
        raise ConfigError("reproduce-figures uses theta0 = theta1")
    h = parse_h_grid(cfg["h_grid"], cfg["t"])
    curves, bands, gates, results = {}, {}, {}, {}
    if cfg["backend"] == "moran":
        burn = DEFAULT_EQUILIBRIUM_BURN_IN if cfg["burn_in"] is None else float(cfg["burn_in"])
        sweep = alpha_sweep(alphas, cfg["n"], cfg["t"], cfg["reps"], theta=theta, seed=cfg["seed"],
                            sample_size=cfg["sample_size"], burn_in=burn, workers=cfg["workers"])
        results = sweep["report"]
        for a, run in sweep["runs"].items():
            F = run.pooled()
            curves[f"alpha={a:g}"] = (h, F.query(h))
            bands[f"alpha={a:g}"] = F.band(0.01)
        for row in results["rows"]:
            if "dominance" in row:
                gates[f"dominance_alpha={row['alpha']:g}"] = row["dominance"]["passed"]
            if "upper_curve_ok" in row:
                gates[f"upper_curve_alpha={row['alpha']:g}"] = row["upper_curve_ok"]
        means = [(r["alpha"], r["mean_distance"]["mean"], r["mean_distance"]["stderr"]) for r in results["rows"]]
    else:
        n = parse_list(cfg["families"], int)[0]
        record_every = max(1, int(round((h[1] - h[0]) / cfg["dt"]))) if h.size > 1 else 1
        rows, means = [], []
        base = None
        for a in alphas:
            sde = SdeConfig(n=n, dt=cfg["dt"], alpha=a, theta0=theta, theta1=theta, seed=cfg["seed"],
                            paths=cfg["reps"], mode="equilibrium")
            hs, m, se = sde_equilibrium_curve(sde, float(h[-1]), record_every)
            curves[f"alpha={a:g}"] = (hs, m)
            # E[R] from the curve by the trapezoid rule over the horizon
            mean_r = float(trapezoid(1 - m, hs))
            means.append((a, mean_r, 0.0))
            rows.append({"alpha": a, "mean_distance": mean_r})
            if a == 0:
                base = (m, se)
            elif base is not None:
                gap = float(np.max(base[0] - m - 3 * np.hypot(base[1], se)))
                gates[f"dominance_alpha={a:g}"] = gap <= 0
            if a > 0:
                # finite n starts at phi1 = 1/n, so the bound is the ODE solution rather than the limit curve
                f, _ = bounding_ode(a, theta, n, hs, equilibrium_moments(a, theta, theta).m2)
                gates[f"ode_bound_alpha={a:g}"] = bool(np.all(m - 3 * se <= f))
        results = {"rows": rows, "families": n}
    curves["neutral"] = (h, neutral_cdf(h))
    for a in alphas:
        if a > 0:
            curves[f"upper curve alpha={a:g}"] = (h, upper_bound_curve(h, a, theta))
    header = ["h"] + list(curves)
    table_rows = [[hv] + [float(np.interp(hv, x, y)) for x, y in curves.values()] for hv in h]
    out.table("cdf_by_alpha", header, table_rows)
    out.table("mean_vs_alpha", ["alpha", "mean_distance", "stderr"], means)
    plotting.plot_cdfs(out.path("fig_cdf.svg"), curves, title="equilibrium distance law", bands=bands)
    plotting.plot_mean_vs_alpha(out.path("fig_mean.svg"), [m[0] for m in means], [m[1] for m in means],
                                [m[2] for m in means], title="mean distance")
    return results, gates


HANDLERS = {
    "simulate-moran": cmd_simulate_moran,
    "simulate-families": cmd_simulate_families,
    "simulate-sde": cmd_simulate_sde,
    "equilibrium": cmd_equilibrium,
    "analytic-curves": cmd_analytic_curves,
    "verify-generators": cmd_verify_generators,
    "compare": cmd_compare,
    "reproduce-figures": cmd_reproduce_figures,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="genea-sel", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"genea-sel {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="YAML or JSON file with option values")
        s.add_argument("--n", type=int, help="population size N")
        s.add_argument("--alpha", help="selection strength (comma list for reproduce-figures)")
        s.add_argument("--theta0", type=float, help="mutation rate unfit -> fit")
        s.add_argument("--theta1", type=float, help="mutation rate fit -> unfit")
        s.add_argument("--t", type=float, help="time horizon T")
        s.add_argument("--h-grid", dest="h_grid", help="start:stop:count or comma list")
        s.add_argument("--reps", type=int, help="replicates, paths or draws")
        s.add_argument("--dt", type=float, help="Euler step of the diffusion")
        s.add_argument("--families", help="number of families n of the diffusion (comma list allowed)")
        s.add_argument("--seed", type=int, help="master seed")
        s.add_argument("--out", help=f"output directory (default ${OUT_ENV}/<command>)")
        s.add_argument("--format", choices=("csv", "json"))
        s.add_argument("--backend", choices=("moran", "sde"))
        s.add_argument("--workers", type=int, help="worker processes (default: all cores)")
        s.add_argument("--sample-size", dest="sample_size", type=int,
                       help="individuals sampled per Moran replicate")
        s.add_argument("--burn-in", dest="burn_in", type=float, help="type-only burn-in before the window")
        if name == "verify-generators":
            s.add_argument("--corrupt", help="replace the expected image of the named check (negative control)")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args.command, args)
        if getattr(args, "corrupt", None):
            cfg["corrupt"] = args.corrupt
        out = Output(cfg)
        t0 = time.perf_counter()
        results, gates = HANDLERS[args.command](cfg, out)
    except (ConfigError, ValueError) as exc:
        print(f"genea-sel: configuration error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"genea-sel: {exc}", file=sys.stderr)
        return 2
    elapsed = time.perf_counter() - t0
    passed = all(gates.values())
    out.json("summary", {"version": __version__, "command": args.command, "seed": cfg["seed"],
                         "config": cfg, "timings": {"seconds": round(elapsed, 3)},
                         "gates": gates, "passed": passed, "results": results})
    for name, ok in gates.items():
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
    print(f"wrote {out.dir}")
    return 0 if passed else 1


if __name__ == "__main__":
    sys.exit(main())
