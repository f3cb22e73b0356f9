"""Scenario runner: subcommand dispatch, CSV/JSON-lines emission, manifests.

Every run is deterministic for a fixed config and seed, writes its data
files plus a ``manifest.json``, and can be reproduced byte-for-byte by
pointing ``--config`` at the emitted manifest.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import geodesics, kernels, kg, limits, sr5
from .config import ScenarioConfig, load_config, write_manifest
from .errors import ConfigError, NullOpticsError
from .geometry import named_metric

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _write_csv(path: Path, header, rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def fit_convergence_order(resolutions, errors):
    """Least-squares slope on log-log; order is minus the slope vs resolution.

    Returns ``(order, warning)`` where the warning flags an essentially
    flat error series.  Requires at least three points.
    """
    res = np.asarray(resolutions, dtype=float)
    err = np.asarray(errors, dtype=float)
    if len(res) < 3:
        raise ValueError("need at least 3 points to fit a convergence order")
    err = np.maximum(err, 1e-300)
    slope = np.polyfit(np.log(res), np.log(err), 1)[0]
    order = -float(slope)
    warning = None
    if abs(order) < 0.2:
        warning = "error series is flat; no convergence detected"
    return order, warning


def emit_convergence_table(path: Path, resolutions, errors):
    """Write a (resolution, error) table and return the fitted order."""
    _write_csv(path, ["resolution", "error"], zip(resolutions, errors))
    return fit_convergence_order(resolutions, errors)


# ---------------------------------------------------------------------------
# scenario runners
# ---------------------------------------------------------------------------

def _run_geodesic(cfg: ScenarioConfig, out: Path, seed: int, threads: int):
    metric_name = cfg.get("metric", "name", "flat5")
    params = {k: float(v) for k, v in cfg.sections.get("metric", {}).items()
              if k != "name"}
    params["c"] = cfg.c
    nm = named_metric(metric_name, **params)

    steps = cfg.get("geodesic", "steps", 400, int)
    step_size = cfg.get("geodesic", "step_size", 0.01, float)
    branch = cfg.get("geodesic", "branch", -1, int)
    interval = cfg.get("geodesic", "projection_interval", 16, int)
    u_spatial = np.array([cfg.get("geodesic", f"u{i}", 0.0, float) for i in (1, 2, 3)])

    fol = nm.foliation
    x0 = np.zeros(5)
    p4 = x0[:4]
    gt = np.asarray(fol.g(p4), dtype=float) / fol.phi_checked(p4) ** 2
    # solve the time component from gt(u, u) = -1
    spatial_part = float(u_spatial @ gt[1:, 1:] @ u_spatial)
    u0t = math.sqrt((1.0 + spatial_part) / -gt[0, 0])
    u0 = np.concatenate(([u0t], u_spatial))
    k = fol.q / fol.c**2
    A0 = np.asarray(fol.A(p4), dtype=float)
    v5 = float(branch) - k * float(A0 @ u0)
    v0 = np.concatenate((u0, [v5]))

    gcfg = geodesics.GeodesicConfig(step=step_size, n_steps=steps,
                                    null_projection_interval=interval)
    path = geodesics.integrate_null_geodesic_5d(nm.metric, x0, v0, gcfg)
    mbar = geodesics.conserved_mbar(path, fol)

    rows = []
    for i in range(len(path.params)):
        rows.append([path.params[i], *path.points[i], path.null_residuals[i],
                     mbar.values[i]])
    data = out / "geodesic.csv"
    _write_csv(data, ["param", "x0", "x1", "x2", "x3", "x5",
                      "null_residual", "mbar"], rows)
    return [data]


def _run_kernel(cfg: ScenarioConfig, out: Path, seed: int, threads: int):
    ensemble = cfg.get("kernel", "ensemble", "micro")
    axes = tuple(cfg.sections.get("kernel", {}).get("axes", "x1 x5").split())
    steps = cfg.get("kernel", "steps", 4, int)
    spacing = cfg.get("kernel", "spacing", 1.0, float)
    dx = cfg.get("kernel", "dx", 0, int)
    model = kernels.LatticePathModel(axes=axes, spacing=spacing,
                                     n_steps=steps, dx=dx)
    data = out / "kernel.csv"

    if ensemble == "micro":
        table = kernels.count_table(model)
        rows = [[x, x5, cnt] for (x, x5), cnt in sorted(table.items())]
        _write_csv(data, ["dx", "dx5", "count"], rows)
        return [data]

    lam_min = cfg.get("kernel", "lambda_min", 0.0, float)
    lam_max = cfg.get("kernel", "lambda_max", 3.0, float)
    count = cfg.get("kernel", "lambda_count", 20, int)
    lams = np.linspace(lam_min, lam_max, count)

    if ensemble == "qm":
        def one(lam):
            return kernels.quantum_kernel(model, lam).value

        values = _map(one, lams, threads)
        rows = [[lam, v.real, v.imag] for lam, v in zip(lams, values)]
        _write_csv(data, ["lambda_inv", "re", "im"], rows)
        return [data]

    if ensemble == "sm":
        lams = np.maximum(lams, 1e-6)
        d_min = cfg.get("kernel", "d_min", 0.0, float)
        method = cfg.get("kernel", "method", "transfer")
        dx5 = cfg.get("kernel", "dx5", 0, int)
        if method == "sampled":
            samples = cfg.get("kernel", "samples", 2000, int)

            def one(lam):
                est = kernels.thermal_kernel_sampled(model, lam, dx5=dx5,
                                                     n_samples=samples, seed=seed)
                return est.value, est.statistical_error

            results = _map(one, lams, threads)
            rows = [[lam, v, e] for lam, (v, e) in zip(lams, results)]
            _write_csv(data, ["Lambda_inv", "value", "stat_error"], rows)
        else:
            def one(lam):
                return kernels.thermal_kernel(model, lam, dx5=dx5, d_min=d_min).value

            values = _map(one, lams, threads)
            rows = [[lam, v] for lam, v in zip(lams, values)]
            _write_csv(data, ["Lambda_inv", "value"], rows)
        return [data]

    raise ConfigError(f"unknown ensemble '{ensemble}'")


def _map(func, items, threads):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(func, items))
    return [func(x) for x in items]


def _run_limit_check(cfg: ScenarioConfig, out: Path, seed: int, threads: int):
    suite = cfg.get("limit", "suite", "schrodinger")
    data = out / "limit.csv"
    extra = {}

    if suite == "schrodinger":
        m = cfg.get("limit", "mass", 1.0, float)
        t = cfg.get("limit", "time", 1.0, float)
        x1 = cfg.get("limit", "x1", 0.0, float)
        x2 = cfg.get("limit", "x2", 0.5, float)
        omega = cfg.get("limit", "omega", 0.4, float)
        resolutions = cfg.ints("limit", "resolutions", (8, 16, 32, 64))

        def one(n):
            sliced = limits.sliced_propagator(m, t, x1, x2, n, hbar=cfg.hbar,
                                              omega=omega)
            exact = (limits.harmonic_propagator(m, omega, t, x1, x2, hbar=cfg.hbar)
                     if omega else limits.free_propagator(m, t, x1, x2, hbar=cfg.hbar))
            return abs(sliced - exact) / abs(exact)

        errors = _map(one, resolutions, threads)
        order, warning = emit_convergence_table(data, resolutions, errors)
        extra = {"fitted_order": order, "warning": warning}
    elif suite == "fokker-planck":
        Lam = cfg.get("limit", "Lam", 1.0, float)
        u = cfg.get("limit", "u", 1.0, float)
        x1 = cfg.get("limit", "x1", 0.0, float)
        x2 = cfg.get("limit", "x2", 0.0, float)
        resolutions = cfg.ints("limit", "resolutions", (125, 250, 500, 1000))

        def one(n):
            chk = limits.fokker_planck_check(Lam, u, x1, x2, n, c=cfg.c)
            return chk.rel_error

        errors = _map(one, resolutions, threads)
        order, warning = emit_convergence_table(data, resolutions, errors)
        extra = {"fitted_order": order, "warning": warning}
    elif suite == "transverse":
        m = cfg.get("limit", "mass", 1.0, float)
        t = cfg.get("limit", "time", 1.0, float)
        p_zs = cfg.floats("limit", "p_z", (20.0, 40.0, 80.0))
        rows = []
        for p_z in p_zs:
            chk = limits.transverse_mode_projection_check(
                p_z, t, (0.0, 0.0), (0.3, 0.1), m, n5=16, c=cfg.c, hbar=cfg.hbar)
            rows.append([p_z, chk.abs_error])
        _write_csv(data, ["p_z", "projection_error"], rows)
    else:
        raise ConfigError(f"unknown suite '{suite}'")
    return [data], extra


def _run_kg_check(cfg: ScenarioConfig, out: Path, seed: int, threads: int):
    sides = cfg.ints("kg", "sides", (3, 4, 5))
    spacing = cfg.get("kg", "spacing", 1.0, float)
    scale = cfg.get("kg", "length_scale", 0.4, float)
    mode = cfg.get("kg", "mode_index", 1, int)
    dims = cfg.get("kg", "dims", 5, int)
    rows = []
    for side in sides:
        t = kg.weight_from_scale(spacing, scale)
        kernel = kg.lattice_resolvent(side, t, dims=dims, spacing=spacing)
        res = kg.kg_mode_residual(kernel, mode)
        rows.append([side, t, res.defining_max, res.mode_residual_max])
    data = out / "kg.csv"
    _write_csv(data, ["side", "t", "defining_residual", "mode_residual"], rows)
    return [data]


def _run_pair_create(cfg: ScenarioConfig, out: Path, seed: int, threads: int):
    E1 = cfg.get("pair", "energy1", 2.0, float)
    E2 = cfg.get("pair", "energy2", 2.0, float)
    d1 = cfg.floats("pair", "direction1", (0.0, 0.0, 1.0))
    d2 = cfg.floats("pair", "direction2", (0.0, 0.0, -1.0))
    m_X = cfg.get("pair", "m_X", 1.0, float)
    g1 = sr5.make_null_momentum(E1, d1, 0.0, c=cfg.c)
    g2 = sr5.make_null_momentum(E2, d2, 0.0, c=cfg.c)
    pX, pXbar = sr5.pair_creation(g1, g2, m_X, c=cfg.c)
    data = out / "momenta.jsonl"
    lines = []
    for label, p in (("photon1", g1), ("photon2", g2),
                     ("particle", pX), ("antiparticle", pXbar)):
        lines.append(json.dumps({
            "label": label,
            "p": [float(v) for v in p.array],
            "null_residual": p.null_residual(),
        }, sort_keys=True))
    data.write_text("\n".join(lines) + "\n")
    return [data]


def _run_curvature_check(cfg: ScenarioConfig, out: Path, seed: int, threads: int):
    from .curvature import field_equation_residual

    metric_name = cfg.get("metric", "name", "flat5")
    params = {k: float(v) for k, v in cfg.sections.get("metric", {}).items()
              if k != "name"}
    params["c"] = cfg.c
    nm = named_metric(metric_name, **params)
    extent = cfg.get("curvature", "grid_extent", 0.5, float)
    n = cfg.get("curvature", "grid_points", 3, int)
    step = cfg.get("curvature", "step", 1e-3, float)
    grid = np.linspace(-extent, extent, n)
    rows = []
    for x1 in grid:
        for x3 in grid:
            p4 = np.array([0.0, x1, 0.0, x3])
            res = field_equation_residual(nm.foliation, p4, step=step)
            rows.append([x1, x3,
                         float(np.max(np.abs(res.einstein))),
                         float(np.max(np.abs(res.maxwell))),
                         abs(res.phi)])
    data = out / "curvature.csv"
    _write_csv(data, ["x1", "x3", "einstein_norm", "maxwell_norm", "phi_norm"], rows)
    return [data]


_RUNNERS = {
    "geodesic": _run_geodesic,
    "kernel": _run_kernel,
    "limit-check": _run_limit_check,
    "kg-check": _run_kg_check,
    "pair-create": _run_pair_create,
    "curvature-check": _run_curvature_check,
}


def run(config: ScenarioConfig, out, seed: int = 0, threads: int = 1) -> int:
    """Execute a scenario: data files plus a manifest into ``out``."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    runner = _RUNNERS[config.kind]
    result = runner(config, out, seed, threads)
    if isinstance(result, tuple):
        data_files, extra = result
    else:
        data_files, extra = result, {}
    write_manifest(out, config, seed, threads, data_files, extra=extra)
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="nulloptics",
        description="Run 5D null-path propagation scenarios.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for kind in _RUNNERS:
        p = sub.add_parser(kind, help=f"run a {kind} scenario")
        p.add_argument("--config", required=False,
                       help="INI scenario file or a manifest.json from a previous run")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threads", type=int, default=1)
    args = parser.parse_args(argv)

    try:
        if args.config:
            config = load_config(args.config)
            if config.kind != args.command:
                raise ConfigError(
                    f"config kind '{config.kind}' does not match "
                    f"subcommand '{args.command}'"
                )
        else:
            config = ScenarioConfig(kind=args.command, sections={},
                                    constants={"c": 1.0, "hbar": 1.0,
                                               "k_B": 1.0, "x5_scale": 1.0})
    except (ConfigError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        return run(config, args.out, seed=args.seed, threads=args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NullOpticsError, FloatingPointError, np.linalg.LinAlgError,
            ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
