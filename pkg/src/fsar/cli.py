"""Command line interface.

Subcommands: ``fit`` (estimate the slope function and rho), ``test``
(normalized cross-covariance significance test), ``simulate`` (Monte
Carlo scenarios from a config file), and ``weights`` (build and inspect
a proximity matrix).  Every run writes ``report.json`` into the output
directory.

Exit codes: 0 success, 2 bad input (files, shapes, flag values), 3
numerical failure inside the estimation machinery.
"""

import argparse
import os
import sys
import time
from dataclasses import replace

import numpy as np

from . import __version__
from .basis import FunctionalSample, Grid, evaluate_function, make_basis, project
from .errors import FsarNumericalError
from .estimate import (
    LS_METHOD,
    ML_METHOD,
    estimate_sigma2,
    fit_ls,
    fit_ml,
    gls_coefficients,
)
from .inference import confidence_band, test_beta
from .io import (
    load_scenario_configs,
    read_edges_csv,
    read_grid_csv,
    read_matrix_csv,
    read_vector_csv,
    sha256_digest,
    write_band_csv,
    write_matrix_csv,
    write_report,
    write_summary_csv,
)
from .model import TruncatedModel
from .sim import run_scenario, scenario_inputs
from .spatial import SpatialWeights, row_standardize, symmetrize, weights_from_coordinates

_FITTERS = {ML_METHOD: fit_ml, LS_METHOD: fit_ls}


def _jsonsafe(obj):
    """Recursively convert numpy scalars/arrays and drop non-finite floats."""
    if isinstance(obj, dict):
        return {key: _jsonsafe(value) for key, value in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonsafe(value) for value in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonsafe(value) for value in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        value = float(obj)
        return value if np.isfinite(value) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def _out_dir(args):
    os.makedirs(args.out, exist_ok=True)
    return args.out


def _write(args, payload, started):
    payload["version"] = __version__
    payload["timings"] = {"total_s": time.perf_counter() - started}
    path = os.path.join(_out_dir(args), "report.json")
    write_report(path, _jsonsafe(payload))
    return path


def _load_sample(args):
    curves = read_matrix_csv(args.curves)
    if args.grid:
        grid = read_grid_csv(args.grid)
    else:
        grid = Grid.uniform(0.0, 1.0, curves.shape[1])
    return FunctionalSample(curves=curves, grid=grid)


def _build_weights(args, warnings_list):
    chosen = [name for name in ("weights", "edges", "coords")
              if getattr(args, name, None) is not None]
    if len(chosen) != 1:
        raise ValueError("give exactly one of --weights, --edges, --coords")
    source = chosen[0]
    if source == "weights":
        w = SpatialWeights(read_matrix_csv(args.weights))
        if not w.symmetric:
            warnings_list.append(
                "proximity matrix was not symmetric; replaced by (W + W')/2"
            )
            w = symmetrize(w)
        return w, f"matrix:{args.weights}"
    if source == "edges":
        w = SpatialWeights(read_edges_csv(args.edges))
        return symmetrize(row_standardize(w)), f"edges:{args.edges}"
    coords = read_matrix_csv(args.coords)
    if args.distance is not None:
        w = weights_from_coordinates(coords, method="distance", threshold=args.distance)
        desc = f"coords:{args.coords} distance<{args.distance}"
    else:
        w = weights_from_coordinates(coords, method="knn", k=args.knn)
        desc = f"coords:{args.coords} knn={args.knn}"
    return symmetrize(row_standardize(w)), desc


def _fit_model(args, warnings_list):
    sample = _load_sample(args)
    y = read_vector_csv(args.response)
    weights, source = _build_weights(args, warnings_list)
    basis = make_basis(args.basis, args.k, sample.grid)
    model = TruncatedModel(y, project(sample, basis), weights)
    return sample, y, weights, basis, model, source


def _cmd_fit(args):
    started = time.perf_counter()
    notes = []
    sample, _, _, basis, model, source = _fit_model(args, notes)
    fit = _FITTERS[args.method](model)
    results = {
        "method": fit.method,
        "rho_hat": fit.rho_hat,
        "sigma2_hat": fit.sigma2_hat,
        "b_hat": fit.b_hat,
        "converged": fit.converged,
        "iterations": fit.iterations,
        "n": fit.n,
        "k": fit.k,
        "rho_interval": list(fit.rho_interval),
        "objective_final": fit.objective_trace[-1],
        "band_level": None,
    }
    if args.band is not None:
        from .plots import plot_band

        band = confidence_band(fit, basis, level=args.band)
        out = _out_dir(args)
        write_band_csv(os.path.join(out, "band.csv"), band)
        plot_band(band, os.path.join(out, "band.svg"))
        results["band_level"] = args.band
    payload = {
        "command": "fit",
        "inputs": {
            "curves": args.curves,
            "curves_sha256": sha256_digest(args.curves),
            "response": args.response,
            "weights_source": source,
            "grid": args.grid or f"uniform[0,1]x{sample.grid.size}",
            "basis": args.basis,
            "k": args.k,
        },
        "warnings": notes + list(fit.warnings),
        "results": results,
    }
    path = _write(args, payload, started)
    print(
        f"rho_hat={fit.rho_hat:.6g} sigma2_hat={fit.sigma2_hat:.6g} "
        f"converged={fit.converged} (report: {path})"
    )
    return 0


def _cmd_test(args):
    started = time.perf_counter()
    notes = []
    sample, y, weights, basis, model, source = _fit_model(args, notes)
    if args.beta0 is not None:
        beta0 = read_vector_csv(args.beta0)
        null_desc = f"file:{args.beta0}"
    else:
        beta0 = None
        null_desc = "zero"
    if args.rho is not None:
        rho_used = args.rho
        rho_desc = "given"
        if args.sigma2 is not None:
            sigma2_used = args.sigma2
        else:
            b = gls_coefficients(model, rho_used)
            sigma2_used = estimate_sigma2(model, b, rho_used)
    else:
        fit = _FITTERS[args.method](model)
        notes.extend(fit.warnings)
        rho_used = fit.rho_hat
        rho_desc = f"estimated ({fit.method})"
        sigma2_used = (
            args.sigma2
            if args.sigma2 is not None
            else estimate_sigma2(model, fit.b_hat, rho_used)
        )
    outcome = test_beta(
        sample, y, weights, rho_used, beta0,
        k_n=args.kn, alpha=args.alpha, sigma2_hat=sigma2_used, basis=basis,
    )
    payload = {
        "command": "test",
        "inputs": {
            "curves": args.curves,
            "response": args.response,
            "weights_source": source,
            "basis": args.basis,
            "k": args.k,
            "null": null_desc,
        },
        "warnings": notes,
        "results": {
            "t_n": outcome.t_n,
            "k_n": outcome.k_n,
            "alpha": outcome.alpha,
            "reject": outcome.reject,
            "rho_used": rho_used,
            "rho_source": rho_desc,
            "sigma2_used": sigma2_used,
            "eigenvalues_used": outcome.eigenvalues_used,
        },
    }
    path = _write(args, payload, started)
    verdict = "reject" if outcome.reject else "do not reject"
    print(
        f"T_n={outcome.t_n:.6g} k_n={outcome.k_n} alpha={outcome.alpha} "
        f"-> {verdict} (report: {path})"
    )
    return 0


def _cmd_simulate(args):
    started = time.perf_counter()
    configs = load_scenario_configs(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.replicates is not None:
        overrides["replicates"] = args.replicates
    if overrides:
        configs = [replace(cfg, **overrides) for cfg in configs]
    summaries = [
        run_scenario(cfg, method=args.method, workers=args.threads)
        for cfg in configs
    ]
    out = _out_dir(args)
    write_summary_csv(os.path.join(out, "table.csv"), summaries)
    from .plots import plot_curves, plot_slope

    # curves and slope depend only on the shared seed, not on rho_true
    _, _, _, sample, truth = scenario_inputs(configs[0])
    plot_curves(sample, os.path.join(out, "curves.svg"))
    plot_slope(configs[0].grid, truth.values, os.path.join(out, "beta.svg"),
               raw=truth.raw)
    payload = {
        "command": "simulate",
        "inputs": {
            "config": args.config,
            "seed": configs[0].seed,
            "method": args.method,
            "threads": args.threads,
        },
        "warnings": [],
        "results": {
            "scenarios": [
                {
                    "rho_true": s.rho_true,
                    "rho_hat_mean": s.rho_hat_mean,
                    "rho_hat_sd": s.rho_hat_sd,
                    "sigma2_hat_mean": s.sigma2_hat_mean,
                    "mise": s.mise,
                    "mise_abs": s.mise_abs,
                    "replicates": s.replicates,
                    "replicates_converged": s.replicates_converged,
                }
                for s in summaries
            ]
        },
    }
    path = _write(args, payload, started)
    for s in summaries:
        print(
            f"rho_true={s.rho_true:.2f} rho_hat={s.rho_hat_mean:.4f} "
            f"mise={s.mise:.4f} sigma2_hat={s.sigma2_hat_mean:.4f} "
            f"({s.replicates_converged}/{s.replicates} converged)"
        )
    print(f"table: {os.path.join(out, 'table.csv')} (report: {path})")
    return 0


def _cmd_weights(args):
    started = time.perf_counter()
    notes = []
    w, source = _build_weights(args, notes)
    out = _out_dir(args)
    write_matrix_csv(os.path.join(out, "weights.csv"), w.matrix)
    interval = None
    if w.eigenvalues is not None and w.eigenvalues[0] < 0 < w.eigenvalues[-1]:
        interval = [1.0 / w.eig_min, 1.0 / w.eig_max]
    payload = {
        "command": "weights",
        "inputs": {"weights_source": source},
        "warnings": notes,
        "results": {
            "n": w.n,
            "symmetric": w.symmetric,
            "eig_min": w.eig_min,
            "eig_max": w.eig_max,
            "rho_interval": interval,
        },
    }
    path = _write(args, payload, started)
    print(f"n={w.n} symmetric={w.symmetric} rho_interval={interval} (report: {path})")
    return 0


def _add_weight_flags(sub):
    sub.add_argument("--weights", help="dense proximity matrix CSV, used as given")
    sub.add_argument("--edges", help="undirected edge list CSV (i,j[,weight])")
    sub.add_argument("--coords", help="region coordinates CSV, one x,y row per region")
    sub.add_argument("--knn", type=int, default=4,
                     help="neighbour count for --coords (default 4)")
    sub.add_argument("--distance", type=float,
                     help="distance threshold for --coords instead of --knn")


def _add_model_flags(sub):
    sub.add_argument("--curves", required=True, help="curve sample CSV, one row per region")
    sub.add_argument("--response", required=True, help="response vector CSV")
    sub.add_argument("--grid", help="observation points CSV (default uniform on [0, 1])")
    sub.add_argument("--basis", choices=("bspline", "fourier"), default="bspline")
    sub.add_argument("--k", type=int, default=15, help="basis size (default 15)")
    sub.add_argument("--method", choices=(ML_METHOD, LS_METHOD), default=ML_METHOD)
    _add_weight_flags(sub)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="fsar",
        description="Scalar-on-function regression with spatially "
                    "autoregressive errors.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    fit = subs.add_parser("fit", help="estimate the slope function and rho")
    _add_model_flags(fit)
    fit.add_argument("--band", type=float,
                     help="also write a pointwise band at this level, e.g. 0.95")
    fit.add_argument("--out", default=".", help="output directory")
    fit.set_defaults(func=_cmd_fit)

    test = subs.add_parser("test", help="test a null slope function")
    _add_model_flags(test)
    null = test.add_mutually_exclusive_group(required=True)
    null.add_argument("--beta0", help="null slope values on the grid, CSV")
    null.add_argument("--null-zero", action="store_true",
                      help="test the zero slope function")
    test.add_argument("--rho", type=float,
                      help="use this rho for the transforms instead of estimating it")
    test.add_argument("--sigma2", type=float,
                      help="use this residual variance instead of estimating it")
    test.add_argument("--kn", type=int, help="number of leading eigenvalues")
    test.add_argument("--alpha", type=float, default=0.05, help="test level")
    test.add_argument("--out", default=".", help="output directory")
    test.set_defaults(func=_cmd_test)

    simulate = subs.add_parser("simulate", help="run Monte Carlo scenarios")
    simulate.add_argument("--config", default="table1",
                          help="config file path or bundled name (default table1)")
    simulate.add_argument("--method", choices=(ML_METHOD, LS_METHOD), default=ML_METHOD)
    simulate.add_argument("--seed", type=int, help="override the config seed")
    simulate.add_argument("--replicates", type=int, help="override the replicate count")
    simulate.add_argument("--threads", type=int, default=1, help="worker threads")
    simulate.add_argument("--out", default=".", help="output directory")
    simulate.set_defaults(func=_cmd_simulate)

    weights = subs.add_parser("weights", help="build and inspect a proximity matrix")
    _add_weight_flags(weights)
    weights.add_argument("--out", default=".", help="output directory")
    weights.set_defaults(func=_cmd_weights)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FsarNumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
