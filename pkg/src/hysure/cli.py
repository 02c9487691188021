"""Command-line front end: simulate | rank | model-select | bench | noise-est.

Machine-readable results go to stdout (JSON by default, CSV with
``--format csv``); progress logs go to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from fractions import Fraction

import numpy as np

from .basis import MODELS, ModelSpec
from .core import NoiseModel, read_cube, write_csv
from .noise import estimate_noise
from .sim import ABUNDANCE_MODES, ETA_MODES, SceneConfig, load_endmembers_csv, save_scene, simulate_scene
from .sure import SureConfig, model_select, select_rank
from .wavelet import WaveletSpec

log = logging.getLogger("hysure")

BENCH_RANKS = (3, 5, 10, 15, 20, 30)
BENCH_SNRS = (10, 15, 20, 25, 35, 50)


# ---------------------------------------------------------------------------
# argument types


def positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def eta_value(text: str) -> float:
    """Accept decimals ('0.0556') and fractions ('1/18')."""
    try:
        v = float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if v < 0:
        raise argparse.ArgumentTypeError("eta must be >= 0")
    return v


def size_triple(text: str) -> tuple[int, int, int]:
    parts = text.lower().split("x")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"size must look like HxWxB, got {text!r}")
    return tuple(positive_int(p) for p in parts)


def int_list(text: str) -> tuple[int, ...]:
    try:
        vals = tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def float_list(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def default_threads() -> int:
    env = os.environ.get("HYSURE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            log.warning("ignoring non-integer HYSURE_THREADS=%r", env)
    return os.cpu_count() or 1


# ---------------------------------------------------------------------------
# shared option groups


def _add_grid_opts(p):
    g = p.add_argument_group("grid")
    g.add_argument("--lambda-max", type=float, default=4.0, help="largest threshold (default 4)")
    g.add_argument("--lambda-steps", type=positive_int, default=201,
                   help="number of evenly spaced thresholds on [0, lambda-max] (default 201)")
    g.add_argument("--rank-max", type=positive_int, default=None,
                   help="largest rank swept (default min(n, p))")
    g.add_argument("--taps", type=positive_int, default=8, help="spatial Daubechies taps (default 8)")
    g.add_argument("--levels", type=positive_int, default=5, help="spatial wavelet levels (default 5)")
    g.add_argument("--threads", type=positive_int, default=None,
                   help="worker threads (default HYSURE_THREADS or all cores)")


def _add_output_opts(p):
    p.add_argument("--format", choices=("json", "csv"), default="json")


def _sure_config(args, parser, p_bands=None, n_pixels=None, noise=None) -> SureConfig:
    if args.lambda_max < 0:
        parser.error("--lambda-max must be >= 0")
    try:
        spatial = WaveletSpec(taps=args.taps, levels=args.levels)
    except ValueError as exc:
        parser.error(str(exc))
    ranks = None
    if args.rank_max is not None:
        if p_bands is not None and args.rank_max > min(p_bands, n_pixels):
            parser.error(f"--rank-max exceeds min(n, p) = {min(p_bands, n_pixels)}")
        ranks = tuple(range(1, args.rank_max + 1))
    lambdas = tuple(np.linspace(0.0, args.lambda_max, args.lambda_steps))
    workers = args.threads if args.threads is not None else default_threads()
    return SureConfig(wavelet_spatial=spatial, lambda_grid=lambdas, rank_grid=ranks,
                      noise=noise, workers=workers)


def _emit(obj, fmt, header=None, rows=None, out=None):
    out = out or sys.stdout
    if fmt == "csv" and header is not None:
        write_csv(out, header, rows)
    else:
        out.write(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _load_noise(path, bands, parser):
    if path is None:
        return None
    try:
        noise = NoiseModel.load(path)
    except (OSError, ValueError) as exc:
        parser.error(f"cannot read noise file {path}: {exc}")
    if noise.bands != bands:
        parser.error(f"noise file has {noise.bands} bands, cube has {bands}")
    return noise


# ---------------------------------------------------------------------------
# subcommands


def cmd_simulate(args, parser):
    h, w, b = args.size
    if args.rank > b:
        parser.error(f"--rank {args.rank} exceeds band count {b}")
    library = None
    if args.library:
        library = load_endmembers_csv(args.library)
    cfg = SceneConfig(h, w, b, args.rank, args.mode, args.eta, args.snr, args.seed, args.eta_mode)
    scene = simulate_scene(cfg, library)
    paths = save_scene(scene, args.out)
    log.info("realized SNR %.4f dB", scene.realized_snr)
    _emit({"realized_snr_db": scene.realized_snr, "files": [str(p) for p in paths]}, "json")
    return 0


def cmd_rank(args, parser):
    cube, _ = read_cube(args.cube)
    noise = _load_noise(args.noise_file, cube.bands, parser)
    cfg = _sure_config(args, parser, cube.bands, cube.n, noise)
    t0 = time.perf_counter()
    rep = select_rank(cube, cfg)
    ms = 1000.0 * (time.perf_counter() - t0)
    if args.surface:
        rep.surfaces[rep.model_id].to_csv(args.surface)
        log.info("wrote risk surface to %s", args.surface)
    out = {"r_hat": rep.r_hat, "lambda_hat": rep.lambda_hat, "sure_min": rep.sure_min,
           "ed": rep.ed, "runtime_ms": ms}
    _emit(out, args.format, ("r_hat", "lambda_hat", "sure_min", "ed", "runtime_ms"),
          [tuple(out.values())])
    return 0


def cmd_model_select(args, parser):
    cube, _ = read_cube(args.cube)
    noise = _load_noise(args.noise_file, cube.bands, parser)
    try:
        specs = [ModelSpec.from_id(m) for m in args.models]
    except ValueError as exc:
        parser.error(str(exc))
    truth = None
    if args.truth:
        truth, _ = read_cube(args.truth)
        if truth.shape != cube.shape:
            parser.error("--truth cube shape differs from the input cube")
    if args.curves and truth is None:
        parser.error("--curves needs --truth")
    cfg = _sure_config(args, parser, cube.bands, cube.n, noise)
    rep = model_select(cube, specs, cfg, truth)
    if args.curves:
        rows = []
        for m, s in sorted(rep.surfaces.items()):
            # per-lambda curve at each model's selected rank
            i = s.row(rep.per_model_argmin[m][0])
            for j, lam in enumerate(s.lambda_grid):
                rows.append((m, int(s.rank_grid[i]), float(lam), float(s.risk[i, j]), float(s.mse[i, j])))
        write_csv(args.curves, ("model", "r", "lambda", "sure", "mse"), rows)
        log.info("wrote SURE/MSE curves to %s", args.curves)
    d = rep.to_dict()
    header = ("model", "sure_min", "r_hat", "lambda_hat") + (("mse",) if rep.mse else ())
    rows = [tuple(m[k] for k in header) for m in d["models"]]
    _emit(d, args.format, header, rows)
    return 0


def bench_seeds(seed: int, n_cells: int, trials: int) -> np.ndarray:
    """(n_cells, trials) independent per-trial seeds derived from one root seed."""
    kids = np.random.SeedSequence(seed).spawn(n_cells * trials)
    return np.array([int(k.generate_state(1, dtype=np.uint32)[0]) for k in kids],
                    dtype=np.int64).reshape(n_cells, trials)


def run_bench(size, ranks, snrs, trials, eta, seed, mode="dirichlet", eta_mode="literal",
              config: SureConfig = SureConfig()):
    """Median r_hat per (snr, r) cell; returns a list of dict rows."""
    h, w, b = size
    cells = [(s, r) for s in snrs for r in ranks]
    seeds = bench_seeds(seed, len(cells), trials)
    rows = []
    for (snr, r), cell_seeds in zip(cells, seeds):
        hats, lams = [], []
        for sd in cell_seeds:
            scene = simulate_scene(SceneConfig(h, w, b, r, mode, eta, snr, int(sd), eta_mode))
            rep = select_rank(scene.noisy, config)
            hats.append(rep.r_hat)
            lams.append(rep.lambda_hat)
        med = float(np.median(hats))
        log.info("snr %g r %d -> median %g %s", snr, r, med, hats)
        rows.append({"snr_db": snr, "r": r, "median_r_hat": med, "r_hats": hats,
                     "lambda_hats": lams})
    return rows


def cmd_bench(args, parser):
    if max(args.ranks) > min(args.size[2], args.size[0] * args.size[1]):
        parser.error("a bench rank exceeds min(n, p)")
    if min(args.ranks) < 1:
        parser.error("bench ranks must be >= 1")
    cfg = _sure_config(args, parser)
    rows = run_bench(args.size, args.ranks, args.snrs, args.trials, args.eta, args.seed,
                     args.mode, args.eta_mode, cfg)
    # one row per SNR, one column per true rank
    table = [(snr,) + tuple(next(x["median_r_hat"] for x in rows
                                 if x["snr_db"] == snr and x["r"] == r) for r in args.ranks)
             for snr in args.snrs]
    header = ("snr_db",) + tuple(f"r={r}" for r in args.ranks)
    if args.out:
        write_csv(args.out, header, table)
    _emit({"cells": rows, "exact": sum(x["median_r_hat"] == x["r"] for x in rows)},
          args.format, header, table)
    return 0


def cmd_noise_est(args, parser):
    cube, _ = read_cube(args.cube)
    try:
        noise = estimate_noise(cube)
    except ValueError as exc:
        parser.error(str(exc))
    if args.out:
        noise.save(args.out)
    _emit([float(v) for v in noise.sigma2], args.format, ("band", "sigma2"),
          [(i + 1, float(v)) for i, v in enumerate(noise.sigma2)])
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hysure", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="draw a linear-mixture scene")
    p.add_argument("--size", type=size_triple, default=(128, 128, 224), help="HxWxB (default 128x128x224)")
    p.add_argument("--rank", type=positive_int, default=10, help="number of endmembers")
    p.add_argument("--snr", type=float, default=15.0, help="target SNR in dB")
    p.add_argument("--eta", type=eta_value, default=1.0 / 18.0,
                   help="noise-profile width; fractions allowed, 1/18 = 0.0556 (default); 0 = white")
    p.add_argument("--eta-mode", choices=ETA_MODES, default="literal",
                   help="literal: eta is the bell width in bands; inverse: width is 1/eta")
    p.add_argument("--mode", choices=ABUNDANCE_MODES + ("dirichlet-sum1",), default="dirichlet")
    p.add_argument("--library", help="CSV of p x m endmember signatures to draw from")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output prefix")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("rank", help="HySURE joint (r, lambda) selection")
    p.add_argument("cube")
    p.add_argument("--noise-file", help="JSON array of band variances (skips estimation)")
    p.add_argument("--surface", help="write the full risk surface as CSV")
    _add_grid_opts(p)
    _add_output_opts(p)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("model-select", help="compare minimum SURE across the model zoo")
    p.add_argument("cube")
    p.add_argument("--models", type=int_list, default=tuple(m.id for m in MODELS),
                   help="comma-separated model ids (default 1-7)")
    p.add_argument("--noise-file")
    p.add_argument("--truth", help="clean cube; adds MSE columns")
    p.add_argument("--curves", help="with --truth: per-lambda SURE/MSE CSV at each model's r_hat")
    _add_grid_opts(p)
    _add_output_opts(p)
    p.set_defaults(func=cmd_model_select)

    p = sub.add_parser("bench", help="median r_hat over seeded trials per (SNR, r) cell")
    p.add_argument("--size", type=size_triple, default=(64, 64, 224))
    p.add_argument("--ranks", type=int_list, default=BENCH_RANKS)
    p.add_argument("--snrs", type=float_list, default=BENCH_SNRS)
    p.add_argument("--trials", type=positive_int, default=10)
    p.add_argument("--eta", type=eta_value, default=1.0 / 18.0, help="1/18 = 0.0556 (default)")
    p.add_argument("--eta-mode", choices=ETA_MODES, default="literal")
    p.add_argument("--mode", choices=ABUNDANCE_MODES + ("dirichlet-sum1",), default="dirichlet")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="also write the table CSV here")
    _add_grid_opts(p)
    _add_output_opts(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("noise-est", help="per-band noise variances by multiple regression")
    p.add_argument("cube")
    p.add_argument("--out", help="save as a noise file")
    _add_output_opts(p)
    p.set_defaults(func=cmd_noise_est)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    sub = parser._subparsers._group_actions[0].choices[args.command]
    try:
        return args.func(args, sub)
    except (OSError, ValueError) as exc:
        log.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
