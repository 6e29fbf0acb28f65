"""Reproducibility command line: one subcommand per study.

Each subcommand runs a study, writes a CSV table plus a JSON sidecar
(metadata, tolerances, and a verdict block with pass/fail per check the
command covers), and prints a one-line summary. Outputs carry no
timestamps: identical configuration (including seed) gives byte-identical
files.

Exit codes: 0 pass, 1 a covered check failed, 2 usage or configuration
error, 3 numerical failure inside the computation.

Flags are shared across subcommands where they make sense (--n, --class,
--trials, --seed, --streams, --grid, --out-dir). A JSON file passed via
--config overrides the flag values; the resolved configuration is hashed
into every output header. WINDSTAT_THREADS caps worker threads.
"""

import argparse
import json
import math
import os
import sys

import numpy as np

from windstat import (correlators, distribution, ensembles, generators,
                      kitaev, output, streams, winding)

__all__ = ["main", "build_parser", "resolve_config"]

SYM_CLASSES = {"AIII": ensembles.AIII, "CII": ensembles.CII}
LOOPS = {"trig": winding.trig_loop, "trig-tr": winding.trig_loop_tr}

#: draw-level retry budget when a sampled pencil is too ill-conditioned
RESAMPLE_LIMIT = 100


def _floats(text):
    return [float(x) for x in str(text).split(",") if x != ""]


def _ints(text):
    return [int(x) for x in str(text).split(",") if x != ""]


def build_parser():
    parser = argparse.ArgumentParser(
        prog="windstat",
        description="winding-number statistics of parametric matrix families")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, trials=1000):
        sp.add_argument("--n", type=int, default=4,
                        help="matrix size parameter N")
        sp.add_argument("--class", dest="sym_class",
                        choices=sorted(SYM_CLASSES), default="AIII")
        sp.add_argument("--loop", choices=sorted(LOOPS), default="trig")
        sp.add_argument("--trials", type=int, default=trials)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--streams", type=int, default=None,
                        help=f"logical stream count (default "
                             f"{streams.DEFAULT_STREAMS}; part of the "
                             f"result, unlike worker count)")
        sp.add_argument("--grid", type=int, default=winding.DEFAULT_GRID)
        sp.add_argument("--out-dir", dest="out_dir", default=".")
        sp.add_argument("--config", default=None,
                        help="JSON file whose entries override these flags")

    sp = sub.add_parser("winding", help="per-draw winding numbers, both routes")
    common(sp, trials=100)
    sp.add_argument("--points", type=_floats, default=None,
                    help="emit a density profile at these angles (draw 0)")
    sp.add_argument("--dump-spectra", action="store_true",
                    help="also write per-eigenvalue spectra rows")

    sp = sub.add_parser("dist", help="exact winding PMF, optional MC histogram")
    common(sp, trials=0)
    sp.add_argument("--q2", type=float, default=1.0)
    sp.add_argument("--n-list", dest="n_list", type=_ints, default=None,
                    help="extra sizes for the Gaussian-limit report")

    sp = sub.add_parser("corr", help="density correlators vs closed form")
    common(sp, trials=100_000)
    sp.add_argument("--points", type=_floats, default=None,
                    help="angles of a single k-point estimate")
    sp.add_argument("--deltas", type=_floats, default=None,
                    help="two-point separations sharing one set of draws")
    sp.add_argument("--estimator", choices=["product", "phase_averaged"],
                    default="product")

    sp = sub.add_parser("unfold", help="rescaled two-point function vs limit")
    common(sp, trials=0)
    sp.add_argument("--alpha", type=float, default=0.5)
    sp.add_argument("--n-list", dest="n_list", type=_ints,
                    default=[2, 5, 7, 10, 15, 20, 50, 100])
    sp.add_argument("--delta-lo", dest="delta_lo", type=float, default=0.5)
    sp.add_argument("--delta-hi", dest="delta_hi", type=float, default=5.0)
    sp.add_argument("--num", type=int, default=201)
    sp.add_argument("--no-clip", dest="no_clip", action="store_true",
                    help="keep the raw window instead of the injective branch")

    sp = sub.add_parser("gen", help="generating function, MC vs closed form")
    common(sp, trials=100_000)
    sp.add_argument("--qs", type=_floats, required=True)
    sp.add_argument("--ps", type=_floats, required=True)
    sp.add_argument("--median-blocks", dest="median_blocks", type=int,
                    default=0)

    sp = sub.add_parser("kitaev", help="superconducting chain phase scan")
    common(sp, trials=0)
    sp.add_argument("--t", type=_floats, default=[0.25, 0.5, 1.0],
                    help="hopping values to scan")
    sp.add_argument("--mu", type=float, default=1.0)
    sp.add_argument("--delta", type=float, default=1.0,
                    help="pairing amplitude")
    sp.add_argument("--num", type=int, default=401,
                    help="band-structure grid points")
    return parser


def resolve_config(args):
    """Flags plus JSON overrides as one serializable mapping."""
    cfg = {k: v for k, v in vars(args).items() if k != "config"}
    if args.config:
        with open(args.config) as fh:
            overrides = json.load(fh)
        unknown = set(overrides) - set(cfg)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(overrides)
    return cfg


def _digest_view(cfg):
    view = dict(cfg)
    view.pop("out_dir", None)  # hash identifies the computation, not the path
    return view


def _emit(cfg, stem, fieldnames, rows, verdict, extra_meta=None):
    meta = output.run_metadata(_digest_view(cfg), seed=cfg.get("seed"))
    meta["config"] = _digest_view(cfg)
    if extra_meta:
        meta.update(extra_meta)
    meta["verdict"] = verdict
    out_dir = cfg.get("out_dir", ".")
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, f"{stem}.csv")
    header_meta = {"config_sha256": meta["config_sha256"],
                   "backend": meta["backend"],
                   "revision": meta["revision"]}
    output.write_csv(csv_path, fieldnames, rows, metadata=header_meta)
    output.write_sidecar(os.path.join(out_dir, f"{stem}.meta.json"), meta)
    return csv_path


def _spectrum_with_sample(N, cls, rng, stream_id):
    for _ in range(RESAMPLE_LIMIT):
        sample = ensembles.sample_chiral_pair(N, cls, rng=rng,
                                              stream_id=stream_id)
        try:
            return sample, ensembles.spherical_spectrum(sample)
        except ensembles.ResampleSignal:
            continue
    raise ArithmeticError(
        f"draw {stream_id}: {RESAMPLE_LIMIT} consecutive ill-conditioned draws")


def cmd_winding(cfg):
    cls = SYM_CLASSES[cfg["sym_class"]]
    loop = LOOPS[cfg["loop"]]()
    rows = []
    spectra_rows = []
    disagreements = 0
    max_residual = 0.0
    profile_rows = None
    for i in range(cfg["trials"]):
        rng = streams.substream(cfg["seed"], i)
        sample, spec = _spectrum_with_sample(cfg["n"], cls, rng, i)
        record = winding.winding_number_contour(sample, loop=loop,
                                                grid_size=cfg["grid"])
        w_count = winding.winding_number_count(spec, loop=loop)
        residual = abs(record.contour_value - record.W)
        max_residual = max(max_residual, residual)
        if record.W != w_count:
            disagreements += 1
        rows.append({"draw_id": i, "W": record.W,
                     "m_inside": record.m_inside,
                     "residual": f"{residual:.3e}"})
        if cfg.get("dump_spectra"):
            spectra_rows.extend(ensembles.spectrum_rows(spec, draw_id=i))
        if i == 0 and cfg.get("points"):
            ps = np.asarray(cfg["points"], dtype=float)
            profile_rows = winding.density_profile_rows(sample, loop, ps)
    verdict = {
        "quantized_below_tol": bool(max_residual < winding.QUANTIZATION_TOL),
        "routes_agree_all_draws": disagreements == 0,
        "max_residual": max_residual,
        "disagreements": disagreements,
    }
    path = _emit(cfg, "winding", ["draw_id", "W", "m_inside", "residual"],
                 rows, verdict)
    if cfg.get("dump_spectra"):
        _emit(cfg, "spectra", ["draw_id", "re", "im"], spectra_rows, verdict)
    if profile_rows is not None:
        _emit(cfg, "winding_profile", ["p", "w_re", "w_im"],
              profile_rows, verdict)
    ws = [r["W"] for r in rows]
    print(f"winding: {len(rows)} draws, max residual {max_residual:.2e}, "
          f"route disagreements {disagreements}, "
          f"W range [{min(ws)}, {max(ws)}] -> {path}")
    ok = verdict["quantized_below_tol"] and verdict["routes_agree_all_draws"]
    return 0 if ok else 1


def cmd_dist(cfg):
    cls = SYM_CLASSES[cfg["sym_class"]]
    if cls is not ensembles.AIII:
        raise ValueError("the exact PMF is implemented for class AIII")
    pmf = distribution.winding_pmf(cfg["n"], cfg["q2"])
    counts = np.zeros(len(pmf.support), dtype=np.int64)
    tv = None
    if cfg["trials"] > 0:
        loop = LOOPS[cfg["loop"]]()

        def worker(rng, n_trials, stream_id):
            local = np.zeros(len(pmf.support), dtype=np.int64)
            for j in range(n_trials):
                _, spec = _spectrum_with_sample(cfg["n"], cls, rng, stream_id)
                w = winding.winding_number_count(spec, loop=loop)
                local[(w + pmf.N) // 2] += 1
            return local

        counts = streams.run_partitioned(worker, cfg["trials"], cfg["seed"],
                                         streams=cfg["streams"],
                                         merge=lambda a, b: a + b)
        emp = counts / counts.sum()
        tv = 0.5 * float(np.sum(np.abs(emp - pmf.probs)))
    rows = []
    for i, w in enumerate(pmf.support):
        row = {"W": int(w), "P_exact": f"{pmf.probs[i]:.12e}",
               "P_mc": "", "mc_err": ""}
        if cfg["trials"] > 0:
            p_hat = counts[i] / cfg["trials"]
            row["P_mc"] = f"{p_hat:.6e}"
            row["mc_err"] = f"{math.sqrt(max(p_hat * (1 - p_hat), 1e-300) / cfg['trials']):.2e}"
        rows.append(row)
    n_list = cfg.get("n_list") or [cfg["n"]]
    report = distribution.gaussian_limit_report(n_list, cfg["q2"])
    verdict = {"tv_distance": tv,
               "tv_below_0.01": (tv < 0.01) if tv is not None else None}
    extra = {"moments": {"mean": pmf.mean, "variance": pmf.variance},
             "gaussian_limit": report}
    path = _emit(cfg, "dist", ["W", "P_exact", "P_mc", "mc_err"], rows,
                 verdict, extra_meta=extra)
    tv_note = f", TV {tv:.4f}" if tv is not None else ""
    print(f"dist: N={cfg['n']} variance {pmf.variance:.4f}{tv_note} -> {path}")
    return 0 if (tv is None or tv < 0.01) else 1


def cmd_corr(cfg):
    if cfg.get("points") and cfg.get("deltas"):
        raise ValueError("give --points or --deltas, not both")
    cls = SYM_CLASSES[cfg["sym_class"]]
    rows = []
    all_within = True
    if cfg.get("deltas"):
        estimates = correlators.mc_c2_profile(
            cfg["deltas"], cfg["n"], cfg["trials"], seed=cfg["seed"],
            streams_count=cfg["streams"], cls=cls,
            estimator=cfg["estimator"])
        for est in estimates:
            analytic = correlators.analytic_C2(cfg["n"], *est.points)
            dev = abs(est.mean.real - analytic)
            all_within &= dev < 4.0 * max(est.stderr, 1e-300)
            rows.append(_corr_row(est, analytic))
    else:
        points = cfg.get("points") or [(math.pi - 1.0) / 2, (math.pi + 1.0) / 2]
        est = correlators.mc_correlator(
            len(points), points, cfg["n"], cfg["trials"], seed=cfg["seed"],
            streams_count=cfg["streams"], cls=cls,
            loop=LOOPS[cfg["loop"]](), estimator=cfg["estimator"])
        if len(points) == 1:
            analytic = 0.0
        elif len(points) == 2 and cls is ensembles.AIII:
            analytic = correlators.analytic_C2(cfg["n"], *points)
        else:
            analytic = None
        if analytic is not None:
            dev = abs(est.mean.real - analytic)
            all_within &= dev < 4.0 * max(est.stderr, 1e-300)
        rows.append(_corr_row(est, analytic))
    verdict = {"within_4_stderr": bool(all_within)}
    path = _emit(cfg, "corr",
                 ["p1", "p2", "mc_mean_re", "mc_mean_im", "stderr",
                  "analytic", "trials", "skipped"], rows, verdict)
    print(f"corr: {len(rows)} estimate(s), all within 4 stderr: "
          f"{all_within} -> {path}")
    return 0 if all_within else 1


def _corr_row(est, analytic):
    p1 = est.points[0]
    p2 = est.points[1] if len(est.points) > 1 else float("nan")
    return {"p1": f"{p1:.10f}", "p2": f"{p2:.10f}",
            "mc_mean_re": f"{est.mean.real:.10e}",
            "mc_mean_im": f"{est.mean.imag:.10e}",
            "stderr": f"{est.stderr:.4e}",
            "analytic": "" if analytic is None else f"{analytic:.10e}",
            "trials": est.trials, "skipped": est.skipped}


def cmd_unfold(cfg):
    rows = []
    sups = []
    clip = not cfg.get("no_clip")
    for n in cfg["n_list"]:
        hi = cfg["delta_hi"]
        if clip:
            hi = min(hi, (math.pi / 2.0) * float(n) ** cfg["alpha"])
        grid = np.linspace(cfg["delta_lo"], hi, cfg["num"])
        sup = 0.0
        for psi in grid:
            unfolded = correlators.unfolded_C2(n, cfg["alpha"], psi, 0.0)
            limit = correlators.f2_limit(cfg["alpha"], psi, 0.0)
            sup = max(sup, abs(unfolded - limit))
            rows.append({"N": n, "alpha": cfg["alpha"],
                         "psi_delta": f"{psi:.8f}",
                         "unfolded": f"{unfolded:.10e}",
                         "limit": f"{limit:.10e}"})
        sups.append(sup)
    decreasing = all(b < a for a, b in zip(sups, sups[1:]))
    verdict = {"sup_distances": dict(zip(map(str, cfg["n_list"]), sups)),
               "strictly_decreasing": decreasing}
    path = _emit(cfg, "unfold",
                 ["N", "alpha", "psi_delta", "unfolded", "limit"],
                 rows, verdict)
    print(f"unfold: alpha={cfg['alpha']}, sup distances "
          f"{['%.3e' % s for s in sups]}, decreasing={decreasing} -> {path}")
    return 0 if decreasing else 1


def cmd_gen(cfg):
    cls = SYM_CLASSES[cfg["sym_class"]]
    if cls is not ensembles.AIII:
        raise ValueError("the closed determinant form covers class AIII; "
                         "run the library mc_generator directly for CII")
    loop = LOOPS[cfg["loop"]]()
    qs, ps = cfg["qs"], cfg["ps"]
    value = generators.mc_generator(
        qs, ps, cfg["n"], cfg["trials"], seed=cfg["seed"],
        streams_count=cfg["streams"], cls=cls, loop=loop,
        median_blocks=cfg["median_blocks"])
    analytic = generators.analytic_generator(qs, ps, cfg["n"], loop=loop)
    dev = abs(value.mean - analytic)
    within = dev < 4.0 * max(value.stderr, 1e-300)
    k = len(qs)
    row = {"k": k}
    for i, q in enumerate(qs, 1):
        row[f"q{i}"] = f"{q:.10f}"
    for i, p in enumerate(ps, 1):
        row[f"p{i}"] = f"{p:.10f}"
    row.update({"Z_mc_re": f"{value.mean.real:.10e}",
                "Z_mc_im": f"{value.mean.imag:.10e}",
                "stderr": f"{value.stderr:.4e}",
                "Z_analytic_re": f"{analytic.real:.10e}",
                "Z_analytic_im": f"{analytic.imag:.10e}"})
    fields = (["k"] + [f"q{i}" for i in range(1, k + 1)]
              + [f"p{i}" for i in range(1, k + 1)]
              + ["Z_mc_re", "Z_mc_im", "stderr",
                 "Z_analytic_re", "Z_analytic_im"])
    verdict = {"within_4_stderr": bool(within), "abs_deviation": dev}
    path = _emit(cfg, "gen", fields, [row], verdict)
    print(f"gen: k={k} deviation {dev:.3e} vs stderr {value.stderr:.3e} "
          f"-> {path}")
    return 0 if within else 1


def cmd_kitaev(cfg):
    t_list = cfg["t"]
    mu, delta = cfg["mu"], cfg["delta"]
    first = kitaev.KitaevParams(t=t_list[0], mu=mu, delta=delta)
    disp = kitaev.dispersion_and_gap(first, num=cfg["num"])
    _, dy, dz = kitaev.d_vector(first, disp.k)
    band_rows = [{"k": f"{k:.8f}", "E_plus": f"{e:.10e}",
                  "E_minus": f"{-e:.10e}"}
                 for k, e in zip(disp.k, disp.energies)]
    bloch_rows = [{"k": f"{k:.8f}", "d_y": f"{y:.10e}", "d_z": f"{z:.10e}"}
                  for k, y, z in zip(disp.k, dy, dz)]
    scan = []
    consistent = True
    for t in t_list:
        params = kitaev.KitaevParams(t=t, mu=mu, delta=delta)
        gap = kitaev.dispersion_and_gap(params, num=cfg["num"]).gap
        entry = {"t": t, "mu": mu, "delta": delta, "gap": gap}
        topological = abs(mu) < 2.0 * abs(t) and delta != 0.0
        try:
            w = kitaev.kitaev_winding(params, grid_size=cfg["grid"])
            entry["W"] = w
            entry["regime"] = "topological" if abs(w) == 1 else "trivial"
            consistent &= (abs(w) == 1) == topological
        except kitaev.PhaseTransitionError:
            entry["W"] = None
            entry["regime"] = "transition"
            consistent &= math.isclose(abs(mu), 2.0 * abs(t)) or delta == 0.0
        scan.append(entry)
    verdict = {"phase_diagram_consistent": bool(consistent), "scan": scan}
    path = _emit(cfg, "kitaev_bands", ["k", "E_plus", "E_minus"],
                 band_rows, verdict)
    _emit(cfg, "kitaev_bloch", ["k", "d_y", "d_z"], bloch_rows, verdict)
    regimes = [e["regime"] for e in scan]
    print(f"kitaev: mu={mu} delta={delta} t={t_list} -> {regimes}, "
          f"consistent={consistent} ({path})")
    return 0 if consistent else 1


COMMANDS = {
    "winding": cmd_winding,
    "dist": cmd_dist,
    "corr": cmd_corr,
    "unfold": cmd_unfold,
    "gen": cmd_gen,
    "kitaev": cmd_kitaev,
}

_NUMERICAL = (winding.NonQuantizedError, winding.PoleSignal,
              winding.DegenerateLoopError, ensembles.PairingError,
              ensembles.ResampleSignal, kitaev.PhaseTransitionError,
              generators.NearCoincidentError, generators.StepSizeError,
              ArithmeticError)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"windstat: configuration error: {exc}", file=sys.stderr)
        return 2
    try:
        return COMMANDS[args.command](cfg)
    except _NUMERICAL as exc:
        print(f"windstat: numerical failure: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"windstat: invalid request: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
