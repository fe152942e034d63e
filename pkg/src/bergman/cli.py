"""Batch front door: experiment configs in, CSV/JSON artifacts out.

Subcommands map to the module surfaces:

* ``weights``  - dyadic grid plus weight-class diagnostics
* ``kernel``   - diagonal growth band and near-diagonal comparability
* ``carleson`` - per-annulus box constants and verdicts
* ``toeplitz`` - compression spectrum and Berezin samples
* ``schatten`` - Schatten-vs-integral report or sweep
* ``remark``   - dimension-effect slope experiment

Exit codes: 0 success, 2 invalid configuration, 3 numerical precision
failure (partial artifacts are kept, the manifest records the error).
CSV bodies are deterministic for a fixed config and seed; timestamps
live only in the manifest.
"""

import argparse
import csv
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .errors import PrecisionError
from .holo import DEFAULT_BASIS_DEGREE

CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        "weight": {
            "type": "object",
            "properties": {
                "family": {
                    "enum": ["constant", "power", "log_power", "standard", "tabulated"]
                },
                "n": {"type": "integer", "minimum": 1},
            },
            "required": ["family"],
        },
        "measure": {"type": "object", "properties": {"type": {"type": "string"}}},
        "kmax": {"type": "integer", "minimum": 1},
        "degree": {"type": "integer", "minimum": 1},
        "alpha": {"type": "number", "exclusiveMinimum": 0},
        "p": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 1}},
        "seed": {"type": "integer", "minimum": 0},
        "gamma": {"type": ["number", "null"]},
        "sweep_s": {"type": "array", "items": {"type": "number"}},
        "epsilon": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "gap_ratio": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "levels": {"type": "integer", "minimum": 4},
        "n": {"type": "integer", "minimum": 1},
        "out": {"type": "string"},
    },
    "additionalProperties": True,
}

TOLERANCES = {
    "normalization": 1e-12,
    "dyadic_tail_residual": 1e-11,
    "kernel_tail": 1e-9,
    "psd": 1e-10,
}


def _load_config(args):
    import jsonschema

    cfg = {}
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise ValueError("config root must be a JSON object")
    jsonschema.validate(cfg, CONFIG_SCHEMA)
    # env then flags override the file
    env = os.environ
    if "BERGMAN_SEED" in env:
        cfg["seed"] = int(env["BERGMAN_SEED"])
    if "BERGMAN_OUT" in env:
        cfg["out"] = env["BERGMAN_OUT"]
    if "BERGMAN_DEGREE" in env:
        cfg["degree"] = int(env["BERGMAN_DEGREE"])
    if "BERGMAN_KMAX" in env:
        cfg["kmax"] = int(env["BERGMAN_KMAX"])
    if "BERGMAN_ALPHA" in env:
        cfg["alpha"] = float(env["BERGMAN_ALPHA"])
    if "BERGMAN_P" in env:
        cfg["p"] = [float(v) for v in env["BERGMAN_P"].split(",")]
    for key in ("seed", "degree", "kmax", "alpha", "out"):
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    if getattr(args, "p", None):
        cfg["p"] = args.p
    cfg.setdefault("seed", 0)
    cfg.setdefault("out", "out")
    cfg.setdefault("alpha", 0.2)
    cfg.setdefault("p", [2.0])
    return cfg


def _weight_from_config(cfg):
    from .weights import normalize

    wc = dict(cfg.get("weight", {"family": "constant", "n": 1}))
    family = wc.pop("family")
    n = wc.pop("n", 1)
    return normalize(family, wc, n)


def _measure_from_config(cfg, w):
    from .measures import measure_from_json

    return measure_from_json(cfg.get("measure", {"type": "radial", "s": 0.0}), w)


def _cell(v):
    if isinstance(v, (np.floating, float)):
        return repr(float(v))  # shortest round-trip decimal, deterministic
    if isinstance(v, (np.integer, int)):
        return int(v)
    return v


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])


def _write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _manifest(outdir, cfg, subcommand, outputs, status="ok", error=None):
    man = {
        "subcommand": subcommand,
        "config": cfg,
        "version": __version__,
        "seed": cfg.get("seed"),
        "tolerances": TOLERANCES,
        "outputs": outputs,
        "status": status,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }
    if error:
        man["error"] = error
    _write_json(Path(outdir) / "manifest.json", man)


def _cmd_weights(cfg, outdir):
    from .weights import class_s_ratio, dyadic_radii, s_star_ratio

    w = _weight_from_config(cfg)
    kmax = cfg.get("kmax", 12)
    grid = dyadic_radii(w, kmax)
    grid_path = Path(outdir) / "grid.csv"
    _write_csv(grid_path, ["k", "r_k", "ratio"], grid.to_rows())
    diag = {
        "weight": w.to_json(),
        "normalization_residual": w.normalization_residual(),
        "class_s_inf_ratio": class_s_ratio(grid),
        "class_s_verdict_margin": 1.05,
        "in_class_s_empirically": bool(class_s_ratio(grid) > 1.05),
        "s_star_sup_ratio": s_star_ratio(w, grid),
        "kmax": kmax,
        "note": "class membership is a truncated diagnostic over k <= kmax, not a proof",
    }
    diag_path = Path(outdir) / "weight_diagnostics.json"
    _write_json(diag_path, diag)
    return [str(grid_path), str(diag_path)]


def _cmd_kernel(cfg, outdir):
    from .holo import kernel_comparability, kernel_diag_band, kernel_series
    from .weights import dyadic_radii

    w = _weight_from_config(cfg)
    kmax = cfg.get("kmax", 12)
    degree = cfg.get("degree", 400)
    grid = dyadic_radii(w, kmax)
    ks = kernel_series(w, degree)
    band = kernel_diag_band(ks, grid)
    band_path = Path(outdir) / "kernel_band.csv"
    _write_csv(band_path, ["abs_z", "k", "scaled_diag", "method"], band.rows)
    alpha = cfg["alpha"]
    comp_rows = []
    for r in np.linspace(0.1, 0.9, 9):
        z = np.zeros(w.n, dtype=complex)
        z[0] = r
        rep = kernel_comparability(ks, z, alpha, m=6, seed=cfg["seed"])
        comp_rows.append((float(r), rep.vmin, rep.vmax))
    comp_path = Path(outdir) / "kernel_comparability.csv"
    _write_csv(comp_path, ["abs_z", "min_ratio", "max_ratio"], comp_rows)
    summary = {
        "band_min": band.vmin,
        "band_max": band.vmax,
        "band_ratio": band.ratio,
        "refine_drift": band.refine_drift,
        "degree": degree,
        "alpha": alpha,
    }
    sum_path = Path(outdir) / "kernel_summary.json"
    _write_json(sum_path, summary)
    return [str(band_path), str(comp_path), str(sum_path)]


def _cmd_carleson(cfg, outdir):
    from .carleson import carleson_profile
    from .weights import dyadic_radii

    w = _weight_from_config(cfg)
    mu = _measure_from_config(cfg, w)
    kmax = cfg.get("kmax", 10)
    grid = dyadic_radii(w, kmax)
    rep = carleson_profile(mu, grid, w, seed=cfg["seed"])
    prof_path = Path(outdir) / "carleson_profile.csv"
    _write_csv(prof_path, ["k", "C_k", "scaled_2k_C_k"], rep.rows)
    verdict_path = Path(outdir) / "carleson_verdict.json"
    _write_json(verdict_path, rep.to_json())
    return [str(prof_path), str(verdict_path)]


def _cmd_toeplitz(cfg, outdir):
    from .holo import kernel_series
    from .toeplitz import assemble, berezin, compactness_probe, eigenvalues
    from .measures import mu_hat
    from .weights import dyadic_radii

    w = _weight_from_config(cfg)
    mu = _measure_from_config(cfg, w)
    degree = cfg.get("degree", DEFAULT_BASIS_DEGREE.get(w.n, 18))
    kmax = cfg.get("kmax", 8)
    grid = dyadic_radii(w, kmax)
    T = assemble(mu, w, degree, seed=cfg["seed"])
    # full spectrum, plus the block-diagonal spectrum per total degree
    # (exact for radial measures, a block probe otherwise)
    spec_rows = [(i, float(v), -1) for i, v in enumerate(eigenvalues(T)[::-1])]
    base = len(spec_rows)
    for d in range(degree + 1):
        sel = T.basis.degrees == d
        block = T.matrix[np.ix_(sel, sel)]
        for v in np.linalg.eigvalsh(block)[::-1]:
            spec_rows.append((base, float(v), d))
            base += 1
    spec_path = Path(outdir) / "spectrum.csv"
    _write_csv(spec_path, ["index", "eigenvalue", "degree_block"], spec_rows)
    ks = kernel_series(w, cfg.get("kernel_degree", 400))
    alpha = cfg["alpha"]
    rows = []
    for r in np.linspace(0.05, grid.radii[min(6, grid.kmax)], 12):
        z = np.zeros(w.n, dtype=complex)
        z[0] = r
        rows.append(
            (float(r), berezin(mu, ks, z, seed=cfg["seed"]), mu_hat(mu, grid, z, alpha))
        )
    ber_path = Path(outdir) / "berezin_samples.csv"
    _write_csv(ber_path, ["abs_z", "berezin", "mu_hat"], rows)
    probe = compactness_probe(T)
    meta = dict(T.meta)
    meta.update(
        {
            "operator_norm": probe.operator_norm,
            "block_decay_slope": probe.slope,
            "decaying": bool(probe.decaying),
            "refinement_delta": probe.refinement_delta,
        }
    )
    meta_path = Path(outdir) / "toeplitz_meta.json"
    _write_json(meta_path, meta)
    return [str(spec_path), str(ber_path), str(meta_path)]


def _cmd_schatten(cfg, outdir):
    from .schatten import theorem3_report, theorem3_sweep

    w = _weight_from_config(cfg)
    degree = cfg.get("degree", 400)
    alpha = cfg["alpha"]
    outputs = []
    if "sweep_s" in cfg:
        rows = []
        for p in cfg["p"]:
            sweep = theorem3_sweep(w, cfg["sweep_s"], [p], degree, alpha=alpha,
                                   kmax=cfg.get("kmax"), seed=cfg["seed"])
            for s, rep in sweep:
                rows.append(
                    (s, rep.p, rep.schatten_p_pow, rep.integral_muhat,
                     rep.integral_berezin, rep.r1, rep.r2)
                )
        sweep_path = Path(outdir) / "schatten_sweep.csv"
        _write_csv(
            sweep_path,
            ["s", "p", "schatten_p_pow", "integral_muhat", "integral_berezin", "r1", "r2"],
            rows,
        )
        outputs.append(str(sweep_path))
    else:
        mu = _measure_from_config(cfg, w)
        reports = []
        for p in cfg["p"]:
            rep = theorem3_report(
                mu, w, p, degree, alpha=alpha, kmax=cfg.get("kmax"),
                sensitivity=(0.1, 0.2, 0.3), seed=cfg["seed"],
            )
            reports.append(rep.to_json())
        rep_path = Path(outdir) / "schatten_report.json"
        _write_json(rep_path, {"reports": reports})
        outputs.append(str(rep_path))
    return outputs


def _cmd_remark(cfg, outdir):
    from .schatten import remark_experiment

    n = cfg.get("n", 2)
    out = {"slopes": []}
    rows = []
    for p in cfg["p"]:
        rep = remark_experiment(
            n,
            p,
            eps=cfg.get("epsilon", 0.1),
            gap_ratio=cfg.get("gap_ratio", 0.25),
            levels=cfg.get("levels", 6),
            seed=cfg["seed"],
        )
        out["slopes"].append({"p": p, "slope": rep.slope})
        for lv, om, ih, it, rt in rep.rows:
            rows.append((p, lv, om, ih, it, rt))
    rows_path = Path(outdir) / "remark_levels.csv"
    _write_csv(
        rows_path,
        ["p", "level", "one_minus_center", "integral_hat", "integral_tilde", "ratio"],
        rows,
    )
    json_path = Path(outdir) / "remark_slopes.json"
    _write_json(json_path, out)
    return [str(rows_path), str(json_path)]


_COMMANDS = {
    "weights": _cmd_weights,
    "kernel": _cmd_kernel,
    "carleson": _cmd_carleson,
    "toeplitz": _cmd_toeplitz,
    "schatten": _cmd_schatten,
    "remark": _cmd_remark,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="bergman",
        description="Weighted-Bergman-space numerical experiments",
    )
    parser.add_argument("subcommand", choices=sorted(_COMMANDS))
    parser.add_argument("--config", help="JSON experiment configuration")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--seed", type=int, help="QMC/random seed")
    parser.add_argument("--degree", type=int, help="compression/series degree")
    parser.add_argument("--kmax", type=int, help="annulus cutoff")
    parser.add_argument("--alpha", type=float, help="metric-ball radius for mu_hat")
    parser.add_argument("--p", type=float, action="append", help="Schatten exponent(s)")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _load_config(args)
    except Exception as exc:  # config problems (I/O, JSON, schema)
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return 2
    outdir = Path(cfg["out"])
    outdir.mkdir(parents=True, exist_ok=True)
    try:
        outputs = _COMMANDS[args.subcommand](cfg, outdir)
    except PrecisionError as exc:
        _manifest(outdir, cfg, args.subcommand, [], status="precision_failure",
                  error=str(exc))
        print(f"numerical precision failure: {exc}", file=sys.stderr)
        return 3
    except (ValueError, KeyError) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return 2
    _manifest(outdir, cfg, args.subcommand, outputs)
    return 0


if __name__ == "__main__":
    sys.exit(main())
