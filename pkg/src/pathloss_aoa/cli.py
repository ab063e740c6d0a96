"""Command-line entry point: ``python -m pathloss_aoa <command>``.

Exit codes: 0 success, 2 invalid configuration, 3 I/O failure, 4 fit or
computation failure. Every command writes a manifest JSON (config hash,
seed, library versions, output hashes) next to its outputs.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import platform
import sys
from pathlib import Path

import numpy as np
import scipy

from . import __version__, benchmark as bench, config as cfgmod, crlb, datasets, estimators, metrics, sr
from .beam import CosineBeamPattern, Pointing
from .crlb import CrlbConfig
from .datasets import SweepDataset
from .estimators import AoaModel
from .fileio import atomic_write_json, atomic_write_text
from .presets import ConfigError

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_COMPUTE = 0, 2, 3, 4
MANIFEST_SCHEMA = "pathloss_aoa.manifest/1"


class CliError(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _io(fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as err:
        raise CliError(EXIT_IO, f"I/O error: {err}") from err


def _compute(fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except (ValueError, ArithmeticError, sr.SrFitError, np.linalg.LinAlgError) as err:
        raise CliError(EXIT_COMPUTE, f"computation failed: {err}") from err


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _write_manifest(path, command, args, seed, config_hash, outputs):
    manifest = {
        "schema": MANIFEST_SCHEMA,
        "command": command,
        "arguments": {k: (str(v) if isinstance(v, Path) else v) for k, v in sorted(vars(args).items())
                      if k not in ("func",)},
        "seed": seed,
        "config_hash": config_hash,
        "versions": {"pathloss_aoa": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
                     "python": platform.python_version()},
        "outputs": {str(p): _sha256(p) for p in outputs},
    }
    _io(atomic_write_json, path, manifest)


def _manifest_path(out) -> Path:
    out = Path(out)
    return out.with_name(out.name.split(".")[0] + ".manifest.json")


def _load_config(args) -> cfgmod.RunConfig:
    return cfgmod.load(getattr(args, "preset", None), getattr(args, "config", None), getattr(args, "scenario", None))


def _make_dataset(rc: cfgmod.RunConfig, seed: int, noise=None) -> SweepDataset:
    g = rc.generator
    sigma = g["noise_sigma_db"] if noise is None else noise
    if rc.scenario == "free_space":
        return datasets.generate_fs_sweep(rc.link, tuple(g["angle_range_deg"]), g["step_deg"], tuple(g["freqs_hz"]),
                                          g["boresight_deg"], sigma, seed, tuple(g["planes"]))
    return datasets.generate_ris_samples(rc.link, g["n_samples"], sigma, seed, tuple(g["freqs_hz"]),
                                         g["theta_r_deg"], g["theta_t_deg"], g["freq_step_hz"])


def _peak_summary(ds: SweepDataset) -> str:
    parts = []
    for f in np.unique(ds.freq_hz):
        sel = ds.freq_hz == f
        i = np.argmax(ds.s21_db[sel])
        parts.append(f"{f / 1e9:g} GHz: {ds.angle_deg[sel][i]:g} deg ({ds.s21_db[sel][i]:.2f} dB)")
    if len(parts) > 6:
        parts = parts[:3] + ["..."] + parts[-2:]
    return "; ".join(parts)


# --------------------------------------------------------------------------- #
# commands

def cmd_generate(args) -> int:
    rc = _load_config(args)
    seed = cfgmod.resolve_seed(args.seed, rc.generator["seed"])
    if args.noise_sigma_db is not None and args.noise_sigma_db < 0:
        raise ConfigError("--noise-sigma-db must be >= 0", "noise_sigma_db")
    ds = _compute(_make_dataset, rc, seed, args.noise_sigma_db)
    csv_path, meta_path = _io(ds.save, args.out)
    _write_manifest(_manifest_path(args.out), "generate", args, seed, rc.config_hash(), [csv_path, meta_path])
    print(f"wrote {len(ds)} rows to {csv_path}")
    if ds.meta["dropped_null_rows"]:
        print(f"dropped {ds.meta['dropped_null_rows']} pattern-null rows")
    print(f"peak S21 per frequency: {_peak_summary(ds)}")
    return EXIT_OK


def _directivity_source(ds: SweepDataset, char_paths):
    if char_paths:
        return [_io(SweepDataset.load, p) for p in char_paths]
    rows = estimators.azimuth_rows(ds)
    if np.unique(rows.angle_deg).size >= 5:
        return [ds]
    # fixed-geometry data: characterize the same hardware with a synthetic sweep
    return datasets.characterization_sweeps(ds.scenario, ds.link())


def cmd_fit_aoa(args) -> int:
    ds = _io(SweepDataset.load, args.data)
    if "scenario" not in ds.meta:
        raise CliError(EXIT_IO, f"{args.data}: metadata sidecar missing or incomplete")
    sr_cfg = None
    if args.mode == "sr":
        rc = _load_config(args) if (args.config or args.preset) else None
        base = rc.sr if rc else sr.SrConfig()
        seed = cfgmod.resolve_seed(args.seed, base.seed)
        kw = {"seed": seed}
        if args.iterations is not None:
            kw["iterations"] = args.iterations
        try:
            sr_cfg = sr.SrConfig(**{**{f: getattr(base, f) for f in base.__dataclass_fields__}, **kw})
        except ValueError as err:
            raise ConfigError(str(err), "sr") from err
    else:
        seed = cfgmod.resolve_seed(args.seed, 0)
    char = _compute(_directivity_source, ds, args.characterization) if args.mode != "sr" else None
    model = _compute(estimators.saber_fit, args.mode, ds, None, sr_cfg, None, char)

    rows = estimators.azimuth_rows(ds)
    theta = datasets.truth_theta_r(rows)
    pred = np.asarray(model.predict(estimators.sweep_features(rows, model.features)), dtype=float) * np.ones(len(rows))
    fit_mae = metrics.mae(np.degrees(pred), np.degrees(theta))
    model.meta["mae_deg"] = fit_mae
    outputs = [_io(atomic_write_json, args.out_model, model.to_dict())]
    if args.mode == "sr":
        front_path = Path(args.front_out) if args.front_out else Path(args.out_model).with_suffix(".front.csv")
        _io(model.front.to_csv, front_path)
        outputs.append(front_path)
        print(f"validation MSE: {model.meta['validation_mse']:.6g} rad^2")
    _write_manifest(_manifest_path(args.out_model), "fit-aoa", args, seed, ds.content_hash(), outputs)
    print(f"expression: {model.expression_text()}")
    print(f"MAE: {fit_mae:.6g} deg over {len(rows)} rows (clamped: {model.meta['clamp_count']})")
    return EXIT_OK


def _read_feature_csv(path, model: AoaModel):
    text = Path(path).read_text()
    header = text.splitlines()[0].strip() if text else ""
    if header == datasets.CSV_HEADER:
        ds = SweepDataset.load(path)
        rows = estimators.azimuth_rows(ds)
        return estimators.sweep_features(rows, model.features), list(model.features)
    reader = csv.DictReader(io.StringIO(text))
    missing = [f for f in model.features if f not in (reader.fieldnames or [])]
    if missing:
        raise ValueError(f"{path}: missing column {missing[0]!r}")
    data = [[float(r[f]) for f in model.features] for r in reader]
    if not data:
        raise ValueError(f"{path}: no rows")
    return np.array(data), list(model.features)


def cmd_predict(args) -> int:
    model = _io(lambda p: AoaModel.from_dict(json.loads(Path(p).read_text())), args.model)
    X, names = _io(_read_feature_csv, args.data, model)
    theta = _compute(lambda: np.asarray(model.predict(X), dtype=float) * np.ones(len(X)))
    lines = [",".join(names + ["theta_rad", "theta_deg"])]
    for row, t in zip(X.tolist(), theta.tolist()):
        lines.append(",".join(repr(v) for v in row + [t, math.degrees(t)]))
    _io(atomic_write_text, args.out, "\n".join(lines) + "\n")
    _write_manifest(_manifest_path(args.out), "predict", args, None, _sha256(args.model), [Path(args.out)])
    print(f"wrote {len(theta)} angles to {args.out} (clamped: {model.clamp_count(X)})")
    return EXIT_OK


def _crlb_curve(rc: cfgmod.RunConfig, args):
    base = rc.crlb
    cfg = CrlbConfig(args.noise_var if args.noise_var is not None else base.noise_var,
                     args.snapshots if args.snapshots is not None else base.snapshots,
                     args.alpha if args.alpha is not None else base.alpha)
    start, stop, step = rc.crlb_grid_deg
    grid = np.radians(np.round(np.arange(start, stop + step / 2, step), 9))
    if args.pattern == "cos":
        return crlb.crlb_rmse_curve(rc.scenario, CosineBeamPattern(1, 1), grid, cfg)
    return crlb.link_crlb_curve(rc.link, grid, cfg)


def cmd_crlb(args) -> int:
    rc = _load_config(args)
    try:
        curve = _crlb_curve(rc, args)
    except ArithmeticError as err:
        raise CliError(EXIT_COMPUTE, str(err)) from err
    except ValueError as err:
        raise ConfigError(str(err), "crlb") from err
    _io(curve.to_csv, args.out)
    _write_manifest(_manifest_path(args.out), "crlb", args, None, rc.config_hash(), [Path(args.out)])
    i = int(np.argmin(np.abs(curve.grid_deg - 60.0)))
    print(f"wrote {curve.grid.size} points to {args.out}; "
          f"sqrt(CRLB) at {curve.grid_deg[i]:g} deg = {curve.bound_rmse_deg[i]:.6g} deg")
    return EXIT_OK


def cmd_mc_cdf(args) -> int:
    rc = _load_config(args)
    seed = cfgmod.resolve_seed(args.seed, rc.generator["seed"])
    sigma = args.sigma_point_deg if args.sigma_point_deg is not None else rc.mc["sigma_point_deg"]
    n = args.n if args.n is not None else rc.mc["n"]
    if sigma < 0 or n < 1:
        raise ConfigError("sigma must be >= 0 and n >= 1", "mc")
    cdf = _compute(metrics.monte_carlo_pl_cdf, rc.link, sigma, n, seed)
    _io(cdf.to_csv, args.out)
    _write_manifest(_manifest_path(args.out), "mc-cdf", args, seed, rc.config_hash(), [Path(args.out)])
    print(f"wrote {len(cdf)} samples to {args.out}; median {cdf.median:.4f} dB")
    return EXIT_OK


def _fig6_csv(ds: SweepDataset) -> str:
    """Measured and model S21 per row."""
    tx, rx = datasets.row_pointings(ds)
    link = ds.link()
    lines = ["freq_hz,angle_deg,plane,s21_db,model_s21_db"]
    for i in range(len(ds)):
        at_t = Pointing(float(np.asarray(tx.theta_rad)[i]), float(np.asarray(tx.phi_rad)[i]))
        at_r = Pointing(float(np.asarray(rx.theta_rad)[i]), float(np.asarray(rx.phi_rad)[i]))
        m = -float(datasets.model_pl_db(ds.scenario, link, ds.freq_hz[i], at_t, at_r))
        lines.append(f"{float(ds.freq_hz[i])!r},{float(ds.angle_deg[i])!r},{ds.plane[i]},"
                     f"{float(ds.s21_db[i])!r},{m!r}")
    return "\n".join(lines) + "\n"


def cmd_benchmark(args) -> int:
    rc = _load_config(args)
    seed = cfgmod.resolve_seed(args.seed, rc.generator["seed"])
    modes = tuple(args.estimators.split(",")) if args.estimators else estimators.MODES
    bad = [m for m in modes if m not in estimators.MODES]
    if bad:
        raise ConfigError(f"unknown estimator {bad[0]!r}", "estimators")
    sr_cfg = sr.SrConfig(**{**{f: getattr(rc.sr, f) for f in rc.sr.__dataclass_fields__}, "seed": seed})
    ds = _io(SweepDataset.load, args.data) if args.data else _compute(_make_dataset, rc, seed)
    char = _compute(_directivity_source, ds, None) if any(m != "sr" for m in modes) else None
    report = _compute(bench.benchmark, ds, rc.scenario, modes, sr_cfg, rc.crlb,
                      per_angle=rc.scenario == "free_space", characterization=char)

    start, stop, step = rc.crlb_grid_deg
    eff_grid = np.radians(np.round(np.arange(start, stop + step / 2, step), 9))
    pattern = rc.link.rx_pattern
    eff = _compute(bench.efficiency_table, CosineBeamPattern(pattern.n, pattern.m), eff_grid, rc.crlb,
                   args.trials, seed)
    report["efficiency"] = {k: eff[k] for k in ("trials", "seed")}
    report["efficiency"]["all_above_bound"] = bool(all(eff["above_bound"]))
    cdf = _compute(metrics.monte_carlo_pl_cdf, rc.link, rc.mc["sigma_point_deg"], rc.mc["n"], seed)
    report["seed"] = seed

    out = Path(args.out_dir)
    files = {
        "report.json": json.dumps(report, indent=2, sort_keys=True) + "\n",
        "report.txt": bench.format_table(report),
        "fig6_sweep.csv": _compute(_fig6_csv, ds),
        "fig7_cdf.csv": cdf.to_csv(),
        "fig8_efficiency.csv": "theta_deg,crlb_rmse_deg,mc_rmse_deg,mc_stderr_deg\n" + "".join(
            f"{t!r},{b!r},{e!r},{s!r}\n" for t, b, e, s in
            zip(eff["theta_deg"], eff["crlb_rmse_deg"], eff["mc_rmse_deg"], eff["mc_stderr_deg"])),
    }
    written = [_io(atomic_write_text, out / name, text) for name, text in files.items()]
    _write_manifest(out / "manifest.json", "benchmark", args, seed, rc.config_hash(), written)
    sys.stdout.write(files["report.txt"])
    print(f"outputs in {out}")
    return EXIT_OK


# --------------------------------------------------------------------------- #
# parser

def _add_config_flags(p, scenario=True):
    p.add_argument("--preset", choices=cfgmod.PRESETS, help="named campaign preset")
    p.add_argument("--config", help="JSON config whose blocks override the preset")
    if scenario:
        p.add_argument("--scenario", choices=("free_space", "ris"), help="pick the scenario's default preset")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pathloss_aoa", description="Path-loss based angle-of-arrival estimation.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    seed_help = f"RNG seed (default: ${cfgmod.SEED_ENV}, then the config)"

    p = sub.add_parser("generate", help="synthesize a sweep dataset")
    _add_config_flags(p)
    p.add_argument("--out", required=True, help="dataset CSV path; metadata goes to <stem>.meta.json")
    p.add_argument("--noise-sigma-db", type=float)
    p.add_argument("--seed", type=int, help=seed_help)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("fit-aoa", help="fit an AoA estimator on a dataset")
    p.add_argument("--mode", choices=estimators.MODES, required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out-model", required=True)
    p.add_argument("--front-out", help="Pareto front CSV for --mode sr (default: <model>.front.csv)")
    p.add_argument("--characterization", action="append", help="sweep CSV used to fit directivity (repeatable)")
    p.add_argument("--iterations", type=int)
    _add_config_flags(p, scenario=False)
    p.add_argument("--seed", type=int, help=seed_help)
    p.set_defaults(func=cmd_fit_aoa)

    p = sub.add_parser("predict", help="map path loss to angles with a fitted model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True, help="CSV with the model's feature columns, or a sweep dataset")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("crlb", help="sqrt(CRLB) curve")
    _add_config_flags(p)
    p.add_argument("--pattern", choices=("link", "cos"), default="link",
                   help="'cos' uses h = cos(theta) with unit scale")
    p.add_argument("--noise-var", type=float)
    p.add_argument("--snapshots", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_crlb)

    p = sub.add_parser("mc-cdf", help="path-loss CDF under random pointing")
    _add_config_flags(p)
    p.add_argument("--sigma-point-deg", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--seed", type=int, help=seed_help)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_mc_cdf)

    p = sub.add_parser("benchmark", help="fit, score and compare estimators against the bound")
    _add_config_flags(p)
    p.add_argument("--data", help="dataset CSV (default: generate from the config)")
    p.add_argument("--estimators", help="comma list from sr,direct,poly")
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, help=seed_help)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_benchmark)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "command", None) == "mc-cdf" and args.preset is None and args.scenario is None and args.config is None:
        args.preset = "stage2_ris_2m"
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except CliError as err:
        print(err, file=sys.stderr)
        return err.code
    except OSError as err:
        print(f"I/O error: {err}", file=sys.stderr)
        return EXIT_IO
