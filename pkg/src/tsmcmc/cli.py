"""Operator surface: subcommands wiring datasets, density estimation,
generation, correction, and evaluation, driven by a JSON config file with a
few flag overrides.

Every output except ``run_meta.json`` (which carries only the wall-clock
completion stamp) is byte-identical across reruns with the same config and
seeds.  Exit codes: 0 success, 2 config error, 3 runtime error, 4 failed
chain verification.
"""

import csv
import datetime
import functools
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import click
import numpy as np

from . import chains
from .core import Normalizer, TimeSeries
from .corrector import CorrectionConfig, correct_series
from .datasets import LorenzConfig, load_csv, simulate_lorenz, write_csv
from .density import fit_diff_density, save_density
from .exceptions import ConfigInvalid, TsmcmcError
from .external import ExternalSource, ExternalSourceConfig
from .generators import BiasedSource, BootstrapSource, VarSource, rollout
from .metrics import MetricsConfig, evaluate

DEFAULTS = {
    "dataset": {"kind": "lorenz", "steps": 2000},
    "normalize": True,
    "windowing": {"p": 16, "q": 32, "stride": 1},
    "density": {"kind": "gaussian_kde"},
    "source": {"kind": "var"},
    "correction": {
        "beta": 0.5,
        "epsilon": 1e-8,
        "max_retries": 64,
        "conditioning_mode": "synthetic",
    },
    "metrics": {},
    "seeds": [0],
    "out_dir": "tsmcmc-out",
}


# -- config ------------------------------------------------------------------


def _merge(base, override):
    out = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def load_config(path, seeds=None, beta=None, epsilon=None, out_dir=None):
    """Read, default-fill, and validate the run configuration."""
    raw = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                raw = json.load(fh)
        except FileNotFoundError:
            raise ConfigInvalid(f"config file not found: {path}") from None
        except json.JSONDecodeError as e:
            raise ConfigInvalid(f"config file {path} is not valid JSON: {e}") from None
        if not isinstance(raw, dict):
            raise ConfigInvalid("config root must be a JSON object")
    cfg = _merge(DEFAULTS, raw)
    if seeds:
        cfg["seeds"] = list(seeds)
    if beta is not None:
        cfg["correction"]["beta"] = beta
    if epsilon is not None:
        cfg["correction"]["epsilon"] = epsilon
    if out_dir is not None:
        cfg["out_dir"] = out_dir
    _validate_config(cfg)
    return cfg


def _validate_config(cfg):
    ds = cfg["dataset"]
    kind = ds.get("kind")
    if kind == "lorenz":
        try:
            _lorenz_config(ds)
        except (TypeError, ValueError) as e:
            raise ConfigInvalid(f"dataset: {e}") from None
    elif kind == "csv":
        path = ds.get("path")
        if not path:
            raise ConfigInvalid("dataset.kind 'csv' requires dataset.path")
        if not os.path.exists(path):
            raise ConfigInvalid(f"dataset.path does not exist: {path}")
        if not ds.get("value_columns"):
            raise ConfigInvalid("dataset.kind 'csv' requires dataset.value_columns")
    else:
        raise ConfigInvalid(f"dataset.kind must be 'lorenz' or 'csv', got {kind!r}")

    if not cfg["seeds"]:
        raise ConfigInvalid("seeds must be nonempty")
    try:
        cfg["seeds"] = [int(s) for s in cfg["seeds"]]
    except (TypeError, ValueError):
        raise ConfigInvalid("seeds must be integers") from None

    win = cfg["windowing"]
    for key in ("p", "q", "stride"):
        if int(win.get(key, 0)) < 1:
            raise ConfigInvalid(f"windowing.{key} must be a positive integer")

    try:
        _correction_config(cfg, seed=cfg["seeds"][0])
        _metrics_config(cfg, seed=cfg["seeds"][0])
    except (TypeError, ValueError) as e:
        raise ConfigInvalid(str(e)) from None

    src = cfg["source"]
    _validate_source(src)
    if cfg["density"].get("kind", "gaussian_kde") not in (
        "gaussian_kde",
        "histogram_product",
    ):
        raise ConfigInvalid(f"density.kind unknown: {cfg['density'].get('kind')!r}")


def _validate_source(src):
    kind = src.get("kind")
    if kind in ("var", "bootstrap"):
        return
    if kind == "biased":
        inner = src.get("inner")
        if not isinstance(inner, dict):
            raise ConfigInvalid("source.kind 'biased' requires an inner source object")
        if inner.get("kind") == "biased":
            raise ConfigInvalid("biased sources do not nest")
        _validate_source(inner)
        if "drift" not in src:
            raise ConfigInvalid("source.kind 'biased' requires drift")
        return
    if kind == "external":
        if not src.get("command"):
            raise ConfigInvalid("source.kind 'external' requires a command list")
        return
    raise ConfigInvalid(
        f"source.kind must be var, bootstrap, biased, or external, got {kind!r}"
    )


def _lorenz_config(ds):
    return LorenzConfig(
        steps=int(ds.get("steps", 2000)),
        sigma=float(ds.get("sigma", 10.0)),
        rho=float(ds.get("rho", 28.0)),
        beta=float(ds.get("beta", 8.0 / 3.0)),
        dt=float(ds.get("dt", 0.01)),
        transient=int(ds.get("transient", 1000)),
        x0=tuple(ds.get("x0", (1.0, 1.0, 1.0))),
    )


def _correction_config(cfg, seed):
    c = cfg["correction"]
    return CorrectionConfig(
        beta=float(c.get("beta", 0.5)),
        epsilon=float(c.get("epsilon", 1e-8)),
        max_retries=int(c.get("max_retries", 64)),
        conditioning_mode=c.get("conditioning_mode", "synthetic"),
        seed=seed,
    )


def _metrics_config(cfg, seed):
    m = dict(cfg["metrics"])
    m.setdefault("window_len", cfg["windowing"]["q"])
    m.setdefault("predictor_lag", cfg["windowing"]["p"])
    m["seed"] = seed
    return MetricsConfig(**m)


# -- pipeline pieces ----------------------------------------------------------


def build_series(cfg):
    ds = cfg["dataset"]
    if ds["kind"] == "lorenz":
        return simulate_lorenz(_lorenz_config(ds))
    return load_csv(
        ds["path"], ds["value_columns"], timestamp_column=ds.get("timestamp_column")
    )


def prepare_real(cfg):
    """Dataset values, z-scored when cfg['normalize'] is set."""
    series = build_series(cfg)
    if cfg["normalize"]:
        return Normalizer().fit(series.values).transform(series.values), series.dim_names
    return np.array(series.values), series.dim_names


def build_density(cfg, real_values):
    spec = dict(cfg["density"])
    kind = spec.pop("kind", "gaussian_kde")
    return fit_diff_density(real_values, kind=kind, **spec)


def build_source(spec, real_values, p):
    kind = spec["kind"]
    if kind == "var":
        return VarSource(order=int(spec.get("order", p))).fit(real_values)
    if kind == "bootstrap":
        return BootstrapSource().fit(real_values)
    if kind == "biased":
        inner = build_source(spec["inner"], real_values, p)
        drift = spec["drift"]
        if isinstance(drift, (int, float)):
            drift = np.full(real_values.shape[1], float(drift))
        return BiasedSource(inner, drift, noise_scale=float(spec.get("noise_scale", 1.0)))
    if kind == "external":
        config = ExternalSourceConfig(
            command=tuple(spec["command"]),
            handshake_timeout_ms=int(spec.get("handshake_timeout_ms", 5000)),
            proposal_timeout_ms=int(spec.get("proposal_timeout_ms", 5000)),
        )
        return ExternalSource(
            config,
            dims=real_values.shape[1],
            context_len=int(spec.get("context_len", p)),
        ).start()
    raise ConfigInvalid(f"unknown source kind {kind!r}")


def _close_source(source):
    close = getattr(source, "close", None)
    if close is not None:
        close()


def _write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _series_of(values, dim_names):
    return TimeSeries(values, dim_names=dim_names)


def _write_acf_csv(path, report_raw, report_corrected, dim_names):
    lags = report_raw.acf_real.shape[0]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        header = ["lag"]
        for name in dim_names:
            header += [f"real_{name}", f"raw_{name}", f"corrected_{name}"]
        writer.writerow(header)
        for k in range(lags):
            row = [str(k + 1)]
            for i in range(len(dim_names)):
                row += [
                    repr(float(report_raw.acf_real[k, i])),
                    repr(float(report_raw.acf_gen[k, i])),
                    repr(float(report_corrected.acf_gen[k, i])),
                ]
            writer.writerow(row)


def _write_pca_csv(path, report_raw, report_corrected):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["series", "pc1", "pc2"])
        for label, coords in (
            ("real", report_raw.pca.real_coords),
            ("raw", report_raw.pca.gen_coords),
            ("corrected", report_corrected.pca.gen_coords),
        ):
            for row in coords:
                writer.writerow([label, repr(float(row[0])), repr(float(row[1]))])


def run_one_seed(cfg, seed):
    """Generate, correct, and evaluate one seed; write its files.

    Returns the JSON-ready per-seed report.
    """
    out = cfg["out_dir"]
    real, dim_names = prepare_real(cfg)
    p = int(cfg["windowing"]["p"])
    density = build_density(cfg, real)
    source = build_source(cfg["source"], real, p)
    try:
        raw = rollout(source, real[:p], real.shape[0], seed)
        run = correct_series(real, source, density, _correction_config(cfg, seed))
    finally:
        _close_source(source)

    mcfg = _metrics_config(cfg, seed)
    report_raw = evaluate(real, raw, mcfg)
    report_cor = evaluate(real, run.corrected, mcfg)

    write_csv(_series_of(raw, dim_names), os.path.join(out, f"raw_{seed}.csv"))
    write_csv(
        _series_of(run.corrected, dim_names),
        os.path.join(out, f"corrected_{seed}.csv"),
    )
    report = {
        "seed": seed,
        "raw": report_raw.to_json_dict(),
        "corrected": report_cor.to_json_dict(),
        "correction": run.diagnostics_dict(),
    }
    _write_json(os.path.join(out, f"report_{seed}.json"), report)
    _write_acf_csv(
        os.path.join(out, f"acf_{seed}.csv"), report_raw, report_cor, dim_names
    )
    _write_pca_csv(os.path.join(out, f"pca_{seed}.csv"), report_raw, report_cor)
    return report


def _run_one_seed_task(cfg_json, seed):
    return run_one_seed(json.loads(cfg_json), seed)


METRIC_NAMES = (
    "acf_error",
    "skew_error",
    "kurt_error",
    "r2",
    "discriminative",
    "predictive",
)


def summarize(reports):
    """Mean and population std per metric, raw vs corrected, across seeds."""
    summary = {"seeds": [r["seed"] for r in reports], "metrics": {}}
    for name in METRIC_NAMES:
        entry = {}
        for side in ("raw", "corrected"):
            vals = np.array([r[side][name] for r in reports], dtype=np.float64)
            entry[side] = {"mean": float(vals.mean()), "std": float(vals.std())}
        summary["metrics"][name] = entry
    return summary


# -- command plumbing ----------------------------------------------------------


def _fail(code, err):
    payload = {"error": {"type": type(err).__name__, "message": str(err)}}
    click.echo(json.dumps(payload, sort_keys=True), err=True)
    sys.exit(code)


def cli_command(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ConfigInvalid as e:
            _fail(2, e)
        except (TsmcmcError, OSError, ValueError) as e:
            _fail(3, e)

    return wrapper


def _prepare_out(cfg):
    os.makedirs(cfg["out_dir"], exist_ok=True)
    _write_json(os.path.join(cfg["out_dir"], "config.echo.json"), cfg)


def _finish(cfg):
    _write_json(
        os.path.join(cfg["out_dir"], "run_meta.json"),
        {"completed_at": datetime.datetime.now(datetime.timezone.utc).isoformat()},
    )


config_option = click.option("--config", "config_path", default=None, help="JSON config file")
seed_option = click.option("--seed", "seeds", type=int, multiple=True, help="override the seed list")
beta_option = click.option("--beta", type=float, default=None, help="override correction beta")
epsilon_option = click.option("--epsilon", type=float, default=None, help="override correction epsilon")
out_option = click.option("--out", "out_dir", default=None, help="override the output directory")


def standard_options(fn):
    for deco in (config_option, seed_option, beta_option, epsilon_option, out_option):
        fn = deco(fn)
    return fn


@click.group()
def main():
    """Correct synthetic time series against empirical transition statistics
    and score the result."""


@main.command()
@standard_options
@cli_command
def simulate(config_path, seeds, beta, epsilon, out_dir):
    """Simulate the configured dataset and write it as CSV."""
    cfg = load_config(config_path, seeds, beta, epsilon, out_dir)
    _prepare_out(cfg)
    series = build_series(cfg)
    path = os.path.join(cfg["out_dir"], f"{cfg['dataset']['kind']}.csv")
    write_csv(series, path)
    _finish(cfg)
    click.echo(path)


@main.command("fit-density")
@standard_options
@cli_command
def fit_density_cmd(config_path, seeds, beta, epsilon, out_dir):
    """Fit the difference density on the real series and serialize it."""
    cfg = load_config(config_path, seeds, beta, epsilon, out_dir)
    _prepare_out(cfg)
    real, _ = prepare_real(cfg)
    density = build_density(cfg, real)
    path = os.path.join(cfg["out_dir"], "density.json")
    save_density(density, path)
    _finish(cfg)
    click.echo(path)


@main.command()
@standard_options
@cli_command
def generate(config_path, seeds, beta, epsilon, out_dir):
    """Write raw (uncorrected) rollouts, one per seed."""
    cfg = load_config(config_path, seeds, beta, epsilon, out_dir)
    _prepare_out(cfg)
    real, dim_names = prepare_real(cfg)
    p = int(cfg["windowing"]["p"])
    for seed in cfg["seeds"]:
        source = build_source(cfg["source"], real, p)
        try:
            raw = rollout(source, real[:p], real.shape[0], seed)
        finally:
            _close_source(source)
        write_csv(
            _series_of(raw, dim_names),
            os.path.join(cfg["out_dir"], f"raw_{seed}.csv"),
        )
    _finish(cfg)
    click.echo(cfg["out_dir"])


@main.command()
@standard_options
@cli_command
def correct(config_path, seeds, beta, epsilon, out_dir):
    """Run the correction loop per seed; write corrected CSV + diagnostics."""
    cfg = load_config(config_path, seeds, beta, epsilon, out_dir)
    _prepare_out(cfg)
    real, dim_names = prepare_real(cfg)
    p = int(cfg["windowing"]["p"])
    density = build_density(cfg, real)
    for seed in cfg["seeds"]:
        source = build_source(cfg["source"], real, p)
        try:
            run = correct_series(real, source, density, _correction_config(cfg, seed))
        finally:
            _close_source(source)
        write_csv(
            _series_of(run.corrected, dim_names),
            os.path.join(cfg["out_dir"], f"corrected_{seed}.csv"),
        )
        _write_json(
            os.path.join(cfg["out_dir"], f"correction_{seed}.json"),
            run.diagnostics_dict(),
        )
    _finish(cfg)
    click.echo(cfg["out_dir"])


@main.command("evaluate")
@standard_options
@click.option("--real", "real_path", default=None, help="explicit real-series CSV")
@click.option("--gen", "gen_path", default=None, help="explicit generated-series CSV")
@cli_command
def evaluate_cmd(config_path, seeds, beta, epsilon, out_dir, real_path, gen_path):
    """Score generated series against the real one.

    With --real/--gen, scores that single pair; otherwise scores the
    raw_<seed>.csv and corrected_<seed>.csv files in the output directory.
    """
    cfg = load_config(config_path, seeds, beta, epsilon, out_dir)
    _prepare_out(cfg)
    if (real_path is None) != (gen_path is None):
        raise ConfigInvalid("--real and --gen must be given together")
    if real_path is not None:
        for path in (real_path, gen_path):
            if not os.path.exists(path):
                raise ConfigInvalid(f"series file does not exist: {path}")
        header = _csv_value_columns(real_path)
        real = load_csv(real_path, header)
        gen = load_csv(gen_path, _csv_value_columns(gen_path))
        report = evaluate(real.values, gen.values, _metrics_config(cfg, cfg["seeds"][0]))
        path = os.path.join(cfg["out_dir"], "report.json")
        _write_json(path, report.to_json_dict())
        _finish(cfg)
        click.echo(path)
        return

    real, dim_names = prepare_real(cfg)
    for seed in cfg["seeds"]:
        reports = {}
        for side in ("raw", "corrected"):
            path = os.path.join(cfg["out_dir"], f"{side}_{seed}.csv")
            if not os.path.exists(path):
                raise ConfigInvalid(
                    f"missing {path}; run generate/correct first or pass --real/--gen"
                )
            gen = load_csv(path, list(dim_names))
            reports[side] = evaluate(real, gen.values, _metrics_config(cfg, seed))
        report = {
            "seed": seed,
            "raw": reports["raw"].to_json_dict(),
            "corrected": reports["corrected"].to_json_dict(),
        }
        _write_json(os.path.join(cfg["out_dir"], f"report_{seed}.json"), report)
        _write_acf_csv(
            os.path.join(cfg["out_dir"], f"acf_{seed}.csv"),
            reports["raw"],
            reports["corrected"],
            dim_names,
        )
        _write_pca_csv(
            os.path.join(cfg["out_dir"], f"pca_{seed}.csv"),
            reports["raw"],
            reports["corrected"],
        )
    _finish(cfg)
    click.echo(cfg["out_dir"])


def _csv_value_columns(path):
    with open(path, newline="", encoding="utf-8") as fh:
        header = next(csv.reader(fh))
    return [name for name in header if name != "timestamp"]


@main.command()
@standard_options
@click.option(
    "--workers",
    type=int,
    default=None,
    help="parallel seed workers (default: available cores)",
)
@cli_command
def compare(config_path, seeds, beta, epsilon, out_dir, workers):
    """Generate + correct + evaluate across all seeds and summarize.

    The summary table reports mean and population std of each metric for the
    raw and corrected series.
    """
    cfg = load_config(config_path, seeds, beta, epsilon, out_dir)
    _prepare_out(cfg)
    seed_list = cfg["seeds"]
    if workers is None:
        workers = os.cpu_count() or 1
    workers = max(1, min(workers, len(seed_list)))
    if workers == 1:
        reports = [run_one_seed(cfg, seed) for seed in seed_list]
    else:
        cfg_json = json.dumps(cfg)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            reports = list(
                pool.map(_run_one_seed_task, [cfg_json] * len(seed_list), seed_list)
            )
    reports.sort(key=lambda r: r["seed"])
    summary = summarize(reports)
    _write_json(os.path.join(cfg["out_dir"], "summary.json"), summary)
    _finish(cfg)

    width = max(len(n) for n in METRIC_NAMES)
    click.echo(f"{'metric':<{width}}  {'raw':>20}  {'corrected':>20}")
    for name in METRIC_NAMES:
        m = summary["metrics"][name]
        raw = f"{m['raw']['mean']:.4f} ± {m['raw']['std']:.4f}"
        cor = f"{m['corrected']['mean']:.4f} ± {m['corrected']['std']:.4f}"
        click.echo(f"{name:<{width}}  {raw:>20}  {cor:>20}")


@main.command()
@click.option("--out", "out_dir", default=None, help="write the report here as well")
@click.option("--seed", type=int, default=0)
def verify(out_dir, seed):
    """Run the Markov-chain machinery checks; exit 4 on any failure."""
    try:
        report = chains.verification_report(seed=seed)
    except (TsmcmcError, ValueError) as e:
        _fail(3, e)
    text = json.dumps(report, sort_keys=True, indent=2)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "verification.json"), "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    click.echo(text)
    if not report["all_passed"]:
        sys.exit(4)


if __name__ == "__main__":
    main()
