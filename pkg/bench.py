#!/usr/bin/env python3
# Robust mean estimation bench: generate corrupted samples, estimate a mean, run seeded benchmarks
# Subcommands: generate | estimate | bench   (python bench.py <cmd> --help)

import argparse, csv, json, math, os, sys, time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from datetime import datetime

import numpy as np

from config import ARTIFACT_VERSION, error, log, read_key_values, warn
from datagen import (
    SIGMA_MODES,
    LabeledSample,
    gen_gaussian_two_cluster,
    gen_mixed_outliers,
    gen_pareto_constant,
    sigma_for,
    trial_rng,
)
from errors import (
    EXIT_DATA,
    EXIT_OK,
    EXIT_USAGE,
    ContractViolation,
    DataError,
    ParameterError,
    RobustMeanError,
    UsageError,
)
from estimator import AlgoConfig, coordinate_wise_median, make_estimator, parse_tag, recovery_error, run_algorithm1
from linalg_core import empirical_sigma
import theory

SETTINGS = ("gaussian_two_cluster", "pareto_constant", "mixed_outliers", "csv_file")
C2_MODES = ("default", "median_error")
SIDECAR_SUFFIX = ".meta.json"


# --------- CSV data files ---------

def write_points_csv(path, points):
    """One point per row, shortest round-trip float repr, no header."""
    try:
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            for row in points:
                writer.writerow([repr(float(v)) for v in row])
    except OSError as e:
        raise OSError(f"cannot write {path}: {e.strerror or e}") from e


def read_points_csv(path, header=False):
    """Parse an n x d CSV of numbers; errors name the 1-based file row and column."""
    try:
        with open(path, newline="") as f:
            lines = list(csv.reader(f))
    except OSError as e:
        raise DataError(f"cannot read {path}: {e.strerror or e}") from e

    rows, width = [], None
    for lineno, line in enumerate(lines, start=1):
        if header and lineno == 1:
            continue
        if not line or all(not cell.strip() for cell in line):
            continue
        if width is None:
            width = len(line)
        elif len(line) != width:
            raise DataError(f"{path}: row {lineno} has {len(line)} columns, expected {width}")
        values = []
        for col, cell in enumerate(line, start=1):
            try:
                value = float(cell)
            except ValueError:
                raise DataError(f"{path}: row {lineno}, column {col}: not a number: {cell.strip()!r}") from None
            if not math.isfinite(value):
                raise DataError(f"{path}: row {lineno}, column {col}: non-finite value {cell.strip()!r}")
            values.append(value)
        rows.append(values)
    if not rows:
        raise DataError(f"{path}: no data rows")
    return np.asarray(rows, dtype=np.float64)


def sidecar_path(path):
    return f"{path}{SIDECAR_SUFFIX}"


def write_sidecar(path, sample, seed, setting):
    meta = {
        "artifact_version": ARTIFACT_VERSION,
        "setting": setting,
        "seed": int(seed),
        "n": sample.n,
        "d": sample.d,
        "epsilon": sample.epsilon,
        "inlier_mask": [bool(v) for v in sample.inlier_mask],
        "corrupted_indices": [int(i) for i in sample.corrupted_indices],
        "oracle_mean": [float(v) for v in sample.oracle_mean],
        "true_mean": [float(v) for v in sample.true_mean],
        "sigma": empirical_sigma(sample.points[sample.inlier_mask]),
        "theoretical_sigma": sample.theoretical_sigma if math.isfinite(sample.theoretical_sigma) else None,
    }
    target = sidecar_path(path)
    try:
        with open(target, "w") as f:
            json.dump(meta, f, indent=2)
            f.write("\n")
    except OSError as e:
        raise OSError(f"cannot write {target}: {e.strerror or e}") from e
    return target


def read_sidecar(path):
    """Metadata written next to a generated CSV, or None when there is none."""
    target = sidecar_path(path)
    if not os.path.exists(target):
        return None
    try:
        with open(target) as f:
            return json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise DataError(f"cannot parse {target}: {e}") from e


def load_labeled_csv(path, header=False):
    """Points plus their sidecar labels; the sidecar is required to score estimates."""
    points = read_points_csv(path, header)
    meta = read_sidecar(path)
    if meta is None:
        raise DataError(f"{path}: no {SIDECAR_SUFFIX} sidecar, so there is no oracle mean to score against")
    try:
        mask = np.asarray(meta["inlier_mask"], dtype=bool)
        oracle = np.asarray(meta["oracle_mean"], dtype=np.float64)
        true_mean = np.asarray(meta.get("true_mean", meta["oracle_mean"]), dtype=np.float64)
    except (KeyError, TypeError, ValueError) as e:
        raise DataError(f"{sidecar_path(path)}: missing or malformed field: {e}") from e
    if mask.shape != (points.shape[0],) or oracle.shape != (points.shape[1],):
        raise DataError(f"{sidecar_path(path)}: labels do not match a {points.shape[0]} x {points.shape[1]} data file")
    theoretical = meta.get("theoretical_sigma")
    return LabeledSample(
        points=points,
        inlier_mask=mask,
        oracle_mean=oracle,
        true_mean=true_mean,
        epsilon=float(np.count_nonzero(~mask)) / points.shape[0],
        theoretical_sigma=math.nan if theoretical is None else float(theoretical),
        meta={"setting": "csv_file", "path": path},
    )


# --------- Experiment configuration ---------

def _as_bool(value):
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("true", "1", "yes", "on"):
        return True
    if text in ("false", "0", "no", "off", ""):
        return False
    raise ValueError(f"not a boolean: {value!r}")


def _as_list(cast):
    def parse(value):
        items = value.split(",") if isinstance(value, str) else list(value)
        items = [cast(item.strip() if isinstance(item, str) else item)
                 for item in items if not (isinstance(item, str) and not item.strip())]
        if not items:
            raise ValueError("empty list")
        return tuple(items)
    return parse


def _optional_float(value):
    if value is None or (isinstance(value, str) and value.strip().lower() in ("", "none")):
        return None
    return float(value)


EXPERIMENT_KEYS = {
    "setting": str,
    "d": int,
    "n": _as_list(int),
    "eps": _as_list(float),
    "trials": int,
    "estimators": _as_list(str),
    "seed": int,
    "output_path": str,
    "parallelism": int,
    "sigma_mode": str,
    "c2_mode": str,
    "sigma": _optional_float,
    "shape": float,
    "scale": float,
    "data_path": str,
    "header": _as_bool,
    "delta": float,
}

ALGO_KEYS = {
    "p": float,
    "tau": float,
    "c1": float,
    "eps_check": _optional_float,
    "final_threshold": _optional_float,
    "c2_init": _optional_float,
    "tol_feas": float,
    "max_sweeps": int,
    "eta": float,
    "rw_delta": float,
    "rw_rounds": int,
    "spectral_tol": float,
    "restore_level": float,
    "polish_rounds": int,
    "allow_theory_violation": _as_bool,
}


@dataclass(frozen=True)
class ExperimentConfig:
    setting: str = "gaussian_two_cluster"
    d: int = 100
    n: tuple = (1000,)
    eps: tuple = (0.2,)
    trials: int = 10
    estimators: tuple = ("l1", "median", "mean", "simple_filter")
    algo: AlgoConfig = field(default_factory=AlgoConfig)
    seed: int = 0
    output_path: str = "bench_report"
    parallelism: int = 1
    sigma_mode: str = "empirical"
    c2_mode: str = "default"
    sigma: float = None
    shape: float = 2.5
    scale: float = 1.0
    data_path: str = None
    header: bool = False
    delta: float = 0.1

    def __post_init__(self):
        if self.setting not in SETTINGS:
            raise UsageError(f"unknown setting {self.setting!r} (expected one of {', '.join(SETTINGS)})")
        if self.trials < 1:
            raise UsageError(f"trials must be at least 1, got {self.trials}")
        if self.parallelism < 1:
            raise UsageError(f"parallelism must be at least 1, got {self.parallelism}")
        if self.sigma_mode not in SIGMA_MODES:
            raise UsageError(f"unknown sigma mode {self.sigma_mode!r} (expected one of {', '.join(SIGMA_MODES)})")
        if self.c2_mode not in C2_MODES:
            raise UsageError(f"unknown c2 mode {self.c2_mode!r} (expected one of {', '.join(C2_MODES)})")
        if not 0 <= self.seed < 2**64:
            raise UsageError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.sigma is not None and not self.sigma > 0:
            raise UsageError(f"sigma must be positive, got {self.sigma}")
        if self.setting == "csv_file" and not self.data_path:
            raise UsageError("setting csv_file needs data_path")
        if self.d < 1 or any(n < 1 for n in self.n):
            raise UsageError("d and every n must be positive")
        if self.setting != "csv_file" and any(not 0.0 <= e < 0.5 for e in self.eps):
            raise UsageError(f"every eps must lie in [0, 1/2), got {list(self.eps)}")
        if self.setting == "gaussian_two_cluster" and self.d < 2:
            raise UsageError("the two-cluster setting needs d >= 2")
        if self.setting == "pareto_constant" and not (self.shape > 2.0 and self.scale > 0.0):
            raise UsageError(f"Pareto shape must exceed 2 and scale be positive, got {self.shape}, {self.scale}")
        for tag in self.estimators:
            parse_tag(tag)

    @classmethod
    def from_mapping(cls, values):
        """Build from a flat {key: value} mapping (config file merged with CLI flags)."""
        known = set(EXPERIMENT_KEYS) | set(ALGO_KEYS)
        unknown = sorted(set(values) - known)
        if unknown:
            raise UsageError(f"unknown config key(s): {', '.join(unknown)}")
        top, algo = {}, {}
        for key, value in values.items():
            target, cast = (top, EXPERIMENT_KEYS[key]) if key in EXPERIMENT_KEYS else (algo, ALGO_KEYS[key])
            try:
                target[key] = cast(value)
            except (TypeError, ValueError) as e:
                raise UsageError(f"config key {key}: {e}") from None
        return cls(algo=AlgoConfig(**algo), **top)

    def to_dict(self):
        out = {f.name: getattr(self, f.name) for f in fields(self) if f.name != "algo"}
        out["n"], out["eps"], out["estimators"] = list(self.n), list(self.eps), list(self.estimators)
        out["algo"] = {k: v for k, v in asdict(self.algo).items() if k != "sigma"}
        return out


def load_experiment(path=None, overrides=None):
    values = {}
    if path:
        if not os.path.exists(path):
            raise UsageError(f"config file not found: {path}")
        values.update(read_key_values(path))
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return ExperimentConfig.from_mapping(values)


def make_sample(exp, n, eps, rng):
    if exp.setting == "gaussian_two_cluster":
        return gen_gaussian_two_cluster(exp.d, n, eps, rng)
    if exp.setting == "pareto_constant":
        return gen_pareto_constant(exp.d, n, eps, exp.shape, exp.scale, rng)
    if exp.setting == "mixed_outliers":
        return gen_mixed_outliers(exp.d, n, eps, rng)
    return load_labeled_csv(exp.data_path, exp.header)


# --------- Benchmark reports ---------

@dataclass
class BenchReport:
    config: dict
    records: list
    aggregates: list
    theory: list = field(default_factory=list)
    artifact_version: str = ARTIFACT_VERSION
    timestamp: str = ""

    def to_dict(self):
        return asdict(self)


def aggregate(records):
    """Per (n, eps, estimator): mean and standard deviation of the error, mean wall time."""
    groups = {}
    for rec in records:
        groups.setdefault((rec["n"], rec["eps"], rec["estimator"]), []).append(rec)
    out = []
    for (n, eps, estimator), recs in groups.items():
        errors = [r["recovery_error"] for r in recs if r["recovery_error"] is not None]
        times = [r["wall_time_ms"] for r in recs]
        out.append({
            "n": n,
            "eps": eps,
            "estimator": estimator,
            "trials": len(recs),
            "failures": len(recs) - len(errors),
            "mean_error": float(np.mean(errors)) if errors else None,
            "std_error": float(np.std(errors, ddof=1)) if len(errors) > 1 else (0.0 if errors else None),
            "mean_time": float(np.mean(times)),
        })
    return out


def _same(a, b, rtol=1e-9):
    if a is None or b is None:
        return a is None and b is None
    return math.isclose(a, b, rel_tol=rtol, abs_tol=1e-12)


def load_report(path):
    """Reload a JSON report and check that its aggregates recompute from the per-trial records."""
    try:
        with open(path) as f:
            raw = json.load(f)
        report = BenchReport(**raw)
    except (OSError, json.JSONDecodeError, TypeError) as e:
        raise DataError(f"cannot load report {path}: {e}") from e
    try:
        expected = {(a["n"], a["eps"], a["estimator"]): a for a in aggregate(report.records)}
    except (KeyError, TypeError) as e:
        raise DataError(f"{path}: malformed trial record: {e}") from e
    if len(expected) != len(report.aggregates):
        raise DataError(f"{path}: {len(report.aggregates)} aggregate rows, records give {len(expected)}")
    for agg in report.aggregates:
        key = (agg.get("n"), agg.get("eps"), agg.get("estimator"))
        ref = expected.get(key)
        if ref is None:
            raise DataError(f"{path}: aggregate {key} has no trial records")
        for name in ("trials", "failures", "mean_error", "std_error", "mean_time"):
            if not _same(agg.get(name), ref[name]):
                raise DataError(f"{path}: aggregate {key} field {name} is {agg.get(name)}, records give {ref[name]}")
    return report


def run_trial(exp, n, eps, k):
    """Every estimator on trial k of grid row (n, eps). Failures become records, not exceptions."""
    def record(tag, sigma):
        return {"n": n, "eps": eps, "trial": k, "estimator": tag, "sigma": sigma,
                "recovery_error": None, "wall_time_ms": 0.0, "iterations": 0, "terminated_by": None}

    try:
        sample = make_sample(exp, n, eps, trial_rng(exp.seed, k))
        sigma = exp.sigma if exp.sigma is not None else sigma_for(sample, exp.sigma_mode)
        algo = replace(exp.algo, sigma=sigma)
        if exp.c2_mode == "median_error":
            c2 = recovery_error(coordinate_wise_median(sample.points), sample) / sigma
            algo = replace(algo, c2_init=max(c2, np.finfo(float).eps))
    except Exception as e:
        return [{**record(tag, None), "error": f"{type(e).__name__}: {e}"} for tag in exp.estimators]

    records = []
    for tag in exp.estimators:
        rec = record(tag, sigma)
        start = time.perf_counter()
        try:
            est = make_estimator(tag, algo).fit(sample.points)
            rec["recovery_error"] = recovery_error(est.location_, sample)
            rec["iterations"] = int(est.n_iter_)
            rec["terminated_by"] = est.terminated_by_
        except Exception as e:
            rec["error"] = f"{type(e).__name__}: {e}"
        rec["wall_time_ms"] = (time.perf_counter() - start) * 1000.0
        records.append(rec)
    return records


def theory_annotation(exp, n, eps, sigma):
    """End-of-schedule error bound for a grid row; vacuous at most desk-scale sizes."""
    entry = {"n": n, "eps": eps, "bound": None, "vacuous": True}
    try:
        params = theory.TheoryParams(n=n, d=exp.d, delta=exp.delta, c1=exp.algo.c1,
                                     sigma=sigma, eps=eps, tau=exp.algo.tau)
        result = theory.thm3_final_bound(params, exp.algo.eps_check)
    except ParameterError:
        return entry
    entry["vacuous"] = result.vacuous
    entry["bound"] = None if result.vacuous else result.value
    return entry


def grid_rows(exp):
    if exp.setting == "csv_file":
        return [(None, None)]
    return [(n, eps) for eps in exp.eps for n in exp.n]


def run_bench(exp):
    rows = grid_rows(exp)
    jobs = [(n, eps, k) for (n, eps) in rows for k in range(exp.trials)]
    log(f"🧪 {exp.setting}: {len(rows)} grid row(s) x {exp.trials} trial(s), estimators={','.join(exp.estimators)}, workers={exp.parallelism}")

    with ThreadPoolExecutor(max_workers=exp.parallelism) as pool:
        futures = [pool.submit(run_trial, exp, n, eps, k) for (n, eps, k) in jobs]
        results = [f.result() for f in futures]

    records = [rec for batch in results for rec in batch]
    failures = [r for r in records if "error" in r]
    for rec in failures:
        warn(f"trial {rec['trial']} {rec['estimator']} failed: {rec['error']}")

    aggregates = aggregate(records)
    notes = []
    for n, eps in rows:
        sigmas = [r["sigma"] for r in records if r["n"] == n and r["eps"] == eps and r["sigma"] is not None]
        if n is not None and sigmas:
            notes.append(theory_annotation(exp, n, eps, float(np.mean(sigmas))))
    for agg in aggregates:
        err = "failed" if agg["mean_error"] is None else f"{agg['mean_error']:.4f} ± {agg['std_error']:.4f}"
        log(f"   n={agg['n']} eps={agg['eps']} {agg['estimator']:>14}: {err} ({agg['mean_time']:.0f} ms)")
    log(f"{'✅' if not failures else '⚠️ '} bench finished, {len(failures)} failed estimator call(s)")
    return BenchReport(
        config=exp.to_dict(),
        records=records,
        aggregates=aggregates,
        theory=notes,
        timestamp=datetime.now().isoformat(timespec="seconds"),
    )


def write_table_csv(path, report, estimators):
    """Rows are grid points (eps, n), columns the estimators' mean recovery error."""
    cells = {(a["n"], a["eps"], a["estimator"]): a["mean_error"] for a in report.aggregates}
    keys = []
    for a in report.aggregates:
        if (a["eps"], a["n"]) not in keys:
            keys.append((a["eps"], a["n"]))
    try:
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["eps", "n", *estimators])
            for eps, n in keys:
                row = ["" if eps is None else eps, "" if n is None else n]
                for tag in estimators:
                    value = cells.get((n, eps, tag))
                    row.append("" if value is None else f"{value:.6g}")
                writer.writerow(row)
    except OSError as e:
        raise OSError(f"cannot write {path}: {e.strerror or e}") from e


def report_paths(output_path):
    stem = output_path[:-5] if output_path.endswith(".json") else output_path
    return f"{stem}.json", f"{stem}.csv"


# --------- Subcommands ---------

def _algo_overrides(args):
    return {
        "p": args.p,
        "tau": args.tau,
        "c1": args.c1,
        "eps_check": args.eps_check,
        "final_threshold": args.final_threshold,
        "c2_init": args.c2_init,
        "allow_theory_violation": True if args.allow_theory_violation else None,
    }


def cmd_generate(args):
    exp = load_experiment(args.config, {
        "setting": args.setting, "d": args.d, "n": args.n, "eps": args.eps,
        "seed": args.seed, "shape": args.shape, "scale": args.scale,
    })
    if exp.setting == "csv_file":
        raise UsageError("generate needs a synthetic setting, not csv_file")
    if len(exp.n) != 1 or len(exp.eps) != 1:
        raise UsageError("generate takes a single n and a single eps")
    if not args.output:
        raise UsageError("generate needs --output PATH")
    sample = make_sample(exp, exp.n[0], exp.eps[0], trial_rng(exp.seed, 0))
    write_points_csv(args.output, sample.points)
    meta = write_sidecar(args.output, sample, exp.seed, exp.setting)
    log(f"✅ wrote {sample.n} x {sample.d} sample ({len(sample.corrupted_indices)} corrupted) to {args.output}, labels in {meta}")
    return EXIT_OK


def cmd_estimate(args):
    points = read_points_csv(args.data, args.header)
    exp = load_experiment(args.config, {"sigma": args.sigma, **_algo_overrides(args)})
    sigma = exp.sigma
    if sigma is None:
        meta = read_sidecar(args.data)
        if meta is None or meta.get("sigma") is None:
            raise UsageError("no --sigma given and no sidecar with a sigma next to the data file")
        sigma = float(meta["sigma"])
    cfg = replace(exp.algo, sigma=sigma)
    trace = run_algorithm1(points, cfg)
    out = {
        "estimate": [float(v) for v in trace.final_x],
        "iterations": trace.iterations,
        "schedule_T": trace.schedule_T,
        "c2_trace": [float(c) for c in trace.c2_trace],
        "h_support_size": trace.h_support_size(),
        "excluded": trace.excluded(cfg.final_threshold or cfg.tau),
        "sigma": sigma,
        "terminated_by": trace.terminated_by.value,
    }
    json.dump(out, sys.stdout, indent=2)
    sys.stdout.write("\n")
    sys.stdout.flush()
    log(f"✅ estimate done: {trace.iterations} iteration(s), terminated by {trace.terminated_by.value}")
    return EXIT_OK


def cmd_bench(args):
    overrides = {
        "setting": args.setting, "d": args.d, "n": args.n, "eps": args.eps, "trials": args.trials,
        "estimators": args.estimators, "seed": args.seed, "output_path": args.output,
        "parallelism": args.parallelism, "sigma_mode": args.sigma_mode, "c2_mode": args.c2_mode,
        "sigma": args.sigma, "data_path": args.data, "header": True if args.header else None,
        **_algo_overrides(args),
    }
    exp = load_experiment(args.config, overrides)
    report = run_bench(exp)
    json_path, csv_path = report_paths(exp.output_path)
    if os.path.dirname(json_path):
        os.makedirs(os.path.dirname(json_path), exist_ok=True)
    try:
        with open(json_path, "w") as f:
            json.dump(report.to_dict(), f, indent=2)
            f.write("\n")
    except OSError as e:
        raise OSError(f"cannot write {json_path}: {e.strerror or e}") from e
    write_table_csv(csv_path, report, exp.estimators)
    log(f"📄 report: {json_path}, table: {csv_path}")
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_algo_flags(p):
    p.add_argument("--p", type=float, help="lp exponent in (0, 1] (default 1)")
    p.add_argument("--tau", type=float, help="Step-2 threshold in (0, 1] (default 0.6)")
    p.add_argument("--c1", type=float, help="spectral constant c1 > 1 (default 1.1)")
    p.add_argument("--sigma", type=float, help="covariance scale sigma")
    p.add_argument("--eps-check", dest="eps_check", type=float, help="upper bound on the corruption level")
    p.add_argument("--final-threshold", dest="final_threshold", type=float, help="hard threshold applied to the last h")
    p.add_argument("--c2-init", dest="c2_init", type=float, help="override for the initial c2")
    p.add_argument("--allow-theory-violation", dest="allow_theory_violation", action="store_true",
                   help="warn instead of failing when eps_check >= f(tau)")


def build_parser():
    parser = _Parser(prog="bench.py", description="Robust mean estimation by lp minimisation and thresholding")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    gen = sub.add_parser("generate", help="write a corrupted sample as CSV plus a metadata sidecar")
    gen.add_argument("--config", help="KEY=value experiment file")
    gen.add_argument("--setting", help=f"one of {', '.join(SETTINGS[:-1])}")
    gen.add_argument("--d", type=int)
    gen.add_argument("--n")
    gen.add_argument("--eps")
    gen.add_argument("--seed", type=int)
    gen.add_argument("--shape", type=float)
    gen.add_argument("--scale", type=float)
    gen.add_argument("--output", help="CSV path")
    gen.set_defaults(func=cmd_generate)

    est = sub.add_parser("estimate", help="estimate the mean of a CSV file, JSON on stdout")
    est.add_argument("data", help="CSV file, one point per row")
    est.add_argument("--header", action="store_true", help="skip the first row")
    est.add_argument("--config", help="KEY=value file; algorithm keys and SIGMA are read, flags override")
    _add_algo_flags(est)
    est.set_defaults(func=cmd_estimate)

    bench = sub.add_parser("bench", help="seeded multi-trial benchmark, JSON report plus CSV table")
    bench.add_argument("--config", help="KEY=value experiment file")
    bench.add_argument("--setting", help=f"one of {', '.join(SETTINGS)}")
    bench.add_argument("--d", type=int)
    bench.add_argument("--n", help="comma list of sample sizes")
    bench.add_argument("--eps", help="comma list of corruption levels")
    bench.add_argument("--trials", type=int)
    bench.add_argument("--estimators", help="comma list of l1, lp(p), median, mean, simple_filter")
    bench.add_argument("--seed", type=int)
    bench.add_argument("--output", help="report path stem (writes .json and .csv)")
    bench.add_argument("--parallelism", type=int)
    bench.add_argument("--sigma-mode", dest="sigma_mode", choices=SIGMA_MODES)
    bench.add_argument("--c2-mode", dest="c2_mode", choices=C2_MODES)
    bench.add_argument("--data", help="CSV file for setting csv_file")
    bench.add_argument("--header", action="store_true")
    _add_algo_flags(bench)
    bench.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        if not getattr(args, "func", None):
            raise UsageError("missing subcommand (generate, estimate or bench)")
        return args.func(args)
    except (UsageError, ParameterError) as e:
        error(str(e))
        return EXIT_USAGE
    except (DataError, ContractViolation, OSError) as e:
        error(str(e))
        return EXIT_DATA
    except RobustMeanError as e:
        error(str(e))
        return EXIT_DATA
    except KeyboardInterrupt:
        log("Interrupted.")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
