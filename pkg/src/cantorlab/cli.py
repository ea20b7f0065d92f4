"""Command-line runner: parse a config, dispatch to the library, emit reports.

Subcommands mirror the library operations (measure, count, fourier,
partition, block-sum, bc-sum, lemma-ratio, inequalities, simulate,
constraint).  Parameters come from a TOML config file and/or flags, flags
winning.  Reports are flat rows written as RFC-4180 CSV or a JSON array;
exact rationals are serialized as "p/q" strings next to a fixed-digit
decimal rendering, so a report can be re-run losslessly.

Exit codes: 0 success, 1 invalid configuration, 2 computation error
(precision cap, scale-chain failure, work budget); on a computation error
the rows finished so far are flushed with a final ``partial`` marker row.
"""

from __future__ import annotations

import argparse
import datetime
import decimal
import json
import os
import subprocess
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from functools import partial
from typing import Optional

import tomli

from . import __version__
from .cantor import Interval, IntervalUnion, count_endpoints_in_union, \
    count_restricted
from .certified import Enclosure, PrecisionCapExceeded, as_creal, cr_pow
from .experiments import (ExperimentParams, block_bounds, block_entry,
                          constraint_check, critical_tau, inequality_report,
                          target_measure_at)
from .fourier import (assemble_partition, classify_good_bad, classify_index,
                      coarse_t_range, mu_hat_magnitude, mu_hat_scaled)
from .sampler import PowerLaw, PsiTable, survival_curve
from .targets import (ApproxTarget, ScaleChainError, TargetTooFine,
                      count_endpoints_in_target, lemma_ratio, measure_target)

_COMPUTE_ERRORS = (TargetTooFine, PrecisionCapExceeded, ScaleChainError)


class _PartialFailure(Exception):
    """A computation error after some rows were already produced."""

    def __init__(self, rows: list, cause: Exception):
        super().__init__(str(cause))
        self.rows = rows
        self.cause = cause

MAX_Y_DENOMINATOR = 10 ** 6


class CliValidationError(ValueError):
    """Bad flags or config; reported with exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliValidationError(message)


# --------------------------------------------------------------------------
# Value parsing and rendering
# --------------------------------------------------------------------------

def parse_rational(key: str, text) -> Fraction:
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    if isinstance(text, float):
        raise CliValidationError(
            f"{key}: pass floats as strings to keep them exact (got {text!r})")
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError):
        raise CliValidationError(
            f"{key}: could not parse {text!r} as a rational "
            "(use p/q or a decimal string)") from None


def parse_tau(text):
    if isinstance(text, str) and text.strip() == "critical":
        return critical_tau()
    return parse_rational("tau", text)


def frac_str(fr: Fraction) -> str:
    return f"{fr.numerator}/{fr.denominator}"


def dec_str(fr: Fraction, digits: int = 30) -> str:
    with decimal.localcontext() as ctx:
        ctx.prec = digits
        return str(decimal.Decimal(fr.numerator) / decimal.Decimal(fr.denominator))


def enclosure_fields(name: str, enc: Enclosure, digits: int) -> dict:
    return {
        name: dec_str(enc.midpoint, digits),
        f"{name}_lo": frac_str(enc.lo),
        f"{name}_hi": frac_str(enc.hi),
    }


def _git_describe() -> str:
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            cwd=os.path.dirname(os.path.abspath(__file__)),
            capture_output=True, text=True, timeout=5)
        if out.returncode == 0:
            return out.stdout.strip()
    except OSError:
        pass
    return "unknown"


# --------------------------------------------------------------------------
# Configuration
# --------------------------------------------------------------------------

_GLOBAL_KEYS = {
    "tau", "y", "alpha", "beta1", "beta2", "C", "precision", "threads",
    "seed", "output", "format", "digits",
}
_COMMAND_KEYS = {
    "constraint": set(),
    "measure": {"n", "sigma"},
    "count": {"level", "n", "sigma", "lo", "hi"},
    "fourier": {"k", "t", "n"},
    "partition": {"block_start"},
    "block-sum": {"block_start"},
    "bc-sum": {"kmax"},
    "lemma-ratio": {"n", "sigma", "delta"},
    "inequalities": {"n"},
    "simulate": {"n0", "n1", "samples", "psi_tau", "psi_table"},
}

_DEFAULTS = {
    "tau": "1.6",
    "y": "0",
    "alpha": "0.05",
    "beta1": "0.078",
    "beta2": "0.922",
    "C": "1",
    "precision": 128,
    "seed": 0,
    "format": "json",
    "digits": 30,
}


@dataclass
class RunConfig:
    """Validated, merged run description."""

    command: str
    params: ExperimentParams
    precision: int
    threads: int
    seed: int
    output: Optional[str]
    format: str
    digits: int
    args: dict = field(default_factory=dict)
    notes: dict = field(default_factory=dict)   # e.g. y rounding provenance


def load_config_file(path: str) -> dict:
    try:
        with open(path, "rb") as fh:
            data = tomli.load(fh)
    except OSError as e:
        raise CliValidationError(f"config: cannot read {path}: {e}") from None
    except tomli.TOMLDecodeError as e:
        raise CliValidationError(f"config {path}: {e}") from None
    if not isinstance(data, dict):
        raise CliValidationError(f"config {path}: expected key = value pairs")
    return data


def validate_config(command: str, file_values: dict, flag_values: dict) -> RunConfig:
    """Merge defaults < config file < flags into a RunConfig, or raise
    CliValidationError collecting every violation."""
    allowed = _GLOBAL_KEYS | _COMMAND_KEYS[command]
    errors = []
    for key in file_values:
        if key not in allowed:
            errors.append(f"unknown config key {key!r} for command {command!r}")
    merged = dict(_DEFAULTS)
    merged.update({k: v for k, v in file_values.items() if k in allowed})
    merged.update({k: v for k, v in flag_values.items() if v is not None})
    if errors:
        raise CliValidationError("; ".join(errors))

    notes = {}
    try:
        tau = parse_tau(merged["tau"])
        y_exact = parse_rational("y", merged["y"])
        if y_exact.denominator > MAX_Y_DENOMINATOR:
            y = y_exact.limit_denominator(MAX_Y_DENOMINATOR)
            notes["y_input"] = frac_str(y_exact)
            notes["y_rounded"] = "true"
            notes["y_rounding_error"] = dec_str(abs(y - y_exact), 6)
        else:
            y = y_exact
        params = ExperimentParams(
            tau=tau, y=y,
            alpha=parse_rational("alpha", merged["alpha"]),
            beta1=parse_rational("beta1", merged["beta1"]),
            beta2=parse_rational("beta2", merged["beta2"]),
            C=parse_rational("C", merged["C"]))
    except (CliValidationError, ValueError) as e:
        raise CliValidationError(str(e)) from None

    precision = int(merged["precision"])
    if precision < 32:
        raise CliValidationError("precision: must be at least 32 bits")
    fmt = str(merged["format"])
    if fmt not in ("csv", "json"):
        raise CliValidationError(f"format: expected csv or json, got {fmt!r}")
    threads = merged.get("threads")
    if threads is None:
        threads = int(os.environ.get("CANTORLAB_THREADS", 0)) or (os.cpu_count() or 1)
    threads = max(1, int(threads))

    cmd_args = {k: merged[k] for k in _COMMAND_KEYS[command] if k in merged}
    return RunConfig(command=command, params=params, precision=precision,
                     threads=threads, seed=int(merged["seed"]),
                     output=merged.get("output"), format=fmt,
                     digits=int(merged["digits"]), args=cmd_args, notes=notes)


# --------------------------------------------------------------------------
# Command handlers
# --------------------------------------------------------------------------

def _require(cfg: RunConfig, *keys):
    missing = [k for k in keys if cfg.args.get(k) is None]
    if missing:
        raise CliValidationError(
            f"{cfg.command}: missing required option(s): "
            + ", ".join("--" + k.replace("_", "-") for k in missing))


def _base_row(cfg: RunConfig) -> dict:
    tau = cfg.params.tau
    row = {
        "command": cfg.command,
        "tau": frac_str(tau) if isinstance(tau, Fraction) else "critical",
        "y": frac_str(cfg.params.y),
        "alpha": frac_str(cfg.params.alpha),
        "beta1": frac_str(cfg.params.beta1),
        "beta2": frac_str(cfg.params.beta2),
        "C": frac_str(cfg.params.C),
        "precision": cfg.precision,
    }
    row.update(cfg.notes)
    return row


def run_constraint(cfg: RunConfig) -> list[dict]:
    check = constraint_check(cfg.params, precision=min(cfg.precision, 256))
    row = _base_row(cfg)
    row["holds"] = check.holds
    row.update(enclosure_fields("lhs", check.lhs, cfg.digits))
    row.update(enclosure_fields("rhs", check.rhs, cfg.digits))
    row["precision_used"] = check.precision_used
    return [row]


def run_measure(cfg: RunConfig) -> list[dict]:
    _require(cfg, "n", "sigma")
    n = int(cfg.args["n"])
    sigma = parse_rational("sigma", cfg.args["sigma"])
    value = measure_target(ApproxTarget(n, cfg.params.y, sigma))
    row = _base_row(cfg)
    row.update(n=n, sigma=frac_str(sigma), measure=frac_str(value),
               measure_dec=dec_str(value, cfg.digits))
    return [row]


def run_count(cfg: RunConfig) -> list[dict]:
    _require(cfg, "level")
    level = int(cfg.args["level"])
    row = _base_row(cfg)
    row["level"] = level
    if cfg.args.get("lo") is not None or cfg.args.get("hi") is not None:
        _require(cfg, "lo", "hi")
        lo = parse_rational("lo", cfg.args["lo"])
        hi = parse_rational("hi", cfg.args["hi"])
        row.update(lo=frac_str(lo), hi=frac_str(hi),
                   left_count=count_restricted(level, lo, hi),
                   endpoint_count=count_endpoints_in_union(
                       level, IntervalUnion([Interval(lo, hi)])))
    else:
        _require(cfg, "n", "sigma")
        n = int(cfg.args["n"])
        sigma = parse_rational("sigma", cfg.args["sigma"])
        t = ApproxTarget(n, cfg.params.y, sigma)
        row.update(n=n, sigma=frac_str(sigma),
                   endpoint_count=count_endpoints_in_target(level, t))
    return [row]


def run_fourier(cfg: RunConfig) -> list[dict]:
    rows = []
    if cfg.args.get("k") is not None:
        for part in str(cfg.args["k"]).split(","):
            k = int(part)
            mag = mu_hat_magnitude(k, min(cfg.precision, 256))
            row = _base_row(cfg)
            row.update(k=k)
            row.update(enclosure_fields("magnitude", mag.enclosure, cfg.digits))
            rows.append(row)
    elif cfg.args.get("t") is not None:
        _require(cfg, "t", "n")
        t, n = int(cfg.args["t"]), int(cfg.args["n"])
        mag = mu_hat_scaled(t, n, min(cfg.precision, 256))
        row = _base_row(cfg)
        row.update(t=t, n=n)
        row.update(enclosure_fields("magnitude", mag.enclosure, cfg.digits))
        rows.append(row)
    else:
        raise CliValidationError("fourier: need --k or (--t and --n)")
    return rows


def run_partition(cfg: RunConfig) -> list[dict]:
    _require(cfg, "block_start")
    N = int(cfg.args["block_start"])
    p = cfg.params
    prec = min(cfg.precision, 64)
    t_range = coarse_t_range(N, p.alpha, prec)
    worker = partial(classify_index, C=p.C, beta1=p.beta1, block_start=N,
                     t_range=t_range, precision=prec)
    verdicts = _pmap(worker, list(range(N, 2 * N + 1)), cfg.threads)
    threshold = (as_creal(p.C) * cr_pow(N, -as_creal(p.beta1)))
    thr = Enclosure(*threshold.bounds(prec))
    part = assemble_partition(N, t_range, thr, verdicts)
    rows = []
    for n in range(N, 2 * N + 1):
        row = _base_row(cfg)
        row.update(block_start=N, n=n, t_range=t_range,
                   verdict=("boundary" if n in part.boundary
                            else "good" if n in part.good else "bad"))
        row.update(enclosure_fields("max_magnitude", part.max_magnitude[n],
                                    cfg.digits))
        row.update(enclosure_fields("threshold", part.threshold, cfg.digits))
        rows.append(row)
    return rows


def run_block_sum(cfg: RunConfig) -> list[dict]:
    _require(cfg, "block_start")
    N = int(cfg.args["block_start"])
    partition = classify_good_bad(N, cfg.params, min(cfg.precision, 64))
    good_set = set(partition.good)
    ns = list(range(N, 2 * N + 1))
    rows: list[dict] = []
    sums = {"good": Fraction(0), "bad": Fraction(0)}
    try:
        entries = _pmap(partial(_block_entry_worker, params=cfg.params,
                                precision=cfg.precision,
                                good_set=frozenset(good_set)),
                        ns, cfg.threads)
    except _COMPUTE_ERRORS as e:
        raise _PartialFailure(rows, e) from e
    for e in entries:
        row = _base_row(cfg)
        row.update(block_start=N, n=e.n, verdict="good" if e.good else "bad",
                   measure=frac_str(e.measure),
                   measure_dec=dec_str(e.measure, cfg.digits))
        row.update(enclosure_fields("sigma", e.sigma, cfg.digits))
        row.update(enclosure_fields("comparator", e.comparator, cfg.digits))
        rows.append(row)
        sums["good" if e.good else "bad"] += e.measure
    bound_good, bound_bad = block_bounds(N, cfg.params)
    summary = _base_row(cfg)
    summary.update(block_start=N, n="total",
                   good_count=len(partition.good),
                   bad_count=len(partition.bad),
                   sum_good=frac_str(sums["good"]),
                   sum_bad=frac_str(sums["bad"]),
                   sum_total=frac_str(sums["good"] + sums["bad"]),
                   sum_total_dec=dec_str(sums["good"] + sums["bad"], cfg.digits))
    summary.update(enclosure_fields("bound_good", bound_good, cfg.digits))
    summary.update(enclosure_fields("bound_bad", bound_bad, cfg.digits))
    rows.append(summary)
    return rows


def _block_entry_worker(n, params, precision, good_set):
    return block_entry(n, n in good_set, params, precision)


def _measure_worker(n, params, precision):
    return target_measure_at(n, params, precision)


def run_bc_sum(cfg: RunConfig) -> list[dict]:
    _require(cfg, "kmax")
    k_max = int(cfg.args["kmax"])
    rows: list[dict] = []
    cumulative = Fraction(0)
    for k in range(k_max + 1):
        n_lo, n_hi = 1 << k, 1 << (k + 1)
        try:
            measures = _pmap(partial(_measure_worker, params=cfg.params,
                                     precision=cfg.precision),
                             list(range(n_lo, n_hi + 1)), cfg.threads)
        except _COMPUTE_ERRORS as e:
            raise _PartialFailure(rows, e) from e
        total = sum(measures, Fraction(0))
        cumulative += total
        row = _base_row(cfg)
        row.update(k=k, n_lo=n_lo, n_hi=n_hi,
                   block_sum=frac_str(total),
                   block_sum_dec=dec_str(total, cfg.digits),
                   cumulative=frac_str(cumulative),
                   cumulative_dec=dec_str(cumulative, cfg.digits))
        rows.append(row)
    return rows


def run_lemma_ratio(cfg: RunConfig) -> list[dict]:
    _require(cfg, "n", "sigma", "delta")
    n = int(cfg.args["n"])
    sigma = parse_rational("sigma", cfg.args["sigma"])
    delta = parse_rational("delta", cfg.args["delta"])
    r = lemma_ratio(n, cfg.params.y, sigma, delta)
    row = _base_row(cfg)
    row.update(n=n, sigma=frac_str(sigma), delta=frac_str(delta),
               level_fine=r.chain.N, level_coarse=r.chain.M,
               count_fine=r.count_fine, count_coarse=r.count_coarse,
               ratio=frac_str(r.ratio), ratio_dec=dec_str(r.ratio, cfg.digits))
    return [row]


def run_inequalities(cfg: RunConfig) -> list[dict]:
    _require(cfg, "n")
    n = int(cfg.args["n"])
    rep = inequality_report(n, cfg.params, cfg.precision)
    row = _base_row(cfg)
    row.update(n=n, sigma=frac_str(rep.sigma), delta=frac_str(rep.delta),
               mu_sigma=frac_str(rep.mu_sigma), mu_delta=frac_str(rep.mu_delta),
               t_range=rep.t_range)
    row.update(enclosure_fields("fourier_sum", rep.fourier_sum, cfg.digits))
    row.update(enclosure_fields("ratio_measure_vs_sigma_pow",
                                rep.ratio_measure_vs_sigma_pow, cfg.digits))
    row.update(enclosure_fields("ratio_fourier_transfer",
                                rep.ratio_fourier_transfer, cfg.digits))
    row.update(enclosure_fields("ratio_coarse_vs_delta",
                                rep.ratio_coarse_vs_delta, cfg.digits))
    if rep.ratio_scale_transfer is not None:
        row.update(enclosure_fields("ratio_scale_transfer",
                                    rep.ratio_scale_transfer, cfg.digits))
    return [row]


def run_simulate(cfg: RunConfig) -> list[dict]:
    _require(cfg, "n0", "n1", "samples")
    n0, n1 = int(cfg.args["n0"]), int(cfg.args["n1"])
    samples = int(cfg.args["samples"])
    if cfg.args.get("psi_table"):
        table = {}
        for item in str(cfg.args["psi_table"]).split(","):
            ns, vs = item.split(":")
            table[int(ns)] = parse_rational("psi_table", vs)
        psi = PsiTable.of(table)
        psi_desc = "table"
    else:
        tau = cfg.args.get("psi_tau")
        tau = parse_rational("psi_tau", tau) if tau is not None else None
        if tau is None:
            if not isinstance(cfg.params.tau, Fraction):
                raise CliValidationError(
                    "simulate: --psi-tau must be rational (or give --psi-table)")
            tau = cfg.params.tau
        psi = PowerLaw(tau, cfg.precision)
        psi_desc = f"n^-({frac_str(tau)})"
    report = survival_curve(psi, (n0, n1), samples, cfg.seed, cfg.params.y)
    rows = []
    for st in report.per_n:
        row = _base_row(cfg)
        row.update(psi_kind=psi_desc, n=st.n, psi=frac_str(st.psi),
                   samples=samples, seed=cfg.seed, hits=st.hits,
                   undecided=st.undecided,
                   frequency=dec_str(Fraction(st.hits, samples), cfg.digits))
        rows.append(row)
    summary = _base_row(cfg)
    summary.update(psi_kind=psi_desc, n="any", samples=samples, seed=cfg.seed,
                   hits=report.any_hit, depth=report.depth,
                   frequency=dec_str(report.any_hit_fraction, cfg.digits))
    rows.append(summary)
    return rows


_HANDLERS = {
    "constraint": run_constraint,
    "measure": run_measure,
    "count": run_count,
    "fourier": run_fourier,
    "partition": run_partition,
    "block-sum": run_block_sum,
    "bc-sum": run_bc_sum,
    "lemma-ratio": run_lemma_ratio,
    "inequalities": run_inequalities,
    "simulate": run_simulate,
}


# --------------------------------------------------------------------------
# Pool, output, entry point
# --------------------------------------------------------------------------

def _pmap(fn, items, threads):
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    import concurrent.futures as cf
    with cf.ProcessPoolExecutor(max_workers=min(threads, len(items))) as pool:
        return list(pool.map(fn, items))


def write_report(rows: list[dict], cfg: RunConfig) -> None:
    stamp = datetime.datetime.now(datetime.timezone.utc).isoformat()
    git = _git_describe()
    for row in rows:
        row.setdefault("version", __version__)
        row.setdefault("git", git)
        row.setdefault("timestamp", stamp)
    if cfg.format == "json":
        text = json.dumps(rows, indent=2, default=str) + "\n"
    else:
        import csv
        import io
        fieldnames: list[str] = []
        for row in rows:
            for key in row:
                if key not in fieldnames:
                    fieldnames.append(key)
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=fieldnames, restval="")
        writer.writeheader()
        writer.writerows(rows)
        text = buf.getvalue()
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def build_parser() -> _Parser:
    parser = _Parser(prog="cantorlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="TOML config file (flags override)")
        p.add_argument("--tau", help="exponent: rational, decimal, or 'critical'")
        p.add_argument("--y", help="offset (rational)")
        p.add_argument("--alpha")
        p.add_argument("--beta1")
        p.add_argument("--beta2")
        p.add_argument("--C")
        p.add_argument("--precision", type=int)
        p.add_argument("--threads", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--output")
        p.add_argument("--format", choices=("csv", "json"))
        p.add_argument("--digits", type=int)

    specs = {
        "constraint": [],
        "measure": [("--n", int), ("--sigma", str)],
        "count": [("--level", int), ("--n", int), ("--sigma", str),
                  ("--lo", str), ("--hi", str)],
        "fourier": [("--k", str), ("--t", int), ("--n", int)],
        "partition": [("--block-start", int)],
        "block-sum": [("--block-start", int)],
        "bc-sum": [("--kmax", int)],
        "lemma-ratio": [("--n", int), ("--sigma", str), ("--delta", str)],
        "inequalities": [("--n", int)],
        "simulate": [("--n0", int), ("--n1", int), ("--samples", int),
                     ("--psi-tau", str), ("--psi-table", str)],
    }
    for name, opts in specs.items():
        p = sub.add_parser(name)
        add_common(p)
        for flag, typ in opts:
            p.add_argument(flag, type=typ)
    return parser


def run(argv: Optional[list[str]] = None) -> int:
    try:
        parser = build_parser()
        ns = parser.parse_args(argv)
        command = ns.command
        file_values = load_config_file(ns.config) if ns.config else {}
        flag_values = {k: v for k, v in vars(ns).items()
                       if k not in ("command", "config")}
        cfg = validate_config(command, file_values, flag_values)
    except CliValidationError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1

    rows: list[dict] = []
    try:
        rows = _HANDLERS[cfg.command](cfg)
    except _PartialFailure as e:
        rows = e.rows + [{"partial": "true", "error": str(e.cause)}]
        write_report(rows, cfg)
        print(f"computation error: {e.cause}", file=sys.stderr)
        return 2
    except _COMPUTE_ERRORS as e:
        rows.append({"partial": "true", "error": str(e)})
        write_report(rows, cfg)
        print(f"computation error: {e}", file=sys.stderr)
        return 2
    except CliValidationError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    write_report(rows, cfg)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
