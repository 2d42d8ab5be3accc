"""Command-line front end.

Subcommands: verify (fixed radius), certify (radius search over dataset
rows), bounds (per-neuron interval dump), compare (strategy table).
Reports serialize to JSON (full precision), CSV and Markdown (6 significant
digits). Exit codes: 0 robust/success, 2 unknown, 3 falsified, 1 usage or
I/O error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .model import InputRegion, NetworkFormatError, load_network, predict
from .propagation import propagate
from .underapprox import UnderConfig
from .verifier import (
    FALSIFIED,
    ROBUST,
    UNKNOWN,
    VerifierConfig,
    certify_dataset,
    verify_at,
)

REPORT_FORMAT = "dualcert-report-v1"

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_UNKNOWN = 2
EXIT_FALSIFIED = 3

_STATUS_EXIT = {ROBUST: EXIT_OK, UNKNOWN: EXIT_UNKNOWN, FALSIFIED: EXIT_FALSIFIED}


class CliError(Exception):
    """User-facing failure: bad flags, missing files, malformed data."""


def _load_instances(path):
    try:
        data = np.loadtxt(path, delimiter=",", ndmin=2, dtype=np.float64)
    except OSError as exc:
        raise CliError(f"cannot read input file {path}: {exc}") from exc
    except ValueError as exc:
        raise CliError(f"malformed CSV in {path}: {exc}") from exc
    if data.shape[1] < 2:
        raise CliError(f"{path}: need a label column plus at least one feature")
    labels = data[:, 0].astype(int)
    if not np.allclose(labels, data[:, 0]):
        raise CliError(f"{path}: first column must hold integer labels")
    return [(int(lab), row) for lab, row in zip(labels, data[:, 1:])]


def _load_model(path):
    if not os.path.exists(path):
        raise CliError(f"model file not found: {path}")
    try:
        return load_network(path)
    except NetworkFormatError as exc:
        raise CliError(str(exc)) from exc


def _verifier_config(args) -> VerifierConfig:
    under = UnderConfig(
        strategy="sampling",
        n_samples=args.samples,
        step_fraction=args.step,
        seed=args.seed,
    )
    kwargs = dict(strategy=args.strategy, under=under)
    if hasattr(args, "eps_max"):
        kwargs["eps_max"] = args.eps_max
    if hasattr(args, "tol"):
        kwargs["search_tol"] = args.tol
    return VerifierConfig(**kwargs)


def _workers() -> int:
    raw = os.environ.get("DUALCERT_THREADS", "")
    try:
        return max(1, int(raw)) if raw else 1
    except ValueError:
        return 1


def _config_echo(args, keys):
    return {k: getattr(args, k) for k in keys if hasattr(args, k)}


def _report(command, config, rows, aggregates, timings: bool):
    report = {
        "format": REPORT_FORMAT,
        "tool": {"name": "dualcert", "version": __version__},
        "command": command,
        "config": config,
        "rows": rows,
        "aggregates": aggregates,
    }
    if not timings:
        for row in report["rows"]:
            row.pop("runtime_ms", None)
        report["aggregates"].pop("total_runtime_ms", None)
        report["aggregates"].pop("mean_runtime_ms", None)
    return report


def _sig6(x):
    if isinstance(x, float):
        return float(f"{x:.6g}")
    return x


def _emit(report, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, sort_keys=True, indent=2) + "\n"
    rows = report["rows"]
    keys = sorted({k for row in rows for k in row})
    flat = [{k: _sig6(row.get(k, "")) for k in keys} for row in rows]
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
        writer.writeheader()
        writer.writerows(flat)
        for k, v in sorted(report["aggregates"].items()):
            buf.write(f"# {k},{_sig6(v)}\n")
        return buf.getvalue()
    if fmt == "md":
        lines = ["| " + " | ".join(keys) + " |", "| " + " | ".join("---" for _ in keys) + " |"]
        for row in flat:
            lines.append("| " + " | ".join(str(row[k]) for k in keys) + " |")
        lines.append("")
        for k, v in sorted(report["aggregates"].items()):
            lines.append(f"- {k}: {_sig6(v)}")
        return "\n".join(lines) + "\n"
    raise CliError(f"unknown report format {fmt!r}")


def _write_report(report, args) -> None:
    text = _emit(report, args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_verify(args) -> int:
    net = _load_model(args.model)
    instances = _load_instances(args.input)
    if not 0 <= args.index < len(instances):
        raise CliError(f"--index {args.index} out of range for {len(instances)} instances")
    label, x = instances[args.index]
    cfg = _verifier_config(args)
    start = time.perf_counter()
    outcome = verify_at(net, x, args.eps, cfg)
    elapsed_ms = 1000.0 * (time.perf_counter() - start)

    margins = {str(k): v for k, v in sorted(outcome.margins.items())}
    row = {
        "index": args.index,
        "label": label,
        "predicted": predict(net, x),
        "eps": args.eps,
        "status": outcome.status,
        "runtime_ms": elapsed_ms,
        **{f"margin_{k}": v for k, v in margins.items()},
    }
    if outcome.counterexample is not None:
        row["counterexample"] = list(outcome.counterexample)
    report = _report(
        "verify",
        _config_echo(args, ("model", "input", "index", "eps", "strategy", "samples", "step", "seed")),
        [row],
        {"status": outcome.status},
        args.timings,
    )
    _write_report(report, args)
    return _STATUS_EXIT[outcome.status]


def cmd_certify(args) -> int:
    net = _load_model(args.model)
    instances = _load_instances(args.input)
    if args.count is not None:
        instances = instances[: args.count]
    if not instances:
        raise CliError("no instances to certify")
    cfg = _verifier_config(args)
    summary = certify_dataset(net, instances, cfg, workers=_workers())

    rows = []
    for r in summary.rows:
        row = {
            "index": r.index,
            "label": r.label,
            "predicted": r.predicted,
            "misclassified": r.misclassified,
            "runtime_ms": 1000.0 * r.runtime_s,
        }
        if r.certified is not None:
            row["certified_eps"] = r.certified.epsilon
            row["iterations"] = r.certified.iterations
            row["at_cap"] = r.certified.at_cap
        rows.append(row)
    aggregates = {
        "mean_bound": summary.mean_bound,
        "median_bound": summary.median_bound,
        "count_certified": len(summary.certified_rows),
        "count_misclassified": len(summary.misclassified_rows),
        "total_runtime_ms": 1000.0 * summary.total_runtime_s,
    }
    report = _report(
        "certify",
        _config_echo(
            args, ("model", "input", "count", "strategy", "samples", "step", "seed", "eps_max", "tol")
        ),
        rows,
        aggregates,
        args.timings,
    )
    _write_report(report, args)
    return EXIT_OK


def cmd_bounds(args) -> int:
    net = _load_model(args.model)
    instances = _load_instances(args.input)
    if not 0 <= args.index < len(instances):
        raise CliError(f"--index {args.index} out of range for {len(instances)} instances")
    _, x = instances[args.index]
    cfg = _verifier_config(args)
    region = InputRegion(center=np.asarray(x), radius=args.eps, clamp=cfg.clamp)
    from .verifier import _under_bounds  # same construction the verifier uses

    under = _under_bounds(net, region, cfg)
    lb = propagate(net, region, under, "single" if args.strategy == "single" else "dual")

    rows = []
    for i in range(lb.num_layers):
        for r in range(lb.l_over[i].shape[0]):
            row = {
                "layer": i,
                "neuron": r,
                "l_over": float(lb.l_over[i][r]),
                "u_over": float(lb.u_over[i][r]),
            }
            if args.strategy != "single":
                row["l_under"] = float(lb.l_under[i][r])
                row["u_under"] = float(lb.u_under[i][r])
            rows.append(row)
    report = _report(
        "bounds",
        _config_echo(args, ("model", "input", "index", "eps", "strategy", "samples", "step", "seed")),
        rows,
        {"num_hidden_layers": lb.num_layers},
        args.timings,
    )
    _write_report(report, args)
    return EXIT_OK


def cmd_compare(args) -> int:
    net = _load_model(args.model)
    instances = _load_instances(args.input)
    if args.count is not None:
        instances = instances[: args.count]
    if not instances:
        raise CliError("no instances to compare on")
    strategies = [s.strip() for s in args.strategies.split(",") if s.strip()]
    if not strategies:
        raise CliError("need at least one strategy")

    results = {}
    for strategy in strategies:
        run_args = argparse.Namespace(**vars(args))
        run_args.strategy = strategy
        cfg = _verifier_config(run_args)
        results[strategy] = certify_dataset(net, instances, cfg, workers=_workers())

    baseline = results.get("single")
    rows = []
    for strategy in strategies:
        summary = results[strategy]
        runtimes = [1000.0 * r.runtime_s for r in summary.certified_rows]
        row = {
            "strategy": strategy,
            "mean_bound": summary.mean_bound,
            "mean_runtime_ms": float(np.mean(runtimes)) if runtimes else None,
            "runtime_half_range_ms": (
                0.5 * (max(runtimes) - min(runtimes)) if runtimes else None
            ),
        }
        if baseline is not None and baseline.mean_bound:
            row["improvement_pct"] = round(
                (summary.mean_bound / baseline.mean_bound - 1.0) * 100.0, 2
            )
        rows.append(row)
    if not args.timings:
        for row in rows:
            row.pop("mean_runtime_ms", None)
            row.pop("runtime_half_range_ms", None)
    report = _report(
        "compare",
        _config_echo(
            args, ("model", "input", "count", "strategies", "samples", "step", "seed", "eps_max", "tol")
        ),
        rows,
        {"instances": len(instances)},
        args.timings,
    )
    _write_report(report, args)
    return EXIT_OK


def _add_common(parser, with_eps: bool, with_strategy: bool = True):
    parser.add_argument("--model", required=True, help="dualcert-net-v1 JSON model file")
    parser.add_argument("--input", required=True, help="CSV instances: label, features...")
    if with_eps:
        parser.add_argument("--eps", type=float, required=True, help="l-inf radius")
    if with_strategy:
        parser.add_argument(
            "--strategy",
            default="dual-sample",
            choices=("dual-sample", "dual-grad", "dual-both", "single"),
        )
    parser.add_argument("--samples", type=int, default=1000, help="under-approximation samples")
    parser.add_argument("--step", type=float, default=0.45, help="gradient step as fraction of eps")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default=None, help="write the report here instead of stdout")
    parser.add_argument("--format", default="json", choices=("json", "csv", "md"))
    parser.add_argument(
        "--no-timings",
        dest="timings",
        action="store_false",
        help="omit wall-time fields so reports are byte-for-byte reproducible",
    )
    parser.set_defaults(timings=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dualcert", description=__doc__)
    parser.add_argument("--version", action="version", version=f"dualcert {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="check robustness at a fixed radius")
    _add_common(p, with_eps=True)
    p.add_argument("--index", type=int, default=0, help="instance row to verify")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("certify", help="search the largest certified radius per instance")
    _add_common(p, with_eps=False)
    p.add_argument("--count", type=int, default=None, help="use only the first N instances")
    p.add_argument("--eps-max", dest="eps_max", type=float, default=1.0)
    p.add_argument("--tol", type=float, default=1e-4, help="relative radius search tolerance")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("bounds", help="dump per-neuron pre-activation intervals")
    _add_common(p, with_eps=True)
    p.add_argument("--index", type=int, default=0)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("compare", help="side-by-side strategy comparison")
    _add_common(p, with_eps=False, with_strategy=False)
    p.add_argument(
        "--strategies",
        default="single,dual-sample",
        help="comma-separated strategy list; improvement is against 'single'",
    )
    p.add_argument("--count", type=int, default=None)
    p.add_argument("--eps-max", dest="eps_max", type=float, default=1.0)
    p.add_argument("--tol", type=float, default=1e-4)
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
