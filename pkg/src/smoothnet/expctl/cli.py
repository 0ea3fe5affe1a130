"""``smoothnet`` command line entry point.

Exit codes: 0 success, 2 config error, 3 smoothing retry cap exhausted,
4 invariant violation (or a failed lemma check) in the results.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from ..smoothing import RetryExhausted
from .experiment import (
    KINDS,
    ConfigError,
    ExperimentSpec,
    InvariantViolation,
    read_csv,
    run_experiment,
    smoothed_samples,
    write_csv,
)
from .stats import summarize

EXIT_OK, EXIT_CONFIG, EXIT_RETRY, EXIT_INVARIANT = 0, 2, 3, 4

TOLERANCE_NOTE = (
    "Note: acceptance windows for slopes and ratios are engineering choices made at "
    "desk scale; the underlying bounds are asymptotic with unspecified constants."
)


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="smoothnet", description="Smoothed dynamic-network experiments.")
    sub = p.add_subparsers(dest="command", required=True)
    for kind in KINDS:
        s = sub.add_parser(kind, help=f"run a {kind} campaign")
        s.add_argument("--config", required=True, help="JSON experiment spec")
        s.add_argument("--seed", type=int, help="root seed (overrides the config)")
        s.add_argument("--out", help="CSV output path (default: config 'output', else stdout)")
        s.add_argument("--workers", type=int, default=1, help="worker processes")
    r = sub.add_parser("report", help="summarize a results CSV as a markdown table")
    r.add_argument("--input", required=True, help="CSV written by a campaign")
    r.add_argument("--out", help="write the table here instead of stdout")
    r.add_argument("--by", default="experiment,generator,metric_name,n,k", help="comma-separated group keys")
    return p


def render_summary(rows, keys: Sequence[str]) -> str:
    table = summarize(rows, keys)
    cols = list(keys) + ["count", "median", "mean", "q10", "q90", "censored_fraction"]
    lines = ["| " + " | ".join(cols) + " |", "|" + "---|" * len(cols)]
    for rec in table:
        cells = [f"{rec[c]:.6g}" if isinstance(rec[c], float) else str(rec[c]) for c in cols]
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines + ["", TOLERANCE_NOTE]) + "\n"


def _report(args) -> int:
    try:
        rows = read_csv(args.input)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text = render_summary(rows, [k.strip() for k in args.by.split(",") if k.strip()])
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _write_dump(spec: ExperimentSpec) -> None:
    with open(spec.dump, "w") as fh:
        for n in spec.n_values:
            for k in spec.k_values:
                for t, seed, _, g in smoothed_samples(spec, n, k, range(spec.trials)):
                    fh.write(f"# n={n} k={k} trial={t} seed={seed}\n")
                    fh.write(g.to_text())


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "report":
        return _report(args)
    try:
        with open(args.config) as fh:
            spec = ExperimentSpec.from_json(fh.read(), kind=args.command, seed=args.seed)
        if args.workers < 1:
            raise ConfigError("--workers must be >= 1")
        rows = run_experiment(spec, workers=args.workers)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RetryExhausted as exc:
        where = getattr(exc, "context", {})
        print(f"retry cap exhausted ({where}): {exc}", file=sys.stderr)
        return EXIT_RETRY
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT

    out_path = args.out or spec.output
    if out_path:
        with open(out_path, "w", newline="") as fh:
            write_csv(rows, fh)
    else:
        write_csv(rows, sys.stdout)
    if spec.kind == "sample-smooth" and spec.dump:
        _write_dump(spec)
    if spec.kind == "verify-lemmas":
        failed = [r for r in rows if r.metric_name.endswith(":pass") and not r.metric_value]
        for r in failed:
            print(f"lemma check failed: {r.generator} (n={r.n}, k={r.k})", file=sys.stderr)
        if failed:
            return EXIT_INVARIANT
    if out_path:
        print(render_summary(rows, ("generator", "metric_name", "n", "k")), file=sys.stderr)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
