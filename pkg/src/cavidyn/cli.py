"""Command-line entry point.

Subcommands: validate, run, absorption, pes-scan, spectra2d, oracle-compare.
`run` executes whatever experiment the config declares; the named experiment
subcommands override the config's experiment kind before validation.

Exit codes: 0 success, 1 runtime failure, 2 config parse error,
3 constraint violation.
"""

from __future__ import annotations

import argparse
import sys

from .config import (
    ConfigConstraintError,
    ConfigParseError,
    resolved_text,
    validate,
)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_PARSE = 2
EXIT_CONSTRAINT = 3

_FORCED_KIND = {
    "absorption": "absorption",
    "pes-scan": "pes-scan",
    "spectra2d": "spectra2d",
    "oracle-compare": "oracle-compare",
}


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="cavidyn",
        description="cavity exciton dynamics and spectra",
    )
    sub = ap.add_subparsers(dest="command", required=True)
    for name, summary in (
        ("validate", "check a config and echo the resolved values"),
        ("run", "run the experiment declared in the config"),
        ("absorption", "run a linear absorption experiment"),
        ("pes-scan", "run a potential-surface scan"),
        ("spectra2d", "run a third-order 2D spectra experiment"),
        ("oracle-compare", "compare a solver against its reference oracle"),
    ):
        p = sub.add_parser(name, help=summary)
        p.add_argument("--config", required=True, metavar="PATH")
        if name != "validate":
            p.add_argument("--out", metavar="DIR",
                           help="output directory (default: config value)")
            p.add_argument("--seed", type=int, metavar="U64",
                           help="override the run seed")
            p.add_argument("--workers", type=int, default=1, metavar="INT",
                           help="process count for ensemble realizations")
            p.add_argument("--resume", action="store_true",
                           help="reuse spectra2d checkpoints if present")
    return ap


def _load_config(args):
    with open(args.config, encoding="utf-8") as fh:
        text = fh.read()
    overrides = {}
    kind = _FORCED_KIND.get(args.command)
    if kind is not None:
        overrides.setdefault("experiment", {})["kind"] = kind
    seed = getattr(args, "seed", None)
    if seed is not None:
        overrides.setdefault("run", {})["seed"] = str(seed)
    return validate(text, overrides=overrides)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _load_config(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except ConfigParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ConfigConstraintError as exc:
        print("constraint violations:", file=sys.stderr)
        for v in exc.violations:
            print(f"  {v}", file=sys.stderr)
        return EXIT_CONSTRAINT

    if args.command == "validate":
        sys.stdout.write(resolved_text(cfg))
        return EXIT_OK

    from .runner import run

    try:
        manifest = run(cfg, out_dir=args.out, workers=args.workers,
                       resume=args.resume)
    except Exception as exc:  # noqa: BLE001 - report and signal failure
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    for name in sorted(manifest["outputs"]):
        print(name)
    print(f"manifest: run_manifest.json ({manifest['wall_clock_s']} s)")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
