"""Command line entry point ``pamlab``."""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .errors import NumericError, PamError
from .experiments.config import load_config
from .experiments.outputs import emit_outputs
from .experiments.runners import run

EXIT_OK, EXIT_ASSERT, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

COMMANDS = {
    "solve": "solve",
    "moments": "moments",
    "asymp": "almost-sure",
    "ids": "lifshitz",
    "chi": "chi-tables",
    "perc": "percolation",
    "check": "scaling-checks",
}

log = logging.getLogger("pamlab")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pamlab", description="Parabolic Anderson model experiments")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, kind in COMMANDS.items():
        p = sub.add_parser(name, help=f"run the {kind} experiment")
        p.add_argument("--config", help="INI file with an [experiment] section")
        p.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
        p.add_argument("--out", help="output directory (default: results)")
        p.add_argument("--threads", type=int, help="worker threads for independent realisations")
        p.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    kind = COMMANDS[args.command]
    try:
        cfg = load_config(args.config, kind=kind, seed=args.seed, out=args.out, threads=args.threads)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except PamError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ASSERT
    if cfg.threads > 1:
        os.environ.setdefault("OMP_NUM_THREADS", "1")
    try:
        report = run(cfg)
        files = emit_outputs(report, cfg.out)
    except NumericError as exc:
        print(f"numeric failure: {exc} {getattr(exc, 'diagnostics', {})}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"io failure: {exc}", file=sys.stderr)
        return EXIT_IO
    except PamError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ASSERT
    for a in report.assertions:
        print(f"{'PASS' if a['passed'] else 'FAIL'} {a['name']}: {a['detail']}")
    for c in report.constants:
        print(f"{c['name']} = {c['value']:.6g} [{c['source']}]")
    print(f"wrote {len(files)} files to {files[-1].parent}")
    return EXIT_OK if report.passed else EXIT_ASSERT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
