"""Command line interface: ``homsec check``, ``homsec gallery list`` and ``homsec gallery run``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__, gallery
from .checks import report_text, run_checks
from .document import InputError, dumps, load, load_document

EXIT_PASS, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="homsec", description="Verify Lie algebroid and momentum section identities on sampled points.")
    p.add_argument("--version", action="version", version=f"homsec {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="run the checks listed in a model document")
    c.add_argument("--model", required=True, help="path to a JSON model document")
    c.add_argument("--tol", type=float, default=None, help="tolerance (default: document value or 1e-9)")
    c.add_argument("--points", type=int, default=None, help="number of sample points (default: document value or 32)")
    c.add_argument("--seed", type=int, default=None, help="sampling seed (default: document value or 42)")
    c.add_argument("--format", choices=("json", "text"), default="json")

    g = sub.add_parser("gallery", help="built-in worked instances")
    gs = g.add_subparsers(dest="gallery_command", required=True)
    gs.add_parser("list", help="list instance names")
    r = gs.add_parser("run", help="run an instance's checks")
    r.add_argument("name")
    r.add_argument("--export", metavar="FILE", help="also write the instance as a model document")
    r.add_argument("--format", choices=("json", "text"), default="json")
    return p


def _emit(report: dict, fmt: str) -> int:
    sys.stdout.write(dumps(report) if fmt == "json" else report_text(report))
    return EXIT_PASS if report["passed"] else EXIT_FAIL


def _check(args) -> int:
    if args.tol is not None and not args.tol > 0:
        raise InputError("--tol must be positive")
    if args.points is not None and args.points < 1:
        raise InputError("--points must be at least 1")
    if args.seed is not None and args.seed < 0:
        raise InputError("--seed must be non-negative")
    doc = load(args.model)
    return _emit(run_checks(doc, args.tol, args.points, args.seed), args.format)


def _gallery(args) -> int:
    if args.gallery_command == "list":
        for name in gallery.names():
            sys.stdout.write(f"{name:30s} {gallery.get(name).description}\n")
        return EXIT_PASS
    try:
        entry = gallery.get(args.name)
    except KeyError as e:
        raise InputError(str(e.args[0])) from e
    raw = entry.document()
    if args.export:
        Path(args.export).write_text(dumps(raw), encoding="utf-8")
    return _emit(run_checks(load_document(raw)), args.format)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "check":
            return _check(args)
        return _gallery(args)
    except InputError as e:
        sys.stderr.write(f"input error: {e}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
