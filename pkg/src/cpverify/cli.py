"""Command-line driver: ``cpverify verify``, ``cpverify run`` and ``cpverify corpus``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import programs
from .executor import ExploreOptions, ResourceError, explore
from .interp import StepLimitExceeded, concrete_interpret
from .parser import FrontendError, bound_names, parse_file, substitute_params
from .report import EXIT_RESOURCE, EXIT_USAGE, dumps, exit_code, to_document, to_text
from .solver import BudgetExceeded


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _binding(text: str):
    name, sep, value = text.partition("=")
    if not sep or not name.isidentifier():
        raise argparse.ArgumentTypeError(f"expected NAME=INT, got {text!r}")
    try:
        return name, int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected NAME=INT, got {text!r}") from None


def _input(text: str):
    name, sep, value = text.partition("=")
    if not sep or not name.isidentifier():
        raise argparse.ArgumentTypeError(f"expected NAME=INT or NAME=INT,INT,..., got {text!r}")
    try:
        if value.startswith("["):
            value = value.strip("[]")
            return name, [int(v) for v in value.split(",") if v.strip()]
        if "," in value:
            return name, [int(v) for v in value.split(",")]
        return name, int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad value in {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="cpverify", description="Bounded verification of .cpv programs.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("file", help="a .cpv source file, or the name of a corpus program")
        p.add_argument("--param", action="append", type=_binding, default=[],
                       metavar="NAME=INT", help="bind a symbolic bound such as N")
        p.add_argument("--bits", type=int, default=8, help="integer width k (default 8)")
        p.add_argument("--check-overflow", action="store_true",
                       help="report arithmetic that may leave the k-bit range")
        p.add_argument("--contracts", metavar="DIR",
                       help="directory whose .cpv functions supply callee contracts")

    v = sub.add_parser("verify", help="verify a program against its contract")
    common(v)
    v.add_argument("--max-depth", type=int, default=10_000,
                   help="decisions allowed on one path (default 10000)")
    v.add_argument("--node-budget", type=int, default=10 ** 7,
                   help="search nodes per solver call (default 10^7)")
    v.add_argument("--json", metavar="OUT", help="write a JSON report to OUT ('-' for stdout)")
    v.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")
    v.add_argument("--timing", action="store_true", help="include wall time in the report")
    v.add_argument("--exhaustive", action="store_true",
                   help="keep exploring after the first violation")
    v.add_argument("--midpath", choices=("complete", "cheap"), default="complete",
                   help="solver used for branch feasibility (default complete)")

    r = sub.add_parser("run", help="execute a program on concrete inputs")
    common(r)
    r.add_argument("--input", action="append", type=_input, default=[],
                   metavar="NAME=VALUE", help="an input value; arrays as 1,2,3")

    sub.add_parser("corpus", help="list the bundled benchmark programs")
    return ap


def _resolve(path: str) -> Path:
    p = Path(path)
    if p.exists():
        return p
    name = p.stem if p.suffix == ".cpv" else p.name
    if p.parent == Path(".") and name in programs.CORPUS:
        return programs.corpus_path(name)
    raise UsageError(f"no such file: {path}")


def _contracts(directory):
    if directory is None:
        return ()
    d = Path(directory)
    if not d.is_dir():
        raise UsageError(f"not a directory: {directory}")
    return tuple(parse_file(f).contract() for f in sorted(d.glob("*.cpv")))


def _callees(directory) -> dict:
    if directory is None:
        return {}
    return {f.stem: parse_file(f) for f in sorted(Path(directory).glob("*.cpv"))}


def _load(args):
    if not 2 <= args.bits <= 31:
        raise UsageError(f"--bits must be in [2, 31], got {args.bits}")
    path = _resolve(args.file)
    ast = parse_file(path, _contracts(args.contracts))
    params = dict(args.param)
    needed = set(bound_names(ast))
    missing = sorted(needed - params.keys())
    if missing:
        raise UsageError(f"unbound symbolic bounds: {', '.join(missing)} (use --param)")
    unknown = sorted(params.keys() - needed)
    if unknown:
        raise UsageError(f"unknown parameters: {', '.join(unknown)}")
    return path, substitute_params(ast, params), params


def _verify(args) -> int:
    path, ast, params = _load(args)
    opts = ExploreOptions(bits=args.bits, check_overflow=args.check_overflow,
                          max_depth=args.max_depth, node_budget=args.node_budget,
                          midpath=args.midpath, jobs=args.jobs, exhaustive=args.exhaustive)
    report = explore(ast, opts)
    if args.json:
        options = {"bits": args.bits, "check_overflow": args.check_overflow,
                   "max_depth": args.max_depth, "node_budget": args.node_budget,
                   "midpath": args.midpath, "exhaustive": args.exhaustive}
        text = dumps(to_document(report, params, options, args.timing))
        if args.json == "-":
            sys.stdout.write(text)
        else:
            Path(args.json).write_text(text, encoding="utf-8")
    if args.json != "-":
        sys.stdout.write(to_text(report, args.timing))
    return exit_code(report)


def _run(args) -> int:
    path, ast, _ = _load(args)
    callees = _callees(args.contracts)
    if not callees and path.parent == programs.corpus_dir():
        callees = programs.callees(path.stem) if path.stem in programs.CORPUS else {}
    r = concrete_interpret(ast, dict(args.input), bits=args.bits,
                           check_overflow=args.check_overflow, callees=callees)
    print(f"status: {r.status}")
    if r.value is not None:
        print(f"result: {r.value}")
    print("trace: <" + ",".join(r.trace) + ">")
    if r.message:
        print(r.message)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "corpus":
            for name, (calls, rebuilt) in programs.CORPUS.items():
                note = " (reconstructed)" if rebuilt else ""
                print(f"{name}{note}: {programs.corpus_path(name)}")
            return 0
        if args.command == "run":
            return _run(args)
        return _verify(args)
    except (UsageError, FrontendError, ValueError, OSError) as exc:
        print(f"cpverify: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceError as exc:
        print(f"cpverify: resource limit: {exc}", file=sys.stderr)
        print("  path: <" + ",".join(exc.trace) + ">", file=sys.stderr)
        return EXIT_RESOURCE
    except (BudgetExceeded, StepLimitExceeded) as exc:
        print(f"cpverify: resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(main())
