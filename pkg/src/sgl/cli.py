"""Command-line entry point: load CSV data, run statements to SVG, serve HTTP.

Exit codes: 0 success, 1 statement error, 2 ingestion error, 3 service error.
"""

from __future__ import annotations

import argparse
import os
import socket
import sys

from .datasource import Database
from .diagnostics import Diagnostic, SglError
from .engine import SglEngine
from .renderer import RenderConfig, load_config

EXIT_OK = 0
EXIT_STATEMENT = 1
EXIT_INGEST = 2
EXIT_SERVICE = 3


def _print_diagnostics(source_name: str, diagnostics: list[Diagnostic]) -> None:
    for d in diagnostics:
        print(f"{source_name}:{d.line}:{d.col}: {d.code} {d.message}", file=sys.stderr)


def _open_db(args: argparse.Namespace) -> Database:
    return Database(args.db or os.environ.get("SGL_DB_PATH") or ":memory:")


def _cmd_load(args: argparse.Namespace) -> int:
    try:
        db = _open_db(args)
        schema = db.load_csv(args.file, args.table, replace=not args.no_replace)
    except FileNotFoundError:
        print(f"{args.file}: file not found", file=sys.stderr)
        return EXIT_INGEST
    except SglError as exc:
        _print_diagnostics(args.file, exc.diagnostics)
        return EXIT_INGEST
    print(f"{schema.name}: {len(schema.columns)} columns")
    return EXIT_OK


def _read_statement(args: argparse.Namespace) -> tuple[str, str]:
    if args.statement is not None:
        return args.statement, "<statement>"
    if args.input == "-":
        return sys.stdin.read(), "<stdin>"
    with open(args.input, "r", encoding="utf-8") as fh:
        return fh.read(), args.input


def _cmd_run(args: argparse.Namespace) -> int:
    try:
        text, source_name = _read_statement(args)
    except FileNotFoundError:
        print(f"{args.input}: file not found", file=sys.stderr)
        return EXIT_STATEMENT
    if not text.strip():
        print(f"{source_name}:1:1: EmptyClause statement is empty", file=sys.stderr)
        return EXIT_STATEMENT
    try:
        config = load_config(args.config) if args.config else RenderConfig()
        engine = SglEngine(db=_open_db(args), config=config)
        result = engine.run(text, seed=args.seed, parallel=args.parallel)
    except SglError as exc:
        _print_diagnostics(source_name, exc.diagnostics)
        return EXIT_STATEMENT
    _print_diagnostics(source_name, result.warnings)
    if args.output == "-":
        sys.stdout.write(result.svg)
    else:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(result.svg)
    return EXIT_OK


def _cmd_serve(args: argparse.Namespace) -> int:
    from .service import serve

    port = args.port if args.port is not None else int(os.environ.get("SGL_PORT", "8080"))
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        probe.bind((args.host, port))
    except OSError as exc:
        print(f"cannot bind {args.host}:{port}: {exc}", file=sys.stderr)
        return EXIT_SERVICE
    finally:
        probe.close()
    try:
        config = load_config(args.config) if args.config else RenderConfig()
    except SglError as exc:
        _print_diagnostics(args.config, exc.diagnostics)
        return EXIT_SERVICE
    print(f"sgl service listening on http://{args.host}:{port}")
    serve(db=_open_db(args), host=args.host, port=port, config=config, console_dir=args.console)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sgl", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    load_cmd = sub.add_parser("load", help="ingest a CSV file into a table")
    load_cmd.add_argument("--file", required=True, help="CSV path (header row required)")
    load_cmd.add_argument("--table", required=True, help="target table name")
    load_cmd.add_argument("--db", help="database file (default: env SGL_DB_PATH or in-memory)")
    load_cmd.add_argument("--no-replace", action="store_true", help="fail if the table exists")
    load_cmd.set_defaults(func=_cmd_load)

    run_cmd = sub.add_parser("run", help="execute one statement and write SVG")
    group = run_cmd.add_mutually_exclusive_group(required=True)
    group.add_argument("--statement", help="statement text")
    group.add_argument("--input", help="path to a statement file, or - for stdin")
    run_cmd.add_argument("--output", default="-", help="SVG output path, or - for stdout")
    run_cmd.add_argument("--seed", type=int, default=0, help="jitter seed (default 0)")
    run_cmd.add_argument("--db", help="database file (default: env SGL_DB_PATH or in-memory)")
    run_cmd.add_argument("--config", help="render config overrides (key=value lines)")
    run_cmd.add_argument("--parallel", action="store_true", help="render panels in parallel")
    run_cmd.set_defaults(func=_cmd_run)

    serve_cmd = sub.add_parser("serve", help="start the HTTP service")
    serve_cmd.add_argument("--port", type=int, help="port (default: env SGL_PORT or 8080)")
    serve_cmd.add_argument("--host", default="127.0.0.1")
    serve_cmd.add_argument("--db", help="database file (default: env SGL_DB_PATH or in-memory)")
    serve_cmd.add_argument("--config", help="render config overrides")
    serve_cmd.add_argument("--console", help="static console assets directory")
    serve_cmd.set_defaults(func=_cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
