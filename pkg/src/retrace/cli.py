"""Command line driver for the reconstruction pipeline.

Subcommands mirror the stages (`extract`, `map`, `infer`, `correlate`,
`timeline`) plus `run` for the whole chain.  Exit codes: 0 success, 1 usage
error, 2 unreadable or tampered input, 3 violated domain constraint.
"""
from __future__ import annotations

import argparse
import os
import sys
from typing import Optional

from . import pipeline
from .config import RunConfig, load_config
from .errors import InputError, IntegrityError, RetraceError, ValidationError
from .timeline import RenderFormat

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_VALIDATION = 3


class _Parser(argparse.ArgumentParser):
    """argparse by default exits 2 on usage errors; this driver reserves 2
    for input problems, so usage errors are remapped to 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="retrace",
        description="Reconstruct and analyse an incident timeline from digital footprints.",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def stage_parser(name: str, help_text: str, kb_input: bool) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="case configuration document (TOML)")
        p.add_argument("--out", help="output directory (defaults to the configured one)")
        if kb_input:
            p.add_argument(
                "--kb",
                help="input stage file (defaults to the previous stage's file in the output directory)",
            )
        return p

    extract_p = stage_parser("extract", "parse footprint sources", kb_input=False)
    extract_p.add_argument(
        "--sources", nargs="+", help="narrow extraction to these configured source paths"
    )
    stage_parser("map", "map footprints to entities", kb_input=True)
    stage_parser("infer", "run inference rules to fixpoint", kb_input=True)
    stage_parser("correlate", "score and rank event pairs", kb_input=True)
    timeline_p = stage_parser("timeline", "render the annotated timeline", kb_input=True)
    run_p = stage_parser("run", "run the whole pipeline", kb_input=False)
    for p in (timeline_p, run_p):
        p.add_argument(
            "--format",
            action="append",
            choices=[f.value for f in RenderFormat],
            help="timeline output format (repeatable; defaults to the configured formats)",
        )
    return parser


_DEFAULT_INPUTS = {
    "map": pipeline.FOOTPRINTS_FILE,
    "infer": pipeline.MAPPED_FILE,
    "correlate": pipeline.INFERRED_FILE,
    "timeline": pipeline.CORRELATED_FILE,
}


def _formats(args) -> Optional[tuple[RenderFormat, ...]]:
    names = getattr(args, "format", None)
    if not names:
        return None
    return tuple(RenderFormat(name) for name in names)


def _dispatch(args) -> list[str]:
    config: RunConfig = load_config(args.config)
    out_dir = args.out or config.output_dir
    if args.command == "extract":
        if args.sources:
            config = config.with_sources(args.sources)
        return pipeline.stage_extract(config, out_dir)
    if args.command == "run":
        return pipeline.run_all(config, out_dir, _formats(args))
    kb_path = args.kb or os.path.join(out_dir, _DEFAULT_INPUTS[args.command])
    if args.command == "map":
        return pipeline.stage_map(config, kb_path, out_dir)
    if args.command == "infer":
        return pipeline.stage_infer(config, kb_path, out_dir)
    if args.command == "correlate":
        return pipeline.stage_correlate(config, kb_path, out_dir)
    if args.command == "timeline":
        return pipeline.stage_timeline(config, kb_path, out_dir, _formats(args))
    raise InputError(f"unknown command {args.command!r}")


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        if code is None:
            return EXIT_OK
        return code if isinstance(code, int) else EXIT_USAGE
    try:
        written = _dispatch(args)
    except IntegrityError as exc:
        print(f"integrity error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except RetraceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
