"""Command line front door.

Exit codes: 0 success (including tick-budget exhaustion), 1 diagnostics
present, 2 usage error, 3 runtime fault. Diagnostics go to stderr,
artifacts to stdout or the file named by a flag.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from kitrobot.catalog import Catalog, CatalogError, load_catalog
from kitrobot.codegen import GraphValidationError, compile_graph
from kitrobot.diagnostics import Diagnostic
from kitrobot.graph import KrtError, load_krt
from kitrobot.lll.lexer import ParseError
from kitrobot.lll.parser import parse
from kitrobot.lll.printer import print_canonical
from kitrobot.lll.typecheck import typecheck
from kitrobot.scenario import ScenarioCheckError, ScenarioError, ScenarioRunner
from kitrobot.trace import to_jsonl
from kitrobot.world import WorldSpecError, world_from_spec

EXIT_OK = 0
EXIT_DIAGNOSTICS = 1
EXIT_USAGE = 2
EXIT_FAULT = 3


def _use_color() -> bool:
    return sys.stderr.isatty() and not os.environ.get("KITROBOT_NO_COLOR")


def _error_line(text: str) -> str:
    if _use_color():
        return text.replace("error", "\x1b[31merror\x1b[0m", 1)
    return text


def _print_diags(diags: list[Diagnostic], source_name: str) -> None:
    for d in diags:
        print(_error_line(d.render(source_name)), file=sys.stderr)


def _fail(message: str, code: int) -> int:
    print(_error_line(f"error: {message}"), file=sys.stderr)
    return code


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _load_cli_catalog(robot_path: str, constructors_path: str | None) -> Catalog:
    constructors = _read(constructors_path) if constructors_path else None
    return load_catalog(constructors, _read(robot_path), constructors_path, robot_path)


def _write_artifact(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _cmd_compile(args) -> int:
    try:
        catalog = _load_cli_catalog(args.catalog, args.constructors)
        graph = load_krt(_read(args.file))
    except (CatalogError, KrtError, OSError) as exc:
        return _fail(str(exc), EXIT_DIAGNOSTICS)
    try:
        code = compile_graph(graph, catalog)
    except GraphValidationError as exc:
        _print_diags(exc.diagnostics, args.file)
        return EXIT_DIAGNOSTICS
    _write_artifact(code + "\n", args.output)
    return EXIT_OK


def _cmd_check(args) -> int:
    try:
        catalog = _load_cli_catalog(args.catalog, None)
        text = _read(args.file)
    except (CatalogError, OSError) as exc:
        return _fail(str(exc), EXIT_DIAGNOSTICS)
    try:
        program = parse(text, args.file)
    except ParseError as exc:
        print(_error_line(f"{args.file}:{exc.line}:{exc.column}: error: {exc.bare_message}"), file=sys.stderr)
        return EXIT_DIAGNOSTICS
    diags = typecheck(program, catalog)
    if diags:
        _print_diags(diags, args.file)
        return EXIT_DIAGNOSTICS
    return EXIT_OK


def _cmd_fmt(args) -> int:
    try:
        text = _read(args.file)
        program = parse(text, args.file)
    except ParseError as exc:
        print(_error_line(f"{args.file}:{exc.line}:{exc.column}: error: {exc.bare_message}"), file=sys.stderr)
        return EXIT_DIAGNOSTICS
    except OSError as exc:
        return _fail(str(exc), EXIT_DIAGNOSTICS)
    sys.stdout.write(print_canonical(program) + "\n")
    return EXIT_OK


def _resolve_catalogs(world, world_path: str, agents: list[str]) -> dict[str, Catalog]:
    """Resolve each agent's robot-objects catalog through the world's binds."""
    base = Path(world_path).parent
    catalogs: dict[str, Catalog] = {}
    cache: dict[str, Catalog] = {}
    for agent in agents:
        bound = world.bindings.get(agent)
        if bound is None:
            raise ScenarioError(f"world has no catalog bind for agent: {agent}")
        path = str(base / bound)
        if path not in cache:
            cache[path] = load_catalog(None, _read(path), None, path)
        catalogs[agent] = cache[path]
    return catalogs


def _run_scenario(world, programs, catalogs, max_ticks, trace_out, source_names) -> int:
    try:
        runner = ScenarioRunner(world, programs, catalogs, max_ticks, source_names=source_names)
    except ScenarioCheckError as exc:
        for agent, diags in exc.by_agent.items():
            _print_diags(diags, source_names.get(agent, agent))
        return EXIT_DIAGNOSTICS
    except ScenarioError as exc:
        return _fail(str(exc), EXIT_USAGE)
    runner.run()
    _write_artifact(to_jsonl(runner.trace), trace_out)
    return EXIT_FAULT if runner.failed else EXIT_OK


def _cmd_run(args) -> int:
    try:
        catalog = _load_cli_catalog(args.catalog, None)
        world = world_from_spec(_read(args.world))
        text = _read(args.file)
    except (CatalogError, WorldSpecError, OSError) as exc:
        return _fail(str(exc), EXIT_DIAGNOSTICS)
    return _run_scenario(
        world,
        {args.agent: text},
        {args.agent: catalog},
        args.max_ticks,
        args.trace,
        {args.agent: args.file},
    )


def _cmd_scenario(args) -> int:
    programs: dict[str, str] = {}
    source_names: dict[str, str] = {}
    for spec in args.program:
        agent, sep, path = spec.partition("=")
        if not sep or not agent or not path:
            return _fail(f"--program expects <agent>=<file.lll>, got {spec!r}", EXIT_USAGE)
        if agent in programs:
            return _fail(f"agent given twice: {agent}", EXIT_USAGE)
        try:
            programs[agent] = _read(path)
        except OSError as exc:
            return _fail(str(exc), EXIT_DIAGNOSTICS)
        source_names[agent] = path
    try:
        world = world_from_spec(_read(args.world))
        catalogs = _resolve_catalogs(world, args.world, list(programs))
    except (WorldSpecError, CatalogError, OSError) as exc:
        return _fail(str(exc), EXIT_DIAGNOSTICS)
    except ScenarioError as exc:
        return _fail(str(exc), EXIT_USAGE)
    return _run_scenario(world, programs, catalogs, args.max_ticks, args.trace, source_names)


def _cmd_serve(args) -> int:
    import uvicorn

    from kitrobot.service import create_app

    app = create_app(
        constructors_path=args.constructors,
        robot_path=args.catalog,
        world_path=args.world,
        allow_origin=args.allow_origin,
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kitrobot", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", help="compile a .krt graph to low-level code")
    p.add_argument("file")
    p.add_argument("--catalog", required=True, help="robot objects XML")
    p.add_argument("--constructors", help="constructors XML (validated if given)")
    p.add_argument("-o", "--output")
    p.set_defaults(func=_cmd_compile)

    p = sub.add_parser("check", help="parse and typecheck a .lll program")
    p.add_argument("file")
    p.add_argument("--catalog", required=True)
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("fmt", help="print a .lll program in canonical form")
    p.add_argument("file")
    p.set_defaults(func=_cmd_fmt)

    p = sub.add_parser("run", help="run one agent's program in a world")
    p.add_argument("file")
    p.add_argument("--catalog", required=True)
    p.add_argument("--world", required=True)
    p.add_argument("--agent", required=True)
    p.add_argument("--max-ticks", type=int, required=True)
    p.add_argument("--trace", help="write the JSON-Lines trace here instead of stdout")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("scenario", help="run several agents' programs in one world")
    p.add_argument("--world", required=True)
    p.add_argument("--program", action="append", required=True, metavar="AGENT=FILE")
    p.add_argument("--max-ticks", type=int, required=True)
    p.add_argument("--trace")
    p.set_defaults(func=_cmd_scenario)

    p = sub.add_parser("serve", help="serve the editor HTTP API")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--catalog", required=True)
    p.add_argument("--constructors", required=True)
    p.add_argument("--world", required=True)
    p.add_argument("--allow-origin")
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    if getattr(args, "max_ticks", 1) <= 0:
        return _fail("--max-ticks must be positive", EXIT_USAGE)
    return args.func(args)


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
