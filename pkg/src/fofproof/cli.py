"""Command line front end.

Exit codes: 0 success, 1 a proof (or model check) failed, 2 bad input.
Machine-readable lines go to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import os
import sys
import threading

from . import analysis, dijkstra
from .errors import WorkbenchError
from .model_eval import PartialModel, check_axioms
from .provers import BuiltinBackend, ExternalBackend, load_backend_configs
from .script_engine import apply_expand_definitions_in, export_tasks, plan, run
from .tptp import parse_file, print_script

EXIT_OK, EXIT_FAILED, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    """Bad command-line input that argparse cannot catch by itself."""


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from None


def _write_out(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from None


def _load_script(args):
    if not os.path.exists(args.script):
        raise InputError(f"{args.script}: no such file")
    return parse_file(args.script, include_base=getattr(args, "include_dir", None))


def _backend(args):
    if args.backend_config is None:
        if args.backend != "builtin":
            raise InputError(f"backend {args.backend!r} needs --backend-config")
        return BuiltinBackend(max_clauses=args.max_clauses)
    configs = load_backend_configs(_read(args.backend_config))
    if not configs:
        raise InputError(f"{args.backend_config}: no backend entries")
    if args.backend == "builtin" and all(c.name != "builtin" for c in configs):
        return ExternalBackend(configs[0])
    for cfg in configs:
        if cfg.name == args.backend:
            return ExternalBackend(cfg)
    if args.backend == "builtin":
        return BuiltinBackend(max_clauses=args.max_clauses)
    raise InputError(f"backend {args.backend!r} not found in {args.backend_config}")


# Subcommands ---------------------------------------------------------------------------


def cmd_check(args) -> int:
    the_plan = plan(_load_script(args), start_from=args.from_lemma)
    backend = _backend(args)
    lock = threading.Lock()

    def stream(task_id, verdict):
        with lock:
            print(f"{task_id}\t{verdict.status}\t{verdict.wall_seconds:.3f}", flush=True)
            if verdict.note and verdict.status.value != "Proved":
                print(f"{task_id}: {verdict.note}", file=sys.stderr, flush=True)

    report = run(the_plan, backend, timeout=args.timeout, parallel=args.parallel,
                 stop_on_failure=args.stop_on_failure, on_result=stream)
    print()
    print(report.table())
    for name in report.skipped:
        print(f"skipped: {name}", file=sys.stderr)
    return EXIT_OK if report.success else EXIT_FAILED


def cmd_plan(args) -> int:
    the_plan = plan(_load_script(args), start_from=args.from_lemma)
    for t in the_plan.tasks:
        print(f"{t.id}\t{','.join(t.depends)}\t{','.join(p.name for p in t.premises)}")
    for name in the_plan.skipped:
        print(f"skipped: {name}", file=sys.stderr)
    return EXIT_OK


def cmd_export(args) -> int:
    the_plan = plan(_load_script(args), start_from=args.from_lemma)
    try:
        manifest = export_tasks(the_plan, args.out_dir)
    except WorkbenchError as exc:
        raise InputError(str(exc)) from None
    for task_id, filename, _ in manifest:
        print(f"{task_id}\t{os.path.join(args.out_dir, filename)}")
    return EXIT_OK


def _derivations(paths) -> dict[str, analysis.DerivationGraph]:
    out = {}
    for path in paths:
        name = os.path.splitext(os.path.basename(path))[0]
        out[name] = analysis.parse_derivation(_read(path), path=path)
    return out


def cmd_viz(args) -> int:
    graphs = _derivations(args.derivations)
    if args.mode == "detail":
        if len(graphs) != 1:
            raise InputError("detail mode takes exactly one derivation file")
        text = analysis.to_dot(next(iter(graphs.values())), "detail")
    else:
        text = analysis.to_dot(graphs, "overview")
    _write_out(text, args.output)
    return EXIT_OK


def cmd_unused(args) -> int:
    the_plan = plan(_load_script(args))
    report = analysis.unused_lemmas(the_plan, _derivations(args.derivations))
    if report.no_evidence:
        print("no evidence: no derivations supplied", file=sys.stderr)
    for name in report.lemmas:
        print(f"lemma\t{name}")
    for name in report.axioms:
        print(f"axiom\t{name}")
    return EXIT_OK


def cmd_expand(args) -> int:
    script = apply_expand_definitions_in(_load_script(args), args.defs or None)
    _write_out(print_script(script), args.output)
    return EXIT_OK


def cmd_gen_spec(args) -> int:
    _write_out(dijkstra.spec_text(args.agents), args.output)
    return EXIT_OK


def cmd_gen_run(args) -> int:
    if args.schedule is None:
        schedule = [(m % args.agents) + 1 for m in range(args.moments)]
    else:
        schedule = dijkstra.parse_schedule(args.schedule)
    model = dijkstra.generate_run(args.agents, args.moments, schedule,
                                  with_definitions=args.definitions)
    _write_out(model.dumps(), args.output)
    return EXIT_OK


def cmd_eval(args) -> int:
    script = parse_file(args.spec)
    model = PartialModel.loads(_read(args.model))
    report = check_axioms(script, model)
    print(report.render())
    return EXIT_OK if report.validates else EXIT_FAILED


# Parser --------------------------------------------------------------------------------


def _add_backend_flags(p) -> None:
    p.add_argument("--backend", default="builtin", help="backend name (default: builtin)")
    p.add_argument("--backend-config", help="tab-separated backend definitions")
    p.add_argument("--timeout", type=float, default=10.0, help="seconds per task (default: 10)")
    p.add_argument("--parallel", type=int, default=1, help="concurrent tasks (default: 1)")
    p.add_argument("--stop-on-failure", action="store_true", help="stop launching tasks after a failure")
    p.add_argument("--max-clauses", type=int, default=20000, help="built-in prover clause budget")


def _add_script(p, from_flag: bool = True) -> None:
    p.add_argument("script", help="proof script (TPTP with tpi instructions)")
    p.add_argument("--include-dir", help="base directory for include() (default: the script's)")
    if from_flag:
        p.add_argument("--from", dest="from_lemma", metavar="LEMMA",
                       help="assume every lemma before LEMMA valid")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fofproof", description="Lemma-by-lemma proof workbench for TPTP FOF.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="prove every lemma of a script")
    _add_script(p)
    _add_backend_flags(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("plan", help="list the prover tasks of a script")
    _add_script(p)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("export", help="write one TPTP problem per task plus a manifest")
    _add_script(p)
    p.add_argument("out_dir")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("viz", help="DOT graph of derivations")
    p.add_argument("derivations", nargs="+", help="TSTP derivation files (file stem = task id)")
    p.add_argument("--mode", choices=("detail", "overview"), default="detail")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_viz)

    p = sub.add_parser("unused", help="report lemmas no derivation used")
    _add_script(p, from_flag=False)
    p.add_argument("derivations", nargs="*", help="TSTP derivation files")
    p.set_defaults(func=cmd_unused)

    p = sub.add_parser("expand", help="print the script with definitions expanded")
    _add_script(p, from_flag=False)
    p.add_argument("--def", dest="defs", action="append", metavar="NAME",
                   help="expand this checked definition everywhere (repeatable)")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser("gen-spec", help="generate the Dijkstra mutual-exclusion specification")
    p.add_argument("-n", "--agents", type=int, default=2)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen_spec)

    p = sub.add_parser("gen-run", help="simulate a run of the protocol as a model")
    p.add_argument("-n", "--agents", type=int, default=2)
    p.add_argument("-k", "--moments", type=int, default=12)
    p.add_argument("--schedule", help="comma-separated agent indices, one per moment (default: round robin)")
    p.add_argument("--no-definitions", dest="definitions", action="store_false",
                   help="leave the defined predicates uninterpreted")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen_run)

    p = sub.add_parser("eval", help="check a specification's axioms on a model")
    p.add_argument("--spec", required=True)
    p.add_argument("--model", required=True)
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (WorkbenchError, InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
