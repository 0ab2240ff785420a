"""Command line pipeline: synth -> ingest -> extract -> export / serve."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .export import flow_view_bytes, sequence_view_bytes, task_view_bytes
from .extraction import (
    analyze_task,
    load_analysis,
    load_task_definition,
    save_analysis,
)
from .ingest import LogBundle, anonymize, ingest_bundle, load_store, save_store
from .sequence_view import (
    DEFAULT_DISPLAY_REGION,
    DEFAULT_LONG_GLANCE_MS,
    DEFAULT_PAD_MS,
)
from .synth import FleetConfig, default_config, load_config, write_fleet


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 2


def _cmd_synth(args: argparse.Namespace) -> int:
    if args.config:
        try:
            config = load_config(args.config)
        except (FileNotFoundError, ValueError, KeyError) as exc:
            return _fail(f"invalid fleet config: {exc}")
    else:
        config = default_config()
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.sessions is not None:
        overrides["n_sessions"] = args.sessions
    if overrides:
        config = FleetConfig.from_dict({**config.to_dict(), **overrides})
    bundle = write_fleet(config, args.out)
    print(f"wrote {bundle.events_path.parent} ({config.n_sessions} sessions, seed {config.seed})")
    return 0


def _cmd_ingest(args: argparse.Namespace) -> int:
    bundle = LogBundle(
        events_path=Path(args.events),
        glances_path=Path(args.glances),
        driving_path=Path(args.driving),
    )
    try:
        store, report = ingest_bundle(bundle)
    except FileNotFoundError as exc:
        return _fail(str(exc))
    for name, result in (
        ("events", report.events),
        ("glances", report.glances),
        ("driving", report.driving),
    ):
        for issue in result.errors[:10]:
            print(f"{name}:{issue.line_no}: error: {issue.message}", file=sys.stderr)
        for issue in result.warnings[:10]:
            print(f"{name}:{issue.line_no}: warning: {issue.message}", file=sys.stderr)
    if report.error_count or report.warning_count:
        print(
            f"parsed with {report.error_count} errors, {report.warning_count} warnings",
            file=sys.stderr,
        )
    if args.anonymize:
        store = anonymize(store, args.seed)
    save_store(store, args.out)
    print(f"wrote {args.out} ({len(store.session_ids())} sessions)")
    return 0


def _cmd_extract(args: argparse.Namespace) -> int:
    try:
        store = load_store(args.store)
    except FileNotFoundError:
        return _fail(f"store not found: {args.store} (run `flowscope ingest` first)")
    except ValueError as exc:
        return _fail(str(exc))
    try:
        task = load_task_definition(args.task)
    except (FileNotFoundError, ValueError, KeyError) as exc:
        return _fail(f"invalid task definition: {exc}")
    analysis = analyze_task(store, task)
    save_analysis(analysis, args.out)
    table = analysis.flow_table
    print(
        f"wrote {args.out} ({table.total_sequences} sequences, {len(table.flows)} flows)"
    )
    return 0


def _cmd_export(args: argparse.Namespace) -> int:
    try:
        analysis = load_analysis(args.analysis)
    except (FileNotFoundError, ValueError) as exc:
        return _fail(f"cannot load analysis: {exc} (run `flowscope extract` first)")
    store = None
    if args.store:
        try:
            store = load_store(args.store)
        except (FileNotFoundError, ValueError) as exc:
            return _fail(str(exc))
    try:
        if args.view == "task":
            body = task_view_bytes(analysis, p_min=args.p_min)
        elif args.view == "flow":
            body = flow_view_bytes(
                analysis,
                store,
                metric=args.metric,
                p_min=args.p_min,
                target_ms=args.target_ms,
                display_region=args.region,
            )
        else:
            if store is None:
                return _fail("--view sequence needs --store for glance and driving data")
            if not args.id:
                return _fail("--view sequence needs --id SEQUENCE_ID")
            sequence = analysis.sequence_by_id(args.id)
            body = sequence_view_bytes(
                sequence,
                store,
                pad_ms=args.pad_ms,
                display_region=args.region,
                long_glance_threshold_ms=args.long_ms,
            )
    except (ValueError, LookupError) as exc:
        return _fail(str(exc))
    Path(args.out).write_bytes(body)
    print(f"wrote {args.out}")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    from .server import serve

    try:
        store = load_store(args.store)
    except (FileNotFoundError, ValueError) as exc:
        return _fail(str(exc))
    tasks = []
    for task_path in args.task:
        try:
            tasks.append(load_task_definition(task_path))
        except (FileNotFoundError, ValueError, KeyError) as exc:
            return _fail(f"invalid task definition {task_path}: {exc}")
    if not tasks:
        return _fail("at least one --task definition is required")
    try:
        serve(store, tasks, bind=args.bind, static_dir=args.static)
    except ValueError as exc:
        return _fail(str(exc))
    return 0


def _cmd_task_template(args: argparse.Namespace) -> int:
    from .synth import default_task_document

    doc = default_task_document()
    text = json.dumps(doc, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        print(text, end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flowscope",
        description="Multi-level user behavior analytics over telematics logs.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic fleet's log files")
    p.add_argument("--config", help="fleet config JSON (defaults to the built-in fleet)")
    p.add_argument("--out", required=True, help="output directory for the jsonl files")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--sessions", type=int, help="override the config session count")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("ingest", help="parse logs and build a session store")
    p.add_argument("--events", required=True)
    p.add_argument("--glances", required=True)
    p.add_argument("--driving", required=True)
    p.add_argument("--out", required=True, help="store output path (gzip JSON)")
    p.add_argument("--anonymize", action="store_true", help="rebase timestamps and re-key sessions")
    p.add_argument("--seed", type=int, default=0, help="anonymization seed")
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("extract", help="extract task sequences and flows from a store")
    p.add_argument("--store", required=True)
    p.add_argument("--task", required=True, help="task definition JSON")
    p.add_argument("--out", required=True, help="analysis output path (JSON)")
    p.set_defaults(func=_cmd_extract)

    p = sub.add_parser("export", help="write one analytical view as JSON")
    p.add_argument("--analysis", required=True, help="analysis JSON from `extract`")
    p.add_argument("--store", help="session store (needed for sequence view / glance metrics)")
    p.add_argument("--view", required=True, choices=("task", "flow", "sequence"))
    p.add_argument("--out", required=True)
    p.add_argument("--p-min", dest="p_min", type=float, default=None)
    p.add_argument("--metric", default="time_on_task")
    p.add_argument("--target-ms", dest="target_ms", type=float, default=None)
    p.add_argument("--id", help="sequence id for --view sequence")
    p.add_argument("--pad-ms", dest="pad_ms", type=int, default=DEFAULT_PAD_MS)
    p.add_argument("--region", default=DEFAULT_DISPLAY_REGION)
    p.add_argument("--long-ms", dest="long_ms", type=int, default=DEFAULT_LONG_GLANCE_MS)
    p.set_defaults(func=_cmd_export)

    p = sub.add_parser("serve", help="serve the analytics API (and UI, if built)")
    p.add_argument("--store", required=True)
    p.add_argument("--task", action="append", default=[], help="task definition JSON (repeatable)")
    p.add_argument("--bind", help="HOST:PORT (or set FLOWSCOPE_BIND)")
    p.add_argument("--static", help="directory of built explorer UI assets")
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("task-template", help="print the default task definition JSON")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_task_template)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
