"""Command-line front end: one subcommand per pipeline stage plus store admin.

Exit codes: 0 success, 1 validation issues present, 2 usage or config error,
3 provider or transport error, 4 store error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

from .boundary import validate_candidates
from .config import LagConfig, config_path_from_env, load_config
from .errors import BudgetExceeded, ConfigError, LagError, ProviderError, StoreError
from .extraction import extract_amodal
from .ontology import load_schema
from .pipeline import Runtime, add_opinion, review_triple, run_case
from .rdf import IRI, Dataset, Graph, Quad, parse_document, parse_turtle, serialize
from .reconcile import extract_context, link_entity
from .store import list_sessions, load_session, save_session
from .views import (
    conflict_views,
    export_dataset,
    session_summary,
    tag_fields,
    triple_views,
)

EXIT_OK = 0
EXIT_ISSUES = 1
EXIT_USAGE = 2
EXIT_PROVIDER = 3
EXIT_STORE = 4

FORMATS = ("turtle", "nquads", "json")

# Error class names that mark a failed run as a provider problem (exit 3)
# rather than a validation problem (exit 1).
_PROVIDER_FAILURES = ("ProviderError", "MockMiss", "BudgetExceeded")


def _log(message: str) -> None:
    print(message, file=sys.stderr)


def _emit(text: str) -> None:
    sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _heading(text: str) -> str:
    if sys.stdout.isatty() and not os.environ.get("NO_COLOR"):
        return f"\x1b[1m{text}\x1b[0m"
    return text


def _read_text(path: str, what: str = "file") -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {what} {path}: {exc}") from None


def _load_cli_config(args: argparse.Namespace) -> LagConfig:
    return load_config(config_path_from_env(getattr(args, "config", "") or ""))


def _runtime(args: argparse.Namespace) -> Runtime:
    config = _load_cli_config(args)
    kind = getattr(args, "provider", "") or ""
    if kind and kind != config.provider.kind:
        config = dataclasses.replace(
            config, provider=dataclasses.replace(config.provider, kind=kind)
        )
    return Runtime.from_config(config)


def _render_graph(graph: Graph, fmt: str) -> str:
    if fmt == "json":
        return json.dumps([t.nt() for t in graph.sorted_triples()], indent=2)
    if fmt == "nquads":
        return serialize(Dataset(Quad(t, None) for t in graph.sorted_triples()), "nquads")
    return serialize(graph, "turtle")


def _session_report(session) -> list[str]:
    lines = [f"session: {session.id}", f"status: {session.status}"]
    for name in session.partition_names():
        lines.append(f"{name}: {len(session.partitions[name])}")
    lines.append(f"conflicts: {len(session.conflicts)}")
    lines.append(f"quarantined: {len(session.quarantine)}")
    return lines


def _emit_session(session, fmt: str) -> None:
    if fmt == "json":
        payload = session_summary(session)
        payload["conflict_entries"] = conflict_views(session)
        payload["quarantine_entries"] = list(session.quarantine)
        _emit(json.dumps(payload, indent=2, sort_keys=True))
    elif fmt in ("turtle", "nquads"):
        dataset = export_dataset(session)
        text = serialize(dataset if fmt == "nquads" else dataset.union_graph(), fmt)
        _emit(text)
    else:
        lines = _session_report(session)
        lines[0] = _heading(lines[0])
        _emit("\n".join(lines))


def _exit_for(session, fresh_quarantine: int = 0) -> int:
    if session.status.startswith("failed-at-step"):
        for entry in reversed(session.audit):
            if entry["event"] == "failure":
                if entry["detail"].get("error") in _PROVIDER_FAILURES:
                    return EXIT_PROVIDER
                return EXIT_ISSUES
        return EXIT_ISSUES
    if fresh_quarantine:
        return EXIT_ISSUES
    return EXIT_OK


def cmd_extract(args: argparse.Namespace) -> int:
    runtime = _runtime(args)
    text = _read_text(args.case, "case file")
    amodal = extract_amodal(text, runtime.lexicon, runtime.schema)
    for warning in amodal.warnings:
        _log(f"warning: {warning}")
    if args.format:
        _emit(_render_graph(amodal.graph, args.format))
    else:
        _emit(f"amodal triples: {len(amodal.graph.triples)}")
        _emit(f"text spans: {len(amodal.spans)}")
    return EXIT_OK


def cmd_extend(args: argparse.Namespace) -> int:
    runtime = _runtime(args)
    case = _read_text(args.case, "case file")
    session = run_case(case, runtime, store_root=args.store)
    _emit_session(session, args.format)
    if args.store:
        _log(f"stored under {Path(args.store) / session.id}")
    return _exit_for(session, len(session.quarantine))


def cmd_link(args: argparse.Namespace) -> int:
    runtime = _runtime(args)
    closure: set[str] = set()
    for class_iri in args.type or []:
        closure |= runtime.schema.superclasses(class_iri)
    candidates = link_entity(
        args.surface,
        sorted(closure),
        [],
        runtime.index,
        runtime.kb,
        runtime.type_map,
        runtime.config.link_weights,
        runtime.config.link_threshold,
    )
    if args.format == "json":
        payload = [
            {
                "surface": c.surface,
                "entity": c.entity,
                "score": c.score,
                "components": {
                    "label_sim": c.components[0],
                    "type_prior": c.components[1],
                    "context_overlap": c.components[2],
                },
            }
            for c in candidates
        ]
        _emit(json.dumps(payload, indent=2))
    else:
        if not candidates:
            _emit("no candidates")
        for c in candidates:
            _emit(f"{c.entity}\t{c.score:.4f}")
    return EXIT_OK


def cmd_context(args: argparse.Namespace) -> int:
    runtime = _runtime(args)
    config = runtime.config
    hops = config.hop_limit if args.hops is None else args.hops
    cap = config.cap if args.cap is None else args.cap
    slice_ = extract_context(
        runtime.kb, [IRI(s) for s in args.seed], hops, config.allowlist, cap
    )
    if args.format:
        _emit(_render_graph(slice_.graph, args.format))
    else:
        _emit(f"context triples: {len(slice_.graph.triples)}")
        _emit(f"seeds: {len(slice_.seeds)}  hops: {slice_.hop_limit}")
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    schema, warnings = load_schema(parse_turtle(_read_text(args.schema, "schema")))
    for warning in warnings:
        _log(f"warning: {warning}")
    candidate_graph = parse_document(_read_text(args.candidates, "candidates"), "ntriples")
    context = Graph()
    if args.context:
        context = parse_document(_read_text(args.context, "context"), "ntriples").union_graph()
    report = validate_candidates(
        candidate_graph.union_graph().sorted_triples(),
        schema,
        context,
        mode=args.mode,
        agent="cli",
    )
    payload = {
        "mode": report.mode,
        "accepted": [{"triple": t.nt(), **tag_fields(tag)} for t, tag in report.accepted],
        "quarantined": [
            {"triple": t.nt(), "code": issue.code, "detail": issue.detail}
            for t, issue in report.quarantined
        ],
        "warnings": list(report.warnings),
    }
    _emit(json.dumps(payload, indent=2))
    return EXIT_ISSUES if report.quarantined else EXIT_OK


def cmd_aggregate(args: argparse.Namespace) -> int:
    runtime = _runtime(args)
    session = load_session(args.store, args.session)
    before = len(session.quarantine)
    add_opinion(
        session,
        args.expert,
        _read_text(args.opinion, "opinion file"),
        runtime,
        blind=args.blind,
        store_root=args.store,
    )
    _emit_session(session, args.format)
    return _exit_for(session, len(session.quarantine) - before)


def cmd_review(args: argparse.Namespace) -> int:
    runtime = _runtime(args)
    session = load_session(args.store, args.session)
    review_triple(session, args.triple, args.verdict, runtime.schema, reviewer=args.reviewer)
    save_session(session, args.store)
    if args.format:
        _emit_session(session, args.format)
    else:
        _emit(f"{args.verdict}: {args.triple}")
        _emit(f"conflicts: {len(session.conflicts)}")
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    config_path = config_path_from_env(args.config or "")
    runtime = Runtime.from_config(load_config(config_path))
    from .service import serve

    serve(
        runtime,
        args.store,
        host=args.host,
        port=args.port,
        token=args.token,
        config_path=config_path,
    )
    return EXIT_OK


def cmd_session(args: argparse.Namespace) -> int:
    if args.action == "ls":
        rows = []
        for sid in list_sessions(args.store):
            rows.append(session_summary(load_session(args.store, sid)))
        if args.format == "json":
            _emit(json.dumps(rows, indent=2, sort_keys=True))
        else:
            for row in rows:
                _emit(f"{row['id']}\t{row['status']}")
        return EXIT_OK
    session = load_session(args.store, args.session)
    if args.action == "show":
        _emit_session(session, args.format or "json")
        return EXIT_OK
    # export
    fmt = args.format or "nquads"
    if fmt == "json":
        views = triple_views(session, args.partition, args.include_rejected)
        _emit(json.dumps(views, indent=2))
    else:
        dataset = export_dataset(session, args.partition, args.include_rejected)
        _emit(serialize(dataset if fmt == "nquads" else dataset.union_graph(), fmt))
    return EXIT_OK


def _add_config(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--config", default="", help="config JSON path (falls back to $LAG_CONFIG)"
    )


def _add_format(parser: argparse.ArgumentParser, default: str = "") -> None:
    parser.add_argument(
        "--format",
        choices=FORMATS,
        default=default,
        help="machine-readable output on stdout; omit for a human summary",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lag",
        description="Ontology-bounded knowledge graph extension pipeline.",
        epilog="exit codes: 0 ok, 1 validation issues, 2 usage, 3 provider, 4 store",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="turn case text into the amodal graph")
    _add_config(p)
    _add_format(p)
    p.add_argument("--case", required=True, help="case text file")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("extend", help="run the full pipeline on a case")
    _add_config(p)
    _add_format(p)
    p.add_argument("--case", required=True, help="case text file")
    p.add_argument("--out", "--store", dest="store", default=None, help="session store root")
    p.add_argument("--provider", choices=("mock", "http"), default="", help="override provider kind")
    p.set_defaults(func=cmd_extend)

    p = sub.add_parser("link", help="rank reference entities for a surface form")
    _add_config(p)
    _add_format(p)
    p.add_argument("--surface", required=True, help="mention text to link")
    p.add_argument("--type", action="append", default=[], help="local class IRI (repeatable)")
    p.set_defaults(func=cmd_link)

    p = sub.add_parser("context", help="extract a bounded subgraph around seed entities")
    _add_config(p)
    _add_format(p)
    p.add_argument("--seed", action="append", required=True, help="seed IRI (repeatable)")
    p.add_argument("--hops", type=int, default=None, help="hop limit override")
    p.add_argument("--cap", type=int, default=None, help="triple cap override")
    p.set_defaults(func=cmd_context)

    p = sub.add_parser("validate", help="gate candidate triples against a schema")
    p.add_argument("--candidates", required=True, help="N-Triples file of candidates")
    p.add_argument("--schema", required=True, help="Turtle schema file")
    p.add_argument("--context", default="", help="N-Triples file of known facts")
    p.add_argument("--mode", choices=("strict", "lenient", "coerce"), default="strict")
    _add_format(p, default="json")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("aggregate", help="fold an expert opinion into a stored session")
    _add_config(p)
    _add_format(p)
    p.add_argument("--store", required=True, help="session store root")
    p.add_argument("--session", required=True, help="session id")
    p.add_argument("--expert", required=True, help="expert identifier")
    p.add_argument("--opinion", required=True, help="opinion text file")
    p.add_argument("--blind", action="store_true", help="hide generated content from the expert")
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("review", help="accept or reject one reviewed triple")
    _add_config(p)
    _add_format(p)
    p.add_argument("--store", required=True, help="session store root")
    p.add_argument("--session", required=True, help="session id")
    p.add_argument("--triple", required=True, help="canonical N-Triples line")
    p.add_argument("--verdict", required=True, choices=("accepted", "rejected"))
    p.add_argument("--reviewer", default="reviewer")
    p.set_defaults(func=cmd_review)

    p = sub.add_parser("serve", help="run the HTTP API")
    _add_config(p)
    p.add_argument("--store", required=True, help="session store root")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--token", default="", help="require this bearer token when set")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("session", help="inspect the session store")
    p.add_argument("action", choices=("ls", "show", "export"))
    p.add_argument("--store", required=True, help="session store root")
    p.add_argument("--session", default="", help="session id (show/export)")
    p.add_argument("--partition", default=None, help="restrict export to one partition")
    p.add_argument("--include-rejected", action="store_true")
    _add_format(p)
    p.set_defaults(func=cmd_session)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "session" and args.action in ("show", "export") and not args.session:
        _log("error: --session is required for show/export")
        return EXIT_USAGE
    try:
        return args.func(args)
    except ConfigError as exc:
        _log(f"config error: {exc}")
        return EXIT_USAGE
    except (ProviderError, BudgetExceeded) as exc:
        _log(f"provider error: {exc}")
        return EXIT_PROVIDER
    except StoreError as exc:
        _log(f"store error: {exc}")
        return EXIT_STORE
    except LagError as exc:
        _log(f"error: {exc}")
        return EXIT_ISSUES
    except ValueError as exc:
        _log(f"error: {exc}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
