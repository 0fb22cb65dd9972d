"""Directory-per-session persistence with tamper-evident cross hashes."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

from .boundary import EpistemicStatus, ProvenanceTag
from .errors import NotFound, StoreCorrupt
from .rdf import Dataset, parse_document, parse_ntriples_line, serialize
from .session import ConflictEntry, LogicalClock, SessionState
from .vocab import FIXTURE_PREFIXES

GRAPH_FILE = "extended.nq"
TAGS_FILE = "tags.jsonl"
META_FILE = "meta.json"


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _tag_record(key: tuple, tag: ProvenanceTag) -> dict:
    triple_nt, partition = key
    return {
        "record": "tag",
        "partition": partition,
        "triple": triple_nt,
        "source": tag.source,
        "status": tag.status.name,
        "agent": tag.agent,
        "tacit_kind": tag.tacit_kind,
        "timestamp": tag.timestamp,
        "premises": [p.nt() for p in tag.premises],
    }


def _event_record(event: dict) -> dict:
    return {"record": "event", **event}


def save_session(session: SessionState, store_root) -> Path:
    """Write the session to <root>/<id>/ and return that directory."""
    directory = Path(store_root) / session.id
    directory.mkdir(parents=True, exist_ok=True)

    graph_bytes = serialize(session.extended_view(include_rejected=True), "nquads").encode("utf-8")

    lines = [json.dumps(_tag_record(k, tag), sort_keys=True) for k, tag in session.tags.items()]
    lines.extend(json.dumps(_event_record(e), sort_keys=True) for e in session.audit)
    tags_bytes = ("\n".join(lines) + "\n").encode("utf-8")

    meta = {
        "id": session.id,
        "case_text": session.case_text,
        "status": session.status,
        "blind_default": session.blind_default,
        "config_fingerprint": session.config_fingerprint,
        "partition_base": session.partition_base,
        "clock": session.clock.counter,
        "reviews": dict(sorted(session.reviews.items())),
        "quarantine": session.quarantine,
        "conflicts": [
            {
                "kind": e.kind,
                "triples": list(e.triples),
                "agents": list(e.agents),
                "detail": e.detail,
            }
            for e in session.conflicts
        ],
        "functional_predicates": list(session.functional_predicates),
        "opposing_pairs": [list(pair) for pair in session.opposing_pairs],
        "partitions": session.partition_names(),
        "hashes": {GRAPH_FILE: _sha256(graph_bytes), TAGS_FILE: _sha256(tags_bytes)},
    }
    meta_bytes = (json.dumps(meta, sort_keys=True, indent=2) + "\n").encode("utf-8")

    (directory / GRAPH_FILE).write_bytes(graph_bytes)
    (directory / TAGS_FILE).write_bytes(tags_bytes)
    (directory / META_FILE).write_bytes(meta_bytes)
    return directory


def _read(directory: Path, name: str) -> bytes:
    path = directory / name
    if not path.is_file():
        raise NotFound(f"missing {name} under {directory}")
    return path.read_bytes()


def list_sessions(store_root) -> list:
    root = Path(store_root)
    if not root.is_dir():
        return []
    return sorted(p.name for p in root.iterdir() if (p / META_FILE).is_file())


def load_session(store_root, session_id: str) -> SessionState:
    """Rebuild a persisted session, verifying the recorded hashes first."""
    directory = Path(store_root) / session_id
    if not directory.is_dir():
        raise NotFound(f"no session {session_id} under {store_root}")
    meta_bytes = _read(directory, META_FILE)
    try:
        meta = json.loads(meta_bytes)
    except json.JSONDecodeError as e:
        raise StoreCorrupt(f"{META_FILE} is not valid JSON: {e}")

    graph_bytes = _read(directory, GRAPH_FILE)
    tags_bytes = _read(directory, TAGS_FILE)
    recorded = meta.get("hashes", {})
    for name, data in ((GRAPH_FILE, graph_bytes), (TAGS_FILE, tags_bytes)):
        if recorded.get(name) != _sha256(data):
            raise StoreCorrupt(f"{name} does not match the hash recorded in {META_FILE}")

    session = SessionState(
        id=meta["id"],
        case_text=meta["case_text"],
        config_fingerprint=meta["config_fingerprint"],
        partition_base=meta["partition_base"],
        status=meta["status"],
        blind_default=bool(meta.get("blind_default", False)),
        reviews=dict(meta.get("reviews", {})),
        quarantine=list(meta.get("quarantine", [])),
        conflicts=[
            ConflictEntry(
                kind=c["kind"],
                triples=tuple(c["triples"]),
                agents=tuple(c["agents"]),
                detail=c.get("detail", ""),
            )
            for c in meta.get("conflicts", [])
        ],
        clock=LogicalClock(int(meta.get("clock", 0))),
        functional_predicates=tuple(meta.get("functional_predicates", ())),
        opposing_pairs=tuple(tuple(p) for p in meta.get("opposing_pairs", ())),
        prefixes=dict(FIXTURE_PREFIXES),
    )
    for name in meta.get("partitions", []):
        session.partition(name)

    base = session.partition_base
    dataset = parse_document(graph_bytes.decode("utf-8"), "nquads")
    for quad in dataset.quads:
        if quad.graph is None or not quad.graph.value.startswith(base):
            raise StoreCorrupt(f"quad outside the partition namespace: {quad.nq()}")
        session.partition(quad.graph.value[len(base):]).add(quad.triple)

    for lineno, line in enumerate(tags_bytes.decode("utf-8").split("\n"), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as e:
            raise StoreCorrupt(f"{TAGS_FILE}:{lineno}: not valid JSON: {e}")
        if record.get("record") == "tag":
            triple = parse_ntriples_line(record["triple"])
            tag = ProvenanceTag(
                source=record["source"],
                status=EpistemicStatus[record["status"]],
                agent=record["agent"],
                tacit_kind=record.get("tacit_kind", "Unspecified"),
                timestamp=record.get("timestamp", ""),
                premises=tuple(parse_ntriples_line(p) for p in record.get("premises", ())),
            )
            session.tags.put(triple, record["partition"], tag)
        elif record.get("record") == "event":
            session.audit.append(
                {
                    "seq": record["seq"],
                    "timestamp": record["timestamp"],
                    "event": record["event"],
                    "detail": record.get("detail", {}),
                }
            )
        else:
            raise StoreCorrupt(f"{TAGS_FILE}:{lineno}: unknown record kind")
    return session
