"""Read-only JSON views over a session, shared by the CLI and the HTTP API."""

from __future__ import annotations

from .boundary import ProvenanceTag
from .rdf import Dataset, Quad, Triple
from .session import IMMUTABLE_PARTITIONS, SessionState


def tag_fields(tag: ProvenanceTag) -> dict:
    return {
        "source": tag.source,
        "status": tag.status.name,
        "agent": tag.agent,
        "tacit_kind": tag.tacit_kind,
        "timestamp": tag.timestamp,
        "premises": [p.nt() for p in tag.premises],
    }


def _visible(session: SessionState, partition, include_rejected: bool):
    """Yield (partition, triple) pairs of the working view, canonically ordered."""
    rejected = set() if include_rejected else session.rejected_nts()
    names = session.partition_names() if partition is None else [partition]
    for name in names:
        for triple in sorted(session.partitions.get(name, ()), key=Triple.sort_key):
            if name not in IMMUTABLE_PARTITIONS and triple.nt() in rejected:
                continue
            yield name, triple


def triple_views(
    session: SessionState, partition: str | None = None, include_rejected: bool = False
) -> list[dict]:
    """One record per visible triple: canonical text, partition, tag, review state."""
    out = []
    for name, triple in _visible(session, partition, include_rejected):
        view = {
            "triple": triple.nt(),
            "partition": name,
            "review": session.review_state(triple),
        }
        tag = session.tags.get(triple, name)
        if tag is not None:
            view.update(tag_fields(tag))
        out.append(view)
    return out


def export_dataset(
    session: SessionState, partition: str | None = None, include_rejected: bool = False
) -> Dataset:
    """The working view as quads, optionally narrowed to one partition."""
    quads = [
        Quad(triple, session.graph_iri(name))
        for name, triple in _visible(session, partition, include_rejected)
    ]
    return Dataset(quads, prefixes=session.prefixes)


def conflict_views(session: SessionState) -> list[dict]:
    return [
        {
            "kind": c.kind,
            "triples": list(c.triples),
            "agents": list(c.agents),
            "detail": c.detail,
        }
        for c in session.conflicts
    ]


def session_summary(session: SessionState) -> dict:
    """The polling view: status, partition sizes, conflict digest, last activity."""
    return {
        "id": session.id,
        "status": session.status,
        "partitions": {name: len(session.partitions[name]) for name in session.partition_names()},
        "conflicts": {
            "count": len(session.conflicts),
            "kinds": sorted({c.kind for c in session.conflicts}),
        },
        "quarantine": len(session.quarantine),
        "updated_at": session.audit[-1]["timestamp"] if session.audit else "",
    }


def events_since(session: SessionState, since: int = -1) -> list[dict]:
    """Audit entries after a seq cursor, for incremental polling."""
    return [entry for entry in session.audit if entry["seq"] > since]
