"""Session state: partitioned graph, provenance tags, reviews, audit trail."""

from __future__ import annotations

import hashlib
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone

from .boundary import ProvenanceTag
from .rdf import Dataset, IRI, Quad, Triple
from .vocab import (
    AMODAL_PARTITION,
    BASE_CONTEXT_PARTITION,
    DERIVED_PARTITION,
    GENERATED_PARTITION,
    PARTITION_NS,
    partition_iri,
)

# Review verdicts a generated or opinion triple can carry.
REVIEW_STATES = ("pending", "accepted", "rejected")

# Disagreement shapes the session reports across its contributors.
CONFLICT_KINDS = ("DisjointTypes", "FunctionalPropertyClash", "OpposingPredicates")


@dataclass(frozen=True)
class ConflictEntry:
    kind: str
    triples: tuple  # canonical N-Triples lines, sorted
    agents: tuple  # contributing agents, sorted
    detail: str = ""

    def __post_init__(self):
        if self.kind not in CONFLICT_KINDS:
            raise ValueError(f"unknown conflict kind {self.kind!r}")
        if len(self.triples) < 2:
            raise ValueError("a conflict cites at least two triples")
        if not self.agents:
            raise ValueError("a conflict names at least one agent")

# Partitions whose triples are not subject to review.
IMMUTABLE_PARTITIONS = (AMODAL_PARTITION, BASE_CONTEXT_PARTITION, DERIVED_PARTITION)

_CLOCK_EPOCH = datetime(2024, 1, 1, tzinfo=timezone.utc)


class LogicalClock:
    """Deterministic timestamp source: fixed epoch plus one second per tick."""

    def __init__(self, counter: int = 0):
        self.counter = counter

    def tick(self) -> str:
        stamp = _CLOCK_EPOCH + timedelta(seconds=self.counter)
        self.counter += 1
        return stamp.strftime("%Y-%m-%dT%H:%M:%SZ")


def session_id(config_fingerprint: str, case_text: str) -> str:
    """Stable id: same config and case text always name the same session."""
    case_hash = hashlib.sha256(case_text.encode("utf-8")).hexdigest()
    return str(uuid.uuid5(uuid.NAMESPACE_URL, f"lag:{config_fingerprint}:{case_hash}"))


class TagStore:
    """One provenance tag per (triple, partition); the first writer wins."""

    def __init__(self):
        self._tags = {}

    def put(self, triple: Triple, partition: str, tag: ProvenanceTag) -> bool:
        key = (triple.nt(), partition)
        if key in self._tags:
            return False
        self._tags[key] = tag
        return True

    def get(self, triple: Triple, partition: str) -> ProvenanceTag | None:
        return self._tags.get((triple.nt(), partition))

    def drop(self, triple: Triple, partition: str) -> None:
        self._tags.pop((triple.nt(), partition), None)

    def items(self):
        return sorted(self._tags.items(), key=lambda kv: (kv[0][1], kv[0][0]))

    def __len__(self) -> int:
        return len(self._tags)


@dataclass
class SessionState:
    """Everything one case accumulates across extension, opinions and review."""

    id: str
    case_text: str
    config_fingerprint: str
    partition_base: str = PARTITION_NS
    status: str = "running"
    blind_default: bool = False
    partitions: dict = field(default_factory=dict)
    tags: TagStore = field(default_factory=TagStore)
    reviews: dict = field(default_factory=dict)
    quarantine: list = field(default_factory=list)
    conflicts: list = field(default_factory=list)
    audit: list = field(default_factory=list)
    clock: LogicalClock = field(default_factory=LogicalClock)
    functional_predicates: tuple = ()
    opposing_pairs: tuple = ()
    prefixes: dict = field(default_factory=dict)

    def partition(self, name: str) -> set:
        return self.partitions.setdefault(name, set())

    def partition_names(self) -> list:
        return sorted(self.partitions)

    def graph_iri(self, name: str) -> IRI:
        return IRI(partition_iri(name, self.partition_base))

    def log(self, event: str, **detail) -> None:
        self.audit.append(
            {
                "seq": len(self.audit),
                "timestamp": self.clock.tick(),
                "event": event,
                "detail": detail,
            }
        )

    def add_triple(self, name: str, triple: Triple, tag: ProvenanceTag) -> bool:
        """Admit a triple into a partition unless some partition already holds it."""
        for pname, existing in sorted(self.partitions.items()):
            if triple not in existing:
                continue
            # A direct assertion replaces an earlier inference of the same fact.
            if pname == DERIVED_PARTITION and name != DERIVED_PARTITION:
                self.retract_derived(triple)
                break
            return False
        self.partition(name).add(triple)
        self.tags.put(triple, name, tag)
        if name not in IMMUTABLE_PARTITIONS:
            self.reviews.setdefault(triple.nt(), "pending")
        return True

    def retract_derived(self, triple: Triple) -> None:
        self.partition(DERIVED_PARTITION).discard(triple)
        self.tags.drop(triple, DERIVED_PARTITION)

    def review_state(self, triple: Triple) -> str:
        return self.reviews.get(triple.nt(), "pending")

    def rejected_nts(self) -> set:
        return {nt for nt, state in self.reviews.items() if state == "rejected"}

    def find_partitions(self, triple: Triple) -> list:
        return sorted(n for n, triples in self.partitions.items() if triple in triples)

    def extended_view(self, include_rejected: bool = False) -> Dataset:
        """The session's working graph: every partition minus rejected triples."""
        rejected = set() if include_rejected else self.rejected_nts()
        quads = []
        for name in self.partition_names():
            graph = self.graph_iri(name)
            for triple in self.partitions[name]:
                if name not in IMMUTABLE_PARTITIONS and triple.nt() in rejected:
                    continue
                quads.append(Quad(triple, graph))
        return Dataset(quads, prefixes=self.prefixes)

    def view_triples(self, include_rejected: bool = False) -> set:
        rejected = set() if include_rejected else self.rejected_nts()
        out = set()
        for name, triples in self.partitions.items():
            for triple in triples:
                if name not in IMMUTABLE_PARTITIONS and triple.nt() in rejected:
                    continue
                out.add(triple)
        return out

    def premise_triples(self) -> list:
        """Unrejected triples outside the derived partition, with their tags."""
        rejected = self.rejected_nts()
        out = []
        for name in self.partition_names():
            if name == DERIVED_PARTITION:
                continue
            for triple in sorted(self.partitions[name], key=Triple.sort_key):
                if name not in IMMUTABLE_PARTITIONS and triple.nt() in rejected:
                    continue
                tag = self.tags.get(triple, name)
                if tag is not None:
                    out.append((triple, tag))
        return out
