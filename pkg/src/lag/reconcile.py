"""Entity linking against a reference KB snapshot and context harmonisation.

Three steps: match local mentions to reference entities by label similarity
plus type and neighborhood evidence, gather the contextually relevant
subgraph around the linked entities, and fold links plus context into the
extended dataset's base-context partition.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from .errors import ConfigError, ConflictingLink
from .rdf import Dataset, Graph, IRI, Literal, Quad, Triple, is_absolute_iri
from .vocab import (
    BASE_CONTEXT_PARTITION,
    OWL,
    PARTITION_NS,
    RDFS,
    SKOS,
    WDT_NS,
    partition_iri,
)

_PUNCT = re.compile(r"[^\w\s]+", re.UNICODE)
_WS = re.compile(r"\s+")


def normalize_label(text: str) -> str:
    """casefold + punctuation strip + whitespace collapse. Idempotent."""
    return _WS.sub(" ", _PUNCT.sub(" ", text.casefold())).strip()


# ---------------------------------------------------------------------------
# Label index
# ---------------------------------------------------------------------------


@dataclass
class LabelIndex:
    by_label: dict = field(default_factory=dict)  # normalized -> tuple[(iri, kind)]
    language: str = "en"


def build_label_index(kb: Dataset, language: str = "en") -> LabelIndex:
    """Index every rdfs:label / skos:altLabel in the snapshot.

    Language-tagged labels are filtered to the configured language; untagged
    labels are kept as language-neutral. One entity appears at most once per
    key, preferred beating alternate.
    """
    seen: dict[str, dict[str, str]] = {}
    for quad in kb.quads:
        t = quad.triple
        if not isinstance(t.object, Literal):
            continue
        if t.predicate.value == RDFS.label:
            kind = "preferred"
        elif t.predicate.value == SKOS.altLabel:
            kind = "alternate"
        else:
            continue
        if t.object.language and t.object.language != language:
            continue
        key = normalize_label(t.object.lexical)
        if not key or not isinstance(t.subject, IRI):
            continue
        bucket = seen.setdefault(key, {})
        if bucket.get(t.subject.value) != "preferred":
            bucket[t.subject.value] = kind
    by_label = {
        key: tuple(sorted(bucket.items())) for key, bucket in sorted(seen.items())
    }
    return LabelIndex(by_label=by_label, language=language)


# ---------------------------------------------------------------------------
# Linking
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LinkCandidate:
    surface: str
    entity: str  # IRI
    score: float
    components: tuple  # (label_sim, type_prior, context_overlap)


def levenshtein(a: str, b: str) -> int:
    """Edit distance, two-row dynamic program."""
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(
                min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + (ca != cb))
            )
        previous = current
    return previous[-1]


def label_similarity(a: str, b: str) -> float:
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein(a, b) / longest


def load_type_map(path) -> dict[str, str]:
    """Two-column TSV: reference KB class -> local class."""
    mapping: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().split("\n"), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) != 2 or not all(is_absolute_iri(c.strip()) for c in cols):
            raise ConfigError(f"{path}:{lineno}: expected two IRI columns")
        mapping[cols[0].strip()] = cols[1].strip()
    return mapping


_DEFAULT_TYPE_PREDICATES = (WDT_NS + "P31",)


def link_entity(
    surface: str,
    local_types: Iterable[str],
    already_linked: Iterable[str],
    index: LabelIndex,
    kb: Dataset,
    type_map: Optional[dict] = None,
    weights: tuple = (0.6, 0.2, 0.2),
    threshold: float = 0.5,
    type_predicates: tuple = _DEFAULT_TYPE_PREDICATES,
) -> list[LinkCandidate]:
    """Rank reference entities for one surface mention.

    Callers should pass the full superclass closure as local_types so a
    mapped reference type can hit any level of the local hierarchy.
    """
    if abs(sum(weights) - 1.0) > 1e-9 or len(weights) != 3:
        raise ConfigError(f"score weights must sum to 1, got {weights!r}")
    type_map = type_map or {}
    local = {t.value if isinstance(t, IRI) else str(t) for t in local_types}
    linked = {t.value if isinstance(t, IRI) else str(t) for t in already_linked}

    target = normalize_label(surface)
    if not target:
        return []

    best_sim: dict[str, float] = {}
    for key, entries in index.by_label.items():
        sim = label_similarity(target, key)
        for iri_value, _kind in entries:
            if sim > best_sim.get(iri_value, -1.0):
                best_sim[iri_value] = sim

    kb_types: dict[str, set] = {}
    neighbors: dict[str, set] = {}
    for quad in kb.quads:
        t = quad.triple
        s = t.subject.value if isinstance(t.subject, IRI) else None
        o = t.object.value if isinstance(t.object, IRI) else None
        if s and t.predicate.value in type_predicates and o:
            kb_types.setdefault(s, set()).add(o)
        if s and o:
            neighbors.setdefault(s, set()).add(o)
            neighbors.setdefault(o, set()).add(s)

    out = []
    for entity, sim in best_sim.items():
        types = kb_types.get(entity, set())
        if not types:
            prior = 0.5
        elif any(type_map.get(t) in local for t in types):
            prior = 1.0
        else:
            prior = 0.0
        hood = neighbors.get(entity, set())
        overlap = len(hood & linked) / max(1, len(linked))
        score = weights[0] * sim + weights[1] * prior + weights[2] * overlap
        if score + 1e-12 >= threshold:
            out.append(LinkCandidate(surface, entity, score, (sim, prior, overlap)))
    out.sort(key=lambda c: (-c.score, c.entity))
    return out


# ---------------------------------------------------------------------------
# Context gathering
# ---------------------------------------------------------------------------


@dataclass
class ContextSlice:
    graph: Graph
    seeds: frozenset
    hop_limit: int
    allowlist: frozenset
    cap: Optional[int] = None


def extract_context(
    kb: Dataset,
    seeds: Iterable,
    hop_limit: int,
    allowlist: Iterable[str],
    cap: Optional[int] = None,
) -> ContextSlice:
    """Breadth-first slice around the seeds, bounded and deterministic.

    Hops expand over allowlisted predicates in both directions; within a hop
    triples are admitted in canonical sort order until the cap is hit, and
    only nodes reached by admitted triples feed the next hop.
    """
    allow = frozenset(allowlist)
    seed_terms = frozenset(IRI(s) if isinstance(s, str) else s for s in seeds)
    universe = sorted({q.triple for q in kb.quads}, key=Triple.sort_key)

    admitted: list[Triple] = []
    taken: set[Triple] = set()
    reached: set = set(seed_terms)
    frontier: set = set(seed_terms)
    full = False
    for _ in range(max(0, hop_limit)):
        if not frontier or full:
            break
        fresh: set = set()
        for t in universe:
            if t in taken or t.predicate.value not in allow:
                continue
            if t.subject not in frontier and t.object not in frontier:
                continue
            if cap is not None and len(admitted) >= cap:
                full = True
                break
            admitted.append(t)
            taken.add(t)
            for term in (t.subject, t.object):
                if not isinstance(term, Literal) and term not in reached:
                    reached.add(term)
                    fresh.add(term)
        frontier = fresh
    return ContextSlice(
        graph=Graph(admitted, prefixes=kb.prefixes),
        seeds=seed_terms,
        hop_limit=hop_limit,
        allowlist=allow,
        cap=cap,
    )


# ---------------------------------------------------------------------------
# Harmonisation
# ---------------------------------------------------------------------------


@dataclass
class HarmoniseResult:
    dataset: Dataset
    added: tuple  # tuple[Quad, ...] new base-context quads needing Asserted tags
    rewrite_map: dict = field(default_factory=dict)  # local IRI -> KB IRI


POLICIES = ("sameAs", "rewrite")


def harmonise(
    extended: Dataset,
    links: list,
    context: ContextSlice,
    policy: str = "sameAs",
    partition_base: str = PARTITION_NS,
) -> HarmoniseResult:
    """Fold accepted links and the context slice into the extended dataset.

    sameAs policy is non-destructive: it only adds owl:sameAs bridges and the
    context slice, all in the base-context partition. rewrite policy replaces
    linked local IRIs with their reference IRIs in every other partition and
    reports the substitution map.
    """
    if policy not in POLICIES:
        raise ValueError(f"unknown policy {policy!r}")

    chosen: dict[str, LinkCandidate] = {}
    for local, cand in links:
        key = local.value if isinstance(local, IRI) else str(local)
        prior = chosen.get(key)
        if prior is not None and prior.entity != cand.entity:
            raise ConflictingLink(
                f"{key} linked to both {prior.entity} and {cand.entity}"
            )
        chosen[key] = cand

    base_graph = IRI(partition_iri(BASE_CONTEXT_PARTITION, partition_base))
    existing = set(extended.quads)
    added: list[Quad] = []
    for t in context.graph.sorted_triples():
        quad = Quad(t, base_graph)
        if quad not in existing:
            added.append(quad)

    quads: list[Quad]
    rewrite_map: dict[str, str] = {}
    if policy == "sameAs":
        quads = list(extended.quads)
        for key in sorted(chosen):
            quad = Quad(
                Triple(IRI(key), IRI(OWL.sameAs), IRI(chosen[key].entity)), base_graph
            )
            if quad not in existing:
                added.append(quad)
    else:
        rewrite_map = {key: chosen[key].entity for key in sorted(chosen)}

        def swap(term):
            if isinstance(term, IRI) and term.value in rewrite_map:
                return IRI(rewrite_map[term.value])
            return term

        quads = []
        for quad in extended.quads:
            if quad.graph == base_graph:
                quads.append(quad)
                continue
            t = quad.triple
            quads.append(Quad(Triple(swap(t.subject), t.predicate, swap(t.object)), quad.graph))

    return HarmoniseResult(
        dataset=Dataset(quads + added, prefixes=extended.prefixes),
        added=tuple(added),
        rewrite_map=rewrite_map,
    )
