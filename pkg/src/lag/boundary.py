"""Logic boundary enforcement and the two-level epistemic status algebra.

Extracted and asserted content counts as truth; generated content is only
ever plausible; derived content is as weak as its weakest premise. The
validator holds generated candidates inside the schema's vocabulary, typing
discipline, and disjointness axioms before they may join a session graph.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional

from lag.errors import EmptyPremises, RuleInapplicable
from lag.ontology import Schema, ValidationIssue, infer_types, lexical_ok
from lag.rdf import ANY, Graph, IRI, Literal, Quad, Triple, is_absolute_iri
from lag.vocab import OWL, RDF, RDFS

SOURCES = ("Asserted", "Extracted", "Generated", "Derived")
TACIT_KINDS = (
    "CausalConsequence",
    "SocialImplicature",
    "AffectiveEvocation",
    "EvaluativeJudgment",
    "MetaphoricalBlending",
    "Unspecified",
)

# Vocabulary that generated triples may never use as a predicate: accepting
# one would let a completion edit the schema layer.
TBOX_PREDICATES = frozenset(
    {
        RDFS.subClassOf,
        RDFS.subPropertyOf,
        RDFS.domain,
        RDFS.range,
        OWL.disjointWith,
        OWL.equivalentClass,
        OWL.equivalentProperty,
    }
)
META_CLASSES = frozenset(
    {OWL.Class, OWL.ObjectProperty, OWL.DatatypeProperty, OWL.AnnotationProperty}
)


class EpistemicStatus(Enum):
    TRUTH = "Truth"
    PLAUSIBLE = "Plausible"

    @property
    def strength(self) -> int:
        return 2 if self is EpistemicStatus.TRUTH else 1

    def __str__(self) -> str:
        return self.value


def chain_status(premises: Iterable[EpistemicStatus]) -> EpistemicStatus:
    """Weakest-link fold: one plausible premise makes the chain plausible."""
    statuses = list(premises)
    if not statuses:
        raise EmptyPremises("chain_status needs at least one premise")
    return min(statuses, key=lambda s: s.strength)


@dataclass(frozen=True)
class ProvenanceTag:
    source: str
    status: EpistemicStatus
    agent: str
    tacit_kind: str = "Unspecified"
    timestamp: str = ""
    premises: tuple = ()  # tuple[Triple, ...], only for Derived

    def __post_init__(self):
        if self.source not in SOURCES:
            raise ValueError(f"unknown source {self.source!r}")
        if self.tacit_kind not in TACIT_KINDS:
            raise ValueError(f"unknown tacit kind {self.tacit_kind!r}")
        if self.source in ("Asserted", "Extracted") and self.status is not EpistemicStatus.TRUTH:
            raise ValueError(f"{self.source} content must carry Truth status")
        if self.source == "Generated" and self.status is not EpistemicStatus.PLAUSIBLE:
            raise ValueError("Generated content must carry Plausible status")
        if self.tacit_kind != "Unspecified" and self.source != "Generated":
            raise ValueError("tacit kinds apply to Generated content only")
        if self.premises and self.source != "Derived":
            raise ValueError("premises apply to Derived content only")


def asserted_tag(agent: str, timestamp: str = "") -> ProvenanceTag:
    return ProvenanceTag("Asserted", EpistemicStatus.TRUTH, agent, timestamp=timestamp)


def extracted_tag(agent: str, timestamp: str = "") -> ProvenanceTag:
    return ProvenanceTag("Extracted", EpistemicStatus.TRUTH, agent, timestamp=timestamp)


def generated_tag(agent: str, tacit_kind: str = "Unspecified", timestamp: str = "") -> ProvenanceTag:
    return ProvenanceTag("Generated", EpistemicStatus.PLAUSIBLE, agent, tacit_kind, timestamp)


def derived_tag(
    premise_statuses: Iterable[EpistemicStatus],
    premises: tuple = (),
    agent: str = "reasoner",
    timestamp: str = "",
) -> ProvenanceTag:
    return ProvenanceTag(
        "Derived", chain_status(premise_statuses), agent, timestamp=timestamp, premises=premises
    )


@dataclass
class BoundaryReport:
    accepted: list  # list[tuple[Triple, ProvenanceTag]]
    quarantined: list  # list[tuple[Triple, ValidationIssue]]
    mode: str
    warnings: list = field(default_factory=list)

    @property
    def accepted_triples(self) -> set[Triple]:
        return {t for t, _ in self.accepted}


# ---------------------------------------------------------------------------
# Candidate validation
# ---------------------------------------------------------------------------

MODES = ("strict", "lenient", "coerce")


def _terms_ok(t: Triple) -> Optional[str]:
    for term in (t.subject, t.predicate, t.object):
        if isinstance(term, IRI) and not is_absolute_iri(term.value):
            return term.value
    return None


def _entailed_types(t: Triple, schema: Schema) -> set[tuple]:
    """(node, class) facts this single triple forces, closure-propagated."""
    direct: set[tuple] = set()
    if t.predicate.value == RDF.type:
        if isinstance(t.object, IRI):
            direct.add((t.subject, t.object.value))
    else:
        pd = schema.properties.get(t.predicate.value)
        if pd is not None:
            if pd.domain:
                direct.add((t.subject, pd.domain))
            if pd.kind == "object" and pd.range and not isinstance(t.object, Literal):
                direct.add((t.object, pd.range))
    out: set[tuple] = set()
    for node, c in direct:
        for up in schema.superclasses(c):
            out.add((node, up))
    return out


def _type_map(triples: Iterable[Triple], schema: Schema) -> dict:
    """node -> closure-propagated known classes, via explicit types plus
    domain/range inference over the given triples."""
    inferred = infer_types(Graph(triples), schema)
    out: dict = {}
    for t in inferred.triples:
        out.setdefault(t.subject, set()).add(t.object.value)
    return out


def validate_candidates(
    candidates: list[Triple],
    schema: Schema,
    context: Graph,
    mode: str = "strict",
    agent: str = "generator",
    timestamp: str = "",
) -> BoundaryReport:
    """Gate candidate triples against the schema and the session context.

    Checks, in order per candidate: term well-formedness, TBox injection,
    predicate vocabulary, class vocabulary (for rdf:type), literal shape and
    lexical form, domain/range typing, and finally disjointness over the
    whole tentative set so the outcome cannot depend on candidate order.
    Modes differ only in how an unknown (untypable) node is treated by the
    domain/range step: strict quarantines, lenient passes with a warning,
    coerce passes and adds the missing rdf:type as a Derived triple.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")

    unique: list[Triple] = []
    seen: set[Triple] = set()
    for c in candidates:
        if c not in seen:
            seen.add(c)
            unique.append(c)

    quarantined: list[tuple[Triple, ValidationIssue]] = []
    warnings: list[str] = []

    def issue(code: str, t: Triple, detail: str) -> ValidationIssue:
        return ValidationIssue(code=code, quad=Quad(t, None), detail=detail)

    # Steps 1-4: per-candidate structural checks.
    survivors: list[Triple] = []
    valid_type_candidates: list[Triple] = []
    for c in unique:
        bad_iri = _terms_ok(c)
        if bad_iri is not None:
            quarantined.append((c, issue("MalformedIRI", c, f"not an absolute IRI: {bad_iri}")))
            continue
        if c.predicate.value in TBOX_PREDICATES:
            quarantined.append(
                (c, issue("TBoxInjection", c, f"schema-editing predicate {c.predicate.value}"))
            )
            continue
        if isinstance(c.subject, IRI) and (
            c.subject.value in schema.classes or c.subject.value in schema.properties
        ):
            quarantined.append(
                (c, issue("TBoxInjection", c, f"schema term in subject position: {c.subject.value}"))
            )
            continue
        if c.predicate.value == RDF.type:
            if isinstance(c.object, IRI) and c.object.value in META_CLASSES:
                quarantined.append(
                    (c, issue("TBoxInjection", c, f"declares new schema vocabulary: {c.object.value}"))
                )
                continue
            if not isinstance(c.object, IRI):
                quarantined.append((c, issue("UnknownClass", c, "class position needs an IRI")))
                continue
            if c.object.value not in schema.classes:
                quarantined.append(
                    (c, issue("UnknownClass", c, f"class not in schema: {c.object.value}"))
                )
                continue
            valid_type_candidates.append(c)
            survivors.append(c)
            continue
        pd = schema.properties.get(c.predicate.value)
        if pd is None:
            quarantined.append(
                (c, issue("UnknownPredicate", c, f"predicate not in schema: {c.predicate.value}"))
            )
            continue
        if pd.kind == "datatype":
            if not isinstance(c.object, Literal):
                quarantined.append(
                    (c, issue("RangeViolation", c, f"{pd.iri} needs a literal object"))
                )
                continue
            if pd.range:
                ok = lexical_ok(pd.range, c.object.lexical)
                if ok is False:
                    quarantined.append(
                        (
                            c,
                            issue(
                                "DatatypeViolation",
                                c,
                                f"{c.object.nt()} is not a valid {pd.range}",
                            ),
                        )
                    )
                    continue
        else:
            if isinstance(c.object, Literal):
                quarantined.append(
                    (c, issue("RangeViolation", c, f"{pd.iri} needs a resource object"))
                )
                continue
        survivors.append(c)

    # Known types: context typing plus whatever the batch itself asserts via
    # valid rdf:type candidates. Candidates' own domain/range entailments are
    # deliberately excluded here; counting them would make the typing check
    # circular (every candidate would type its own terms as compatible).
    known = _type_map(list(context.triples) + valid_type_candidates, schema)

    def compatible(node, required: str) -> Optional[bool]:
        kt = known.get(node, set())
        if not kt:
            return None
        return any(schema.is_subclass(t, required) for t in kt)

    # Step 5: domain/range typing with mode-dependent unknown handling.
    typed_ok: list[Triple] = []
    coerced: dict[tuple, Triple] = {}
    for c in survivors:
        if c.predicate.value == RDF.type:
            typed_ok.append(c)
            continue
        pd = schema.properties[c.predicate.value]
        checks: list[tuple] = []
        if pd.domain:
            checks.append((c.subject, pd.domain, "DomainViolation"))
        if pd.kind == "object" and pd.range:
            checks.append((c.object, pd.range, "RangeViolation"))
        verdict_issue = None
        for node, required, code in checks:
            fit = compatible(node, required)
            if fit is True:
                continue
            if fit is False:
                verdict_issue = issue(
                    code, c, f"{node.nt()} has no known type compatible with {required}"
                )
                break
            # Unknown node: the modes fork here and only here.
            if mode == "strict":
                verdict_issue = issue(code, c, f"{node.nt()} has no known type (strict mode)")
                break
            if mode == "lenient":
                warnings.append(f"untyped node {node.nt()} accepted for {c.nt()}")
                continue
            # coerce: supply the missing type as a derived fact
            coerced[(node, required)] = Triple(node, IRI(RDF.type), IRI(required))
            warnings.append(f"coerced {node.nt()} into {required} for {c.nt()}")
        if verdict_issue is not None:
            quarantined.append((c, verdict_issue))
        else:
            typed_ok.append(c)

    # Step 6: disjointness over the full tentative set, order-independent.
    tentative = list(context.triples) + typed_ok + sorted(coerced.values(), key=Triple.sort_key)
    full_types = _type_map(tentative, schema)
    baseline_types = _type_map(context.triples, schema)

    def clashes(type_map: dict) -> set[tuple]:
        found = set()
        for node, classes in type_map.items():
            for pair in schema.disjoint_pairs:
                if all(side in classes for side in pair):
                    found.add((node, pair))
        return found

    new_clashes = clashes(full_types) - clashes(baseline_types)
    guilty: dict[Triple, set] = {}
    coerced_guilty: set[tuple] = set()
    if new_clashes:
        # A party is guilty when it alone entails a clashing type the context
        # did not already hold. All type entailment is single-premise, so
        # removing every guilty party provably removes the clash.
        for c in typed_ok:
            entailed = _entailed_types(c, schema)
            for node, pair in new_clashes:
                baseline = baseline_types.get(node, set())
                for side in pair:
                    if side in baseline:
                        continue
                    if (node, side) in entailed:
                        guilty.setdefault(c, set()).add(node)
        for key in coerced:
            node, required = key
            entails = schema.superclasses(required)
            for clash_node, pair in new_clashes:
                if clash_node != node:
                    continue
                baseline = baseline_types.get(node, set())
                if any(side in entails and side not in baseline for side in pair):
                    coerced_guilty.add(key)
        for c in sorted(guilty, key=Triple.sort_key):
            node_names = sorted(n.nt() for n in guilty[c])
            quarantined.append(
                (
                    c,
                    issue(
                        "DisjointnessViolation",
                        c,
                        "would introduce a disjointness clash on " + ", ".join(node_names),
                    ),
                )
            )

    accepted: list[tuple[Triple, ProvenanceTag]] = []
    final = [c for c in typed_ok if c not in guilty]
    for c in final:
        kind = schema.tacit_kind_for(c.predicate.value) if c.predicate.value != RDF.type else None
        if kind not in TACIT_KINDS or kind == "Unspecified":
            kind = "Unspecified"
        accepted.append((c, generated_tag(agent, kind, timestamp)))
    if mode == "coerce":
        surviving_nodes = set()
        for c in final:
            surviving_nodes.add(c.subject)
            surviving_nodes.add(c.object)
        for key in sorted(coerced, key=lambda k: (k[0].nt(), k[1])):
            node, _required = key
            if key in coerced_guilty or node not in surviving_nodes:
                continue
            accepted.append(
                (
                    coerced[key],
                    ProvenanceTag(
                        "Derived",
                        EpistemicStatus.PLAUSIBLE,
                        "reasoner",
                        timestamp=timestamp,
                        premises=(),
                    ),
                )
            )

    return BoundaryReport(accepted=accepted, quarantined=quarantined, mode=mode, warnings=warnings)


# ---------------------------------------------------------------------------
# Derivation rules
# ---------------------------------------------------------------------------

RULES = ("subproperty-lift", "type-propagation", "transitive-cause")


def _best(
    acc: dict, triple: Triple, status: EpistemicStatus, premises: tuple
) -> bool:
    """Keep the strongest status per derived triple. Returns True if updated."""
    cur = acc.get(triple)
    if cur is None or status.strength > cur[0].strength:
        acc[triple] = (status, premises)
        return True
    return False


def derive(
    rule: str,
    premises: list[tuple[Triple, ProvenanceTag]],
    schema: Schema,
    transitive_predicates: frozenset = frozenset(),
    agent: str = "reasoner",
    timestamp: str = "",
) -> list[tuple[Triple, ProvenanceTag]]:
    """Apply one derivation rule to tagged premises.

    Derived facts carry the weakest-link status of their strongest premise
    path and record the premises used. Facts already present among the
    premises are not re-derived.
    """
    if rule not in RULES:
        raise RuleInapplicable(f"unknown rule {rule!r}")
    existing = {t for t, _ in premises}
    status_of: dict[Triple, EpistemicStatus] = {}
    for t, tag in premises:
        cur = status_of.get(t)
        if cur is None or tag.status.strength > cur.strength:
            status_of[t] = tag.status

    acc: dict = {}

    if rule == "subproperty-lift":
        for t in sorted(existing, key=Triple.sort_key):
            for q in sorted(schema.superproperties(t.predicate.value) - {t.predicate.value}):
                lifted = Triple(t.subject, IRI(q), t.object)
                _best(acc, lifted, status_of[t], (t,))

    elif rule == "type-propagation":
        # Fixpoint over domain, range, and subclass rules with a max-fold on
        # status: a fact reachable through an all-Truth path stays Truth.
        facts: dict = {}  # (node, class) -> (status, premises)

        def put(node, cls: str, status: EpistemicStatus, prem: tuple) -> bool:
            key = (node, cls)
            cur = facts.get(key)
            if cur is None or status.strength > cur[0].strength:
                facts[key] = (status, prem)
                return True
            return False

        for t in sorted(existing, key=Triple.sort_key):
            st = status_of[t]
            if t.predicate.value == RDF.type:
                if isinstance(t.object, IRI):
                    put(t.subject, t.object.value, st, (t,))
                continue
            pd = schema.properties.get(t.predicate.value)
            if pd is None:
                continue
            if pd.domain:
                put(t.subject, pd.domain, st, (t,))
            if pd.kind == "object" and pd.range and not isinstance(t.object, Literal):
                put(t.object, pd.range, st, (t,))

        changed = True
        while changed:
            changed = False
            for (node, cls), (st, prem) in sorted(
                facts.items(), key=lambda kv: (kv[0][0].nt(), kv[0][1])
            ):
                for up in sorted(schema.superclasses(cls) - {cls}):
                    if put(node, up, st, prem):
                        changed = True

        for (node, cls), (st, prem) in facts.items():
            t = Triple(node, IRI(RDF.type), IRI(cls))
            _best(acc, t, st, prem)

    else:  # transitive-cause
        if not transitive_predicates:
            raise RuleInapplicable("transitive-cause requires configured transitive predicates")
        for p in sorted(transitive_predicates):
            edges: dict = {}
            for t in existing:
                if t.predicate.value == p and not isinstance(t.object, Literal):
                    edges[(t.subject, t.object)] = (status_of[t], (t,))
            changed = True
            while changed:
                changed = False
                pairs = sorted(edges.items(), key=lambda kv: (kv[0][0].nt(), kv[0][1].nt()))
                for (a, b), (st1, prem1) in pairs:
                    for (b2, c), (st2, prem2) in pairs:
                        if b2 != b or a == c:
                            continue
                        combined = chain_status([st1, st2])
                        key = (a, c)
                        cur = edges.get(key)
                        if cur is None or combined.strength > cur[0].strength:
                            merged = tuple(dict.fromkeys(prem1 + prem2))
                            edges[key] = (combined, merged)
                            changed = True
            for (a, c), (st, prem) in edges.items():
                t = Triple(a, IRI(p), c)
                _best(acc, t, st, prem)

    out: list[tuple[Triple, ProvenanceTag]] = []
    for t in sorted(acc, key=Triple.sort_key):
        if t in existing:
            continue
        status, prem = acc[t]
        out.append(
            (
                t,
                ProvenanceTag(
                    "Derived", status, agent, timestamp=timestamp, premises=prem
                ),
            )
        )
    return out
