"""Schema compilation and the lightweight reasoning behind boundary checks.

Reasoning level is deliberately RDFS-plus-disjointness: subclass/subproperty
hierarchies, domain/range typing, disjointness clashes, and lexical checks
for a handful of datatypes. No tableau, no property characteristics.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional

from lag.errors import MalformedSchema
from lag.rdf import ANY, Graph, IRI, Literal, Quad, Triple
from lag.vocab import OWL, RDF, RDFS, TACIT_KIND, XSD, XSD_NS

ISSUE_CODES = (
    "UnknownPredicate",
    "UnknownClass",
    "DomainViolation",
    "RangeViolation",
    "DisjointnessViolation",
    "DatatypeViolation",
    "TBoxInjection",
    "MalformedIRI",
)


@dataclass(frozen=True)
class ValidationIssue:
    code: str
    quad: Quad
    detail: str

    def __post_init__(self):
        if self.code not in ISSUE_CODES:
            raise ValueError(f"unknown issue code {self.code!r}")


@dataclass(frozen=True)
class PropertyDef:
    iri: str
    kind: str  # "object" | "datatype"
    domain: Optional[str] = None
    range: Optional[str] = None
    subproperty_of: frozenset[str] = frozenset()
    tacit_kind: Optional[str] = None

    def __post_init__(self):
        if self.kind not in ("object", "datatype"):
            raise ValueError(f"bad property kind {self.kind!r}")


@dataclass(frozen=True)
class Schema:
    classes: frozenset[str] = frozenset()
    subclass_of: frozenset[tuple[str, str]] = frozenset()
    properties: dict = field(default_factory=dict)  # IRI -> PropertyDef
    disjoint_pairs: frozenset[frozenset[str]] = frozenset()
    label_map: dict = field(default_factory=dict)
    equiv_groups: tuple = ()  # tuple of frozenset[str], cycle-collapsed classes

    def _group_of(self, c: str) -> frozenset[str]:
        for group in self.equiv_groups:
            if c in group:
                return group
        return frozenset([c])

    def superclasses(self, c: str) -> frozenset[str]:
        """All classes c is a subclass of, reflexively, through equivalences."""
        up: dict[str, set[str]] = {}
        for a, b in self.subclass_of:
            up.setdefault(a, set()).add(b)
        seen: set[str] = set()
        frontier = set(self._group_of(c))
        while frontier:
            node = frontier.pop()
            if node in seen:
                continue
            seen.add(node)
            for nxt in up.get(node, ()):
                frontier.update(self._group_of(nxt))
                frontier.add(nxt)
        return frozenset(seen)

    def is_subclass(self, a: str, b: str) -> bool:
        return b in self.superclasses(a)

    def superproperties(self, p: str) -> frozenset[str]:
        seen: set[str] = set()
        frontier = {p}
        while frontier:
            node = frontier.pop()
            if node in seen:
                continue
            seen.add(node)
            pd = self.properties.get(node)
            if pd is not None:
                frontier.update(pd.subproperty_of)
        return frozenset(seen)

    def is_subproperty(self, p: str, q: str) -> bool:
        return q in self.superproperties(p)

    def disjoint_with(self, c: str) -> frozenset[str]:
        out: set[str] = set()
        for pair in self.disjoint_pairs:
            if c in pair:
                out.update(pair - {c})
        return frozenset(out)

    def tacit_kind_for(self, predicate: str) -> Optional[str]:
        """Annotation on the predicate itself, else nearest annotated
        superproperty (ties broken lexicographically)."""
        own = self.properties.get(predicate)
        if own is not None and own.tacit_kind:
            return own.tacit_kind
        ring = {predicate}
        seen = {predicate}
        while ring:
            nxt: set[str] = set()
            for p in ring:
                pd = self.properties.get(p)
                if pd is None:
                    continue
                nxt.update(q for q in pd.subproperty_of if q not in seen)
            annotated = sorted(
                q for q in nxt
                if self.properties.get(q) is not None and self.properties[q].tacit_kind
            )
            if annotated:
                return self.properties[annotated[0]].tacit_kind
            seen.update(nxt)
            ring = nxt
        return None


# ---------------------------------------------------------------------------
# Compilation
# ---------------------------------------------------------------------------

def _tarjan_sccs(nodes: Iterable[str], edges: dict[str, set[str]]) -> list[list[str]]:
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    counter = [0]
    sccs: list[list[str]] = []

    def strongconnect(v: str):
        # Iterative Tarjan; recursion depth is unbounded on long chains.
        work = [(v, iter(sorted(edges.get(v, ()))))]
        index[v] = low[v] = counter[0]
        counter[0] += 1
        stack.append(v)
        on_stack.add(v)
        while work:
            node, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter[0]
                    counter[0] += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(sorted(edges.get(w, ())))))
                    advanced = True
                    break
                if w in on_stack:
                    low[node] = min(low[node], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                component = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    component.append(w)
                    if w == node:
                        break
                sccs.append(sorted(component))

    for v in sorted(nodes):
        if v not in index:
            strongconnect(v)
    return sccs


def _transitive_reduction(nodes: set[str], edges: set[tuple[str, str]]) -> set[tuple[str, str]]:
    adj: dict[str, set[str]] = {}
    for a, b in edges:
        adj.setdefault(a, set()).add(b)

    def reach(start: str, skip_edge: tuple[str, str]) -> set[str]:
        seen: set[str] = set()
        frontier = [start]
        while frontier:
            n = frontier.pop()
            for m in adj.get(n, ()):
                if (n, m) == skip_edge:
                    continue
                if m not in seen:
                    seen.add(m)
                    frontier.append(m)
        return seen

    return {(a, b) for a, b in edges if b not in reach(a, (a, b))}


def _pick_label(labels: list[Literal]) -> Optional[str]:
    if not labels:
        return None
    english = sorted(l.lexical for l in labels if l.language in (None, "en") or l.datatype == XSD.string)
    if english:
        return english[0]
    return sorted(l.lexical for l in labels)[0]


def load_schema(tbox: Graph) -> tuple[Schema, list[str]]:
    """Compile a TBox graph. Returns the schema plus human-readable warnings
    (cycles collapsed, classes auto-registered)."""
    warnings: list[str] = []
    rdf_type = IRI(RDF.type)

    declared_classes = {
        t.subject.value
        for t in tbox.match(ANY, rdf_type, IRI(OWL.Class))
        if isinstance(t.subject, IRI)
    }
    object_props = {
        t.subject.value
        for t in tbox.match(ANY, rdf_type, IRI(OWL.ObjectProperty))
        if isinstance(t.subject, IRI)
    }
    datatype_props = {
        t.subject.value
        for t in tbox.match(ANY, rdf_type, IRI(OWL.DatatypeProperty))
        if isinstance(t.subject, IRI)
    }
    both = object_props & datatype_props
    if both:
        worst = sorted(both)[0]
        raise MalformedSchema(f"property declared with two kinds: {worst}")

    sub_edges_raw: set[tuple[str, str]] = set()
    for t in tbox.match(ANY, IRI(RDFS.subClassOf), ANY):
        if isinstance(t.subject, IRI) and isinstance(t.object, IRI):
            sub_edges_raw.add((t.subject.value, t.object.value))

    disjoint_raw: set[frozenset[str]] = set()
    for t in tbox.match(ANY, IRI(OWL.disjointWith), ANY):
        if not (isinstance(t.subject, IRI) and isinstance(t.object, IRI)):
            continue
        if t.subject.value == t.object.value:
            warnings.append(f"ignored reflexive disjointness on {t.subject.value}")
            continue
        disjoint_raw.add(frozenset((t.subject.value, t.object.value)))

    domains: dict[str, str] = {}
    ranges: dict[str, str] = {}
    for t in tbox.match(ANY, IRI(RDFS.domain), ANY):
        if isinstance(t.subject, IRI) and isinstance(t.object, IRI):
            domains[t.subject.value] = t.object.value
    for t in tbox.match(ANY, IRI(RDFS.range), ANY):
        if isinstance(t.subject, IRI) and isinstance(t.object, IRI):
            ranges[t.subject.value] = t.object.value

    subprop: dict[str, set[str]] = {}
    for t in tbox.match(ANY, IRI(RDFS.subPropertyOf), ANY):
        if isinstance(t.subject, IRI) and isinstance(t.object, IRI):
            subprop.setdefault(t.subject.value, set()).add(t.object.value)

    tacit: dict[str, str] = {}
    for t in tbox.match(ANY, IRI(TACIT_KIND), ANY):
        if isinstance(t.subject, IRI) and isinstance(t.object, Literal):
            tacit[t.subject.value] = t.object.lexical

    # Assemble the property table. Anything with property-ish declarations
    # participates, whether or not it carries an explicit owl kind.
    prop_iris = (
        object_props
        | datatype_props
        | set(domains)
        | set(ranges)
        | set(subprop)
        | {p for ps in subprop.values() for p in ps}
    )
    properties: dict[str, PropertyDef] = {}
    for p in sorted(prop_iris):
        rng = ranges.get(p)
        range_is_dt = rng is not None and rng.startswith(XSD_NS)
        if p in object_props:
            kind = "object"
            if range_is_dt:
                raise MalformedSchema(f"object property with datatype range: {p}")
        elif p in datatype_props:
            # Non-XSD range on a declared datatype property is treated as a
            # custom datatype, not a kind conflict.
            kind = "datatype"
        else:
            kind = "datatype" if range_is_dt else "object"
        properties[p] = PropertyDef(
            iri=p,
            kind=kind,
            domain=domains.get(p),
            range=rng,
            subproperty_of=frozenset(subprop.get(p, ())),
            tacit_kind=tacit.get(p),
        )

    # Auto-register classes used in class positions but never declared.
    used_classes: set[str] = set()
    for a, b in sub_edges_raw:
        used_classes.update((a, b))
    for pair in disjoint_raw:
        used_classes.update(pair)
    for pd in properties.values():
        if pd.domain:
            used_classes.add(pd.domain)
        if pd.kind == "object" and pd.range:
            used_classes.add(pd.range)
    for c in sorted(used_classes - declared_classes):
        warnings.append(f"auto-registered undeclared class {c}")
    classes = declared_classes | used_classes

    # Collapse subclass cycles into equivalence groups.
    adj: dict[str, set[str]] = {}
    for a, b in sub_edges_raw:
        if a != b:
            adj.setdefault(a, set()).add(b)
    sccs = _tarjan_sccs(classes, adj)
    rep_of: dict[str, str] = {}
    groups: list[frozenset[str]] = []
    for comp in sccs:
        rep = comp[0]
        for member in comp:
            rep_of[member] = rep
        if len(comp) > 1:
            groups.append(frozenset(comp))
            warnings.append("subclass cycle collapsed into equivalence group: " + ", ".join(comp))
    # Self-loop A subClassOf A counts as a trivial cycle; drop silently.

    rep_edges = {
        (rep_of.get(a, a), rep_of.get(b, b))
        for a, b in sub_edges_raw
        if rep_of.get(a, a) != rep_of.get(b, b)
    }
    reduced = _transitive_reduction({rep_of.get(c, c) for c in classes}, rep_edges)

    label_by_node: dict[str, list[Literal]] = {}
    for t in tbox.match(ANY, IRI(RDFS.label), ANY):
        if isinstance(t.subject, IRI) and isinstance(t.object, Literal):
            label_by_node.setdefault(t.subject.value, []).append(t.object)
    label_map = {}
    for node in sorted(label_by_node):
        picked = _pick_label(label_by_node[node])
        if picked is not None:
            label_map[node] = picked

    schema = Schema(
        classes=frozenset(classes),
        subclass_of=frozenset(reduced),
        properties=properties,
        disjoint_pairs=frozenset(disjoint_raw),
        label_map=label_map,
        equiv_groups=tuple(sorted(groups, key=sorted)),
    )
    return schema, warnings


def closure(schema: Schema) -> Schema:
    """Transitively close subclass and subproperty edges. Idempotent."""
    closed_sub: set[tuple[str, str]] = set()
    for c in schema.classes:
        for up in schema.superclasses(c):
            if up != c:
                closed_sub.add((c, up))
    new_props = {}
    for iri, pd in schema.properties.items():
        supers = schema.superproperties(iri) - {iri}
        new_props[iri] = replace(pd, subproperty_of=frozenset(supers))
    return replace(schema, subclass_of=frozenset(closed_sub), properties=new_props)


# ---------------------------------------------------------------------------
# Reasoning
# ---------------------------------------------------------------------------

def infer_types(g: Graph, schema: Schema) -> Graph:
    """Full explicit type map entailed by domain/range rules plus superclass
    propagation. Only rdf:type triples come out."""
    rdf_type = IRI(RDF.type)
    types: set[tuple] = set()

    for t in g.triples:
        if t.predicate.value == RDF.type:
            if isinstance(t.object, IRI):
                types.add((t.subject, t.object.value))
            continue
        pd = schema.properties.get(t.predicate.value)
        if pd is None:
            continue
        if pd.domain:
            types.add((t.subject, pd.domain))
        if pd.kind == "object" and pd.range and not isinstance(t.object, Literal):
            types.add((t.object, pd.range))

    out: set[tuple] = set()
    for node, c in types:
        for up in schema.superclasses(c):
            out.add((node, up))

    return Graph(Triple(node, rdf_type, IRI(c)) for node, c in out)


_INTEGER = re.compile(r"^[+-]?[0-9]+$")
_DECIMAL = re.compile(r"^[+-]?([0-9]+(\.[0-9]*)?|\.[0-9]+)$")
_BOOLEAN = re.compile(r"^(true|false|1|0)$")
_DATE = re.compile(r"^-?[0-9]{4,}-(0[1-9]|1[0-2])-(0[1-9]|[12][0-9]|3[01])(Z|[+-]([01][0-9]|1[0-4]):[0-5][0-9])?$")

_LEXICAL_CHECKS = {
    XSD.integer: _INTEGER,
    XSD.decimal: _DECIMAL,
    XSD.boolean: _BOOLEAN,
    XSD.date: _DATE,
}


def lexical_ok(datatype: str, lexical: str) -> Optional[bool]:
    """True/False for the four checked datatypes, None when unchecked."""
    rx = _LEXICAL_CHECKS.get(datatype)
    if rx is None:
        return None
    return rx.match(lexical) is not None


def check_consistency(g: Graph, schema: Schema) -> list[ValidationIssue]:
    """Disjointness clashes and datatype lexical failures. The caller should
    hand in a graph with inferred types included."""
    issues: list[ValidationIssue] = []
    rdf_type = IRI(RDF.type)

    direct_types: dict = {}
    for t in g.match(ANY, rdf_type, ANY):
        if isinstance(t.object, IRI):
            direct_types.setdefault(t.subject, set()).add(t.object.value)

    for node in sorted(direct_types, key=lambda n: n.nt()):
        expanded: dict[str, set[str]] = {}
        for c in direct_types[node]:
            for up in schema.superclasses(c):
                expanded.setdefault(up, set()).add(c)
        hit_pairs = {
            pair
            for pair in schema.disjoint_pairs
            if all(side in expanded for side in pair)
        }
        for pair in sorted(hit_pairs, key=sorted):
            lo, hi = sorted(pair)
            witness = sorted(expanded[hi])[0]
            issues.append(
                ValidationIssue(
                    code="DisjointnessViolation",
                    quad=Quad(Triple(node, rdf_type, IRI(witness)), None),
                    detail=f"{node.nt()} typed with disjoint classes {lo} and {hi}",
                )
            )

    for t in g:
        if t.predicate.value == RDF.type or not isinstance(t.object, Literal):
            continue
        pd = schema.properties.get(t.predicate.value)
        if pd is None or pd.kind != "datatype" or not pd.range:
            continue
        ok = lexical_ok(pd.range, t.object.lexical)
        if ok is False:
            issues.append(
                ValidationIssue(
                    code="DatatypeViolation",
                    quad=Quad(t, None),
                    detail=f"{t.object.nt()} is not a valid {pd.range} for {t.predicate.value}",
                )
            )
    return issues
