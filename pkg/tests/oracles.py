"""Naive reference implementations the real code is checked against.

Everything here trades speed for obviousness: linear scans, permutation
search, dense matrices. Keep these independent of the package internals so
a bug cannot hide in both places at once.
"""

from __future__ import annotations

from itertools import permutations
from typing import Iterable, Optional

from lag.rdf import ANY, BlankNode, Dataset, Graph, IRI, Quad, Triple


def scan_match(triples: Iterable[Triple], s=ANY, p=ANY, o=ANY) -> set[Triple]:
    out = set()
    for t in triples:
        if s is not ANY and t.subject != s:
            continue
        if p is not ANY and t.predicate != p:
            continue
        if o is not ANY and t.object != o:
            continue
        out.add(t)
    return out


def scan_match_quads(quads: Iterable[Quad], s=ANY, p=ANY, o=ANY, g=ANY) -> set[Quad]:
    out = set()
    for q in quads:
        t = q.triple
        if s is not ANY and t.subject != s:
            continue
        if p is not ANY and t.predicate != p:
            continue
        if o is not ANY and t.object != o:
            continue
        if g is not ANY and q.graph != g:
            continue
        out.add(q)
    return out


def _quad_blanks(quads: frozenset[Quad]) -> list[str]:
    labels = set()
    for q in quads:
        for term in (q.triple.subject, q.triple.object):
            if isinstance(term, BlankNode):
                labels.add(term.label)
    return sorted(labels)


def _apply_mapping(quads: frozenset[Quad], mapping: dict[str, str]) -> frozenset[Quad]:
    def fix(term):
        if isinstance(term, BlankNode):
            return BlankNode(mapping[term.label])
        return term

    return frozenset(
        Quad(Triple(fix(q.triple.subject), q.triple.predicate, fix(q.triple.object)), q.graph)
        for q in quads
    )


# --- ontology oracles -------------------------------------------------------


def floyd_warshall_reachability(nodes: list[str], edges: set[tuple[str, str]]) -> set[tuple[str, str]]:
    """Dense all-pairs reachability (strict: no reflexive pairs unless cyclic)."""
    idx = {n: i for i, n in enumerate(nodes)}
    n = len(nodes)
    reach = [[False] * n for _ in range(n)]
    for a, b in edges:
        reach[idx[a]][idx[b]] = True
    for k in range(n):
        for i in range(n):
            if reach[i][k]:
                row_k = reach[k]
                row_i = reach[i]
                for j in range(n):
                    if row_k[j]:
                        row_i[j] = True
    return {(nodes[i], nodes[j]) for i in range(n) for j in range(n) if reach[i][j]}


def naive_infer_types(triples, schema) -> set:
    """Rule-by-rule fixpoint: domain, range, subclass propagation.

    Returns a set of (subject term, class IRI string) pairs, explicit types
    included.
    """
    from lag.rdf import Literal
    from lag.vocab import RDF

    facts: set[tuple] = set()
    for t in triples:
        if t.predicate.value == RDF.type:
            if isinstance(t.object, IRI):
                facts.add((t.subject, t.object.value))
            continue
        pd = schema.properties.get(t.predicate.value)
        if pd is None:
            continue
        if pd.domain:
            facts.add((t.subject, pd.domain))
        if pd.kind == "object" and pd.range and not isinstance(t.object, Literal):
            facts.add((t.object, pd.range))

    # subclass edges incl. equivalence-group mutuality, chased to fixpoint
    up_edges: set[tuple[str, str]] = set(schema.subclass_of)
    for group in schema.equiv_groups:
        for a in group:
            for b in group:
                if a != b:
                    up_edges.add((a, b))
    changed = True
    while changed:
        changed = False
        for node, c in list(facts):
            for a, b in up_edges:
                if a == c and (node, b) not in facts:
                    facts.add((node, b))
                    changed = True
    return facts


def naive_disjoint_nodes(triples, schema) -> set[tuple]:
    """(node, class-pair) occurrences of disjointness clashes, by brute scan."""
    from lag.vocab import RDF

    types: dict = {}
    for t in triples:
        if t.predicate.value == RDF.type and isinstance(t.object, IRI):
            types.setdefault(t.subject, set()).add(t.object.value)

    def ups(c: str) -> set[str]:
        seen = {c}
        changed = True
        edges = set(schema.subclass_of)
        for group in schema.equiv_groups:
            for a in group:
                for b in group:
                    if a != b:
                        edges.add((a, b))
        while changed:
            changed = False
            for a, b in edges:
                if a in seen and b not in seen:
                    seen.add(b)
                    changed = True
        return seen

    out = set()
    for node, direct in types.items():
        expanded = set()
        for c in direct:
            expanded |= ups(c)
        for pair in schema.disjoint_pairs:
            lo, hi = sorted(pair)
            if lo in expanded and hi in expanded:
                out.add((node, (lo, hi)))
    return out


# --- boundary oracles --------------------------------------------------------


def _ups(schema, c: str) -> set[str]:
    """Reflexive superclass chase, equivalence groups included. Dumb loop."""
    edges = set(schema.subclass_of)
    for group in schema.equiv_groups:
        for a in group:
            for b in group:
                if a != b:
                    edges.add((a, b))
    seen = {c}
    changed = True
    while changed:
        changed = False
        for a, b in edges:
            if a in seen and b not in seen:
                seen.add(b)
                changed = True
    return seen


def _triple_entails(t, schema) -> set[tuple]:
    """(node, class) facts one triple forces, superclasses included."""
    from lag.rdf import Literal
    from lag.vocab import RDF

    direct = set()
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
    out = set()
    for node, c in direct:
        for up in _ups(schema, c):
            out.add((node, up))
    return out


def naive_boundary(candidates, schema, context, mode="strict"):
    """Rule-by-rule candidate gate, written as a flat checklist.

    Returns (accepted frozenset[Triple] incl. coerced types, quarantine map
    Triple -> issue code). Mirrors the documented rule semantics with none of
    the implementation's shared machinery.
    """
    from lag.ontology import lexical_ok
    from lag.rdf import Literal, is_absolute_iri
    from lag.vocab import OWL, RDF, RDFS

    tbox_preds = {
        RDFS.subClassOf,
        RDFS.subPropertyOf,
        RDFS.domain,
        RDFS.range,
        OWL.disjointWith,
        OWL.equivalentClass,
        OWL.equivalentProperty,
    }
    meta = {OWL.Class, OWL.ObjectProperty, OWL.DatatypeProperty, OWL.AnnotationProperty}

    unique = list(dict.fromkeys(candidates))
    quarantine: dict = {}
    structural_ok = []
    type_candidates = []

    for c in unique:
        bad = None
        for term in (c.subject, c.predicate, c.object):
            if isinstance(term, IRI) and not is_absolute_iri(term.value):
                bad = "MalformedIRI"
        if bad:
            quarantine[c] = bad
            continue
        if c.predicate.value in tbox_preds:
            quarantine[c] = "TBoxInjection"
            continue
        if isinstance(c.subject, IRI) and (
            c.subject.value in schema.classes or c.subject.value in schema.properties
        ):
            quarantine[c] = "TBoxInjection"
            continue
        if c.predicate.value == RDF.type:
            if isinstance(c.object, IRI) and c.object.value in meta:
                quarantine[c] = "TBoxInjection"
            elif not isinstance(c.object, IRI):
                quarantine[c] = "UnknownClass"
            elif c.object.value not in schema.classes:
                quarantine[c] = "UnknownClass"
            else:
                type_candidates.append(c)
                structural_ok.append(c)
            continue
        pd = schema.properties.get(c.predicate.value)
        if pd is None:
            quarantine[c] = "UnknownPredicate"
            continue
        if pd.kind == "datatype":
            if not isinstance(c.object, Literal):
                quarantine[c] = "RangeViolation"
                continue
            if pd.range and lexical_ok(pd.range, c.object.lexical) is False:
                quarantine[c] = "DatatypeViolation"
                continue
        else:
            if isinstance(c.object, Literal):
                quarantine[c] = "RangeViolation"
                continue
        structural_ok.append(c)

    # known types: context plus valid type candidates, chased to fixpoint
    known: dict = {}
    for t in list(context.triples) + type_candidates:
        for node, cls in _triple_entails(t, schema):
            known.setdefault(node, set()).add(cls)

    typed_ok = []
    coerced = {}
    for c in structural_ok:
        if c.predicate.value == RDF.type:
            typed_ok.append(c)
            continue
        pd = schema.properties[c.predicate.value]
        checks = []
        if pd.domain:
            checks.append((c.subject, pd.domain, "DomainViolation"))
        if pd.kind == "object" and pd.range:
            checks.append((c.object, pd.range, "RangeViolation"))
        failed = None
        for node, required, code in checks:
            kt = known.get(node, set())
            if kt:
                if not any(required in _ups(schema, t) for t in kt):
                    failed = code
                    break
            else:
                if mode == "strict":
                    failed = code
                    break
                if mode == "coerce":
                    coerced[(node, required)] = Triple(node, IRI(RDF.type), IRI(required))
        if failed:
            quarantine[c] = failed
        else:
            typed_ok.append(c)

    # disjointness on the full tentative set
    tentative = list(context.triples) + typed_ok + list(coerced.values())
    tentative_types: dict = {}
    for t in tentative:
        for node, cls in _triple_entails(t, schema):
            tentative_types.setdefault(node, set()).add(cls)
    baseline: dict = {}
    for t in context.triples:
        for node, cls in _triple_entails(t, schema):
            baseline.setdefault(node, set()).add(cls)

    def find_clashes(tm):
        out = set()
        for node, classes in tm.items():
            for pair in schema.disjoint_pairs:
                lo, hi = sorted(pair)
                if lo in classes and hi in classes:
                    out.add((node, lo, hi))
        return out

    new_clashes = find_clashes(tentative_types) - find_clashes(baseline)
    final = []
    for c in typed_ok:
        entailed = _triple_entails(c, schema)
        is_guilty = False
        for node, lo, hi in new_clashes:
            for side in (lo, hi):
                if side in baseline.get(node, set()):
                    continue
                if (node, side) in entailed:
                    is_guilty = True
        if is_guilty:
            quarantine[c] = "DisjointnessViolation"
        else:
            final.append(c)

    accepted = set(final)
    if mode == "coerce":
        nodes_in_final = set()
        for c in final:
            nodes_in_final.add(c.subject)
            nodes_in_final.add(c.object)
        for (node, required), t in coerced.items():
            entails = _ups(schema, required)
            bad = False
            for clash_node, lo, hi in new_clashes:
                if clash_node != node:
                    continue
                for side in (lo, hi):
                    if side in entails and side not in baseline.get(node, set()):
                        bad = True
            if not bad and node in nodes_in_final:
                accepted.add(t)
    return frozenset(accepted), quarantine


def naive_context(quads, seeds, hop_limit: int, allowlist, cap=None) -> list:
    """Hop-by-hop slice gathering, written as plain set bookkeeping.

    Returns the admitted triples in admission order. Mirrors the documented
    semantics: per hop, scan candidates in canonical order, stop at cap, and
    let only newly admitted endpoints feed the next frontier.
    """
    from lag.rdf import Literal

    allow = set(allowlist)
    frontier = {IRI(s) if isinstance(s, str) else s for s in seeds}
    reached = set(frontier)
    universe = sorted({q.triple for q in quads}, key=Triple.sort_key)
    admitted: list = []
    for _hop in range(hop_limit):
        next_frontier = set()
        for t in universe:
            if cap is not None and len(admitted) >= cap:
                return admitted
            if t in admitted:
                continue
            if t.predicate.value not in allow:
                continue
            if t.subject in frontier or t.object in frontier:
                admitted.append(t)
                for term in (t.subject, t.object):
                    if not isinstance(term, Literal) and term not in reached:
                        reached.add(term)
                        next_frontier.add(term)
        frontier = next_frontier
        if not frontier:
            break
    return admitted


def naive_type_propagation(premises_with_status, schema):
    """Per-triple entailment union with a max status fold.

    premises_with_status: list of (Triple, EpistemicStatus). Returns a map
    (node, class) -> strongest status over single-premise entailment paths.
    """
    best: dict = {}
    for t, status in premises_with_status:
        for fact in _triple_entails(t, schema):
            cur = best.get(fact)
            if cur is None or status.strength > cur.strength:
                best[fact] = status
    return best


def brute_isomorphic(a, b, max_blanks: int = 8) -> Optional[bool]:
    """Permutation-search isomorphism. Returns None when too big to try."""
    qa = a.quads if isinstance(a, Dataset) else frozenset(Quad(t, None) for t in a.triples)
    qb = b.quads if isinstance(b, Dataset) else frozenset(Quad(t, None) for t in b.triples)
    blanks_a, blanks_b = _quad_blanks(qa), _quad_blanks(qb)
    if len(blanks_a) != len(blanks_b) or len(qa) != len(qb):
        return False
    if len(blanks_a) > max_blanks:
        return None
    for perm in permutations(blanks_b):
        mapping = dict(zip(blanks_a, perm))
        if _apply_mapping(qa, mapping) == qb:
            return True
    return False
