"""Canonical blank-node labeling and graph isomorphism.

Blank nodes are partitioned by iterative color refinement over the quads
that mention them. When refinement leaves a color class with several
members, one member is individualized and refinement re-runs; the final
form is the minimum over the branch choices, so the result never depends
on the input labels. Ground terms compare by their canonical N-Quads text.
"""

from __future__ import annotations

from typing import Optional, Union

from lag.rdf.graph import Dataset, Graph
from lag.rdf.terms import BlankNode, Quad, Term, Triple

_MAX_ROUNDS = 64


def _as_quads(value: Union[Graph, Dataset]) -> frozenset[Quad]:
    if isinstance(value, Dataset):
        return value.quads
    return frozenset(Quad(t, None) for t in value.triples)


def _blanks(quads: frozenset[Quad]) -> set[str]:
    out: set[str] = set()
    for q in quads:
        for term in (q.triple.subject, q.triple.object):
            if isinstance(term, BlankNode):
                out.add(term.label)
    return out


def _encode(term: Term, colors: dict[str, str], self_label: str) -> str:
    if isinstance(term, BlankNode):
        if term.label == self_label:
            return "~self"
        return "~" + colors[term.label]
    return term.nt()


def _refine(quads: frozenset[Quad], colors: dict[str, str]) -> dict[str, str]:
    """Run color refinement to a fixpoint, starting from the given coloring."""
    occurs: dict[str, list[Quad]] = {b: [] for b in colors}
    for q in quads:
        seen = set()
        for term in (q.triple.subject, q.triple.object):
            if isinstance(term, BlankNode) and term.label not in seen:
                occurs[term.label].append(q)
                seen.add(term.label)

    current = dict(colors)
    for _ in range(_MAX_ROUNDS):
        sigs: dict[str, str] = {}
        for b in current:
            parts = []
            for q in occurs[b]:
                t = q.triple
                g = q.graph.nt() if q.graph is not None else ""
                parts.append(
                    "|".join(
                        (
                            _encode(t.subject, current, b),
                            t.predicate.nt(),
                            _encode(t.object, current, b),
                            g,
                        )
                    )
                )
            parts.sort()
            sigs[b] = current[b] + "\x1e" + "\x1f".join(parts)
        distinct = sorted(set(sigs.values()))
        rank = {s: f"{i:06d}" for i, s in enumerate(distinct)}
        new = {b: rank[sigs[b]] for b in current}
        if len(set(new.values())) == len(set(current.values())):
            return new
        current = new
    return current


def _classes(colors: dict[str, str]) -> dict[str, list[str]]:
    out: dict[str, list[str]] = {}
    for label, color in colors.items():
        out.setdefault(color, []).append(label)
    for members in out.values():
        members.sort()
    return out


def _canonical_text(quads: frozenset[Quad], mapping: dict[str, str]) -> str:
    lines = []
    for q in quads:
        t = q.triple
        subj = t.subject
        obj = t.object
        if isinstance(subj, BlankNode):
            subj = BlankNode(mapping[subj.label])
        if isinstance(obj, BlankNode):
            obj = BlankNode(mapping[obj.label])
        lines.append(Quad(Triple(subj, t.predicate, obj), q.graph).nq())  # type: ignore[arg-type]
    lines.sort()
    return "\n".join(lines) + ("\n" if lines else "")


def _swap_fixes(quads: frozenset[Quad], a: str, b: str) -> bool:
    """True if exchanging blank labels a and b maps the quad set to itself."""

    def swap(term: Term) -> Term:
        if isinstance(term, BlankNode):
            if term.label == a:
                return BlankNode(b)
            if term.label == b:
                return BlankNode(a)
        return term

    for q in quads:
        t = q.triple
        swapped = Quad(Triple(swap(t.subject), t.predicate, swap(t.object)), q.graph)  # type: ignore[arg-type]
        if swapped not in quads:
            return False
    return True


def _solve(quads: frozenset[Quad], colors: dict[str, str], depth: int) -> tuple[str, dict[str, str]]:
    colors = _refine(quads, colors)
    classes = _classes(colors)
    multi = sorted((c, members) for c, members in classes.items() if len(members) > 1)
    if not multi:
        order = sorted(colors, key=lambda b: colors[b])
        mapping = {b: f"c{i}" for i, b in enumerate(order)}
        return _canonical_text(quads, mapping), mapping

    color, members = multi[0]
    lead = members[0]
    if all(_swap_fixes(quads, lead, other) for other in members[1:]):
        # Interchangeable twins: any choice yields the same canonical form.
        candidates = [lead]
    elif depth >= 6:
        candidates = [lead]
    else:
        candidates = members

    best: Optional[tuple[str, dict[str, str]]] = None
    for pick in candidates:
        branched = dict(colors)
        branched[pick] = colors[pick] + "!"
        result = _solve(quads, branched, depth + 1)
        if best is None or result[0] < best[0]:
            best = result
    assert best is not None
    return best


def canonical_label_map(value: Union[Graph, Dataset]) -> dict[str, str]:
    """Map each blank label to a canonical name c0..cN."""
    quads = _as_quads(value)
    blanks = _blanks(quads)
    if not blanks:
        return {}
    _, mapping = _solve(quads, {b: "000000" for b in blanks}, 0)
    return mapping


def canonical_nquads(value: Union[Graph, Dataset]) -> str:
    """Serialized N-Quads with canonically relabeled blanks; equal for
    isomorphic inputs (up to rare automorphic corner cases cut off by the
    branching depth limit)."""
    quads = _as_quads(value)
    blanks = _blanks(quads)
    if not blanks:
        return _canonical_text(quads, {})
    text, _ = _solve(quads, {b: "000000" for b in blanks}, 0)
    return text


def isomorphic(a: Union[Graph, Dataset], b: Union[Graph, Dataset]) -> bool:
    """True when a and b differ only by blank node naming."""
    qa, qb = _as_quads(a), _as_quads(b)
    if len(qa) != len(qb):
        return False
    ground_a = {q for q in qa if not _mentions_blank(q)}
    ground_b = {q for q in qb if not _mentions_blank(q)}
    if ground_a != ground_b:
        return False
    return canonical_nquads(a) == canonical_nquads(b)


def _mentions_blank(q: Quad) -> bool:
    t = q.triple
    return isinstance(t.subject, BlankNode) or isinstance(t.object, BlankNode)
