"""Immutable Graph and Dataset values plus pattern matching and graph merge.

Graphs compare by triple set only; the prefix map is serialization metadata.
Iteration is always in canonical sort order so nothing downstream depends on
hash randomization.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Mapping, Optional, Sequence, Union

from lag.rdf.terms import IRI, BlankNode, Literal, Quad, Term, Triple


class _Wildcard:
    def __repr__(self) -> str:
        return "ANY"


ANY = _Wildcard()

_Pattern = Union[Term, None, _Wildcard]


class Graph:
    """An unordered set of triples with an attached prefix map."""

    __slots__ = ("_triples", "_prefixes", "_sorted")

    def __init__(self, triples: Iterable[Triple] = (), prefixes: Optional[Mapping[str, str]] = None):
        self._triples = frozenset(triples)
        self._prefixes = dict(prefixes) if prefixes else {}
        self._sorted: Optional[list[Triple]] = None

    @property
    def prefixes(self) -> dict[str, str]:
        return dict(self._prefixes)

    @property
    def triples(self) -> frozenset[Triple]:
        return self._triples

    def sorted_triples(self) -> list[Triple]:
        if self._sorted is None:
            self._sorted = sorted(self._triples, key=Triple.sort_key)
        return list(self._sorted)

    def __iter__(self) -> Iterator[Triple]:
        return iter(self.sorted_triples())

    def __len__(self) -> int:
        return len(self._triples)

    def __contains__(self, t: Triple) -> bool:
        return t in self._triples

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Graph) and self._triples == other._triples

    def __hash__(self) -> int:
        return hash(self._triples)

    def __repr__(self) -> str:
        return f"Graph({len(self._triples)} triples)"

    def union(self, other: "Graph") -> "Graph":
        """Plain set union. Blank-node capture is the caller's concern;
        use merge_graphs to standardize blank scopes apart."""
        prefixes = {**other._prefixes, **self._prefixes}
        return Graph(self._triples | other._triples, prefixes)

    def with_prefixes(self, prefixes: Mapping[str, str]) -> "Graph":
        merged = {**self._prefixes, **prefixes}
        return Graph(self._triples, merged)

    def subjects(self) -> list[Term]:
        return sorted({t.subject for t in self._triples}, key=lambda x: x.nt())

    def nodes(self) -> list[Term]:
        """All IRI/blank subjects and objects, canonically ordered."""
        found = {t.subject for t in self._triples}
        found |= {t.object for t in self._triples if not isinstance(t.object, Literal)}
        return sorted(found, key=lambda x: x.nt())

    def match(self, s: _Pattern = ANY, p: _Pattern = ANY, o: _Pattern = ANY) -> list[Triple]:
        out = [
            t
            for t in self._triples
            if (s is ANY or t.subject == s)
            and (p is ANY or t.predicate == p)
            and (o is ANY or t.object == o)
        ]
        out.sort(key=Triple.sort_key)
        return out

    def objects(self, s: _Pattern = ANY, p: _Pattern = ANY) -> list[Term]:
        return [t.object for t in self.match(s, p, ANY)]


EMPTY_GRAPH = Graph()


class Dataset:
    """A map from graph name (None = default graph) to Graph."""

    __slots__ = ("_quads", "_prefixes", "_by_s", "_by_p", "_by_o", "_by_g")

    def __init__(self, quads: Iterable[Quad] = (), prefixes: Optional[Mapping[str, str]] = None):
        self._quads = frozenset(quads)
        self._prefixes = dict(prefixes) if prefixes else {}
        self._by_s: dict = {}
        self._by_p: dict = {}
        self._by_o: dict = {}
        self._by_g: dict = {}
        for q in self._quads:
            t = q.triple
            self._by_s.setdefault(t.subject, set()).add(q)
            self._by_p.setdefault(t.predicate, set()).add(q)
            self._by_o.setdefault(t.object, set()).add(q)
            self._by_g.setdefault(q.graph, set()).add(q)

    @classmethod
    def from_graphs(cls, graphs: Mapping[Optional[IRI], Graph], prefixes: Optional[Mapping[str, str]] = None) -> "Dataset":
        quads = []
        merged_prefixes = dict(prefixes) if prefixes else {}
        for name, g in graphs.items():
            for prefix, ns in g.prefixes.items():
                merged_prefixes.setdefault(prefix, ns)
            quads.extend(Quad(t, name) for t in g.triples)
        return cls(quads, merged_prefixes)

    @property
    def prefixes(self) -> dict[str, str]:
        return dict(self._prefixes)

    @property
    def quads(self) -> frozenset[Quad]:
        return self._quads

    def sorted_quads(self) -> list[Quad]:
        return sorted(self._quads, key=Quad.sort_key)

    def __iter__(self) -> Iterator[Quad]:
        return iter(self.sorted_quads())

    def __len__(self) -> int:
        return len(self._quads)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Dataset) and self._quads == other._quads

    def __hash__(self) -> int:
        return hash(self._quads)

    def __repr__(self) -> str:
        return f"Dataset({len(self._quads)} quads, {len(self.graph_names())} named graphs)"

    def graph_names(self) -> list[IRI]:
        names = {q.graph for q in self._quads if q.graph is not None}
        return sorted(names, key=lambda x: x.value)

    def graph(self, name: Optional[IRI]) -> Graph:
        quads = self._by_g.get(name, set())
        return Graph((q.triple for q in quads), self._prefixes)

    @property
    def default_graph(self) -> Graph:
        return self.graph(None)

    def union_graph(self) -> Graph:
        """All triples regardless of graph, as one Graph."""
        return Graph((q.triple for q in self._quads), self._prefixes)

    def match(
        self,
        s: _Pattern = ANY,
        p: _Pattern = ANY,
        o: _Pattern = ANY,
        g: _Pattern = ANY,
    ) -> frozenset[Quad]:
        candidate_sets = []
        if s is not ANY:
            candidate_sets.append(self._by_s.get(s, set()))
        if p is not ANY:
            candidate_sets.append(self._by_p.get(p, set()))
        if o is not ANY:
            candidate_sets.append(self._by_o.get(o, set()))
        if g is not ANY:
            candidate_sets.append(self._by_g.get(g, set()))
        if not candidate_sets:
            return self._quads
        candidate_sets.sort(key=len)
        result = set(candidate_sets[0])
        for cs in candidate_sets[1:]:
            result &= cs
        return frozenset(result)


def match_pattern(
    d: Dataset,
    s: _Pattern = ANY,
    p: _Pattern = ANY,
    o: _Pattern = ANY,
    g: _Pattern = ANY,
) -> frozenset[Quad]:
    return d.match(s, p, o, g)


def _relabel_blanks(g: Graph, prefix: str) -> Graph:
    def fix(term: Term) -> Term:
        if isinstance(term, BlankNode):
            return BlankNode(prefix + term.label)
        return term

    triples = [
        Triple(fix(t.subject), t.predicate, fix(t.object))  # type: ignore[arg-type]
        for t in g.triples
    ]
    return Graph(triples, g.prefixes)


def _has_blanks(g: Graph) -> bool:
    return any(
        isinstance(t.subject, BlankNode) or isinstance(t.object, BlankNode) for t in g.triples
    )


def merge_graphs(targets: Sequence[Graph]) -> Graph:
    """Set union with blank nodes standardized apart.

    Inputs equal as values are merged once, so merging a graph with itself is
    the identity. When at most one distinct input carries blank nodes there is
    no capture risk and labels are kept as-is.
    """
    distinct: list[Graph] = []
    for g in targets:
        if not any(g == seen for seen in distinct):
            distinct.append(g)

    blank_bearing = [i for i, g in enumerate(distinct) if _has_blanks(g)]
    prepared: list[Graph] = []
    for i, g in enumerate(distinct):
        if len(blank_bearing) > 1 and i in blank_bearing:
            prepared.append(_relabel_blanks(g, f"m{i}_"))
        else:
            prepared.append(g)

    triples: set[Triple] = set()
    prefixes: dict[str, str] = {}
    for g in prepared:
        triples |= g.triples
        for prefix, ns in g.prefixes.items():
            prefixes.setdefault(prefix, ns)
    return Graph(triples, prefixes)
