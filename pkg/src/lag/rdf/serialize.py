"""Deterministic serializers.

Output order is fixed: statements sort by the canonical N-Triples forms of
subject, predicate, object (graph name first for quads), so equal graphs
always serialize byte-identically.
"""

from __future__ import annotations

import re
from typing import Optional, Union

from lag.rdf.errors import UnsupportedSyntax
from lag.rdf.graph import Dataset, Graph
from lag.rdf.terms import IRI, BlankNode, Literal, Term, Triple
from lag.vocab import RDF, XSD

# Locals that compress safely: no dots, no leading digit, nothing that could
# interact with statement punctuation.
_SAFE_LOCAL = re.compile(r"^[A-Za-z_][A-Za-z0-9_-]*$")


def _pname(iri: str, prefixes: dict[str, str]) -> Optional[str]:
    best: Optional[tuple[str, str]] = None
    for prefix, ns in prefixes.items():
        if ns and iri.startswith(ns) and (best is None or len(ns) > len(best[1])):
            best = (prefix, ns)
    if best is None:
        return None
    prefix, ns = best
    local = iri[len(ns) :]
    if local and not _SAFE_LOCAL.match(local):
        return None
    return f"{prefix}:{local}"


def _turtle_term(term: Term, prefixes: dict[str, str]) -> str:
    if isinstance(term, IRI):
        return _pname(term.value, prefixes) or term.nt()
    if isinstance(term, BlankNode):
        return term.nt()
    assert isinstance(term, Literal)
    if term.language is not None or term.datatype == XSD.string:
        return term.nt()
    dt = _pname(term.datatype, prefixes)
    if dt is None:
        return term.nt()
    return term.nt().rsplit("^^", 1)[0] + "^^" + dt


def serialize_graph(g: Graph, syntax: str) -> str:
    if syntax == "ntriples":
        return "".join(t.nt() + "\n" for t in g)
    if syntax == "nquads":
        return "".join(t.nt() + "\n" for t in g)
    if syntax == "turtle":
        prefixes = g.prefixes
        lines = [f"@prefix {p}: <{ns}> ." for p, ns in sorted(prefixes.items())]
        if lines:
            lines.append("")
        for t in g:
            if t.predicate.value == RDF.type:
                pred = "a"
            else:
                pred = _turtle_term(t.predicate, prefixes)
            subj = _turtle_term(t.subject, prefixes)
            obj = _turtle_term(t.object, prefixes)
            lines.append(f"{subj} {pred} {obj} .")
        return "".join(line + "\n" for line in lines)
    raise ValueError(f"unknown syntax {syntax!r}")


def serialize_dataset(d: Dataset, syntax: str) -> str:
    if syntax == "nquads":
        return "".join(q.nq() + "\n" for q in d)
    named = [n for n in d.graph_names() if n is not None]
    if named:
        raise UnsupportedSyntax(
            f"{syntax} cannot express named graphs (found {named[0].nt()}); use nquads"
        )
    return serialize_graph(d.default_graph, syntax)


def serialize(value: Union[Graph, Dataset], syntax: str) -> str:
    if isinstance(value, Dataset):
        return serialize_dataset(value, syntax)
    return serialize_graph(value, syntax)
