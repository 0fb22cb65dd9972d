"""Minimal RDF stack: terms, graphs, parsing, serialization, isomorphism."""

from lag.rdf.canon import canonical_label_map, canonical_nquads, isomorphic
from lag.rdf.errors import IRIError, RdfError, RdfSyntaxError, UnsupportedSyntax
from lag.rdf.graph import (
    ANY,
    EMPTY_GRAPH,
    Dataset,
    Graph,
    match_pattern,
    merge_graphs,
)
from lag.rdf.parse import (
    SYNTAXES,
    parse_document,
    parse_nquads_line,
    parse_ntriples_line,
    parse_turtle,
)
from lag.rdf.serialize import serialize, serialize_dataset, serialize_graph
from lag.rdf.terms import (
    IRI,
    BlankNode,
    Literal,
    Quad,
    Subject,
    Term,
    Triple,
    is_absolute_iri,
)

__all__ = [
    "ANY",
    "EMPTY_GRAPH",
    "BlankNode",
    "Dataset",
    "Graph",
    "IRI",
    "IRIError",
    "Literal",
    "Quad",
    "RdfError",
    "RdfSyntaxError",
    "Subject",
    "SYNTAXES",
    "Term",
    "Triple",
    "UnsupportedSyntax",
    "canonical_label_map",
    "canonical_nquads",
    "is_absolute_iri",
    "isomorphic",
    "match_pattern",
    "merge_graphs",
    "parse_document",
    "parse_nquads_line",
    "parse_ntriples_line",
    "parse_turtle",
    "serialize",
    "serialize_dataset",
    "serialize_graph",
]
