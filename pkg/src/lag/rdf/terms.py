"""RDF terms (IRI, blank node, literal), triples, and quads.

All values are immutable and hashable. Canonical text forms follow N-Triples;
a plain ``xsd:string`` literal omits its datatype suffix so that the canonical
form round-trips through the parser's defaulting rule.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Union

from lag.rdf.errors import IRIError
from lag.vocab import RDF, XSD

_IRI_RE = re.compile(r'^[A-Za-z][A-Za-z0-9+.-]*:[^\x00-\x20<>"{}|^`\\]*$')
_BLANK_LABEL_RE = re.compile(r"^[A-Za-z0-9_][A-Za-z0-9_.-]*$")
_LANG_RE = re.compile(r"^[A-Za-z]{1,8}(-[A-Za-z0-9]{1,8})*$")

_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r", "\t": "\\t"}


def is_absolute_iri(value: str) -> bool:
    return bool(_IRI_RE.match(value))


def _escape_literal(lexical: str) -> str:
    out = []
    for ch in lexical:
        if ch in _ESCAPES:
            out.append(_ESCAPES[ch])
        elif ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04X}")
        else:
            out.append(ch)
    return "".join(out)


@dataclass(frozen=True, slots=True)
class IRI:
    value: str

    def __post_init__(self):
        if not is_absolute_iri(self.value):
            raise IRIError(f"not an absolute IRI: {self.value!r}")

    def nt(self) -> str:
        return f"<{self.value}>"

    def __repr__(self) -> str:
        return f"IRI({self.value!r})"


@dataclass(frozen=True, slots=True)
class BlankNode:
    label: str

    def __post_init__(self):
        if not _BLANK_LABEL_RE.match(self.label) or self.label.endswith("."):
            raise ValueError(f"invalid blank node label: {self.label!r}")

    def nt(self) -> str:
        return f"_:{self.label}"

    def __repr__(self) -> str:
        return f"BlankNode({self.label!r})"


@dataclass(frozen=True, slots=True)
class Literal:
    lexical: str
    datatype: str = field(default="")
    language: Optional[str] = None

    def __post_init__(self):
        if self.language is not None:
            if not _LANG_RE.match(self.language):
                raise ValueError(f"invalid language tag: {self.language!r}")
            object.__setattr__(self, "language", self.language.lower())
            object.__setattr__(self, "datatype", RDF.langString)
        elif not self.datatype:
            object.__setattr__(self, "datatype", XSD.string)
        elif not is_absolute_iri(self.datatype):
            raise IRIError(f"literal datatype is not an absolute IRI: {self.datatype!r}")

    def nt(self) -> str:
        body = f'"{_escape_literal(self.lexical)}"'
        if self.language is not None:
            return f"{body}@{self.language}"
        if self.datatype == XSD.string:
            return body
        return f"{body}^^<{self.datatype}>"

    def __repr__(self) -> str:
        return f"Literal({self.nt()})"


Term = Union[IRI, BlankNode, Literal]
Subject = Union[IRI, BlankNode]


@dataclass(frozen=True, slots=True)
class Triple:
    subject: Subject
    predicate: IRI
    object: Term

    def __post_init__(self):
        if isinstance(self.subject, Literal):
            raise ValueError("literal may not appear in subject position")
        if not isinstance(self.subject, (IRI, BlankNode)):
            raise TypeError(f"bad subject: {self.subject!r}")
        if not isinstance(self.predicate, IRI):
            raise ValueError("predicate must be an IRI")
        if not isinstance(self.object, (IRI, BlankNode, Literal)):
            raise TypeError(f"bad object: {self.object!r}")

    def nt(self) -> str:
        return f"{self.subject.nt()} {self.predicate.nt()} {self.object.nt()} ."

    def sort_key(self) -> tuple:
        return (self.subject.nt(), self.predicate.nt(), self.object.nt())


@dataclass(frozen=True, slots=True)
class Quad:
    triple: Triple
    graph: Optional[IRI] = None

    def nq(self) -> str:
        t = self.triple
        if self.graph is None:
            return t.nt()
        return f"{t.subject.nt()} {t.predicate.nt()} {t.object.nt()} {self.graph.nt()} ."

    def sort_key(self) -> tuple:
        g = "" if self.graph is None else self.graph.nt()
        return (g, *self.triple.sort_key())
