"""Parsers for N-Triples, N-Quads, and a pragmatic Turtle subset.

The Turtle subset covers prefix/base directives, ``a``, predicate-object
lists (``;``), object lists (``,``), typed and language-tagged literals, and
blank-node property lists. Collections ``( )``, numeric/boolean shorthand,
and single- or triple-quoted strings are rejected with a targeted error, so
every accepted token has one obvious reading.
"""

from __future__ import annotations

import re
from typing import Optional

from lag.rdf.errors import IRIError, RdfSyntaxError
from lag.rdf.graph import Dataset, Graph
from lag.rdf.terms import IRI, BlankNode, Literal, Quad, Term, Triple, is_absolute_iri
from lag.vocab import RDF

SYNTAXES = ("turtle", "ntriples", "nquads")

_STRING_UNESCAPES = {
    "t": "\t",
    "b": "\b",
    "n": "\n",
    "r": "\r",
    "f": "\f",
    '"': '"',
    "'": "'",
    "\\": "\\",
}


def _unescape_string(raw: str, line: int, col: int) -> str:
    out = []
    i = 0
    while i < len(raw):
        ch = raw[i]
        if ch != "\\":
            out.append(ch)
            i += 1
            continue
        if i + 1 >= len(raw):
            raise RdfSyntaxError("dangling escape in literal", line, col)
        esc = raw[i + 1]
        if esc in _STRING_UNESCAPES:
            out.append(_STRING_UNESCAPES[esc])
            i += 2
        elif esc == "u" or esc == "U":
            width = 4 if esc == "u" else 8
            hexpart = raw[i + 2 : i + 2 + width]
            if len(hexpart) != width or not re.fullmatch(r"[0-9A-Fa-f]+", hexpart):
                raise RdfSyntaxError(f"bad \\{esc} escape", line, col, raw[i : i + 2 + width])
            out.append(chr(int(hexpart, 16)))
            i += 2 + width
        else:
            raise RdfSyntaxError(f"unknown escape \\{esc}", line, col)
    return "".join(out)


def _unescape_iri(raw: str, line: int, col: int) -> str:
    if "\\" not in raw:
        return raw
    out = []
    i = 0
    while i < len(raw):
        ch = raw[i]
        if ch != "\\":
            out.append(ch)
            i += 1
            continue
        esc = raw[i + 1] if i + 1 < len(raw) else ""
        if esc in ("u", "U"):
            width = 4 if esc == "u" else 8
            hexpart = raw[i + 2 : i + 2 + width]
            if len(hexpart) != width or not re.fullmatch(r"[0-9A-Fa-f]+", hexpart):
                raise RdfSyntaxError(f"bad \\{esc} escape in IRI", line, col)
            out.append(chr(int(hexpart, 16)))
            i += 2 + width
        else:
            raise RdfSyntaxError("only \\u/\\U escapes are allowed in IRIs", line, col)
    return "".join(out)


# ---------------------------------------------------------------------------
# N-Triples / N-Quads (line-oriented)
# ---------------------------------------------------------------------------

_WS = re.compile(r"[ \t]+")
_IRIREF = re.compile(r'<([^<>"{}|^`\\\x00-\x20]*)>')
_BLANK = re.compile(r"_:([A-Za-z0-9_][A-Za-z0-9_.-]*)")
_STRING = re.compile(r'"((?:[^"\\\n\r]|\\.)*)"')
_LANGTAG = re.compile(r"@([A-Za-z]{1,8}(?:-[A-Za-z0-9]{1,8})*)")


class _LineScanner:
    def __init__(self, text: str, lineno: int):
        self.text = text
        self.pos = 0
        self.lineno = lineno

    def col(self) -> int:
        return self.pos + 1

    def skip_ws(self):
        m = _WS.match(self.text, self.pos)
        if m:
            self.pos = m.end()

    def at_end(self) -> bool:
        return self.pos >= len(self.text)

    def expect_dot(self):
        self.skip_ws()
        if self.at_end() or self.text[self.pos] != ".":
            raise RdfSyntaxError(
                "expected '.' terminator",
                self.lineno,
                self.col(),
                self.text[self.pos : self.pos + 10],
            )
        self.pos += 1
        self.skip_ws()
        if not self.at_end() and not self.text[self.pos] == "#":
            raise RdfSyntaxError(
                "trailing content after '.'", self.lineno, self.col(), self.text[self.pos : self.pos + 10]
            )

    def term(self, allow_literal: bool) -> Term:
        self.skip_ws()
        if self.at_end():
            raise RdfSyntaxError("unexpected end of statement", self.lineno, self.col())
        ch = self.text[self.pos]
        start_col = self.col()
        if ch == "<":
            m = _IRIREF.match(self.text, self.pos)
            if not m:
                raise RdfSyntaxError("malformed IRI reference", self.lineno, start_col, self.text[self.pos : self.pos + 15])
            self.pos = m.end()
            value = _unescape_iri(m.group(1), self.lineno, start_col)
            if not is_absolute_iri(value):
                raise IRIError(f"relative IRI without a base: {value!r}", self.lineno, start_col)
            return IRI(value)
        if ch == "_" :
            m = _BLANK.match(self.text, self.pos)
            if not m:
                raise RdfSyntaxError("malformed blank node label", self.lineno, start_col)
            label = m.group(1)
            if label.endswith("."):
                label = label.rstrip(".")
                m_end = self.pos + 2 + len(label)
            else:
                m_end = m.end()
            self.pos = m_end
            return BlankNode(label)
        if ch == '"':
            if not allow_literal:
                raise RdfSyntaxError("literal not allowed here", self.lineno, start_col)
            m = _STRING.match(self.text, self.pos)
            if not m:
                raise RdfSyntaxError("unterminated string literal", self.lineno, start_col)
            self.pos = m.end()
            lexical = _unescape_string(m.group(1), self.lineno, start_col)
            if self.text.startswith("^^", self.pos):
                self.pos += 2
                dm = _IRIREF.match(self.text, self.pos)
                if not dm:
                    raise RdfSyntaxError("expected datatype IRI after ^^", self.lineno, self.col())
                self.pos = dm.end()
                dt = _unescape_iri(dm.group(1), self.lineno, start_col)
                if not is_absolute_iri(dt):
                    raise IRIError(f"relative datatype IRI: {dt!r}", self.lineno, start_col)
                return Literal(lexical, datatype=dt)
            lm = _LANGTAG.match(self.text, self.pos)
            if lm:
                self.pos = lm.end()
                return Literal(lexical, language=lm.group(1))
            return Literal(lexical)
        raise RdfSyntaxError("unrecognized term", self.lineno, start_col, self.text[self.pos : self.pos + 10])


def parse_ntriples_line(line: str, lineno: int = 1) -> Optional[Triple]:
    """Parse one N-Triples statement. Returns None for blank/comment lines."""
    stripped = line.strip()
    if not stripped or stripped.startswith("#"):
        return None
    sc = _LineScanner(line.rstrip("\r"), lineno)
    subject = sc.term(allow_literal=False)
    predicate = sc.term(allow_literal=False)
    if not isinstance(predicate, IRI):
        raise RdfSyntaxError("predicate must be an IRI", lineno, 1)
    obj = sc.term(allow_literal=True)
    sc.expect_dot()
    return Triple(subject, predicate, obj)  # type: ignore[arg-type]


def parse_nquads_line(line: str, lineno: int = 1) -> Optional[Quad]:
    """Parse one N-Quads statement. Returns None for blank/comment lines."""
    stripped = line.strip()
    if not stripped or stripped.startswith("#"):
        return None
    sc = _LineScanner(line.rstrip("\r"), lineno)
    subject = sc.term(allow_literal=False)
    predicate = sc.term(allow_literal=False)
    if not isinstance(predicate, IRI):
        raise RdfSyntaxError("predicate must be an IRI", lineno, 1)
    obj = sc.term(allow_literal=True)
    sc.skip_ws()
    graph: Optional[IRI] = None
    if not sc.at_end() and sc.text[sc.pos] in "<_":
        gterm = sc.term(allow_literal=False)
        if not isinstance(gterm, IRI):
            raise RdfSyntaxError("graph name must be an IRI", lineno, sc.col())
        graph = gterm
    sc.expect_dot()
    return Quad(Triple(subject, predicate, obj), graph)  # type: ignore[arg-type]


# ---------------------------------------------------------------------------
# Turtle
# ---------------------------------------------------------------------------

_TOKEN_SPEC = [
    ("IRIREF", re.compile(r'<([^<>"{}|^`\\\x00-\x20]*)>')),
    ("STRING3", re.compile(r'"""')),
    ("STRING", re.compile(r'"((?:[^"\\\n\r]|\\.)*)"')),
    ("SQSTRING", re.compile(r"'")),
    ("BLANK", re.compile(r"_:([A-Za-z0-9_][A-Za-z0-9_.-]*)")),
    ("ATWORD", re.compile(r"@([A-Za-z]+(?:-[A-Za-z0-9]+)*)")),
    ("DTSEP", re.compile(r"\^\^")),
    # Prefixed name: optional prefix part, colon, optional local part.
    ("PNAME", re.compile(r"([A-Za-z][A-Za-z0-9_.-]*)?:([A-Za-z0-9_](?:[A-Za-z0-9_.-])*)?")),
    ("LBRACKET", re.compile(r"\[")),
    ("RBRACKET", re.compile(r"\]")),
    ("LPAREN", re.compile(r"\(")),
    ("RPAREN", re.compile(r"\)")),
    ("SEMI", re.compile(r";")),
    ("COMMA", re.compile(r",")),
    ("DOT", re.compile(r"\.")),
    ("WORD", re.compile(r"[A-Za-z]+")),
    ("NUMBERISH", re.compile(r"[+-]?[0-9][0-9.eE+-]*")),
]


class _Token:
    __slots__ = ("kind", "value", "line", "col")

    def __init__(self, kind: str, value, line: int, col: int):
        self.kind = kind
        self.value = value
        self.line = line
        self.col = col

    def __repr__(self) -> str:
        return f"Token({self.kind}, {self.value!r}, {self.line}:{self.col})"


def _tokenize_turtle(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line = 1
    line_start = 0
    pos = 0
    n = len(text)
    while pos < n:
        ch = text[pos]
        if ch == "\n":
            line += 1
            pos += 1
            line_start = pos
            continue
        if ch in " \t\r":
            pos += 1
            continue
        if ch == "#":
            nl = text.find("\n", pos)
            pos = n if nl == -1 else nl
            continue
        col = pos - line_start + 1
        for kind, rx in _TOKEN_SPEC:
            m = rx.match(text, pos)
            if not m:
                continue
            if kind == "STRING3":
                raise RdfSyntaxError("triple-quoted strings are unsupported", line, col)
            if kind == "SQSTRING":
                raise RdfSyntaxError("single-quoted strings are unsupported", line, col)
            if kind == "NUMBERISH":
                raise RdfSyntaxError(
                    "numeric literal shorthand is unsupported; use a quoted typed literal", line, col, m.group(0)
                )
            if kind in ("PNAME", "BLANK"):
                # Labels must not end with '.'; give trailing dots back to the stream.
                full = m.group(0)
                trimmed = full.rstrip(".")
                if trimmed != full:
                    m = rx.match(text, pos, pos + len(trimmed))
                    if not m or m.end() != pos + len(trimmed):
                        raise RdfSyntaxError("malformed name", line, col, full)
                if kind == "PNAME":
                    tokens.append(_Token("PNAME", (m.group(1) or "", m.group(2) or ""), line, col))
                else:
                    tokens.append(_Token("BLANK", m.group(1), line, col))
                pos = m.end()
                break
            if kind == "WORD":
                word = m.group(0)
                if word == "a":
                    tokens.append(_Token("A", "a", line, col))
                elif word.upper() in ("PREFIX", "BASE"):
                    tokens.append(_Token("DIRECTIVE", word.upper(), line, col))
                elif word in ("true", "false"):
                    raise RdfSyntaxError(
                        "boolean shorthand is unsupported; use a quoted typed literal", line, col, word
                    )
                else:
                    raise RdfSyntaxError("unrecognized token", line, col, word)
                pos = m.end()
                break
            if kind == "ATWORD":
                word = m.group(1)
                if word in ("prefix", "base"):
                    tokens.append(_Token("DIRECTIVE", word.upper(), line, col))
                else:
                    tokens.append(_Token("LANGTAG", word, line, col))
                pos = m.end()
                break
            value = m.group(1) if rx.groups else m.group(0)
            tokens.append(_Token(kind, value, line, col))
            pos = m.end()
            break
        else:
            raise RdfSyntaxError("unrecognized character", line, col, text[pos : pos + 10])
    tokens.append(_Token("EOF", None, line, (pos - line_start) + 1))
    return tokens


class _TurtleParser:
    def __init__(self, text: str):
        self.tokens = _tokenize_turtle(text)
        self.i = 0
        self.prefixes: dict[str, str] = {}
        self.base: Optional[str] = None
        self.triples: list[Triple] = []
        self._anon = 0
        # Anonymous labels must not capture labels the document spells out.
        self._taken = {t.value for t in self.tokens if t.kind == "BLANK"}

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def next(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str) -> _Token:
        tok = self.next()
        if tok.kind != kind:
            raise RdfSyntaxError(f"expected {kind}", tok.line, tok.col, str(tok.value))
        return tok

    def fresh_blank(self) -> BlankNode:
        while True:
            self._anon += 1
            label = f"b{self._anon}"
            if label not in self._taken:
                return BlankNode(label)

    def resolve_iri(self, raw: str, tok: _Token) -> IRI:
        value = _unescape_iri(raw, tok.line, tok.col)
        if not is_absolute_iri(value):
            if self.base is None:
                raise IRIError(f"relative IRI without a base: {value!r}", tok.line, tok.col)
            from urllib.parse import urljoin

            value = urljoin(self.base, value)
            if not is_absolute_iri(value):
                raise IRIError(f"IRI did not resolve to absolute form: {value!r}", tok.line, tok.col)
        return IRI(value)

    def expand_pname(self, tok: _Token) -> IRI:
        prefix, local = tok.value
        if prefix not in self.prefixes:
            raise RdfSyntaxError(f"undeclared prefix '{prefix}:'", tok.line, tok.col)
        value = self.prefixes[prefix] + local
        if not is_absolute_iri(value):
            raise IRIError(f"prefixed name expands to a non-absolute IRI: {value!r}", tok.line, tok.col)
        return IRI(value)

    def parse(self) -> tuple[list[Triple], dict[str, str]]:
        while self.peek().kind != "EOF":
            if self.peek().kind == "DIRECTIVE":
                self.directive()
            else:
                self.statement()
        return self.triples, self.prefixes

    def directive(self):
        tok = self.next()
        if tok.value == "PREFIX":
            name_tok = self.expect("PNAME")
            prefix, local = name_tok.value
            if local:
                raise RdfSyntaxError("prefix declaration must end with ':'", name_tok.line, name_tok.col)
            iri_tok = self.expect("IRIREF")
            target = _unescape_iri(iri_tok.value, iri_tok.line, iri_tok.col)
            if not is_absolute_iri(target):
                if self.base is not None:
                    from urllib.parse import urljoin

                    target = urljoin(self.base, target)
                else:
                    raise IRIError(f"prefix target is not absolute: {target!r}", iri_tok.line, iri_tok.col)
            self.prefixes[prefix] = target
        else:
            iri_tok = self.expect("IRIREF")
            target = _unescape_iri(iri_tok.value, iri_tok.line, iri_tok.col)
            if not is_absolute_iri(target):
                raise IRIError(f"base IRI is not absolute: {target!r}", iri_tok.line, iri_tok.col)
            self.base = target
        # '@prefix'/'@base' require the trailing dot; SPARQL-style does not.
        if self.peek().kind == "DOT":
            self.next()

    def statement(self):
        subject = self.subject()
        self.predicate_object_list(subject)
        self.expect("DOT")

    def subject(self):
        tok = self.peek()
        if tok.kind == "IRIREF":
            self.next()
            return self.resolve_iri(tok.value, tok)
        if tok.kind == "PNAME":
            self.next()
            return self.expand_pname(tok)
        if tok.kind == "BLANK":
            self.next()
            return BlankNode(tok.value)
        if tok.kind == "LBRACKET":
            return self.bnode_property_list()
        if tok.kind == "LPAREN":
            raise RdfSyntaxError("collections '( )' are unsupported", tok.line, tok.col)
        raise RdfSyntaxError("expected subject", tok.line, tok.col, str(tok.value))

    def verb(self) -> IRI:
        tok = self.peek()
        if tok.kind == "A":
            self.next()
            return IRI(RDF.type)
        if tok.kind == "IRIREF":
            self.next()
            return self.resolve_iri(tok.value, tok)
        if tok.kind == "PNAME":
            self.next()
            return self.expand_pname(tok)
        raise RdfSyntaxError("expected predicate", tok.line, tok.col, str(tok.value))

    def object_term(self) -> Term:
        tok = self.peek()
        if tok.kind == "IRIREF":
            self.next()
            return self.resolve_iri(tok.value, tok)
        if tok.kind == "PNAME":
            self.next()
            return self.expand_pname(tok)
        if tok.kind == "BLANK":
            self.next()
            return BlankNode(tok.value)
        if tok.kind == "LBRACKET":
            return self.bnode_property_list()
        if tok.kind == "LPAREN":
            raise RdfSyntaxError("collections '( )' are unsupported", tok.line, tok.col)
        if tok.kind == "STRING":
            self.next()
            lexical = _unescape_string(tok.value, tok.line, tok.col)
            nxt = self.peek()
            if nxt.kind == "DTSEP":
                self.next()
                dt_tok = self.next()
                if dt_tok.kind == "IRIREF":
                    dt = self.resolve_iri(dt_tok.value, dt_tok)
                elif dt_tok.kind == "PNAME":
                    dt = self.expand_pname(dt_tok)
                else:
                    raise RdfSyntaxError("expected datatype IRI after ^^", dt_tok.line, dt_tok.col)
                return Literal(lexical, datatype=dt.value)
            if nxt.kind == "LANGTAG":
                self.next()
                return Literal(lexical, language=nxt.value)
            return Literal(lexical)
        raise RdfSyntaxError("expected object", tok.line, tok.col, str(tok.value))

    def bnode_property_list(self):
        open_tok = self.expect("LBRACKET")
        node = self.fresh_blank()
        if self.peek().kind != "RBRACKET":
            self.predicate_object_list(node)
        close = self.next()
        if close.kind != "RBRACKET":
            raise RdfSyntaxError("unterminated blank node property list", open_tok.line, open_tok.col)
        return node

    def predicate_object_list(self, subject):
        while True:
            pred = self.verb()
            while True:
                obj = self.object_term()
                self.triples.append(Triple(subject, pred, obj))
                if self.peek().kind == "COMMA":
                    self.next()
                    continue
                break
            if self.peek().kind == "SEMI":
                while self.peek().kind == "SEMI":
                    self.next()
                if self.peek().kind in ("DOT", "RBRACKET"):
                    break
                continue
            break


def parse_turtle(text: str) -> Graph:
    parser = _TurtleParser(text)
    triples, prefixes = parser.parse()
    return Graph(triples, prefixes)


def parse_document(text: str, syntax: str) -> Dataset:
    """Parse a complete document into a Dataset.

    Triples without an explicit graph land in the default graph. Blank node
    labels are scoped to the returned value.
    """
    if syntax not in SYNTAXES:
        raise ValueError(f"unknown syntax {syntax!r}; expected one of {SYNTAXES}")
    if syntax == "turtle":
        g = parse_turtle(text)
        return Dataset((Quad(t, None) for t in g.triples), g.prefixes)
    quads: list[Quad] = []
    for lineno, line in enumerate(text.split("\n"), start=1):
        if syntax == "ntriples":
            t = parse_ntriples_line(line, lineno)
            if t is not None:
                quads.append(Quad(t, None))
        else:
            q = parse_nquads_line(line, lineno)
            if q is not None:
                quads.append(q)
    return Dataset(quads)
