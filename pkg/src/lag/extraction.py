"""Case text to entity graph, by frame lexicon or by completion provider.

The rule extractor is the deterministic baseline: a lexicon of token
patterns anchors frames in the text, entity IRIs are minted per distinct
surface mention, and role templates attach typed attributes and links. The
provider-backed extractor produces the same graph shape from a completion
and runs it through the same validation gate.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .boundary import validate_candidates
from .errors import EmptyCompletion, ExtractionRejected, LexiconError
from .gateway import parse_candidate_triples
from .ontology import Schema
from .rdf import Graph, IRI, Literal, Triple, is_absolute_iri
from .vocab import FIXTURE_PREFIXES, RDF, EX_NS

_TOKEN = re.compile(r"[A-Za-z0-9]+")
_SENTENCE_END = re.compile(r"(?<=[.!?])\s+")


def tokenize(text: str) -> list[tuple[str, int, int]]:
    """Lowercased word tokens with character spans. Punctuation separates."""
    return [(m.group().lower(), m.start(), m.end()) for m in _TOKEN.finditer(text)]


# ---------------------------------------------------------------------------
# Lexicon
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RoleTemplate:
    """One role to fill when a pattern matches.

    Selectors: capN takes the N-th wildcard capture as a literal (datatype
    properties only), text:<value> emits a fixed literal, from:<lemma> links
    the nearest occurrence of that lemma to this node.
    """

    predicate: str
    selector: str


@dataclass(frozen=True)
class LexiconEntry:
    pattern: tuple  # tuple[str, ...], "*" matches any single token
    frame: str
    roles: tuple  # tuple[RoleTemplate, ...]
    lemma: str


@dataclass(frozen=True)
class FrameLexicon:
    entries: tuple  # tuple[LexiconEntry, ...]


_LEMMA_OK = re.compile(r"^[a-z0-9_]+$")


def load_lexicon(path, schema: Optional[Schema] = None) -> FrameLexicon:
    """Read a tab-separated lexicon file.

    Columns: pattern, frame IRI, role templates ("pred|selector" joined by
    ";", may be empty), optional lemma (defaults to the last non-wildcard
    pattern token). Blank lines and #-comments are skipped.
    """
    entries: list[LexiconEntry] = []
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) < 2:
            raise LexiconError(f"{path}:{lineno}: expected at least pattern and frame")
        pattern = tuple(tok.lower() for tok in cols[0].split())
        if not pattern:
            raise LexiconError(f"{path}:{lineno}: empty trigger pattern")
        frame = cols[1].strip()
        if not is_absolute_iri(frame):
            raise LexiconError(f"{path}:{lineno}: frame is not an absolute IRI: {frame!r}")
        wildcards = sum(1 for tok in pattern if tok == "*")
        roles: list[RoleTemplate] = []
        role_col = cols[2].strip() if len(cols) > 2 else ""
        if role_col:
            for chunk in role_col.split(";"):
                chunk = chunk.strip()
                if not chunk:
                    continue
                if "|" not in chunk:
                    raise LexiconError(f"{path}:{lineno}: role needs 'predicate|selector': {chunk!r}")
                pred, selector = chunk.split("|", 1)
                pred, selector = pred.strip(), selector.strip()
                if not is_absolute_iri(pred):
                    raise LexiconError(f"{path}:{lineno}: role predicate is not an IRI: {pred!r}")
                cap = re.fullmatch(r"cap(\d+)", selector)
                if cap:
                    n = int(cap.group(1))
                    if not 1 <= n <= wildcards:
                        raise LexiconError(
                            f"{path}:{lineno}: {selector} but pattern has {wildcards} wildcard(s)"
                        )
                    if schema is not None:
                        pd = schema.properties.get(pred)
                        if pd is not None and pd.kind != "datatype":
                            raise LexiconError(
                                f"{path}:{lineno}: capture selector on object property {pred}"
                            )
                elif not selector.startswith(("text:", "from:")):
                    raise LexiconError(f"{path}:{lineno}: unknown selector {selector!r}")
                roles.append(RoleTemplate(pred, selector))
        lemma = cols[3].strip() if len(cols) > 3 and cols[3].strip() else ""
        if not lemma:
            plain = [tok for tok in pattern if tok != "*"]
            if not plain:
                raise LexiconError(f"{path}:{lineno}: all-wildcard pattern needs a lemma column")
            lemma = plain[-1]
        if not _LEMMA_OK.fullmatch(lemma):
            raise LexiconError(f"{path}:{lineno}: lemma must be [a-z0-9_]+: {lemma!r}")
        entries.append(LexiconEntry(pattern, frame, tuple(roles), lemma))
    return FrameLexicon(tuple(entries))


# ---------------------------------------------------------------------------
# Matching
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FrameOccurrence:
    frame: str
    span: tuple  # (start, end) character offsets
    lemma: str
    entry_index: int
    captures: tuple  # wildcard surface strings, in pattern order
    surface: str

    def bindings(self, lexicon: FrameLexicon) -> dict:
        """role predicate -> capture/text surface string or from-lemma."""
        out = {}
        for role in lexicon.entries[self.entry_index].roles:
            if role.selector.startswith("cap"):
                out[role.predicate] = self.captures[int(role.selector[3:]) - 1]
            elif role.selector.startswith("text:"):
                out[role.predicate] = role.selector[5:]
            else:
                out[role.predicate] = role.selector[5:]
        return out


def match_frames(text: str, lexicon: FrameLexicon) -> list[FrameOccurrence]:
    """All non-overlapping frame matches, longest first at each position."""
    tokens = tokenize(text)
    hits: list[tuple[int, int, int]] = []  # (token start, length, entry index)
    for idx, entry in enumerate(lexicon.entries):
        size = len(entry.pattern)
        for start in range(len(tokens) - size + 1):
            window = tokens[start : start + size]
            if all(p == "*" or p == tok for p, (tok, _, _) in zip(entry.pattern, window)):
                hits.append((start, size, idx))

    hits.sort(key=lambda h: (h[0], -h[1], h[2]))
    taken: list[tuple[int, int]] = []
    selected: list[FrameOccurrence] = []
    for start, size, idx in hits:
        end = start + size
        if any(start < t_end and t_start < end for t_start, t_end in taken):
            continue
        taken.append((start, end))
        entry = lexicon.entries[idx]
        window = tokens[start:end]
        captures = tuple(
            tok for p, (tok, _, _) in zip(entry.pattern, window) if p == "*"
        )
        span = (window[0][1], window[-1][2])
        selected.append(
            FrameOccurrence(
                frame=entry.frame,
                span=span,
                lemma=entry.lemma,
                entry_index=idx,
                captures=captures,
                surface=" ".join(tok for tok, _, _ in window),
            )
        )
    return selected


# ---------------------------------------------------------------------------
# Graph assembly
# ---------------------------------------------------------------------------


@dataclass
class AmodalGraph:
    graph: Graph
    spans: dict = field(default_factory=dict)  # node IRI string -> (start, end)
    text_hash: str = ""
    warnings: list = field(default_factory=list)


def _sentences(text: str) -> list[tuple[int, int]]:
    spans = []
    pos = 0
    for m in _SENTENCE_END.finditer(text):
        spans.append((pos, m.start()))
        pos = m.end()
    if pos < len(text):
        spans.append((pos, len(text)))
    return spans


def extract_amodal(text: str, lexicon: FrameLexicon, schema: Schema) -> AmodalGraph:
    """Build the entity graph the matched frames describe.

    Minting is deterministic: mentions sharing (lemma, surface) collapse to
    one node, numbered per lemma by first occurrence. Every run over the
    same inputs serializes identically.
    """
    occurrences = match_frames(text, lexicon)
    node_for: dict[tuple, IRI] = {}
    counters: dict[str, int] = {}
    spans: dict[str, tuple] = {}
    occ_node: list[IRI] = []
    for occ in occurrences:
        key = (occ.lemma, occ.surface)
        node = node_for.get(key)
        if node is None:
            counters[occ.lemma] = counters.get(occ.lemma, 0) + 1
            node = IRI(f"{EX_NS}{occ.lemma}_{counters[occ.lemma]}")
            node_for[key] = node
            spans[node.value] = occ.span
        occ_node.append(node)

    triples: set[Triple] = set()
    warnings: list[str] = []
    rdf_type = IRI(RDF.type)
    for i, occ in enumerate(occurrences):
        node = occ_node[i]
        triples.add(Triple(node, rdf_type, IRI(occ.frame)))
        for role in lexicon.entries[occ.entry_index].roles:
            pd = schema.properties.get(role.predicate)
            datatype = pd.range if pd is not None and pd.kind == "datatype" else ""
            if role.selector.startswith("cap"):
                value = occ.captures[int(role.selector[3:]) - 1]
                triples.add(Triple(node, IRI(role.predicate), Literal(value, datatype=datatype)))
            elif role.selector.startswith("text:"):
                value = role.selector[5:]
                triples.add(Triple(node, IRI(role.predicate), Literal(value, datatype=datatype)))
            else:
                wanted = role.selector[5:]
                source = _nearest(occurrences, occ_node, i, wanted)
                if source is None:
                    warnings.append(
                        f"no '{wanted}' mention to anchor {role.predicate} for {node.value}"
                    )
                else:
                    triples.add(Triple(source, IRI(role.predicate), node))

    for s_start, s_end in _sentences(text):
        sentence = text[s_start:s_end]
        if not _TOKEN.search(sentence):
            continue
        if not any(s_start <= occ.span[0] < s_end for occ in occurrences):
            preview = " ".join(sentence.split())[:60]
            warnings.append(f"lexicon gap, no frames matched: {preview!r}")

    return AmodalGraph(
        graph=Graph(triples, prefixes=FIXTURE_PREFIXES),
        spans=spans,
        text_hash=hashlib.sha256(text.encode("utf-8")).hexdigest(),
        warnings=warnings,
    )


def _nearest(occurrences, occ_node, i: int, lemma: str) -> Optional[IRI]:
    # Nearest preceding mention with the lemma, else nearest following.
    before = [j for j in range(i) if occurrences[j].lemma == lemma]
    if before:
        return occ_node[before[-1]]
    after = [j for j in range(i + 1, len(occurrences)) if occurrences[j].lemma == lemma]
    if after:
        return occ_node[after[0]]
    return None


# ---------------------------------------------------------------------------
# Provider-backed extraction
# ---------------------------------------------------------------------------


def extraction_prompt(text: str, schema: Schema) -> str:
    """Fixed template asking a provider for the entity graph as N-Triples."""
    lines = [
        "Read the case text and emit its entity graph as N-Triples with",
        "absolute IRIs. Mint case entities under " + EX_NS + " and use only",
        "the vocabulary below.",
        "",
        "Classes:",
    ]
    lines.extend(f"  <{c}>" for c in sorted(schema.classes))
    lines.append("Properties:")
    lines.extend(f"  <{p}>" for p in sorted(schema.properties))
    lines.extend(["", "Case text:", text.strip(), ""])
    return "\n".join(lines)


def llm_extract(
    text: str,
    provider,
    schema: Schema,
    max_repairs: int = 1,
    reject_threshold: float = 0.5,
    audit=None,
) -> AmodalGraph:
    """Same contract as extract_amodal, sourced from a completion.

    Only triples that survive strict boundary validation enter the graph;
    nodes carry whole-text spans since a completion has no offsets.
    """
    prompt = extraction_prompt(text, schema)
    completion = provider.complete(prompt, audit=audit)
    warnings: list[str] = []
    try:
        parsed = parse_candidate_triples(
            completion, provider, prompt, max_repairs=max_repairs, audit=audit
        )
    except EmptyCompletion:
        warnings.append("provider returned no parseable triples")
        return AmodalGraph(
            graph=Graph([], prefixes=FIXTURE_PREFIXES),
            spans={},
            text_hash=hashlib.sha256(text.encode("utf-8")).hexdigest(),
            warnings=warnings,
        )
    for line, reason in parsed.rejected_lines:
        warnings.append(f"rejected line: {line.strip()} ({reason})")

    report = validate_candidates(parsed.accepted_syntax, schema, Graph([]), mode="strict")
    total = len(parsed.accepted_syntax)
    rejected = len(report.quarantined)
    if total and rejected / total > reject_threshold:
        raise ExtractionRejected(
            f"{rejected} of {total} candidate triples failed validation",
            rejected=rejected,
            total=total,
        )
    for triple, issue in report.quarantined:
        warnings.append(f"quarantined: {triple.nt()} ({issue.code}: {issue.detail})")

    accepted = report.accepted_triples
    spans = {}
    for t in accepted:
        for term in (t.subject, t.object):
            if isinstance(term, IRI) and term.value.startswith(EX_NS):
                spans.setdefault(term.value, (0, len(text)))
    return AmodalGraph(
        graph=Graph(accepted, prefixes=FIXTURE_PREFIXES),
        spans=spans,
        text_hash=hashlib.sha256(text.encode("utf-8")).hexdigest(),
        warnings=warnings,
    )
