"""Case pipeline: extract, link, contextualise, generate, gate, derive."""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from .boundary import asserted_tag, derive, extracted_tag, validate_candidates
from .config import LagConfig, ProviderSettings
from .errors import EmptyCompletion, ImmutablePartition, LagError, UnknownTriple
from .extraction import FrameLexicon, extract_amodal, load_lexicon
from .gateway import (
    HttpProvider,
    MockProvider,
    PromptBundle,
    build_prompt,
    complete,
    parse_candidate_triples,
)
from .gateway import fingerprint as prompt_fingerprint
from .ontology import Schema, load_schema
from .rdf import (
    ANY,
    Dataset,
    Graph,
    IRI,
    Triple,
    parse_document,
    parse_ntriples_line,
    parse_turtle,
    serialize,
)
from .reconcile import (
    LabelIndex,
    build_label_index,
    extract_context,
    harmonise,
    link_entity,
    load_type_map,
)
from .session import (
    IMMUTABLE_PARTITIONS,
    ConflictEntry,
    SessionState,
    session_id,
)
from .vocab import (
    AMODAL_PARTITION,
    BASE_CONTEXT_PARTITION,
    DERIVED_PARTITION,
    EX_NS,
    FIXTURE_PREFIXES,
    GENERATED_PARTITION,
    OWL,
    RDF,
    opinion_partition,
)

_NODE_SUFFIX = re.compile(r"_[0-9]+$")
_EXPERT_ID = re.compile(r"^[A-Za-z0-9][A-Za-z0-9_.-]*$")

# Rule order matters: lifted edges feed the typing pass.
_DERIVE_RULES = ("subproperty-lift", "type-propagation")


@dataclass
class Runtime:
    """Artifacts loaded once from a config and shared by its sessions."""

    config: LagConfig
    schema: Schema
    lexicon: FrameLexicon
    kb: Dataset
    index: LabelIndex
    type_map: dict
    provider: object
    task_text: str
    contract_text: str
    stage_texts: tuple
    ontology_excerpt: str
    schema_warnings: tuple = ()

    @classmethod
    def from_config(cls, config: LagConfig, provider=None) -> Runtime:
        tbox = parse_turtle(Path(config.schema_path).read_text(encoding="utf-8"))
        schema, warnings = load_schema(tbox)
        lexicon = load_lexicon(config.lexicon_path, schema)
        kb_text = Path(config.kb_path).read_text(encoding="utf-8")
        kb = Dataset(parse_document(kb_text, "ntriples").quads, prefixes=FIXTURE_PREFIXES)
        return cls(
            config=config,
            schema=schema,
            lexicon=lexicon,
            kb=kb,
            index=build_label_index(kb, language=config.language),
            type_map=load_type_map(config.type_map_path),
            provider=provider if provider is not None else make_provider(config.provider),
            task_text=Path(config.task_path).read_text(encoding="utf-8").strip(),
            contract_text=_contract_text(
                Path(config.contract_path).read_text(encoding="utf-8").strip(), schema
            ),
            stage_texts=tuple(
                Path(p).read_text(encoding="utf-8").strip() for p in config.stage_paths
            ),
            ontology_excerpt=serialize(tbox, "turtle").strip(),
            schema_warnings=tuple(warnings),
        )


def make_provider(settings: ProviderSettings):
    if settings.kind == "mock":
        return MockProvider(settings.script_dir)
    return HttpProvider(
        settings.base_url,
        settings.model,
        auth_env=settings.auth_env,
        timeout=settings.timeout,
        retries=settings.retries,
    )


def _contract_text(preamble: str, schema: Schema) -> str:
    """Close the output vocabulary: every usable predicate, spelled out."""
    lines = [preamble, "", "Allowed predicates:", f"<{RDF.type}>"]
    lines.extend(f"<{p}>" for p in sorted(schema.properties))
    lines.append("")
    lines.append("Allowed classes:")
    lines.extend(f"<{c}>" for c in sorted(schema.classes))
    return "\n".join(lines)


def node_surface(node: IRI) -> str:
    """Human surface for a minted node: ex:sore_throat_2 reads 'sore throat'."""
    local = node.value[len(EX_NS):] if node.value.startswith(EX_NS) else node.value.rsplit("/", 1)[-1]
    return _NODE_SUFFIX.sub("", local).replace("_", " ")


def _typed_nodes(graph: Graph, schema: Schema) -> list:
    """Minted nodes with their full superclass closure, in canonical order."""
    rdf_type = IRI(RDF.type)
    direct: dict = {}
    for t in graph.match(ANY, rdf_type, ANY):
        if isinstance(t.subject, IRI) and t.subject.value.startswith(EX_NS) and isinstance(t.object, IRI):
            direct.setdefault(t.subject, set()).add(t.object.value)
    out = []
    for node in sorted(direct, key=lambda n: n.nt()):
        types: set = set()
        for c in direct[node]:
            types.update(schema.superclasses(c))
        out.append((node, frozenset(types)))
    return out


def _link(typed_nodes: list, already: list, runtime: Runtime) -> tuple:
    """Best reference entity per node; bridges are the owl:sameAs triples."""
    config = runtime.config
    links = []
    bridges = []
    for node, types in typed_nodes:
        candidates = link_entity(
            node_surface(node),
            types,
            already,
            runtime.index,
            runtime.kb,
            type_map=runtime.type_map,
            weights=config.link_weights,
            threshold=config.link_threshold,
        )
        if not candidates:
            continue
        best = candidates[0]
        links.append((node, best))
        bridges.append(Triple(node, IRI(OWL.sameAs), IRI(best.entity)))
        if best.entity not in already:
            already.append(best.entity)
    return links, bridges


def _session_audit(session: SessionState):
    def cb(event: dict) -> None:
        payload = dict(event)
        name = payload.pop("event", "llm")
        session.log(name, **payload)

    return cb


def _generate(session, runtime, task_text, known_graph, case_graph):
    """One gated completion round: prompt, complete, parse."""
    config = runtime.config
    bundle = PromptBundle(
        task_instruction=task_text,
        ontology_excerpt=runtime.ontology_excerpt,
        context_facts=serialize(known_graph, "ntriples").strip(),
        amodal_kg=serialize(case_graph, "ntriples").strip(),
        output_contract=runtime.contract_text,
        heuristic_stages=runtime.stage_texts,
        token_budget=config.token_budget,
    )
    prompt = build_prompt(bundle)
    session.log("prompt", fingerprint=prompt_fingerprint(prompt), characters=len(prompt))
    completion = complete(runtime.provider, prompt, audit=_session_audit(session))
    try:
        parsed = parse_candidate_triples(
            completion,
            provider=runtime.provider,
            prompt=prompt,
            max_repairs=config.max_repairs,
            audit=_session_audit(session),
        )
    except EmptyCompletion:
        # A reply with nothing parseable is an empty proposal, not a failure.
        session.log("parse", accepted=0, rejected=0, note="no parseable triples")
        return []
    session.log(
        "parse",
        accepted=len(parsed.accepted_syntax),
        rejected=len(parsed.rejected_lines),
        repair_rounds=parsed.repair_rounds_used,
    )
    for line, reason in sorted(parsed.rejected_lines):
        session.log("reject-line", line=line, reason=reason)
    return parsed.accepted_syntax


def _gate(session, runtime, candidates, context_graph, partition, agent):
    report = validate_candidates(
        candidates,
        runtime.schema,
        context_graph,
        mode=runtime.config.boundary_mode,
        agent=agent,
        timestamp=session.clock.tick(),
    )
    for warning in report.warnings:
        session.log("warning", step="validate", message=warning)
    admitted = 0
    for t, tag in report.accepted:
        if session.add_triple(partition, t, tag):
            admitted += 1
    for t, issue in report.quarantined:
        session.quarantine.append(
            {"triple": t.nt(), "code": issue.code, "detail": issue.detail, "agent": agent}
        )
    session.log(
        "validate",
        mode=report.mode,
        admitted=admitted,
        quarantined=len(report.quarantined),
    )


def _merge_context(session, runtime, links, slice_):
    result = harmonise(
        session.extended_view(),
        links,
        slice_,
        policy="sameAs",
        partition_base=session.partition_base,
    )
    stamp = session.clock.tick()
    merged = 0
    for quad in result.added:
        if session.add_triple(BASE_CONTEXT_PARTITION, quad.triple, asserted_tag("base-skg", stamp)):
            merged += 1
    session.log("harmonise", merged=merged, links=len(links))


def _rederive(session: SessionState, schema: Schema) -> None:
    """Rebuild the derived partition as the closure of current premises."""
    stamp = session.clock.tick()
    pool = session.premise_triples()
    fresh: dict = {}
    for rule in _DERIVE_RULES:
        for t, tag in derive(rule, pool + list(fresh.items()), schema, timestamp=stamp):
            fresh[t] = tag
    current = set(session.partition(DERIVED_PARTITION))
    retracted = 0
    for t in sorted(current - set(fresh), key=Triple.sort_key):
        session.retract_derived(t)
        session.log("retract-derived", triple=t.nt(), reason="no surviving derivation")
        retracted += 1
    added = 0
    for t in sorted(fresh, key=Triple.sort_key):
        tag = fresh[t]
        if t in current:
            if session.tags.get(t, DERIVED_PARTITION) != tag:
                session.tags.drop(t, DERIVED_PARTITION)
                session.tags.put(t, DERIVED_PARTITION, tag)
        elif session.add_triple(DERIVED_PARTITION, t, tag):
            added += 1
    session.log("derive", added=added, retracted=retracted)


def _cascade_reject(session: SessionState, rejected: Triple) -> int:
    """Retract derived facts whose recorded premises lost the given triple."""
    removed = {rejected}
    retracted = 0
    changed = True
    while changed:
        changed = False
        for t in sorted(session.partition(DERIVED_PARTITION), key=Triple.sort_key):
            tag = session.tags.get(t, DERIVED_PARTITION)
            if tag is None or not any(p in removed for p in tag.premises):
                continue
            session.retract_derived(t)
            session.log("retract-derived", triple=t.nt(), reason="premise rejected")
            removed.add(t)
            retracted += 1
            changed = True
    return retracted


def _existing_bridge_targets(session: SessionState) -> list:
    same_as = IRI(OWL.sameAs)
    targets = {
        t.object.value
        for t in session.partition(BASE_CONTEXT_PARTITION)
        if t.predicate == same_as and isinstance(t.object, IRI)
    }
    return sorted(targets)


def _run_steps(session, stages) -> None:
    """Drive named steps; a failure freezes the session at that step."""
    for name, fn in stages:
        try:
            if fn() == "stop":
                return
        except LagError as e:
            session.status = f"failed-at-step:{name}"
            session.log("failure", step=name, error=type(e).__name__, message=str(e))
            return
    session.status = "complete"
    session.log("finish", status="complete")


def run_case(
    case_text: str, runtime: Runtime, store_root=None, blind_default: bool = False
) -> SessionState:
    """Extend one case: the full path from raw text to a tagged, derived KG."""
    config = runtime.config
    fingerprint = config.fingerprint()
    session = SessionState(
        id=session_id(fingerprint, case_text),
        case_text=case_text,
        config_fingerprint=fingerprint,
        partition_base=config.partition_base,
        blind_default=blind_default,
        functional_predicates=tuple(config.functional_predicates),
        opposing_pairs=tuple(tuple(pair) for pair in config.opposing_pairs),
        prefixes=dict(FIXTURE_PREFIXES),
    )
    for name in (AMODAL_PARTITION, GENERATED_PARTITION, BASE_CONTEXT_PARTITION, DERIVED_PARTITION):
        session.partition(name)
    for warning in runtime.schema_warnings:
        session.log("warning", step="load-schema", message=warning)

    state: dict = {}

    def step_extract():
        amodal = extract_amodal(case_text, runtime.lexicon, runtime.schema)
        for warning in amodal.warnings:
            session.log("warning", step="extract-amodal", message=warning)
        stamp = session.clock.tick()
        for t in amodal.graph.sorted_triples():
            session.add_triple(AMODAL_PARTITION, t, extracted_tag("rule-extractor", stamp))
        session.log("extract-amodal", triples=len(amodal.graph.triples))
        state["amodal"] = amodal
        if not amodal.graph.triples:
            # Nothing recognisable in the case: done, and no provider call.
            session.status = "complete-empty"
            session.log("finish", status="complete-empty")
            return "stop"
        return None

    def step_link():
        typed = _typed_nodes(state["amodal"].graph, runtime.schema)
        links, bridges = _link(typed, [], runtime)
        session.log(
            "link-entities",
            linked={node.value: cand.entity for node, cand in links},
        )
        state["links"], state["bridges"] = links, bridges

    def step_context():
        seeds = sorted({cand.entity for _, cand in state["links"]})
        slice_ = extract_context(
            runtime.kb, [IRI(s) for s in seeds], config.hop_limit, config.allowlist, config.cap
        )
        session.log("extract-context", seeds=seeds, triples=len(slice_.graph.triples))
        state["slice"] = slice_

    def step_generate():
        known = Graph(
            list(state["slice"].graph.triples) + state["bridges"], FIXTURE_PREFIXES
        )
        task = runtime.task_text + "\n\nCase description:\n" + case_text.strip()
        state["candidates"] = _generate(session, runtime, task, known, state["amodal"].graph)
        state["known"] = known

    def step_validate():
        context_graph = Graph(
            list(state["amodal"].graph.triples) + list(state["known"].triples),
            FIXTURE_PREFIXES,
        )
        _gate(session, runtime, state["candidates"], context_graph, GENERATED_PARTITION, "generator")

    def step_harmonise():
        _merge_context(session, runtime, state["links"], state["slice"])

    def step_derive():
        _rederive(session, runtime.schema)

    def step_conflicts():
        session.conflicts = detect_conflicts(session, runtime.schema)

    _run_steps(
        session,
        [
            ("extract-amodal", step_extract),
            ("link-entities", step_link),
            ("extract-context", step_context),
            ("generate", step_generate),
            ("validate", step_validate),
            ("harmonise", step_harmonise),
            ("derive", step_derive),
            ("detect-conflicts", step_conflicts),
        ],
    )
    _maybe_save(session, store_root)
    return session


def add_opinion(
    session: SessionState,
    expert_id: str,
    opinion_text: str,
    runtime: Runtime,
    blind: bool = False,
    store_root=None,
) -> SessionState:
    """Fold one expert's reading of the case into its own partition."""
    if not _EXPERT_ID.match(expert_id):
        raise ValueError(f"unusable expert id {expert_id!r}")
    config = runtime.config
    name = opinion_partition(expert_id)
    session.partition(name)
    session.log("opinion-start", expert=expert_id, blind=blind)

    state: dict = {}

    def visible_triples() -> list:
        if blind:
            out = set(session.partition(AMODAL_PARTITION))
            out |= set(session.partition(BASE_CONTEXT_PARTITION))
            return sorted(out, key=Triple.sort_key)
        return sorted(session.view_triples(), key=Triple.sort_key)

    def step_extract():
        opinion = extract_amodal(opinion_text, runtime.lexicon, runtime.schema)
        for warning in opinion.warnings:
            session.log("warning", step="extract-amodal", message=warning)
        stamp = session.clock.tick()
        for t in opinion.graph.sorted_triples():
            session.add_triple(name, t, extracted_tag(expert_id, stamp))
        state["opinion"] = opinion

    def step_link():
        typed = _typed_nodes(state["opinion"].graph, runtime.schema)
        links, bridges = _link(typed, _existing_bridge_targets(session), runtime)
        state["links"], state["bridges"] = links, bridges

    def step_context():
        seeds = sorted({cand.entity for _, cand in state["links"]})
        state["slice"] = extract_context(
            runtime.kb, [IRI(s) for s in seeds], config.hop_limit, config.allowlist, config.cap
        )

    def step_generate():
        known = Graph(
            visible_triples()
            + list(state["slice"].graph.triples)
            + state["bridges"],
            FIXTURE_PREFIXES,
        )
        task = (
            runtime.task_text
            + "\n\nCase description:\n"
            + session.case_text.strip()
            + f"\n\nExpert opinion ({expert_id}):\n"
            + opinion_text.strip()
        )
        state["candidates"] = _generate(session, runtime, task, known, state["opinion"].graph)
        state["known"] = known

    def step_validate():
        context_graph = Graph(
            list(state["known"].triples) + list(state["opinion"].graph.triples),
            FIXTURE_PREFIXES,
        )
        _gate(session, runtime, state["candidates"], context_graph, name, expert_id)

    def step_harmonise():
        _merge_context(session, runtime, state["links"], state["slice"])

    def step_derive():
        _rederive(session, runtime.schema)

    def step_conflicts():
        session.conflicts = detect_conflicts(session, runtime.schema)

    _run_steps(
        session,
        [
            ("extract-amodal", step_extract),
            ("link-entities", step_link),
            ("extract-context", step_context),
            ("generate", step_generate),
            ("validate", step_validate),
            ("harmonise", step_harmonise),
            ("derive", step_derive),
            ("detect-conflicts", step_conflicts),
        ],
    )
    _maybe_save(session, store_root)
    return session


def review_triple(
    session: SessionState,
    triple,
    verdict: str,
    schema: Schema,
    reviewer: str = "reviewer",
) -> str:
    """Accept or reject one generated or opinion triple, with consequences."""
    if verdict not in ("accepted", "rejected"):
        raise ValueError(f"verdict must be accepted or rejected, not {verdict!r}")
    if isinstance(triple, str):
        triple = parse_ntriples_line(triple)
    holders = session.find_partitions(triple)
    if not holders:
        raise UnknownTriple(f"no partition holds {triple.nt()}")
    if all(p in IMMUTABLE_PARTITIONS for p in holders):
        raise ImmutablePartition(
            f"{triple.nt()} lives in {', '.join(holders)} and cannot be reviewed"
        )
    session.reviews[triple.nt()] = verdict
    session.log("review", triple=triple.nt(), verdict=verdict, reviewer=reviewer)
    if verdict == "rejected":
        _cascade_reject(session, triple)
    # The restore pass covers both directions: re-derive what an acceptance
    # enables, drop what a rejection invalidated beyond the recorded chains.
    _rederive(session, schema)
    session.conflicts = detect_conflicts(session, schema)
    return verdict


def _agents_for(session: SessionState, triples) -> tuple:
    agents: set = set()
    for t in triples:
        for name in session.find_partitions(t):
            tag = session.tags.get(t, name)
            if tag is not None:
                agents.add(tag.agent)
    return tuple(sorted(agents))


def detect_conflicts(session: SessionState, schema: Schema) -> list:
    """Cross-contributor disagreements visible in the extended view."""
    view = Graph(session.view_triples())
    rdf_type = IRI(RDF.type)
    found: dict = {}

    def record(kind: str, triples: list, detail: str) -> None:
        lines = tuple(sorted({t.nt() for t in triples}))
        if len(lines) < 2:
            return
        key = (kind, lines)
        if key not in found:
            found[key] = ConflictEntry(
                kind=kind, triples=lines, agents=_agents_for(session, triples), detail=detail
            )

    types_of: dict = {}
    for t in view.match(ANY, rdf_type, ANY):
        if isinstance(t.object, IRI):
            types_of.setdefault(t.subject, []).append(t)
    for node in sorted(types_of, key=lambda n: n.nt()):
        rows = types_of[node]
        for pair in sorted(schema.disjoint_pairs, key=sorted):
            lo, hi = sorted(pair)
            lo_hits = [t for t in rows if lo in schema.superclasses(t.object.value)]
            hi_hits = [t for t in rows if hi in schema.superclasses(t.object.value)]
            if lo_hits and hi_hits:
                record(
                    "DisjointTypes",
                    lo_hits + hi_hits,
                    f"{node.nt()} typed with disjoint classes {lo} and {hi}",
                )

    for predicate in session.functional_predicates:
        by_subject: dict = {}
        for t in view.match(ANY, IRI(predicate), ANY):
            by_subject.setdefault(t.subject, []).append(t)
        for subject in sorted(by_subject, key=lambda n: n.nt()):
            rows = by_subject[subject]
            if len({t.object for t in rows}) > 1:
                record(
                    "FunctionalPropertyClash",
                    rows,
                    f"{subject.nt()} carries multiple values for {predicate}",
                )

    for left, right in session.opposing_pairs:
        for t in view.match(ANY, IRI(left), ANY):
            mirror = Triple(t.subject, IRI(right), t.object)
            if mirror in view.triples:
                record(
                    "OpposingPredicates",
                    [t, mirror],
                    f"{left} and {right} both asserted between {t.subject.nt()} and {t.object.nt()}",
                )

    return sorted(found.values(), key=lambda e: (e.kind, e.triples))


def _maybe_save(session: SessionState, store_root) -> None:
    if store_root is None:
        return
    from .store import save_session

    save_session(session, store_root)
