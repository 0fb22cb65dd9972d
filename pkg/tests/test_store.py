"""Session persistence: layout, hashes, corruption, byte-stable round trips."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from lag.boundary import EpistemicStatus
from lag.config import load_config
from lag.errors import NotFound, StoreCorrupt
from lag.pipeline import Runtime, add_opinion, review_triple, run_case
from lag.rdf import IRI, Triple, parse_document
from lag.store import GRAPH_FILE, META_FILE, TAGS_FILE, list_sessions, load_session, save_session
from lag.vocab import CAUS_NS, EX_NS

FIXTURES = Path(__file__).parent.parent / "fixtures"
CASE = (FIXTURES / "case.txt").read_text()

TRIP_FEVER = Triple(
    IRI(EX_NS + "trip_1"), IRI(CAUS_NS + "triggeringCauseFor"), IRI(EX_NS + "fever_1")
)


@pytest.fixture(scope="module")
def runtime() -> Runtime:
    return Runtime.from_config(load_config(FIXTURES / "lag.json"))


@pytest.fixture()
def saved(runtime, tmp_path):
    session = run_case(CASE, runtime, store_root=tmp_path)
    return session, tmp_path


def read_all(directory: Path) -> dict:
    return {f.name: f.read_bytes() for f in sorted(directory.iterdir())}


class TestLayout:
    def test_one_directory_per_session(self, saved):
        session, root = saved
        names = sorted(p.name for p in (root / session.id).iterdir())
        assert names == [GRAPH_FILE, META_FILE, TAGS_FILE]

    def test_graph_file_is_canonically_ordered_nquads(self, saved):
        session, root = saved
        text = (root / session.id / GRAPH_FILE).read_text()
        lines = text.strip().split("\n")
        assert all(line.endswith(" .") for line in lines)
        assert len(lines) == sum(len(p) for p in session.partitions.values())
        reparsed = parse_document(text, "nquads")
        assert lines == [q.nq() for q in reparsed.sorted_quads()]

    def test_meta_records_cross_hashes(self, saved):
        session, root = saved
        meta = json.loads((root / session.id / META_FILE).read_text())
        assert set(meta["hashes"]) == {GRAPH_FILE, TAGS_FILE}
        assert meta["status"] == "complete"
        assert meta["case_text"] == CASE
        assert meta["id"] == session.id

    def test_tags_file_holds_tags_then_events(self, saved):
        session, root = saved
        records = [
            json.loads(line)
            for line in (root / session.id / TAGS_FILE).read_text().strip().split("\n")
        ]
        kinds = [r["record"] for r in records]
        assert kinds == sorted(kinds, key=lambda k: k != "tag")
        assert sum(1 for k in kinds if k == "tag") == len(session.tags)
        assert sum(1 for k in kinds if k == "event") == len(session.audit)

    def test_list_sessions(self, saved, tmp_path):
        session, root = saved
        assert list_sessions(root) == [session.id]
        assert list_sessions(tmp_path / "nothing-here") == []


class TestRoundTrip:
    def test_save_load_save_is_byte_identical(self, saved, tmp_path):
        session, root = saved
        loaded = load_session(root, session.id)
        other = tmp_path / "copy"
        save_session(loaded, other)
        assert read_all(root / session.id) == read_all(other / session.id)

    def test_loaded_session_matches_in_substance(self, saved, runtime):
        session, root = saved
        loaded = load_session(root, session.id)
        assert loaded.partitions == session.partitions
        assert loaded.reviews == session.reviews
        assert loaded.audit == session.audit
        assert loaded.conflicts == session.conflicts
        assert loaded.clock.counter == session.clock.counter
        assert loaded.config_fingerprint == session.config_fingerprint
        tag = loaded.tags.get(TRIP_FEVER, "generated")
        assert tag.source == "Generated"
        assert tag.status is EpistemicStatus.PLAUSIBLE
        assert tag.tacit_kind == "CausalConsequence"

    def test_identical_runs_persist_identical_bytes(self, saved, runtime, tmp_path):
        session, root = saved
        rerun_root = tmp_path / "again"
        rerun = run_case(CASE, runtime, store_root=rerun_root)
        assert rerun.id == session.id
        assert read_all(root / session.id) == read_all(rerun_root / rerun.id)

    def test_reviews_survive_persistence(self, runtime, tmp_path):
        session = run_case(CASE, runtime)
        review_triple(session, TRIP_FEVER, "rejected", runtime.schema)
        save_session(session, tmp_path)
        loaded = load_session(tmp_path, session.id)
        assert loaded.review_state(TRIP_FEVER) == "rejected"
        assert TRIP_FEVER not in loaded.view_triples()
        assert TRIP_FEVER in loaded.view_triples(include_rejected=True)

    def test_opinion_session_round_trips(self, runtime, tmp_path):
        session = run_case(CASE, runtime)
        add_opinion(session, "expert-a", "In my view the presentation is acute.", runtime, blind=True)
        add_opinion(session, "expert-b", "I read this as a chronic process.", runtime, blind=True)
        save_session(session, tmp_path)
        loaded = load_session(tmp_path, session.id)
        assert loaded.partition_names() == session.partition_names()
        assert loaded.conflicts == session.conflicts
        assert loaded.partitions["opinion:expert-a"] == session.partitions["opinion:expert-a"]
        resaved = tmp_path / "resaved"
        save_session(loaded, resaved)
        assert read_all(tmp_path / session.id) == read_all(resaved / session.id)

    def test_failed_session_is_persisted_with_its_step(self, runtime, tmp_path):
        session = run_case(
            "A 44 year old woman presents with headache.", runtime, store_root=tmp_path
        )
        loaded = load_session(tmp_path, session.id)
        assert loaded.status == "failed-at-step:generate"
        assert [e for e in loaded.audit if e["event"] == "failure"]

    def test_empty_partitions_are_remembered(self, runtime, tmp_path):
        session = run_case("", runtime, store_root=tmp_path)
        loaded = load_session(tmp_path, session.id)
        assert loaded.status == "complete-empty"
        assert loaded.partition_names() == ["amodal", "base-context", "derived", "generated"]
        assert all(len(p) == 0 for p in loaded.partitions.values())


def rehash(directory: Path) -> None:
    """Recompute meta hashes after an intentional edit, keeping meta honest."""
    import hashlib

    meta = json.loads((directory / META_FILE).read_text())
    for name in (GRAPH_FILE, TAGS_FILE):
        meta["hashes"][name] = hashlib.sha256((directory / name).read_bytes()).hexdigest()
    (directory / META_FILE).write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n")


class TestCorruption:
    def test_unknown_session_is_not_found(self, saved):
        _, root = saved
        with pytest.raises(NotFound):
            load_session(root, "no-such-session")

    def test_missing_file_is_not_found(self, saved):
        session, root = saved
        (root / session.id / TAGS_FILE).unlink()
        with pytest.raises(NotFound, match=TAGS_FILE):
            load_session(root, session.id)

    def test_tampered_graph_is_detected(self, saved):
        session, root = saved
        path = root / session.id / GRAPH_FILE
        path.write_bytes(path.read_bytes() + b"# extra\n")
        with pytest.raises(StoreCorrupt, match=GRAPH_FILE):
            load_session(root, session.id)

    def test_tampered_tags_are_detected(self, saved):
        session, root = saved
        path = root / session.id / TAGS_FILE
        data = path.read_bytes().replace(b"generator", b"ghostwriter", 1)
        path.write_bytes(data)
        with pytest.raises(StoreCorrupt, match=TAGS_FILE):
            load_session(root, session.id)

    def test_meta_that_is_not_json_is_detected(self, saved):
        session, root = saved
        (root / session.id / META_FILE).write_text("{broken")
        with pytest.raises(StoreCorrupt, match="JSON"):
            load_session(root, session.id)

    def test_quad_outside_the_partition_namespace_is_detected(self, saved):
        session, root = saved
        directory = root / session.id
        path = directory / GRAPH_FILE
        lines = path.read_text().strip().split("\n")
        lines[0] = lines[0].rsplit("<urn:lag:partition:", 1)[0] + "<urn:elsewhere:g> ."
        path.write_text("\n".join(lines) + "\n")
        rehash(directory)
        with pytest.raises(StoreCorrupt, match="partition namespace"):
            load_session(root, session.id)

    def test_unknown_record_kind_is_detected(self, saved):
        session, root = saved
        directory = root / session.id
        path = directory / TAGS_FILE
        path.write_text(path.read_text() + '{"record": "note"}\n')
        rehash(directory)
        with pytest.raises(StoreCorrupt, match="unknown record"):
            load_session(root, session.id)

    def test_garbled_tag_line_is_detected(self, saved):
        session, root = saved
        directory = root / session.id
        path = directory / TAGS_FILE
        path.write_text(path.read_text() + "not json\n")
        rehash(directory)
        with pytest.raises(StoreCorrupt, match="not valid JSON"):
            load_session(root, session.id)
