"""Command-line contract: subcommand coverage, exit codes, pipe-safe output."""

from __future__ import annotations

import json
import socket
import subprocess
import sys
import time
from pathlib import Path

import httpx
import pytest

from lag.cli import main
from lag.rdf import parse_document, parse_turtle
from lag.store import list_sessions

FIXTURES = Path(__file__).parent.parent / "fixtures"
CONFIG = str(FIXTURES / "lag.json")
CASE = str(FIXTURES / "case.txt")
GOLDEN_NQ = FIXTURES / "golden" / "case-extended.nq"

TCF_FEVER = (
    "<http://example.org/case/trip_1> "
    "<http://example.org/ontology/caus#triggeringCauseFor> "
    "<http://example.org/case/fever_1> ."
)
AMODAL_AGE = (
    "<http://example.org/case/patient_1> <http://example.org/ontology/mdx#hasAge> "
    '"38"^^<http://www.w3.org/2001/XMLSchema#integer> .'
)


def run(capsys, *argv) -> tuple[int, str, str]:
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def portable_config() -> dict:
    raw = json.loads(Path(CONFIG).read_text())
    for key in ("schema", "lexicon", "kb_snapshot", "type_map"):
        raw[key] = str(FIXTURES / raw[key])
    raw["provider"]["script_dir"] = str(FIXTURES / raw["provider"]["script_dir"])
    raw["prompts"]["task"] = str(FIXTURES / raw["prompts"]["task"])
    raw["prompts"]["contract"] = str(FIXTURES / raw["prompts"]["contract"])
    raw["prompts"]["stages"] = [str(FIXTURES / s) for s in raw["prompts"]["stages"]]
    return raw


@pytest.fixture(scope="module")
def stored(tmp_path_factory):
    """A persisted golden run for read-only subcommands."""
    root = tmp_path_factory.mktemp("store")
    assert main(["extend", "--case", CASE, "--config", CONFIG, "--out", str(root)]) == 0
    return root, list_sessions(root)[0]


@pytest.fixture()
def fresh(tmp_path):
    """A private persisted run for subcommands that mutate the session."""
    assert main(["extend", "--case", CASE, "--config", CONFIG, "--out", str(tmp_path)]) == 0
    return tmp_path, list_sessions(tmp_path)[0]


@pytest.fixture()
def opinion_file(tmp_path):
    def write(name: str, text: str) -> str:
        path = tmp_path / f"{name}.txt"
        path.write_text(text)
        return str(path)

    return write


class TestUsage:
    def test_unknown_subcommand_exits_2(self, capsys):
        assert run(capsys, "nosuchcmd")[0] == 2

    def test_no_arguments_exits_2(self, capsys):
        assert run(capsys, )[0] == 2

    def test_help_exits_0_and_documents_exit_codes(self, capsys):
        code, out, _ = run(capsys, "--help")
        assert code == 0
        assert "exit codes" in out

    def test_unknown_flag_exits_2(self, capsys):
        assert run(capsys, "extract", "--case", CASE, "--bogus")[0] == 2

    def test_no_config_anywhere_exits_2(self, capsys, monkeypatch):
        monkeypatch.delenv("LAG_CONFIG", raising=False)
        code, out, err = run(capsys, "extract", "--case", CASE)
        assert code == 2
        assert "config" in err

    def test_env_var_supplies_the_config(self, capsys, monkeypatch):
        monkeypatch.setenv("LAG_CONFIG", CONFIG)
        code, out, _ = run(capsys, "extract", "--case", CASE)
        assert code == 0
        assert "amodal triples: 10" in out

    def test_flag_beats_the_env_var(self, capsys, monkeypatch):
        monkeypatch.setenv("LAG_CONFIG", "/nonexistent/lag.json")
        assert run(capsys, "extract", "--case", CASE, "--config", CONFIG)[0] == 0

    def test_unreadable_case_file_exits_2(self, capsys):
        code, _, err = run(capsys, "extend", "--case", "/nonexistent.txt", "--config", CONFIG)
        assert code == 2
        assert "case file" in err


class TestExtract:
    def test_human_summary(self, capsys):
        code, out, _ = run(capsys, "extract", "--case", CASE, "--config", CONFIG)
        assert code == 0
        assert "amodal triples: 10" in out

    def test_turtle_artifact_parses_back(self, capsys):
        code, out, _ = run(capsys, "extract", "--case", CASE, "--config", CONFIG, "--format", "turtle")
        assert code == 0
        assert len(parse_turtle(out).triples) == 10

    def test_json_artifact_lists_canonical_lines(self, capsys):
        _, out, _ = run(capsys, "extract", "--case", CASE, "--config", CONFIG, "--format", "json")
        lines = json.loads(out)
        assert len(lines) == 10
        assert all(line.endswith(" .") for line in lines)

    def test_warnings_stay_off_stdout_in_format_mode(self, capsys, tmp_path):
        case = tmp_path / "case.txt"
        case.write_text("The patient reports fever. Quantum flux readings were nominal today.")
        code, out, err = run(capsys, "extract", "--case", str(case), "--config", CONFIG, "--format", "turtle")
        assert code == 0
        assert "warning" not in out
        parse_turtle(out)


class TestExtend:
    def test_golden_run_prints_partition_counts(self, capsys):
        code, out, _ = run(capsys, "extend", "--case", CASE, "--config", CONFIG)
        assert code == 0
        assert "status: complete" in out
        assert "amodal: 10" in out
        assert "generated: 2" in out

    def test_persisted_store_matches_the_golden_graph(self, capsys, tmp_path):
        code, _, err = run(capsys, "extend", "--case", CASE, "--config", CONFIG, "--out", str(tmp_path))
        assert code == 0
        sid = list_sessions(tmp_path)[0]
        assert (tmp_path / sid / "extended.nq").read_text() == GOLDEN_NQ.read_text()
        assert "stored under" in err

    def test_json_summary_reports_partitions(self, capsys):
        _, out, _ = run(capsys, "extend", "--case", CASE, "--config", CONFIG, "--format", "json")
        payload = json.loads(out)
        assert payload["status"] == "complete"
        assert payload["partitions"] == {
            "amodal": 10,
            "base-context": 43,
            "derived": 6,
            "generated": 2,
        }
        assert payload["conflicts"]["count"] == 0

    def test_nquads_artifact_equals_the_golden_fixture(self, capsys):
        _, out, _ = run(capsys, "extend", "--case", CASE, "--config", CONFIG, "--format", "nquads")
        assert out == GOLDEN_NQ.read_text()

    def test_empty_case_completes_empty(self, capsys, tmp_path):
        case = tmp_path / "case.txt"
        case.write_text("")
        code, out, _ = run(capsys, "extend", "--case", str(case), "--config", CONFIG)
        assert code == 0
        assert "status: complete-empty" in out

    def test_unscripted_case_exits_3(self, capsys, tmp_path):
        case = tmp_path / "case.txt"
        case.write_text("The patient reports fever.")
        code, out, _ = run(capsys, "extend", "--case", str(case), "--config", CONFIG)
        assert code == 3
        assert "failed-at-step:generate" in out

    def test_blown_token_budget_exits_3(self, capsys, tmp_path):
        raw = portable_config()
        raw["token_budget"] = 40
        config = tmp_path / "lag.json"
        config.write_text(json.dumps(raw))
        assert run(capsys, "extend", "--case", CASE, "--config", str(config))[0] == 3

    def test_quarantined_candidates_exit_1(self, capsys, tmp_path):
        scripts = tmp_path / "scripts"
        scripts.mkdir()
        (scripts / "any.contains.txt").write_text("Case description:")
        (scripts / "any.completion.txt").write_text(
            "<http://example.org/case/patient_1> <http://example.org/nope#p> "
            "<http://example.org/case/fever_1> .\n"
        )
        raw = portable_config()
        raw["provider"]["script_dir"] = str(scripts)
        config = tmp_path / "lag.json"
        config.write_text(json.dumps(raw))
        code, out, _ = run(capsys, "extend", "--case", CASE, "--config", str(config))
        assert code == 1
        assert "quarantined: 1" in out


class TestLink:
    def test_fever_links_to_its_reference_entity(self, capsys):
        code, out, _ = run(capsys, "link", "--surface", "fever", "--config", CONFIG)
        assert code == 0
        assert out.startswith("http://www.wikidata.org/entity/Q38933\t")

    def test_json_exposes_score_components(self, capsys):
        _, out, _ = run(capsys, "link", "--surface", "fever", "--config", CONFIG, "--format", "json")
        payload = json.loads(out)
        assert payload[0]["entity"] == "http://www.wikidata.org/entity/Q38933"
        assert payload[0]["components"]["label_sim"] == 1.0

    def test_nonsense_surface_yields_nothing(self, capsys):
        code, out, _ = run(capsys, "link", "--surface", "zzzz", "--config", CONFIG)
        assert code == 0
        assert "no candidates" in out


class TestContext:
    def test_human_summary_reports_the_cap(self, capsys):
        code, out, _ = run(
            capsys, "context", "--seed", "http://www.wikidata.org/entity/Q38933", "--config", CONFIG
        )
        assert code == 0
        assert "context triples: 40" in out

    def test_hop_limit_override(self, capsys):
        _, out, _ = run(
            capsys,
            "context",
            "--seed",
            "http://www.wikidata.org/entity/Q38933",
            "--hops",
            "0",
            "--config",
            CONFIG,
        )
        assert "context triples: 0" in out

    def test_json_artifact_respects_the_cap_override(self, capsys):
        _, out, _ = run(
            capsys,
            "context",
            "--seed",
            "http://www.wikidata.org/entity/Q38933",
            "--cap",
            "5",
            "--format",
            "json",
            "--config",
            CONFIG,
        )
        assert len(json.loads(out)) == 5


class TestValidate:
    SCHEMA = str(FIXTURES / "ontology" / "mdx.ttl")

    def test_unknown_predicate_is_reported_and_exits_1(self, capsys, tmp_path):
        bad = tmp_path / "bad.nt"
        bad.write_text(
            "<http://example.org/case/a> <http://example.org/nope#p> "
            "<http://example.org/case/b> .\n"
        )
        code, out, _ = run(capsys, "validate", "--candidates", str(bad), "--schema", self.SCHEMA)
        assert code == 1
        report = json.loads(out)
        assert len(report["quarantined"]) == 1
        assert report["quarantined"][0]["code"] == "UnknownPredicate"

    def test_clean_candidates_exit_0(self, capsys, tmp_path):
        good = tmp_path / "good.nt"
        good.write_text(
            "<http://example.org/case/p> "
            "<http://www.w3.org/1999/02/22-rdf-syntax-ns#type> "
            "<http://example.org/ontology/mdx#Patient> .\n"
        )
        code, out, _ = run(capsys, "validate", "--candidates", str(good), "--schema", self.SCHEMA)
        assert code == 0
        report = json.loads(out)
        assert len(report["accepted"]) == 1
        assert report["accepted"][0]["status"] == "PLAUSIBLE"

    def test_mode_changes_the_verdict_on_untyped_nodes(self, capsys, tmp_path):
        candidate = tmp_path / "cand.nt"
        candidate.write_text(
            "<http://example.org/case/a> <http://example.org/ontology/mdx#hasFinding> "
            "<http://example.org/case/b> .\n"
        )
        strict = run(capsys, "validate", "--candidates", str(candidate), "--schema", self.SCHEMA)
        lenient = run(
            capsys,
            "validate",
            "--candidates",
            str(candidate),
            "--schema",
            self.SCHEMA,
            "--mode",
            "lenient",
        )
        assert strict[0] == 1
        assert lenient[0] == 0


class TestAggregate:
    def test_blind_experts_surface_conflicts(self, capsys, fresh, opinion_file):
        root, sid = fresh
        base = ["--store", str(root), "--session", sid, "--config", CONFIG, "--blind"]
        a = opinion_file("a", "In my view the presentation is acute.")
        b = opinion_file("b", "I read this as a chronic process.")
        assert run(capsys, "aggregate", *base, "--expert", "expert-a", "--opinion", a)[0] == 0
        code, out, _ = run(
            capsys, "aggregate", *base, "--expert", "expert-b", "--opinion", b, "--format", "json"
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["conflicts"]["count"] == 3
        assert payload["partitions"]["opinion:expert-a"] == 4
        assert payload["partitions"]["opinion:expert-b"] == 4

    def test_sighted_expert_gets_gated_and_exits_1(self, capsys, fresh, opinion_file):
        root, sid = fresh
        a = opinion_file("a", "In my view the presentation is acute.")
        c = opinion_file("c", "Chronic, with an airway cause.")
        base = ["--store", str(root), "--session", sid, "--config", CONFIG]
        assert run(capsys, "aggregate", *base, "--blind", "--expert", "expert-a", "--opinion", a)[0] == 0
        code, out, _ = run(capsys, "aggregate", *base, "--expert", "expert-c", "--opinion", c)
        assert code == 1
        assert "quarantined: 2" in out

    def test_malformed_expert_id_exits_2(self, capsys, fresh, opinion_file):
        root, sid = fresh
        a = opinion_file("a", "text")
        code = run(
            capsys,
            "aggregate",
            "--store",
            str(root),
            "--session",
            sid,
            "--config",
            CONFIG,
            "--expert",
            "bad expert!",
            "--opinion",
            a,
        )[0]
        assert code == 2

    def test_unknown_session_exits_4(self, capsys, tmp_path, opinion_file):
        a = opinion_file("a", "text")
        code = run(
            capsys,
            "aggregate",
            "--store",
            str(tmp_path),
            "--session",
            "nope",
            "--config",
            CONFIG,
            "--expert",
            "expert-a",
            "--opinion",
            a,
        )[0]
        assert code == 4


class TestReview:
    def test_rejection_hides_the_triple_from_exports(self, capsys, fresh):
        root, sid = fresh
        code, out, _ = run(
            capsys,
            "review",
            "--store",
            str(root),
            "--session",
            sid,
            "--config",
            CONFIG,
            "--triple",
            TCF_FEVER,
            "--verdict",
            "rejected",
        )
        assert code == 0
        assert "rejected:" in out
        _, visible, _ = run(capsys, "session", "export", "--store", str(root), "--session", sid)
        assert TCF_FEVER.replace(" .", "") not in visible
        _, full, _ = run(
            capsys, "session", "export", "--store", str(root), "--session", sid, "--include-rejected"
        )
        assert "triggeringCauseFor> <http://example.org/case/fever_1>" in full

    def test_unknown_triple_exits_1(self, capsys, fresh):
        root, sid = fresh
        code = run(
            capsys,
            "review",
            "--store",
            str(root),
            "--session",
            sid,
            "--config",
            CONFIG,
            "--triple",
            "<http://example.org/case/a> <http://example.org/ontology/mdx#confirms> "
            "<http://example.org/case/b> .",
            "--verdict",
            "rejected",
        )[0]
        assert code == 1

    def test_immutable_partition_exits_1(self, capsys, fresh):
        root, sid = fresh
        code = run(
            capsys,
            "review",
            "--store",
            str(root),
            "--session",
            sid,
            "--config",
            CONFIG,
            "--triple",
            AMODAL_AGE,
            "--verdict",
            "rejected",
        )[0]
        assert code == 1

    def test_bad_verdict_exits_2(self, capsys, fresh):
        root, sid = fresh
        code = run(
            capsys,
            "review",
            "--store",
            str(root),
            "--session",
            sid,
            "--config",
            CONFIG,
            "--triple",
            TCF_FEVER,
            "--verdict",
            "maybe",
        )[0]
        assert code == 2


class TestSession:
    def test_ls_lists_id_and_status(self, capsys, stored):
        root, sid = stored
        code, out, _ = run(capsys, "session", "ls", "--store", str(root))
        assert code == 0
        assert f"{sid}\tcomplete" in out

    def test_ls_on_an_empty_store_prints_nothing(self, capsys, tmp_path):
        code, out, _ = run(capsys, "session", "ls", "--store", str(tmp_path))
        assert code == 0
        assert out == ""

    def test_show_reports_conflict_entries(self, capsys, stored):
        root, sid = stored
        code, out, _ = run(capsys, "session", "show", "--store", str(root), "--session", sid)
        payload = json.loads(out)
        assert code == 0
        assert payload["conflict_entries"] == []
        assert payload["partitions"]["amodal"] == 10

    def test_show_without_session_exits_2(self, capsys, stored):
        root, _ = stored
        assert run(capsys, "session", "show", "--store", str(root))[0] == 2

    def test_export_partition_to_json(self, capsys, stored):
        root, sid = stored
        _, out, _ = run(
            capsys,
            "session",
            "export",
            "--store",
            str(root),
            "--session",
            sid,
            "--partition",
            "generated",
            "--format",
            "json",
        )
        views = json.loads(out)
        assert len(views) == 2
        assert all(v["source"] == "Generated" for v in views)
        assert all(v["partition"] == "generated" for v in views)

    def test_export_nquads_equals_the_stored_graph(self, capsys, stored):
        root, sid = stored
        _, out, _ = run(capsys, "session", "export", "--store", str(root), "--session", sid)
        assert out == (root / sid / "extended.nq").read_text()

    def test_export_turtle_parses_to_the_full_view(self, capsys, stored):
        root, sid = stored
        _, out, _ = run(
            capsys, "session", "export", "--store", str(root), "--session", sid, "--format", "turtle"
        )
        assert len(parse_turtle(out).triples) == 61

    def test_unknown_session_exits_4(self, capsys, stored):
        root, _ = stored
        assert run(capsys, "session", "export", "--store", str(root), "--session", "nope")[0] == 4


class TestServe:
    def test_serve_answers_health_over_loopback(self, tmp_path):
        with socket.socket() as probe:
            probe.bind(("127.0.0.1", 0))
            port = probe.getsockname()[1]
        process = subprocess.Popen(
            [
                sys.executable,
                "-m",
                "lag.cli",
                "serve",
                "--config",
                CONFIG,
                "--store",
                str(tmp_path),
                "--port",
                str(port),
            ],
            stdout=subprocess.DEVNULL,
            stderr=subprocess.DEVNULL,
        )
        try:
            deadline = time.monotonic() + 10
            last_error = None
            while time.monotonic() < deadline:
                try:
                    response = httpx.get(f"http://127.0.0.1:{port}/health", timeout=1.0)
                    assert response.json() == {"status": "ok"}
                    break
                except (httpx.TransportError, AssertionError) as exc:
                    last_error = exc
                    time.sleep(0.1)
            else:
                raise AssertionError(f"service never came up: {last_error}")
        finally:
            process.terminate()
            process.wait(timeout=10)
