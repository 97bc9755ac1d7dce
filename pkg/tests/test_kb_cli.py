import io
import json
import subprocess
import sys

import pytest

from intenlog.cli import main, repl
from intenlog.demo import build_demo_session, fixture_text
from intenlog.kb import (
    KBError,
    Session,
    dump_concepts,
    dump_kb,
    dump_memory,
    dump_world,
    load_kb,
)


class TestLoadKB:
    def test_demo_kb_declares_the_vocabulary(self):
        session, _ = build_demo_session()
        declared = {(p.name, p.arity) for p in session.vocabulary.declared()}
        assert {("Find", 4), ("Walk", 5), ("videoclips", 1), ("Know", 3)} <= declared

    def test_empty_file_is_an_empty_session(self):
        session = load_kb("")
        assert session.memory.atoms() == ()
        assert session.world.pred_base == {}

    def test_undeclared_predicate_in_assert(self):
        with pytest.raises(KBError, match="line 1.*undeclared"):
            load_kb("assert mystery(me)")

    def test_unknown_directive(self):
        with pytest.raises(KBError, match="unknown directive"):
            load_kb("frobnicate everything")

    def test_open_assert_rejected(self):
        with pytest.raises(KBError, match="open formula"):
            load_kb("predicate p/1\nassert p(?x)")

    def test_know_requires_abstracted_term(self):
        with pytest.raises(KBError, match="abstracted term"):
            load_kb("predicate p/0\nknow me")

    def test_comments_and_blanks_ignored(self):
        session = load_kb("# hello\n\npredicate p/0\nassert p()\n")
        assert session.eval_formula(session.parse("p()"))


class TestDumpKB:
    def test_round_trip_is_fixed_point(self):
        base = load_kb(fixture_text("chain.kb"))
        once = dump_kb(base)
        twice = dump_kb(load_kb(once))
        assert once == twice

    def test_round_trip_preserves_behavior(self):
        s1 = load_kb(fixture_text("chain.kb"))
        s2 = load_kb(dump_kb(s1))
        for s in (s1, s2):
            s.chain(0)
        a1 = sorted(
            (a.time.name, a.subject.name,
             s1.table.describe(a.content)) for a in s1.memory.atoms()
        )
        a2 = sorted(
            (a.time.name, a.subject.name,
             s2.table.describe(a.content)) for a in s2.memory.atoms()
        )
        assert a1 == a2

    def test_demo_session_dump_reloads(self):
        session, _ = build_demo_session()
        dumped = dump_kb(session)
        fresh = Session()
        fresh.templates = session.templates
        fresh.registry = session.registry
        fresh.world = fresh.world.__class__(
            particulars=fresh.world.particulars,
            know_source=fresh.memory_handle,
            grounding=fresh.registry,
        )
        load_kb(dumped, fresh)
        assert dump_kb(fresh) == dumped


class TestSessionCommands:
    def test_eval_and_answer(self):
        session = load_kb("predicate p/0\nassert p()")
        assert session.eval_formula(session.parse("p()")) is True
        assert session.answer(session.parse("p()")) == "yes"
        assert session.answer(session.parse("~ p()")) == "no"

    def test_chain_and_render(self):
        session = load_kb(fixture_text("chain.kb"))
        steps = session.chain(0)
        assert [s.rule for s in steps] == ["AxK", "AxK"]

    def test_consolidate_empties_temporary(self):
        session = load_kb(fixture_text("chain.kb"))
        session.chain(0)
        session.consolidate("t5")
        assert session.memory.temporary == ()

    def test_budget_flag_controls_introspection(self):
        for budget, expect in ((0, 0), (2, 2)):
            session = load_kb(fixture_text("chain.kb"))
            session.chain(budget)
            depths = [a.depth for a in session.memory.atoms()]
            assert max(depths) == expect

    def test_dumps_render(self):
        session = load_kb(fixture_text("chain.kb"))
        assert "raining()" in dump_concepts(session)
        assert "raining/0: ()" in dump_world(session)
        assert "k4 [temporary]" in dump_memory(session)


class TestRepl:
    def run(self, script, session=None):
        if session is None:
            session = Session()
        out = []
        repl(session, stdin=io.StringIO(script), report=lambda *a, **k: out.append(a[0] if a else ""))
        return out

    def test_eval_prints_truth_values(self):
        out = self.run("eval Top\neval ~ Top\nquit\n")
        assert out == ["t", "f"]

    def test_directives_then_answer(self):
        out = self.run(
            "predicate p/0\nassert p()\nanswer p()\nanswer ~ p()\nquit\n"
        )
        assert out == ["yes", "no"]

    def test_know_chain_consolidate_render(self):
        script = (
            "predicate p/0\n"
            "assert p()\n"
            "know << p() >>\n"
            "chain --budget 1\n"
            "consolidate --tau t3\n"
            "dump memory\n"
            "quit\n"
        )
        out = self.run(script)
        assert out[0] == "k1"
        assert out[1].startswith("1 new atom(s)")
        assert "consolidated at t3" in out[2]
        assert "[permanent]" in out[3]

    def test_render_command(self):
        session, info = build_demo_session()
        from intenlog.syntax import AbstractedTerm, free_var_tuple

        term = AbstractedTerm(info["command"], free_var_tuple(info["command"]), ())
        session.know_term(term)
        out = self.run("render k1\nquit\n", session)
        assert out == [
            "I (me) know that I am (me) finding videoclip such that the person "
            "walked from the couches in the room to the dining room table "
            "in the set of videoclips."
        ]

    def test_errors_are_reported_not_fatal(self):
        out = self.run("assert nope(me)\neval Top\nquit\n")
        assert out[0].startswith("error:")
        assert out[1] == "t"


class TestCliMain:
    def test_demo_exit_zero(self, capsys, tmp_path):
        trace = tmp_path / "trace.jsonl"
        assert main(["demo", "--trace-out", str(trace)]) == 0
        lines = [json.loads(l) for l in trace.read_text().splitlines()]
        assert lines[0]["rule"] == "experience"
        rules = {l["rule"] for l in lines}
        assert {"T_b", "T_a", "Ax4", "consolidate"} <= rules

    def test_demo_budget_zero_suppresses_introspection(self, capsys, tmp_path):
        trace = tmp_path / "trace.jsonl"
        assert main(["--budget", "0", "demo", "--trace-out", str(trace)]) == 0
        rules = {json.loads(l)["rule"] for l in trace.read_text().splitlines()}
        assert "Ax4" not in rules

    def test_demo_deterministic_traces(self, capsys, tmp_path):
        t1, t2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        main(["demo", "--trace-out", str(t1)])
        main(["demo", "--trace-out", str(t2)])
        assert t1.read_bytes() == t2.read_bytes()

    def test_entry_point_runs(self):
        proc = subprocess.run(
            [sys.executable, "-m", "intenlog.cli", "demo"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert "3 clips retrieved" in proc.stdout


def test_demo_empty_corpus_reports_no_derivation(monkeypatch, capsys):
    """With zero positive labels the open-reflexivity rule stays silent."""
    import intenlog.demo as demo_module

    original = demo_module.fixture_text

    def patched(name):
        if name == "corpus.txt":
            return original(name).replace("satisfies=true", "satisfies=false")
        return original(name)

    monkeypatch.setattr(demo_module, "fixture_text", patched)
    session, info = demo_module.build_demo_session()
    from intenlog.syntax import AbstractedTerm, free_var_tuple

    term = AbstractedTerm(info["command"], free_var_tuple(info["command"]), ())
    session.know_term(term)
    steps = session.chain(0)
    assert [s.rule for s in steps] == []
    assert len(session.memory.atoms()) == 1
