import pytest

from intenlog.epistemic import (
    EpistemicError,
    Memory,
    MemoryHandle,
    add_rule,
    answer,
    apply_4,
    apply_K,
    apply_T_ground,
    apply_T_open,
    assert_experience,
    consolidate,
    decompose_implication,
    flatten_conjuncts,
    forward_chain,
    implication_formula,
    stamp_formula,
)
from intenlog.prp import ConceptTable
from intenlog.relalg import Relation
from intenlog.syntax import (
    AbstractedTerm,
    Atom,
    Conj,
    Constant,
    Neg,
    TimeValue,
    Variable,
    Vocabulary,
    free_var_tuple,
)
from intenlog.worlds import World, eval_sentence, satisfying_assignments


class Scenario:
    """A lean retrieval world: three positive clips out of five, the
    query reified, no natural-language layer."""

    def __init__(self):
        self.vocabulary = Vocabulary()
        for name, arity in (("Find", 4), ("videoclips", 1), ("Walk", 5)):
            self.vocabulary.declare(name, arity)
        self.table = ConceptTable(self.vocabulary)
        t = self.table
        self.query = Atom(
            self.vocabulary.resolve("Walk", 5),
            (
                TimeValue("in_past"),
                Constant("person"),
                Constant("from_the_couches_in_the_room"),
                Constant("NULL"),
                Constant("to_the_dining_room_table"),
            ),
        )
        self.query_concept = t.interpret(self.query)
        self.clips = [t.particular(f"clip{i}") for i in range(1, 6)]
        self.positive = self.clips[:3]
        now, me = t.particular("in_present"), t.particular("me")
        self.memory_handle = MemoryHandle()
        world = World(
            particulars=frozenset(t.particulars()), know_source=self.memory_handle
        )
        u_clips = t.interpret(
            Atom(self.vocabulary.resolve("videoclips", 1), (Variable("y"),))
        )
        world = world.with_base(
            u_clips, Relation(1, frozenset((c,) for c in self.clips))
        )
        u_find = t.intern_atom(
            self.vocabulary.resolve("Find", 4),
            tuple(("v", f"x{i}") for i in range(1, 5)),
        )
        world = world.with_base(
            u_find,
            Relation(
                4, frozenset((now, me, c, self.query_concept) for c in self.positive)
            ),
        )
        world = world.with_base(self.query_concept, Relation(0, frozenset({()})))
        self.world = world
        self.command = Conj(
            Atom(
                self.vocabulary.resolve("Find", 4),
                (TimeValue("in_present"), Constant("me"), Variable("y"),
                 AbstractedTerm(self.query)),
            ),
            Atom(self.vocabulary.resolve("videoclips", 1), (Variable("y"),)),
            ((1, 1),),
        )
        self.term = AbstractedTerm(self.command, free_var_tuple(self.command), ())

    @property
    def memory(self):
        return self.memory_handle.memory

    @memory.setter
    def memory(self, value):
        self.memory_handle.memory = value

    def experience(self):
        self.memory, atom, _ = assert_experience(
            self.memory, self.term, {}, self.table
        )
        return atom

    def chain(self, budget=3):
        self.memory, steps = forward_chain(
            self.memory, self.world, self.table, budget
        )
        return steps


@pytest.fixture
def scenario():
    return Scenario()


class TestAssertExperience:
    def test_present_self_temporary(self, scenario):
        atom = scenario.experience()
        assert atom.time.name == "in_present"
        assert atom.subject.name == "me"
        assert atom.content.arity == 1
        assert scenario.memory.temporary == (atom,)

    def test_duplicate_is_noop(self, scenario):
        scenario.experience()
        before = scenario.memory
        scenario.experience()
        assert scenario.memory is before

    def test_ground_sentence_content(self, scenario):
        term = AbstractedTerm(scenario.query)
        mem, atom, _ = assert_experience(Memory(), term, {}, scenario.table)
        assert atom.content.arity == 0


class TestReflexivityGround:
    def test_recovers_sentence(self, scenario):
        term = AbstractedTerm(scenario.query)
        mem, atom, _ = assert_experience(Memory(), term, {}, scenario.table)
        sentence = apply_T_ground(atom, scenario.table)
        assert sentence == scenario.query
        assert eval_sentence(scenario.world, sentence, scenario.table)

    def test_open_content_not_applicable(self, scenario):
        atom = scenario.experience()
        assert apply_T_ground(atom, scenario.table) is None


class TestReflexivityOpen:
    def test_enumerates_three_instances(self, scenario):
        atom = scenario.experience()
        content, instances = apply_T_open(atom, scenario.world, scenario.table)
        assert content.arity == 0
        assert len(instances) == 3
        rows = satisfying_assignments(scenario.world, scenario.command, scenario.table)
        assert len(rows) == 3
        y = free_var_tuple(scenario.command)[0]
        from intenlog.syntax import substitute

        expected = [
            substitute(scenario.command, {y: scenario.table.element_to_term(g[y])})
            for g in rows
        ]
        assert instances == expected

    def test_singleton_has_no_conj_node(self, scenario):
        t = scenario.table
        only = Relation(
            4,
            frozenset(
                {
                    (
                        t.particular("in_present"),
                        t.particular("me"),
                        scenario.clips[0],
                        scenario.query_concept,
                    )
                }
            ),
        )
        u_find = t.intern_atom(
            scenario.vocabulary.resolve("Find", 4),
            tuple(("v", f"x{i}") for i in range(1, 5)),
        )
        world = scenario.world.with_base(u_find, only)
        atom = scenario.experience()
        content, instances = apply_T_open(atom, world, t)
        assert len(instances) == 1
        assert t.recover(content) == instances[0]

    def test_empty_extension_not_applicable(self, scenario):
        t = scenario.table
        u_find = t.intern_atom(
            scenario.vocabulary.resolve("Find", 4),
            tuple(("v", f"x{i}") for i in range(1, 5)),
        )
        world = scenario.world.with_base(u_find, Relation(4, frozenset()))
        atom = scenario.experience()
        assert apply_T_open(atom, world, t) is None

    def test_proposition_not_applicable(self, scenario):
        term = AbstractedTerm(scenario.query)
        mem, atom, _ = assert_experience(Memory(), term, {}, scenario.table)
        assert apply_T_open(atom, scenario.world, scenario.table) is None


class TestIntrospection:
    def test_inner_concept_reifies_the_atom(self, scenario):
        atom = scenario.experience()
        inner = apply_4(atom, scenario.table)
        recovered = scenario.table.recover(inner)
        assert isinstance(recovered, Atom)
        assert recovered.predicate.name == "Know"
        assert recovered.args[0] == TimeValue("in_present")
        assert recovered.args[1] == Constant("me")
        body = recovered.args[2]
        assert isinstance(body, AbstractedTerm)
        assert scenario.table.interpret(body.body) is atom.content

    def test_twice_gives_distinct_nested_concepts(self, scenario):
        atom = scenario.experience()
        once = apply_4(atom, scenario.table)
        mem, nested, _ = scenario.memory.add_temporary(
            atom.time, atom.subject, once, ("derived", "Ax4", (atom.id,)), depth=1
        )
        twice = apply_4(nested, scenario.table)
        assert twice is not once


class TestDistribution:
    def make(self, scenario, facts, rules, known):
        vocab = scenario.vocabulary
        t = scenario.table
        for name in facts:
            vocab.declare(name, 0)
        world = World(particulars=frozenset(t.particulars()),
                      know_source=scenario.memory_handle)
        for name, value in facts.items():
            u = t.intern_atom(vocab.resolve(name, 0), ())
            world = world.with_base(u, Relation(0, frozenset({()} if value else ())))
        memory = Memory()
        for a, b in rules:
            memory, _ = add_rule(
                memory,
                Atom(vocab.resolve(a, 0), ()),
                Atom(vocab.resolve(b, 0), ()),
                t,
            )
        for name in known:
            term = AbstractedTerm(Atom(vocab.resolve(name, 0), ()))
            memory, _, _ = assert_experience(memory, term, {}, t)
        return memory, world

    def test_fires_on_matching_antecedent(self, scenario):
        memory, world = self.make(
            scenario, {"a": True, "b": True}, [("a", "b")], ["a"]
        )
        impl = memory.permanent[0]
        atom = memory.temporary[0]
        consequent = apply_K(atom, impl)
        assert consequent is scenario.table.interpret(
            Atom(scenario.vocabulary.resolve("b", 0), ())
        )

    def test_mismatch_no_derivation(self, scenario):
        memory, world = self.make(
            scenario, {"a": True, "b": True, "c": True}, [("b", "c")], ["a"]
        )
        assert apply_K(memory.temporary[0], memory.permanent[0]) is None

    def test_three_rule_chain(self, scenario):
        memory, world = self.make(
            scenario,
            {"a": True, "b": True, "c": True, "x": True, "y": True},
            [("a", "b"), ("b", "c"), ("x", "y")],
            ["a"],
        )
        memory, steps = forward_chain(memory, world, scenario.table, budget=0)
        rules = [s.rule for s in steps]
        assert rules == ["AxK", "AxK"]
        contents = {a.content.id for a in memory.temporary}
        for name, expected in (("b", True), ("c", True), ("y", False)):
            u = scenario.table.interpret(
                Atom(scenario.vocabulary.resolve(name, 0), ())
            )
            assert (u.id in contents) == expected
        # soundness: antecedents and consequents hold in the world
        for step in steps:
            sentence = scenario.table.recover(memory.get(step.output).content)
            assert eval_sentence(world, sentence, scenario.table)

    def test_implication_encoding_decomposes(self, scenario):
        vocab = scenario.vocabulary
        vocab.declare("a", 0)
        vocab.declare("b", 0)
        fa = Atom(vocab.resolve("a", 0), ())
        fb = Atom(vocab.resolve("b", 0), ())
        impl = implication_formula(fa, fb)
        assert impl == Neg(Conj(fa, Neg(fb), ()))
        u = scenario.table.interpret(impl)
        antecedent, consequent = decompose_implication(u)
        assert antecedent is scenario.table.interpret(fa)
        assert consequent is scenario.table.interpret(fb)


class TestForwardChain:
    def test_demo_derivation_shape(self, scenario):
        scenario.experience()
        steps = scenario.chain(budget=0)
        assert [s.rule for s in steps] == ["T_b", "T_a", "T_a", "T_a"]
        instance_atoms = [
            scenario.memory.get(s.output) for s in steps if s.rule == "T_a"
        ]
        clips = []
        for atom in instance_atoms:
            sentence = scenario.table.recover(atom.content)
            assert isinstance(sentence, Conj)
            clips.append(sentence.lhs.args[2])
        assert clips == [Constant(c.name) for c in scenario.positive]

    def test_t_a_matches_satisfying_assignments(self, scenario):
        scenario.experience()
        scenario.chain(budget=0)
        rows = satisfying_assignments(scenario.world, scenario.command, scenario.table)
        y = free_var_tuple(scenario.command)[0]
        from intenlog.syntax import substitute

        expected = {
            scenario.table.interpret(
                substitute(scenario.command, {y: scenario.table.element_to_term(g[y])})
            ).id
            for g in rows
        }
        derived = {
            a.content.id
            for a in scenario.memory.temporary
            if a.provenance[:2] == ("derived", "T_a")
        }
        assert derived == expected

    def test_budget_zero_means_no_introspection(self, scenario):
        scenario.experience()
        steps = scenario.chain(budget=0)
        assert all(s.rule != "Ax4" for s in steps)
        assert all(a.depth == 0 for a in scenario.memory.atoms())

    def test_budget_bounds_nesting(self, scenario):
        scenario.experience()
        scenario.chain(budget=2)
        depths = [a.depth for a in scenario.memory.atoms()]
        assert max(depths) == 2

    def test_deterministic(self):
        s1, s2 = Scenario(), Scenario()
        for s in (s1, s2):
            s.experience()
        steps1 = s1.chain(budget=2)
        steps2 = s2.chain(budget=2)
        assert steps1 == steps2
        assert [a.key()[2].id for a in s1.memory.atoms()] == [
            a.key()[2].id for a in s2.memory.atoms()
        ]

    def test_empty_memory_no_derivations(self, scenario):
        memory, steps = forward_chain(
            Memory(), scenario.world, scenario.table, budget=3
        )
        assert steps == () and memory.atoms() == ()

    def test_reflexivity_soundness_after_run(self, scenario):
        scenario.experience()
        scenario.chain(budget=2)
        for atom in scenario.memory.atoms():
            if atom.content.arity != 0:
                continue
            sentence = scenario.table.recover(atom.content)
            assert eval_sentence(scenario.world, sentence, scenario.table)

    def test_trace_parents_precede_outputs(self, scenario):
        scenario.experience()
        steps = scenario.chain(budget=2)
        for step in steps:
            assert all(i < step.output for i in step.inputs)


class TestConsolidate:
    def test_moves_and_stamps(self, scenario):
        scenario.experience()
        scenario.chain(budget=0)
        before = {a.content.id: a for a in scenario.memory.temporary}
        scenario.memory, steps = consolidate(scenario.memory, "t42", scenario.table)
        assert scenario.memory.temporary == ()
        assert len(steps) == len(before)
        stamped = [
            scenario.table.recover(a.content)
            for a in scenario.memory.permanent
            if a.provenance[0] == "consolidated"
        ]
        instances = [f for f in stamped if isinstance(f, Conj) and isinstance(f.lhs, Atom)]
        assert instances
        for f in instances:
            find = f.lhs
            assert find.predicate.arity == 5
            assert find.args[0] == Constant("t42")
            assert find.args[1] == TimeValue("in_past")
            assert isinstance(f.rhs, Atom) and f.rhs.predicate.name == "videoclips"
            assert len(f.rhs.args) == 1  # the clip class stays unstamped

    def test_know_time_stays_present(self, scenario):
        scenario.experience()
        scenario.memory, _ = consolidate(scenario.memory, "t42", scenario.table)
        assert all(a.time.name == "in_present" for a in scenario.memory.permanent)

    def test_idempotent(self, scenario):
        scenario.experience()
        scenario.memory, first = consolidate(scenario.memory, "t1", scenario.table)
        after = scenario.memory
        scenario.memory, second = consolidate(scenario.memory, "t2", scenario.table)
        assert second == ()
        assert scenario.memory.permanent == after.permanent

    def test_empty_temporary_unchanged(self, scenario):
        mem, steps = consolidate(Memory(), "t1", scenario.table)
        assert steps == () and mem == Memory()

    def test_content_preserved_under_unstamping(self, scenario):
        scenario.experience()
        scenario.chain(budget=1)
        originals = {a.provenance: a.content for a in scenario.memory.temporary}
        temp = scenario.memory.temporary
        scenario.memory, _ = consolidate(scenario.memory, "t9", scenario.table)
        by_source = {
            a.provenance[2]: a for a in scenario.memory.permanent
            if a.provenance[0] == "consolidated"
        }
        for original in temp:
            stamped = by_source[original.id]
            restored = _unstamp(
                scenario.table.recover(stamped.content), "t9", scenario.table
            )
            assert scenario.table.interpret(restored) is original.content


def _unstamp(f, tau, table):
    """Test-side inverse of the consolidation rewrite."""
    if isinstance(f, Atom):
        if (
            f.predicate.name != "Know"
            and len(f.args) >= 2
            and f.args[0] == Constant(tau)
            and isinstance(f.args[1], TimeValue)
        ):
            tense = f.args[1]
            if tense.tense == "in_past":
                tense = TimeValue("in_present")
            pred = table.vocabulary.resolve(f.predicate.name, f.predicate.arity - 1)
            return Atom(pred, (tense,) + f.args[2:])
        return f
    if isinstance(f, Conj):
        return Conj(_unstamp(f.lhs, tau, table), _unstamp(f.rhs, tau, table), f.pairs)
    if isinstance(f, Neg):
        return Neg(_unstamp(f.body, tau, table))
    return f


class TestAnswer:
    def test_open_query_rejected(self, scenario):
        with pytest.raises(EpistemicError, match="sentence"):
            answer(scenario.memory, scenario.world, scenario.command, scenario.table)

    def test_memory_known_yes(self, scenario):
        term = AbstractedTerm(scenario.query)
        scenario.memory, _, _ = assert_experience(
            scenario.memory, term, {}, scenario.table
        )
        got = answer(scenario.memory, scenario.world, scenario.query, scenario.table)
        assert got == "yes"

    def test_world_eval_closed_world_no(self, scenario):
        f = Atom(
            scenario.vocabulary.resolve("videoclips", 1), (Constant("clip_nope"),)
        )
        assert answer(scenario.memory, scenario.world, f, scenario.table) == "no"

    def test_unknown_when_unevaluable(self, scenario):
        scenario.vocabulary.declare("mystery", 0)
        f = Atom(scenario.vocabulary.resolve("mystery", 0), ())
        assert answer(scenario.memory, scenario.world, f, scenario.table) == "unknown"

    def test_conjunct_extraction(self, scenario):
        scenario.experience()
        scenario.chain(budget=0)
        instance = next(
            a for a in scenario.memory.temporary
            if a.provenance[:2] == ("derived", "T_a")
        )
        sentence = scenario.table.recover(instance.content)
        for part in flatten_conjuncts(sentence):
            assert answer(
                scenario.memory, scenario.world, part, scenario.table
            ) == "yes"


def test_stamp_formula_leaves_tenseless_atoms_alone(scenario=None):
    vocab = Vocabulary()
    vocab.declare("videoclips", 1)
    table = ConceptTable(vocab)
    f = Atom(vocab.resolve("videoclips", 1), (Constant("clip1"),))
    assert stamp_formula(f, Constant("t1"), table) == f
