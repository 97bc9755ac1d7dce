import random

import pytest

from intenlog import relalg
from intenlog.checks import _random_world, brute_force_join, tarski_eval
from intenlog.prp import ConceptTable
from intenlog.relalg import Relation
from intenlog.syntax import (
    Atom,
    Constant,
    Identity,
    Neg,
    Top,
    Variable,
    Vocabulary,
    free_var_tuple,
    substitute,
)
from intenlog.worlds import (
    MissingExtensionError,
    World,
    WorldError,
    eval_sentence,
    extension,
    satisfying_assignments,
)
from tests.test_syntax import random_formula


@pytest.fixture
def setup():
    vocab = Vocabulary()
    vocab.declare("videoclips", 1)
    vocab.declare("phi", 2)
    table = ConceptTable(vocab)
    clips = [table.particular(f"clip{i}") for i in (1, 2, 3)]
    u_clips = table.interpret(
        Atom(vocab.resolve("videoclips", 1), (Variable("y"),))
    )
    world = World(particulars=frozenset(table.particulars())).with_base(
        u_clips, Relation(1, frozenset((c,) for c in clips))
    )
    return table, world, u_clips, clips


class TestExtension:
    def test_truth(self, setup):
        table, world, _, _ = setup
        assert extension(world, table.truth) == relalg.TRUE

    def test_base_lookup(self, setup):
        table, world, u_clips, clips = setup
        assert extension(world, u_clips) == Relation(1, frozenset((c,) for c in clips))

    def test_conj_is_join(self, setup):
        table, world, u_clips, clips = setup
        u = table.conj(u_clips, u_clips, ((1, 1),))
        assert extension(world, u) == extension(world, u_clips)

    def test_neg_is_complement(self, setup):
        table, world, u_clips, _ = setup
        got = extension(world, table.neg(u_clips))
        want = relalg.complement(extension(world, u_clips), world.active_domain())
        assert got == want

    def test_exists_is_projection(self, setup):
        table, world, u_clips, _ = setup
        assert extension(world, table.exists(1, u_clips)) == relalg.TRUE

    def test_union_extension(self, setup):
        table, world, u_clips, clips = setup
        p = table.vocabulary.declare("others", 1)
        u_other = table.intern_atom(p, (("v", "x"),))
        rows = frozenset({(table.particular("clip9"),)})
        world = world.with_base(u_other, Relation(1, rows))
        got = extension(world, table.union([u_clips, u_other]))
        assert got == Relation(1, frozenset((c,) for c in clips) | rows)

    def test_particulars_are_fixed_points(self, setup):
        table, world, _, _ = setup
        p = table.particular("me")
        assert extension(world, p) is p

    def test_missing_extension_names_concept(self, setup):
        table, world, _, _ = setup
        u = table.intern_atom(table.vocabulary.declare("ghost", 1), (("v", "x"),))
        with pytest.raises(MissingExtensionError, match=f"u{u.id}"):
            extension(world, u)

    def test_layout_derives_permuted_atom(self, setup):
        # column labels follow the free tuple: swapping the variables
        # swaps which variable each column binds
        table, world, _, _ = setup
        a, b = table.particular("a"), table.particular("b")
        phi = table.vocabulary.resolve("phi", 2)
        f_xy = Atom(phi, (Variable("x"), Variable("y")))
        world = world.with_base(table.interpret(f_xy), Relation(2, frozenset({(a, b)})))
        f_yx = Atom(phi, (Variable("y"), Variable("x")))
        assert table.interpret(f_yx) is not table.interpret(f_xy)
        assignments = satisfying_assignments(world, f_yx, table)
        assert assignments == [{Variable("y"): a, Variable("x"): b}]
        u_diag = table.interpret(Atom(phi, (Variable("x"), Variable("x"))))
        assert extension(world, u_diag) == Relation(1, frozenset())
        world2 = world.with_base(
            table.interpret(f_xy), Relation(2, frozenset({(a, b), (a, a)}))
        )
        assert extension(world2, u_diag) == Relation(1, frozenset({(a,)}))

    def test_identity_extension(self, setup):
        table, world, _, _ = setup
        got = extension(world, table.identity_concept)
        domain = world.active_domain().elements
        assert got == Relation(2, frozenset((e, e) for e in domain))
        ground = table.interpret(Identity(Constant("a"), Constant("a")))
        assert extension(world, ground) == relalg.TRUE
        mixed = table.interpret(Identity(Variable("x"), Constant("a")))
        assert extension(world, mixed) == Relation(
            1, frozenset({(table.particular("a"),)})
        )


class TestWithBase:
    def test_snapshots_do_not_mutate(self, setup):
        table, world, u_clips, clips = setup
        before = extension(world, u_clips)
        rows = frozenset({(clips[0],)})
        world2 = world.with_base(u_clips, Relation(1, rows))
        assert extension(world, u_clips) == before
        assert extension(world2, u_clips) == Relation(1, rows)

    def test_latest_wins(self, setup):
        table, world, u_clips, clips = setup
        rows = frozenset({(clips[0],)})
        world2 = world.with_base(u_clips, Relation(1, rows)).with_base(
            u_clips, Relation(1, frozenset())
        )
        assert extension(world2, u_clips) == Relation(1, frozenset())

    def test_arity_mismatch(self, setup):
        table, world, u_clips, _ = setup
        with pytest.raises(WorldError, match="arity mismatch"):
            world.with_base(u_clips, Relation(2, frozenset()))

    def test_composite_rejected(self, setup):
        table, world, u_clips, _ = setup
        with pytest.raises(WorldError, match="atomic"):
            world.with_base(table.neg(u_clips), Relation(1, frozenset()))


class TestEvalSentence:
    def test_top_true(self, setup):
        table, world, _, _ = setup
        assert eval_sentence(world, Top(), table) is True
        assert eval_sentence(world, Neg(Top()), table) is False

    def test_open_formula_rejected(self, setup):
        table, world, _, _ = setup
        f = Atom(table.vocabulary.resolve("videoclips", 1), (Variable("y"),))
        with pytest.raises(WorldError, match="free variables"):
            eval_sentence(world, f, table)

    def test_membership(self, setup):
        table, world, _, _ = setup
        yes = Atom(table.vocabulary.resolve("videoclips", 1), (Constant("clip1"),))
        no = Atom(table.vocabulary.resolve("videoclips", 1), (Constant("zzz"),))
        assert eval_sentence(world, yes, table) is True
        assert eval_sentence(world, no, table) is False

    def test_agrees_with_brute_force_oracle(self):
        rng = random.Random(40)
        variables = [Variable(n) for n in ("x", "y", "z")]
        for _ in range(300):
            vocab = Vocabulary()
            table = ConceptTable(vocab)
            world, preds, domain = _random_world(rng, table, vocab, max_domain=4)
            f = random_formula(rng, vocab, depth=2)
            fv = free_var_tuple(f)
            if fv:
                f = substitute(f, {v: Constant(rng.choice(domain).name) for v in fv})
            try:
                engine = eval_sentence(world, f, table)
            except MissingExtensionError:
                continue
            assert engine == tarski_eval(world, f, {}, table)


class TestSatisfyingAssignments:
    def test_enumerates_extension(self, setup):
        table, world, _, clips = setup
        f = Atom(table.vocabulary.resolve("videoclips", 1), (Variable("y"),))
        rows = satisfying_assignments(world, f, table)
        assert [g[Variable("y")] for g in rows] == sorted(clips, key=lambda c: c.name)

    def test_empty_extension(self, setup):
        table, world, _, _ = setup
        f = Atom(table.vocabulary.resolve("videoclips", 1), (Variable("y"),))
        world2 = world.with_base(table.interpret(f), Relation(1, frozenset()))
        assert satisfying_assignments(world2, f, table) == []

    def test_top_has_the_empty_assignment(self, setup):
        table, world, _, _ = setup
        assert satisfying_assignments(world, Top(), table) == [{}]

    def test_alpha_must_match(self, setup):
        table, world, _, _ = setup
        f = Atom(table.vocabulary.resolve("videoclips", 1), (Variable("y"),))
        with pytest.raises(WorldError, match="free tuple"):
            satisfying_assignments(world, f, table, alpha=(Variable("z"),))


def test_memoization_transparency(setup):
    table, world, u_clips, _ = setup
    u = table.neg(table.conj(u_clips, u_clips, ((1, 1),)))
    warm = extension(world, u)
    world.clear_cache()
    assert extension(world, u) == warm


def test_random_worlds_satisfy_the_four_laws():
    rng = random.Random(41)
    for _ in range(100):
        vocab = Vocabulary()
        table = ConceptTable(vocab)
        world, preds, _ = _random_world(rng, table, vocab)
        for pred in preds:
            u = table.intern_atom(
                pred, tuple(("v", f"x{k}") for k in range(1, pred.arity + 1))
            )
            v = table.intern_atom(
                pred, tuple(("v", f"y{k}") for k in range(1, pred.arity + 1))
            )
            if u.arity:
                got = extension(world, table.conj(u, v, ((1, 1),)))
                want = brute_force_join(
                    extension(world, u), extension(world, v), ((1, 1),)
                )
                assert got == want
                assert extension(world, table.exists(1, u)) == relalg.project_out(
                    extension(world, u), 1
                )
            assert extension(world, table.neg(u)) == relalg.complement(
                extension(world, u), world.active_domain()
            )
