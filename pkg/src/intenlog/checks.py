"""Randomized verification suites.

These drive the engine against independent oracles: the homomorphism
suite recomputes every composite extension with the raw relational
operators, the sentence suite evaluates with a brute-force substitution
evaluator that never touches the concept layer, and the join suite uses
a nested-loop reference join.  All generators are seeded, so every run
is reproducible.
"""

from __future__ import annotations

import random
import time

from . import relalg, worlds
from .prp import ConceptTable
from .relalg import Relation
from .syntax import (
    Atom,
    Conj,
    Constant,
    Exists,
    Formula,
    Identity,
    Neg,
    Top,
    Variable,
    Vocabulary,
    free_var_tuple,
    substitute,
)
from .worlds import World, eval_sentence, extension


# ---------------------------------------------------------------------------
# Reference implementations (kept deliberately naive)


def brute_force_join(r1: Relation, r2: Relation, pairs) -> Relation:
    """Nested-loop natural join, the oracle for the hash join."""
    seconds = sorted({b for _, b in pairs})
    keep = [i for i in range(r2.arity) if i + 1 not in seconds]
    rows = set()
    for t1 in r1.tuples:
        for t2 in r2.tuples:
            if all(t1[a - 1] == t2[b - 1] for a, b in pairs):
                rows.add(t1 + tuple(t2[i] for i in keep))
    return Relation(r1.arity + len(keep), frozenset(rows))


def _scan_free(f: Formula, bound: frozenset) -> list[str]:
    """Oracle-side free variable scan, written independently of
    syntax.free_var_tuple: collects names left to right via a generator."""

    def walk(g, hidden):
        if isinstance(g, Atom):
            for a in g.args:
                if isinstance(a, Variable) and a.name not in hidden:
                    yield a.name
        elif isinstance(g, Identity):
            for a in (g.left, g.right):
                if isinstance(a, Variable) and a.name not in hidden:
                    yield a.name
        elif isinstance(g, Conj):
            left = list(walk(g.lhs, hidden))
            right = list(walk(g.rhs, hidden))
            joined = {b for _, b in g.pairs}
            dedup_r = []
            for name in right:
                if name not in dedup_r:
                    dedup_r.append(name)
            yield from left
            for p, name in enumerate(dedup_r, 1):
                if p not in joined:
                    yield name
        elif isinstance(g, Neg):
            yield from walk(g.body, hidden)
        elif isinstance(g, Exists):
            inner = []
            for name in walk(g.body, hidden):
                if name not in inner:
                    inner.append(name)
            pivot = inner[g.position - 1]
            for name in inner:
                if name != pivot:
                    yield name

    seen = []
    for name in walk(f, bound):
        if name not in seen:
            seen.append(name)
    return seen


def tarski_eval(world: World, f: Formula, env: dict, table: ConceptTable) -> bool:
    """Brute-force substitution evaluator over the active domain.

    Works directly on formulas and base relations; the only shared
    machinery is element interning, which fixes identity, not truth.
    """
    if isinstance(f, Top):
        return True
    if isinstance(f, Atom):
        row = tuple(_resolve(a, env, table) for a in f.args)
        pred = f.predicate
        base = world.pred_base.get((pred.name, pred.arity))
        if base is None:
            raise worlds.MissingExtensionError(table.interpret(f))
        return row in base.tuples
    if isinstance(f, Identity):
        return _resolve(f.left, env, table) == _resolve(f.right, env, table)
    if isinstance(f, Neg):
        return not tarski_eval(world, f.body, env, table)
    if isinstance(f, Conj):
        if not tarski_eval(world, f.lhs, env, table):
            return False
        right_env = dict(env)
        left_names = _scan_free(f.lhs, frozenset())
        right_names = _scan_free(f.rhs, frozenset())
        for a, b in f.pairs:
            right_env[right_names[b - 1]] = env[left_names[a - 1]]
        return tarski_eval(world, f.rhs, right_env, table)
    if isinstance(f, Exists):
        names = _scan_free(f.body, frozenset())
        pivot = names[f.position - 1]
        for element in world.active_domain().sorted_elements():
            inner = dict(env)
            inner[pivot] = element
            if tarski_eval(world, f.body, inner, table):
                return True
        return False
    raise AssertionError(f"not a formula: {f!r}")


def _resolve(term, env, table):
    if isinstance(term, Variable):
        return env[term.name]
    if isinstance(term, Constant):
        return table.particular(term.name)
    return table.particular(term.tense)


# ---------------------------------------------------------------------------
# Random instances


def _random_world(rng: random.Random, table: ConceptTable, vocabulary: Vocabulary,
                  max_domain=5, max_rows=16):
    domain = [table.particular(c) for c in "abcde"[: rng.randint(2, max_domain)]]
    preds = []
    world = World(particulars=frozenset(domain))
    for i, arity in enumerate(rng.choices(range(0, 4), k=4)):
        pred = vocabulary.declare(f"p{i}_{arity}", arity)
        preds.append(pred)
        if arity == 0:
            rel = relalg.truth(rng.random() < 0.5)
        else:
            n = rng.randint(0, min(max_rows, len(domain) ** arity))
            rows = {
                tuple(rng.choice(domain) for _ in range(arity)) for _ in range(n)
            }
            rel = Relation(arity, frozenset(rows))
        canonical = table.intern_atom(
            pred, tuple(("v", f"x{k}") for k in range(1, arity + 1))
        )
        world = world.with_base(canonical, rel)
    return world, preds, domain


def _random_concept(rng: random.Random, table: ConceptTable, preds, depth: int):
    if depth == 0 or rng.random() < 0.3:
        pred = rng.choice(preds)
        return table.intern_atom(
            pred, tuple(("v", f"x{k}") for k in range(1, pred.arity + 1))
        )
    op = rng.choice(("conj", "neg", "exists"))
    if op == "neg":
        return table.neg(_random_concept(rng, table, preds, depth - 1))
    if op == "exists":
        u = _random_concept(rng, table, preds, depth - 1)
        if u.arity == 0:
            return table.neg(u)
        return table.exists(rng.randint(1, u.arity), u)
    u = _random_concept(rng, table, preds, depth - 1)
    v = _random_concept(rng, table, preds, depth - 1)
    # keep every node within arity 3 so complements stay desk-sized
    n_pairs = rng.randint(max(0, u.arity + v.arity - 3), min(u.arity, v.arity))
    firsts = rng.sample(range(1, u.arity + 1), n_pairs) if n_pairs else []
    seconds = rng.sample(range(1, v.arity + 1), n_pairs) if n_pairs else []
    return table.conj(u, v, tuple(zip(firsts, seconds)))


def _check_laws(world: World, u, table: ConceptTable, failures: list):
    """Recompute one node's extension from its children via the raw
    relational operators and compare."""
    got = extension(world, u)
    if u.op == "conj":
        left = extension(world, u.children[0])
        right = extension(world, u.children[1])
        k, j = u.children[0].arity, u.children[1].arity
        if u.pairs and u.arity == k + j - len(u.pairs):
            want = brute_force_join(left, right, u.pairs)
        else:
            want = brute_force_join(left, right, ())
        if got != want:
            failures.append(f"conj law failed on u{u.id}")
    elif u.op == "neg":
        inner = extension(world, u.children[0])
        want = relalg.complement(inner, world.active_domain())
        if got != want:
            failures.append(f"neg law failed on u{u.id}")
    elif u.op == "exists":
        inner = extension(world, u.children[0])
        want = relalg.project_out(inner, u.position)
        if got != want:
            failures.append(f"exists law failed on u{u.id}")
    for child in u.children:
        _check_laws(world, child, table, failures)


def check_homomorphism(cases: int = 1000, seed: int = 2026) -> tuple[bool, str]:
    """Extensionalization commutes with the algebra on random trees."""
    rng = random.Random(seed)
    started = time.monotonic()
    failures: list[str] = []
    for case in range(cases):
        vocabulary = Vocabulary()
        table = ConceptTable(vocabulary)
        world, preds, _ = _random_world(rng, table, vocabulary)
        if extension(world, table.truth) != relalg.TRUE:
            failures.append(f"case {case}: truth law failed")
        diagonal = Relation(
            2, frozenset((e, e) for e in world.active_domain().elements)
        )
        if extension(world, table.identity_concept) != diagonal:
            failures.append(f"case {case}: identity law failed")
        u = _random_concept(rng, table, preds, rng.randint(1, 4))
        _check_laws(world, u, table, failures)
        if failures:
            return False, f"case {case}: " + "; ".join(failures[:3])
    elapsed = time.monotonic() - started
    return True, f"{cases} concept trees in {elapsed:.1f}s"


def _random_formula(rng, preds, variables, budget: list) -> Formula:
    if budget[0] <= 0 or rng.random() < 0.4:
        pred = rng.choice(preds)
        args = tuple(
            rng.choice(variables) if rng.random() < 0.7 else Constant(rng.choice("abc"))
            for _ in range(pred.arity)
        )
        return Atom(pred, args)
    budget[0] -= 1
    op = rng.choice(("neg", "conj", "exists"))
    if op == "neg":
        return Neg(_random_formula(rng, preds, variables, budget))
    if op == "exists":
        body = _random_formula(rng, preds, variables, budget)
        fv = free_var_tuple(body)
        if not fv:
            return Neg(body)
        return Exists(rng.randint(1, len(fv)), body)
    lhs = _random_formula(rng, preds, variables, budget)
    rhs = _random_formula(rng, preds, variables, budget)
    lt, rt = free_var_tuple(lhs), free_var_tuple(rhs)
    shared = [v for v in rt if v in set(lt)]
    pairs = tuple((lt.index(v) + 1, rt.index(v) + 1) for v in shared)
    return Conj(lhs, rhs, pairs)


def check_tarski(cases: int = 1000, seed: int = 1939) -> tuple[bool, str]:
    """Two-step evaluation agrees with brute-force substitution."""
    rng = random.Random(seed)
    started = time.monotonic()
    variables = [Variable(n) for n in ("x", "y", "z")]
    for case in range(cases):
        vocabulary = Vocabulary()
        table = ConceptTable(vocabulary)
        world, preds, domain = _random_world(rng, table, vocabulary, max_domain=4)
        f = _random_formula(rng, preds, variables, [3])
        leftover = free_var_tuple(f)
        if leftover:
            f = substitute(
                f, {v: Constant(rng.choice(domain).name) for v in leftover}
            )
        via_concepts = eval_sentence(world, f, table)
        via_oracle = tarski_eval(world, f, {}, table)
        if via_concepts != via_oracle:
            return False, f"case {case}: disagreement on {f!r}"
    elapsed = time.monotonic() - started
    return True, f"{cases} sentences in {elapsed:.1f}s"


def check_union(seed: int = 7) -> tuple[bool, str]:
    """Extensionalizing a derived union gives the union of extensions."""
    rng = random.Random(seed)
    checked = 0
    for arity in range(0, 4):
        for size in (1, 2, 3):
            for trial in range(10):
                vocabulary = Vocabulary()
                table = ConceptTable(vocabulary)
                world, _, domain = _random_world(rng, table, vocabulary)
                members = []
                for i in range(size):
                    pred = vocabulary.declare(f"q{i}", arity)
                    u = table.intern_atom(
                        pred, tuple(("v", f"x{k}") for k in range(1, arity + 1))
                    )
                    if arity == 0:
                        rel = relalg.truth(rng.random() < 0.5)
                    else:
                        rows = {
                            tuple(rng.choice(domain) for _ in range(arity))
                            for _ in range(rng.randint(0, 6))
                        }
                        rel = Relation(arity, frozenset(rows))
                    world = world.with_base(u, rel)
                    members.append(u)
                combined = table.union(members)
                got = extension(world, combined)
                want_rows = set()
                for u in members:
                    want_rows |= set(extension(world, u).tuples)
                if got != Relation(arity, frozenset(want_rows)):
                    return False, f"union law failed at arity {arity}, size {size}"
                checked += 1
    return True, f"{checked} unions across arities 0..3"


def check_join_bookkeeping() -> tuple[bool, str]:
    """The five-by-four join example: arity seven, columns in order,
    and agreement with the nested-loop oracle on concrete relations."""
    vocabulary = Vocabulary()
    table = ConceptTable(vocabulary)
    names = ["x_i", "x_j", "x_k", "x_l", "x_m"]
    phi = Atom(vocabulary.declare("phi", 5), tuple(Variable(n) for n in names))
    psi = Atom(
        vocabulary.declare("psi", 4),
        tuple(Variable(n) for n in ("x_l", "y_i", "x_j", "y_j")),
    )
    combined = Conj(phi, psi, ((4, 1), (2, 3)))
    tuple_names = tuple(v.name for v in free_var_tuple(combined))
    if tuple_names != ("x_i", "x_j", "x_k", "x_l", "x_m", "y_i", "y_j"):
        return False, f"column order {tuple_names}"
    if len(free_var_tuple(combined)) != 7:
        return False, "arity is not 7"
    a, b, c, d, e, ff, g = (table.particular(ch) for ch in "abcdefg")
    r1 = Relation(5, frozenset({(a, b, c, d, e), (a, b, c, a, e)}))
    r2 = Relation(4, frozenset({(d, ff, b, g), (c, ff, b, g)}))
    got = relalg.natural_join(r1, r2, ((4, 1), (2, 3)))
    want = brute_force_join(r1, r2, ((4, 1), (2, 3)))
    if got != want:
        return False, "join disagrees with the nested-loop oracle"
    if got.arity != 7 or (a, b, c, d, e, ff, g) not in got.tuples:
        return False, f"unexpected join result {got!r}"
    world = World(particulars=frozenset([a, b, c, d, e, ff, g]))
    world = world.with_base(table.interpret(phi), r1)
    world = world.with_base(table.interpret(psi), r2)
    if extension(world, table.interpret(combined)) != want:
        return False, "two-step extension disagrees with the oracle"
    return True, "column order (x_i..y_j), arity 7, oracle agreement"


ALL_CHECKS = (
    ("homomorphism", check_homomorphism),
    ("tarski", check_tarski),
    ("union", check_union),
    ("join-bookkeeping", check_join_bookkeeping),
)


def run_all(report=print) -> int:
    failed = 0
    for name, fn in ALL_CHECKS:
        ok, detail = fn()
        report(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        failed += 0 if ok else 1
    return failed
