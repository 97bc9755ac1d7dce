"""Autoepistemic deduction over a reified Know predicate.

Knowledge is held as ground Know atoms whose third argument is a
concept, split between a temporary store (current consciousness) and a
permanent one.  Four rules drive deduction:

* T_b turns a known open concept into a known conjunction of its
  satisfying instances, enumerated in the actual world;
* T_a extracts sentences back out of known propositions, and inside the
  forward chainer re-asserts each instance conjunct produced by T_b as
  its own Know atom;
* Ax4 reifies a Know atom inside a nested Know atom (positive
  introspection), bounded by a nesting budget;
* AxK fires a stored implication when some known concept matches its
  antecedent, yielding knowledge of the consequent.

Memory is a value: deduction and consolidation return new memories and
leave their inputs untouched.  Every derived atom carries a provenance
and every run yields a derivation trace.
"""

from __future__ import annotations

from dataclasses import dataclass

from .prp import Concept, ConceptError, ConceptTable, Particular, SELF_NAME
from .syntax import (
    AbstractedTerm,
    Atom,
    Conj,
    Constant,
    Exists,
    Formula,
    KNOW_NAME,
    Neg,
    TimeValue,
    free_var_tuple,
    serialize,
    substitute,
)
from .worlds import MissingExtensionError, World, eval_sentence, extension

RULE_EXPERIENCE = "experience"
RULE_T_GROUND = "T_a"
RULE_T_OPEN = "T_b"
RULE_AX4 = "Ax4"
RULE_AXK = "AxK"
RULE_MP = "MP"  # reserved trace vocabulary; modus ponens is folded into T_b
RULE_CONSOLIDATE = "consolidate"


class EpistemicError(Exception):
    pass


@dataclass(frozen=True)
class KnowAtom:
    id: int
    time: Particular
    subject: Particular
    content: Concept
    provenance: tuple
    depth: int = 0

    def key(self) -> tuple:
        return (self.time, self.subject, self.content)

    def __repr__(self):
        return f"k{self.id}:Know({self.time}, {self.subject}, u{self.content.id})"


@dataclass(frozen=True)
class TraceStep:
    rule: str
    inputs: tuple[int, ...]
    output: int
    sentence: str


@dataclass(frozen=True)
class Memory:
    temporary: tuple[KnowAtom, ...] = ()
    permanent: tuple[KnowAtom, ...] = ()
    next_id: int = 1

    def atoms(self) -> tuple[KnowAtom, ...]:
        return self.temporary + self.permanent

    def get(self, atom_id: int) -> KnowAtom:
        for a in self.atoms():
            if a.id == atom_id:
                return a
        raise EpistemicError(f"no atom with id {atom_id}")

    def find(self, time, subject, content) -> KnowAtom | None:
        for a in self.atoms():
            if a.key() == (time, subject, content):
                return a
        return None

    def add_temporary(self, time, subject, content, provenance, depth=0):
        return self._add("temporary", time, subject, content, provenance, depth)

    def add_permanent(self, time, subject, content, provenance, depth=0):
        return self._add("permanent", time, subject, content, provenance, depth)

    def _add(self, store, time, subject, content, provenance, depth):
        existing = self.find(time, subject, content)
        if existing is not None:
            return self, existing, False
        atom = KnowAtom(self.next_id, time, subject, content, provenance, depth)
        temporary, permanent = self.temporary, self.permanent
        if store == "temporary":
            temporary = temporary + (atom,)
        else:
            permanent = permanent + (atom,)
        return Memory(temporary, permanent, self.next_id + 1), atom, True

    def know_tuples(self) -> frozenset:
        """The Know relation this memory backs: one triple per held atom."""
        return frozenset((a.time, a.subject, a.content) for a in self.atoms())


class MemoryHandle:
    """Mutable reference to a memory value, usable as a world's know source."""

    def __init__(self, memory: Memory | None = None):
        self.memory = memory if memory is not None else Memory()

    def know_tuples(self) -> frozenset:
        return self.memory.know_tuples()


def assert_experience(
    memory: Memory, term: AbstractedTerm, g, table: ConceptTable
) -> tuple[Memory, KnowAtom, bool]:
    """Record an experience: the term's concept under ``g`` becomes a
    Know atom for the present self in temporary memory."""
    if not isinstance(term, AbstractedTerm):
        raise EpistemicError("experiences are asserted from abstracted terms")
    content = table.extend_assignment(g or {}, term)
    if not isinstance(content, Concept):
        raise EpistemicError("experience content must be a concept")
    time = table.particular("in_present")
    subject = table.particular(SELF_NAME)
    return memory.add_temporary(time, subject, content, (RULE_EXPERIENCE,))


def apply_T_ground(atom: KnowAtom, table: ConceptTable) -> Formula | None:
    """Reflexivity on propositions: recover the known sentence.

    Returns None when the content is not a proposition.
    """
    if atom.content.arity != 0:
        return None
    return table.recover(atom.content)


def apply_T_open(
    atom: KnowAtom, world: World, table: ConceptTable
) -> tuple[Concept, list[Formula]] | None:
    """Reflexivity on open concepts: enumerate the satisfying instances
    of the content's hidden variables and know their conjunction.

    Returns the conjunction concept together with the instance
    sentences, or None when the content is a proposition, has an empty
    extension, or cannot be extensionalized at all.
    """
    if atom.content.arity == 0:
        return None
    try:
        rel = extension(world, atom.content)
    except MissingExtensionError:
        return None
    if not rel.tuples:
        return None
    base = table.recover(atom.content)
    variables = free_var_tuple(base)
    instances = []
    for row in rel.sorted_rows():
        bindings = {v: table.element_to_term(e) for v, e in zip(variables, row)}
        instances.append(substitute(base, bindings))
    conjunction = instances[-1]
    for inst in reversed(instances[:-1]):
        conjunction = Conj(inst, conjunction, ())
    return table.interpret(conjunction), instances


def apply_4(atom: KnowAtom, table: ConceptTable) -> Concept:
    """Positive introspection: the atom itself, reified as a proposition."""
    know = table.vocabulary.resolve(KNOW_NAME, 3)
    inner = Atom(
        know,
        (
            table.element_to_term(atom.time),
            table.element_to_term(atom.subject),
            table.element_to_term(atom.content),
        ),
    )
    return table.interpret(inner)


def decompose_implication(u: Concept) -> tuple[Concept, Concept] | None:
    """Split a concept of the shape neg(conj(A, neg(B))) into (A, B)."""
    if u.op != "neg":
        return None
    body = u.children[0]
    if body.op != "conj":
        return None
    antecedent, negated = body.children
    if negated.op != "neg":
        return None
    return antecedent, negated.children[0]


def apply_K(atom: KnowAtom, implication: KnowAtom) -> Concept | None:
    """Distribution: a known implication whose antecedent concept matches
    the atom's content yields knowledge of the consequent."""
    parts = decompose_implication(implication.content)
    if parts is None:
        return None
    antecedent, consequent = parts
    if antecedent is not atom.content:
        return None
    return consequent


def implication_formula(antecedent: Formula, consequent: Formula) -> Formula:
    """Encode ``antecedent => consequent`` inside the algebra as
    not(antecedent and not(consequent)), joining shared variables."""
    at = free_var_tuple(antecedent)
    negated = Neg(consequent)
    ct = free_var_tuple(negated)
    pairs = tuple(
        (i + 1, ct.index(v) + 1) for i, v in enumerate(at) if v in set(ct)
    )
    return Neg(Conj(antecedent, negated, pairs))


def add_rule(
    memory: Memory, antecedent: Formula, consequent: Formula, table: ConceptTable
) -> tuple[Memory, KnowAtom]:
    """Store an innate implication as a permanent Know atom."""
    content = table.interpret(implication_formula(antecedent, consequent))
    time = table.particular("in_present")
    subject = table.particular(SELF_NAME)
    memory, atom, _ = memory.add_permanent(
        time, subject, content, (RULE_EXPERIENCE,)
    )
    return memory, atom


def forward_chain(
    memory: Memory, world: World, table: ConceptTable, budget: int = 3
) -> tuple[Memory, tuple[TraceStep, ...]]:
    """Run the deduction rules to fixpoint.

    Rules apply in the fixed order T_b, T_a, AxK, Ax4 over atoms in id
    order, so identical inputs give identical memories and traces.
    Introspection is bounded: Ax4 only fires on atoms nested less
    deeply than ``budget``.  Termination follows from the budget, the
    finite world and deduplication of atoms.
    """
    if budget < 0:
        raise EpistemicError("budget must be >= 0")
    steps: list[TraceStep] = []
    instance_lists: dict[int, list[Formula]] = {}
    t_open_done: set[int] = set()
    t_ground_done: set[int] = set()

    def record(rule, inputs, atom):
        steps.append(
            TraceStep(rule, tuple(inputs), atom.id, serialize(table.recover(atom.content)))
        )

    changed = True
    while changed:
        changed = False

        for atom in list(memory.atoms()):
            if atom.content.arity == 0 or atom.id in t_open_done:
                continue
            t_open_done.add(atom.id)
            result = apply_T_open(atom, world, table)
            if result is None:
                continue
            content, instances = result
            memory, derived, added = memory.add_temporary(
                atom.time, atom.subject, content,
                ("derived", RULE_T_OPEN, (atom.id,)),
            )
            instance_lists.setdefault(derived.id, instances)
            if added:
                record(RULE_T_OPEN, (atom.id,), derived)
                changed = True

        for conj_id in sorted(instance_lists):
            if conj_id in t_ground_done:
                continue
            t_ground_done.add(conj_id)
            source = memory.get(conj_id)
            for inst in instance_lists[conj_id]:
                content = table.interpret(inst)
                memory, derived, added = memory.add_temporary(
                    source.time, source.subject, content,
                    ("derived", RULE_T_GROUND, (conj_id,)),
                )
                if added:
                    record(RULE_T_GROUND, (conj_id,), derived)
                    changed = True

        snapshot = list(memory.atoms())
        for atom in snapshot:
            for implication in snapshot:
                if implication.id == atom.id:
                    continue
                consequent = apply_K(atom, implication)
                if consequent is None:
                    continue
                memory, derived, added = memory.add_temporary(
                    atom.time, atom.subject, consequent,
                    ("derived", RULE_AXK, (atom.id, implication.id)),
                )
                if added:
                    record(RULE_AXK, (atom.id, implication.id), derived)
                    changed = True

        for atom in list(memory.atoms()):
            if atom.depth >= budget:
                continue
            content = apply_4(atom, table)
            memory, derived, added = memory.add_temporary(
                atom.time, atom.subject, content,
                ("derived", RULE_AX4, (atom.id,)),
                depth=atom.depth + 1,
            )
            if added:
                record(RULE_AX4, (atom.id,), derived)
                changed = True

    return memory, tuple(steps)


def stamp_formula(f: Formula, tau, table: ConceptTable) -> Formula:
    """Insert the timestamp before each leading tense argument of a
    non-Know atom and shift present tense to past.  Predicates gain a
    timestamped variant (arity + 1), declared on demand.  Reified
    concept arguments are mentioned, not asserted, so the rewrite does
    not descend into abstraction bodies.
    """
    if isinstance(f, Atom):
        if (
            f.predicate.name != KNOW_NAME
            and f.args
            and isinstance(f.args[0], TimeValue)
        ):
            tense = f.args[0]
            if tense.tense == "in_present":
                tense = TimeValue("in_past")
            stamped = table.vocabulary.declare(f.predicate.name, f.predicate.arity + 1)
            return Atom(stamped, (tau, tense) + f.args[1:])
        return f
    if isinstance(f, Conj):
        return Conj(stamp_formula(f.lhs, tau, table), stamp_formula(f.rhs, tau, table), f.pairs)
    if isinstance(f, Neg):
        return Neg(stamp_formula(f.body, tau, table))
    if isinstance(f, Exists):
        return Exists(f.position, stamp_formula(f.body, tau, table))
    return f


def consolidate(
    memory: Memory, tau, table: ConceptTable
) -> tuple[Memory, tuple[TraceStep, ...]]:
    """Move temporary knowledge to permanent memory, stamping ``tau``.

    The content of every temporary atom is rebuilt with the timestamp
    inserted and present tense shifted to past, then re-interned; the
    temporary store ends up empty, so consolidating again is a no-op.
    """
    tau_term = tau if isinstance(tau, Constant) else Constant(str(tau))
    steps: list[TraceStep] = []
    result = Memory((), memory.permanent, memory.next_id)
    for atom in memory.temporary:
        rewritten = stamp_formula(table.recover(atom.content), tau_term, table)
        content = table.interpret(rewritten)
        result, derived, added = result.add_permanent(
            atom.time, atom.subject, content,
            ("consolidated", tau_term.name, atom.id),
            depth=atom.depth,
        )
        if added:
            steps.append(
                TraceStep(
                    RULE_CONSOLIDATE, (atom.id,), derived.id,
                    serialize(table.recover(content)),
                )
            )
    return result, tuple(steps)


def flatten_conjuncts(f: Formula) -> list[Formula]:
    """All leaves of the plain-conjunction spine of a sentence."""
    if isinstance(f, Conj) and not f.pairs:
        return flatten_conjuncts(f.lhs) + flatten_conjuncts(f.rhs)
    return [f]


def answer(memory: Memory, world: World, query: Formula, table: ConceptTable) -> str:
    """Answer a sentence with yes, no or unknown.

    Yes when the query follows from sentences extracted from memory or
    evaluates true in the world; no when its negation does (evaluation
    is closed-world over the active domain); unknown when the query
    cannot be decided either way.
    """
    if free_var_tuple(query):
        raise EpistemicError("queries must be sentences")
    known: set[int] = set()
    for atom in memory.atoms():
        if atom.content.arity != 0:
            continue
        known.add(atom.content.id)
        try:
            sentence = table.recover(atom.content)
        except ConceptError:
            continue
        for part in flatten_conjuncts(sentence):
            known.add(table.interpret(part).id)
    concept = table.interpret(query)
    if concept.id in known:
        return "yes"
    if table.neg(concept).id in known:
        return "no"
    if isinstance(query, Neg) and table.interpret(query.body).id in known:
        return "no"
    try:
        return "yes" if eval_sentence(world, query, table) else "no"
    except MissingExtensionError:
        return "unknown"
