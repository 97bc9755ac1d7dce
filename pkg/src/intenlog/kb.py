"""Knowledge-base files and the session tying the engine together.

A session owns one vocabulary, one concept table, the current world,
the epistemic memory, the grounding registry and an emotion map; every
mutation goes through its methods, so a command script and the
interactive loop behave identically.

KB grammar, one directive per line, ``#`` comments:

    predicate <name>/<arity>
    particular <name>
    ground <pred> <process>
    rule <formula> => <formula>
    assert <formula>
    know <abstracted-term>

Directives execute in order; asserting an undeclared predicate or
referencing an unregistered process is an error naming the line.
"""

from __future__ import annotations

import re

from . import epistemic, worlds
from .epistemic import Memory, MemoryHandle, TraceStep
from .grounding import EmotionMap, GroundingError, GroundingRegistry, TemplateSet, render_nl
from .parser import ParseError, parse_formula, parse_term
from .prp import ConceptError, ConceptTable
from .relalg import Relation
from .syntax import (
    AbstractedTerm,
    Atom,
    Formula,
    FormulaError,
    Vocabulary,
    free_var_tuple,
    serialize,
    serialize_term,
)
from .worlds import World, WorldError


class KBError(Exception):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


class Session:
    """One engine instance: parse, assert, deduce, answer, dump."""

    def __init__(self, budget: int = 3):
        self.vocabulary = Vocabulary()
        self.table = ConceptTable(self.vocabulary)
        self.registry = GroundingRegistry()
        self.templates = TemplateSet()
        self.emotions = EmotionMap()
        self.memory_handle = MemoryHandle()
        self.budget = budget
        self.declared_particulars: list[str] = []
        self.rules: list[tuple[Formula, Formula]] = []
        self.trace: list[TraceStep] = []
        self.world = World(
            timestamp=0,
            particulars=frozenset(self.table.particulars()),
            know_source=self.memory_handle,
            grounding=self.registry,
        )

    @property
    def memory(self) -> Memory:
        return self.memory_handle.memory

    @memory.setter
    def memory(self, value: Memory) -> None:
        self.memory_handle.memory = value

    def _refresh_particulars(self) -> None:
        self.world = self.world.with_particulars(frozenset(self.table.particulars()))

    # -- declarations -----------------------------------------------------

    def declare_predicate(self, name: str, arity: int) -> None:
        self.vocabulary.declare(name, arity)

    def declare_particular(self, name: str) -> None:
        self.table.particular(name)
        if name not in self.declared_particulars:
            self.declared_particulars.append(name)
        self._refresh_particulars()

    def ground_predicate(self, name: str, process_name: str) -> None:
        arities = self.vocabulary.arities(name)
        if not arities:
            raise KBError(f"cannot ground undeclared predicate {name}")
        if len(arities) > 1:
            raise KBError(
                f"predicate {name} declared at arities {arities}; grounding is ambiguous"
            )
        self.registry.bind_predicate(name, arities[0], process_name)

    def add_rule(self, antecedent: Formula, consequent: Formula):
        self.memory, atom = epistemic.add_rule(
            self.memory, antecedent, consequent, self.table
        )
        self.rules.append((antecedent, consequent))
        return atom

    # -- facts and knowledge ------------------------------------------------

    def assert_fact(self, f: Formula) -> None:
        """Add a ground atom to the world's base extension of its predicate."""
        if not isinstance(f, Atom):
            raise KBError(f"only atoms can be asserted, got {serialize(f)}")
        if free_var_tuple(f):
            raise KBError(f"cannot assert an open formula: {serialize(f)}")
        row = tuple(self.table.extend_assignment({}, a) for a in f.args)
        pred = f.predicate
        current = self.world.pred_base.get((pred.name, pred.arity))
        rows = set(current.tuples) if current is not None else set()
        rows.add(row)
        concept = self.table.intern_atom(
            pred,
            tuple(("v", f"x{i}") for i in range(1, pred.arity + 1)),
        )
        self.world = self.world.with_base(concept, Relation(pred.arity, frozenset(rows)))
        self._refresh_particulars()

    def know_term(self, term: AbstractedTerm):
        self.memory, atom, added = epistemic.assert_experience(
            self.memory, term, {}, self.table
        )
        if added:
            self.trace.append(
                TraceStep(
                    epistemic.RULE_EXPERIENCE, (), atom.id,
                    serialize(self.table.recover(atom.content)),
                )
            )
        return atom

    # -- engine commands ------------------------------------------------

    def eval_formula(self, f: Formula) -> bool:
        return worlds.eval_sentence(self.world, f, self.table)

    def chain(self, budget: int | None = None) -> tuple[TraceStep, ...]:
        self.memory, steps = epistemic.forward_chain(
            self.memory, self.world, self.table,
            self.budget if budget is None else budget,
        )
        self.trace.extend(steps)
        return steps

    def consolidate(self, tau) -> tuple[TraceStep, ...]:
        self.memory, steps = epistemic.consolidate(self.memory, tau, self.table)
        self.trace.extend(steps)
        self._refresh_particulars()
        return steps

    def answer(self, f: Formula) -> str:
        return epistemic.answer(self.memory, self.world, f, self.table)

    def render(self, atom_id: int) -> str:
        return render_nl(self.memory.get(atom_id), self.table, self.templates)

    # -- textual interface ----------------------------------------------

    def parse(self, text: str) -> Formula:
        return parse_formula(text, self.vocabulary)

    def execute(self, line: str, line_no: int | None = None) -> str | None:
        """Run one KB directive; returns printable output, if any."""
        try:
            return self._execute(line)
        except (ParseError, FormulaError, ConceptError, WorldError, GroundingError,
                epistemic.EpistemicError) as exc:
            raise KBError(str(exc), line_no) from exc

    def _execute(self, line: str) -> str | None:
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            return None
        head, _, rest = stripped.partition(" ")
        rest = rest.strip()
        if head == "predicate":
            m = re.fullmatch(r"([A-Za-z_][A-Za-z0-9_]*)/([0-9]+)", rest)
            if m is None:
                raise KBError(f"expected 'predicate <name>/<arity>', got {rest!r}")
            self.declare_predicate(m.group(1), int(m.group(2)))
            return None
        if head == "particular":
            if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", rest):
                raise KBError(f"expected 'particular <name>', got {rest!r}")
            self.declare_particular(rest)
            return None
        if head == "ground":
            parts = rest.split()
            if len(parts) != 2:
                raise KBError(f"expected 'ground <pred> <process>', got {rest!r}")
            self.ground_predicate(parts[0], parts[1])
            return None
        if head == "rule":
            if "=>" not in rest:
                raise KBError(f"expected 'rule <formula> => <formula>', got {rest!r}")
            left, right = rest.split("=>", 1)
            self.add_rule(self.parse(left), self.parse(right))
            return None
        if head == "assert":
            self.assert_fact(self.parse(rest))
            return None
        if head == "know":
            term = parse_term(rest, self.vocabulary)
            if not isinstance(term, AbstractedTerm):
                raise KBError(f"know expects an abstracted term, got {rest!r}")
            atom = self.know_term(term)
            return f"k{atom.id}"
        raise KBError(f"unknown directive {head!r}")


def load_kb(source, session: Session | None = None) -> Session:
    """Execute every directive of a KB text (or iterable of lines)."""
    if session is None:
        session = Session()
    lines = source.splitlines() if isinstance(source, str) else list(source)
    for no, line in enumerate(lines, 1):
        session.execute(line, no)
    return session


def dump_kb(session: Session) -> str:
    """Serialize the declarative session state back to KB text.

    Loading the dump into an equally provisioned session (same
    processes registered) reproduces the state: dump(load(dump(s)))
    equals dump(s) byte for byte.
    """
    out: list[str] = []
    for pred in session.vocabulary.declared():
        out.append(f"predicate {pred.name}/{pred.arity}")
    for name in sorted(session.declared_particulars):
        out.append(f"particular {name}")
    for target, process in session.registry.bindings():
        if "/" in target:  # concept-level binds are programmatic, not KB directives
            out.append(f"ground {target.split('/')[0]} {process}")
    for antecedent, consequent in session.rules:
        out.append(f"rule {serialize(antecedent)} => {serialize(consequent)}")
    assert_lines = []
    for (name, arity), rel in session.world.pred_base.items():
        pred = session.vocabulary.resolve(name, arity)
        for row in rel.sorted_rows():
            atom = Atom(pred, tuple(session.table.element_to_term(e) for e in row))
            assert_lines.append(f"assert {serialize(atom)}")
    out.extend(sorted(assert_lines))
    for atom in session.memory.temporary:
        if atom.provenance[0] == epistemic.RULE_EXPERIENCE:
            term = session.table.element_to_term(atom.content)
            out.append(f"know {serialize_term(term)}")
    return "\n".join(out) + "\n"


def dump_concepts(session: Session) -> str:
    lines = [f"p{p.id} {p.name}" for p in session.table.particulars()]
    for u in session.table.concepts():
        lines.append(f"u{u.id} D{u.arity} {session.table.describe(u)}")
    return "\n".join(lines) + "\n"


def dump_world(session: Session) -> str:
    lines = [f"timestamp {session.world.timestamp}"]
    for (name, arity) in sorted(session.world.pred_base):
        rel = session.world.pred_base[(name, arity)]
        rows = " ".join(
            "(" + ",".join(str(e) for e in row) + ")" for row in rel.sorted_rows()
        )
        lines.append(f"{name}/{arity}: {rows}" if rows else f"{name}/{arity}: -")
    for concept in sorted(session.world.concept_base, key=lambda u: u.id):
        rel = session.world.concept_base[concept]
        lines.append(f"u{concept.id}: {'t' if rel.tuples else 'f'}")
    return "\n".join(lines) + "\n"


def dump_memory(session: Session) -> str:
    lines = []
    for store, atoms in (
        ("temporary", session.memory.temporary),
        ("permanent", session.memory.permanent),
    ):
        for atom in atoms:
            prov = atom.provenance[0]
            if prov == "derived":
                prov = f"derived:{atom.provenance[1]}"
            elif prov == "consolidated":
                prov = f"consolidated:{atom.provenance[1]}"
            lines.append(
                f"k{atom.id} [{store}] Know({atom.time}, {atom.subject}, "
                f"u{atom.content.id}) {prov} "
                f"{serialize(session.table.recover(atom.content))}"
            )
    return "\n".join(lines) + "\n" if lines else "memory empty\n"
