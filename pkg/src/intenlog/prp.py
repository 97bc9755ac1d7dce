"""The concept domain and the intensional algebra over it.

Meaning is assigned in two steps: formulas are first interpreted as
interned concepts (particulars, propositions and n-ary universals),
and worlds then map concepts to finite relations.  Interning is
structural: building the same atom or the same composite twice yields
the same handle, while order of the variable tuple, double negation
and other intensional distinctions keep concepts apart even when their
extensions coincide.

Handles are opaque objects carrying an integer id and an arity;
equality is identity.  The table is append-only: concepts are never
mutated or removed, so handles are freely shareable.
"""

from __future__ import annotations

from typing import Mapping

from .syntax import (
    AbstractedTerm,
    Atom,
    Conj,
    Constant,
    Exists,
    Formula,
    FormulaError,
    IDENTITY_NAME,
    Identity,
    KNOW_NAME,
    Neg,
    Predicate,
    TENSES,
    Term,
    TimeValue,
    Top,
    Variable,
    Vocabulary,
    free_var_tuple,
    substitute,
)


class ConceptError(Exception):
    pass


class Particular:
    """An interned individual; equality is identity."""

    __slots__ = ("id", "name")

    def __init__(self, id: int, name: str):
        self.id = id
        self.name = name

    def __repr__(self):
        return self.name


class Concept:
    """An interned universal: a proposition (arity 0) or n-ary concept.

    ``op`` is one of atom / truth / conj / neg / exists; composites
    keep their children and operator parameters so the underlying
    formula can be recovered from the table.
    """

    __slots__ = (
        "id",
        "arity",
        "op",
        "predicate",
        "entries",
        "children",
        "pairs",
        "position",
        "mentions_know",
    )

    def __init__(self, id, arity, op, predicate=None, entries=None, children=(),
                 pairs=None, position=None, mentions_know=False):
        self.id = id
        self.arity = arity
        self.op = op
        self.predicate = predicate
        self.entries = entries
        self.children = children
        self.pairs = pairs
        self.position = position
        self.mentions_know = mentions_know

    def __repr__(self):
        return f"u{self.id}:D{self.arity}"


Element = Particular | Concept

EMPTY_TUPLE_NAME = "<>"
SELF_NAME = "me"
NULL_NAME = "NULL"

_RESERVED = (EMPTY_TUPLE_NAME, SELF_NAME, NULL_NAME) + TENSES

IDENTITY_PREDICATE = Predicate(IDENTITY_NAME, 2)


def pairs_in_bounds(pairs, k: int, j: int) -> bool:
    """Whether the join pairs are usable: in range and column-distinct."""
    firsts = [a for a, _ in pairs]
    seconds = [b for _, b in pairs]
    if len(set(firsts)) != len(firsts) or len(set(seconds)) != len(seconds):
        return False
    return all(1 <= a <= k and 1 <= b <= j for a, b in pairs)


class ConceptTable:
    """Interning table for particulars and concepts.

    Holds the fixed interpretation of the session: the same formula
    always maps to the same concept, and distinct construction keys
    always map to distinct handles.
    """

    def __init__(self, vocabulary: Vocabulary | None = None):
        self.vocabulary = vocabulary if vocabulary is not None else Vocabulary()
        self._particulars: dict[str, Particular] = {}
        self._concepts: dict[tuple, Concept] = {}
        self._next_id = 1
        for name in _RESERVED:
            self.particular(name)
        self.truth = self._make(("truth",), arity=0, op="truth")
        self.identity_concept = self.intern_atom(
            IDENTITY_PREDICATE, (("v", "x"), ("v", "y"))
        )

    # -- interning ----------------------------------------------------------

    def _make(self, key: tuple, **fields) -> Concept:
        found = self._concepts.get(key)
        if found is not None:
            return found
        concept = Concept(self._next_id, **fields)
        self._next_id += 1
        self._concepts[key] = concept
        return concept

    def particular(self, name: str) -> Particular:
        if not name:
            raise ConceptError("particular name must be nonempty")
        found = self._particulars.get(name)
        if found is None:
            found = Particular(self._next_id, name)
            self._next_id += 1
            self._particulars[name] = found
        return found

    def particulars(self) -> list[Particular]:
        return [self._particulars[n] for n in sorted(self._particulars)]

    def empty_tuple(self) -> Particular:
        return self.particular(EMPTY_TUPLE_NAME)

    def concepts(self) -> list[Concept]:
        return sorted(self._concepts.values(), key=lambda u: u.id)

    def intern_atom(self, predicate: Predicate, entries: tuple) -> Concept:
        """Intern an atomic concept.

        Entries describe the argument positions in order: ("v", name)
        for a variable, ("g", element) for a ground element, and
        ("a", concept, alpha_names, beta_names) for an abstraction that
        still has quantifiable variables.  The arity is the number of
        distinct free variable names, honouring their tuple order, so
        permuting the variables yields a different concept.
        """
        entries = tuple(entries)
        if len(entries) != predicate.arity:
            raise ConceptError(
                f"{predicate!r} interned with {len(entries)} entry(ies)"
            )
        key_parts = []
        names: list[str] = []
        mentions_know = predicate.name == KNOW_NAME
        for e in entries:
            if e[0] == "v":
                key_parts.append(("v", e[1]))
                if e[1] not in names:
                    names.append(e[1])
            elif e[0] == "g":
                element = e[1]
                if not isinstance(element, (Particular, Concept)):
                    raise ConceptError(f"not a domain element: {element!r}")
                key_parts.append(("g", type(element).__name__, element.id))
                if isinstance(element, Concept) and element.mentions_know:
                    mentions_know = True
            elif e[0] == "a":
                _, concept, alpha_names, beta_names = e
                key_parts.append(("a", concept.id, tuple(alpha_names), tuple(beta_names)))
                if concept.mentions_know:
                    mentions_know = True
                for n in beta_names:
                    if n not in names:
                        names.append(n)
            else:
                raise ConceptError(f"bad atom entry {e!r}")
        key = ("atom", predicate.name, predicate.arity, tuple(key_parts))
        return self._make(
            key,
            arity=len(names),
            op="atom",
            predicate=predicate,
            entries=entries,
            mentions_know=mentions_know,
        )

    def conj(self, u: Concept, v: Concept, pairs) -> Concept:
        """Indexed conjunction of concepts.

        With usable pairs the result has arity k + j - |pairs|;
        malformed pairs fall back to the Cartesian arity k + j.
        """
        pairs = tuple(sorted({(int(a), int(b)) for a, b in pairs}))
        if pairs_in_bounds(pairs, u.arity, v.arity):
            arity = u.arity + v.arity - len(pairs)
        else:
            arity = u.arity + v.arity
        return self._make(
            ("conj", pairs, u.id, v.id),
            arity=arity,
            op="conj",
            children=(u, v),
            pairs=pairs,
            mentions_know=u.mentions_know or v.mentions_know,
        )

    def neg(self, u: Concept) -> Concept:
        return self._make(
            ("neg", u.id),
            arity=u.arity,
            op="neg",
            children=(u,),
            mentions_know=u.mentions_know,
        )

    def exists(self, n: int, u: Concept) -> Concept:
        """Positional projection; out-of-range n acts as the identity."""
        if not (1 <= n <= u.arity):
            return u
        return self._make(
            ("exists", n, u.id),
            arity=u.arity - 1,
            op="exists",
            children=(u,),
            position=n,
            mentions_know=u.mentions_know,
        )

    def union(self, concepts) -> Concept:
        """Derived union, expanded through negation and conjunction.

        All members must share one arity.  The expansion joins on the
        diagonal pairs of that arity, so extensionalizing the result
        gives the set union of the members' extensions.
        """
        members = sorted(set(concepts), key=lambda u: u.id)
        if not members:
            raise ConceptError("union of an empty concept set")
        arities = {u.arity for u in members}
        if len(arities) > 1:
            raise ConceptError(f"union over mixed arities {sorted(arities)}")
        if len(members) == 1:
            return members[0]
        i = members[0].arity
        diagonal = tuple((l, l) for l in range(1, i + 1))
        acc = self.neg(members[-1])
        for u in reversed(members[:-1]):
            acc = self.conj(self.neg(u), acc, diagonal)
        return self.neg(acc)

    # -- interpretation -----------------------------------------------------

    def interpret(self, f: Formula) -> Concept:
        """The homomorphism from formulas to concepts."""
        if isinstance(f, Top):
            return self.truth
        if isinstance(f, Atom):
            if not self.vocabulary.has(f.predicate):
                raise ConceptError(f"undeclared predicate {f.predicate!r}")
            return self.intern_atom(f.predicate, self._entries(f.args))
        if isinstance(f, Identity):
            return self.intern_atom(IDENTITY_PREDICATE, self._entries((f.left, f.right)))
        if isinstance(f, Conj):
            return self.conj(self.interpret(f.lhs), self.interpret(f.rhs), f.pairs)
        if isinstance(f, Neg):
            return self.neg(self.interpret(f.body))
        if isinstance(f, Exists):
            return self.exists(f.position, self.interpret(f.body))
        raise ConceptError(f"not a formula: {f!r}")

    def _entries(self, args) -> tuple:
        entries = []
        for a in args:
            if isinstance(a, Variable):
                entries.append(("v", a.name))
            elif isinstance(a, Constant):
                entries.append(("g", self.particular(a.name)))
            elif isinstance(a, TimeValue):
                entries.append(("g", self.particular(a.tense)))
            elif isinstance(a, AbstractedTerm):
                if a.is_ground:
                    entries.append(("g", self.interpret(a.body)))
                else:
                    entries.append(
                        (
                            "a",
                            self.interpret(a.body),
                            tuple(v.name for v in a.alpha),
                            tuple(v.name for v in a.beta),
                        )
                    )
            else:
                raise ConceptError(f"not a term: {a!r}")
        return tuple(entries)

    # -- assignments ----------------------------------------------------

    def extend_assignment(self, g: Mapping[Variable, Element], term: Term) -> Element:
        """Extend a variable assignment to all three term kinds.

        Variables look up the assignment, constants intern to their
        particular, and abstracted terms become the concept of their
        body, with ``beta`` variables substituted by assigned values
        first; the result lands in the arity of ``alpha``.
        """
        if isinstance(term, Variable):
            if term not in g:
                raise ConceptError(f"assignment undefined for {term!r}")
            return g[term]
        if isinstance(term, Constant):
            return self.particular(term.name)
        if isinstance(term, TimeValue):
            return self.particular(term.tense)
        if isinstance(term, AbstractedTerm):
            if not term.beta:
                return self.interpret(term.body)
            missing = [v for v in term.beta if v not in g]
            if missing:
                raise ConceptError(
                    f"unbound beta variable(s) {', '.join(map(repr, missing))}"
                )
            bindings = {v: self.element_to_term(g[v]) for v in term.beta}
            return self.interpret(substitute(term.body, bindings))
        raise ConceptError(f"not a term: {term!r}")

    def element_to_term(self, element: Element) -> Term:
        """Render a domain element as a ground term of the syntax."""
        if isinstance(element, Particular):
            if element.name in TENSES:
                return TimeValue(element.name)
            return Constant(element.name)
        if isinstance(element, Concept):
            body = self.recover(element)
            return AbstractedTerm(body, free_var_tuple(body), ())
        raise ConceptError(f"not a domain element: {element!r}")

    # -- recovery -------------------------------------------------------

    def recover(self, u: Concept) -> Formula:
        """Rebuild the formula a concept was interned from.

        Interpreting the result yields ``u`` again.  Only defined for
        concepts that originate from formulas; hand-built composites
        whose join pairs were malformed cannot be expressed.
        """
        if u.op == "truth":
            return Top()
        if u.op == "atom":
            terms = []
            for e in u.entries:
                if e[0] == "v":
                    terms.append(Variable(e[1]))
                elif e[0] == "g":
                    terms.append(self.element_to_term(e[1]))
                else:
                    _, concept, alpha_names, beta_names = e
                    terms.append(
                        AbstractedTerm(
                            self.recover(concept),
                            tuple(Variable(n) for n in alpha_names),
                            tuple(Variable(n) for n in beta_names),
                        )
                    )
            if u.predicate == IDENTITY_PREDICATE:
                return Identity(terms[0], terms[1])
            return Atom(u.predicate, tuple(terms))
        if u.op == "conj":
            try:
                return Conj(self.recover(u.children[0]), self.recover(u.children[1]), u.pairs)
            except FormulaError as exc:
                raise ConceptError(f"concept u{u.id} has no formula form: {exc}") from exc
        if u.op == "neg":
            return Neg(self.recover(u.children[0]))
        if u.op == "exists":
            return Exists(u.position, self.recover(u.children[0]))
        raise ConceptError(f"cannot recover concept {u!r}")

    def describe(self, u: Concept) -> str:
        from .syntax import serialize

        try:
            return serialize(self.recover(u))
        except ConceptError:
            kids = ",".join(f"u{c.id}" for c in u.children)
            return f"{u.op}({kids})"
