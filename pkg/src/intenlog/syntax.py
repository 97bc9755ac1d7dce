"""Abstract syntax of the extended first-order language.

The usual binary conjunction and quantifier are replaced by indexed
families: ``Conj(lhs, rhs, pairs)`` joins its operands on explicit
column pairs, and ``Exists(position, body)`` quantifies away one
position of the body's free-variable tuple.  Every well-formed formula
therefore carries a canonical tuple of free variables, ordered by first
appearance scanning the formula left to right; the column arithmetic of
the relational layer mirrors that tuple exactly.

Formulas and terms are immutable values; all validation happens at
construction time, so anything you can hold is well formed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Union

TENSES = ("in_past", "in_present", "in_future")

KNOW_NAME = "Know"
IDENTITY_NAME = "="


class FormulaError(Exception):
    """A term or formula violates a construction invariant."""


# ---------------------------------------------------------------------------
# Terms


@dataclass(frozen=True)
class Variable:
    name: str

    def __post_init__(self):
        if not self.name:
            raise FormulaError("variable name must be nonempty")

    def __repr__(self):
        return f"?{self.name}"


@dataclass(frozen=True)
class Constant:
    name: str

    def __post_init__(self):
        if not self.name:
            raise FormulaError("constant name must be nonempty")

    def __repr__(self):
        return self.name


@dataclass(frozen=True)
class TimeValue:
    """One of the three tense values a leading time argument may take."""

    tense: str

    def __post_init__(self):
        if self.tense not in TENSES:
            raise FormulaError(
                f"unknown tense {self.tense!r}; expected one of {', '.join(TENSES)}"
            )

    def __repr__(self):
        return self.tense


@dataclass(frozen=True)
class AbstractedTerm:
    """A formula reified as a first-class term.

    ``alpha`` holds the abstracted (bound) variables, ``beta`` the
    externally quantifiable ones; together they partition the body's
    free variables.  The term is ground exactly when ``beta`` is empty,
    and only the ``beta`` variables count as free variables of the term.
    """

    body: "Formula"
    alpha: tuple[Variable, ...] = ()
    beta: tuple[Variable, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "alpha", tuple(self.alpha))
        object.__setattr__(self, "beta", tuple(self.beta))
        body_vars = free_var_tuple(self.body)
        alpha_set, beta_set = set(self.alpha), set(self.beta)
        if len(alpha_set) != len(self.alpha) or len(beta_set) != len(self.beta):
            raise FormulaError("abstraction variable lists must not repeat")
        if alpha_set & beta_set:
            raise FormulaError("alpha and beta must be disjoint")
        if alpha_set | beta_set != set(body_vars):
            raise FormulaError(
                "alpha and beta together must partition the body's free variables"
            )
        if body_vars and not self.alpha:
            raise FormulaError(
                "alpha must be nonempty when the abstracted body has free variables"
            )

    @property
    def is_ground(self) -> bool:
        return not self.beta

    def __repr__(self):
        return serialize_term(self)


Term = Union[Variable, Constant, TimeValue, AbstractedTerm]


def _check_term(value) -> None:
    if not isinstance(value, (Variable, Constant, TimeValue, AbstractedTerm)):
        raise FormulaError(f"not a term: {value!r}")


def _check_ground_term(value) -> None:
    _check_term(value)
    if isinstance(value, Variable):
        raise FormulaError(f"expected a ground term, got variable {value!r}")
    if isinstance(value, AbstractedTerm) and not value.is_ground:
        raise FormulaError(f"expected a ground term, got open abstraction {value!r}")


# ---------------------------------------------------------------------------
# Predicates and formulas


@dataclass(frozen=True)
class Predicate:
    name: str
    arity: int

    def __post_init__(self):
        if not self.name:
            raise FormulaError("predicate name must be nonempty")
        if self.arity < 0:
            raise FormulaError("predicate arity must be >= 0")

    def __repr__(self):
        return f"{self.name}/{self.arity}"


@dataclass(frozen=True)
class Top:
    """The tautology formula; its free-variable tuple is empty."""

    def __repr__(self):
        return "Top"


@dataclass(frozen=True)
class Atom:
    predicate: Predicate
    args: tuple[Term, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))
        if len(self.args) != self.predicate.arity:
            raise FormulaError(
                f"{self.predicate!r} applied to {len(self.args)} argument(s)"
            )
        for a in self.args:
            _check_term(a)

    def __repr__(self):
        return serialize(self)


@dataclass(frozen=True)
class Identity:
    left: Term
    right: Term

    def __post_init__(self):
        _check_term(self.left)
        _check_term(self.right)

    def __repr__(self):
        return serialize(self)


@dataclass(frozen=True)
class Conj:
    """Indexed conjunction: joins the operands on ``pairs`` of columns.

    Each pair (i, j) relates position i of the left operand's free
    tuple to position j of the right one's.  The result's free tuple is
    the left tuple followed by the right tuple minus its joined
    positions, so any free variable shared by the operands must be
    joined, otherwise the canonical tuple would repeat a name.
    """

    lhs: "Formula"
    rhs: "Formula"
    pairs: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        norm = tuple(sorted({(int(a), int(b)) for a, b in self.pairs}))
        object.__setattr__(self, "pairs", norm)
        lt = free_var_tuple(self.lhs)
        rt = free_var_tuple(self.rhs)
        k, j = len(lt), len(rt)
        firsts = [a for a, _ in norm]
        seconds = [b for _, b in norm]
        for a, b in norm:
            if not (1 <= a <= k and 1 <= b <= j):
                raise FormulaError(
                    f"join pair ({a},{b}) out of range for free arities ({k},{j})"
                )
        if len(set(firsts)) != len(firsts) or len(set(seconds)) != len(seconds):
            raise FormulaError(f"duplicate column in join pairs {norm}")
        surviving = [rt[p] for p in range(j) if p + 1 not in set(seconds)]
        left_names = {v.name for v in lt}
        for v in surviving:
            if v.name in left_names:
                raise FormulaError(
                    f"shared free variable ?{v.name} must be joined by a pair"
                )

    def __repr__(self):
        return serialize(self)


@dataclass(frozen=True)
class Neg:
    body: "Formula"

    def __repr__(self):
        return serialize(self)


@dataclass(frozen=True)
class Exists:
    """Quantifies away the ``position``-th free variable of the body."""

    position: int
    body: "Formula"

    def __post_init__(self):
        k = len(free_var_tuple(self.body))
        if not (1 <= self.position <= k):
            raise FormulaError(
                f"quantifier position {self.position} out of range for free arity {k}"
            )

    def __repr__(self):
        return serialize(self)


Formula = Union[Top, Atom, Identity, Conj, Neg, Exists]


def bottom() -> Formula:
    """The contradiction formula, negation of the tautology."""
    return Neg(Top())


# ---------------------------------------------------------------------------
# Free variables


def term_free_vars(term: Term) -> tuple[Variable, ...]:
    if isinstance(term, Variable):
        return (term,)
    if isinstance(term, AbstractedTerm):
        return term.beta
    return ()


def free_var_tuple(f: Formula) -> tuple[Variable, ...]:
    """The canonical free-variable tuple, ordered by first appearance."""
    if isinstance(f, Top):
        return ()
    if isinstance(f, (Atom, Identity)):
        args = f.args if isinstance(f, Atom) else (f.left, f.right)
        seen: list[Variable] = []
        for a in args:
            for v in term_free_vars(a):
                if v not in seen:
                    seen.append(v)
        return tuple(seen)
    if isinstance(f, Conj):
        lt = free_var_tuple(f.lhs)
        rt = free_var_tuple(f.rhs)
        joined = {b for _, b in f.pairs}
        return lt + tuple(v for p, v in enumerate(rt, 1) if p not in joined)
    if isinstance(f, Neg):
        return free_var_tuple(f.body)
    if isinstance(f, Exists):
        bt = free_var_tuple(f.body)
        return bt[: f.position - 1] + bt[f.position :]
    raise FormulaError(f"not a formula: {f!r}")


def free_arity(f: Formula) -> int:
    return len(free_var_tuple(f))


def is_sentence(f: Formula) -> bool:
    return not free_var_tuple(f)


# ---------------------------------------------------------------------------
# Substitution


def substitute(f: Formula, bindings: Mapping[Variable, Term]) -> Formula:
    """Uniformly replace free variables of ``f`` by ground terms.

    Binding keys must be free variables of ``f``; replacement never
    reaches the alpha variables of nested abstracted terms, which act
    as binders.  When a join pair of a conjunction relates a bound
    variable to an unbound one, the binding propagates across the pair,
    since the join pins the two columns equal.
    """
    free = set(free_var_tuple(f))
    for v, t in bindings.items():
        if v not in free:
            raise FormulaError(f"cannot bind non-free variable {v!r}")
        _check_ground_term(t)
    return _sub(f, dict(bindings))


def _sub_term(term: Term, binds: dict[Variable, Term]) -> Term:
    if isinstance(term, Variable):
        return binds.get(term, term)
    if isinstance(term, AbstractedTerm):
        inner = {v: t for v, t in binds.items() if v in term.beta}
        if not inner:
            return term
        return AbstractedTerm(
            _sub(term.body, inner),
            term.alpha,
            tuple(v for v in term.beta if v not in inner),
        )
    return term


def _sub(f: Formula, binds: dict[Variable, Term]) -> Formula:
    if not binds or isinstance(f, Top):
        return f
    if isinstance(f, Atom):
        return Atom(f.predicate, tuple(_sub_term(a, binds) for a in f.args))
    if isinstance(f, Identity):
        return Identity(_sub_term(f.left, binds), _sub_term(f.right, binds))
    if isinstance(f, Neg):
        return Neg(_sub(f.body, binds))
    if isinstance(f, Exists):
        bt = free_var_tuple(f.body)
        pivot = bt[f.position - 1]
        body = _sub(f.body, {v: t for v, t in binds.items() if v != pivot})
        new_bt = free_var_tuple(body)
        return Exists(new_bt.index(pivot) + 1, body)
    if isinstance(f, Conj):
        lt = free_var_tuple(f.lhs)
        rt = free_var_tuple(f.rhs)
        eff = dict(binds)
        changed = True
        while changed:
            changed = False
            for i, j in f.pairs:
                vl, vr = lt[i - 1], rt[j - 1]
                if vl in eff and vr not in eff:
                    eff[vr] = eff[vl]
                    changed = True
                elif vr in eff and vl not in eff:
                    eff[vl] = eff[vr]
                    changed = True
        lhs = _sub(f.lhs, {v: t for v, t in eff.items() if v in set(lt)})
        rhs = _sub(f.rhs, {v: t for v, t in eff.items() if v in set(rt)})
        new_lt = free_var_tuple(lhs)
        new_rt = free_var_tuple(rhs)
        pairs = []
        for i, j in f.pairs:
            vl, vr = lt[i - 1], rt[j - 1]
            if vl in eff:
                continue
            pairs.append((new_lt.index(vl) + 1, new_rt.index(vr) + 1))
        return Conj(lhs, rhs, tuple(pairs))
    raise FormulaError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# Serialization (the parser in parser.py is its inverse)


def serialize_term(term: Term) -> str:
    if isinstance(term, Variable):
        return f"?{term.name}"
    if isinstance(term, Constant):
        return term.name
    if isinstance(term, TimeValue):
        return term.tense
    if isinstance(term, AbstractedTerm):
        out = f"<< {serialize(term.body)} >>"
        if term.alpha:
            out += "_{" + " ".join(v.name for v in term.alpha) + "}"
        if term.beta:
            out += "^{" + " ".join(v.name for v in term.beta) + "}"
        return out
    raise FormulaError(f"not a term: {term!r}")


def serialize(f: Formula) -> str:
    if isinstance(f, Top):
        return "Top"
    if isinstance(f, Atom):
        return f"{f.predicate.name}({', '.join(serialize_term(a) for a in f.args)})"
    if isinstance(f, Identity):
        return f"{serialize_term(f.left)} = {serialize_term(f.right)}"
    if isinstance(f, Conj):
        pairs = ",".join(f"({a},{b})" for a, b in f.pairs)
        return f"({serialize(f.lhs)} /\\{{{pairs}}} {serialize(f.rhs)})"
    if isinstance(f, Neg):
        return f"~ {serialize(f.body)}"
    if isinstance(f, Exists):
        return f"E{{{f.position}}} {serialize(f.body)}"
    raise FormulaError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# Vocabulary of declared predicates


class Vocabulary:
    """Declared predicates, keyed by name and arity.

    The epistemic predicate Know/3 is built in.  The same name may be
    declared at several arities (consolidation adds timestamped
    variants), so resolution needs both name and argument count.
    """

    def __init__(self):
        self._preds: dict[tuple[str, int], Predicate] = {}
        self.declare(KNOW_NAME, 3)

    def declare(self, name: str, arity: int) -> Predicate:
        key = (name, arity)
        if key not in self._preds:
            self._preds[key] = Predicate(name, arity)
        return self._preds[key]

    def has(self, predicate: Predicate) -> bool:
        return (predicate.name, predicate.arity) in self._preds

    def resolve(self, name: str, nargs: int) -> Predicate:
        key = (name, nargs)
        if key in self._preds:
            return self._preds[key]
        others = sorted(a for n, a in self._preds if n == name)
        if others:
            raise FormulaError(
                f"arity mismatch: {name} declared with arity "
                f"{'/'.join(map(str, others))}, applied to {nargs} argument(s)"
            )
        raise FormulaError(f"undeclared predicate {name}")

    def arities(self, name: str) -> tuple[int, ...]:
        return tuple(sorted(a for n, a in self._preds if n == name))

    def declared(self) -> list[Predicate]:
        return [self._preds[k] for k in sorted(self._preds)]
