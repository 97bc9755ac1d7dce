"""Grounding: binding atomic concepts to executable mock processes,
plus the partial natural-language interface around them.

Processes stand in for the perception and classification machinery a
real agent would run; here they are table-driven and deterministic, so
a corpus file fully fixes their output.  The registry binds predicates
(or individual atomic concepts, for grounded propositions) to
processes; worlds consult it whenever an atom has no asserted base
extension.

The language side is deliberately narrow: a verb template file drives
both the chunking of spatial commands into figure / verb / spatial
relation / landmark clauses and the inverse rendering of formulas and
Know atoms back to sentences.  Unmatched input is an error, never a
guess.

Corpus file, one record per line:      clip <id> satisfies=<true|false>
Verb template file, one per line:      verb <lemma> past=<form> pred=<name>/<arity> slots=<s1,s2,...>
Blank lines and ``#`` comments are ignored in both.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Iterable

from .prp import Concept, ConceptTable, NULL_NAME, SELF_NAME
from .relalg import Relation
from .syntax import (
    AbstractedTerm,
    Atom,
    Conj,
    Constant,
    Formula,
    KNOW_NAME,
    TimeValue,
    Variable,
    Vocabulary,
    free_var_tuple,
)
from .worlds import World, extension, is_canonical_atom


class GroundingError(Exception):
    pass


class NotParseable(GroundingError):
    """The input does not match any registered language template."""


PROCESS_KINDS = ("PR", "SDC", "ML")


@dataclass(frozen=True)
class GroundingProcess:
    """A deterministic mock process producing a relation from a world."""

    name: str
    kind: str
    run: Callable[[World], Relation]

    def __post_init__(self):
        if self.kind not in PROCESS_KINDS:
            raise GroundingError(
                f"unknown process kind {self.kind!r}; expected one of {PROCESS_KINDS}"
            )


class GroundingRegistry:
    """Bindings from atomic concepts and predicates to processes.

    Immutable after setup by convention: worlds hold a reference and
    read from it during evaluation.
    """

    def __init__(self):
        self._processes: dict[str, GroundingProcess] = {}
        self._concept_binds: dict[Concept, str] = {}
        self._pred_binds: dict[tuple[str, int], str] = {}

    def register_process(self, process: GroundingProcess) -> "GroundingRegistry":
        if process.name in self._processes:
            raise GroundingError(f"process {process.name!r} already registered")
        self._processes[process.name] = process
        return self

    def process(self, name: str) -> GroundingProcess:
        if name not in self._processes:
            raise GroundingError(f"no process named {name!r}")
        return self._processes[name]

    def process_names(self) -> list[str]:
        return sorted(self._processes)

    def bind_concept(self, concept: Concept, process_name: str) -> "GroundingRegistry":
        """Ground an atomic concept: canonical atoms bind their whole
        predicate, other atoms (grounded propositions and the like)
        bind individually."""
        if not isinstance(concept, Concept) or concept.op != "atom":
            raise GroundingError("only atomic concepts can be grounded")
        self.process(process_name)
        if is_canonical_atom(concept):
            pred = concept.predicate
            self._pred_binds[(pred.name, pred.arity)] = process_name
        else:
            self._concept_binds[concept] = process_name
        return self

    def bind_predicate(self, name: str, arity: int, process_name: str) -> "GroundingRegistry":
        self.process(process_name)
        self._pred_binds[(name, arity)] = process_name
        return self

    def is_bound(self, concept: Concept) -> bool:
        if concept in self._concept_binds:
            return True
        if concept.op == "atom":
            pred = concept.predicate
            return (pred.name, pred.arity) in self._pred_binds
        return False

    def bindings(self) -> list[tuple[str, str]]:
        """(target, process) pairs, deterministic, for dumps."""
        out = [(f"{n}/{a}", p) for (n, a), p in self._pred_binds.items()]
        out += [(f"u{c.id}", p) for c, p in self._concept_binds.items()]
        return sorted(out)

    # hooks the world evaluator calls

    def lookup_concept(self, world: World, concept: Concept) -> Relation | None:
        name = self._concept_binds.get(concept)
        if name is None:
            return None
        rel = self._processes[name].run(world)
        if rel.arity != concept.arity:
            raise GroundingError(
                f"process {name!r} produced arity {rel.arity} for concept of "
                f"arity {concept.arity}"
            )
        return rel

    def lookup_predicate(self, world: World, name: str, arity: int) -> Relation | None:
        pname = self._pred_binds.get((name, arity))
        if pname is None:
            return None
        rel = self._processes[pname].run(world)
        if rel.arity != arity:
            raise GroundingError(
                f"process {pname!r} produced arity {rel.arity} for {name}/{arity}"
            )
        return rel


def run_grounding(registry: GroundingRegistry, world: World, concept: Concept) -> Relation:
    """Evaluate a bound concept's extension through its process.

    The result is memoized on the world, so repeated runs in one world
    return the identical relation.
    """
    if not registry.is_bound(concept):
        raise GroundingError(f"concept u{concept.id} is not bound to any process")
    return extension(world, concept)


# ---------------------------------------------------------------------------
# Table-driven mock processes


def load_corpus(source) -> list[tuple[str, bool]]:
    """Parse a clip corpus; returns (clip id, positive label) in file order."""
    lines = source.splitlines() if isinstance(source, str) else list(source)
    out = []
    for no, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        m = re.fullmatch(r"clip\s+(\S+)\s+satisfies=(true|false)", line)
        if m is None:
            raise GroundingError(f"corpus line {no}: cannot parse {line!r}")
        out.append((m.group(1), m.group(2) == "true"))
    return out


def corpus_process(name: str, corpus, table: ConceptTable) -> GroundingProcess:
    """ML-style mock: the unary relation of every clip in the corpus."""
    rel = Relation(1, frozenset((table.particular(cid),) for cid, _ in corpus))
    return GroundingProcess(name, "ML", lambda world: rel)


def retrieval_process(
    name: str, corpus, query_concept: Concept, table: ConceptTable
) -> GroundingProcess:
    """PR-style mock for the retrieval predicate: emits one tuple
    (present, self, clip, query) per positively labelled clip."""
    now = table.particular("in_present")
    me = table.particular(SELF_NAME)
    rel = Relation(
        4,
        frozenset(
            (now, me, table.particular(cid), query_concept)
            for cid, positive in corpus
            if positive
        ),
    )
    return GroundingProcess(name, "PR", lambda world: rel)


def truth_process(name: str, value: bool, kind: str = "SDC") -> GroundingProcess:
    """Mock grounding of a proposition to a fixed truth value."""
    rel = Relation(0, frozenset({()} if value else ()))
    return GroundingProcess(name, kind, lambda world: rel)


# ---------------------------------------------------------------------------
# Spatial description clauses and the partial parse


@dataclass(frozen=True)
class SDC:
    """A spatial description clause: figure, verb, spatial relation and
    landmark, each optional but never all absent."""

    figure: str | None = None
    verb: str | None = None
    spatial_relation: str | None = None
    landmark: str | None = None

    def __post_init__(self):
        if not (self.figure or self.verb or self.spatial_relation or self.landmark):
            raise GroundingError("an SDC needs at least one component")


@dataclass(frozen=True)
class VerbTemplate:
    lemma: str
    past: str
    pred_name: str
    pred_arity: int
    slots: tuple[str, ...]

    @property
    def is_retrieval(self) -> bool:
        return self.slots[-1] == "query"

    @property
    def object_word(self) -> str:
        return self.slots[0]


_TEMPLATE_RE = re.compile(
    r"verb\s+(\S+)\s+past=(\S+)\s+pred=([A-Za-z_][A-Za-z0-9_]*)/([0-9]+)\s+slots=(\S+)"
)


class TemplateSet:
    def __init__(self, templates: Iterable[VerbTemplate] = ()):
        self._by_lemma: dict[str, VerbTemplate] = {}
        self._by_past: dict[str, VerbTemplate] = {}
        self._by_pred: dict[str, VerbTemplate] = {}
        for t in templates:
            self.add(t)

    def add(self, template: VerbTemplate) -> None:
        if template.is_retrieval:
            expected = 2 + len(template.slots)
        else:
            expected = 1 + len(template.slots)
        if template.pred_arity != expected:
            raise GroundingError(
                f"template for {template.pred_name}/{template.pred_arity} expects "
                f"{expected} argument(s) from its slots"
            )
        self._by_lemma[template.lemma] = template
        self._by_past[template.past] = template
        self._by_pred[template.pred_name] = template

    def templates(self) -> list[VerbTemplate]:
        return [self._by_lemma[k] for k in sorted(self._by_lemma)]

    def for_predicate(self, name: str) -> VerbTemplate | None:
        return self._by_pred.get(name)

    def find_verb(self, tokens: list[str]) -> tuple[int, VerbTemplate, str] | None:
        """First verb occurrence: (index, template, tense)."""
        for i, tok in enumerate(tokens):
            if tok in self._by_past:
                return i, self._by_past[tok], "in_past"
            if tok in self._by_lemma:
                tense = "in_future" if i > 0 and tokens[i - 1] == "will" else "in_present"
                return i, self._by_lemma[tok], tense
            if tok.endswith("s") and tok[:-1] in self._by_lemma:
                return i, self._by_lemma[tok[:-1]], "in_present"
        return None


def load_templates(source) -> TemplateSet:
    lines = source.splitlines() if isinstance(source, str) else list(source)
    templates = TemplateSet()
    for no, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        m = _TEMPLATE_RE.fullmatch(line)
        if m is None:
            raise GroundingError(f"template line {no}: cannot parse {line!r}")
        templates.add(
            VerbTemplate(
                m.group(1), m.group(2), m.group(3), int(m.group(4)),
                tuple(m.group(5).split(",")),
            )
        )
    return templates


ARTICLES = ("the", "a", "an")
SPATIAL_RELATIONS = ("from", "through", "to")


def _tokens(nl) -> list[str]:
    words = nl.split() if isinstance(nl, str) else list(nl)
    return [w.strip(".,;:!?\"'").lower() for w in words if w.strip(".,;:!?\"'")]


def chunk_sdcs(tokens: list[str], template: VerbTemplate, verb_index: int) -> list[SDC]:
    """Chunk a spatial sentence into its description clauses."""
    figure_words = list(tokens[:verb_index])
    if figure_words and figure_words[0] in ARTICLES:
        figure_words = figure_words[1:]
    if not figure_words:
        raise NotParseable("no figure before the verb")
    rest = tokens[verb_index + 1 :]
    if rest and rest[0] not in SPATIAL_RELATIONS:
        raise NotParseable(f"expected a spatial relation after the verb, got {rest[0]!r}")
    chunks: list[tuple[str, list[str]]] = []
    for tok in rest:
        if tok in SPATIAL_RELATIONS:
            chunks.append((tok, []))
        else:
            chunks[-1][1].append(tok)
    seen = set()
    sdcs = []
    for i, (sr, landmark_words) in enumerate(chunks):
        if sr in seen:
            raise NotParseable(f"duplicate spatial relation {sr!r}")
        if not landmark_words:
            raise NotParseable(f"spatial relation {sr!r} lacks a landmark")
        seen.add(sr)
        sdcs.append(
            SDC(
                figure=" ".join(figure_words) if i == 0 else None,
                verb=tokens[verb_index] if i == 0 else None,
                spatial_relation=sr,
                landmark=" ".join(landmark_words),
            )
        )
    if not sdcs:
        return [SDC(figure=" ".join(figure_words), verb=tokens[verb_index])]
    return sdcs


def pars(nl, templates: TemplateSet, vocabulary: Vocabulary) -> Formula:
    """The partial mapping from word lists to formulas.

    Spatial sentences chunk into description clauses filling the verb
    predicate's slots (missing relations become NULL); retrieval
    commands of the shape ``<verb> <object> such that <sentence> in the
    given set of <plural>`` build the conjunction of the retrieval atom
    with the plural predicate over a fresh variable.  Anything else is
    not parseable.
    """
    tokens = _tokens(nl)
    if not tokens:
        raise NotParseable("empty input")
    found = templates.find_verb(tokens)
    if found is None:
        raise NotParseable(f"no registered verb in {' '.join(tokens)!r}")
    verb_index, template, tense = found
    if template.is_retrieval:
        return _pars_retrieval(tokens, verb_index, template, tense, templates, vocabulary)
    return _pars_spatial(tokens, verb_index, template, tense, vocabulary)


def _pars_spatial(tokens, verb_index, template, tense, vocabulary) -> Formula:
    sdcs = chunk_sdcs(tokens, template, verb_index)
    by_relation = {s.spatial_relation: s for s in sdcs if s.spatial_relation}
    figure = sdcs[0].figure.replace(" ", "_")
    args = [TimeValue(tense), Constant(figure)]
    for slot in template.slots[1:]:
        sdc = by_relation.get(slot)
        if sdc is None:
            args.append(Constant(NULL_NAME))
        else:
            args.append(Constant(f"{sdc.spatial_relation}_{sdc.landmark}".replace(" ", "_")))
    pred = vocabulary.resolve(template.pred_name, template.pred_arity)
    return Atom(pred, tuple(args))


_RETRIEVAL_TAIL = ("in", "the", "given", "set", "of")


def _pars_retrieval(tokens, verb_index, template, tense, templates, vocabulary) -> Formula:
    after = tokens[verb_index + 1 :]
    if len(after) < 3 or after[1:3] != ["such", "that"]:
        raise NotParseable("retrieval command must read '<verb> <object> such that ...'")
    plural = None
    sub = after[3:]
    if len(sub) > 6 and tuple(sub[-6:-1]) == _RETRIEVAL_TAIL:
        plural = sub[-1]
        sub = sub[:-6]
    query = pars(sub, templates, vocabulary)
    if free_var_tuple(query):
        raise NotParseable("the requirement clause must be a sentence")
    pred = vocabulary.resolve(template.pred_name, template.pred_arity)
    variable = Variable("y")
    atom = Atom(
        pred,
        (TimeValue(tense), Constant(SELF_NAME), variable, AbstractedTerm(query)),
    )
    if plural is None:
        return atom
    plural_pred = vocabulary.resolve(plural, 1)
    return Conj(atom, Atom(plural_pred, (variable,)), ((1, 1),))


# ---------------------------------------------------------------------------
# Rendering back to natural language


def render_nl(x, table: ConceptTable, templates: TemplateSet) -> str:
    """Deterministic template rendering of formulas and Know atoms.

    Know atoms speak in the first person ("I know that I am (me)
    finding ..."); bare formulas use command voice for open retrieval
    shapes, so rendering inverts the parse.
    """
    from .epistemic import KnowAtom

    if isinstance(x, KnowAtom):
        body = _render_concept(x.content, table, templates, capitalize=False)
        if body.startswith("I am (me)"):
            return f"I (me) know that {body}."
        return f"I know that {body}."
    concept = x if isinstance(x, Concept) else table.interpret(x)
    text = _render_concept(concept, table, templates, capitalize=True, voice="command")
    return f"{text}." if text.startswith("I ") else text


def _words(name: str) -> str:
    return name.replace("_", " ")


def _render_concept(u: Concept, table, templates, capitalize: bool,
                    voice: str = "progressive") -> str:
    text = _render_inner(u, table, templates, voice)
    if capitalize and text:
        text = text[0].upper() + text[1:]
    return text


def _render_inner(u: Concept, table, templates, voice: str = "progressive") -> str:
    if u.op == "truth":
        return "truth"
    if u.op == "neg":
        return f"it is not the case that {_render_inner(u.children[0], table, templates)}"
    if u.op == "atom":
        return _render_atom(u, table, templates, partner=None, voice=voice)
    if u.op == "conj":
        if _is_retrieval_conj(u, templates):
            return _render_atom(
                u.children[0], table, templates, partner=u.children[1], voice=voice
            )
        if u.arity == 0:
            parts = _conj_parts(u, templates)
            return " and ".join(_render_inner(p, table, templates, voice) for p in parts)
    raise GroundingError(f"no rendering template for concept u{u.id} ({u.op})")


def _is_retrieval_conj(u: Concept, templates) -> bool:
    lhs, rhs = u.children
    if lhs.op != "atom" or rhs.op != "atom" or rhs.predicate.arity != 1:
        return False
    template = templates.for_predicate(lhs.predicate.name)
    return template is not None and template.is_retrieval


def _conj_parts(u: Concept, templates) -> list[Concept]:
    if u.op == "conj" and not _is_retrieval_conj(u, templates) and not u.pairs:
        return _conj_parts(u.children[0], templates) + _conj_parts(u.children[1], templates)
    return [u]


def _render_atom(u: Concept, table, templates, partner, voice: str = "progressive") -> str:
    pred = u.predicate
    if pred.name == KNOW_NAME and pred.arity == 3:
        content = u.entries[2]
        if content[0] != "g" or not isinstance(content[1], Concept):
            raise GroundingError("cannot render an open epistemic atom")
        return f"I know that {_render_inner(content[1], table, templates)}"
    template = templates.for_predicate(pred.name)
    if template is None:
        if pred.arity == 1 and pred.name.endswith("s"):
            return f"{_entry_words(u.entries[0])} is a {pred.name[:-1]}"
        raise GroundingError(f"no NL template for predicate {pred!r}")
    if template.is_retrieval:
        return _render_retrieval(u, template, table, templates, partner, voice)
    return _render_spatial(u, template)


def _entry_words(entry) -> str:
    if entry[0] == "v":
        return entry[1]
    return _words(entry[1].name)


def _render_spatial(u: Concept, template: VerbTemplate) -> str:
    offset = 1 if u.predicate.arity == 1 + len(template.slots) else 2
    parts = []
    if offset == 2:
        parts.append(f"at {_entry_words(u.entries[0])}")
    tense = u.entries[offset - 1]
    if tense[0] != "g":
        raise GroundingError("spatial atoms render with a ground tense")
    verb = {
        "in_past": template.past,
        "in_present": template.lemma + "s",
        "in_future": "will " + template.lemma,
    }[tense[1].name]
    figure = _entry_words(u.entries[offset])
    words = [f"the {figure}", verb] + parts
    for entry in u.entries[offset + 1 :]:
        if entry[0] == "g" and entry[1].name == NULL_NAME:
            continue
        words.append(_entry_words(entry))
    return " ".join(words)


def _render_retrieval(u, template, table, templates, partner,
                      voice: str = "progressive") -> str:
    stamped = u.predicate.arity == 3 + len(template.slots)
    offset = 1 if stamped else 0
    tau = _entry_words(u.entries[0]) if stamped else None
    tense_entry = u.entries[offset]
    if tense_entry[0] != "g":
        raise GroundingError("retrieval atoms render with a ground tense")
    tense = tense_entry[1].name
    obj = u.entries[offset + 2]
    query = u.entries[offset + 3]
    if query[0] != "g" or not isinstance(query[1], Concept):
        raise GroundingError("retrieval atoms render with a reified requirement")
    requirement = _render_inner(query[1], table, templates)
    word = template.object_word
    if tense == "in_past" and stamped:
        return (
            f"I have {template.past} at {tau} the {word} {_entry_words(obj)} "
            f"which satisfied user requirement '{requirement}'"
        )
    if tense == "in_present" and obj[0] == "v":
        if voice == "command":
            suffix = (
                f" in the given set of {partner.predicate.name}"
                if partner is not None
                else ""
            )
            return f"{template.lemma} {word} such that {requirement}{suffix}"
        suffix = (
            f" in the set of {partner.predicate.name}" if partner is not None else ""
        )
        return f"I am (me) {template.lemma}ing {word} such that {requirement}{suffix}"
    if tense == "in_present":
        return (
            f"I am (me) {template.lemma}ing the {word} {_entry_words(obj)} "
            f"such that {requirement}"
        )
    if tense == "in_future":
        return f"I will {template.lemma} the {word} {_entry_words(obj)} such that {requirement}"
    return f"I {template.past} the {word} {_entry_words(obj)} such that {requirement}"


# ---------------------------------------------------------------------------
# Fuzzy-emotion annotation hook


class EmotionMap:
    """Per-kind partial maps from concepts to degrees in [0, 1]."""

    def __init__(self):
        self._maps: dict[str, dict[Concept, float]] = {}

    def set(self, kind: str, concept: Concept, value: float) -> None:
        if not (0.0 <= value <= 1.0):
            raise GroundingError(f"emotion degree {value} outside [0, 1]")
        self._maps.setdefault(kind, {})[concept] = value

    def get(self, kind: str, concept: Concept) -> float | None:
        return self._maps.get(kind, {}).get(concept)

    def kinds(self) -> list[str]:
        return sorted(self._maps)
