"""Immutable syntax trees for first-order terms, formulas and proof scripts."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Union


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class App:
    """Function application; a constant has no arguments."""

    functor: str
    args: tuple[Term, ...] = ()

    def __str__(self) -> str:
        if not self.args:
            return self.functor
        return f"{self.functor}({','.join(str(a) for a in self.args)})"


Term = Union[Var, App]


@dataclass(frozen=True)
class Atom:
    predicate: str
    args: tuple[Term, ...] = ()


@dataclass(frozen=True)
class Eq:
    lhs: Term
    rhs: Term


@dataclass(frozen=True)
class Not:
    body: Formula


AND, OR, IMPLIES, IFF, XOR = "&", "|", "=>", "<=>", "<~>"
CONNECTIVES = (AND, OR, IMPLIES, IFF, XOR)
FORALL, EXISTS = "!", "?"


@dataclass(frozen=True)
class Binary:
    op: str
    lhs: Formula
    rhs: Formula

    def __post_init__(self):
        if self.op not in CONNECTIVES:
            raise ValueError(f"unknown connective {self.op!r}")


@dataclass(frozen=True)
class Quant:
    kind: str
    variables: tuple[str, ...]
    body: Formula

    def __post_init__(self):
        if self.kind not in (FORALL, EXISTS):
            raise ValueError(f"unknown quantifier {self.kind!r}")
        if not self.variables:
            raise ValueError("quantifier needs at least one variable")


Formula = Union[Atom, Eq, Not, Binary, Quant]

TRUE = Atom("$true")
FALSE = Atom("$false")


def conj(*parts: Formula) -> Formula:
    """Left-nested conjunction of ``parts`` (``$true`` when empty)."""
    if not parts:
        return TRUE
    out = parts[0]
    for p in parts[1:]:
        out = Binary(AND, out, p)
    return out


def disj(*parts: Formula) -> Formula:
    if not parts:
        return FALSE
    out = parts[0]
    for p in parts[1:]:
        out = Binary(OR, out, p)
    return out


def implies(a: Formula, b: Formula) -> Formula:
    return Binary(IMPLIES, a, b)


def forall(variables, body: Formula) -> Formula:
    variables = tuple(variables)
    return Quant(FORALL, variables, body) if variables else body


def exists(variables, body: Formula) -> Formula:
    variables = tuple(variables)
    return Quant(EXISTS, variables, body) if variables else body


def flatten(f: Formula, op: str) -> list[Formula]:
    """Operands of a chain of ``op`` regardless of how it was nested."""
    if isinstance(f, Binary) and f.op == op:
        return flatten(f.lhs, op) + flatten(f.rhs, op)
    return [f]


def subterms(t: Term) -> Iterator[Term]:
    yield t
    if isinstance(t, App):
        for a in t.args:
            yield from subterms(a)


def term_symbols(t: Term, out: set[tuple[str, int]]) -> None:
    if isinstance(t, App):
        out.add((t.functor, len(t.args)))
        for a in t.args:
            term_symbols(a, out)


def symbols(f: Formula) -> tuple[set[tuple[str, int]], set[tuple[str, int]]]:
    """Return ``(functions, predicates)`` as sets of (name, arity)."""
    funs: set[tuple[str, int]] = set()
    preds: set[tuple[str, int]] = set()

    def walk(g: Formula) -> None:
        if isinstance(g, Atom):
            if not g.predicate.startswith("$"):
                preds.add((g.predicate, len(g.args)))
            for a in g.args:
                term_symbols(a, funs)
        elif isinstance(g, Eq):
            term_symbols(g.lhs, funs)
            term_symbols(g.rhs, funs)
        elif isinstance(g, Not):
            walk(g.body)
        elif isinstance(g, Binary):
            walk(g.lhs)
            walk(g.rhs)
        else:
            walk(g.body)

    walk(f)
    return funs, preds


# Statements -----------------------------------------------------------------

ROLES = frozenset({
    "axiom", "hypothesis", "definition", "conjecture", "checked_definition",
    "checked_lemma", "plain", "lemma", "negated_conjecture",
})

ADD_CASES = "add_cases"
ASSUME_PREVIOUS_VALID = "assume_previous_valid"
RESTRICT_PREMISES = "restrict_premises"
EXPAND_DEFINITIONS_IN = "expand_definitions_in"
TPI_VERBS = (ADD_CASES, ASSUME_PREVIOUS_VALID, RESTRICT_PREMISES, EXPAND_DEFINITIONS_IN)


@dataclass(frozen=True)
class Span:
    line: int
    column: int
    end_line: int
    end_column: int
    path: str | None = None

    def __str__(self) -> str:
        where = f"{self.path}:" if self.path else ""
        return f"{where}{self.line}:{self.column}"


@dataclass(frozen=True)
class AnnotatedStatement:
    name: str
    role: str
    formula: Formula
    source: str | None = None
    info: str | None = None
    language: str = "fof"
    span: Span | None = field(default=None, compare=False)

    def with_(self, **changes) -> AnnotatedStatement:
        from dataclasses import replace
        return replace(self, **changes)

    def __str__(self) -> str:
        from .tptp.printer import print_statement
        return print_statement(self)


@dataclass(frozen=True)
class TpiInstruction:
    """A process instruction.

    ``payload`` depends on the verb: ``(cases, target)`` for add_cases,
    ``None`` for assume_previous_valid, ``(name, (names, ...))`` for
    restrict_premises and expand_definitions_in.
    """

    name: str
    verb: str
    payload: object = None
    span: Span | None = field(default=None, compare=False)

    def __str__(self) -> str:
        from .tptp.printer import print_statement
        return print_statement(self)


Item = Union[AnnotatedStatement, TpiInstruction]


@dataclass(frozen=True)
class ProofScript:
    items: tuple[Item, ...] = ()

    def __iter__(self):
        return iter(self.items)

    def __len__(self) -> int:
        return len(self.items)

    @property
    def statements(self) -> list[AnnotatedStatement]:
        return [i for i in self.items if isinstance(i, AnnotatedStatement)]

    def get(self, name: str) -> AnnotatedStatement | None:
        for s in self.statements:
            if s.name == name:
                return s
        return None
