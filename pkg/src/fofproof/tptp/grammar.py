"""Grammar tables for the supported TPTP subset and two engines over them.

The rules follow the TPTP syntax BNF, with the alternatives of each choice
placed so that committing to the first successful alternative is always
right (e.g. ``fof_binary_formula`` before ``fof_unit_formula``, infix
equality before plain atoms, applications before constants).

``PackratParser`` is the production engine: ordered choice, memoized.
``ReferenceParser`` ignores ordering and returns every parse, so the two
can be compared to show that the ordering masks nothing.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from typing import NamedTuple

from ..errors import ParseError
from .lexer import Token


class T:
    __slots__ = ("kind", "text")

    def __init__(self, kind: str, text: str | None = None):
        self.kind = kind
        self.text = text

    def matches(self, tok: Token) -> bool:
        return tok.kind == self.kind and (self.text is None or tok.text == self.text)

    def describe(self) -> str:
        if self.text is not None:
            return repr(self.text)
        return {"LOWER": "lower_word", "UPPER": "variable", "SQ": "single_quoted",
                "DQ": "distinct_object", "INT": "integer", "REAL": "real",
                "DOLLAR": "defined_word", "EOF": "end of input"}.get(self.kind, self.kind)


def P(text: str) -> T:
    return T("PUNCT", text)


def K(word: str) -> T:
    return T("LOWER", word)


class Seq:
    __slots__ = ("items",)

    def __init__(self, *items):
        self.items = items


class Choice:
    __slots__ = ("alts",)

    def __init__(self, *alts):
        self.alts = alts


class Star:
    __slots__ = ("item",)

    def __init__(self, item):
        self.item = item


class Opt:
    __slots__ = ("item",)

    def __init__(self, item):
        self.item = item


class R:
    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name


class Alt(NamedTuple):
    """Raw-tree record of which choice alternative matched."""

    index: int
    tree: object


@dataclass(frozen=True)
class Node:
    rule: str
    tree: object


def _comma_list(item):
    return Seq(item, Star(Seq(P(","), item)))


RULES: dict[str, object] = {
    "tptp_file": Seq(Star(R("tptp_input")), T("EOF")),
    "tptp_input": Choice(R("fof_annotated"), R("cnf_annotated"), R("tpi_annotated"), R("include")),
    "fof_annotated": Seq(K("fof"), P("("), R("name"), P(","), R("role"), P(","),
                         R("fof_logic_formula"), R("annotations"), P(")"), P(".")),
    "cnf_annotated": Seq(K("cnf"), P("("), R("name"), P(","), R("role"), P(","),
                         R("cnf_formula"), R("annotations"), P(")"), P(".")),
    "tpi_annotated": Choice(
        Seq(K("tpi"), P("("), R("name"), P(","), K("add_cases"), P(","),
            R("fof_logic_formula"), P(")"), P(".")),
        Seq(K("tpi"), P("("), R("name"), P(","), T("LOWER"), P(","),
            R("general_term"), P(")"), P(".")),
    ),
    "include": Seq(K("include"), P("("), T("SQ"), Opt(Seq(P(","), R("general_list"))), P(")"), P(".")),
    "name": Choice(T("LOWER"), T("SQ"), T("INT")),
    "role": T("LOWER"),
    "annotations": Opt(Seq(P(","), R("general_term"), Opt(Seq(P(","), R("general_term"))))),
    # formulas
    "fof_logic_formula": Choice(R("fof_binary_formula"), R("fof_unit_formula")),
    "fof_binary_formula": Choice(R("fof_binary_nonassoc"), R("fof_binary_assoc")),
    "fof_binary_nonassoc": Seq(R("fof_unit_formula"), R("nonassoc_connective"), R("fof_unit_formula")),
    "nonassoc_connective": Choice(P("<=>"), P("=>"), P("<="), P("<~>"), P("~|"), P("~&")),
    "fof_binary_assoc": Choice(R("fof_or_formula"), R("fof_and_formula")),
    "fof_or_formula": Seq(R("fof_unit_formula"), P("|"), R("fof_unit_formula"),
                          Star(Seq(P("|"), R("fof_unit_formula")))),
    "fof_and_formula": Seq(R("fof_unit_formula"), P("&"), R("fof_unit_formula"),
                           Star(Seq(P("&"), R("fof_unit_formula")))),
    "fof_unit_formula": Choice(R("fof_unary_formula"), R("fof_unitary_formula")),
    "fof_unary_formula": Choice(Seq(P("~"), R("fof_unit_formula")), R("fof_infix_unary")),
    "fof_infix_unary": Seq(R("fof_term"), P("!="), R("fof_term")),
    "fof_unitary_formula": Choice(R("fof_quantified_formula"), R("fof_atomic_formula"),
                                  Seq(P("("), R("fof_logic_formula"), P(")"))),
    "fof_quantified_formula": Seq(R("quantifier"), P("["), R("variable_list"), P("]"), P(":"),
                                  R("fof_unit_formula")),
    "quantifier": Choice(P("!"), P("?")),
    "variable_list": _comma_list(T("UPPER")),
    "fof_atomic_formula": Choice(R("fof_defined_infix"), R("fof_plain_atomic"), R("fof_defined_atomic")),
    "fof_defined_infix": Seq(R("fof_term"), P("="), R("fof_term")),
    "fof_plain_atomic": R("fof_plain_term"),
    "fof_defined_atomic": T("DOLLAR"),
    "fof_term": Choice(R("fof_plain_term"), T("UPPER")),
    "fof_plain_term": Choice(Seq(T("LOWER"), P("("), R("fof_arguments"), P(")")), T("LOWER")),
    "fof_arguments": _comma_list(R("fof_term")),
    # clauses (derivation input only)
    "cnf_formula": Choice(Seq(P("("), R("disjunction"), P(")")), R("disjunction")),
    "disjunction": Seq(R("literal"), Star(Seq(P("|"), R("literal")))),
    "literal": Choice(Seq(P("~"), R("fof_atomic_formula")), R("fof_infix_unary"), R("fof_atomic_formula")),
    # annotations
    "general_term": Choice(Seq(R("general_data"), P(":"), R("general_term")),
                           R("general_data"), R("general_list")),
    "general_data": Choice(R("formula_data"), R("general_function"), T("LOWER"), T("SQ"),
                           T("UPPER"), T("REAL"), T("INT"), T("DQ"), T("DOLLAR")),
    "formula_data": Choice(Seq(T("DOLLAR", "$fof"), P("("), R("fof_logic_formula"), P(")")),
                           Seq(T("DOLLAR", "$cnf"), P("("), R("cnf_formula"), P(")"))),
    "general_function": Seq(Choice(T("LOWER"), T("SQ")), P("("), R("general_terms"), P(")")),
    "general_list": Choice(Seq(P("["), P("]")), Seq(P("["), R("general_terms"), P("]"))),
    "general_terms": _comma_list(R("general_term")),
    # entry points for standalone fragments
    "formula_only": Seq(R("fof_logic_formula"), T("EOF")),
    "general_term_only": Seq(R("general_term"), T("EOF")),
}


def _ensure_stack():
    if sys.getrecursionlimit() < 20000:
        sys.setrecursionlimit(20000)


class PackratParser:
    """Ordered-choice parser with memoization per (rule, position)."""

    def __init__(self, tokens: list[Token], rules: dict = RULES, path: str | None = None):
        self.tokens = tokens
        self.rules = rules
        self.path = path
        self.memo: dict[tuple[str, int], tuple[int, object] | None] = {}
        self.furthest = -1
        self.expected: set[str] = set()

    def _fail(self, pos: int, what: str) -> None:
        if pos > self.furthest:
            self.furthest = pos
            self.expected = {what}
        elif pos == self.furthest:
            self.expected.add(what)

    def parse(self, rule: str, pos: int = 0):
        _ensure_stack()
        res = self._expr(R(rule), pos)
        if res is None:
            raise self.error()
        return res

    def error(self) -> ParseError:
        tok = self.tokens[min(max(self.furthest, 0), len(self.tokens) - 1)]
        got = "end of input" if tok.kind == "EOF" else repr(tok.text)
        return ParseError(f"syntax error at {got}", tok.line, tok.column,
                          frozenset(self.expected), path=self.path)

    def _expr(self, e, pos):
        if isinstance(e, T):
            tok = self.tokens[pos]
            if e.matches(tok):
                return pos + 1, tok
            self._fail(pos, e.describe())
            return None
        if isinstance(e, R):
            key = (e.name, pos)
            if key in self.memo:
                return self.memo[key]
            res = self._expr(self.rules[e.name], pos)
            if res is not None:
                res = (res[0], Node(e.name, res[1]))
            self.memo[key] = res
            return res
        if isinstance(e, Seq):
            out = []
            for item in e.items:
                res = self._expr(item, pos)
                if res is None:
                    return None
                pos, tree = res
                out.append(tree)
            return pos, tuple(out)
        if isinstance(e, Choice):
            for i, alt in enumerate(e.alts):
                res = self._expr(alt, pos)
                if res is not None:
                    return res[0], Alt(i, res[1])
            return None
        if isinstance(e, Star):
            out = []
            while True:
                res = self._expr(e.item, pos)
                if res is None or res[0] == pos:
                    return pos, tuple(out)
                pos, tree = res
                out.append(tree)
        if isinstance(e, Opt):
            res = self._expr(e.item, pos)
            return (pos, None) if res is None else res
        raise TypeError(f"bad grammar expression {e!r}")


class ReferenceParser:
    """Exhaustive backtracking parser: every (end, tree) for each rule.

    Choice here is unordered and repetition is not greedy, so it
    recognizes the context-free reading of the grammar.
    """

    def __init__(self, tokens: list[Token], rules: dict = RULES):
        self.tokens = tokens
        self.rules = rules
        self.memo: dict[tuple[str, int], list] = {}

    def parses(self, rule: str = "tptp_file") -> list:
        _ensure_stack()
        end = len(self.tokens)
        return [tree for pos, tree in self._all(R(rule), 0) if pos == end]

    def _all(self, e, pos) -> list:
        if isinstance(e, T):
            if pos < len(self.tokens) and e.matches(self.tokens[pos]):
                return [(pos + 1, self.tokens[pos])]
            return []
        if isinstance(e, R):
            key = (e.name, pos)
            if key not in self.memo:
                self.memo[key] = []  # guards left recursion (grammar has none)
                self.memo[key] = [(p, Node(e.name, t)) for p, t in self._all(self.rules[e.name], pos)]
            return self.memo[key]
        if isinstance(e, Seq):
            partial = [(pos, ())]
            for item in e.items:
                partial = [(p2, acc + (t2,)) for p, acc in partial for p2, t2 in self._all(item, p)]
                if not partial:
                    break
            return partial
        if isinstance(e, Choice):
            return [(p, Alt(i, t)) for i, alt in enumerate(e.alts) for p, t in self._all(alt, pos)]
        if isinstance(e, Star):
            out = [(pos, ())]
            frontier = out
            while frontier:
                frontier = [(p2, acc + (t2,)) for p, acc in frontier
                            for p2, t2 in self._all(e.item, p) if p2 > p]
                out = out + frontier
            return out
        if isinstance(e, Opt):
            return [(pos, None)] + self._all(e.item, pos)
        raise TypeError(f"bad grammar expression {e!r}")
