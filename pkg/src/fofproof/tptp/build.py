"""Turn raw packrat trees into the syntax trees of ``fofproof.logic``."""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import ParseError
from ..logic import (ADD_CASES, AND, ASSUME_PREVIOUS_VALID, EXPAND_DEFINITIONS_IN, FALSE, IFF,
                     IMPLIES, OR, RESTRICT_PREMISES, ROLES, TPI_VERBS, TRUE, XOR, AnnotatedStatement,
                     App, Atom, Binary, Eq, Not, Quant, Span, TpiInstruction, Var)
from .grammar import Alt, Node
from .lexer import Token

# General terms (annotation payloads) are kept as small tuples:
#   ("word", text) ("fn", text, args) ("list", items) ("colon", head, tail)
#   ("fof", formula) ("cnf", formula)
GeneralTerm = tuple


@dataclass(frozen=True)
class Include:
    path: str
    names: tuple[str, ...] | None
    token: Token


def unquote(text: str) -> str:
    if len(text) >= 2 and text[0] == "'" and text[-1] == "'":
        body = text[1:-1]
        out, i = [], 0
        while i < len(body):
            if body[i] == "\\" and i + 1 < len(body):
                out.append(body[i + 1])
                i += 2
            else:
                out.append(body[i])
                i += 1
        return "".join(out)
    return text


def _err(tok: Token, msg: str, path: str | None) -> ParseError:
    return ParseError(msg, tok.line, tok.column, path=path)


class Builder:
    def __init__(self, path: str | None = None, allow_cnf: bool = False):
        self.path = path
        self.allow_cnf = allow_cnf

    def build(self, node):
        if isinstance(node, Alt):
            return self.build(node.tree)
        return getattr(self, "b_" + node.rule)(node.tree)

    # top level ---------------------------------------------------------------

    def b_tptp_file(self, tree):
        return [self.build(x) for x in tree[0]]

    def b_tptp_input(self, alt):
        return self.build(alt.tree)

    def _span(self, first: Token, last: Token) -> Span:
        return Span(first.line, first.column, last.line, last.column + len(last.text), self.path)

    def _role(self, node) -> str:
        tok = node.tree
        if tok.text not in ROLES:
            raise _err(tok, f"unknown role {tok.text!r}", self.path)
        return tok.text

    def _annotations(self, opt):
        if opt.tree is None:
            return None, None
        from .printer import print_general
        _, src, more = opt.tree
        info = None if more is None else print_general(self.build(more[1]))
        return print_general(self.build(src)), info

    def b_fof_annotated(self, t):
        name = self.build(t[2])
        role = self._role(t[4])
        formula = self.build(t[6])
        source, info = self._annotations(t[7])
        return AnnotatedStatement(name, role, formula, source, info, "fof", self._span(t[0], t[-1]))

    def b_cnf_annotated(self, t):
        if not self.allow_cnf:
            raise _err(t[0], "cnf statements are only accepted in prover derivations", self.path)
        name = self.build(t[2])
        role = self._role(t[4])
        formula = self.build(t[6])
        source, info = self._annotations(t[7])
        return AnnotatedStatement(name, role, formula, source, info, "cnf", self._span(t[0], t[-1]))

    def b_tpi_annotated(self, alt):
        t = alt.tree
        name = self.build(t[2])
        verb_tok = t[4]
        span = self._span(t[0], t[-1])
        if alt.index == 0:
            f = self.build(t[6])
            if not (isinstance(f, Binary) and f.op == IMPLIES and isinstance(f.lhs, Atom)
                    and isinstance(f.rhs, Atom) and not f.lhs.args and not f.rhs.args):
                raise _err(verb_tok, "add_cases payload must have the form `cases_name => target_name`",
                           self.path)
            return TpiInstruction(name, ADD_CASES, (f.lhs.predicate, f.rhs.predicate), span)
        verb = verb_tok.text
        if verb not in TPI_VERBS:
            raise _err(verb_tok, f"unknown TPI verb {verb!r}; supported verbs: " + ", ".join(TPI_VERBS),
                       self.path)
        g = self.build(t[6])
        if verb == ADD_CASES:
            raise _err(verb_tok, "add_cases payload must have the form `cases_name => target_name`",
                       self.path)
        if verb == ASSUME_PREVIOUS_VALID:
            return TpiInstruction(name, verb, None, span)
        # restrict_premises / expand_definitions_in: `name:[n1,...]`
        if g[0] == "colon" and g[1][0] == "word" and g[2][0] == "list" \
                and all(x[0] == "word" for x in g[2][1]):
            return TpiInstruction(name, verb, (unquote(g[1][1]), tuple(unquote(x[1]) for x in g[2][1])), span)
        assert verb in (RESTRICT_PREMISES, EXPAND_DEFINITIONS_IN)
        raise _err(verb_tok, f"{verb} payload must have the form `name:[name1,...]`", self.path)

    def b_include(self, t):
        names = None
        if t[3] is not None:
            items = self.build(t[3][1])[1]
            names = tuple(unquote(x[1]) for x in items)
        return Include(unquote(t[2].text), names, t[0])

    def b_name(self, alt):
        return unquote(alt.tree.text)

    # formulas ----------------------------------------------------------------

    def b_fof_logic_formula(self, alt):
        return self.build(alt)

    b_fof_binary_formula = b_fof_logic_formula
    b_fof_binary_assoc = b_fof_logic_formula
    b_fof_unit_formula = b_fof_logic_formula
    b_fof_atomic_formula = b_fof_logic_formula

    def b_formula_only(self, t):
        return self.build(t[0])

    def b_general_term_only(self, t):
        return self.build(t[0])

    def b_fof_binary_nonassoc(self, t):
        lhs, rhs = self.build(t[0]), self.build(t[2])
        op = t[1].tree.tree.text
        if op == "<=":
            return Binary(IMPLIES, rhs, lhs)
        if op == "~|":
            return Not(Binary(OR, lhs, rhs))
        if op == "~&":
            return Not(Binary(AND, lhs, rhs))
        return Binary({"=>": IMPLIES, "<=>": IFF, "<~>": XOR}[op], lhs, rhs)

    def _chain(self, t, op):
        out = Binary(op, self.build(t[0]), self.build(t[2]))
        for _, nxt in t[3]:
            out = Binary(op, out, self.build(nxt))
        return out

    def b_fof_or_formula(self, t):
        return self._chain(t, OR)

    def b_fof_and_formula(self, t):
        return self._chain(t, AND)

    def b_fof_unary_formula(self, alt):
        if alt.index == 0:
            return Not(self.build(alt.tree[1]))
        return self.build(alt.tree)

    def b_fof_infix_unary(self, t):
        return Not(Eq(self.build(t[0]), self.build(t[2])))

    def b_fof_unitary_formula(self, alt):
        if alt.index == 2:
            return self.build(alt.tree[1])
        return self.build(alt.tree)

    def b_fof_quantified_formula(self, t):
        kind = t[0].tree.tree.text
        variables = self.build(t[2])
        return Quant(kind, variables, self.build(t[5]))

    def b_variable_list(self, t):
        return (t[0].text,) + tuple(tok.text for _, tok in t[1])

    def b_fof_defined_infix(self, t):
        return Eq(self.build(t[0]), self.build(t[2]))

    def b_fof_plain_atomic(self, node):
        term = self.build(node)
        return Atom(term.functor, term.args)

    def b_fof_defined_atomic(self, tok):
        if tok.text == "$true":
            return TRUE
        if tok.text == "$false":
            return FALSE
        raise _err(tok, f"unsupported defined predicate {tok.text!r}", self.path)

    def b_fof_term(self, alt):
        if alt.index == 1:
            return Var(alt.tree.text)
        return self.build(alt.tree)

    def b_fof_plain_term(self, alt):
        if alt.index == 1:
            return App(alt.tree.text)
        t = alt.tree
        return App(t[0].text, self.build(t[2]))

    def b_fof_arguments(self, t):
        return (self.build(t[0]),) + tuple(self.build(x) for _, x in t[1])

    def b_cnf_formula(self, alt):
        return self.build(alt.tree[1] if alt.index == 0 else alt.tree)

    def b_disjunction(self, t):
        out = self.build(t[0])
        for _, lit in t[1]:
            out = Binary(OR, out, self.build(lit))
        return out

    def b_literal(self, alt):
        if alt.index == 0:
            return Not(self.build(alt.tree[1]))
        return self.build(alt.tree)

    # annotations -------------------------------------------------------------

    def b_general_term(self, alt):
        if alt.index == 0:
            t = alt.tree
            return ("colon", self.build(t[0]), self.build(t[2]))
        return self.build(alt.tree)

    def b_general_data(self, alt):
        if isinstance(alt.tree, Token):
            return ("word", alt.tree.text)
        return self.build(alt.tree)

    def b_formula_data(self, alt):
        return ("fof" if alt.index == 0 else "cnf", self.build(alt.tree[2]))

    def b_general_function(self, t):
        return ("fn", t[0].tree.text, self.build(t[2]))

    def b_general_list(self, alt):
        if alt.index == 0:
            return ("list", ())
        return ("list", self.build(alt.tree[1]))

    def b_general_terms(self, t):
        return (self.build(t[0]),) + tuple(self.build(x) for _, x in t[1])
