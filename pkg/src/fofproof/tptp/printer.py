"""Normalizing printer for formulas, statements and scripts."""

from __future__ import annotations

import re

from ..logic import (ADD_CASES, AND, OR, AnnotatedStatement, App, Atom, Binary, Eq, Not, ProofScript,
                     Quant, TpiInstruction, Var)

_PLAIN_NAME = re.compile(r"[a-z][A-Za-z0-9_]*|[0-9]+")


def quote_name(name: str) -> str:
    if _PLAIN_NAME.fullmatch(name):
        return name
    return "'" + name.replace("\\", "\\\\").replace("'", "\\'") + "'"


def print_term(t) -> str:
    if isinstance(t, Var):
        return t.name
    if not t.args:
        return t.functor
    return f"{t.functor}({','.join(print_term(a) for a in t.args)})"


def _unit(f) -> str:
    # Operands of binary connectives and quantifier bodies must be unit formulas.
    text = print_formula(f)
    return f"({text})" if isinstance(f, Binary) else text


def print_formula(f) -> str:
    if isinstance(f, Atom):
        if not f.args:
            return f.predicate
        return f"{f.predicate}({','.join(print_term(a) for a in f.args)})"
    if isinstance(f, Eq):
        return f"{print_term(f.lhs)} = {print_term(f.rhs)}"
    if isinstance(f, Not):
        if isinstance(f.body, Eq):
            return f"{print_term(f.body.lhs)} != {print_term(f.body.rhs)}"
        return "~ " + _unit(f.body)
    if isinstance(f, Binary):
        if f.op in (AND, OR) and isinstance(f.lhs, Binary) and f.lhs.op == f.op:
            left = print_formula(f.lhs)
        else:
            left = _unit(f.lhs)
        return f"{left} {f.op} {_unit(f.rhs)}"
    if isinstance(f, Quant):
        return f"{f.kind}[{','.join(f.variables)}]: {_unit(f.body)}"
    raise TypeError(f"not a formula: {f!r}")


def print_general(g) -> str:
    kind = g[0]
    if kind == "word":
        return g[1]
    if kind == "fn":
        return f"{g[1]}({','.join(print_general(a) for a in g[2])})"
    if kind == "list":
        return "[" + ",".join(print_general(a) for a in g[1]) + "]"
    if kind == "colon":
        return f"{print_general(g[1])}:{print_general(g[2])}"
    return f"${kind}({print_formula(g[1])})"


def print_statement(item) -> str:
    if isinstance(item, TpiInstruction):
        name = quote_name(item.name)
        if item.verb == ADD_CASES:
            cases, target = item.payload
            return f"tpi({name}, {item.verb}, {quote_name(cases)} => {quote_name(target)})."
        if item.payload is None:
            return f"tpi({name}, {item.verb}, $true)."
        head, names = item.payload
        listed = ",".join(quote_name(n) for n in names)
        return f"tpi({name}, {item.verb}, {quote_name(head)}:[{listed}])."
    if isinstance(item, AnnotatedStatement):
        parts = [quote_name(item.name), item.role, print_formula(item.formula)]
        if item.source is not None:
            parts.append(item.source)
            if item.info is not None:
                parts.append(item.info)
        return f"{item.language}(" + ", ".join(parts) + ")."
    raise TypeError(f"not a statement: {item!r}")


def print_script(script: ProofScript) -> str:
    return "".join(print_statement(i) + "\n" for i in script.items)
