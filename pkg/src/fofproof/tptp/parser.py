"""Entry points: text to ``ProofScript`` / formulas, with include splicing."""

from __future__ import annotations

import os

from ..errors import ParseError
from ..logic import AnnotatedStatement, ProofScript
from .build import Builder, Include
from .grammar import PackratParser
from .lexer import tokenize


def _parse_tree(text: str, rule: str, path: str | None):
    tokens = tokenize(text, path)
    _, tree = PackratParser(tokens, path=path).parse(rule)
    return tree


def parse_formula(text: str):
    """Parse a bare FOF formula such as ``![X]: p(X)``."""
    return Builder().build(_parse_tree(text, "formula_only", None))


def parse_general_term(text: str):
    return Builder().build(_parse_tree(text, "general_term_only", None))


def _items(text, path, include_base, allow_cnf, stack):
    raw = Builder(path, allow_cnf).build(_parse_tree(text, "tptp_file", path))
    out = []
    for item in raw:
        if not isinstance(item, Include):
            out.append(item)
            continue
        target = os.path.realpath(os.path.join(include_base, item.path))
        if target in stack:
            chain = " -> ".join(os.path.basename(p) for p in stack + [target])
            raise ParseError(f"include cycle: {chain}", item.token.line, item.token.column, path=path)
        if not os.path.isfile(target):
            raise ParseError(f"missing include file {item.path!r}", item.token.line, item.token.column,
                             path=path)
        with open(target, encoding="utf-8") as fh:
            sub = _items(fh.read(), target, include_base, allow_cnf, stack + [target])
        if item.names is not None:
            sub = [s for s in sub if not isinstance(s, AnnotatedStatement) or s.name in item.names]
        out.extend(sub)
    return out


def parse_script(text: str, include_base: str = ".", *, path: str | None = None,
                 allow_cnf: bool = False) -> ProofScript:
    """Parse a proof script; includes are resolved under ``include_base``."""
    stack = [os.path.realpath(path)] if path else []
    items = _items(text, path, include_base, allow_cnf, stack)
    seen: dict[str, AnnotatedStatement] = {}
    for item in items:
        if isinstance(item, AnnotatedStatement):
            if item.name in seen:
                sp = item.span
                raise ParseError(f"duplicate statement name {item.name!r} (first defined at {seen[item.name].span})",
                                 sp.line if sp else 0, sp.column if sp else 0, path=sp.path if sp else path)
            seen[item.name] = item
    return ProofScript(tuple(items))


def parse_file(path: str, include_base: str | None = None, allow_cnf: bool = False) -> ProofScript:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    base = include_base if include_base is not None else os.path.dirname(os.path.abspath(path))
    return parse_script(text, base, path=path, allow_cnf=allow_cnf)
