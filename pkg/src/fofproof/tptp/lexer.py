"""Tokenizer for the FOF/CNF/TPI subset of TPTP.

Token alternatives are tried in table order and the first match wins, so
the table order matters: a literal that is a prefix of a later literal
(``<=`` vs ``<=>``) must come after it.  ``grammar_order_check`` guards
this ordering.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import ParseError

PUNCTUATION = (
    "<=>", "<~>", "<=", "=>", "~|", "~&", "!=", "=", "~", "!", "?", "&", "|",
    "(", ")", "[", "]", ",", ".", ":",
)

# (kind, pattern) in first-match order.
TOKEN_TABLE: tuple[tuple[str, re.Pattern], ...] = (
    ("SQ", re.compile(r"'(?:[^'\\]|\\.)*'")),
    ("DQ", re.compile(r'"(?:[^"\\]|\\.)*"')),
    ("DOLLAR", re.compile(r"\$\$?[a-z][A-Za-z0-9_]*")),
    ("REAL", re.compile(r"[+-]?[0-9]+\.[0-9]+(?:[eE][+-]?[0-9]+)?")),
    ("INT", re.compile(r"[+-]?[0-9]+")),
    ("UPPER", re.compile(r"[A-Z][A-Za-z0-9_]*")),
    ("LOWER", re.compile(r"[a-z][A-Za-z0-9_]*")),
) + tuple(("PUNCT", re.compile(re.escape(p))) for p in PUNCTUATION)

_SKIP = re.compile(r"(?:\s+|%[^\n]*|/\*.*?\*/)+", re.S)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    offset: int
    line: int
    column: int

    @property
    def end(self) -> int:
        return self.offset + len(self.text)

    def __repr__(self) -> str:
        return f"{self.kind}:{self.text}"


def match_at(text: str, pos: int) -> tuple[int, str, str] | None:
    """First table alternative matching at ``pos`` as ``(index, kind, lexeme)``."""
    for i, (kind, pat) in enumerate(TOKEN_TABLE):
        m = pat.match(text, pos)
        if m and m.end() > pos:
            return i, kind, m.group()
    return None


def tokenize(text: str, path: str | None = None) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    line, line_start = 1, 0
    n = len(text)
    while True:
        m = _SKIP.match(text, pos)
        if m:
            skipped = m.group()
            nl = skipped.count("\n")
            if nl:
                line += nl
                line_start = pos + skipped.rfind("\n") + 1
            pos = m.end()
        if pos >= n:
            break
        hit = match_at(text, pos)
        if hit is None:
            if text.startswith("/*", pos):
                raise ParseError("unterminated block comment", line, pos - line_start + 1, path=path)
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1, path=path)
        _, kind, lexeme = hit
        tokens.append(Token(kind, lexeme, pos, line, pos - line_start + 1))
        nl = lexeme.count("\n")
        if nl:
            line += nl
            line_start = pos + lexeme.rfind("\n") + 1
        pos += len(lexeme)
    tokens.append(Token("EOF", "", n, line, n - line_start + 1))
    return tokens
