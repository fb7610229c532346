"""Guard for the hand-fixed alternative ordering of the grammar tables.

Every corpus file is parsed twice: by the ordered-choice packrat engine and
by the exhaustive reference parser.  Wherever the unique reference parse
took alternative ``j`` of a choice but an earlier alternative ``i`` would
also have succeeded at that position, ``i`` masks ``j`` under ordered
choice.  The token table is checked the same way against longest match.
"""

from __future__ import annotations

import glob
import os
from collections import Counter
from dataclasses import dataclass, field

from ..errors import ParseError
from .grammar import RULES, Choice, Opt, PackratParser, R, ReferenceParser, Seq, Star, T
from .lexer import PUNCTUATION, TOKEN_TABLE, tokenize

CORPUS_DIR = os.path.join(os.path.dirname(os.path.dirname(__file__)), "corpus")


@dataclass(frozen=True)
class MaskedAlternative:
    rule: str
    earlier: str
    later: str
    where: str

    def __str__(self) -> str:
        return f"{self.where}: in {self.rule}, {self.earlier} masks {self.later}"


@dataclass
class GrammarReport:
    files: list[str] = field(default_factory=list)
    masked: list[MaskedAlternative] = field(default_factory=list)
    ambiguous: list[str] = field(default_factory=list)
    failures: list[str] = field(default_factory=list)
    coverage: Counter = field(default_factory=Counter)

    @property
    def ok(self) -> bool:
        return not (self.masked or self.ambiguous or self.failures)

    def unexercised(self) -> list[tuple[str, int]]:
        out = []
        for name, expr in RULES.items():
            if isinstance(expr, Choice):
                out.extend((name, i) for i in range(len(expr.alts)) if (name, i) not in self.coverage)
        return out

    def render(self) -> str:
        lines = [f"corpus files: {len(self.files)}",
                 f"masked alternatives: {len(self.masked)}"]
        lines += [f"  {m}" for m in self.masked]
        lines.append(f"ambiguous files: {len(self.ambiguous)}")
        lines += [f"  {a}" for a in self.ambiguous]
        lines.append(f"failures: {len(self.failures)}")
        lines += [f"  {f}" for f in self.failures]
        if self.files:
            lines.append("alternative coverage:")
            for (rule, i), n in sorted(self.coverage.items()):
                lines.append(f"  {rule}#{i}: {n}")
            for rule, i in self.unexercised():
                lines.append(f"  {rule}#{i}: 0")
        return "\n".join(lines)


def _describe(expr) -> str:
    if isinstance(expr, T):
        return expr.describe()
    if isinstance(expr, R):
        return expr.name
    if isinstance(expr, Seq):
        return " ".join(_describe(i) for i in expr.items)
    if isinstance(expr, Choice):
        return "(" + " | ".join(_describe(a) for a in expr.alts) + ")"
    if isinstance(expr, Star):
        return f"({_describe(expr.item)})*"
    return f"({_describe(expr.item)})?"


def _token_table_masks(report: GrammarReport) -> None:
    for i, a in enumerate(PUNCTUATION):
        for b in PUNCTUATION[i + 1:]:
            if b.startswith(a) and b != a:
                report.masked.append(MaskedAlternative("token", repr(a), repr(b), "token table"))


def _token_masks(text, tokens, path, report) -> None:
    for tok in tokens[:-1]:
        for kind, pat in TOKEN_TABLE:
            m = pat.match(text, tok.offset)
            if m and len(m.group()) > len(tok.text):
                report.masked.append(MaskedAlternative(
                    "token", f"{tok.kind} {tok.text!r}", f"{kind} {m.group()!r}",
                    f"{path}:{tok.line}:{tok.column}"))


class _Walker:
    def __init__(self, tokens, path, report):
        self.tokens = tokens
        self.path = path
        self.report = report
        self.probe = PackratParser(tokens)

    def walk(self, expr, tree, pos, rule):
        if isinstance(expr, T):
            return pos + 1
        if isinstance(expr, R):
            return self.walk(RULES[expr.name], tree.tree, pos, expr.name)
        if isinstance(expr, Seq):
            for item, sub in zip(expr.items, tree):
                pos = self.walk(item, sub, pos, rule)
            return pos
        if isinstance(expr, Choice):
            j = tree.index
            self.report.coverage[(rule, j)] += 1
            for i in range(j):
                if self.probe._expr(expr.alts[i], pos) is not None:
                    tok = self.tokens[pos]
                    self.report.masked.append(MaskedAlternative(
                        rule, f"#{i} {_describe(expr.alts[i])}", f"#{j} {_describe(expr.alts[j])}",
                        f"{self.path}:{tok.line}:{tok.column}"))
                    break
            return self.walk(expr.alts[j], tree.tree, pos, rule)
        if isinstance(expr, Star):
            for sub in tree:
                pos = self.walk(expr.item, sub, pos, rule)
            return pos
        if isinstance(expr, Opt):
            return pos if tree is None else self.walk(expr.item, tree, pos, rule)
        raise TypeError(expr)


def check_text(text: str, path: str, report: GrammarReport) -> None:
    report.files.append(path)
    try:
        tokens = tokenize(text, path)
    except ParseError as exc:
        report.failures.append(str(exc))
        return
    _token_masks(text, tokens, path, report)
    full = ReferenceParser(tokens).parses("tptp_file")
    if not full:
        report.failures.append(f"{path}: no parse under the grammar")
        return
    if len(full) > 1:
        report.ambiguous.append(f"{path}: {len(full)} distinct parses")
        return
    before = len(report.masked)
    _Walker(tokens, path, report).walk(R("tptp_file"), full[0], 0, "tptp_file")
    try:
        _, packrat_tree = PackratParser(tokens, path=path).parse("tptp_file")
    except ParseError as exc:
        packrat_tree = None
        if len(report.masked) == before:
            report.failures.append(f"packrat failed where reference parse succeeds: {exc}")
    if packrat_tree is not None and packrat_tree != full[0] and len(report.masked) == before:
        report.masked.append(MaskedAlternative("tptp_file", "greedy repetition", "shorter repetition", path))


def corpus_files(directory: str = CORPUS_DIR) -> list[str]:
    return sorted(glob.glob(os.path.join(directory, "*.p")))


def grammar_order_check(files: list[str] | None = None) -> GrammarReport:
    """Replay ``files`` (default: the shipped corpus) through both parsers."""
    if files is None:
        files = corpus_files()
    report = GrammarReport()
    if not files:
        return report
    _token_table_masks(report)
    for path in files:
        with open(path, encoding="utf-8") as fh:
            check_text(fh.read(), path, report)
    return report
