"""Read prover derivations, draw them, and find lemmas nobody used."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import DerivationError, ParseError
from .formula_ops import free_variables, substitute
from .logic import AnnotatedStatement, Binary, Not, Quant, Var, forall
from .tptp.parser import parse_general_term, parse_script
from .tptp.printer import print_formula

INPUT_ROLES = frozenset({"axiom", "hypothesis", "definition", "checked_lemma", "checked_definition",
                         "lemma", "conjecture"})
OVERVIEW_ROLES = frozenset({"axiom", "checked_lemma", "checked_definition", "conjecture"})
_STATEMENT_START = re.compile(r"^\s*(fof|cnf)\s*\(")


@dataclass(frozen=True)
class DerivationNode:
    name: str
    role: str
    formula_text: str
    rule: str
    formula: object = field(default=None, compare=False)
    original_name: str | None = None

    @property
    def is_input(self) -> bool:
        return self.rule in ("input", "introduced")


@dataclass
class DerivationGraph:
    nodes: dict[str, DerivationNode] = field(default_factory=dict)
    edges: list[tuple[str, str]] = field(default_factory=list)
    skipped_lines: int = 0

    @property
    def roots(self) -> list[str]:
        children = {c for _, c in self.edges}
        return [n for n in self.nodes if n not in children]

    @property
    def sinks(self) -> list[str]:
        parents = {p for p, _ in self.edges}
        return [n for n in self.nodes if n not in parents]

    def parents(self, name: str) -> list[str]:
        return [p for p, c in self.edges if c == name]

    def ancestors(self, name: str) -> set[str]:
        seen: set[str] = set()
        stack = [name]
        while stack:
            for p in self.parents(stack.pop()):
                if p not in seen:
                    seen.add(p)
                    stack.append(p)
        return seen

    def inputs(self) -> list[DerivationNode]:
        """Input statements (file or introduced sources) other than negated conjectures."""
        return [n for n in self.nodes.values() if n.is_input and n.role in INPUT_ROLES]


# Parsing -----------------------------------------------------------------------------


def _chunks(text: str):
    """Yield (statement text, line) and count lines belonging to no statement."""
    buf: list[str] = []
    depth = 0
    start = 0
    skipped = 0
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not buf:
            if not stripped or stripped.startswith(("%", "#")):
                continue
            if not _STATEMENT_START.match(line):
                skipped += 1
                continue
            start = lineno
        buf.append(line)
        depth += _paren_balance(line)
        if depth <= 0 and stripped.endswith("."):
            yield "\n".join(buf), start
            buf, depth = [], 0
    if buf:
        raise ParseError("unterminated statement", start, 1)
    yield None, skipped


def _paren_balance(line: str) -> int:
    # Quoted names may contain parentheses; strip them before counting.
    line = re.sub(r"'(?:[^'\\]|\\.)*'|\"(?:[^\"\\]|\\.)*\"", "", line.split("%", 1)[0])
    return line.count("(") - line.count(")")


def _names_in(term, out: list[str]) -> None:
    """Parent names of an inference, flattening nested inference records."""
    kind = term[0]
    if kind == "word":
        if term[1] not in out:
            out.append(term[1])
    elif kind == "fn" and term[1] == "inference" and len(term[2]) == 3:
        _names_in(term[2][2], out)
    elif kind == "list":
        for item in term[1]:
            _names_in(item, out)
    elif kind == "colon":
        _names_in(term[1], out)


def _source_info(source: str | None) -> tuple[str, list[str], str | None]:
    if source is None:
        return "input", [], None
    term = parse_general_term(source)
    if term[0] == "fn" and term[1] == "inference" and len(term[2]) == 3:
        rule = term[2][0][1] if term[2][0][0] == "word" else "inference"
        parents: list[str] = []
        _names_in(term[2][2], parents)
        return rule, parents, None
    if term[0] == "fn" and term[1] == "file":
        original = term[2][1][1] if len(term[2]) > 1 and term[2][1][0] == "word" else None
        return "input", [], original
    if term[0] == "fn" and term[1] == "introduced":
        return "introduced", [], None
    return "input", [], None


def _from_statements(statements, skipped: int = 0) -> DerivationGraph:
    g = DerivationGraph(skipped_lines=skipped)
    pending: list[tuple[str, list[str]]] = []
    for stmt in statements:
        if stmt.name in g.nodes:
            raise DerivationError(f"duplicate derivation node {stmt.name}")
        rule, parents, original = _source_info(stmt.source)
        g.nodes[stmt.name] = DerivationNode(stmt.name, stmt.role, print_formula(stmt.formula), rule,
                                            stmt.formula, original)
        pending.append((stmt.name, parents))
    dangling = sorted({p for _, ps in pending for p in ps if p not in g.nodes})
    if dangling:
        raise DerivationError(f"derivation refers to missing parent(s): {', '.join(dangling)}")
    g.edges = [(p, child) for child, ps in pending for p in ps]
    cycle = _find_cycle(g)
    if cycle:
        raise DerivationError(f"cyclic derivation: {' -> '.join(cycle)}")
    return g


def _find_cycle(g: DerivationGraph) -> list[str] | None:
    children: dict[str, list[str]] = {n: [] for n in g.nodes}
    for p, c in g.edges:
        children[p].append(c)
    state: dict[str, int] = {}
    for root in g.nodes:
        if root in state:
            continue
        stack = [(root, iter(children[root]))]
        path = [root]
        state[root] = 1
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                state[node] = 2
                stack.pop()
                path.pop()
            elif state.get(nxt) == 1:
                return path[path.index(nxt):] + [nxt]
            elif nxt not in state:
                state[nxt] = 1
                stack.append((nxt, iter(children[nxt])))
                path.append(nxt)
    return None


def parse_derivation(text: str, path: str | None = None) -> DerivationGraph:
    """Build the derivation graph of TSTP output; stray non-statement lines are counted."""
    statements: list[AnnotatedStatement] = []
    skipped = 0
    for chunk, info in _chunks(text):
        if chunk is None:
            skipped = info
            break
        script = parse_script(chunk, path=path, allow_cnf=True)
        statements.extend(script.statements)
    return _from_statements(statements, skipped)


# DOT -----------------------------------------------------------------------------------


def _q(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(g, mode: str = "detail") -> str:
    """DOT text for a graph (detail) or for lemma dependencies (overview).

    In overview mode ``g`` may also be a mapping from task id to graph.
    """
    if mode == "detail":
        if not isinstance(g, DerivationGraph):
            raise ValueError("detail mode takes a single derivation graph")
        lines = ["digraph proof {"]
        for node in g.nodes.values():
            label = _q(node.name)[:-1] + "\\n" + _q(node.rule)[1:]
            lines.append(f"  {_q(node.name)} [label={label}];")
        for p, c in g.edges:
            lines.append(f"  {_q(p)} -> {_q(c)};")
        return "\n".join(lines) + "\n}\n"
    if mode == "overview":
        graphs = g if isinstance(g, dict) else {"": g}
        nodes, edges = overview_edges(graphs)
        lines = ["digraph proof {"]
        lines += [f"  {_q(n)};" for n in nodes]
        lines += [f"  {_q(a)} -> {_q(b)};" for a, b in edges]
        return "\n".join(lines) + "\n}\n"
    raise ValueError(f"unknown DOT mode {mode!r} (expected detail or overview)")


def _display_name(node: DerivationNode) -> str:
    return node.original_name or node.name


def overview_edges(graphs: dict[str, DerivationGraph]) -> tuple[list[str], list[tuple[str, str]]]:
    """Input statements and the edges L1 -> L2 where L1 was used to prove L2."""
    nodes: list[str] = []
    edges: list[tuple[str, str]] = []

    def add(n):
        if n not in nodes:
            nodes.append(n)

    for task_id, g in graphs.items():
        goals = [n for n in g.nodes.values() if n.is_input and n.role == "conjecture"]
        target = _display_name(goals[0]) if goals else task_id
        used: set[str] = set()
        for sink in g.sinks:
            used |= g.ancestors(sink) | {sink}
        if target:
            add(target)
        for node in g.nodes.values():
            if node.is_input and node.role in OVERVIEW_ROLES and node.role != "conjecture":
                name = _display_name(node)
                add(name)
                if node.name in used and target and (name, target) not in edges:
                    edges.append((name, target))
    return nodes, edges


_DOT_ID = r'(?:"(?:[^"\\]|\\.)*"|[A-Za-z_][A-Za-z0-9_]*|-?[0-9]+(?:\.[0-9]+)?)'
_DOT_ATTRS = rf"(?:\s*\[\s*(?:{_DOT_ID}\s*=\s*{_DOT_ID}\s*[,;]?\s*)*\])?"
_DOT_STMT = re.compile(rf"\s*(?:{_DOT_ID}\s*->\s*{_DOT_ID}|{_DOT_ID}){_DOT_ATTRS}\s*;?\s*")


def dot_is_valid(text: str) -> bool:
    """Minimal DOT check: ``digraph name { stmt* }`` with node, edge and attribute statements."""
    m = re.fullmatch(rf"\s*(?:strict\s+)?digraph\s+(?:{_DOT_ID}\s*)?\{{(.*)\}}\s*", text, re.S)
    if not m:
        return False
    body = m.group(1)
    pos = 0
    while pos < len(body):
        if body[pos:].strip() == "":
            return True
        s = _DOT_STMT.match(body, pos)
        if not s or s.end() == pos:
            return False
        pos = s.end()
    return True


# Unused lemmas ------------------------------------------------------------------------


def alpha_normal(f):
    """Close ``f`` universally and rename bound variables V0, V1, ... in order."""
    f = forall(sorted(free_variables(f)), f)
    counter = [0]

    def go(g):
        if isinstance(g, Quant):
            fresh = []
            body = g.body
            for v in g.variables:
                name = f"V{counter[0]}"
                counter[0] += 1
                fresh.append(name)
                body = substitute(body, {v: Var(name)})
            return Quant(g.kind, tuple(fresh), go(body))
        if isinstance(g, Not):
            return Not(go(g.body))
        if isinstance(g, Binary):
            return Binary(g.op, go(g.lhs), go(g.rhs))
        return g
    return go(f)


@dataclass
class UnusedReport:
    lemmas: list[str]
    axioms: list[str]
    no_evidence: bool = False

    def render(self) -> str:
        lines = []
        if self.no_evidence:
            lines.append("no evidence: no derivations supplied, every pooled lemma is listed")
        lines += [f"unused lemma\t{n}" for n in self.lemmas]
        lines += [f"unused axiom\t{n}" for n in self.axioms]
        return "\n".join(lines)


def unused_lemmas(plan, derivations: dict[str, DerivationGraph]) -> UnusedReport:
    """Pooled lemmas and definitions that no derivation takes as an input.

    Inputs are matched by name, then by the original name in a ``file``
    source, then by formula structure.  The goal of the last task is never
    reported.  Axioms go in their own bucket: removing them can still hurt.
    """
    used_names: set[str] = set()
    used_formulas = []
    for g in derivations.values():
        for node in g.inputs():
            if node.role == "conjecture":
                continue
            used_names.add(node.name)
            if node.original_name:
                used_names.add(node.original_name)
            used_formulas.append(alpha_normal(node.formula))
    goal = plan.tasks[-1].conjecture.name if plan.tasks else None
    lemmas, axioms = [], []
    for stmt in plan.pool:
        if stmt.name == goal:
            continue
        if stmt.name in used_names or alpha_normal(stmt.formula) in used_formulas:
            continue
        if stmt.role in ("checked_lemma", "checked_definition"):
            lemmas.append(stmt.name)
        else:
            axioms.append(stmt.name)
    return UnusedReport(lemmas, axioms, no_evidence=not derivations)
