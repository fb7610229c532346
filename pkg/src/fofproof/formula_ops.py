"""Pure transformations on formulas.

Free variables, capture-avoiding substitution, checked-definition
recognition and expansion, conjunction splitting, and clausification.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .errors import DefinitionError
from .logic import (AND, EXISTS, FORALL, IFF, IMPLIES, OR, XOR, AnnotatedStatement, App, Atom,
                    Binary, Eq, Not, Quant, Var, flatten, forall, symbols)

# Free variables & substitution ----------------------------------------------


def term_variables(t) -> set[str]:
    if isinstance(t, Var):
        return {t.name}
    out: set[str] = set()
    for a in t.args:
        out |= term_variables(a)
    return out


def free_variables(f) -> frozenset[str]:
    if isinstance(f, Atom):
        out: set[str] = set()
        for a in f.args:
            out |= term_variables(a)
        return frozenset(out)
    if isinstance(f, Eq):
        return frozenset(term_variables(f.lhs) | term_variables(f.rhs))
    if isinstance(f, Not):
        return free_variables(f.body)
    if isinstance(f, Binary):
        return free_variables(f.lhs) | free_variables(f.rhs)
    return free_variables(f.body) - set(f.variables)


def bound_variables(f) -> set[str]:
    if isinstance(f, (Atom, Eq)):
        return set()
    if isinstance(f, Not):
        return bound_variables(f.body)
    if isinstance(f, Binary):
        return bound_variables(f.lhs) | bound_variables(f.rhs)
    return set(f.variables) | bound_variables(f.body)


def substitute_term(t, mapping):
    if isinstance(t, Var):
        return mapping.get(t.name, t)
    if not t.args:
        return t
    return App(t.functor, tuple(substitute_term(a, mapping) for a in t.args))


def fresh_name(base: str, avoid) -> str:
    """``base_k`` for the smallest k >= 1 not in ``avoid``."""
    k = 1
    while f"{base}_{k}" in avoid:
        k += 1
    return f"{base}_{k}"


def substitute(f, mapping: dict):
    """Simultaneously replace free variables by terms, renaming binders on capture."""
    mapping = {x: t for x, t in mapping.items() if t != Var(x)}
    if not mapping:
        return f
    if isinstance(f, Atom):
        return Atom(f.predicate, tuple(substitute_term(a, mapping) for a in f.args))
    if isinstance(f, Eq):
        return Eq(substitute_term(f.lhs, mapping), substitute_term(f.rhs, mapping))
    if isinstance(f, Not):
        return Not(substitute(f.body, mapping))
    if isinstance(f, Binary):
        return Binary(f.op, substitute(f.lhs, mapping), substitute(f.rhs, mapping))
    body_free = free_variables(f.body)
    inner = {x: t for x, t in mapping.items() if x not in f.variables and x in body_free}
    if not inner:
        return f
    range_vars: set[str] = set()
    for t in inner.values():
        range_vars |= term_variables(t)
    avoid = range_vars | body_free | set(f.variables)
    new_vars = []
    for v in f.variables:
        if v in range_vars:
            nv = fresh_name(v, avoid)
            avoid.add(nv)
            inner[v] = Var(nv)
            new_vars.append(nv)
        else:
            new_vars.append(v)
    return Quant(f.kind, tuple(new_vars), substitute(f.body, inner))


# Definitions ----------------------------------------------------------------

PREDICATE_IFF = "predicate_iff"
FUNCTION_EQ = "function_eq"


@dataclass(frozen=True)
class Definition:
    head: str
    arity: int
    kind: str
    params: tuple[str, ...]
    body: object
    name: str = field(default="", compare=False)

    @property
    def symbol(self) -> tuple[str, int]:
        return self.head, self.arity


def strip_universal(f) -> tuple[list[str], object]:
    prefix: list[str] = []
    while isinstance(f, Quant) and f.kind == FORALL:
        prefix.extend(f.variables)
        f = f.body
    return prefix, f


def formula_symbols(f) -> set[tuple[str, int]]:
    funs, preds = symbols(f)
    return funs | preds


def recognize_definition(stmt: AnnotatedStatement, known) -> Definition:
    """Validate ``stmt`` as a conservative abbreviation over ``known`` symbols.

    ``known`` is a collection of (name, arity) pairs.
    """
    where = f"{stmt.span}: " if stmt.span else ""
    prefix, core = strip_universal(stmt.formula)
    if isinstance(core, Binary) and core.op == IFF and isinstance(core.lhs, Atom):
        kind, head, args, body = PREDICATE_IFF, core.lhs.predicate, core.lhs.args, core.rhs
    elif isinstance(core, Eq) and isinstance(core.lhs, App):
        kind, head, args, body = FUNCTION_EQ, core.lhs.functor, core.lhs.args, core.rhs
    else:
        raise DefinitionError(f"{where}{stmt.name}: not of the form ![Vs]: (p(Vs) <=> body) "
                              f"or ![Vs]: f(Vs) = body")
    if head.startswith("$"):
        raise DefinitionError(f"{where}{stmt.name}: cannot define {head}")
    if not all(isinstance(a, Var) for a in args):
        raise DefinitionError(f"{where}{stmt.name}: arguments of {head} must be variables")
    params = tuple(a.name for a in args)
    if len(set(params)) != len(params):
        raise DefinitionError(f"{where}{stmt.name}: repeated parameter in {head}({','.join(params)})")
    if len(set(prefix)) != len(prefix) or set(prefix) != set(params):
        raise DefinitionError(f"{where}{stmt.name}: parameters {list(params)} do not match "
                              f"quantifier prefix {prefix}")
    known_names = {n for n, _ in known}
    if head in known_names:
        raise DefinitionError(f"{where}{stmt.name}: symbol {head} is already known; "
                              f"a definition must introduce a new name")
    body_free = free_variables(body) if kind == PREDICATE_IFF else frozenset(term_variables(body))
    extra = sorted(body_free - set(params))
    if extra:
        raise DefinitionError(f"{where}{stmt.name}: body mentions variables {extra} outside the parameters")
    used = formula_symbols(body) if kind == PREDICATE_IFF else formula_symbols(Eq(body, body))
    unknown = sorted(f"{n}/{a}" for n, a in used - set(known))
    if unknown:
        raise DefinitionError(f"{where}{stmt.name}: body uses unknown symbols {', '.join(unknown)}")
    return Definition(head, len(params), kind, params, body, stmt.name)


def _dependency_cycle(defs) -> list[str] | None:
    by_symbol = {d.symbol: d for d in defs}
    deps = {}
    for d in defs:
        used = formula_symbols(d.body) if d.kind == PREDICATE_IFF else formula_symbols(Eq(d.body, d.body))
        deps[d.symbol] = [s for s in used if s in by_symbol]
    state: dict = {}

    def visit(s, path):
        state[s] = 1
        for nxt in deps[s]:
            if state.get(nxt) == 1:
                return path + [nxt]
            if nxt not in state:
                found = visit(nxt, path + [nxt])
                if found:
                    return found
        state[s] = 2
        return None

    for s in deps:
        if s not in state:
            found = visit(s, [s])
            if found:
                return [f"{n}/{a}" for n, a in found]
    return None


def _expand_term(t, funs):
    if isinstance(t, Var):
        return t
    args = tuple(_expand_term(a, funs) for a in t.args)
    d = funs.get((t.functor, len(args)))
    if d is None:
        return App(t.functor, args)
    return substitute_term(d.body, dict(zip(d.params, args)))


def _expand_once(f, preds, funs):
    if isinstance(f, Atom):
        args = tuple(_expand_term(a, funs) for a in f.args)
        d = preds.get((f.predicate, len(args)))
        if d is None:
            return Atom(f.predicate, args)
        return substitute(d.body, dict(zip(d.params, args)))
    if isinstance(f, Eq):
        return Eq(_expand_term(f.lhs, funs), _expand_term(f.rhs, funs))
    if isinstance(f, Not):
        return Not(_expand_once(f.body, preds, funs))
    if isinstance(f, Binary):
        return Binary(f.op, _expand_once(f.lhs, preds, funs), _expand_once(f.rhs, preds, funs))
    return Quant(f.kind, f.variables, _expand_once(f.body, preds, funs))


def expand_definitions(f, defs):
    """Replace defined atoms and terms by their bodies until none remain."""
    defs = list(defs)
    if not defs:
        return f
    cycle = _dependency_cycle(defs)
    if cycle:
        raise DefinitionError("cyclic definitions: " + " -> ".join(cycle))
    preds = {d.symbol: d for d in defs if d.kind == PREDICATE_IFF}
    funs = {d.symbol: d for d in defs if d.kind == FUNCTION_EQ}
    for _ in range(len(defs) + 1):
        g = _expand_once(f, preds, funs)
        if g == f:
            break
        f = g
    return f


# Conjunction splitting -------------------------------------------------------


def split_conjunction(stmt: AnnotatedStatement) -> list[AnnotatedStatement]:
    prefix, core = strip_universal(stmt.formula)
    parts = flatten(core, AND)
    if len(parts) == 1:
        return [stmt]
    out = []
    for i, part in enumerate(parts, 1):
        fv = free_variables(part)
        out.append(stmt.with_(name=f"{stmt.name}_part_{i}",
                              formula=forall([v for v in prefix if v in fv], part)))
    return out


# Clausification ---------------------------------------------------------------


@dataclass(frozen=True)
class Literal:
    positive: bool
    atom: object  # Atom or Eq

    def __neg__(self) -> Literal:
        return Literal(not self.positive, self.atom)

    def __str__(self) -> str:
        from .tptp.printer import print_formula
        return print_formula(self.atom if self.positive else Not(self.atom))


@dataclass(frozen=True)
class Clause:
    literals: tuple[Literal, ...]

    def __len__(self) -> int:
        return len(self.literals)

    def __iter__(self):
        return iter(self.literals)

    def variables(self) -> set[str]:
        out: set[str] = set()
        for lit in self.literals:
            out |= free_variables(lit.atom)
        return out

    def to_formula(self):
        from .logic import FALSE, disj
        lits = [l.atom if l.positive else Not(l.atom) for l in self.literals]
        body = disj(*lits) if lits else FALSE
        return forall(sorted(self.variables()), body)

    def __str__(self) -> str:
        if not self.literals:
            return "$false"
        return " | ".join(str(l) for l in self.literals)


def clause_to_tptp(name: str, clause: Clause, role: str = "plain") -> str:
    return f"cnf({name}, {role}, {clause})."


def _nnf(f, positive: bool):
    if isinstance(f, (Atom, Eq)):
        return f if positive else Not(f)
    if isinstance(f, Not):
        return _nnf(f.body, not positive)
    if isinstance(f, Quant):
        kind = f.kind if positive else (EXISTS if f.kind == FORALL else FORALL)
        return Quant(kind, f.variables, _nnf(f.body, positive))
    a, b = f.lhs, f.rhs
    if f.op == AND:
        return Binary(AND if positive else OR, _nnf(a, positive), _nnf(b, positive))
    if f.op == OR:
        return Binary(OR if positive else AND, _nnf(a, positive), _nnf(b, positive))
    if f.op == IMPLIES:
        return _nnf(Binary(OR, Not(a), b), positive)
    if f.op == XOR:
        return _nnf(Binary(IFF, a, b), not positive)
    # iff
    if positive:
        return Binary(AND, Binary(OR, _nnf(a, False), _nnf(b, True)),
                      Binary(OR, _nnf(a, True), _nnf(b, False)))
    return Binary(OR, Binary(AND, _nnf(a, True), _nnf(b, False)),
                  Binary(AND, _nnf(a, False), _nnf(b, True)))


class _Clausifier:
    def __init__(self, taken_names):
        self.taken = set(taken_names)
        self.sk = itertools.count(1)
        self.var = itertools.count(1)

    def skolem_name(self) -> str:
        while True:
            name = f"sk_{next(self.sk)}"
            if name not in self.taken:
                return name

    def skolemize(self, f, universals: tuple[str, ...], env: dict):
        """Drop quantifiers: universals get unique names, existentials Skolem terms."""
        if isinstance(f, (Atom, Eq)):
            return substitute(f, env)
        if isinstance(f, Not):
            return Not(self.skolemize(f.body, universals, env))
        if isinstance(f, Binary):
            return Binary(f.op, self.skolemize(f.lhs, universals, env),
                          self.skolemize(f.rhs, universals, env))
        env = dict(env)
        if f.kind == FORALL:
            for v in f.variables:
                nv = f"V{next(self.var)}"
                env[v] = Var(nv)
                universals = universals + (nv,)
        else:
            for v in f.variables:
                env[v] = App(self.skolem_name(), tuple(Var(u) for u in universals))
        return self.skolemize(f.body, universals, env)


def _cnf(f) -> list[list[Literal]]:
    if isinstance(f, Binary) and f.op == AND:
        return _cnf(f.lhs) + _cnf(f.rhs)
    if isinstance(f, Binary) and f.op == OR:
        left, right = _cnf(f.lhs), _cnf(f.rhs)
        return [a + b for a in left for b in right]
    if isinstance(f, Not):
        return [[Literal(False, f.body)]]
    return [[Literal(True, f)]]


def _simplify_clause(lits: list[Literal]) -> Clause | None:
    out: list[Literal] = []
    for lit in lits:
        if isinstance(lit.atom, Atom) and lit.atom.predicate in ("$true", "$false"):
            if (lit.atom.predicate == "$true") == lit.positive:
                return None
            continue
        if isinstance(lit.atom, Eq) and lit.atom.lhs == lit.atom.rhs:
            if lit.positive:
                return None
            continue
        if -lit in out:
            return None
        if lit not in out:
            out.append(lit)
    return Clause(tuple(out))


def _standardize(clause: Clause) -> Clause:
    order: list[str] = []

    def collect(t):
        if isinstance(t, Var):
            if t.name not in order:
                order.append(t.name)
        else:
            for a in t.args:
                collect(a)

    for lit in clause.literals:
        atom = lit.atom
        for t in (atom.args if isinstance(atom, Atom) else (atom.lhs, atom.rhs)):
            collect(t)
    mapping = {v: Var(f"X{i}") for i, v in enumerate(order, 1)}
    return Clause(tuple(Literal(l.positive, substitute(l.atom, mapping)) for l in clause.literals))


def clausify_with_origins(formulas) -> list[tuple[Clause, int]]:
    """Like ``clausify`` but pairs each clause with the index of its input."""
    formulas = list(formulas)
    taken: set[str] = set()
    for f in formulas:
        taken |= {n for n, _ in formula_symbols(f)}
    cl = _Clausifier(taken)
    out: list[tuple[Clause, int]] = []
    seen: set[Clause] = set()
    for index, f in enumerate(formulas):
        # Free variables are read universally.
        g = forall(sorted(free_variables(f)), f)
        g = cl.skolemize(_nnf(g, True), (), {})
        for lits in _cnf(g):
            clause = _simplify_clause(lits)
            if clause is not None:
                clause = _standardize(clause)
                if clause not in seen:
                    seen.add(clause)
                    out.append((clause, index))
    return out


def clausify(formulas) -> list[Clause]:
    """Equisatisfiable clause set for the conjunction of ``formulas``."""
    return [c for c, _ in clausify_with_origins(formulas)]
