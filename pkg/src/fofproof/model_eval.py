"""Evaluation of formulas on finite, possibly partial, models.

``evaluate`` uses strong Kleene semantics so that a partial model (a run
prefix, say) yields ``UNKNOWN`` where the fixed part does not decide the
value.  ``satisfies`` is an independent two-valued evaluator for total
models; ``brute_force_validity`` enumerates models with it and serves as
the oracle for prover and clausifier tests.
"""

from __future__ import annotations

import enum
import itertools
import re
from dataclasses import dataclass, field

from .errors import BudgetError, ModelError
from .formula_ops import free_variables
from .logic import (AND, FORALL, IFF, IMPLIES, OR, XOR, AnnotatedStatement, App, Atom, Binary, Eq,
                    Not, ProofScript, Quant, Var, forall, symbols)


class TruthValue(enum.Enum):
    FALSE = 0
    TRUE = 1
    UNKNOWN = 2

    # Members are looked up through module globals below: enum class
    # attribute access is slow and these operators sit on the hot path.
    def __invert__(self) -> TruthValue:
        if self is UNKNOWN:
            return self
        return TRUE if self is FALSE else FALSE

    def __and__(self, other: TruthValue) -> TruthValue:
        if self is FALSE or other is FALSE:
            return FALSE
        if self is TRUE and other is TRUE:
            return TRUE
        return UNKNOWN

    def __or__(self, other: TruthValue) -> TruthValue:
        if self is TRUE or other is TRUE:
            return TRUE
        if self is FALSE and other is FALSE:
            return FALSE
        return UNKNOWN

    @staticmethod
    def of(b: bool | None) -> TruthValue:
        if b is None:
            return TruthValue.UNKNOWN
        return TruthValue.TRUE if b else TruthValue.FALSE


TRUE, FALSE, UNKNOWN = TruthValue.TRUE, TruthValue.FALSE, TruthValue.UNKNOWN


@dataclass
class PartialModel:
    domain: tuple[str, ...]
    functions: dict[tuple[str, tuple[str, ...]], str] = field(default_factory=dict)
    predicates: dict[tuple[str, tuple[str, ...]], bool] = field(default_factory=dict)

    def __post_init__(self):
        self.domain = tuple(self.domain)
        elems = set(self.domain)
        arities: dict[str, int] = {}
        for table in (self.functions, self.predicates):
            for (sym, args), value in table.items():
                if arities.setdefault(sym, len(args)) != len(args):
                    raise ModelError(f"inconsistent arity for {sym}")
                bad = [a for a in args if a not in elems]
                if table is self.functions and value not in elems:
                    bad.append(value)
                if bad:
                    raise ModelError(f"{sym}: elements {bad} are not in the domain")

    def extended(self, functions=None, predicates=None) -> PartialModel:
        return PartialModel(self.domain, {**self.functions, **(functions or {})},
                            {**self.predicates, **(predicates or {})})

    # textual format -----------------------------------------------------

    def dumps(self) -> str:
        lines = ["domain: " + " ".join(self.domain)]
        for (sym, args), v in self.functions.items():
            lines.append(f"fun {_app(sym, args)} = {v}")
        for (sym, args), v in self.predicates.items():
            lines.append(f"pred {_app(sym, args)} = {'true' if v else 'false'}")
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> PartialModel:
        domain = None
        funs: dict = {}
        preds: dict = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("%", 1)[0].strip()
            if not line:
                continue
            if line.startswith("domain:"):
                domain = tuple(line[len("domain:"):].split())
                continue
            m = _ENTRY.fullmatch(line)
            if not m:
                raise ModelError(f"line {lineno}: cannot parse {raw.strip()!r}")
            kind, sym, argtext, value = m.groups()
            args = tuple(a.strip() for a in argtext.split(",")) if argtext and argtext.strip() else ()
            if kind == "fun":
                funs[(sym, args)] = value
            elif value in ("true", "false"):
                preds[(sym, args)] = value == "true"
            else:
                raise ModelError(f"line {lineno}: predicate value must be true or false, got {value!r}")
        if domain is None:
            raise ModelError("missing `domain:` line")
        try:
            return cls(domain, funs, preds)
        except ModelError as exc:
            raise ModelError(f"invalid model: {exc}") from None


_ENTRY = re.compile(r"(fun|pred)\s+([A-Za-z0-9_$]+)\s*(?:\(([^)]*)\))?\s*=\s*([A-Za-z0-9_]+)")


def _app(sym, args) -> str:
    return f"{sym}({','.join(args)})" if args else sym


# Three-valued evaluation ----------------------------------------------------


def eval_term(t, m: PartialModel, env: dict) -> str | None:
    if isinstance(t, Var):
        try:
            return env[t.name]
        except KeyError:
            raise ModelError(f"unbound variable {t.name}") from None
    args = []
    for a in t.args:
        v = eval_term(a, m, env)
        if v is None:
            return None
        args.append(v)
    return m.functions.get((t.functor, tuple(args)))


def evaluate(f, m: PartialModel, env: dict | None = None) -> TruthValue:
    env = env or {}
    missing = sorted(free_variables(f) - env.keys())
    if missing:
        raise ModelError(f"unbound free variables: {', '.join(missing)}")
    return _compile(f, m)(dict(env))


# Formulas are compiled into closures over the model's tables once per call;
# this is several times faster than re-dispatching on node types for every
# variable assignment of a quantifier block.

def _compile_term(t, m):
    if isinstance(t, Var):
        name = t.name

        def var(env):
            try:
                return env[name]
            except KeyError:
                raise ModelError(f"unbound variable {name}") from None
        return var
    table, functor = m.functions, t.functor
    if not t.args:
        value = table.get((functor, ()))
        return lambda env: value
    parts = [_compile_term(a, m) for a in t.args]

    def app(env):
        args = []
        for p in parts:
            v = p(env)
            if v is None:
                return None
            args.append(v)
        return table.get((functor, tuple(args)))
    return app


def _compile(f, m):
    if isinstance(f, Atom):
        if f.predicate == "$true":
            return lambda env: TRUE
        if f.predicate == "$false":
            return lambda env: FALSE
        table, pred = m.predicates, f.predicate
        parts = [_compile_term(a, m) for a in f.args]

        def atom(env):
            args = []
            for p in parts:
                v = p(env)
                if v is None:
                    return UNKNOWN
                args.append(v)
            b = table.get((pred, tuple(args)))
            return UNKNOWN if b is None else (TRUE if b else FALSE)
        return atom
    if isinstance(f, Eq):
        lhs, rhs = _compile_term(f.lhs, m), _compile_term(f.rhs, m)

        def eq(env):
            a, b = lhs(env), rhs(env)
            if a is None or b is None:
                return UNKNOWN
            return TRUE if a == b else FALSE
        return eq
    if isinstance(f, Not):
        body = _compile(f.body, m)
        return lambda env: ~body(env)
    if isinstance(f, Binary):
        lhs, rhs, op = _compile(f.lhs, m), _compile(f.rhs, m), f.op
        if op == AND:
            return lambda env: FALSE if (a := lhs(env)) is FALSE else a & rhs(env)
        if op == OR:
            return lambda env: TRUE if (a := lhs(env)) is TRUE else a | rhs(env)
        if op == IMPLIES:
            return lambda env: TRUE if (a := lhs(env)) is FALSE else ~a | rhs(env)

        def iff(env):
            a, b = lhs(env), rhs(env)
            v = (~a | b) & (a | ~b)
            return v if op == IFF else ~v
        return iff
    # quantifiers: finite meet / join
    body, names, domain = _compile(f.body, m), f.variables, m.domain
    universal = f.kind == FORALL
    stop = FALSE if universal else TRUE
    empty = TRUE if universal else FALSE

    def quant(env):
        result = empty
        inner = dict(env)
        for values in itertools.product(domain, repeat=len(names)):
            inner.update(zip(names, values))
            v = body(inner)
            if v is stop:
                return stop
            if v is UNKNOWN:
                result = UNKNOWN
        return result
    return quant


def closure(stmt_or_formula):
    f = stmt_or_formula.formula if isinstance(stmt_or_formula, AnnotatedStatement) else stmt_or_formula
    return forall(sorted(free_variables(f)), f)


@dataclass
class AxiomReport:
    true: list[str] = field(default_factory=list)
    false: list[str] = field(default_factory=list)
    unknown: list[str] = field(default_factory=list)

    @property
    def validates(self) -> bool:
        return not self.false

    def render(self) -> str:
        lines = []
        for label, names in (("true", self.true), ("false", self.false), ("unknown", self.unknown)):
            lines.append(f"{label}: {len(names)}")
        for name in self.false:
            lines.append(f"  false: {name}")
        return "\n".join(lines)


def check_axioms(script: ProofScript, m: PartialModel) -> AxiomReport:
    report = AxiomReport()
    for stmt in script.statements:
        if stmt.role not in ("axiom", "checked_definition"):
            continue
        v = evaluate(closure(stmt), m)
        {TRUE: report.true, FALSE: report.false, UNKNOWN: report.unknown}[v].append(stmt.name)
    return report


# Two-valued oracle -----------------------------------------------------------


class _Need(Exception):
    """Raised by lazy lookups when a table entry has not been chosen yet."""

    def __init__(self, kind, key):
        self.kind = kind
        self.key = key


def _term2(t, funs, env):
    if isinstance(t, Var):
        return env[t.name]
    key = (t.functor, tuple(_term2(a, funs, env) for a in t.args))
    try:
        return funs[key]
    except KeyError:
        raise _Need("fun", key) from None


def satisfies(f, funs: dict, preds: dict, domain, env: dict | None = None) -> bool:
    """Classical satisfaction over total tables (missing entries raise)."""
    env = env or {}
    if isinstance(f, Atom):
        if f.predicate in ("$true", "$false"):
            return f.predicate == "$true"
        key = (f.predicate, tuple(_term2(a, funs, env) for a in f.args))
        try:
            return preds[key]
        except KeyError:
            raise _Need("pred", key) from None
    if isinstance(f, Eq):
        return _term2(f.lhs, funs, env) == _term2(f.rhs, funs, env)
    if isinstance(f, Not):
        return not satisfies(f.body, funs, preds, domain, env)
    if isinstance(f, Binary):
        a = satisfies(f.lhs, funs, preds, domain, env)
        if f.op == AND:
            return a and satisfies(f.rhs, funs, preds, domain, env)
        if f.op == OR:
            return a or satisfies(f.rhs, funs, preds, domain, env)
        if f.op == IMPLIES:
            return (not a) or satisfies(f.rhs, funs, preds, domain, env)
        b = satisfies(f.rhs, funs, preds, domain, env)
        return (a == b) if f.op == IFF else (a != b)
    test = all if f.kind == FORALL else any
    return test(satisfies(f.body, funs, preds, domain, {**env, **dict(zip(f.variables, vals))})
                for vals in itertools.product(domain, repeat=len(f.variables)))


def model_satisfies(f, m: PartialModel, env: dict | None = None) -> bool:
    return satisfies(f, m.functions, m.predicates, m.domain, env)


@dataclass
class ValidityResult:
    valid_up_to_size: int
    countermodel: PartialModel | None = None

    @property
    def valid(self) -> bool:
        return self.countermodel is None


class _Search:
    def __init__(self, domain, budget):
        self.domain = domain
        self.budget = budget
        self.nodes = 0

    def counter(self, f, env, funs, preds):
        """Extend (funs, preds) so that ``f`` is false under ``env``; None if impossible."""
        # Validity distributes over universal quantifiers and conjunction,
        # so each instance / conjunct is searched on its own.
        if isinstance(f, Quant) and f.kind == FORALL:
            for vals in itertools.product(self.domain, repeat=len(f.variables)):
                found = self.counter(f.body, {**env, **dict(zip(f.variables, vals))}, funs, preds)
                if found:
                    return found
            return None
        if isinstance(f, Binary) and f.op == AND:
            return self.counter(f.lhs, env, funs, preds) or self.counter(f.rhs, env, funs, preds)
        return self._enumerate(f, env, funs, preds)

    def _enumerate(self, f, env, funs, preds):
        self.nodes += 1
        if self.nodes > self.budget:
            raise BudgetError(f"model enumeration exceeded {self.budget} search nodes "
                              f"at domain size {len(self.domain)}")
        try:
            ok = satisfies(f, funs, preds, self.domain, env)
        except _Need as need:
            if need.kind == "fun":
                for v in self.domain:
                    found = self._enumerate(f, env, {**funs, need.key: v}, preds)
                    if found:
                        return found
            else:
                for v in (False, True):
                    found = self._enumerate(f, env, funs, {**preds, need.key: v})
                    if found:
                        return found
            return None
        return None if ok else (funs, preds)


def _complete(f, domain, funs, preds) -> PartialModel:
    fsyms, psyms = symbols(f)
    funs, preds = dict(funs), dict(preds)
    for name, arity in sorted(fsyms):
        for args in itertools.product(domain, repeat=arity):
            funs.setdefault((name, args), domain[0])
    for name, arity in sorted(psyms):
        for args in itertools.product(domain, repeat=arity):
            preds.setdefault((name, args), False)
    return PartialModel(domain, funs, preds)


def brute_force_validity(f, max_domain: int = 3, budget: int = 500_000) -> ValidityResult:
    """Search every model of size 1..max_domain for one falsifying ``f``.

    Table entries are chosen lazily, in the order the evaluator consults
    them, so only entries that influence the value are branched on; the
    search is still exhaustive.  Exceeding ``budget`` search nodes raises
    ``BudgetError`` rather than truncating silently.
    """
    f = closure(f)
    search = None
    for n in range(1, max_domain + 1):
        domain = tuple(f"e{i}" for i in range(n))
        search = _Search(domain, budget)
        found = search.counter(f, {}, {}, {})
        if found:
            return ValidityResult(n - 1, _complete(f, domain, *found))
    return ValidityResult(max_domain)


def brute_force_entails(premises, conjecture, max_domain: int = 3, budget: int = 500_000) -> ValidityResult:
    from .logic import conj, implies
    closed = [closure(p) for p in premises]
    goal = implies(conj(*closed), closure(conjecture)) if closed else closure(conjecture)
    return brute_force_validity(goal, max_domain, budget)


def total_models(fsyms, psyms, domain):
    """Iterate over every total model of the given signature."""
    fkeys = [(n, args) for n, a in sorted(fsyms) for args in itertools.product(domain, repeat=a)]
    pkeys = [(n, args) for n, a in sorted(psyms) for args in itertools.product(domain, repeat=a)]
    for fvals in itertools.product(domain, repeat=len(fkeys)):
        for pvals in itertools.product((False, True), repeat=len(pkeys)):
            yield PartialModel(domain, dict(zip(fkeys, fvals)), dict(zip(pkeys, pvals)))
