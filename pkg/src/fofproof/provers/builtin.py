"""Small given-clause resolution prover.

Binary resolution and factoring with occurs-checked unification; equality
is axiomatized (reflexivity, symmetry, transitivity, congruence) instead of
being built in.  Good enough for desk-scale lemmas and for running the
test suite without an external prover.
"""

from __future__ import annotations

import heapq
import itertools
import time
from dataclasses import dataclass

from ..formula_ops import clausify_with_origins, free_variables, substitute_term
from ..logic import AnnotatedStatement, App, Atom, Eq, Not, Var, forall
from ..tptp.printer import print_formula, print_term, quote_name
from .unify import apply, match, unify_into
from .verdict import Status, Verdict

EQ = "="
AGE_RATIO = 5
REWRITE_LIMIT = 64


@dataclass(frozen=True)
class Lit:
    positive: bool
    pred: str
    args: tuple

    def __str__(self) -> str:
        if self.pred == EQ:
            op = "=" if self.positive else "!="
            return f"{print_term(self.args[0])} {op} {print_term(self.args[1])}"
        atom = print_formula(Atom(self.pred, self.args))
        return atom if self.positive else "~ " + atom


class PClause:
    __slots__ = ("id", "lits", "parents", "rule", "origin", "weight", "keys", "_renamed")

    def __init__(self, id, lits, parents=(), rule="input", origin=None):
        self.id = id
        self.lits = lits
        self.parents = parents
        self.rule = rule
        self.origin = origin
        self.weight = (len(lits), sum(_size(a) for l in lits for a in l.args), id)
        self.keys = frozenset((l.positive, l.pred) for l in lits)
        self._renamed = None

    @property
    def renamed(self) -> list[Lit]:
        """Literals with variables apart from any canonical clause."""
        if self._renamed is None:
            self._renamed = _rename(self.lits, "_r")
        return self._renamed

    def text(self) -> str:
        return " | ".join(str(l) for l in self.lits) if self.lits else "$false"


def _size(t) -> int:
    if isinstance(t, Var):
        return 1
    return 1 + sum(_size(a) for a in t.args)


def _term_vars(t, out):
    if isinstance(t, Var):
        if t.name not in out:
            out.append(t.name)
    else:
        for a in t.args:
            _term_vars(a, out)


def _canonical(lits) -> tuple[Lit, ...] | None:
    """Dedupe, order, rename variables X1.. and drop tautologies (None)."""
    uniq = []
    for l in lits:
        if l not in uniq:
            uniq.append(l)
    for l in uniq:
        if Lit(not l.positive, l.pred, l.args) in uniq:
            return None
        if l.pred == EQ and l.positive and l.args[0] == l.args[1]:
            return None
    uniq = [l for l in uniq if not (l.pred == EQ and not l.positive and l.args[0] == l.args[1])]
    shape = lambda l: (not l.positive, l.pred, str(_anon(l.args)))
    uniq.sort(key=shape)
    order: list[str] = []
    for l in uniq:
        for a in l.args:
            _term_vars(a, order)
    ren = {v: Var(f"X{i}") for i, v in enumerate(order, 1)}
    return tuple(Lit(l.positive, l.pred, tuple(substitute_term(a, ren) for a in l.args)) for l in uniq)


def _anon(args):
    def go(t):
        if isinstance(t, Var):
            return "_"
        return (t.functor, tuple(go(a) for a in t.args))
    return tuple(go(a) for a in args)


def _rename(lits, suffix):
    order: list[str] = []
    for l in lits:
        for a in l.args:
            _term_vars(a, order)
    ren = {v: Var(v + suffix) for v in order}
    return [Lit(l.positive, l.pred, tuple(substitute_term(a, ren) for a in l.args)) for l in lits]


def _unify_args(a1, a2, subst=None):
    subst = {} if subst is None else subst
    for x, y in zip(a1, a2):
        subst = unify_into(x, y, subst)
        if subst is None:
            return None
    return subst


def _subst_lits(lits, subst):
    return [Lit(l.positive, l.pred, tuple(apply(a, subst) for a in l.args)) for l in lits]


def _equality_axioms(fsyms, psyms) -> list[tuple[Lit, ...]]:
    X, Y, Z = Var("X"), Var("Y"), Var("Z")
    eq = lambda a, b, pos=True: Lit(pos, EQ, (a, b))
    out = [(eq(X, X),), (eq(X, Y, False), eq(Y, X)), (eq(X, Y, False), eq(Y, Z, False), eq(X, Z))]
    for name, arity in sorted(fsyms):
        for i in range(arity):
            xs = [Var(f"A{j}") for j in range(arity)]
            ys = list(xs)
            xs[i], ys[i] = X, Y
            out.append((eq(X, Y, False), eq(App(name, tuple(xs)), App(name, tuple(ys)))))
    for name, arity in sorted(psyms):
        for i in range(arity):
            xs = [Var(f"A{j}") for j in range(arity)]
            ys = list(xs)
            xs[i], ys[i] = X, Y
            out.append((eq(X, Y, False), Lit(False, name, tuple(xs)), Lit(True, name, tuple(ys))))
    return out


def _to_lits(clause):
    out = []
    for lit in clause.literals:
        atom = lit.atom
        if isinstance(atom, Eq):
            out.append(Lit(lit.positive, EQ, (atom.lhs, atom.rhs)))
        else:
            out.append(Lit(lit.positive, atom.predicate, atom.args))
    return out


def _signature(clauses):
    fsyms, psyms = set(), set()

    def term(t):
        if isinstance(t, App):
            fsyms.add((t.functor, len(t.args)))
            for a in t.args:
                term(a)

    for c in clauses:
        for l in c:
            if l.pred != EQ:
                psyms.add((l.pred, len(l.args)))
            for a in l.args:
                term(a)
    return fsyms, psyms


def _subsumes(d: tuple, c: tuple) -> bool:
    return len(d) <= len(c) and all(l in c for l in d)


def _named(items, prefix):
    out = []
    for i, p in enumerate(items, 1):
        if isinstance(p, AnnotatedStatement):
            out.append((p.name, p.formula))
        else:
            out.append((f"{prefix}_{i}", p))
    return out


def _vars(t) -> set[str]:
    out: list[str] = []
    _term_vars(t, out)
    return set(out)


def _orient(lit: Lit):
    """A positive unit equation as a left-to-right rewrite rule, if it has one."""
    l, r = lit.args
    key = lambda t: (_size(t), print_term(t))
    if key(l) < key(r):
        l, r = r, l
    if key(l) == key(r) or not _vars(r) <= _vars(l) or isinstance(l, Var):
        return None
    return l, r


def _rewrite(t, rules, used: list, budget: list):
    if isinstance(t, App) and t.args:
        args = tuple(_rewrite(a, rules, used, budget) for a in t.args)
        if args != t.args:
            t = App(t.functor, args)
    for cid, lhs, rhs in rules:
        if budget[0] <= 0:
            return t
        b = match(lhs, t)
        if b is not None:
            budget[0] -= 1
            if cid not in used:
                used.append(cid)
            return _rewrite(substitute_term(rhs, b), rules, used, budget)
    return t


class _Saturation:
    """One given-clause run over a fixed clause set."""

    def __init__(self, inputs, set_of_support: bool, simplify: bool = False):
        self.simplify = simplify
        self.rules: list[tuple[int, object, object]] = []
        self.ids = itertools.count(1)
        self.passive: list = []
        self.by_age: list = []
        self.done: set[int] = set()
        self.active: list[PClause] = []
        self.kept: dict[tuple, PClause] = {}
        self.all_clauses: dict[int, PClause] = {}
        self.picks = 0
        self.generated = 0
        self.empty: PClause | None = None
        for lits, rule, origin in inputs:
            self.add(lits, (), rule, origin)
        if set_of_support and any(c.origin == "conjecture" for c in self.all_clauses.values()):
            # Premises are usable but never selected, so every inference
            # involves a descendant of the negated conjecture.
            for c in self.all_clauses.values():
                if c.origin != "conjecture":
                    self.done.add(c.id)
                    self.activate(c)

    def add(self, lits, parents, rule, origin=None):
        lits = _canonical(lits)
        if lits is None or lits in self.kept:
            return None
        c = PClause(next(self.ids), lits, parents, rule, origin)
        self.kept[lits] = c
        self.all_clauses[c.id] = c
        heapq.heappush(self.passive, (c.weight, c.id))
        heapq.heappush(self.by_age, c.id)
        if not lits and self.empty is None:
            self.empty = c
        return c

    def select(self):
        # Every AGE_RATIO-th pick takes the oldest clause so that small
        # clauses cannot starve larger ones forever.
        age = self.picks % AGE_RATIO == AGE_RATIO - 1
        self.picks += 1
        heap = self.by_age if age else self.passive
        while heap:
            item = heapq.heappop(heap)
            cid = item if age else item[1]
            if cid not in self.done:
                self.done.add(cid)
                return self.all_clauses[cid]
        return None

    def activate(self, c: PClause) -> None:
        self.active.append(c)
        if self.simplify and len(c.lits) == 1 and c.lits[0].pred == EQ and c.lits[0].positive:
            rule = _orient(c.lits[0])
            if rule is not None:
                self.rules.append((c.id, *rule))

    def demodulate(self, c: PClause) -> bool:
        """Replace ``c`` by its normal form under the unit rules; True if it changed."""
        if not self.rules:
            return False
        used: list[int] = []
        budget = [REWRITE_LIMIT]
        lits = [Lit(l.positive, l.pred, tuple(_rewrite(a, self.rules, used, budget) for a in l.args))
                for l in c.lits]
        if not used:
            return False
        self.add(lits, (c.id, *used), "demodulation")
        return True

    def run(self, max_generated: int, deadline: float) -> str:
        """Return "proved", "saturated", "budget" or "timeout"."""
        while self.empty is None:
            if len(self.done) >= len(self.all_clauses):
                return "saturated"
            if time.monotonic() > deadline:
                return "timeout"
            if self.generated > max_generated:
                return "budget"
            given = self.select()
            if given is None or any(_subsumes(a.lits, given.lits) for a in self.active):
                continue
            if self.simplify and self.demodulate(given):
                continue
            self.infer(given)
        return "proved"

    def infer(self, given: PClause) -> None:
        new = []
        for i, j in itertools.combinations(range(len(given.lits)), 2):
            li, lj = given.lits[i], given.lits[j]
            if li.positive == lj.positive and li.pred == lj.pred and len(li.args) == len(lj.args):
                s = _unify_args(li.args, lj.args)
                if s is not None:
                    rest = [l for k, l in enumerate(given.lits) if k != j]
                    new.append((_subst_lits(rest, s), (given.id,), "factoring"))
        for i, li in enumerate(given.lits):
            # equality resolution: s != t with s, t unifiable
            if li.pred == EQ and not li.positive:
                s = unify_into(li.args[0], li.args[1], {})
                if s is not None:
                    rest = [l for k, l in enumerate(given.lits) if k != i]
                    new.append((_subst_lits(rest, s), (given.id,), "equality_resolution"))
        wanted = {(not pos, pred) for pos, pred in given.keys}
        for other in self.active + [given]:
            if wanted.isdisjoint(other.keys):
                continue
            olits = other.renamed
            for i, li in enumerate(given.lits):
                for j, lj in enumerate(olits):
                    if li.positive == lj.positive or li.pred != lj.pred or len(li.args) != len(lj.args):
                        continue
                    s = _unify_args(li.args, lj.args)
                    if s is None:
                        continue
                    rest = [l for k, l in enumerate(given.lits) if k != i] + \
                           [l for k, l in enumerate(olits) if k != j]
                    new.append((_subst_lits(rest, s), (given.id, other.id), "resolution"))
        self.activate(given)
        for lits, parents, rule in new:
            self.generated += 1
            c = self.add(lits, parents, rule)
            if c is not None and not c.lits:
                return


def builtin_prove(premises, conjecture, max_clauses: int = 20000, max_seconds: float = 10.0,
                  task_name: str = "task") -> Verdict:
    """Try to refute premises + negated conjecture.

    ``premises`` may be formulas or annotated statements (whose names are
    reported back in ``used_premises``).
    """
    start = time.monotonic()
    deadline = start + max_seconds
    named = _named(premises, "premise")
    if isinstance(conjecture, AnnotatedStatement):
        conj_name, conj_formula = conjecture.name, conjecture.formula
    else:
        conj_name, conj_formula = "conjecture", conjecture
    closed_conj = forall(sorted(free_variables(conj_formula)), conj_formula)
    formulas = [f for _, f in named] + [Not(closed_conj)]
    origins = [n for n, _ in named] + [None]

    inputs = [(_to_lits(c), "clausify", "conjecture" if origins[idx] is None else origins[idx])
              for c, idx in clausify_with_origins(formulas)]
    with_eq = list(inputs)
    if any(l.pred == EQ for lits, _, _ in inputs for l in lits):
        with_eq += [(list(lits), "equality_axiom", "$equality")
                    for lits in _equality_axioms(*_signature([l for l, _, _ in inputs]))]

    # Cheap incomplete attempts first (a refutation found without the
    # equality axioms or within the set of support is still a refutation),
    # then the complete search that alone may report saturation.
    # Demodulation is used only in those incomplete attempts.
    share = max_clauses // 10
    stages = [(inputs, True, False, share)]
    if len(with_eq) > len(inputs):
        stages += [(inputs, True, True, share), (with_eq, True, True, 2 * share)]
    stages.append((with_eq, False, False, max_clauses))
    spent = 0
    outcome, run = "budget", None
    for clauses, sos, simplify, budget in stages:
        run = _Saturation(clauses, sos, simplify)
        outcome = run.run(min(budget, max_clauses - spent), deadline)
        spent += run.generated
        if outcome in ("proved", "timeout"):
            break

    verdict = Verdict(Status.UNKNOWN, wall_seconds=time.monotonic() - start, backend="builtin")
    if outcome == "proved":
        proof = _proof_clauses(run.empty, run.all_clauses)
        verdict.status = Status.PROVED
        verdict.used_premises = sorted({c.origin for c in proof
                                        if c.origin not in (None, "conjecture", "$equality")},
                                       key=[n for n, _ in named].index)
        verdict.szs_word = "Theorem"
        verdict.derivation_text = _tstp(task_name, named, conj_name, conj_formula, proof)
    elif outcome == "saturated":
        verdict.status = Status.REFUTED
        verdict.szs_word = "CounterSatisfiable"
        verdict.note = "saturated without deriving the empty clause"
    elif outcome == "timeout":
        verdict.status = Status.TIMEOUT
        verdict.note = f"exceeded {max_seconds}s"
    else:
        verdict.note = f"exceeded {max_clauses} generated clauses"
    return verdict


def _proof_clauses(empty: PClause, all_clauses) -> list[PClause]:
    seen: dict[int, PClause] = {}
    stack = [empty]
    while stack:
        c = stack.pop()
        if c.id in seen:
            continue
        seen[c.id] = c
        stack.extend(all_clauses[p] for p in c.parents)
    return [seen[k] for k in sorted(seen)]


def _tstp(task_name, named, conj_name, conj_formula, proof) -> str:
    origins = {c.origin for c in proof}
    lines = []
    for name, f in named:
        if name in origins:
            lines.append(f"fof({quote_name(name)}, axiom, {print_formula(f)}, "
                         f"file({quote_name(task_name)}, {quote_name(name)})).")
    neg_name = quote_name(conj_name + "_negated")
    if "conjecture" in origins:
        lines.append(f"fof({quote_name(conj_name)}, conjecture, {print_formula(conj_formula)}, "
                     f"file({quote_name(task_name)}, {quote_name(conj_name)})).")
        lines.append(f"fof({neg_name}, negated_conjecture, ~ ({print_formula(conj_formula)}), "
                     f"inference(negate_conjecture,[status(cth)],[{quote_name(conj_name)}])).")
    for c in proof:
        if c.rule == "equality_axiom":
            source = "introduced(equality_axiom,[])"
            role = "axiom"
        elif c.rule == "clausify":
            parent = neg_name if c.origin == "conjecture" else quote_name(c.origin)
            source = f"inference(clausify,[status(esa)],[{parent}])"
            role = "negated_conjecture" if c.origin == "conjecture" else "plain"
        else:
            parents = ",".join(f"c_{p}" for p in c.parents)
            source = f"inference({c.rule},[status(thm)],[{parents}])"
            role = "plain"
        lines.append(f"cnf(c_{c.id}, {role}, {c.text()}, {source}).")
    return "\n".join(lines) + "\n"
