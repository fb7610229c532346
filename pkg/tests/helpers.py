"""Shared fixtures for the test modules: paths, random formulas, prover problems."""

from __future__ import annotations

import itertools
import os
import random
import sys

from fofproof.logic import AND, IFF, IMPLIES, OR, XOR, App, Atom, Binary, Eq, Not, Quant, Var
from fofproof.model_eval import PartialModel
from fofproof.tptp.check import CORPUS_DIR

TESTS_DIR = os.path.dirname(os.path.abspath(__file__))
FIXTURES = os.path.join(TESTS_DIR, "fixtures")
FAKE_PROVER = os.path.join(FIXTURES, "fake_prover.py")
CORPUS = CORPUS_DIR


def corpus(name: str) -> str:
    return os.path.join(CORPUS, name)


def fixture(*parts: str) -> str:
    return os.path.join(FIXTURES, *parts)


def fake_template(*flags: str) -> str:
    """Command template running the fake prover with ``flags``."""
    return " ".join([sys.executable, FAKE_PROVER, *flags, "{file}"])


# Random formulas ---------------------------------------------------------------

FUNCTIONS = (("a", 0), ("b", 0), ("f", 1), ("g", 2))
PREDICATES = (("q", 0), ("p", 1), ("r", 2))
VARIABLES = ("X", "Y", "Z")
BINARY_OPS = (AND, OR, IMPLIES, IFF, XOR)


def random_term(rng: random.Random, bound: tuple[str, ...], depth: int):
    if bound and (depth == 0 or rng.random() < 0.4):
        return Var(rng.choice(bound))
    leaves = [s for s in FUNCTIONS if s[1] == 0]
    name, arity = rng.choice(FUNCTIONS if depth > 0 else leaves)
    return App(name, tuple(random_term(rng, bound, depth - 1) for _ in range(arity)))


def random_formula(rng: random.Random, depth: int = 4, bound: tuple[str, ...] = ()):
    """A closed formula of connective depth <= ``depth``."""
    roll = rng.random()
    if depth == 0 or roll < 0.2:
        if rng.random() < 0.25:
            return Eq(random_term(rng, bound, 1), random_term(rng, bound, 1))
        name, arity = rng.choice(PREDICATES)
        return Atom(name, tuple(random_term(rng, bound, 1) for _ in range(arity)))
    if roll < 0.35:
        return Not(random_formula(rng, depth - 1, bound))
    if roll < 0.55:
        v = rng.choice(VARIABLES)
        kind = rng.choice(("!", "?"))
        return Quant(kind, (v,), random_formula(rng, depth - 1, tuple(sorted(set(bound) | {v}))))
    return Binary(rng.choice(BINARY_OPS), random_formula(rng, depth - 1, bound),
                  random_formula(rng, depth - 1, bound))


def random_total_model(rng: random.Random, size: int) -> PartialModel:
    domain = tuple(f"d{i}" for i in range(size))
    funs = {(n, args): rng.choice(domain)
            for n, a in FUNCTIONS for args in itertools.product(domain, repeat=a)}
    preds = {(n, args): rng.random() < 0.5
             for n, a in PREDICATES for args in itertools.product(domain, repeat=a)}
    return PartialModel(domain, funs, preds)


def random_restriction(rng: random.Random, m: PartialModel, keep: float = 0.6) -> PartialModel:
    """Drop table entries of ``m`` at random, giving a partial model it extends."""
    funs = {k: v for k, v in m.functions.items() if rng.random() < keep}
    preds = {k: v for k, v in m.predicates.items() if rng.random() < keep}
    return PartialModel(m.domain, funs, preds)


# Prover problems ----------------------------------------------------------------

with open(os.path.join(CORPUS, "safety_cases_lemma.p"), encoding="utf-8") as _fh:
    CASES_LEMMA_TEXT = _fh.read()

# (label, premises, conjecture) as TPTP formula text.
VALID_PROBLEMS = [
    ("excluded_middle", [], "p | ~p"),
    ("modus_ponens", ["![X]: (p(X) => q(X))", "p(a)"], "q(a)"),
    ("forall_exists", [], "(![X]: p(X)) => (?[X]: p(X))"),
    ("quantifier_swap", [], "(?[Y]: ![X]: r(X,Y)) => (![X]: ?[Y]: r(X,Y))"),
    ("eq_substitution", ["a = b", "p(a)"], "p(b)"),
    ("eq_transitivity", ["a = b", "b = c"], "a = c"),
    ("eq_congruence", ["f(a) = a"], "f(f(a)) = a"),
    ("de_morgan_quant", [], "(~ ![X]: p(X)) <=> (?[X]: ~ p(X))"),
    ("hypothetical_syllogism", [], "((p => q) & (q => s)) => (p => s)"),
    ("drinker", [], "?[X]: (d(X) => ![Y]: d(Y))"),
    ("disjunctive_syllogism", ["![X]: (p(X) | q(X))", "![X]: ~ p(X)"], "![X]: q(X)"),
    ("symmetry_instance", ["![X,Y]: (r(X,Y) => r(Y,X))", "r(a,b)"], "r(b,a)"),
    ("transitivity_chain", ["![X,Y,Z]: ((r(X,Y) & r(Y,Z)) => r(X,Z))", "r(a,b)", "r(b,c)", "r(c,d)"],
     "r(a,d)"),
    ("iff_exists", ["![X]: (p(X) <=> q(X))"], "(?[X]: p(X)) <=> (?[X]: q(X))"),
    ("iff_commutes", [], "(p <=> q) <=> (q <=> p)"),
    ("reflexivity", [], "![X]: X = X"),
    ("function_rewrite", ["![X]: f(X) = g(X)", "p(f(a))"], "p(g(a))"),
    ("xor_implies_or", [], "(p <~> q) => (p | q)"),
    ("iterated_step", ["![X]: (p(X) => p(f(X)))", "p(a)"], "p(f(f(f(a))))"),
]

INVALID_PROBLEMS = [
    ("different_constant", ["p(a)"], "p(b)"),
    ("quantifier_swap_back", [], "(![X]: ?[Y]: r(X,Y)) => (?[Y]: ![X]: r(X,Y))"),
    ("exists_to_forall", ["?[X]: p(X)"], "![X]: p(X)"),
    ("affirm_consequent", ["![X]: (p(X) => q(X))", "q(a)"], "p(a)"),
    ("constants_equal", [], "a = b"),
    ("inverse_guess", ["f(a) = b"], "f(b) = a"),
    ("symmetric_reflexive", ["![X,Y]: (r(X,Y) => r(Y,X))"], "r(a,a)"),
    ("singleton_domain", [], "![X,Y]: X = Y"),
    ("involution_identity", ["![X]: f(f(X)) = X"], "![X]: f(X) = X"),
    ("two_element_domain", [], "![X,Y,Z]: (X = Y | Y = Z | X = Z)"),
]
