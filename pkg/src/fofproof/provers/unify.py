"""Syntactic unification of first-order terms."""

from __future__ import annotations

from ..logic import App, Var


def walk(t, subst):
    while isinstance(t, Var) and t.name in subst:
        t = subst[t.name]
    return t


def occurs(name: str, t, subst) -> bool:
    t = walk(t, subst)
    if isinstance(t, Var):
        return t.name == name
    return any(occurs(name, a, subst) for a in t.args)


def apply(t, subst):
    """Apply a (possibly triangular) substitution fully."""
    t = walk(t, subst)
    if isinstance(t, Var) or not t.args:
        return t
    return App(t.functor, tuple(apply(a, subst) for a in t.args))


def unify_into(t1, t2, subst: dict) -> dict | None:
    """Extend the triangular substitution ``subst`` to unify ``t1``, ``t2``."""
    stack = [(t1, t2)]
    subst = dict(subst)
    while stack:
        a, b = stack.pop()
        a, b = walk(a, subst), walk(b, subst)
        if a == b:
            continue
        if isinstance(a, Var):
            if occurs(a.name, b, subst):
                return None
            subst[a.name] = b
        elif isinstance(b, Var):
            if occurs(b.name, a, subst):
                return None
            subst[b.name] = a
        elif a.functor != b.functor or len(a.args) != len(b.args):
            return None
        else:
            stack.extend(zip(a.args, b.args))
    return subst


def unify(t1, t2) -> dict | None:
    """Most general unifier of two terms as an idempotent mapping, or None."""
    subst = unify_into(t1, t2, {})
    if subst is None:
        return None
    return {name: apply(Var(name), subst) for name in subst}


def match(pattern, term, binding: dict | None = None) -> dict | None:
    """One-way matching: bind variables of ``pattern`` so it equals ``term``."""
    binding = {} if binding is None else dict(binding)
    stack = [(pattern, term)]
    while stack:
        p, t = stack.pop()
        if isinstance(p, Var):
            bound = binding.get(p.name)
            if bound is None:
                binding[p.name] = t
            elif bound != t:
                return None
        elif isinstance(t, Var) or p.functor != t.functor or len(p.args) != len(t.args):
            return None
        else:
            stack.extend(zip(p.args, t.args))
    return binding
