# logic/transform.py
"""Substitution, canonical forms and size measures on formulas."""
import logging
from typing import Dict, Iterable, Mapping, Set

from poslog.exceptions import SortError
from poslog.logic.syntax import (
    And,
    App,
    Atom,
    Equals,
    Exists,
    FALSE,
    Falsity,
    Forall,
    Formula,
    Implies,
    Not,
    Or,
    TRUE,
    Term,
    Truth,
    Var,
    conjunction,
    disjunction,
)

logger = logging.getLogger(__name__)


def substitute_term(term: Term, binding: Mapping[Var, Term]) -> Term:
    if isinstance(term, Var):
        return binding.get(term, term)
    if isinstance(term, App):
        return App(term.function, tuple(substitute_term(a, binding) for a in term.args), term.sort)
    return term


def _fresh(sort: str, used: Iterable[Var]) -> Var:
    taken = {v.index for v in used if v.sort == sort}
    index = 0
    while index in taken:
        index += 1
    return Var(sort, index)


def substitute(f: Formula, binding: Mapping[Var, Term]) -> Formula:
    """Capture-avoiding substitution of terms for free variables.

    Bound variables that would capture a variable of a replacing term are
    renamed to the smallest free index of their sort.
    """
    for var, term in binding.items():
        if var.sort != term.sort:
            raise SortError(f"Cannot substitute a term of sort {term.sort} for {var!r}")
    binding = {v: t for v, t in binding.items() if v in f.free_set}
    if not binding:
        return f
    return _substitute(f, binding)


def _substitute(f: Formula, binding: Dict[Var, Term]) -> Formula:
    if isinstance(f, (Truth, Falsity)):
        return f
    if isinstance(f, Atom):
        return Atom(f.relation, tuple(substitute_term(a, binding) for a in f.args))
    if isinstance(f, Equals):
        return Equals(substitute_term(f.left, binding), substitute_term(f.right, binding))
    if isinstance(f, And):
        return And(tuple(_substitute(c, binding) for c in f.children()))
    if isinstance(f, Or):
        return Or(tuple(_substitute(c, binding) for c in f.children()))
    if isinstance(f, Not):
        return Not(_substitute(f.body, binding))
    if isinstance(f, Implies):
        return Implies(_substitute(f.antecedent, binding), _substitute(f.consequent, binding))
    # quantifier
    inner = {v: t for v, t in binding.items() if v != f.var and v in f.body.free_set}
    if not inner:
        return f
    incoming = set()
    for term in inner.values():
        incoming |= term.variables()
    var, body = f.var, f.body
    if var in incoming:
        new_var = _fresh(var.sort, incoming | body.free_set | set(inner))
        body = _substitute(body, {var: new_var})
        var = new_var
    return type(f)(var, _substitute(body, inner))


def rename_bound(f: Formula, avoid: Iterable[Var]) -> Formula:
    """Rename bound variables so that none of them lies in ``avoid``."""
    avoid = set(avoid)
    if isinstance(f, (Exists, Forall)):
        body = rename_bound(f.body, avoid)
        var = f.var
        if var in avoid:
            new_var = _fresh(var.sort, avoid | body.free_set | {var})
            body = _substitute(body, {var: new_var})
            var = new_var
        return type(f)(var, body)
    if isinstance(f, (And, Or)):
        return type(f)(tuple(rename_bound(c, avoid) for c in f.children()))
    if isinstance(f, Not):
        return Not(rename_bound(f.body, avoid))
    if isinstance(f, Implies):
        return Implies(rename_bound(f.antecedent, avoid), rename_bound(f.consequent, avoid))
    return f


def depth(f: Formula) -> int:
    children = f.children()
    if not children:
        return 0
    return 1 + max(depth(c) for c in children)


def size(f: Formula) -> int:
    return 1 + sum(size(c) for c in f.children())


def formula_order(f: Formula):
    """Total order used wherever a minimal formula is chosen."""
    return (depth(f), size(f), f.key)


def subformulas(f: Formula) -> Set[Formula]:
    result = {f}
    for child in f.children():
        result |= subformulas(child)
    return result


def _orient(term_a: Term, term_b: Term) -> Equals:
    if term_b.key < term_a.key:
        term_a, term_b = term_b, term_a
    return Equals(term_a, term_b)


def _simplify(f: Formula) -> Formula:
    if isinstance(f, (Truth, Falsity, Atom)):
        return f
    if isinstance(f, Equals):
        return _orient(f.left, f.right)
    if isinstance(f, (And, Or)):
        is_and = isinstance(f, And)
        unit, absorbing = (Truth, Falsity) if is_and else (Falsity, Truth)
        flat = []
        for child in f.children():
            child = _simplify(child)
            if isinstance(child, type(f)):
                flat.extend(child.children())
            else:
                flat.append(child)
        if any(isinstance(c, absorbing) for c in flat):
            return FALSE if is_and else TRUE
        flat = [c for c in flat if not isinstance(c, unit)]
        built = conjunction(flat) if is_and else disjunction(flat)
        if isinstance(built, (And, Or)) and len(built.children()) == 1:
            return built.children()[0]
        return built
    if isinstance(f, Not):
        return Not(_simplify(f.body))
    if isinstance(f, Implies):
        return Implies(_simplify(f.antecedent), _simplify(f.consequent))
    body = _simplify(f.body)
    if f.var not in body.free_set:
        # carriers are nonempty, so a vacuous quantifier is dropped
        return body
    return type(f)(f.var, body)


def _rename_canonical(f: Formula, mapping: Dict[Var, Var], used: Set[Var]) -> Formula:
    if isinstance(f, (Truth, Falsity, Atom, Equals)):
        return _substitute(f, mapping) if mapping else f
    if isinstance(f, (And, Or)):
        return type(f)(tuple(_rename_canonical(c, mapping, used) for c in f.children()))
    if isinstance(f, Not):
        return Not(_rename_canonical(f.body, mapping, used))
    if isinstance(f, Implies):
        return Implies(
            _rename_canonical(f.antecedent, mapping, used),
            _rename_canonical(f.consequent, mapping, used),
        )
    new_var = _fresh(f.var.sort, used)
    inner = dict(mapping)
    inner[f.var] = new_var
    body = _rename_canonical(f.body, inner, used | {new_var})
    return type(f)(f.var if new_var == f.var else new_var, body)


def canonicalize(f: Formula) -> Formula:
    """Canonical representative of a formula.

    Flattens and deduplicates set connectives, absorbs units, drops vacuous
    quantifiers, orients equalities and renames each binder to the smallest
    index of its sort not used by the free variables or enclosing binders.
    Idempotent and truth-preserving in every structure with nonempty carriers.
    """
    current = f
    while True:
        simplified = _simplify(current)
        renamed = _rename_canonical(simplified, {}, set(simplified.free_set))
        if renamed == current:
            return renamed
        current = renamed
