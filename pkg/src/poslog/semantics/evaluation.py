# semantics/evaluation.py
import logging
from typing import Dict, Mapping, Optional

from poslog.exceptions import SortError
from poslog.logic.syntax import (
    And,
    App,
    Atom,
    Const,
    Equals,
    Exists,
    Falsity,
    Formula,
    Implies,
    Not,
    Or,
    Term,
    Truth,
    Var,
)
from poslog.semantics.structures import Element, FiniteStructure

logger = logging.getLogger(__name__)

Assignment = Mapping[Var, Element]


def eval_term(structure: FiniteStructure, term: Term, assignment: Assignment) -> Element:
    if isinstance(term, Var):
        try:
            return assignment[term]
        except KeyError:
            raise SortError(f"Assignment does not cover variable {term!r}") from None
    if isinstance(term, Const):
        return structure.constants[term.name]
    if isinstance(term, App):
        args = tuple(eval_term(structure, a, assignment) for a in term.args)
        return structure.apply(term.function, args)
    raise SortError(f"Not a term: {term!r}")


def check_assignment(structure: FiniteStructure, f: Formula, assignment: Assignment):
    for var in f.free_set:
        if var not in assignment:
            raise SortError(f"Assignment does not cover free variable {var!r}")
        if assignment[var] not in structure.carriers.get(var.sort, ()):
            raise SortError(
                f"{assignment[var]!r} is not an element of sort {var.sort} in {structure.name}"
            )


def evaluate(structure: FiniteStructure, f: Formula,
             assignment: Optional[Assignment] = None) -> bool:
    """Tarskian satisfaction of f in a finite structure under an assignment.

    Raises:
        SortError: if the assignment misses a free variable or is ill-sorted
    """
    assignment = dict(assignment or {})
    check_assignment(structure, f, assignment)
    return _evaluate(structure, f, assignment)


def _evaluate(structure: FiniteStructure, f: Formula, assignment: Dict[Var, Element]) -> bool:
    if isinstance(f, Truth):
        return True
    if isinstance(f, Falsity):
        return False
    if isinstance(f, Atom):
        row = tuple(eval_term(structure, a, assignment) for a in f.args)
        return structure.holds(f.relation, row)
    if isinstance(f, Equals):
        return eval_term(structure, f.left, assignment) == eval_term(structure, f.right, assignment)
    if isinstance(f, And):
        return all(_evaluate(structure, c, assignment) for c in f.children())
    if isinstance(f, Or):
        return any(_evaluate(structure, c, assignment) for c in f.children())
    if isinstance(f, Not):
        return not _evaluate(structure, f.body, assignment)
    if isinstance(f, Implies):
        return (not _evaluate(structure, f.antecedent, assignment)
                or _evaluate(structure, f.consequent, assignment))
    quantifier = any if isinstance(f, Exists) else all
    saved = assignment.get(f.var)
    had = f.var in assignment
    try:
        return quantifier(
            _evaluate(structure, f.body, _bind(assignment, f.var, element))
            for element in structure.carriers[f.var.sort]
        )
    finally:
        if had:
            assignment[f.var] = saved
        else:
            assignment.pop(f.var, None)


def _bind(assignment: Dict[Var, Element], var: Var, element: Element) -> Dict[Var, Element]:
    assignment[var] = element
    return assignment


def satisfies(structure: FiniteStructure, sentence: Formula) -> bool:
    return evaluate(structure, sentence, {})


def assignment_for(variables, row) -> Dict[Var, Element]:
    return dict(zip(variables, row))
