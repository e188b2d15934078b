# logic/enumeration.py
import itertools
import logging
from typing import Dict, List, Optional, Sequence, Tuple

from poslog.config import settings
from poslog.exceptions import ResourceCeilingError
from poslog.logic.syntax import (
    And,
    App,
    Atom,
    Const,
    Equals,
    Exists,
    FALSE,
    Forall,
    Formula,
    Not,
    Or,
    Signature,
    TRUE,
    Term,
    Var,
)
from poslog.logic.transform import canonicalize, formula_order

logger = logging.getLogger(__name__)

POSITIVE = "positive"
FIRST_ORDER = "first-order"
CONSTRUCTIBLE = "constructible"


class FormulaEnumerator:
    """Width-capped, depth-stratified formula supply over a signature.

    Level 0 holds the atoms over the variable context plus true and false.
    Level k adds set conjunctions and disjunctions of 2..width formulas of
    level k-1, and existential quantification of a level k-1 formula over one
    fresh variable. The first-order grammar also adds negation and universal
    quantification; the constructible grammar adds negation only.
    Results are memoized per (grammar, variables, depth).
    """

    def __init__(self, signature: Signature, width: Optional[int] = None,
                 ceiling: Optional[int] = None):
        self.signature = signature
        self.width = width if width is not None else settings.POSLOG_WIDTH_CAP
        self.ceiling = ceiling if ceiling is not None else settings.POSLOG_CEILING
        self.logger = logging.getLogger(__name__)
        self._levels: Dict[Tuple[str, Tuple[Var, ...], int], Tuple[Formula, ...]] = {}

    # --- terms and atoms ---

    def terms(self, variables: Sequence[Var]) -> Dict[str, List[Term]]:
        """Variables, constants and one level of function application, by sort."""
        by_sort: Dict[str, List[Term]] = {sort: [] for sort in self.signature.sorts}
        for var in variables:
            by_sort[var.sort].append(var)
        for name, sort in sorted(self.signature.constants.items()):
            by_sort[sort].append(Const(name, sort))
        base = {sort: list(terms) for sort, terms in by_sort.items()}
        for name, (arity, result) in sorted(self.signature.functions.items()):
            for args in itertools.product(*(base[s] for s in arity)):
                by_sort[result].append(App(name, tuple(args), result))
        return by_sort

    def atoms(self, variables: Sequence[Var]) -> Tuple[Formula, ...]:
        by_sort = self.terms(variables)
        found = {TRUE, FALSE}
        for name, sorting in sorted(self.signature.relations.items()):
            for args in itertools.product(*(by_sort[s] for s in sorting)):
                found.add(Atom(name, tuple(args)))
        for sort in self.signature.sorts:
            terms = by_sort[sort]
            for i, left in enumerate(terms):
                for right in terms[i:]:
                    found.add(canonicalize(Equals(left, right)))
        return self._ordered(found)

    # --- grammars ---

    def positive(self, variables: Sequence[Var], depth: int) -> Tuple[Formula, ...]:
        return self._level(POSITIVE, tuple(variables), depth)

    def first_order(self, variables: Sequence[Var], depth: int) -> Tuple[Formula, ...]:
        return self._level(FIRST_ORDER, tuple(variables), depth)

    def constructible(self, variables: Sequence[Var], depth: int) -> Tuple[Formula, ...]:
        return self._level(CONSTRUCTIBLE, tuple(variables), depth)

    def _level(self, grammar: str, variables: Tuple[Var, ...], depth: int) -> Tuple[Formula, ...]:
        cache_key = (grammar, variables, depth)
        if cache_key in self._levels:
            return self._levels[cache_key]
        if depth <= 0:
            result = self.atoms(variables)
        else:
            result = self._build(grammar, variables, depth)
        if len(result) > self.ceiling:
            raise ResourceCeilingError(
                f"{grammar} supply over {len(variables)} variables at depth {depth} "
                f"has {len(result)} formulas, above the ceiling {self.ceiling}"
            )
        self._levels[cache_key] = result
        return result

    def _build(self, grammar, variables, depth):
        previous = self._level(grammar, variables, depth - 1)
        found = set(previous)

        def add(formula):
            found.add(canonicalize(formula))
            if len(found) > self.ceiling:
                raise ResourceCeilingError(
                    f"{grammar} supply exceeded the ceiling {self.ceiling} at depth {depth}"
                )

        if grammar == CONSTRUCTIBLE:
            for formula in self._level(POSITIVE, variables, depth):
                add(formula)
        for width in range(2, self.width + 1):
            for group in itertools.combinations(previous, width):
                add(And(group))
                add(Or(group))
        if grammar in (FIRST_ORDER, CONSTRUCTIBLE):
            for formula in previous:
                add(Not(formula))
        if grammar != CONSTRUCTIBLE:
            for sort in self.signature.sorts:
                fresh = self._fresh(variables, sort)
                for body in self._level(grammar, variables + (fresh,), depth - 1):
                    if fresh not in body.free_set:
                        continue
                    add(Exists(fresh, body))
                    if grammar == FIRST_ORDER:
                        add(Forall(fresh, body))
        self.logger.debug(
            f"Enumerated {len(found)} {grammar} formulas over {len(variables)} variables "
            f"at depth {depth}"
        )
        return self._ordered(found)

    @staticmethod
    def _fresh(variables: Sequence[Var], sort: str) -> Var:
        taken = {v.index for v in variables if v.sort == sort}
        index = 0
        while index in taken:
            index += 1
        return Var(sort, index)

    @staticmethod
    def _ordered(formulas) -> Tuple[Formula, ...]:
        return tuple(sorted(formulas, key=formula_order))


def enumerate_positive(signature: Signature, variables: Sequence[Var], depth: int,
                       width: Optional[int] = None,
                       ceiling: Optional[int] = None) -> Tuple[Formula, ...]:
    """Canonical positive formulas of depth at most ``depth`` in ``variables``.

    Raises:
        ResourceCeilingError: when the supply grows past the ceiling
    """
    return FormulaEnumerator(signature, width, ceiling).positive(variables, depth)


def enumerate_first_order(signature: Signature, variables: Sequence[Var], depth: int,
                          width: Optional[int] = None,
                          ceiling: Optional[int] = None) -> Tuple[Formula, ...]:
    return FormulaEnumerator(signature, width, ceiling).first_order(variables, depth)


def enumerate_constructible(signature: Signature, variables: Sequence[Var], depth: int,
                            width: Optional[int] = None,
                            ceiling: Optional[int] = None) -> Tuple[Formula, ...]:
    return FormulaEnumerator(signature, width, ceiling).constructible(variables, depth)
