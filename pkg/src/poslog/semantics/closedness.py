# semantics/closedness.py
"""Positive existential closedness and continuations relative to a class."""
import logging
import threading
import weakref
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from poslog.config import settings
from poslog.exceptions import (
    HomomorphismError,
    NotContinuableError,
    PreconditionError,
    UniverseClassError,
)
from poslog.logic.enumeration import FormulaEnumerator
from poslog.logic.syntax import canonical_variables
from poslog.semantics.homomorphisms import (
    Homomorphism,
    is_immersion,
    iter_homomorphisms,
)
from poslog.semantics.structures import FiniteStructure, Row, UniverseClass
from poslog.semantics.tables import extension_table

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PecVerdict:
    holds: bool
    counterexample: Optional[Homomorphism] = None


@dataclass(frozen=True)
class JointContinuation:
    target: FiniteStructure
    left: Homomorphism
    right: Homomorphism


_PEC_CACHE: "weakref.WeakKeyDictionary[UniverseClass, Dict[int, PecVerdict]]" = weakref.WeakKeyDictionary()
_PEC_LOCK = threading.Lock()


def _require_member(structure: FiniteStructure, universe: UniverseClass):
    if structure not in universe:
        raise UniverseClassError(f"{structure.name} is not a member of class {universe.name}")


def is_pec(structure: FiniteStructure, universe: UniverseClass) -> PecVerdict:
    """True iff every homomorphism from the structure into the class is an immersion.

    Raises:
        UniverseClassError: if the structure is not a member of the class
    """
    _require_member(structure, universe)
    with _PEC_LOCK:
        cached = _PEC_CACHE.setdefault(universe, {}).get(id(structure))
    if cached is not None:
        return cached
    verdict = PecVerdict(True)
    for target in universe.members:
        for hom in iter_homomorphisms(structure, target):
            if not is_immersion(hom, search_witness=False).holds:
                verdict = PecVerdict(False, counterexample=hom)
                break
        if not verdict.holds:
            break
    logger.debug(f"{structure.name} pec in {universe.name}: {verdict.holds}")
    with _PEC_LOCK:
        _PEC_CACHE[universe][id(structure)] = verdict
    return verdict


def pec_members(universe: UniverseClass) -> Tuple[FiniteStructure, ...]:
    return tuple(m for m in universe.members if is_pec(m, universe).holds)


def continue_to_pec(structure: FiniteStructure, universe: UniverseClass) -> Homomorphism:
    """First homomorphism, in class then map order, into a pec member.

    Raises:
        NotContinuableError: when no pec member receives the structure
    """
    _require_member(structure, universe)
    for target in pec_members(universe):
        hom = next(iter_homomorphisms(structure, target), None)
        if hom is not None:
            return hom
    raise NotContinuableError(
        f"{structure.name} has no continuation into a pec member of {universe.name}; "
        f"the class is not closed enough to stand in for an inductive class"
    )


def positive_profile(structure: FiniteStructure, row: Row, sorts: Sequence[str], depth: int,
                     enumerator: Optional[FormulaEnumerator] = None) -> frozenset:
    enumerator = enumerator or FormulaEnumerator(structure.signature)
    variables = canonical_variables(sorts)
    table = extension_table(structure, variables)
    return frozenset(f for f in enumerator.positive(variables, depth) if table.holds(f, row))


def joint_continuation(first: FiniteStructure, second: FiniteStructure, universe: UniverseClass,
                       first_row: Row, second_row: Row, sorts: Optional[Sequence[str]] = None,
                       depth: Optional[int] = None) -> Optional[JointContinuation]:
    """Find P in the class with f: first -> P, g: second -> P and f(a) = g(b).

    Returns None, with a class-adequacy warning, when the class holds no such
    amalgam.
    """
    if len(first_row) != len(second_row):
        raise PreconditionError("Tuples of different lengths have no joint continuation")
    if sorts is None:
        default = first.signature.default_sort
        if default is None:
            raise PreconditionError("Sorts are required for tuples in a multi-sorted signature")
        sorts = (default,) * len(first_row)
    sorts = tuple(sorts)
    for sort, a, b in zip(sorts, first_row, second_row):
        if a not in first.carriers[sort] or b not in second.carriers[sort]:
            raise PreconditionError(f"Tuples are not both of sorting {sorts}")
    depth = settings.POSLOG_DEPTH if depth is None else depth
    enumerator = FormulaEnumerator(first.signature)
    if (positive_profile(first, first_row, sorts, depth, enumerator)
            != positive_profile(second, second_row, sorts, depth, enumerator)):
        raise PreconditionError(
            f"Tuples have different positive types at depth {depth}; no joint continuation "
            f"is guaranteed"
        )
    for target in universe.members:
        for left in iter_homomorphisms(first, target):
            fixed: Dict[str, Dict[str, str]] = {s: {} for s in second.signature.sorts}
            consistent = True
            for sort, a, b in zip(sorts, first_row, second_row):
                image = left(sort, a)
                if fixed[sort].get(b, image) != image:
                    consistent = False
                    break
                fixed[sort][b] = image
            if not consistent:
                continue
            right = next(iter_homomorphisms(second, target, fixed), None)
            if right is not None:
                return JointContinuation(target, left, right)
    logger.warning(
        f"No joint continuation of {first.name} and {second.name} in {universe.name}; "
        f"the class is not adequate for this pair"
    )
    return None


def compose_chain(chain: Sequence[Homomorphism]) -> Homomorphism:
    if not chain:
        raise HomomorphismError("Empty chain")
    composite = chain[0]
    for hom in chain[1:]:
        if hom.source is not composite.target:
            raise HomomorphismError(
                f"Chain is not composable at {composite.target.name} / {hom.source.name}"
            )
        composite = composite.compose(hom)
    return composite


def directed_colimit(chain: Sequence[Homomorphism]) -> FiniteStructure:
    """Colimit of a finite composable chain: its final structure."""
    return compose_chain(chain).target


def chain_members(chain: Sequence[Homomorphism]) -> List[FiniteStructure]:
    compose_chain(chain)
    return [chain[0].source] + [h.target for h in chain]
