# services/forcing.py
"""Existential forcing, existential members, genericity and back-and-forth systems.

Forcing is read off a bounded type space: a tuple forces f when every point
extending its bounded positive type lies in [f]. Points of non-positive
formulas are computed through a designated existential member of the class.
"""
import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Sequence, Set, Tuple, Union

from poslog.config import settings
from poslog.exceptions import NoExistentialMemberError, PreconditionError, UniverseClassError
from poslog.logic.enumeration import FormulaEnumerator
from poslog.logic.syntax import (
    And,
    Exists,
    Forall,
    Formula,
    Implies,
    Not,
    Or,
    Var,
    canonical_variables,
    conjunction,
)
from poslog.logic.transform import canonicalize, formula_order
from poslog.semantics.closedness import pec_members
from poslog.semantics.homomorphisms import Homomorphism, iter_homomorphisms
from poslog.semantics.structures import Element, FiniteStructure, Row, UniverseClass
from poslog.semantics.tables import extension_table
from poslog.services.geometric import semantic_set
from poslog.services.type_spaces import BoundedTypeSpace, tp_pos, type_space

logger = logging.getLogger(__name__)

FORTH = "forth"
BACK = "back"
TYPE = "type"


def _sort_patterns(structure: FiniteStructure, length: int) -> List[Tuple[str, ...]]:
    """Sort tuples of the given length: the one default tuple, or every tuple over the sorts."""
    default = structure.signature.default_sort
    if default is not None:
        return [(default,) * length]
    return list(itertools.product(structure.signature.sorts, repeat=length))


def _row_sorts(structure: FiniteStructure, row: Row) -> Tuple[str, ...]:
    """Sorts of a tuple read off the carriers; each element must lie in exactly one carrier."""
    default = structure.signature.default_sort
    if default is not None:
        return (default,) * len(row)
    sorts = []
    for element in row:
        owners = [s for s in structure.signature.sorts if element in structure.carriers[s]]
        if len(owners) != 1:
            raise PreconditionError(f"Cannot read the sort of {element!r} in {structure.name}; "
                                    f"pass the sorts explicitly")
        sorts.append(owners[0])
    return tuple(sorts)


def connective(f: Formula) -> str:
    """Top connective of a formula, with every atomic formula reported as 'atomic'."""
    if isinstance(f, (And, Or, Not, Implies, Exists, Forall)):
        return type(f).__name__.lower()
    return "atomic"


# --- existential members ---

@dataclass(frozen=True)
class ExistentialCounterexample:
    formulas: Tuple[Formula, ...]
    parameters: Row
    target: FiniteStructure
    hom: Homomorphism
    realization: Row

    @property
    def partial_type(self) -> Formula:
        return canonicalize(conjunction(self.formulas))


@dataclass(frozen=True)
class ExistentialVerdict:
    structure: FiniteStructure
    depth: int
    holds: bool
    counterexample: Optional[ExistentialCounterexample] = None


def _profiles(table, masks: Sequence[int], rows: Sequence[Row]) -> List[int]:
    result = []
    for row in rows:
        i = table.row_index(row)
        profile = 0
        for bit, mask in enumerate(masks):
            if (mask >> i) & 1:
                profile |= 1 << bit
        result.append(profile)
    return result


def _minimal_unrealized(profile: int, realized: Sequence[int], supply: Sequence[Formula],
                        limit: int = 3) -> Tuple[Formula, ...]:
    bits = [bit for bit in range(len(supply)) if (profile >> bit) & 1]
    bits.sort(key=lambda b: formula_order(supply[b]))
    for size in range(1, min(limit, len(bits)) + 1):
        for group in itertools.combinations(bits, size):
            mask = sum(1 << b for b in group)
            if not any((mask & r) == mask for r in realized):
                return tuple(supply[b] for b in group)
    return tuple(supply[b] for b in bits)


def is_existential(structure: FiniteStructure, universe: UniverseClass, depth: int,
                   x_length: int = 1, parameter_length: int = 2,
                   x_sorts: Optional[Sequence[str]] = None,
                   y_sorts: Optional[Sequence[str]] = None) -> ExistentialVerdict:
    """Decide whether every partial positive type over parameters of the structure
    that some continuation realizes is already realized in the structure.

    Partial types range over subsets of the depth-bounded positive supply in
    (x̄, ȳ). Only profiles actually realized in continuations are examined.
    Without explicit sorts, a multi-sorted signature is checked for every
    sort pattern of the given lengths.

    Raises:
        UniverseClassError: if the structure is not a member of the class
    """
    if structure not in universe:
        raise UniverseClassError(f"{structure.name} is not a member of class {universe.name}")
    x_patterns = [tuple(x_sorts)] if x_sorts is not None else _sort_patterns(structure, x_length)
    y_patterns = ([tuple(y_sorts)] if y_sorts is not None
                  else _sort_patterns(structure, parameter_length))
    continuations = [(target, hom) for target in universe.members
                     for hom in iter_homomorphisms(structure, target)]
    for xs, ys in itertools.product(x_patterns, y_patterns):
        witness = _unrealized_profile(structure, continuations, depth, xs, ys)
        if witness is not None:
            logger.debug(f"{structure.name} is not existential in {universe.name}: "
                         f"{witness.partial_type!r} over {witness.parameters} realized in "
                         f"{witness.target.name}")
            return ExistentialVerdict(structure, depth, False, witness)
    return ExistentialVerdict(structure, depth, True)


def _unrealized_profile(structure: FiniteStructure, continuations, depth: int,
                        x_sorts: Tuple[str, ...],
                        y_sorts: Tuple[str, ...]) -> Optional[ExistentialCounterexample]:
    variables = canonical_variables(x_sorts + y_sorts)
    supply = FormulaEnumerator(structure.signature).positive(variables, depth)
    own_table = extension_table(structure, variables)
    own_masks = [own_table.extension(f) for f in supply]
    tables = {}
    for target, _ in continuations:
        if target.name not in tables:
            table = extension_table(target, variables)
            tables[target.name] = (table, [table.extension(f) for f in supply])
    x_length = len(x_sorts)
    for parameters in structure.tuples(y_sorts):
        own_rows = [tuple(a) + tuple(parameters) for a in structure.tuples(x_sorts)]
        realized = _profiles(own_table, own_masks, own_rows)
        for target, hom in continuations:
            table, masks = tables[target.name]
            image = hom.apply(y_sorts, parameters)
            rows = [tuple(c) + tuple(image) for c in target.tuples(x_sorts)]
            for row, profile in zip(rows, _profiles(table, masks, rows)):
                if any((profile & r) == profile for r in realized):
                    continue
                formulas = _minimal_unrealized(profile, realized, supply)
                return ExistentialCounterexample(formulas, tuple(parameters), target, hom,
                                                 row[:x_length])
    return None


def existential_members(universe: UniverseClass, depth: int) -> Tuple[FiniteStructure, ...]:
    return tuple(m for m in pec_members(universe) if is_existential(m, universe, depth).holds)


# --- forcing ---

class ForcingContext:
    """Type space and designated existential member shared by forcing checks."""

    def __init__(self, theory, universe: UniverseClass, variables: Sequence[Var], depth: int,
                 existential_member: Union[str, FiniteStructure, None] = None,
                 existential_depth: Optional[int] = None,
                 enumerator: Optional[FormulaEnumerator] = None):
        self.theory = theory
        self.universe = universe
        self.variables = tuple(variables)
        self.depth = depth
        self.existential_depth = (existential_depth if existential_depth is not None
                                  else settings.POSLOG_DEPTH)
        self.enumerator = enumerator or FormulaEnumerator(universe.signature)
        self.logger = logging.getLogger(__name__)
        if isinstance(existential_member, str):
            existential_member = universe.member(existential_member)
        self._existential = existential_member
        self._searched = existential_member is not None
        self._space: Optional[BoundedTypeSpace] = None
        self._extensions: Dict[Tuple[int, Row], FrozenSet[int]] = {}
        self._points: Dict[Formula, FrozenSet[int]] = {}

    @property
    def space(self) -> BoundedTypeSpace:
        if self._space is None:
            self._space = type_space(self.universe, self.variables, self.depth, self.theory,
                                     self.enumerator)
        return self._space

    @property
    def existential(self) -> Optional[FiniteStructure]:
        """The designated existential member; the first one found when none was named."""
        if not self._searched:
            self._searched = True
            found = existential_members(self.universe, self.existential_depth)
            self._existential = found[0] if found else None
            if self._existential is not None:
                self.logger.info(f"Designated {self._existential.name} as the existential "
                                 f"member of {self.universe.name}")
        return self._existential

    def at_depth(self, depth: int) -> "ForcingContext":
        if depth == self.depth:
            return self
        return ForcingContext(self.theory, self.universe, self.variables, depth,
                              self._existential, self.existential_depth,
                              enumerator=self.enumerator)

    def extensions(self, structure: FiniteStructure, row: Row) -> FrozenSet[int]:
        """Points whose types contain the bounded positive type of the tuple."""
        row = tuple(row)
        if len(row) != len(self.variables):
            raise PreconditionError(f"Tuple {row} does not match the context variables")
        key = (id(structure), row)
        cached = self._extensions.get(key)
        if cached is None:
            space = self.space
            base = tp_pos(structure, row, self.depth, space.sorts, self.enumerator).formulas
            cached = frozenset(p for p, t in enumerate(space.types) if base <= t.formulas)
            if not cached:
                self.logger.warning(f"Type of {structure.name}{row} has no extension in "
                                    f"{space!r}; every formula is forced there")
            self._extensions[key] = cached
        return cached

    def points(self, f: Formula) -> FrozenSet[int]:
        f = canonicalize(f)
        cached = self._points.get(f)
        if cached is None:
            try:
                cached = semantic_set(f, self.space, None)
            except NoExistentialMemberError:
                member = self.existential
                if member is None:
                    raise NoExistentialMemberError(
                        f"{self.universe.name} has no existential member at depth "
                        f"{self.existential_depth}; cannot force {f!r}"
                    )
                cached = semantic_set(f, self.space, member)
            self._points[f] = cached
        return cached

    def __repr__(self):
        return (f"ForcingContext({self.universe.name}, {len(self.variables)} variables, "
                f"depth {self.depth})")


def forces(structure: FiniteStructure, f: Formula, row: Row, ctx: ForcingContext) -> bool:
    """True iff every point extending the type of the tuple lies in [f]."""
    if not canonicalize(f).free_set <= set(ctx.variables):
        raise PreconditionError(f"{f!r} has free variables outside the forcing context")
    return ctx.extensions(structure, row) <= ctx.points(f)


@dataclass
class GenericityReport:
    structure: FiniteStructure
    depth: int
    checked: Dict[str, int] = field(default_factory=dict)
    failed: Dict[str, int] = field(default_factory=dict)
    first_failure: Optional[Tuple[Formula, Row]] = None

    @property
    def holds(self) -> bool:
        return self.first_failure is None

    def record(self, f: Formula, row: Row, agree: bool):
        case = connective(f)
        self.checked[case] = self.checked.get(case, 0) + 1
        if not agree:
            self.failed[case] = self.failed.get(case, 0) + 1
            if self.first_failure is None:
                self.first_failure = (f, tuple(row))


def is_generic(structure: FiniteStructure, ctx: ForcingContext,
               depth: Optional[int] = None) -> GenericityReport:
    """Compare satisfaction with forcing for every first-order supply formula and tuple.

    Counts are kept per top connective so that a failing quantifier step is
    visible next to passing atomic and Boolean steps.
    """
    if structure not in ctx.universe:
        raise UniverseClassError(f"{structure.name} is not a member of class {ctx.universe.name}")
    ctx = ctx.at_depth(depth if depth is not None else ctx.depth)
    table = extension_table(structure, ctx.variables)
    report = GenericityReport(structure, ctx.depth)
    for f in ctx.enumerator.first_order(ctx.variables, ctx.depth):
        mask = table.extension(f)
        for i, row in enumerate(table.rows):
            report.record(f, row, bool((mask >> i) & 1) == forces(structure, f, row, ctx))
    if report.holds:
        ctx.logger.debug(f"{structure.name} is generic at depth {ctx.depth}")
    else:
        f, row = report.first_failure
        ctx.logger.debug(f"{structure.name} is not generic: satisfaction and forcing differ "
                         f"on {f!r} at {row}")
    return report


@dataclass(frozen=True)
class StabilityFailure:
    hom: Homomorphism
    formula: Formula
    row: Row


def stability_check(ctx: ForcingContext, homs: Sequence[Homomorphism],
                    formulas: Optional[Sequence[Formula]] = None) -> Tuple[StabilityFailure, ...]:
    """Forcing is preserved along each homomorphism, formula by formula."""
    formulas = formulas if formulas is not None else ctx.enumerator.first_order(ctx.variables,
                                                                               ctx.depth)
    sorts = ctx.space.sorts
    failures = []
    for hom in homs:
        for row in hom.source.tuples(sorts):
            image = hom.apply(sorts, row)
            for f in formulas:
                if forces(hom.source, f, row, ctx) and not forces(hom.target, f, image, ctx):
                    failures.append(StabilityFailure(hom, f, tuple(row)))
    return tuple(failures)


@dataclass(frozen=True)
class PecteReport:
    structure: FiniteStructure
    undecided: Tuple[Tuple[Formula, Row], ...]
    contradictory: Tuple[Tuple[Formula, Row], ...]
    checked: int

    @property
    def total(self) -> bool:
        return not self.undecided

    @property
    def consistent(self) -> bool:
        return not self.contradictory


def pecte_check(structure: FiniteStructure, ctx: ForcingContext,
                formulas: Optional[Sequence[Formula]] = None) -> PecteReport:
    """Each tuple of the structure forces f or ¬f, and never both."""
    formulas = formulas if formulas is not None else ctx.enumerator.first_order(ctx.variables,
                                                                               ctx.depth)
    undecided, contradictory = [], []
    checked = 0
    for row in structure.tuples(ctx.space.sorts):
        for f in formulas:
            positive_side = forces(structure, f, row, ctx)
            negative_side = forces(structure, Not(f), row, ctx)
            checked += 1
            if positive_side and negative_side:
                contradictory.append((f, tuple(row)))
            elif not (positive_side or negative_side):
                undecided.append((f, tuple(row)))
    if undecided:
        logger.info(f"{structure.name} leaves {len(undecided)} formula instances undecided "
                    f"at depth {ctx.depth}")
    return PecteReport(structure, tuple(undecided), tuple(contradictory), checked)


# --- back-and-forth ---

SortedTuple = Tuple[Tuple[str, Element], ...]
Pair = Tuple[SortedTuple, SortedTuple]


@dataclass(frozen=True)
class BackAndForthFailure:
    pair: Pair
    element: Optional[Tuple[str, Element]]
    direction: str


@dataclass(frozen=True)
class BackAndForthSystem:
    """Pairs of same-sorted tuples with equal bounded positive types that
    survive the extension game up to ``length`` elements."""

    first: FiniteStructure
    second: FiniteStructure
    depth: int
    length: int
    levels: Tuple[FrozenSet[Pair], ...]
    failure: Optional[BackAndForthFailure] = None

    @property
    def holds(self) -> bool:
        return ((), ()) in self.levels[0]

    def __contains__(self, pair) -> bool:
        a, b = pair
        return len(a) < len(self.levels) and (tuple(a), tuple(b)) in self.levels[len(a)]

    def pairs(self) -> int:
        return sum(len(level) for level in self.levels)


def _elements(structure: FiniteStructure) -> List[Tuple[str, Element]]:
    return [(sort, e) for sort in structure.signature.sorts for e in structure.carriers[sort]]


def _sorted_tuples(structure: FiniteStructure, length: int) -> List[SortedTuple]:
    return list(itertools.product(_elements(structure), repeat=length))


def _typed(structure: FiniteStructure, tuples: Sequence[SortedTuple], depth: int,
           enumerator: FormulaEnumerator) -> Dict[SortedTuple, Tuple]:
    found = {}
    for t in tuples:
        sorts = tuple(s for s, _ in t)
        row = tuple(e for _, e in t)
        found[t] = (sorts, tp_pos(structure, row, depth, sorts, enumerator).formulas)
    return found


def back_and_forth(first: FiniteStructure, second: FiniteStructure,
                   depth: int = 0, length: Optional[int] = None) -> BackAndForthSystem:
    """Largest back-and-forth system of equal-type tuple pairs up to ``length``.

    Level L keeps every equal-type pair of length L. Level k keeps the
    equal-type pairs of length k with the forth and back properties into
    level k+1. The structures are partially isomorphic in this bounded
    sense iff the empty pair survives.

    ``length`` defaults to max(|M|, |N|), which at depth 0 decides
    isomorphism. Pass |M|+|N| for the full game. On failure only
    the move refused at the empty pair is reported.
    """
    if first.signature != second.signature:
        raise PreconditionError(f"{first.name} and {second.name} have different signatures")
    enumerator = FormulaEnumerator(first.signature)
    first_elements, second_elements = _elements(first), _elements(second)
    if length is None:
        length = max(len(first_elements), len(second_elements))
    if length < 0:
        raise PreconditionError(f"Tuple length must be non-negative, got {length}")
    levels: List[FrozenSet[Pair]] = [frozenset()] * (length + 1)
    for k in range(length, -1, -1):
        left = _typed(first, _sorted_tuples(first, k), depth, enumerator)
        right = _typed(second, _sorted_tuples(second, k), depth, enumerator)
        by_type: Dict[Tuple, List[SortedTuple]] = {}
        for t, key in right.items():
            by_type.setdefault(key, []).append(t)
        kept: Set[Pair] = set()
        for a, key in left.items():
            for b in by_type.get(key, ()):
                if k == length or _extends(a, b, levels[k + 1], first_elements, second_elements):
                    kept.add((a, b))
        levels[k] = frozenset(kept)
    system_levels = tuple(levels)
    failure = None
    if ((), ()) not in system_levels[0]:
        failure = _root_failure(system_levels, first_elements, second_elements,
                                first, second, depth, enumerator)
        logger.debug(f"No back-and-forth system between {first.name} and {second.name}: "
                     f"{failure.direction} fails at {failure.element}")
    return BackAndForthSystem(first, second, depth, length, system_levels, failure)


def _forth_partner(a, b, element, nxt, candidates):
    return any((a + (element,), b + (c,)) in nxt for c in candidates if c[0] == element[0])


def _back_partner(a, b, element, nxt, candidates):
    return any((a + (c,), b + (element,)) in nxt for c in candidates if c[0] == element[0])


def _extends(a, b, nxt, first_elements, second_elements) -> bool:
    return (all(_forth_partner(a, b, m, nxt, second_elements) for m in first_elements)
            and all(_back_partner(a, b, n, nxt, first_elements) for n in second_elements))


def _root_failure(levels, first_elements, second_elements, first, second, depth,
                  enumerator) -> BackAndForthFailure:
    root = ((), ())
    empty_first = _typed(first, [()], depth, enumerator)[()]
    empty_second = _typed(second, [()], depth, enumerator)[()]
    if empty_first != empty_second:
        return BackAndForthFailure(root, None, TYPE)
    nxt = levels[1] if len(levels) > 1 else frozenset()
    for m in first_elements:
        if not _forth_partner((), (), m, nxt, second_elements):
            return BackAndForthFailure(root, m, FORTH)
    for n in second_elements:
        if not _back_partner((), (), n, nxt, first_elements):
            return BackAndForthFailure(root, n, BACK)
    return BackAndForthFailure(root, None, TYPE)


@dataclass(frozen=True)
class AgreementReport:
    first: FiniteStructure
    second: FiniteStructure
    first_row: Row
    second_row: Row
    depth: int
    checked: int
    disagreements: Tuple[Formula, ...]

    @property
    def agree(self) -> bool:
        return not self.disagreements


def infinitary_agreement(first: FiniteStructure, second: FiniteStructure, first_row: Row,
                         second_row: Row, depth: int,
                         system: Optional[BackAndForthSystem] = None,
                         sorts: Optional[Sequence[str]] = None) -> AgreementReport:
    """Agreement of the two tuples on every first-order supply formula of depth ≤ d.

    Raises:
        PreconditionError: unless the pair belongs to a back-and-forth system
    """
    first_row, second_row = tuple(first_row), tuple(second_row)
    if len(first_row) != len(second_row):
        raise PreconditionError("Tuples of different lengths cannot agree")
    sorts = tuple(sorts) if sorts is not None else _row_sorts(first, first_row)
    system = system if system is not None else back_and_forth(first, second)
    pair = (tuple(zip(sorts, first_row)), tuple(zip(sorts, second_row)))
    if not system.holds or pair not in system:
        raise PreconditionError(
            f"{first.name}{first_row} and {second.name}{second_row} are not paired by a "
            f"back-and-forth system"
        )
    variables = canonical_variables(sorts)
    enumerator = FormulaEnumerator(first.signature)
    first_table = extension_table(first, variables)
    second_table = extension_table(second, variables)
    formulas = enumerator.first_order(variables, depth)
    disagreements = tuple(
        f for f in formulas
        if first_table.holds(f, first_row) != second_table.holds(f, second_row)
    )
    if disagreements:
        logger.error(f"{first.name}{first_row} and {second.name}{second_row} disagree on "
                     f"{disagreements[0]!r} despite a back-and-forth system")
    return AgreementReport(first, second, first_row, second_row, depth, len(formulas),
                           disagreements)


@dataclass(frozen=True)
class PreservationReport:
    hom: Homomorphism
    depth: int
    checked: int
    failures: Tuple[Tuple[Formula, Row], ...]

    @property
    def elementary(self) -> bool:
        return not self.failures


def elementary_preservation(hom: Homomorphism, depth: int, length: int = 1,
                            sorts: Optional[Sequence[str]] = None) -> PreservationReport:
    """Check that a homomorphism preserves and reflects every first-order supply formula.

    Without explicit sorts every sort pattern of the given length is checked.
    """
    patterns = [tuple(sorts)] if sorts is not None else _sort_patterns(hom.source, length)
    enumerator = FormulaEnumerator(hom.source.signature)
    failures = []
    checked = 0
    for pattern in patterns:
        variables = canonical_variables(pattern)
        formulas = enumerator.first_order(variables, depth)
        source_table = extension_table(hom.source, variables)
        target_table = extension_table(hom.target, variables)
        for row in hom.source.tuples(pattern):
            image = hom.apply(pattern, row)
            for f in formulas:
                checked += 1
                if source_table.holds(f, row) != target_table.holds(f, image):
                    failures.append((f, tuple(row)))
    return PreservationReport(hom, depth, checked, tuple(failures))
