# services/type_spaces.py
"""Bounded positive type spaces relative to a universe class.

A point of a space is the set of positive formulas of depth at most d that a
tuple of a pec member satisfies. Points are numbered in order of first
realization (class order, then tuple order).
"""
import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import networkx as nx

from poslog.config import settings
from poslog.exceptions import (
    EmptyPositiveClassError,
    IndistinguishableAtDepthError,
    NotConstructibleError,
    PreconditionError,
)
from poslog.logic.enumeration import FormulaEnumerator
from poslog.logic.fragments import is_constructible, is_positive
from poslog.logic.syntax import (
    And,
    Exists,
    Formula,
    Implies,
    Not,
    Or,
    Var,
    canonical_variables,
)
from poslog.logic.transform import canonicalize, formula_order
from poslog.semantics.closedness import pec_members
from poslog.semantics.structures import FiniteStructure, Row, UniverseClass
from poslog.semantics.tables import ClassTable, extension_table

logger = logging.getLogger(__name__)

Realization = Tuple[FiniteStructure, Row]
COVERED = "covered"
UNCOVERED = "uncovered at this depth"


@dataclass(frozen=True)
class BoundedPositiveType:
    variables: Tuple[Var, ...]
    depth: int
    formulas: FrozenSet[Formula]
    structure: Optional[FiniteStructure] = field(default=None, compare=False)
    row: Optional[Row] = field(default=None, compare=False)

    def __contains__(self, f: Formula) -> bool:
        return canonicalize(f) in self.formulas

    @property
    def ordered(self) -> Tuple[Formula, ...]:
        return tuple(sorted(self.formulas, key=formula_order))

    @property
    def provenance(self) -> str:
        if self.structure is None:
            return "?"
        return f"{self.structure.name}{tuple(self.row)}"

    def __repr__(self):
        return f"BoundedPositiveType({self.provenance}, {len(self.formulas)} formulas)"


def tp_pos(structure: FiniteStructure, row: Row, depth: int,
           sorts: Optional[Sequence[str]] = None,
           enumerator: Optional[FormulaEnumerator] = None) -> BoundedPositiveType:
    """Positive formulas of depth at most ``depth`` true of the tuple.

    Raises:
        ResourceCeilingError: when the positive supply is too large
    """
    row = tuple(row)
    if sorts is None:
        default = structure.signature.default_sort
        if default is None:
            raise PreconditionError("Sorts are required for tuples in a multi-sorted signature")
        sorts = (default,) * len(row)
    variables = canonical_variables(sorts)
    enumerator = enumerator or FormulaEnumerator(structure.signature)
    table = extension_table(structure, variables)
    supply = enumerator.positive(variables, depth)
    formulas = frozenset(f for f in supply if table.holds(f, row))
    return BoundedPositiveType(variables, depth, formulas, structure, row)


class BoundedTypeSpace:
    """Points, basic sets and realizations of one bounded type space."""

    def __init__(self, universe: UniverseClass, variables: Sequence[Var], depth: int,
                 supply: Sequence[Formula], types: Sequence[BoundedPositiveType],
                 realizations: Dict[int, List[Realization]], theory=None,
                 enumerator: Optional[FormulaEnumerator] = None):
        self.universe = universe
        self.theory = theory
        self.variables = tuple(variables)
        self.depth = depth
        self.supply = tuple(supply)
        self._supply_set = frozenset(self.supply)
        self.types = tuple(types)
        self.realizations = realizations
        self.enumerator = enumerator or FormulaEnumerator(universe.signature)
        self.logger = logging.getLogger(__name__)
        self._index = {t.formulas: i for i, t in enumerate(self.types)}
        self._basic: Dict[Formula, FrozenSet[int]] = {}
        self._resultants: Dict[Tuple[Formula, int], "ResultantSet"] = {}

    @property
    def whole(self) -> FrozenSet[int]:
        return frozenset(range(len(self.types)))

    @property
    def sorts(self) -> Tuple[str, ...]:
        return tuple(v.sort for v in self.variables)

    def __len__(self):
        return len(self.types)

    def index_of(self, formulas: FrozenSet[Formula]) -> Optional[int]:
        return self._index.get(formulas)

    def locate(self, structure: FiniteStructure, row: Row) -> Optional[int]:
        """Point of the type of a tuple, or None when that type is not in the space."""
        tp = tp_pos(structure, row, self.depth, self.sorts, self.enumerator)
        return self._index.get(tp.formulas)

    def holds_at(self, f: Formula, point: int, realization: Optional[Realization] = None) -> bool:
        structure, row = realization or self.realizations[point][0]
        return extension_table(structure, self.variables).holds(f, row)

    def basic_set(self, f: Formula) -> FrozenSet[int]:
        """[f]: points whose types contain f.

        Formulas outside the supply are decided at the first realization of
        each point.
        """
        f = canonicalize(f)
        cached = self._basic.get(f)
        if cached is not None:
            return cached
        if not f.free_set <= set(self.variables):
            raise PreconditionError(f"{f!r} has free variables outside the space")
        if f in self._supply_set:
            points = frozenset(i for i, t in enumerate(self.types) if f in t.formulas)
        else:
            points = frozenset(i for i in range(len(self.types)) if self.holds_at(f, i))
        self._basic[f] = points
        return points

    def resultant(self, f: Formula) -> "ResultantSet":
        key = (canonicalize(f), self.depth)
        if key not in self._resultants:
            self._resultants[key] = resultant(self.universe, f, self.depth, self.variables,
                                              self.enumerator)
        return self._resultants[key]

    def describe(self, point: int) -> str:
        return self.types[point].provenance

    def __repr__(self):
        names = ",".join(v.name for v in self.variables)
        return (f"BoundedTypeSpace({self.universe.name}, ({names}), depth {self.depth}, "
                f"{len(self.types)} types)")


def _member_types(member: FiniteStructure, variables, depth, supply):
    table = extension_table(member, variables)
    masks = [table.extension(f) for f in supply]
    found = []
    for i, row in enumerate(table.rows):
        formulas = frozenset(f for f, m in zip(supply, masks) if (m >> i) & 1)
        found.append((row, formulas))
    return found


def type_space(universe: UniverseClass, variables: Sequence[Var], depth: int, theory=None,
               enumerator: Optional[FormulaEnumerator] = None) -> BoundedTypeSpace:
    """Every bounded positive type realized in a pec member of the class.

    Raises:
        EmptyPositiveClassError: when the class has no pec member
        PreconditionError: when the class is attached to a different theory
    """
    variables = tuple(variables)
    if theory is not None and universe.theory is not None and universe.theory.name != theory.name:
        raise PreconditionError(f"Class {universe.name} is attached to {universe.theory.name}, "
                                f"not {theory.name}")
    members = pec_members(universe)
    if not members:
        raise EmptyPositiveClassError(f"Class {universe.name} has no pec member")
    enumerator = enumerator or FormulaEnumerator(universe.signature)
    supply = enumerator.positive(variables, depth)
    with ThreadPoolExecutor(max_workers=settings.MAX_WORKERS) as executor:
        per_member = list(executor.map(
            lambda m: _member_types(m, variables, depth, supply), members))
    types: List[BoundedPositiveType] = []
    index: Dict[FrozenSet[Formula], int] = {}
    realizations: Dict[int, List[Realization]] = {}
    for member, found in zip(members, per_member):
        for row, formulas in found:
            point = index.get(formulas)
            if point is None:
                point = len(types)
                index[formulas] = point
                types.append(BoundedPositiveType(variables, depth, formulas, member, row))
                realizations[point] = []
            realizations[point].append((member, row))
    space = BoundedTypeSpace(universe, variables, depth, supply, types, realizations, theory,
                             enumerator)
    logger.info(f"Built {space!r} from {len(members)} pec members")
    return space


@dataclass(frozen=True)
class ResultantSet:
    formula: Formula
    depth: int
    variables: Tuple[Var, ...]
    formulas: Tuple[Formula, ...]

    def __contains__(self, f: Formula) -> bool:
        return canonicalize(f) in set(self.formulas)

    def __iter__(self):
        return iter(self.formulas)

    def __len__(self):
        return len(self.formulas)


def _context(f: Formula, variables: Optional[Sequence[Var]]) -> Tuple[Var, ...]:
    if variables is None:
        return f.free_vars
    variables = tuple(variables)
    if not f.free_set <= set(variables):
        raise PreconditionError(f"{f!r} has free variables outside the context")
    return variables


def resultant(universe: UniverseClass, f: Formula, depth: int,
              variables: Optional[Sequence[Var]] = None,
              enumerator: Optional[FormulaEnumerator] = None) -> ResultantSet:
    """Positive ψ of depth at most d such that no member of the class realizes f ∧ ψ.

    Every member counts, pec or not.
    """
    if not is_positive(f):
        raise PreconditionError(f"Resultants are taken of positive formulas, not {f!r}")
    variables = _context(f, variables)
    enumerator = enumerator or FormulaEnumerator(universe.signature)
    table = ClassTable(universe, variables)
    base = table.extension(f)
    found = tuple(
        psi for psi in enumerator.positive(variables, depth) if not (base & table.extension(psi))
    )
    return ResultantSet(canonicalize(f), depth, variables, found)


def realizable(universe: UniverseClass, variables: Sequence[Var], formulas: Iterable[Formula]):
    table = ClassTable(universe, variables)
    return [f for f in formulas if table.realized(f)]


@dataclass(frozen=True)
class CoverReport:
    formula: Formula
    complement: FrozenSet[int]
    union: FrozenSet[int]
    status: str
    uncovered: FrozenSet[int] = frozenset()
    overlap: FrozenSet[int] = frozenset()

    @property
    def covered(self) -> bool:
        return self.status == COVERED


def spectral_complement_cover(f: Formula, space: BoundedTypeSpace) -> CoverReport:
    """Compare the complement of [f] with the union of [ψ] over the bounded resultant."""
    complement = space.whole - space.basic_set(f)
    union = frozenset()
    for psi in space.resultant(f):
        union |= space.basic_set(psi)
    overlap = union - complement
    if overlap:
        logger.error(f"Resultant of {f!r} meets [{f!r}] at points {sorted(overlap)}")
    uncovered = complement - union
    status = COVERED if not uncovered else UNCOVERED
    if uncovered:
        logger.debug(f"Complement of [{f!r}] leaves {len(uncovered)} points uncovered "
                     f"at depth {space.depth}")
    return CoverReport(canonicalize(f), complement, union, status, uncovered, overlap)


@dataclass(frozen=True)
class HausdorffWitness:
    formula: Formula
    in_first: bool


def hausdorff_witness(p: BoundedPositiveType, q: BoundedPositiveType) -> HausdorffWitness:
    """Minimal positive formula in exactly one of the two types.

    Raises:
        IndistinguishableAtDepthError: when the types are equal
    """
    if p.variables != q.variables:
        raise PreconditionError("Types are over different variable tuples")
    difference = p.formulas ^ q.formulas
    if not difference:
        raise IndistinguishableAtDepthError(
            f"Types of {p.provenance} and {q.provenance} coincide at depth {p.depth}"
        )
    witness = min(difference, key=formula_order)
    return HausdorffWitness(witness, witness in p.formulas)


@dataclass(frozen=True)
class PmcReport:
    depth: int
    assignment: Dict[Formula, Formula]
    failures: Tuple[Formula, ...]

    @property
    def total(self) -> bool:
        return not self.failures


def pmc_check(space: BoundedTypeSpace, formulas: Optional[Iterable[Formula]] = None) -> PmcReport:
    """Search a single positive complement for every supply formula.

    ψ complements φ when [ψ] is the complement of [φ] and no member of the
    class realizes φ ∧ ψ. The first ψ in formula order is kept.
    """
    table = ClassTable(space.universe, space.variables)
    assignment: Dict[Formula, Formula] = {}
    failures = []
    candidates = space.supply
    for phi in (formulas if formulas is not None else space.supply):
        phi = canonicalize(phi)
        target = space.whole - space.basic_set(phi)
        base = table.extension(phi)
        found = next((psi for psi in candidates
                      if space.basic_set(psi) == target and not (base & table.extension(psi))),
                     None)
        if found is None:
            failures.append(phi)
        else:
            assignment[phi] = found
    logger.info(f"pmc at depth {space.depth}: {len(assignment)} complemented, "
                f"{len(failures)} without a single complement")
    return PmcReport(space.depth, assignment, tuple(failures))


@dataclass(frozen=True)
class ConstructibleSet:
    formula: Formula
    extension: FrozenSet[int]
    disagreements: FrozenSet[int] = frozenset()

    @property
    def well_defined(self) -> bool:
        return not self.disagreements


def constructible_eval(chi: Formula, space: BoundedTypeSpace) -> ConstructibleSet:
    """Points whose pec realizations satisfy χ.

    Realizations of one point that disagree on χ are reported as a depth
    shortfall; the first realization decides membership.

    Raises:
        NotConstructibleError: when χ is not a Boolean combination of positive formulas
    """
    if not is_constructible(chi):
        raise NotConstructibleError(f"{chi!r} is not constructible")
    chi = canonicalize(chi)
    points, disagreements = set(), set()
    for point in range(len(space.types)):
        values = {space.holds_at(chi, point, r) for r in space.realizations[point]}
        if len(values) > 1:
            disagreements.add(point)
        if space.holds_at(chi, point):
            points.add(point)
    if disagreements:
        logger.warning(f"Realizations disagree on {chi!r} at {len(disagreements)} points; "
                       f"depth {space.depth} is too small to decide it")
    return ConstructibleSet(chi, frozenset(points), frozenset(disagreements))


def induction_case(chi: Formula) -> str:
    if is_positive(chi):
        return "atomic"
    if isinstance(chi, Not):
        return "not"
    if isinstance(chi, (Or, Implies)):
        return "or"
    if isinstance(chi, And):
        return "and"
    return "other"


@dataclass(frozen=True)
class ConstructibleResultant:
    formula: Formula
    depth: int
    case: str
    formulas: Tuple[Formula, ...]
    status: str
    uncovered: FrozenSet[int] = frozenset()

    def __contains__(self, f: Formula) -> bool:
        return canonicalize(f) in set(self.formulas)


def constructible_resultant(chi: Formula, space: BoundedTypeSpace,
                            depth: Optional[int] = None) -> ConstructibleResultant:
    """Constructible θ of depth at most d whose extension misses χ on every pec member.

    The complement of [χ] is then compared with the union of the [θ].
    """
    if not is_constructible(chi):
        raise NotConstructibleError(f"{chi!r} is not constructible")
    chi = canonicalize(chi)
    depth = space.depth if depth is None else depth
    members = pec_members(space.universe)
    tables = [extension_table(m, space.variables) for m in members]
    bases = [t.extension(chi) for t in tables]
    found = []
    for theta in space.enumerator.constructible(space.variables, depth):
        if all(not (base & table.extension(theta)) for base, table in zip(bases, tables)):
            found.append(theta)
    complement = space.whole - constructible_eval(chi, space).extension
    union = set()
    for theta in found:
        union |= {p for p in range(len(space.types)) if space.holds_at(theta, p)}
    uncovered = frozenset(complement - union)
    status = COVERED if not uncovered else UNCOVERED
    return ConstructibleResultant(chi, depth, induction_case(chi), tuple(found), status,
                                  uncovered)


@dataclass(frozen=True)
class AlgebraFailure:
    connective: str
    left: Formula
    right: Formula


def basic_set_algebra(space: BoundedTypeSpace,
                      formulas: Optional[Sequence[Formula]] = None) -> List[AlgebraFailure]:
    """Check [φ∧ψ] = [φ]∩[ψ] and [φ∨ψ] = [φ]∪[ψ] over pairs of supply formulas.

    Only combinations that are themselves supply formulas are compared, so
    both sides are read off the types.
    """
    failures = []
    pool = tuple(formulas if formulas is not None else space.supply)
    supply = set(space.supply)
    for left, right in itertools.combinations(pool, 2):
        first, second = space.basic_set(left), space.basic_set(right)
        conjoined, disjoined = canonicalize(And((left, right))), canonicalize(Or((left, right)))
        if conjoined in supply and space.basic_set(conjoined) != first & second:
            failures.append(AlgebraFailure("and", left, right))
        if disjoined in supply and space.basic_set(disjoined) != first | second:
            failures.append(AlgebraFailure("or", left, right))
    return failures


@dataclass(frozen=True)
class ProjectionFailure:
    formula: Formula
    image: FrozenSet[int]
    expected: FrozenSet[int]


def restriction(space: BoundedTypeSpace, smaller: BoundedTypeSpace, point: int) -> Optional[int]:
    structure, row = space.realizations[point][0]
    return smaller.locate(structure, row[:len(smaller.variables)])


def projection_check(space: BoundedTypeSpace, smaller: BoundedTypeSpace,
                     formulas: Optional[Iterable[Formula]] = None) -> List[ProjectionFailure]:
    """Check that restricting the points of [φ(x,y)] gives [∃y φ] in the smaller space."""
    if space.variables[:-1] != smaller.variables or space.depth != smaller.depth:
        raise PreconditionError("Projection needs spaces over (x,y) and x at one depth")
    last = space.variables[-1]
    failures = []
    projected = {p: restriction(space, smaller, p) for p in range(len(space.types))}
    for phi in (formulas if formulas is not None else space.supply):
        image = frozenset(projected[p] for p in space.basic_set(phi) if projected[p] is not None)
        expected = smaller.basic_set(Exists(last, phi) if last in phi.free_set else phi)
        if image != expected:
            failures.append(ProjectionFailure(phi, image, expected))
    return failures


def specialization_graph(space: BoundedTypeSpace) -> nx.DiGraph:
    """Inclusion order on the points, as its transitive reduction."""
    graph = nx.DiGraph()
    for i, t in enumerate(space.types):
        graph.add_node(i, label=space.describe(i), size=len(t.formulas))
    for (i, p), (j, q) in itertools.permutations(enumerate(space.types), 2):
        if p.formulas < q.formulas:
            graph.add_edge(i, j)
    reduced = nx.transitive_reduction(graph)
    reduced.add_nodes_from(graph.nodes(data=True))
    return reduced


def nested_points(space: BoundedTypeSpace) -> List[Tuple[int, int]]:
    """Pairs of points whose types are strictly nested, a bounded-depth artifact."""
    return sorted(specialization_graph(space).edges())
