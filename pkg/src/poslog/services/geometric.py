# services/geometric.py
"""Geometric normal forms and geometric types over bounded type spaces."""
import itertools
import logging
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

from poslog.config import settings
from poslog.exceptions import (
    NoExistentialMemberError,
    NotGeometricError,
    PreconditionError,
    ResourceCeilingError,
)
from poslog.logic.fragments import (
    is_geometric,
    is_normal_geometric,
    is_positive,
    is_positive_primitive,
)
from poslog.logic.syntax import (
    FALSE,
    TRUE,
    And,
    Atom,
    Equals,
    Exists,
    Falsity,
    Formula,
    GeometricType,
    Or,
    Truth,
    Var,
    conjunction,
    disjunction,
    exists_all,
)
from poslog.logic.transform import canonicalize, formula_order, substitute
from poslog.semantics.closedness import pec_members
from poslog.semantics.structures import FiniteStructure, Row, UniverseClass
from poslog.semantics.tables import extension_table
from poslog.services.type_spaces import BoundedTypeSpace, realizable

logger = logging.getLogger(__name__)

# a positive-primitive disjunct: bound variables and a set of atoms
Disjunct = Tuple[Tuple[Var, ...], FrozenSet[Formula]]


@dataclass(frozen=True)
class NormalGeometricFormula:
    disjuncts: Tuple[Formula, ...]

    @property
    def formula(self) -> Formula:
        return canonicalize(disjunction(self.disjuncts))

    def __len__(self):
        return len(self.disjuncts)

    def __repr__(self):
        return f"NormalGeometricFormula({self.formula!r})"


def _variables(atoms: Iterable[Formula]) -> Set[Var]:
    found: Set[Var] = set()
    for atom in atoms:
        found |= atom.free_set
    return found


def _fresh(sort: str, avoid: Set[Var]) -> Var:
    index = 0
    while Var(sort, index) in avoid:
        index += 1
    return Var(sort, index)


def _rename_apart(disjunct: Disjunct, avoid: Set[Var], reserved: Set[Var]) -> Disjunct:
    bound, atoms = disjunct
    clashing = [var for var in bound if var in avoid]
    if not clashing:
        return disjunct
    taken = set(avoid) | reserved | _variables(atoms) | set(bound)
    binding = {}
    for var in clashing:
        new = _fresh(var.sort, taken)
        taken.add(new)
        binding[var] = new
    renamed = tuple(binding.get(var, var) for var in bound)
    return renamed, frozenset(substitute(a, binding) for a in atoms)


def _disjuncts(f: Formula, ceiling: int, reserved: Set[Var]) -> List[Disjunct]:
    if isinstance(f, Truth):
        return [((), frozenset())]
    if isinstance(f, Falsity):
        return []
    if isinstance(f, (Atom, Equals)):
        return [((), frozenset((f,)))]
    if isinstance(f, Or):
        result = []
        for child in f.children():
            result.extend(_disjuncts(child, ceiling, reserved))
            _check(result, ceiling)
        return result
    if isinstance(f, And):
        result = [((), frozenset())]
        for child in f.children():
            combined = []
            for left in result:
                for right in _disjuncts(child, ceiling, reserved):
                    right = _rename_apart(right, set(left[0]) | _variables(left[1]), reserved)
                    left_apart = _rename_apart(left, set(right[0]) | _variables(right[1]), reserved)
                    combined.append((left_apart[0] + right[0], left_apart[1] | right[1]))
                    _check(combined, ceiling)
            result = combined
        return result
    if isinstance(f, Exists):
        result = []
        for bound, atoms in _disjuncts(f.body, ceiling, reserved):
            if f.var in bound or f.var not in _variables(atoms):
                result.append((bound, atoms))
            else:
                result.append(((f.var,) + bound, atoms))
        return result
    raise NotGeometricError(f"{f!r} is not geometric")


def _all_variables(f: Formula) -> Set[Var]:
    found = set(f.free_set)
    if isinstance(f, Exists):
        found.add(f.var)
    for child in f.children():
        found |= _all_variables(child)
    return found


def _check(disjuncts, ceiling):
    if len(disjuncts) > ceiling:
        raise ResourceCeilingError(
            f"Normal form exceeded the disjunct ceiling {ceiling}"
        )


def dnf(f: Formula, ceiling: Optional[int] = None) -> NormalGeometricFormula:
    """Disjunction of positive-primitive formulas equivalent to a geometric formula.

    Conjunctions distribute over the disjunct sets of their children after
    renaming bound variables apart, existentials move into each disjunct and
    disjunctions take the union.

    Raises:
        NotGeometricError: on a formula outside the geometric fragment
        ResourceCeilingError: when the disjunct count passes the ceiling
    """
    if not is_geometric(f):
        raise NotGeometricError(f"{f!r} is not geometric")
    ceiling = ceiling if ceiling is not None else settings.POSLOG_DNF_CEILING
    found = set()
    canonical = canonicalize(f)
    for bound, atoms in _disjuncts(canonical, ceiling, _all_variables(canonical)):
        disjunct = canonicalize(exists_all(bound, conjunction(sorted(atoms, key=lambda a: a.key))))
        if isinstance(disjunct, Falsity):
            continue
        found.add(disjunct)
    if TRUE in found:
        found = {TRUE}
    return NormalGeometricFormula(tuple(sorted(found, key=formula_order)))


def normalize_type(gtype: GeometricType) -> GeometricType:
    return GeometricType(gtype.variables, frozenset(dnf(f).formula for f in gtype.formulas))


def extension(structure: FiniteStructure, gtype: GeometricType) -> int:
    """Bitmask of the tuples of the structure satisfying every member of the type."""
    table = extension_table(structure, gtype.variables)
    mask = table.full
    for f in gtype.formulas:
        mask &= table.extension(f)
    return mask


def extension_rows(structure: FiniteStructure, gtype: GeometricType) -> List[Row]:
    table = extension_table(structure, gtype.variables)
    mask = extension(structure, gtype)
    return [row for i, row in enumerate(table.rows) if (mask >> i) & 1]


def type_points(space: BoundedTypeSpace, gtype: GeometricType) -> FrozenSet[int]:
    """[π]: points of the space whose realizations satisfy every member."""
    points = space.whole
    for f in gtype.formulas:
        points &= space.basic_set(f)
    return points


# --- p ↦ p* ---

def pp_supply(space: BoundedTypeSpace) -> Tuple[Formula, ...]:
    """Positive-primitive supply: p.p. supply formulas and the disjuncts of every normal form."""
    found = set()
    for f in space.supply:
        if is_positive_primitive(f):
            found.add(f)
        for disjunct in dnf(f).disjuncts:
            found.add(disjunct)
    return tuple(sorted(found, key=formula_order))


@dataclass(frozen=True)
class StarType:
    """Maximal normal geometric type of a point.

    A normal formula belongs to it exactly when one of its disjuncts is among
    the generators, the p.p. supply formulas true at the realization.
    """

    point: int
    variables: Tuple[Var, ...]
    generators: FrozenSet[Formula]

    def __contains__(self, f: Formula) -> bool:
        f = canonicalize(f)
        if not is_normal_geometric(f):
            return False
        disjuncts = f.children() if isinstance(f, Or) else (f,)
        return any(canonicalize(d) in self.generators for d in disjuncts)

    def as_gtype(self) -> GeometricType:
        return GeometricType(self.variables, self.generators)


def _profile(space: BoundedTypeSpace, supply: Sequence[Formula], structure, row) -> FrozenSet[Formula]:
    table = extension_table(structure, space.variables)
    return frozenset(f for f in supply if table.holds(f, row))


def star_map(point: int, space: BoundedTypeSpace,
             supply: Optional[Sequence[Formula]] = None) -> StarType:
    supply = supply if supply is not None else pp_supply(space)
    structure, row = space.realizations[point][0]
    generators = _profile(space, supply, structure, row)
    for other, other_row in space.realizations[point][1:]:
        if _profile(space, supply, other, other_row) != generators:
            logger.warning(f"Realizations of point {point} disagree on the p.p. supply")
            break
    return StarType(point, space.variables, generators)


@dataclass(frozen=True)
class TypgeoReport:
    injective: bool
    surjective: bool
    collisions: Tuple[Tuple[int, int], ...]
    unmatched: Tuple[Tuple[str, Row], ...]
    nested: Tuple[int, ...] = ()


def _maximal(sets: Iterable[FrozenSet[Formula]]) -> Set[FrozenSet[Formula]]:
    sets = set(sets)
    return {s for s in sets if not any(s < other for other in sets)}


def typgeo_check(space: BoundedTypeSpace,
                 universe: Optional[UniverseClass] = None) -> TypgeoReport:
    """Injectivity of p ↦ p*, and surjectivity onto the maximal p.p. profiles.

    Profiles are collected from every tuple of every member of the class
    (the space's own class by default), independently of the space. The
    inclusion-maximal ones must be exactly the maximal star types. Points
    whose star type is not maximal are reported as nested.
    """
    universe = universe if universe is not None else space.universe
    supply = pp_supply(space)
    stars = [star_map(p, space, supply) for p in range(len(space.types))]
    seen: Dict[FrozenSet[Formula], int] = {}
    collisions = []
    for star in stars:
        if star.generators in seen:
            collisions.append((seen[star.generators], star.point))
        seen.setdefault(star.generators, star.point)
    maximal_stars = _maximal(seen)
    first_realizer: Dict[FrozenSet[Formula], Tuple[str, Row]] = {}
    for member in universe.members:
        table = extension_table(member, space.variables)
        masks = [table.extension(f) for f in supply]
        for i, row in enumerate(table.rows):
            profile = frozenset(f for f, m in zip(supply, masks) if (m >> i) & 1)
            first_realizer.setdefault(profile, (member.name, tuple(row)))
    maximal_profiles = _maximal(first_realizer)
    unmatched = tuple(sorted(first_realizer[p] for p in maximal_profiles - maximal_stars))
    nested = tuple(star.point for star in stars if star.generators not in maximal_stars)
    surjective = maximal_profiles == maximal_stars
    if not surjective:
        logger.warning(f"Maximal p.p. profiles of {universe.name} and star types of "
                       f"{space!r} differ")
    return TypgeoReport(not collisions, surjective, tuple(collisions), unmatched, nested)


# --- algebra of geometric types ---

def geo_type_disjunction(types: Sequence[GeometricType],
                         ceiling: Optional[int] = None) -> GeometricType:
    """The type of all disjunctions choosing one member from each type.

    The disjunction of no types is {⊥}.

    Raises:
        PreconditionError: when the variable tuples differ
    """
    if not types:
        return GeometricType((), frozenset((FALSE,)))
    variables = types[0].variables
    for t in types[1:]:
        if t.variables != variables:
            raise PreconditionError("Geometric types over different variable tuples")
    ceiling = ceiling if ceiling is not None else settings.POSLOG_DNF_CEILING
    count = 1
    for t in types:
        count *= len(t.formulas)
    if count > ceiling:
        raise ResourceCeilingError(f"Disjunction of types has {count} choices, "
                                   f"above the ceiling {ceiling}")
    formulas = frozenset(
        canonicalize(disjunction(choice))
        for choice in itertools.product(*(t.ordered for t in types))
    )
    return GeometricType(variables, formulas)


def negation_modulo(space: BoundedTypeSpace, f: Formula) -> Formula:
    """Or of the realizable members of the bounded resultant of f."""
    members = realizable(space.universe, space.variables, space.resultant(f))
    return canonicalize(disjunction(members))


@dataclass(frozen=True)
class ComplementReport:
    gtype: GeometricType
    complement: GeometricType
    overlapping: Tuple[str, ...]
    uncovered: Tuple[str, ...]

    @property
    def exact(self) -> bool:
        return not (self.overlapping or self.uncovered)


def geo_complement(gtype: GeometricType, space: BoundedTypeSpace) -> ComplementReport:
    """Uniform geometric complement of a type on the pec members of the class.

    Each p.p. disjunct φ of a member gets ¬φ as the disjunction of its
    realizable resultant, a member's complement is the type of those
    negations, and the type complement is their type disjunction.
    """
    free = set()
    for f in gtype.formulas:
        free |= f.free_set
    if not free <= set(space.variables):
        raise PreconditionError("Type variables lie outside the space")
    member_complements = []
    for member in gtype.ordered:
        negations = frozenset(negation_modulo(space, d) for d in dnf(member).disjuncts)
        member_complements.append(GeometricType(space.variables, negations))
    if member_complements:
        complement = GeometricType(space.variables,
                                   geo_type_disjunction(member_complements).formulas)
    else:
        complement = GeometricType(space.variables, frozenset((FALSE,)))
    source = GeometricType(space.variables, gtype.formulas)
    overlapping, uncovered = [], []
    for member in pec_members(space.universe):
        inside, outside = extension(member, source), extension(member, complement)
        if inside & outside:
            overlapping.append(member.name)
        if (inside | outside) != extension_table(member, space.variables).full:
            uncovered.append(member.name)
    if overlapping or uncovered:
        logger.warning(f"Complement of {gtype!r} is not exact on "
                       f"{sorted(set(overlapping + uncovered))} at depth {space.depth}")
    return ComplementReport(source, complement, tuple(overlapping), tuple(uncovered))


# --- subsets of type spaces ---

@dataclass(frozen=True)
class SubsetType:
    subset: FrozenSet[int]
    gtype: GeometricType
    points: FrozenSet[int]

    @property
    def verified(self) -> bool:
        return self.subset == self.points


def subset_to_type(subset: Iterable[int], space: BoundedTypeSpace) -> SubsetType:
    """A geometric type whose points are the given subset, depth permitting.

    Each excluded point q contributes the open set of points meeting the
    resultant of some member of q, written as one disjunction.
    """
    subset = frozenset(subset)
    if not subset <= space.whole:
        raise PreconditionError("Subset mentions points outside the space")
    if subset == space.whole:
        gtype = GeometricType(space.variables, frozenset((TRUE,)))
    elif not subset:
        gtype = GeometricType(space.variables, frozenset((FALSE,)))
    else:
        formulas = set()
        for q in sorted(space.whole - subset):
            opens = set()
            for phi in space.types[q].formulas:
                opens.update(space.resultant(phi).formulas)
            members = realizable(space.universe, space.variables, sorted(opens, key=formula_order))
            formulas.add(canonicalize(disjunction(members)))
        gtype = GeometricType(space.variables, frozenset(formulas))
    points = type_points(space, gtype)
    if points != subset:
        logger.warning(f"Type for subset {sorted(subset)} has points {sorted(points)} "
                       f"at depth {space.depth}")
    return SubsetType(subset, gtype, points)


def semantic_set(f: Formula, space: BoundedTypeSpace,
                 member: Optional[FiniteStructure]) -> FrozenSet[int]:
    """[f]: the basic set for positive f, otherwise the points whose realization in the member satisfies f.

    Raises:
        NoExistentialMemberError: when f is not positive and no member is given
    """
    f = canonicalize(f)
    if is_positive(f):
        return space.basic_set(f)
    if member is None:
        raise NoExistentialMemberError(
            f"{f!r} is not positive; its points are read off a designated existential "
            f"member, and none is available"
        )
    points = set()
    missing = []
    for point in range(len(space.types)):
        realization = next(((s, r) for s, r in space.realizations[point] if s is member), None)
        if realization is None:
            missing.append(point)
        if space.holds_at(f, point, realization):
            points.add(point)
    if missing:
        logger.warning(f"{member.name} does not realize points {missing}; "
                       f"their first realization decides {f!r}")
    return frozenset(points)


@dataclass(frozen=True)
class InfinitaryTranslation:
    formula: Formula
    subset: SubsetType
    mismatches: Tuple[Row, ...]

    @property
    def gtype(self) -> GeometricType:
        return self.subset.gtype

    @property
    def verified(self) -> bool:
        return self.subset.verified and not self.mismatches


def infinitary_to_geometric(f: Formula, space: BoundedTypeSpace,
                            member: Optional[FiniteStructure],
                            check_existential: bool = True) -> InfinitaryTranslation:
    """Geometric type equivalent to f on the designated existential member.

    Raises:
        NoExistentialMemberError: when no member is given or the member is not existential
    """
    if member is None:
        raise NoExistentialMemberError(
            "Translating a formula needs a designated existential member of the class"
        )
    if check_existential:
        from poslog.services.forcing import is_existential

        if not is_existential(member, space.universe, space.depth).holds:
            raise NoExistentialMemberError(
                f"{member.name} is not existential in {space.universe.name} at depth {space.depth}"
            )
    f = canonicalize(f)
    subset = subset_to_type(semantic_set(f, space, member), space)
    table = extension_table(member, space.variables)
    gmask = extension(member, subset.gtype)
    fmask = table.extension(f)
    mismatches = tuple(row for i, row in enumerate(table.rows) if ((gmask ^ fmask) >> i) & 1)
    if mismatches:
        logger.warning(f"Geometric type for {f!r} disagrees with it on {len(mismatches)} "
                       f"tuples of {member.name}")
    return InfinitaryTranslation(f, subset, mismatches)


@dataclass(frozen=True)
class OpenSetReport:
    unions_checked: int
    union_failures: Tuple[FrozenSet[int], ...]
    formula_failures: Tuple[Formula, ...]

    @property
    def passed(self) -> bool:
        return not (self.union_failures or self.formula_failures)


def open_sets_geometric(space: BoundedTypeSpace) -> OpenSetReport:
    """Every union of basic sets is [g] for the disjunction g of its basis members,
    and every supply formula's basic set is the union over its normal form."""
    basis: Dict[FrozenSet[int], Formula] = {}
    for f in space.supply:
        basis.setdefault(space.basic_set(f), f)
    unions = {frozenset()}
    for points in basis:
        unions |= {u | points for u in unions}
    union_failures = []
    for union in sorted(unions, key=sorted):
        members = [f for points, f in basis.items() if points <= union]
        g = canonicalize(disjunction(members))
        if space.basic_set(g) != union:
            union_failures.append(union)
    formula_failures = []
    for f in space.supply:
        covered = frozenset()
        for disjunct in dnf(f).disjuncts:
            covered |= space.basic_set(disjunct)
        if covered != space.basic_set(f):
            formula_failures.append(f)
    return OpenSetReport(len(unions), tuple(union_failures), tuple(formula_failures))
