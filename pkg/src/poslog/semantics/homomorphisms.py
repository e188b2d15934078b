# semantics/homomorphisms.py
import itertools
import logging
from dataclasses import dataclass
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

from poslog.config import settings
from poslog.exceptions import HomomorphismError, StructureError
from poslog.logic.enumeration import FormulaEnumerator
from poslog.logic.syntax import Formula, canonical_variables
from poslog.semantics.structures import Element, FiniteStructure, Row
from poslog.semantics.tables import extension_table

logger = logging.getLogger(__name__)

SortedMap = Mapping[str, Mapping[Element, Element]]


@dataclass(frozen=True, eq=False)
class Homomorphism:
    """Sorted map between structures that preserves every atomic truth."""

    source: FiniteStructure
    target: FiniteStructure
    maps: Dict[str, Dict[Element, Element]]

    def __post_init__(self):
        if self.source.signature != self.target.signature:
            raise HomomorphismError(
                f"{self.source.name} and {self.target.name} have different signatures"
            )
        maps = {sort: dict(self.maps.get(sort, {})) for sort in self.source.signature.sorts}
        object.__setattr__(self, "maps", maps)
        problem = map_violation(self.source, self.target, maps)
        if problem:
            raise HomomorphismError(problem)

    def __call__(self, sort: str, element: Element) -> Element:
        return self.maps[sort][element]

    def apply(self, sorts: Sequence[str], row: Row) -> Row:
        return tuple(self.maps[s][e] for s, e in zip(sorts, row))

    def compose(self, after: "Homomorphism") -> "Homomorphism":
        """The map ``after ∘ self``."""
        if after.source is not self.target:
            raise HomomorphismError(
                f"Cannot compose {self.target.name} -> with {after.source.name} ->"
            )
        maps = {
            sort: {a: after.maps[sort][b] for a, b in table.items()}
            for sort, table in self.maps.items()
        }
        return Homomorphism(self.source, after.target, maps)

    @property
    def is_injective(self) -> bool:
        return all(len(set(t.values())) == len(t) for t in self.maps.values())

    @property
    def is_bijective(self) -> bool:
        return self.is_injective and all(
            len(self.maps[s]) == len(self.target.carriers[s]) for s in self.maps
        )

    def key(self):
        return tuple(
            tuple(self.target.position(s, self.maps[s][e]) for e in self.source.carriers[s])
            for s in self.source.signature.sorts
        )

    def __eq__(self, other):
        if not isinstance(other, Homomorphism):
            return NotImplemented
        return (self.source is other.source and self.target is other.target
                and self.maps == other.maps)

    def __hash__(self):
        return hash((id(self.source), id(self.target), self.key()))

    def as_dict(self):
        return {sort: dict(table) for sort, table in self.maps.items()}

    def __repr__(self):
        return f"Homomorphism({self.source.name} -> {self.target.name}, {self.as_dict()})"


def identity(structure: FiniteStructure) -> Homomorphism:
    return Homomorphism(structure, structure, {
        sort: {e: e for e in elements} for sort, elements in structure.carriers.items()
    })


def map_violation(source: FiniteStructure, target: FiniteStructure, maps: SortedMap) -> Optional[str]:
    """Describe why a sorted map is not a homomorphism, or return None."""
    signature = source.signature
    for sort in signature.sorts:
        for element in source.carriers[sort]:
            image = maps.get(sort, {}).get(element)
            if image is None:
                return f"map is undefined on {element} of sort {sort}"
            if image not in target.carriers[sort]:
                return f"{element} is sent outside the carrier of sort {sort}"
    for name, sorting in signature.relations.items():
        for row in source.relations[name]:
            image = tuple(maps[s][e] for s, e in zip(sorting, row))
            if not target.holds(name, image):
                return f"{name}{row} holds but {name}{image} does not"
    for name, (arity, result) in signature.functions.items():
        for args, value in source.functions[name].items():
            image_args = tuple(maps[s][e] for s, e in zip(arity, args))
            if target.apply(name, image_args) != maps[result][value]:
                return f"map does not commute with {name} at {args}"
    for name, sort in signature.constants.items():
        if maps[sort][source.constants[name]] != target.constants[name]:
            return f"constant {name} is not preserved"
    return None


def _constraints(source: FiniteStructure, slots: List[Tuple[str, Element]]):
    """Group preservation checks by the last slot they mention."""
    position = {slot: i for i, slot in enumerate(slots)}
    grouped: Dict[int, list] = {}
    signature = source.signature
    for name, sorting in signature.relations.items():
        for row in source.relations[name]:
            last = max((position[(s, e)] for s, e in zip(sorting, row)), default=-1)
            grouped.setdefault(last, []).append(("rel", name, sorting, row))
    for name, (arity, result) in signature.functions.items():
        for args, value in source.functions[name].items():
            mentioned = [position[(s, e)] for s, e in zip(arity, args)]
            mentioned.append(position[(result, value)])
            grouped.setdefault(max(mentioned), []).append(("fun", name, (arity, result), (args, value)))
    for name, sort in signature.constants.items():
        grouped.setdefault(position[(sort, source.constants[name])], []).append(
            ("const", name, sort, source.constants[name]))
    return grouped


def _satisfied(check, target: FiniteStructure, maps) -> bool:
    kind, name, sorting, payload = check
    if kind == "rel":
        return target.holds(name, tuple(maps[s][e] for s, e in zip(sorting, payload)))
    if kind == "fun":
        arity, result = sorting
        args, value = payload
        return target.apply(name, tuple(maps[s][e] for s, e in zip(arity, args))) == maps[result][value]
    return maps[sorting][payload] == target.constants[name]


def iter_homomorphisms(source: FiniteStructure, target: FiniteStructure,
                       fixed: Optional[SortedMap] = None) -> Iterator[Homomorphism]:
    """Backtracking enumeration of homomorphisms in lexicographic order.

    Args:
        source: domain structure
        target: codomain structure
        fixed: optional partial sorted map every result must extend

    Returns:
        iterator of Homomorphism, deterministic order
    """
    if source.signature != target.signature:
        raise StructureError(f"{source.name} and {target.name} have different signatures")
    fixed = fixed or {}
    slots = [(sort, e) for sort in source.signature.sorts for e in source.carriers[sort]]
    grouped = _constraints(source, slots)
    if any(not _satisfied(c, target, {}) for c in grouped.get(-1, [])):
        return
    maps: Dict[str, Dict[Element, Element]] = {sort: {} for sort in source.signature.sorts}

    def extend(i):
        if i == len(slots):
            yield Homomorphism(source, target, {s: dict(t) for s, t in maps.items()})
            return
        sort, element = slots[i]
        pinned = fixed.get(sort, {}).get(element)
        candidates = (pinned,) if pinned is not None else target.carriers[sort]
        for image in candidates:
            if image not in target.carriers[sort]:
                continue
            maps[sort][element] = image
            if all(_satisfied(c, target, maps) for c in grouped.get(i, [])):
                yield from extend(i + 1)
            del maps[sort][element]

    yield from extend(0)


def homomorphisms(source: FiniteStructure, target: FiniteStructure,
                  fixed: Optional[SortedMap] = None) -> List[Homomorphism]:
    return list(iter_homomorphisms(source, target, fixed))


def all_sorted_maps(source: FiniteStructure, target: FiniteStructure) -> Iterator[Dict[str, Dict[Element, Element]]]:
    """Every sorted map, homomorphism or not, in lexicographic order."""
    sorts = source.signature.sorts
    per_sort = [
        [dict(zip(source.carriers[s], images))
         for images in itertools.product(target.carriers[s], repeat=len(source.carriers[s]))]
        for s in sorts
    ]
    for choice in itertools.product(*per_sort):
        yield dict(zip(sorts, choice))


@dataclass(frozen=True)
class ImmersionVerdict:
    holds: bool
    retraction: Optional[Homomorphism] = None
    witness: Optional[Formula] = None
    witness_tuple: Optional[Row] = None
    witness_sorts: Optional[Tuple[str, ...]] = None


def find_retraction(f: Homomorphism) -> Optional[Homomorphism]:
    """A homomorphism g: target -> source with g ∘ f the identity, if any."""
    fixed: Dict[str, Dict[Element, Element]] = {}
    for sort, table in f.maps.items():
        inverse: Dict[Element, Element] = {}
        for a, b in table.items():
            if inverse.get(b, a) != a:
                return None
            inverse[b] = a
        fixed[sort] = inverse
    return next(iter_homomorphisms(f.target, f.source, fixed), None)


def is_immersion(f: Homomorphism, witness_depth: Optional[int] = None,
                 search_witness: bool = True) -> ImmersionVerdict:
    """Decide whether f reflects all positive truth, via the retraction criterion.

    On failure a positive formula of minimal found depth is returned that the
    target satisfies at the image tuple and the source refutes.
    """
    retraction = find_retraction(f)
    if retraction is not None:
        return ImmersionVerdict(True, retraction=retraction)
    if not search_witness:
        return ImmersionVerdict(False)
    depth_bound = witness_depth if witness_depth is not None else settings.POSLOG_WITNESS_DEPTH
    witness = find_witness(f, depth_bound)
    if witness is None:
        logger.warning(
            f"No witness up to depth {depth_bound} for the non-immersion "
            f"{f.source.name} -> {f.target.name}"
        )
        return ImmersionVerdict(False)
    formula, sorts, row = witness
    return ImmersionVerdict(False, witness=formula, witness_tuple=row, witness_sorts=sorts)


def find_witness(f: Homomorphism, depth_bound: int):
    source = f.source
    enumerator = FormulaEnumerator(source.signature)
    elements = [(s, e) for s in source.signature.sorts for e in source.carriers[s]]
    for depth in range(depth_bound + 1):
        for length in range(1, len(elements) + 1):
            for sorts in itertools.product(source.signature.sorts, repeat=length):
                variables = canonical_variables(sorts)
                formulas = enumerator.positive(variables, depth)
                source_table = extension_table(source, variables)
                target_table = extension_table(f.target, variables)
                for row in source.tuples(sorts):
                    image = f.apply(sorts, row)
                    for formula in formulas:
                        if target_table.holds(formula, image) and not source_table.holds(formula, row):
                            return formula, tuple(sorts), tuple(row)
    return None


def is_isomorphic(first: FiniteStructure, second: FiniteStructure) -> bool:
    """Brute-force isomorphism test."""
    if first.signature != second.signature:
        return False
    for sort in first.signature.sorts:
        if len(first.carriers[sort]) != len(second.carriers[sort]):
            return False
    for name in first.signature.relations:
        if len(first.relations[name]) != len(second.relations[name]):
            return False
    return any(h.is_bijective for h in iter_homomorphisms(first, second))
