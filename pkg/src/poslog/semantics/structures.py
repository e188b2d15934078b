# semantics/structures.py
import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Iterator, Mapping, Optional, Sequence, Tuple

from poslog.exceptions import StructureError, UniverseClassError
from poslog.logic.syntax import Signature

logger = logging.getLogger(__name__)

Element = str
Row = Tuple[Element, ...]


@dataclass(frozen=True, eq=False)
class FiniteStructure:
    """Finite many-sorted structure with total interpretations.

    Carriers are nonempty and ordered; the order fixes every search order
    over the structure. Relations not given are interpreted as empty.
    Structures compare by identity.
    """

    name: str
    signature: Signature
    carriers: Dict[str, Tuple[Element, ...]]
    relations: Dict[str, FrozenSet[Row]] = field(default_factory=dict)
    functions: Dict[str, Dict[Row, Element]] = field(default_factory=dict)
    constants: Dict[str, Element] = field(default_factory=dict)

    def __post_init__(self):
        signature = self.signature
        carriers = {}
        for sort in signature.sorts:
            elements = tuple(self.carriers.get(sort, ()))
            if not elements:
                raise StructureError(f"{self.name}: carrier of sort {sort} is empty")
            if len(set(elements)) != len(elements):
                raise StructureError(f"{self.name}: carrier of sort {sort} repeats an element")
            carriers[sort] = elements
        extra = set(self.carriers) - set(signature.sorts)
        if extra:
            raise StructureError(f"{self.name}: unknown sorts {sorted(extra)}")
        object.__setattr__(self, "carriers", carriers)
        members = {sort: set(elements) for sort, elements in carriers.items()}

        relations = {}
        for name, rows in self.relations.items():
            if name not in signature.relations:
                raise StructureError(f"{self.name}: unknown relation '{name}'")
            sorting = signature.relations[name]
            rows = frozenset(tuple(r) for r in rows)
            for row in rows:
                self._check_row(name, row, sorting, members)
            relations[name] = rows
        for name in signature.relations:
            relations.setdefault(name, frozenset())
        object.__setattr__(self, "relations", relations)

        functions = {}
        for name, (arity, result) in signature.functions.items():
            table = {tuple(k): v for k, v in self.functions.get(name, {}).items()}
            for args in itertools.product(*(carriers[s] for s in arity)):
                if args not in table:
                    raise StructureError(f"{self.name}: function '{name}' undefined at {args}")
                if table[args] not in members[result]:
                    raise StructureError(f"{self.name}: '{name}{args}' leaves sort {result}")
            if len(table) != len(list(itertools.product(*(carriers[s] for s in arity)))):
                raise StructureError(f"{self.name}: function '{name}' has ill-sorted entries")
            functions[name] = table
        unknown = set(self.functions) - set(signature.functions)
        if unknown:
            raise StructureError(f"{self.name}: unknown functions {sorted(unknown)}")
        object.__setattr__(self, "functions", functions)

        for name, sort in signature.constants.items():
            if name not in self.constants:
                raise StructureError(f"{self.name}: constant '{name}' is not interpreted")
            if self.constants[name] not in members[sort]:
                raise StructureError(f"{self.name}: constant '{name}' leaves sort {sort}")
        object.__setattr__(self, "constants", dict(self.constants))
        object.__setattr__(self, "_positions", {
            sort: {e: i for i, e in enumerate(elements)} for sort, elements in carriers.items()
        })

    def _check_row(self, name, row, sorting, members):
        if len(row) != len(sorting):
            raise StructureError(f"{self.name}: tuple {row} has the wrong arity for '{name}'")
        for element, sort in zip(row, sorting):
            if element not in members[sort]:
                raise StructureError(f"{self.name}: '{element}' is not in sort {sort} ('{name}')")

    # --- lookup ---

    def holds(self, relation: str, row: Row) -> bool:
        return tuple(row) in self.relations[relation]

    def apply(self, function: str, args: Row) -> Element:
        return self.functions[function][tuple(args)]

    @property
    def size(self) -> int:
        return sum(len(c) for c in self.carriers.values())

    def position(self, sort: str, element: Element) -> int:
        return self._positions[sort][element]

    def tuples(self, sorts: Sequence[str]) -> Iterator[Row]:
        """All tuples of the given sorting, in carrier order."""
        return itertools.product(*(self.carriers[s] for s in sorts))

    def tuple_order(self, row: Row):
        # rows in the same relation share a sorting; positions are looked up in
        # every carrier containing the element
        return tuple(
            min(self._positions[s][e] for s in self.carriers if e in self._positions[s])
            for e in row
        )

    def sorted_tuples(self, relation: str):
        sorting = self.signature.relations[relation]
        return sorted(
            self.relations[relation],
            key=lambda row: tuple(self.position(s, e) for s, e in zip(sorting, row)),
        )

    # --- derived structures ---

    def with_relation(self, relation: str, rows: Iterable[Row],
                      name: Optional[str] = None) -> "FiniteStructure":
        relations = dict(self.relations)
        relations[relation] = frozenset(tuple(r) for r in rows)
        return FiniteStructure(name or self.name, self.signature, dict(self.carriers),
                               relations, dict(self.functions), dict(self.constants))

    def expand(self, signature: Signature, relations: Mapping[str, Iterable[Row]],
               name: Optional[str] = None) -> "FiniteStructure":
        merged = dict(self.relations)
        merged.update({k: frozenset(tuple(r) for r in v) for k, v in relations.items()})
        return FiniteStructure(name or self.name, signature, dict(self.carriers), merged,
                               dict(self.functions), dict(self.constants))

    def reduct(self, signature: Signature, name: Optional[str] = None) -> "FiniteStructure":
        relations = {k: v for k, v in self.relations.items() if k in signature.relations}
        return FiniteStructure(name or self.name, signature, dict(self.carriers), relations,
                               dict(self.functions), dict(self.constants))

    def __repr__(self):
        return f"FiniteStructure({self.name})"


@dataclass(frozen=True, eq=False)
class UniverseClass:
    """Explicit finite class of finite structures over one signature.

    Every semantic notion of the toolkit (pec, resultant, type space) is
    computed relative to such a class. An attached theory must hold in every
    member.
    """

    name: str
    signature: Signature
    members: Tuple[FiniteStructure, ...]
    theory: Optional[object] = None

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        names = [m.name for m in self.members]
        if len(set(names)) != len(names):
            raise UniverseClassError(f"Class {self.name} lists a structure twice")
        for member in self.members:
            if member.signature != self.signature:
                raise UniverseClassError(
                    f"Member {member.name} of {self.name} is over {member.signature.name}, "
                    f"not {self.signature.name}"
                )
        if self.theory is not None:
            from poslog.semantics.evaluation import satisfies

            for member in self.members:
                for sentence in self.theory.sentences:
                    if not satisfies(member, sentence):
                        raise UniverseClassError(
                            f"Member {member.name} of {self.name} fails axiom {sentence!r}"
                        )

    def __contains__(self, structure) -> bool:
        return any(m is structure for m in self.members)

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)

    def member(self, name: str) -> FiniteStructure:
        for m in self.members:
            if m.name == name:
                return m
        raise UniverseClassError(f"No member named '{name}' in class {self.name}")

    def index(self, structure: FiniteStructure) -> int:
        for i, m in enumerate(self.members):
            if m is structure:
                return i
        raise UniverseClassError(f"{structure.name} is not a member of class {self.name}")
