# logic/syntax.py
"""Many-sorted syntax: signatures, sorted variables, terms and formulas.

Formulas are immutable. Conjunctions and disjunctions carry a canonical set
of children (deduplicated and sorted by structural key), so two formulas that
differ only in the order or repetition of children compare equal.
"""
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, Mapping, Optional, Tuple

from poslog.exceptions import FormulaError, SignatureError, SortError

logger = logging.getLogger(__name__)

VARIABLE_LETTERS = "xyzuvw"
RESERVED_RELATIONS = ("true", "false")


@dataclass(frozen=True)
class Signature:
    """Sorts and symbols of a many-sorted first-order language.

    The nullary relations true and false are built in and never declared.
    """

    name: str
    sorts: Tuple[str, ...]
    relations: Dict[str, Tuple[str, ...]] = field(default_factory=dict)
    functions: Dict[str, Tuple[Tuple[str, ...], str]] = field(default_factory=dict)
    constants: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.sorts:
            raise SignatureError(f"Signature {self.name} declares no sort")
        if len(set(self.sorts)) != len(self.sorts):
            raise SignatureError(f"Signature {self.name} declares a sort twice")
        declared = set(self.sorts)
        seen = set()
        for kind, table in (("relation", self.relations), ("function", self.functions),
                            ("constant", self.constants)):
            for name in table:
                if name in RESERVED_RELATIONS:
                    raise SignatureError(f"'{name}' is built in and cannot be redeclared")
                if name in seen:
                    raise SignatureError(f"Symbol '{name}' declared twice in {self.name}")
                seen.add(name)
        for name, sorting in self.relations.items():
            self._check_sorts(name, sorting, declared)
        for name, (arity, result) in self.functions.items():
            self._check_sorts(name, tuple(arity) + (result,), declared)
        for name, sort in self.constants.items():
            self._check_sorts(name, (sort,), declared)

    def _check_sorts(self, symbol, sorts, declared):
        for sort in sorts:
            if sort not in declared:
                raise SignatureError(f"Symbol '{symbol}' mentions undeclared sort '{sort}'")

    @property
    def is_multi_sorted(self) -> bool:
        return len(self.sorts) > 1

    @property
    def default_sort(self) -> Optional[str]:
        return self.sorts[0] if len(self.sorts) == 1 else None

    def symbols(self):
        return set(self.relations) | set(self.functions) | set(self.constants)

    def extend(self, name: str, relations: Mapping[str, Tuple[str, ...]]) -> "Signature":
        """Return a signature with the same sorts and additional relations."""
        merged = dict(self.relations)
        merged.update(relations)
        return Signature(name, self.sorts, merged, dict(self.functions), dict(self.constants))


# --- Terms ---

class Term:
    """Base class for sorted terms."""

    sort: str

    @property
    def key(self):
        raise NotImplementedError

    def variables(self) -> FrozenSet["Var"]:
        raise NotImplementedError

    def __lt__(self, other):
        return self.key < other.key


@dataclass(frozen=True, eq=True)
class Var(Term):
    sort: str
    index: int

    @property
    def key(self):
        return (0, self.sort, self.index)

    @property
    def name(self) -> str:
        letter = VARIABLE_LETTERS[self.index % len(VARIABLE_LETTERS)]
        suffix = self.index // len(VARIABLE_LETTERS)
        return f"{letter}{suffix}" if suffix else letter

    def variables(self):
        return frozenset((self,))

    def __repr__(self):
        return f"{self.name}@{self.sort}"


SortedVar = Var


def variable_index(name: str) -> Optional[int]:
    """Index of a canonical variable name such as 'y' or 'z1', or None."""
    if not name or name[0] not in VARIABLE_LETTERS:
        return None
    rest = name[1:]
    if rest and not rest.isdigit():
        return None
    if rest.startswith("0"):
        return None
    block = int(rest) if rest else 0
    return VARIABLE_LETTERS.index(name[0]) + len(VARIABLE_LETTERS) * block


@dataclass(frozen=True)
class Const(Term):
    name: str
    sort: str

    @property
    def key(self):
        return (1, self.name, ())

    def variables(self):
        return frozenset()

    def __repr__(self):
        return self.name


@dataclass(frozen=True)
class App(Term):
    function: str
    args: Tuple[Term, ...]
    sort: str

    @property
    def key(self):
        return (2, self.function, tuple(a.key for a in self.args))

    def variables(self):
        result = frozenset()
        for arg in self.args:
            result |= arg.variables()
        return result

    def __repr__(self):
        return f"{self.function}({', '.join(map(repr, self.args))})"


def canonical_variables(sorts: Iterable[str]) -> Tuple[Var, ...]:
    """Variables x, y, z, ... for a tuple of sorts, indexed by position."""
    return tuple(Var(sort, i) for i, sort in enumerate(sorts))


# --- Formulas ---

TAG_RANK = {
    "Truth": 0,
    "Falsity": 1,
    "Equals": 2,
    "Atom": 3,
    "And": 4,
    "Or": 5,
    "Not": 6,
    "Implies": 7,
    "Exists": 8,
    "Forall": 9,
}


class Formula:
    """Base class of the formula tree.

    Equality, hashing and ordering go through ``key``, a nested tuple that is
    a total structural order on formulas.
    """

    def children(self) -> Tuple["Formula", ...]:
        return ()

    @cached_property
    def key(self):
        return self._key()

    def _key(self):
        raise NotImplementedError

    @cached_property
    def free_set(self) -> FrozenSet[Var]:
        return self._free()

    def _free(self):
        result = frozenset()
        for child in self.children():
            result |= child.free_set
        return result

    @property
    def free_vars(self) -> Tuple[Var, ...]:
        """Free variables in canonical (sort, index) order."""
        return tuple(sorted(self.free_set, key=lambda v: v.key))

    @property
    def is_sentence(self) -> bool:
        return not self.free_set

    def __eq__(self, other):
        if not isinstance(other, Formula):
            return NotImplemented
        return self is other or self.key == other.key

    @cached_property
    def _hash(self):
        return hash(self.key)

    def __hash__(self):
        return self._hash

    def __lt__(self, other):
        return self.key < other.key

    def __repr__(self):
        from poslog.frontend.printer import format_formula

        return format_formula(self)


@dataclass(frozen=True, eq=False, repr=False)
class Truth(Formula):
    def _key(self):
        return (TAG_RANK["Truth"],)


@dataclass(frozen=True, eq=False, repr=False)
class Falsity(Formula):
    def _key(self):
        return (TAG_RANK["Falsity"],)


TRUE = Truth()
FALSE = Falsity()


@dataclass(frozen=True, eq=False, repr=False)
class Atom(Formula):
    relation: str
    args: Tuple[Term, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))

    def _key(self):
        return (TAG_RANK["Atom"], self.relation, tuple(a.key for a in self.args))

    def _free(self):
        result = frozenset()
        for arg in self.args:
            result |= arg.variables()
        return result


@dataclass(frozen=True, eq=False, repr=False)
class Equals(Formula):
    left: Term
    right: Term

    def __post_init__(self):
        if self.left.sort != self.right.sort:
            raise SortError(
                f"Equality between sorts {self.left.sort} and {self.right.sort}"
            )

    def _key(self):
        return (TAG_RANK["Equals"], self.left.key, self.right.key)

    def _free(self):
        return self.left.variables() | self.right.variables()


class _Junction(Formula):
    """Shared behaviour of set-arity conjunction and disjunction."""

    children_: Tuple[Formula, ...]

    def __post_init__(self):
        unique = {}
        for child in self.children_:
            if not isinstance(child, Formula):
                raise FormulaError(f"{type(self).__name__} child is not a formula: {child!r}")
            unique.setdefault(child.key, child)
        if not unique:
            raise FormulaError(
                f"{type(self).__name__} of no children; use conjunction()/disjunction()"
            )
        ordered = tuple(unique[k] for k in sorted(unique))
        object.__setattr__(self, "children_", ordered)

    def children(self):
        return self.children_

    def _key(self):
        return (TAG_RANK[type(self).__name__], tuple(c.key for c in self.children_))


@dataclass(frozen=True, eq=False, repr=False)
class And(_Junction):
    children_: Tuple[Formula, ...]


@dataclass(frozen=True, eq=False, repr=False)
class Or(_Junction):
    children_: Tuple[Formula, ...]


@dataclass(frozen=True, eq=False, repr=False)
class Not(Formula):
    body: Formula

    def children(self):
        return (self.body,)

    def _key(self):
        return (TAG_RANK["Not"], self.body.key)


@dataclass(frozen=True, eq=False, repr=False)
class Implies(Formula):
    antecedent: Formula
    consequent: Formula

    def children(self):
        return (self.antecedent, self.consequent)

    def _key(self):
        return (TAG_RANK["Implies"], self.antecedent.key, self.consequent.key)


class _Quantifier(Formula):
    var: Var
    body: Formula

    def children(self):
        return (self.body,)

    def _key(self):
        return (TAG_RANK[type(self).__name__], self.var.sort, self.var.index, self.body.key)

    def _free(self):
        return self.body.free_set - {self.var}


@dataclass(frozen=True, eq=False, repr=False)
class Exists(_Quantifier):
    var: Var
    body: Formula


@dataclass(frozen=True, eq=False, repr=False)
class Forall(_Quantifier):
    var: Var
    body: Formula


ATOMIC_TYPES = (Truth, Falsity, Atom, Equals)


def is_atomic(f: Formula) -> bool:
    return isinstance(f, ATOMIC_TYPES)


def conjunction(children: Iterable[Formula]) -> Formula:
    """Set conjunction; the empty conjunction is true."""
    children = tuple(children)
    return And(children) if children else TRUE


def disjunction(children: Iterable[Formula]) -> Formula:
    """Set disjunction; the empty disjunction is false."""
    children = tuple(children)
    return Or(children) if children else FALSE


def exists_all(variables: Iterable[Var], body: Formula) -> Formula:
    for var in reversed(tuple(variables)):
        body = Exists(var, body)
    return body


def forall_all(variables: Iterable[Var], body: Formula) -> Formula:
    for var in reversed(tuple(variables)):
        body = Forall(var, body)
    return body


def term_sort(term: Term, signature: Signature) -> str:
    """Check a term against a signature and return its sort."""
    if isinstance(term, Var):
        if term.sort not in signature.sorts:
            raise SortError(f"Variable {term.name} has undeclared sort {term.sort}")
        return term.sort
    if isinstance(term, Const):
        declared = signature.constants.get(term.name)
        if declared is None:
            raise SortError(f"Undeclared constant '{term.name}'")
        if declared != term.sort:
            raise SortError(f"Constant '{term.name}' has sort {declared}, not {term.sort}")
        return declared
    if isinstance(term, App):
        if term.function not in signature.functions:
            raise SortError(f"Undeclared function '{term.function}'")
        arity, result = signature.functions[term.function]
        if len(arity) != len(term.args):
            raise SortError(f"Function '{term.function}' expects {len(arity)} arguments")
        for expected, arg in zip(arity, term.args):
            if term_sort(arg, signature) != expected:
                raise SortError(f"Argument of '{term.function}' should have sort {expected}")
        if result != term.sort:
            raise SortError(f"Function '{term.function}' returns {result}, not {term.sort}")
        return result
    raise SortError(f"Not a term: {term!r}")


def check_sorts(f: Formula, signature: Signature) -> Formula:
    """Raise SortError unless f is well-sorted over the signature."""
    if isinstance(f, Atom):
        if f.relation not in signature.relations:
            raise SortError(f"Undeclared relation '{f.relation}'")
        sorting = signature.relations[f.relation]
        if len(sorting) != len(f.args):
            raise SortError(f"Relation '{f.relation}' expects {len(sorting)} arguments")
        for expected, arg in zip(sorting, f.args):
            if term_sort(arg, signature) != expected:
                raise SortError(f"Argument of '{f.relation}' should have sort {expected}")
    elif isinstance(f, Equals):
        term_sort(f.left, signature)
        term_sort(f.right, signature)
    elif isinstance(f, _Quantifier):
        if f.var.sort not in signature.sorts:
            raise SortError(f"Quantified variable {f.var.name} has undeclared sort")
        check_sorts(f.body, signature)
    else:
        for child in f.children():
            check_sorts(child, signature)
    return f


# --- Geometric types ---

@dataclass(frozen=True)
class GeometricType:
    """A finite set of geometric formulas in a fixed variable tuple.

    The empty type is satisfied everywhere.
    """

    variables: Tuple[Var, ...]
    formulas: FrozenSet[Formula]

    @property
    def ordered(self) -> Tuple[Formula, ...]:
        return tuple(sorted(self.formulas, key=lambda f: f.key))

    @property
    def normal(self) -> bool:
        from poslog.logic.fragments import is_normal_geometric

        return all(is_normal_geometric(f) for f in self.formulas)

    def __repr__(self):
        from poslog.frontend.printer import format_gtype

        return format_gtype(self)
