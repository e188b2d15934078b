# semantics/tables.py
"""Extensions of formulas as bitmasks over the tuples of a structure.

Bit i of an extension is set when the formula holds at the i-th tuple of the
variable sorts, tuples enumerated in carrier order (last variable fastest).
"""
import logging
import threading
import weakref
from typing import Dict, Sequence, Tuple

from poslog.logic.syntax import (
    And,
    Atom,
    Equals,
    Exists,
    Falsity,
    Formula,
    Implies,
    Not,
    Or,
    Truth,
    Var,
)
from poslog.logic.transform import rename_bound
from poslog.semantics.evaluation import eval_term
from poslog.semantics.structures import FiniteStructure, Row, UniverseClass

logger = logging.getLogger(__name__)


class ExtensionTable:
    """Memoized extensions of formulas over one structure and variable tuple."""

    def __init__(self, structure: FiniteStructure, variables: Sequence[Var], owner=None):
        self.structure = structure
        self.variables = tuple(variables)
        self.rows: Tuple[Row, ...] = tuple(structure.tuples([v.sort for v in self.variables]))
        self.full = (1 << len(self.rows)) - 1
        self._owner = owner
        self._memo: Dict[Formula, int] = {}

    def row_index(self, row: Row) -> int:
        index = 0
        for var, element in zip(self.variables, row):
            index = index * len(self.structure.carriers[var.sort]) + self.structure.position(
                var.sort, element)
        return index

    def holds(self, f: Formula, row: Row) -> bool:
        return bool((self.extension(f) >> self.row_index(row)) & 1)

    def satisfying_rows(self, f: Formula):
        mask = self.extension(f)
        return [row for i, row in enumerate(self.rows) if (mask >> i) & 1]

    def extension(self, f: Formula) -> int:
        cached = self._memo.get(f)
        if cached is not None:
            return cached
        mask = self._compute(f)
        self._memo[f] = mask
        return mask

    def _compute(self, f: Formula) -> int:
        if isinstance(f, Truth):
            return self.full
        if isinstance(f, Falsity):
            return 0
        if isinstance(f, (Atom, Equals)):
            return self._atomic(f)
        if isinstance(f, And):
            mask = self.full
            for child in f.children():
                mask &= self.extension(child)
                if not mask:
                    break
            return mask
        if isinstance(f, Or):
            mask = 0
            for child in f.children():
                mask |= self.extension(child)
            return mask
        if isinstance(f, Not):
            return self.full ^ self.extension(f.body)
        if isinstance(f, Implies):
            return (self.full ^ self.extension(f.antecedent)) | self.extension(f.consequent)
        return self._quantified(f)

    def _atomic(self, f: Formula) -> int:
        mask = 0
        for i, row in enumerate(self.rows):
            assignment = dict(zip(self.variables, row))
            if isinstance(f, Atom):
                value = self.structure.holds(
                    f.relation, tuple(eval_term(self.structure, a, assignment) for a in f.args))
            else:
                value = (eval_term(self.structure, f.left, assignment)
                         == eval_term(self.structure, f.right, assignment))
            if value:
                mask |= 1 << i
        return mask

    def _quantified(self, f: Formula) -> int:
        if f.var in self.variables:
            renamed = rename_bound(f, self.variables)
            return self.extension(renamed)
        inner = self._sibling(self.variables + (f.var,))
        body = inner.extension(f.body)
        width = len(self.structure.carriers[f.var.sort])
        block = (1 << width) - 1
        mask = 0
        for i in range(len(self.rows)):
            chunk = (body >> (i * width)) & block
            if (chunk if isinstance(f, Exists) else chunk == block):
                mask |= 1 << i
        return mask

    def _sibling(self, variables: Tuple[Var, ...]) -> "ExtensionTable":
        if self._owner is not None:
            return self._owner.table(variables)
        return ExtensionTable(self.structure, variables)


class StructureTables:
    """All extension tables of one structure, keyed by variable tuple."""

    def __init__(self, structure: FiniteStructure):
        self.structure = structure
        self._tables: Dict[Tuple[Var, ...], ExtensionTable] = {}
        self._lock = threading.Lock()

    def table(self, variables: Sequence[Var]) -> ExtensionTable:
        variables = tuple(variables)
        with self._lock:
            table = self._tables.get(variables)
            if table is None:
                table = ExtensionTable(self.structure, variables, owner=self)
                self._tables[variables] = table
        return table


_TABLES: "weakref.WeakKeyDictionary[FiniteStructure, StructureTables]" = weakref.WeakKeyDictionary()
_TABLES_LOCK = threading.Lock()


def tables_for(structure: FiniteStructure) -> StructureTables:
    with _TABLES_LOCK:
        tables = _TABLES.get(structure)
        if tables is None:
            tables = StructureTables(structure)
            _TABLES[structure] = tables
    return tables


def extension_table(structure: FiniteStructure, variables: Sequence[Var]) -> ExtensionTable:
    return tables_for(structure).table(variables)


class ClassTable:
    """Extensions over a whole class: member masks concatenated in class order."""

    def __init__(self, universe: UniverseClass, variables: Sequence[Var], members=None):
        self.universe = universe
        self.variables = tuple(variables)
        self.members = tuple(members if members is not None else universe.members)
        self.tables = [extension_table(m, self.variables) for m in self.members]
        self.offsets = []
        offset = 0
        for table in self.tables:
            self.offsets.append(offset)
            offset += len(table.rows)
        self.full = (1 << offset) - 1
        self._memo: Dict[Formula, int] = {}

    def extension(self, f: Formula) -> int:
        cached = self._memo.get(f)
        if cached is None:
            cached = 0
            for table, offset in zip(self.tables, self.offsets):
                cached |= table.extension(f) << offset
            self._memo[f] = cached
        return cached

    def realized(self, f: Formula) -> bool:
        return self.extension(f) != 0

    def jointly_realized(self, first: Formula, second: Formula) -> bool:
        return (self.extension(first) & self.extension(second)) != 0
