# logic/fragments.py
import logging
from dataclasses import dataclass
from typing import Optional, Tuple

from poslog.logic.syntax import (
    And,
    Exists,
    Forall,
    Formula,
    Implies,
    Not,
    Or,
    Signature,
    TRUE,
    Falsity,
    check_sorts,
    is_atomic,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FragmentVerdict:
    positive: bool
    geometric: bool
    normal_geometric: bool
    constructible: bool
    h_universal_basic: bool
    h_inductive_basic: bool
    g_inductive_basic: bool
    first_order: bool = True

    def flags(self) -> Tuple[str, ...]:
        names = (
            "positive",
            "geometric",
            "normal-geometric",
            "constructible",
            "h-universal-basic",
            "h-inductive-basic",
            "g-inductive-basic",
            "first-order",
        )
        values = (
            self.positive,
            self.geometric,
            self.normal_geometric,
            self.constructible,
            self.h_universal_basic,
            self.h_inductive_basic,
            self.g_inductive_basic,
            self.first_order,
        )
        return tuple(n for n, v in zip(names, values) if v)

    def as_dict(self):
        return {name: True for name in self.flags()}

    @property
    def headline(self) -> str:
        """Most specific sentence shape, or the narrowest fragment."""
        for name in ("h-universal-basic", "h-inductive-basic", "g-inductive-basic",
                     "normal-geometric", "positive", "geometric", "constructible"):
            if name in self.flags():
                return name
        return "first-order"


def is_positive(f: Formula) -> bool:
    if is_atomic(f):
        return True
    if isinstance(f, (And, Or)):
        return all(is_positive(c) for c in f.children())
    if isinstance(f, Exists):
        return is_positive(f.body)
    return False


def is_geometric(f: Formula) -> bool:
    # set-arity disjunction is the only infinitary connective, so the two
    # fragments coincide on finite syntax trees
    return is_positive(f)


def is_positive_primitive(f: Formula) -> bool:
    while isinstance(f, Exists):
        f = f.body
    if is_atomic(f):
        return True
    return isinstance(f, And) and all(is_atomic(c) for c in f.children())


def is_normal_geometric(f: Formula) -> bool:
    if isinstance(f, Or):
        return all(is_positive_primitive(c) for c in f.children())
    return is_positive_primitive(f)


def is_constructible(f: Formula) -> bool:
    if is_positive(f):
        return True
    if isinstance(f, Not):
        return is_constructible(f.body)
    if isinstance(f, (And, Or)):
        return all(is_constructible(c) for c in f.children())
    if isinstance(f, Implies):
        return is_constructible(f.antecedent) and is_constructible(f.consequent)
    return False


def basic_shape(f: Formula) -> Optional[Tuple[Formula, Formula]]:
    """Split ∀x̄(φ → ψ) into (φ, ψ); a bare body counts as ⊤ → body."""
    while isinstance(f, Forall):
        f = f.body
    if isinstance(f, Implies):
        return f.antecedent, f.consequent
    return TRUE, f


def classify(f: Formula, signature: Optional[Signature] = None) -> FragmentVerdict:
    """Fragment membership of a formula by structural recursion.

    Args:
        f: formula to classify
        signature: when given, the formula is sort-checked first

    Returns:
        FragmentVerdict with one flag per fragment
    """
    if signature is not None:
        check_sorts(f, signature)
    positive = is_positive(f)
    antecedent, consequent = basic_shape(f)
    # sentence shapes only apply to sentences
    sentence = f.is_sentence
    inductive = sentence and is_positive(antecedent) and is_positive(consequent)
    return FragmentVerdict(
        positive=positive,
        geometric=is_geometric(f),
        normal_geometric=is_normal_geometric(f),
        constructible=is_constructible(f),
        h_universal_basic=inductive and isinstance(consequent, Falsity),
        h_inductive_basic=inductive,
        g_inductive_basic=sentence and is_geometric(antecedent) and is_geometric(consequent),
    )
