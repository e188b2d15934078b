from poslog.logic.syntax import (
    FALSE,
    TRUE,
    And,
    App,
    Atom,
    Const,
    Equals,
    Exists,
    Falsity,
    Forall,
    Formula,
    GeometricType,
    Implies,
    Not,
    Or,
    Signature,
    SortedVar,
    Term,
    Truth,
    Var,
    canonical_variables,
    conjunction,
    disjunction,
)
from poslog.logic.fragments import FragmentVerdict, classify
from poslog.logic.transform import canonicalize, depth, size, substitute
from poslog.logic.enumeration import FormulaEnumerator, enumerate_positive
from poslog.logic.theory import Theory
