import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from poslog.exceptions import FormulaError, ResourceCeilingError, SortError, TheoryError
from poslog.frontend.parser import parse_formula
from poslog.frontend.printer import format_formula
from poslog.logic.enumeration import (
    FormulaEnumerator,
    enumerate_constructible,
    enumerate_first_order,
    enumerate_positive,
)
from poslog.logic.fragments import classify, is_normal_geometric, is_positive_primitive
from poslog.logic.syntax import (
    FALSE,
    TRUE,
    And,
    Atom,
    Equals,
    Exists,
    Falsity,
    Forall,
    Implies,
    Not,
    Or,
    Signature,
    Truth,
    Var,
    canonical_variables,
    variable_index,
)
from poslog.logic.theory import H_INDUCTIVE, H_UNIVERSAL, UNRESTRICTED, Theory
from poslog.logic.transform import canonicalize, depth, size, substitute
from poslog.semantics.evaluation import evaluate

GRAPH = Signature("Graph", ("V",), {"E": ("V", "V")})
x, y, z = canonical_variables(("V",) * 3)


def E(a, b):
    return Atom("E", (a, b))


def test_variable_names_cycle_through_letters():
    assert [Var("V", i).name for i in (0, 5, 6, 13)] == ["x", "w", "x1", "y2"]
    assert variable_index("z1") == 8
    assert variable_index("q") is None
    assert variable_index("x01") is None


def test_set_connectives_sort_and_deduplicate():
    assert And((E(y, x), E(x, y), E(y, x))) == And((E(x, y), E(y, x)))
    assert len(Or((E(x, y), E(x, y))).children()) == 1
    with pytest.raises(FormulaError):
        And(())


def test_canonicalize_renames_binders_to_smallest_free_index():
    f = Exists(z, E(x, z))
    assert canonicalize(f) == Exists(y, E(x, y))


def test_canonicalize_absorbs_units_and_orients_equalities():
    assert canonicalize(Or((E(x, y), TRUE))) == TRUE
    assert canonicalize(And((E(x, y), FALSE))) == FALSE
    assert canonicalize(And((E(x, y), TRUE))) == E(x, y)
    assert canonicalize(Equals(y, x)) == Equals(x, y)
    assert canonicalize(Exists(z, E(x, y))) == E(x, y)


def test_substitute_avoids_capture():
    f = Exists(y, E(x, y))
    assert substitute(f, {x: y}) == Exists(z, E(y, z))


def test_substitute_rejects_sort_mismatch():
    with pytest.raises(SortError):
        substitute(E(x, y), {x: Var("W", 0)})


def test_depth_and_size():
    f = Exists(y, And((E(x, y), E(y, x))))
    assert depth(f) == 2
    assert size(f) == 4
    assert depth(TRUE) == 0


def test_classify_truth():
    verdict = classify(TRUE)
    assert verdict.positive and verdict.geometric and verdict.constructible


def test_classify_sentence_shapes():
    symmetric = Forall(x, Forall(y, Implies(E(x, y), E(y, x))))
    verdict = classify(symmetric, GRAPH)
    assert verdict.h_inductive_basic
    assert not verdict.h_universal_basic

    irreflexive = Forall(x, Implies(E(x, x), FALSE))
    verdict = classify(irreflexive, GRAPH)
    assert verdict.h_universal_basic and verdict.h_inductive_basic
    assert verdict.headline == "h-universal-basic"


def test_classify_disjunction_of_pp_formulas():
    f = Or((Exists(z, And((E(x, z), E(z, y)))), E(x, y)))
    verdict = classify(f, GRAPH)
    assert verdict.geometric and verdict.normal_geometric and verdict.positive
    assert not verdict.h_inductive_basic
    assert verdict.headline == "normal-geometric"


def test_classify_rejects_ill_sorted_input():
    with pytest.raises(SortError):
        classify(Atom("F", (x,)), GRAPH)


def test_classify_negation_is_constructible_not_positive():
    verdict = classify(Not(E(x, y)))
    assert verdict.constructible
    assert not verdict.positive
    assert classify(Forall(y, E(x, y))).headline == "first-order"


def test_positive_primitive_shapes():
    assert is_positive_primitive(Exists(y, And((E(x, y), Equals(x, y)))))
    assert not is_positive_primitive(Exists(y, Or((E(x, y), E(y, x)))))
    assert not is_normal_geometric(And((Or((E(x, y), E(y, x))), E(x, x))))


def test_theory_infers_kind(graph_theory):
    assert graph_theory.kind == H_INDUCTIVE
    universal = Theory.build("T", GRAPH, [Forall(x, Implies(E(x, x), FALSE))])
    assert universal.kind == H_UNIVERSAL
    geometric = Theory.build("G", GRAPH, [Forall(x, Implies(Not(E(x, x)), TRUE))])
    assert geometric.kind == UNRESTRICTED


def test_theory_rejects_open_axioms_and_wrong_kinds():
    with pytest.raises(TheoryError):
        Theory("T", GRAPH, (E(x, y),), H_INDUCTIVE)
    with pytest.raises(TheoryError):
        Theory("T", GRAPH, (Forall(x, Forall(y, Implies(E(x, y), E(y, x)))),), H_UNIVERSAL)


def test_atoms_over_one_variable():
    atoms = FormulaEnumerator(GRAPH).atoms((x,))
    assert set(atoms) == {TRUE, FALSE, E(x, x), Equals(x, x)}


def test_supplies_are_canonical_and_nested():
    enumerator = FormulaEnumerator(GRAPH)
    level0 = enumerator.positive((x,), 0)
    level1 = enumerator.positive((x,), 1)
    assert set(level0) < set(level1)
    assert Exists(y, E(x, y)) in level1
    assert all(canonicalize(f) == f for f in level1)
    first_order = enumerator.first_order((x,), 1)
    assert Forall(y, E(x, y)) in first_order
    assert Not(E(x, x)) in first_order


def test_supply_ceiling():
    with pytest.raises(ResourceCeilingError):
        FormulaEnumerator(GRAPH, ceiling=10).positive((x, y), 1)


def _generated(variables, depth, width):
    """Positive supply by direct recursion over the grammar."""
    found = {TRUE, FALSE}
    for a, b in itertools.product(variables, repeat=2):
        found.add(E(a, b))
        found.add(canonicalize(Equals(a, b)))
    if depth == 0:
        return found
    below = _generated(variables, depth - 1, width)
    found |= below
    for k in range(2, width + 1):
        for group in itertools.combinations(below, k):
            found.add(canonicalize(And(group)))
            found.add(canonicalize(Or(group)))
    fresh = Var("V", len(variables))
    for body in _generated(tuple(variables) + (fresh,), depth - 1, width):
        found.add(canonicalize(Exists(fresh, body)))
    return found


def test_positive_supply_matches_direct_generation():
    supply = enumerate_positive(GRAPH, (x, y), 1, width=3, ceiling=100000)
    assert len(supply) == len(set(supply))
    assert set(supply) == _generated((x, y), 1, 3)


def _pp(f):
    while isinstance(f, Exists):
        f = f.body
    match f:
        case And():
            return all(isinstance(c, (Truth, Falsity, Atom, Equals)) for c in f.children())
        case Truth() | Falsity() | Atom() | Equals():
            return True
    return False


def _constructible(f, positive):
    match f:
        case Not(body=body):
            return _constructible(body, positive)
        case And() | Or():
            return positive(f) or all(_constructible(c, positive) for c in f.children())
        case Implies(antecedent=a, consequent=c):
            return _constructible(a, positive) and _constructible(c, positive)
    return positive(f)


def _recognized(f):
    """Fragment flags read off the printed text and the tree shape."""

    def positive(g):
        text = format_formula(g)
        return not any(mark in text for mark in ("!", "forall", "->"))

    body = f
    while isinstance(body, Forall):
        body = body.body
    antecedent, consequent = ((body.antecedent, body.consequent) if isinstance(body, Implies)
                              else (TRUE, body))
    inductive = f.is_sentence and positive(antecedent) and positive(consequent)
    normal = (all(_pp(c) for c in f.children()) if isinstance(f, Or) else _pp(f))
    flags = {
        "positive": positive(f),
        "geometric": positive(f),
        "normal-geometric": normal,
        "constructible": _constructible(f, positive),
        "h-universal-basic": inductive and consequent == FALSE,
        "h-inductive-basic": inductive,
        "g-inductive-basic": inductive,
        "first-order": True,
    }
    return {name for name, value in flags.items() if value}


def test_classify_agrees_with_a_shape_recognizer(graph_theory, order_theory):
    formulas = set(enumerate_first_order(GRAPH, (x,), 2, width=2))
    formulas |= set(enumerate_first_order(GRAPH, (), 2, width=2))
    formulas |= set(enumerate_constructible(GRAPH, (x, y), 1, width=2))
    formulas |= set(graph_theory.sentences) | set(order_theory.sentences)
    formulas |= {Forall(x, Implies(f, g)) for f, g in itertools.product(
        enumerate_positive(GRAPH, (x,), 1, width=2)[:12], (FALSE, E(x, x), Not(E(x, x))))}
    assert len(formulas) > 500
    for f in formulas:
        assert set(classify(f).flags()) == _recognized(f), format_formula(f)


# --- properties ---

TERMS = st.sampled_from([x, y, z])
ATOMS = st.one_of(
    st.just(TRUE),
    st.just(FALSE),
    st.builds(E, TERMS, TERMS),
    st.builds(Equals, TERMS, TERMS),
)


def _extend(children):
    return st.one_of(
        st.lists(children, min_size=1, max_size=3).map(lambda cs: And(tuple(cs))),
        st.lists(children, min_size=1, max_size=3).map(lambda cs: Or(tuple(cs))),
        children.map(Not),
        st.builds(Implies, children, children),
        st.builds(Exists, TERMS, children),
        st.builds(Forall, TERMS, children),
    )


FORMULAS = st.recursive(ATOMS, _extend, max_leaves=8)


@settings(max_examples=200, deadline=None)
@given(FORMULAS)
def test_canonicalize_is_idempotent(f):
    once = canonicalize(f)
    assert canonicalize(once) == once


@settings(max_examples=200, deadline=None)
@given(FORMULAS)
def test_printed_formulas_parse_back(f):
    assert parse_formula(format_formula(f), GRAPH) == canonicalize(f)


@settings(max_examples=100, deadline=None)
@given(f=FORMULAS)
def test_canonicalize_preserves_truth(f, graphs3):
    canonical = canonicalize(f)
    for structure in (graphs3.member("K2"), graphs3.member("P2")):
        elements = structure.carriers["V"]
        for row in itertools.product(elements, repeat=3):
            assignment = dict(zip((x, y, z), row))
            assert evaluate(structure, f, assignment) == evaluate(structure, canonical, assignment)
