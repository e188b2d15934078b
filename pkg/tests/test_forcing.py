import itertools

import pytest

from poslog.exceptions import PreconditionError, UniverseClassError
from poslog.frontend.parser import parse_formula, parse_text
from poslog.logic.enumeration import FormulaEnumerator
from poslog.logic.syntax import Atom, Not, canonical_variables
from poslog.semantics.homomorphisms import homomorphisms, identity, is_isomorphic
from poslog.semantics.tables import extension_table
from poslog.services.forcing import (
    FORTH,
    ForcingContext,
    back_and_forth,
    connective,
    elementary_preservation,
    existential_members,
    forces,
    infinitary_agreement,
    is_existential,
    is_generic,
    pecte_check,
    stability_check,
)
from poslog.services.type_spaces import tp_pos

x, y = canonical_variables(("V", "V"))
EDGE = Atom("E", (x, y))


@pytest.fixture(scope="module")
def pair_context(graph_theory, graphs3):
    return ForcingContext(graph_theory, graphs3, (x, y), 1, existential_depth=1)


def test_triangle_is_the_existential_graph(graphs3):
    assert is_existential(graphs3.member("K3"), graphs3, 1).holds
    assert [m.name for m in existential_members(graphs3, 1)] == ["K3"]


def test_edge_misses_a_realized_partial_type(graphs3):
    k2 = graphs3.member("K2")
    verdict = is_existential(k2, graphs3, 1)
    assert not verdict.holds
    witness = verdict.counterexample
    variables = canonical_variables(("V",) * 3)
    own = extension_table(k2, variables)
    assert not any(own.holds(witness.partial_type, (a,) + witness.parameters)
                   for a in k2.carriers["V"])
    image = witness.hom.apply(("V", "V"), witness.parameters)
    assert extension_table(witness.target, variables).holds(
        witness.partial_type, witness.realization + image)


def test_existential_needs_membership(graphs3, chains3):
    with pytest.raises(UniverseClassError):
        is_existential(chains3.member("C2"), graphs3, 1)


def test_context_designates_the_existential_member(pair_context):
    assert pair_context.existential.name == "K3"


def test_positive_type_is_forced(pair_context, graphs3):
    k2 = graphs3.member("K2")
    for f in tp_pos(k2, ("a", "b"), 1).formulas:
        assert forces(k2, f, ("a", "b"), pair_context)


def test_negation_is_forced_through_the_existential_member(pair_context, graphs3):
    k2 = graphs3.member("K2")
    assert forces(k2, Not(EDGE), ("a", "a"), pair_context)
    assert not forces(k2, Not(EDGE), ("a", "b"), pair_context)
    assert not forces(k2, EDGE, ("a", "a"), pair_context)


def test_forcing_rejects_foreign_variables(pair_context, graphs3):
    z = canonical_variables(("V",) * 3)[2]
    with pytest.raises(PreconditionError):
        forces(graphs3.member("K3"), Atom("E", (x, z)), ("a", "b"), pair_context)


def test_genericity_matches_existential_members(graph_theory, graphs3):
    ctx = ForcingContext(graph_theory, graphs3, (x, y), 2, existential_depth=1)
    triangle = is_generic(graphs3.member("K3"), ctx)
    assert triangle.holds
    assert triangle.checked["atomic"] > 0
    edge = is_generic(graphs3.member("K2"), ctx)
    assert not edge.holds
    assert sum(edge.failed.values()) > 0


def test_pec_member_decides_every_formula(pair_context, graphs3):
    report = pecte_check(graphs3.member("K3"), pair_context)
    assert report.total and report.consistent
    assert report.checked > 0


def test_forcing_is_stable_along_homomorphisms(pair_context, graphs3):
    homs = homomorphisms(graphs3.member("K2"), graphs3.member("K3"))
    homs += homomorphisms(graphs3.member("K1"), graphs3.member("P2"))
    assert stability_check(pair_context, homs) == ()


def test_connective_names(graph_theory):
    assert connective(EDGE) == "atomic"
    assert connective(Not(EDGE)) == "not"
    assert connective(parse_formula("exists y: E(x,y)", graph_theory.signature)) == "exists"


def test_back_and_forth_on_a_structure_and_itself(graphs3):
    p2 = graphs3.member("P2")
    system = back_and_forth(p2, p2)
    assert system.holds
    assert system.failure is None
    assert ((("V", "a"),), (("V", "c"),)) in system
    assert ((("V", "a"),), (("V", "b"),)) not in system


def test_back_and_forth_reports_the_failing_move(graphs3):
    system = back_and_forth(graphs3.member("K2"), graphs3.member("E2"))
    assert not system.holds
    assert system.failure.direction == FORTH
    assert system.failure.element == ("V", "a")


def test_back_and_forth_agrees_with_isomorphism(graphs4):
    for first, second in itertools.combinations_with_replacement(graphs4.members, 2):
        assert back_and_forth(first, second).holds == is_isomorphic(first, second), (
            first.name, second.name)


def test_paired_tuples_agree_on_first_order_formulas(graphs3):
    p2 = graphs3.member("P2")
    report = infinitary_agreement(p2, p2, ("a",), ("c",), depth=1)
    assert report.agree
    assert report.checked > 0
    with pytest.raises(PreconditionError):
        infinitary_agreement(p2, p2, ("a",), ("b",), depth=1)


def test_elementary_preservation(graphs3):
    k3 = graphs3.member("K3")
    assert elementary_preservation(identity(k3), 1).elementary
    inclusion = homomorphisms(graphs3.member("K2"), k3)[0]
    report = elementary_preservation(inclusion, 2, length=2)
    assert not report.elementary
    assert report.checked > len(report.failures)


def test_back_and_forth_length_bound(graphs3):
    k2, e2 = graphs3.member("K2"), graphs3.member("E2")
    assert back_and_forth(k2, e2).length == 2
    assert not back_and_forth(k2, e2, length=4).holds
    # without moves only the sentences of the empty tuple are compared
    assert back_and_forth(k2, e2, length=0).holds
    assert back_and_forth(k2, k2, length=4).holds
    with pytest.raises(PreconditionError):
        back_and_forth(k2, k2, length=-1)


def test_context_keeps_its_enumerator_across_depths(graph_theory, graphs3):
    enumerator = FormulaEnumerator(graphs3.signature, width=3)
    ctx = ForcingContext(graph_theory, graphs3, (x, y), 2, existential_depth=1,
                         enumerator=enumerator)
    shallow = ctx.at_depth(0)
    assert shallow.depth == 0
    assert shallow.enumerator is enumerator
    assert shallow.enumerator.width == 3


INCIDENCE = """#poslog v1 class
signature Incidence {
  sort P;
  sort L;
  rel I(P,L);
}
structure Flag over Incidence { P = {p}; L = {l}; I = {(p,l)}; }
structure Apart over Incidence { P = {p}; L = {l}; I = {}; }
class flags over Incidence { Apart, Flag }
"""


@pytest.fixture(scope="module")
def flags():
    return parse_text(INCIDENCE)


def test_existential_members_of_a_two_sorted_class(flags):
    assert is_existential(flags.member("Flag"), flags, 1).holds
    verdict = is_existential(flags.member("Apart"), flags, 1)
    assert not verdict.holds
    assert verdict.counterexample.target.name == "Flag"


def test_elementary_preservation_over_two_sorts(flags):
    flag = flags.member("Flag")
    assert elementary_preservation(identity(flag), 1).elementary
    inclusion = homomorphisms(flags.member("Apart"), flag)[0]
    report = elementary_preservation(inclusion, 1)
    assert not report.elementary
    assert {row for _, row in report.failures} == {("p",), ("l",)}
