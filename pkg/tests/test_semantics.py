import itertools

import pytest

from poslog.exceptions import NotContinuableError, SortError, StructureError, UniverseClassError
from poslog.frontend.parser import parse_formula
from poslog.logic.syntax import canonical_variables
from poslog.semantics.closedness import (
    continue_to_pec,
    is_pec,
    joint_continuation,
    pec_members,
)
from poslog.semantics.evaluation import evaluate, satisfies
from poslog.semantics.homomorphisms import (
    homomorphisms,
    identity,
    is_immersion,
    is_isomorphic,
)
from poslog.semantics.structures import FiniteStructure, UniverseClass
from poslog.semantics.tables import ClassTable, extension_table

x, y = canonical_variables(("V", "V"))


def test_evaluation_of_quantifiers(graphs3, graph_theory):
    sig = graph_theory.signature
    neighbour = parse_formula("exists y: E(x,y)", sig)
    assert evaluate(graphs3.member("K2"), neighbour, {x: "a"})
    assert not evaluate(graphs3.member("E2"), neighbour, {x: "a"})
    complete = parse_formula("forall x,y: x=y | E(x,y)", sig)
    assert satisfies(graphs3.member("K3"), complete)
    assert not satisfies(graphs3.member("P2"), complete)


def test_evaluation_requires_a_covering_assignment(graphs3, graph_theory):
    f = parse_formula("E(x,y)", graph_theory.signature)
    with pytest.raises(SortError):
        evaluate(graphs3.member("K2"), f, {x: "a"})
    with pytest.raises(SortError):
        evaluate(graphs3.member("K2"), f, {x: "a", y: "q"})


def test_extension_bitmask_orders_last_variable_fastest(graphs3, graph_theory):
    table = extension_table(graphs3.member("K2"), (x, y))
    assert table.rows == (("a", "a"), ("a", "b"), ("b", "a"), ("b", "b"))
    assert table.extension(parse_formula("E(x,y)", graph_theory.signature)) == 0b0110
    assert table.holds(parse_formula("!x=y", graph_theory.signature), ("b", "a"))


def test_class_table_concatenates_members(graphs3, graph_theory):
    table = ClassTable(graphs3, (x,))
    neighbour = parse_formula("exists y: E(x,y)", graph_theory.signature)
    assert table.realized(neighbour)
    assert not table.realized(parse_formula("E(x,x)", graph_theory.signature))


def test_edge_into_triangle_has_six_homomorphisms(graphs3):
    k2, k3 = graphs3.member("K2"), graphs3.member("K3")
    assert len(homomorphisms(k2, k3)) == 6
    assert homomorphisms(k3, k2) == []


def test_homomorphism_order_is_deterministic(graphs3):
    k2, k3 = graphs3.member("K2"), graphs3.member("K3")
    first = homomorphisms(k2, k3)[0]
    assert first.as_dict() == {"V": {"a": "a", "b": "b"}}


def test_identity_is_an_immersion(graphs3):
    verdict = is_immersion(identity(graphs3.member("P2")))
    assert verdict.holds
    assert verdict.retraction is not None


def test_edge_into_triangle_is_not_an_immersion(graphs3):
    k2, k3 = graphs3.member("K2"), graphs3.member("K3")
    hom = homomorphisms(k2, k3)[0]
    verdict = is_immersion(hom)
    assert not verdict.holds
    assert verdict.witness is not None
    variables = canonical_variables(verdict.witness_sorts)
    image = hom.apply(verdict.witness_sorts, verdict.witness_tuple)
    assert extension_table(k3, variables).holds(verdict.witness, image)
    assert not extension_table(k2, variables).holds(verdict.witness, verdict.witness_tuple)


def test_only_the_triangle_is_pec_among_small_graphs(graphs3):
    assert [m.name for m in pec_members(graphs3)] == ["K3"]
    verdict = is_pec(graphs3.member("K2"), graphs3)
    assert not verdict.holds
    assert verdict.counterexample.source.name == "K2"


def test_only_the_longest_chain_is_pec(chains3):
    assert [m.name for m in pec_members(chains3)] == ["C3"]


def test_marked_point_absorbs_every_unary_structure(unary3):
    assert [m.name for m in pec_members(unary3)] == ["U1_1"]


def test_pec_requires_membership(graphs3, chains3):
    with pytest.raises(UniverseClassError):
        is_pec(chains3.member("C1"), graphs3)


def test_continue_to_pec(graphs3):
    hom = continue_to_pec(graphs3.member("K1"), graphs3)
    assert hom.target.name == "K3"


def test_continue_to_pec_fails_without_pec_target(graphs3):
    path = graphs3.member("P2")
    lonely = UniverseClass("path", graphs3.signature, (path,))
    # the path folds onto one of its edges
    assert pec_members(lonely) == ()
    with pytest.raises(NotContinuableError):
        continue_to_pec(path, lonely)


def test_joint_continuation_identifies_tuples(graphs3):
    k2 = graphs3.member("K2")
    joint = joint_continuation(k2, k2, graphs3, ("a",), ("b",), depth=1)
    assert joint is not None
    assert joint.left("V", "a") == joint.right("V", "b")


def test_isomorphism_test(graphs4):
    members = graphs4.members
    for i, first in enumerate(members):
        for j, second in enumerate(members):
            assert is_isomorphic(first, second) == (i == j)


def test_structures_validate_their_tables(graphs3):
    signature = graphs3.signature
    with pytest.raises(StructureError):
        FiniteStructure("Empty", signature, {"V": ()})
    with pytest.raises(StructureError):
        FiniteStructure("Bad", signature, {"V": ("a",)}, {"E": {("a", "b")}})


def test_class_rejects_duplicates_and_axiom_failures(graphs3, graph_theory):
    k2 = graphs3.member("K2")
    with pytest.raises(UniverseClassError):
        UniverseClass("twice", graphs3.signature, (k2, k2))
    loop = k2.with_relation("E", {("a", "a")}, name="Loop")
    with pytest.raises(UniverseClassError):
        UniverseClass("loops", graphs3.signature, (loop,), graph_theory)


def test_with_relation_leaves_the_original_alone(graphs3):
    k2 = graphs3.member("K2")
    shrunk = k2.with_relation("E", [("a", "b")], name="K2-")
    assert shrunk.relations["E"] == {("a", "b")}
    assert k2.relations["E"] == {("a", "b"), ("b", "a")}


@pytest.mark.parametrize("fixture", ["graphs3", "chains3", "unary3"])
def test_homomorphisms_compose_and_have_identities(fixture, request):
    universe = request.getfixturevalue(fixture)
    members = universe.members
    homs = {(a.name, b.name): homomorphisms(a, b) for a in members for b in members}
    for a in members:
        assert identity(a) in homs[(a.name, a.name)]
        for b in members:
            for f in homs[(a.name, b.name)]:
                assert identity(a).compose(f) == f
                assert f.compose(identity(b)) == f
    for a, b, c in itertools.product(members, repeat=3):
        reachable = set(homs[(a.name, c.name)])
        for f in homs[(a.name, b.name)]:
            for g in homs[(b.name, c.name)]:
                assert f.compose(g) in reachable
