import pytest

from poslog.exceptions import (
    NoExistentialMemberError,
    NotGeometricError,
    PreconditionError,
    ResourceCeilingError,
)
from poslog.frontend.parser import parse_formula
from poslog.logic.fragments import is_normal_geometric, is_positive_primitive
from poslog.logic.syntax import FALSE, TRUE, Atom, Equals, GeometricType, Not, Or, canonical_variables
from poslog.logic.transform import canonicalize
from poslog.semantics.structures import UniverseClass
from poslog.semantics.tables import extension_table
from poslog.services.geometric import (
    dnf,
    extension_rows,
    geo_complement,
    geo_type_disjunction,
    infinitary_to_geometric,
    open_sets_geometric,
    semantic_set,
    star_map,
    subset_to_type,
    type_points,
    typgeo_check,
)
from poslog.services.type_spaces import type_space

x, y = canonical_variables(("V", "V"))
EDGE = Atom("E", (x, y))
BACK_EDGE = Atom("E", (y, x))


@pytest.fixture(scope="module")
def edge_space(graphs3, graph_theory):
    return type_space(graphs3, (x, y), 1, graph_theory)


@pytest.fixture(scope="module")
def unary_points(unary3):
    return type_space(unary3, (x,), 1)


@pytest.mark.parametrize("text", [
    "E(x,y) & (E(y,x) | x=y)",
    "exists z: E(x,z) & (E(z,y) | z=y)",
    "(E(x,y) | exists z: E(z,z)) & E(y,x)",
    "exists z: E(x,z) & exists u: E(z,u) & E(u,y)",
])
def test_dnf_is_normal_and_equivalent(text, graphs4, graph_theory):
    f = parse_formula(text, graph_theory.signature)
    normal = dnf(f)
    assert all(is_positive_primitive(d) for d in normal.disjuncts)
    assert is_normal_geometric(normal.formula)
    for member in graphs4.members:
        table = extension_table(member, (x, y))
        assert table.extension(f) == table.extension(normal.formula), member.name


def test_dnf_distributes_conjunction(graph_theory):
    sig = graph_theory.signature
    normal = dnf(parse_formula("exists z: E(x,z) & (E(z,y) | z=y)", sig))
    assert set(normal.disjuncts) == {
        parse_formula("exists z: E(x,z) & E(z,y)", sig),
        parse_formula("exists z: E(x,z) & z=y", sig),
    }


def test_dnf_absorbs_truth():
    assert dnf(Or((EDGE, TRUE))).disjuncts == (TRUE,)
    assert dnf(FALSE).disjuncts == ()


def test_dnf_rejects_negation():
    with pytest.raises(NotGeometricError):
        dnf(Not(EDGE))


def test_dnf_ceiling(graph_theory):
    f = parse_formula("(E(x,y) | x=y) & (E(y,x) | E(x,x))", graph_theory.signature)
    assert len(dnf(f)) == 4
    with pytest.raises(ResourceCeilingError):
        dnf(f, ceiling=3)


def test_type_disjunction_picks_one_member_per_type():
    first = GeometricType((x, y), frozenset({EDGE, BACK_EDGE}))
    second = GeometricType((x, y), frozenset({Equals(x, y)}))
    joined = geo_type_disjunction([first, second])
    assert joined.formulas == {
        canonicalize(Or((EDGE, Equals(x, y)))),
        canonicalize(Or((BACK_EDGE, Equals(x, y)))),
    }


def test_type_disjunction_of_nothing_is_false():
    assert geo_type_disjunction([]).formulas == {FALSE}


def test_type_disjunction_needs_one_variable_tuple():
    with pytest.raises(PreconditionError):
        geo_type_disjunction([GeometricType((x,), frozenset({TRUE})),
                              GeometricType((x, y), frozenset({TRUE}))])


def test_type_extension(graphs3):
    gtype = GeometricType((x, y), frozenset({EDGE, BACK_EDGE}))
    assert extension_rows(graphs3.member("K2"), gtype) == [("a", "b"), ("b", "a")]


def test_type_points(edge_space):
    gtype = GeometricType((x, y), frozenset({EDGE}))
    assert type_points(edge_space, gtype) == edge_space.basic_set(EDGE)


def test_star_types_separate_points(edge_space, unary_points):
    assert typgeo_check(edge_space).injective
    report = typgeo_check(unary_points)
    assert report.injective and report.surjective
    star = star_map(0, edge_space)
    assert Equals(x, y) in star
    assert Not(EDGE) not in star


def test_complement_of_an_edge_is_exact(edge_space):
    report = geo_complement(GeometricType((x, y), frozenset({EDGE})), edge_space)
    assert report.exact
    assert type_points(edge_space, report.complement) == edge_space.basic_set(Equals(x, y))


def test_subset_to_type(edge_space):
    for subset in (frozenset(), frozenset({0}), frozenset({1}), edge_space.whole):
        result = subset_to_type(subset, edge_space)
        assert result.verified, subset


def test_subset_outside_the_space_is_rejected(edge_space):
    with pytest.raises(PreconditionError):
        subset_to_type({5}, edge_space)


def test_semantic_set_of_negation_needs_a_member(edge_space):
    with pytest.raises(NoExistentialMemberError):
        semantic_set(Not(EDGE), edge_space, None)
    k3 = edge_space.universe.member("K3")
    assert semantic_set(Not(EDGE), edge_space, k3) == edge_space.basic_set(Equals(x, y))


def test_negation_translates_to_a_geometric_type(edge_space):
    k3 = edge_space.universe.member("K3")
    translation = infinitary_to_geometric(Not(EDGE), edge_space, k3)
    assert translation.verified
    assert translation.mismatches == ()


def test_open_sets_are_geometric(chains3, order_theory):
    space = type_space(chains3, (x,), 1, order_theory)
    report = open_sets_geometric(space)
    assert report.passed
    assert report.unions_checked >= len(space)


def test_star_types_are_the_maximal_profiles(edge_space, chains3, order_theory):
    report = typgeo_check(edge_space)
    assert report.surjective
    assert report.unmatched == () and report.nested == ()
    chain = typgeo_check(type_space(chains3, (x,), 1, order_theory))
    assert chain.injective and chain.surjective
    # both ends sit below the middle point
    assert chain.nested == (0, 2)


def test_star_types_miss_profiles_of_a_larger_class(graphs3):
    vertex = UniverseClass("vertex", graphs3.signature, (graphs3.member("K1"),))
    report = typgeo_check(type_space(vertex, (x, y), 1), graphs3)
    assert report.injective
    assert not report.surjective
    assert report.unmatched
    assert all(name != "K1" for name, _ in report.unmatched)
