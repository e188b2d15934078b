import re
from pathlib import Path

import pytest

from poslog.config import settings
from poslog.exceptions import ParseError
from poslog.frontend.parser import parse_formula, parse_text, read_header
from poslog.frontend.printer import format_formula, format_gtype, serialize
from poslog.frontend.workspace import SourceDocument, Workspace
from poslog.logic.syntax import And, App, Atom, Equals, Exists, Signature, Var
from poslog.logic.transform import canonicalize

THEORY_TEXT = """#poslog v1 theory
signature Order {
  sort V;
  rel <(V,V);
}
theory T over Order {
  axiom forall x: x<x -> false;
}
"""


def test_theory_document(order_theory):
    assert order_theory.name == "T_lo"
    assert order_theory.signature.relations == {"<": ("V", "V")}
    assert len(order_theory.sentences) == 3


def test_infix_relations_print_infix(order_theory):
    f = parse_formula("exists z: x<z & z<y", order_theory.signature)
    assert format_formula(f) == "exists z: And[x<z, z<y]"


def test_kind_is_inferred_without_declaration():
    theory = parse_text(THEORY_TEXT)
    assert theory.kind == "h-universal"


def test_class_members_and_attached_theory(graphs3):
    assert [m.name for m in graphs3.members] == ["K1", "E2", "K2", "E3", "K2K1", "P2", "K3"]
    assert graphs3.theory.name == "T_graph"
    assert graphs3.member("K2").relations["E"] == {("a", "b"), ("b", "a")}


def test_fragment_document_is_closed(graph_fragment, graph_theory):
    neighbour = parse_formula("exists y: E(x,y)", graph_theory.signature)
    assert neighbour in graph_fragment
    assert parse_formula("!exists y: E(x,y)", graph_theory.signature) in graph_fragment


def test_gtype_syntax(graph_theory):
    gtype = parse_formula("GType[E(x,y), exists z: E(x,z)]", graph_theory.signature)
    x, y = Var("V", 0), Var("V", 1)
    assert gtype.variables == (x, y)
    assert Exists(y, Atom("E", (x, y))) in gtype.formulas
    assert format_gtype(gtype) == "GType[E(x,y), exists y: E(x,y)]"


def test_header_wins_over_extension(tmp_path):
    path = tmp_path / "orders.pls"
    path.write_text(THEORY_TEXT, encoding="utf-8")
    document = SourceDocument.from_path(path)
    assert document.kind is None
    assert parse_text(document.text).name == "T"


def test_extension_decides_without_header(tmp_path):
    path = tmp_path / "orders.plt"
    path.write_text(THEORY_TEXT.split("\n", 1)[1], encoding="utf-8")
    assert SourceDocument.from_path(path).kind == "theory"
    assert Workspace().load(path).name == "T"


def test_unsupported_version_is_rejected():
    with pytest.raises(ParseError) as error:
        read_header("#poslog v2 theory\n")
    assert "v2" in error.value.diagnostics[0].message


def test_missing_header_and_kind():
    with pytest.raises(ParseError) as error:
        parse_text("sort V;")
    assert error.value.diagnostics[0].hint.startswith("start the file")


def test_diagnostic_position_of_unknown_symbol(graph_theory):
    with pytest.raises(ParseError) as error:
        parse_formula("E(x,y) & F(x)", graph_theory.signature)
    diagnostic = error.value.diagnostics[0]
    assert (diagnostic.line, diagnostic.column) == (1, 10)
    assert diagnostic.severity == "error"
    assert "F" in diagnostic.message
    assert diagnostic.hint is not None


def test_diagnostic_line_inside_document():
    broken = THEORY_TEXT.replace("axiom forall x: x<x -> false;", "axiom forall x: x<q;")
    with pytest.raises(ParseError) as error:
        parse_text(broken)
    assert error.value.diagnostics[0].line == 7


def test_unexpected_character():
    with pytest.raises(ParseError) as error:
        parse_text("#poslog v1 signature\nsort V; $")
    diagnostic = error.value.diagnostics[0]
    assert (diagnostic.line, diagnostic.column) == (2, 9)


def test_open_axiom_is_rejected():
    with pytest.raises(ParseError) as error:
        parse_text(THEORY_TEXT.replace("forall x: x<x", "x<y"))
    assert "free variables" in error.value.diagnostics[0].message


def test_duplicate_names_are_rejected():
    text = THEORY_TEXT + "theory T over Order { }\n"
    with pytest.raises(ParseError) as error:
        parse_text(text)
    assert "already defined" in error.value.diagnostics[0].message


def test_structure_rejects_unknown_elements(graph_theory):
    workspace = Workspace()
    workspace.register("theory", graph_theory.name, graph_theory)
    text = "#poslog v1 structure\nstructure S over T_graph { V = {a}; E = {(a,b)}; }\n"
    with pytest.raises(ParseError):
        parse_text(text, workspace)


def test_structure_failing_an_axiom_cannot_join_a_class(graph_theory):
    workspace = Workspace()
    workspace.register("theory", graph_theory.name, graph_theory)
    text = ("#poslog v1 class\n"
            "structure Loop over T_graph { V = {a}; E = {(a,a)}; }\n"
            "class loops over T_graph { Loop }\n")
    with pytest.raises(ParseError):
        parse_text(text, workspace)



def test_syntax_error_lists_expected_tokens():
    with pytest.raises(ParseError) as error:
        parse_text("#poslog v1 signature\nsort V")
    diagnostic = error.value.diagnostics[0]
    assert diagnostic.message == "Unexpected end of input"
    assert (diagnostic.line, diagnostic.column) == (2, 7)
    assert "';'" in diagnostic.hint


def test_unexpected_token_is_positioned(graph_theory):
    with pytest.raises(ParseError) as error:
        parse_formula("E(x,,y)", graph_theory.signature)
    diagnostic = error.value.diagnostics[0]
    assert (diagnostic.line, diagnostic.column) == (1, 5)
    assert "a name" in diagnostic.hint


TOKEN_RE = re.compile(r"->|[A-Za-z_][A-Za-z0-9_'-]*|[0-9]+|[<>~*+^%]+|[{}()\[\];,:=@&|!]")


def _token_spans(lines):
    for number, line in enumerate(lines, start=1):
        if line.lstrip().startswith("#"):
            continue
        for match in TOKEN_RE.finditer(line):
            yield number, match.start(), match.end()


def test_deleted_token_is_reported_near_the_deletion():
    lines = (Path(settings.CORPUS_DIR) / "t_lo.plt").read_text(encoding="utf-8").split("\n")
    spans = list(_token_spans(lines))
    assert len(spans) > 50
    for i, (number, start, end) in enumerate(spans):
        # a missing closer surfaces at the next surviving token
        following = spans[i + 1][0] if i + 1 < len(spans) else len(lines)
        mutated = list(lines)
        mutated[number - 1] = mutated[number - 1][:start] + mutated[number - 1][end:]
        with pytest.raises(ParseError) as error:
            parse_text("\n".join(mutated))
        line = error.value.diagnostics[0].line
        assert number - 1 <= line <= following, (lines[number - 1][start:end], number, line)


THEORY_FILES = ("graph.plt", "t_lo.plt", "unary.plt")


@pytest.mark.parametrize("name", THEORY_FILES + (
    "graph_fragment.plt", "graphs3.pls", "graphs4.pls", "chains3.pls", "unary3.pls"))
def test_shipped_corpus_reparses(name):
    corpus = Path(settings.CORPUS_DIR)
    workspace = Workspace()
    for theory in THEORY_FILES:
        if theory != name:
            workspace.load(corpus / theory)
    text = serialize(workspace.load(corpus / name))
    assert serialize(parse_text(text, Workspace())) == text


def test_multi_sorted_formula_round_trip():
    sig = Signature("Incidence", ("P", "L"), {"I": ("P", "L")}, {"meet": (("L", "L"), "P")})
    point, line, other = Var("P", 0), Var("L", 1), Var("L", 0)
    f = Exists(other, And((
        Atom("I", (point, other)),
        Atom("I", (point, line)),
        Equals(App("meet", (line, other), "P"), point),
    )))
    text = serialize(f, sig)
    assert "@P" in text and "@L" in text
    assert parse_formula(text, sig) == canonicalize(f)
