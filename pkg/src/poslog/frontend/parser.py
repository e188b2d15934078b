# frontend/parser.py
"""Lark grammar for poslog documents and the walk that builds values from it."""
import logging
import re
from typing import Dict, List, Optional, Tuple

from lark import Lark, Token, Tree
from lark.exceptions import UnexpectedCharacters, UnexpectedInput, UnexpectedToken

from poslog.exceptions import ParseError, PoslogError
from poslog.frontend.diagnostics import ERROR, ParseDiagnostic
from poslog.logic.syntax import (
    FALSE,
    TRUE,
    App,
    Atom,
    Const,
    Equals,
    Exists,
    Forall,
    Formula,
    GeometricType,
    Implies,
    Not,
    Signature,
    Term,
    Var,
    check_sorts,
    conjunction,
    disjunction,
    variable_index,
)
from poslog.logic.theory import THEORY_KINDS, Theory
from poslog.logic.transform import canonicalize

logger = logging.getLogger(__name__)

DOCUMENT_KINDS = ("signature", "theory", "structure", "class", "formula", "fragment")
HEADER_RE = re.compile(r"^\s*#poslog\s+(v\d+)\s+([A-Za-z]+)\s*$")

grammar = Lark(
    r"""
    document:           _item*
    formula_document:   (gtype | formula) ";"?

    _item:              _declaration | signature_block | theory | structure | universe | fragment

    _declaration:       sort_decl | rel_decl | fun_decl | const_decl
    sort_decl:          "sort" NAME ";"
    rel_decl:           "rel" (NAME | OPERATOR) ("(" (NAME ("," NAME)*)? ")")? ";"
    fun_decl:           "fun" NAME "(" NAME ("," NAME)* ")" ":" NAME ";"
    const_decl:         "const" NAME ":" NAME ";"
    signature_block:    "signature" NAME "{" _declaration* "}"

    over:               "over" NAME
    kind:               ":" NAME
    theory:             "theory" NAME over? kind? "{" axiom* "}"
    axiom:              "axiom" formula ";"

    structure:          "structure" NAME over? "{" assignment* "}"
    assignment:         (NAME | OPERATOR) EQ (braced | _element | TRUE | FALSE) ";"
    braced:             "{" (entry ("," entry)* ","?)? "}"
    entry:              (tuple | _element) (ARROW _element)?
    tuple:              "(" _element ("," _element)* ")"
    _element:           NAME | NUMBER

    universe:           "class" NAME over? "{" (NAME ("," NAME)* ","?)? "}"
    fragment:           "fragment" NAME over? "{" (formula ";")* "}"

    gtype:              "GType" "[" (formula ("," formula)* ","?)? "]"

    ?formula:           implication
    ?implication:       disjunction (ARROW implication)?
    ?disjunction:       conjunction ("|" conjunction)*
    ?conjunction:       unary ("&" unary)*
    ?unary:             "!" unary -> negation
                      | quantified
                      | primary
    quantified:         (FORALL | EXISTS) binder ("," binder)* ":" formula
    binder:             NAME ("@" NAME)?
    ?primary:           TRUE -> truth
                      | FALSE -> falsity
                      | "(" formula ")"
                      | "Or" "[" formula ("," formula)* "]" -> big_or
                      | "And" "[" formula ("," formula)* "]" -> big_and
                      | term -> bare_atom
                      | term EQ term -> equality
                      | term OPERATOR term -> infix_atom
    ?term:              NAME "(" term ("," term)* ")" -> application
                      | NAME "@" NAME -> annotated
                      | NAME -> name

    NAME:               /[A-Za-z_](?:[A-Za-z0-9_']|-(?=[A-Za-z]))*/
    NUMBER:             /[0-9]+/
    OPERATOR:           /[<>~*+^%]+/
    ARROW:              "->"
    EQ:                 "="
    TRUE:               "true"
    FALSE:              "false"
    FORALL:             "forall"
    EXISTS:             "exists"
    COMMENT:            /#[^\n]*/

    %import common.WS
    %ignore WS
    %ignore COMMENT
    """,
    parser="lalr",
    start=["document", "formula_document"],
    propagate_positions=True,
)

DECLARATIONS = ("sort_decl", "rel_decl", "fun_decl", "const_decl")
TERMINAL_NAMES = {"NAME": "a name", "NUMBER": "a number", "OPERATOR": "an operator symbol",
                  "$END": "end of input"}


def read_header(text: str) -> Optional[str]:
    for line in text.splitlines():
        if not line.strip():
            continue
        match = HEADER_RE.match(line)
        if match is None:
            return None
        if match.group(1) != "v1":
            raise ParseError([ParseDiagnostic(ERROR, 1, 1, f"Unsupported format {match.group(1)}",
                                              "use '#poslog v1 <kind>'")])
        kind = match.group(2)
        if kind not in DOCUMENT_KINDS:
            raise ParseError([ParseDiagnostic(ERROR, 1, 1, f"Unknown document kind '{kind}'",
                                              f"one of {', '.join(DOCUMENT_KINDS)}")])
        return kind
    return None


def _tokens(node: Tree, *types: str) -> List[Token]:
    return [c for c in node.children if isinstance(c, Token) and (not types or c.type in types)]


def _trees(node: Tree, *names: str) -> List[Tree]:
    return [c for c in node.children if isinstance(c, Tree) and (not names or c.data in names)]


def _describe_terminal(name: str) -> str:
    if name in TERMINAL_NAMES:
        return TERMINAL_NAMES[name]
    try:
        pattern = grammar.get_terminal(name).pattern
    except KeyError:
        return name
    return f"'{pattern.value}'" if pattern.type == "str" else name.lower()


class Parser:
    """Parses one document into a workspace.

    Top-level items are declarations (bare or in a signature block), theories,
    structures, classes and fragments; a formula document holds a single
    formula or geometric type.
    """

    def __init__(self, text: str, workspace, kind: Optional[str] = None):
        self.text = text
        self.workspace = workspace
        self.kind = kind
        self.logger = logging.getLogger(__name__)
        self._bare: Dict[str, dict] = {"sorts": [], "relations": {}, "functions": {},
                                       "constants": {}}
        self._bare_node: Optional[Tree] = None
        self._produced: List[Tuple[str, object]] = []
        self._var_sorts: Dict[str, str] = {}

    # --- positions and errors ---

    def _end_position(self) -> Tuple[int, int]:
        lines = self.text.split("\n")
        return len(lines), len(lines[-1]) + 1

    def _position(self, where) -> Tuple[int, int]:
        if isinstance(where, Token) and where.line is not None:
            return where.line, where.column
        if isinstance(where, Tree) and not where.meta.empty:
            return where.meta.line, where.meta.column
        return self._end_position()

    def _fail(self, where, message: str, hint: Optional[str] = None):
        line, column = self._position(where)
        raise ParseError([ParseDiagnostic(ERROR, line, column, message, hint)])

    def _syntax_error(self, error: UnexpectedInput) -> ParseDiagnostic:
        if isinstance(error, UnexpectedCharacters):
            return ParseDiagnostic(ERROR, error.line, error.column,
                                   f"Unexpected character '{error.char}'")
        names = getattr(error, "expected", None) or ()
        expected = sorted({_describe_terminal(name) for name in names})
        hint = f"expected {', '.join(expected)}" if expected else None
        token = getattr(error, "token", None)
        if isinstance(error, UnexpectedToken) and token.type != "$END":
            return ParseDiagnostic(ERROR, token.line, token.column, f"Unexpected '{token}'", hint)
        line, column = self._end_position()
        return ParseDiagnostic(ERROR, line, column, "Unexpected end of input", hint)

    def _syntax_tree(self, start: str) -> Tree:
        try:
            return grammar.parse(self.text, start=start)
        except UnexpectedInput as e:
            raise ParseError([self._syntax_error(e)]) from e

    # --- documents ---

    def parse_document(self):
        if self.kind == "formula":
            return self._formula_document(self._syntax_tree("formula_document"))
        for item in self._syntax_tree("document").children:
            self._item(item)
        self._flush_bare()
        return self._principal()

    def _principal(self):
        """The last item of the declared kind; a document may define several."""
        candidates = [v for k, v in self._produced if k == self.kind or self.kind is None]
        if not candidates:
            self._fail(None, f"Document declared as {self.kind} defines no {self.kind}")
        return candidates[-1]

    def _formula_document(self, tree: Tree):
        body = tree.children[0]
        signature = self._current_signature(body)
        if body.data == "gtype":
            return self._gtype(body, signature)
        return canonicalize(self._checked_formula(body, signature))

    def _item(self, item: Tree):
        if item.data in DECLARATIONS:
            if self._bare_node is None:
                self._bare_node = item
            self._declaration(item, self._bare)
            return
        self._flush_bare()
        handlers = {
            "signature_block": self._signature_block,
            "theory": self._theory,
            "structure": self._structure,
            "universe": self._class,
            "fragment": self._fragment,
        }
        handlers[item.data](item)

    # --- signatures ---

    def _declaration(self, node: Tree, table: dict):
        tokens = _tokens(node)
        if node.data == "sort_decl":
            name = tokens[0]
            if str(name) in table["sorts"]:
                self._fail(name, f"Sort '{name}' declared twice")
            table["sorts"].append(str(name))
        elif node.data == "rel_decl":
            name, sorts = tokens[0], tokens[1:]
            self._declare(table, "relations", name,
                          tuple(self._sort_ref(table, s) for s in sorts))
        elif node.data == "fun_decl":
            name, arity, result = tokens[0], tokens[1:-1], tokens[-1]
            value = (tuple(self._sort_ref(table, s) for s in arity), self._sort_ref(table, result))
            self._declare(table, "functions", name, value)
        else:
            name, sort = tokens
            self._declare(table, "constants", name, self._sort_ref(table, sort))

    def _declare(self, table, group, name: Token, value):
        taken = set(table["relations"]) | set(table["functions"]) | set(table["constants"])
        if str(name) in taken or str(name) in ("true", "false"):
            self._fail(name, f"Symbol '{name}' declared twice")
        table[group][str(name)] = value

    def _sort_ref(self, table, token: Token) -> str:
        if str(token) not in table["sorts"]:
            self._fail(token, f"Undeclared sort '{token}'")
        return str(token)

    def _build_signature(self, name: str, table: dict, where) -> Signature:
        try:
            return Signature(name, tuple(table["sorts"]), dict(table["relations"]),
                             dict(table["functions"]), dict(table["constants"]))
        except PoslogError as e:
            self._fail(where, str(e))

    def _flush_bare(self):
        if self._bare_node is None:
            return
        node = self._bare_node
        name = f"L{len(self.workspace.signatures)}" if "L" in self.workspace.signatures else "L"
        signature = self._build_signature(name, self._bare, node)
        self._register("signature", signature.name, signature, node)
        self._bare = {"sorts": [], "relations": {}, "functions": {}, "constants": {}}
        self._bare_node = None

    def _signature_block(self, node: Tree):
        name = _tokens(node, "NAME")[0]
        table = {"sorts": [], "relations": {}, "functions": {}, "constants": {}}
        for declaration in _trees(node):
            self._declaration(declaration, table)
        signature = self._build_signature(str(name), table, node)
        self._register("signature", str(name), signature, name)

    def _register(self, kind: str, name: str, value, where):
        try:
            self.workspace.register(kind, name, value)
        except PoslogError as e:
            self._fail(where, str(e))
        self._produced.append((kind, value))

    # --- resolution ---

    def _current_signature(self, where) -> Signature:
        signature = self.workspace.current_signature
        if signature is None:
            self._fail(where, "No signature in scope", "declare sorts and relations first")
        return signature

    def _over(self, node: Tree) -> Tuple[Signature, Optional[Theory]]:
        clauses = _trees(node, "over")
        if not clauses:
            return self._current_signature(node), None
        token = clauses[0].children[0]
        try:
            return self.workspace.resolve_over(str(token))
        except PoslogError as e:
            self._fail(token, str(e))

    # --- theories ---

    def _theory(self, node: Tree):
        name = _tokens(node, "NAME")[0]
        signature, _ = self._over(node)
        kind = None
        for clause in _trees(node, "kind"):
            kind_token = clause.children[0]
            if str(kind_token) not in THEORY_KINDS:
                self._fail(kind_token, f"Unknown theory kind '{kind_token}'",
                           f"one of {', '.join(THEORY_KINDS)}")
            kind = str(kind_token)
        sentences = []
        for axiom in _trees(node, "axiom"):
            sentence = self._checked_formula(axiom.children[0], signature)
            if not sentence.is_sentence:
                names = ", ".join(v.name for v in sentence.free_vars)
                self._fail(axiom, f"Axiom has free variables {names}", "quantify them")
            sentences.append((axiom, sentence))
        try:
            theory = Theory.build(str(name), signature, [s for _, s in sentences], kind)
        except PoslogError as e:
            where = sentences[0][0] if sentences else name
            self._fail(where, str(e))
        self._register("theory", str(name), theory, name)

    # --- structures ---

    def _row(self, row) -> Tuple[str, ...]:
        if isinstance(row, Tree):
            return tuple(str(t) for t in _tokens(row))
        return (str(row),)

    def _entries(self, symbol: Token, value, arrows: bool) -> List[Tree]:
        if not isinstance(value, Tree):
            self._fail(value, f"Expected '{{' after '{symbol} =' but found '{value}'")
        entries = _trees(value, "entry")
        for entry in entries:
            has_arrow = bool(_tokens(entry, "ARROW"))
            if has_arrow != arrows:
                expected = "an entry 'args -> value'" if arrows else "a tuple without '->'"
                self._fail(entry, f"Expected {expected} in '{symbol}'")
        return entries

    def _structure(self, node: Tree):
        from poslog.semantics.structures import FiniteStructure

        name = _tokens(node, "NAME")[0]
        signature, _ = self._over(node)
        carriers, relations, functions, constants = {}, {}, {}, {}
        for assignment in _trees(node, "assignment"):
            symbol, _, value = assignment.children
            text = str(symbol)
            if text in signature.sorts:
                elements = []
                for entry in self._entries(symbol, value, arrows=False):
                    if isinstance(entry.children[0], Tree):
                        self._fail(entry, f"Expected an element name in '{text}'")
                    elements.append(str(entry.children[0]))
                carriers[text] = tuple(elements)
            elif text in signature.relations:
                if not signature.relations[text]:
                    if not isinstance(value, Token) or value.type not in ("TRUE", "FALSE"):
                        self._fail(value, "Nullary relations are 'true' or 'false'")
                    relations[text] = {()} if value.type == "TRUE" else set()
                else:
                    relations[text] = {self._row(entry.children[0])
                                       for entry in self._entries(symbol, value, arrows=False)}
            elif text in signature.functions:
                functions[text] = {self._row(entry.children[0]): str(entry.children[-1])
                                   for entry in self._entries(symbol, value, arrows=True)}
            elif text in signature.constants:
                if not isinstance(value, Token) or value.type not in ("NAME", "NUMBER"):
                    self._fail(value, f"Expected an element name for constant '{text}'")
                constants[text] = str(value)
            else:
                self._fail(symbol, f"'{text}' is not a symbol of {signature.name}")
        try:
            structure = FiniteStructure(str(name), signature, carriers, relations, functions,
                                        constants)
        except PoslogError as e:
            self._fail(name, str(e))
        self._register("structure", str(name), structure, name)

    # --- classes and fragments ---

    def _class(self, node: Tree):
        from poslog.semantics.structures import UniverseClass

        name, *member_tokens = _tokens(node, "NAME")
        signature, theory = self._over(node)
        members = []
        for token in member_tokens:
            structure = self.workspace.structures.get(str(token))
            if structure is None:
                self._fail(token, f"Unknown structure '{token}'")
            members.append(structure)
        try:
            universe = UniverseClass(str(name), signature, tuple(members), theory)
        except PoslogError as e:
            self._fail(name, str(e))
        self._register("class", str(name), universe, name)

    def _fragment(self, node: Tree):
        from poslog.services.morleyisation import close_fragment

        name = _tokens(node, "NAME")[0]
        signature, _ = self._over(node)
        seed = [self._checked_formula(f, signature)
                for f in node.children if isinstance(f, Tree) and f.data != "over"]
        try:
            fragment = close_fragment(seed, signature, name=str(name))
        except PoslogError as e:
            self._fail(name, str(e))
        self._register("fragment", str(name), fragment, name)

    # --- formulas ---

    def _checked_formula(self, node, signature: Signature) -> Formula:
        self._var_sorts = (self._infer_variable_sorts(node, signature)
                           if signature.is_multi_sorted else {})
        formula = self._formula(node, signature)
        try:
            check_sorts(formula, signature)
        except PoslogError as e:
            self._fail(node, str(e))
        return formula

    def _infer_variable_sorts(self, node, signature: Signature) -> Dict[str, str]:
        """Sorts of unannotated variables from the argument slots they fill."""
        inferred: Dict[str, str] = {}
        annotated: Dict[str, str] = {}
        if not isinstance(node, Tree):
            return inferred
        for subtree in node.iter_subtrees_topdown():
            if subtree.data in ("annotated", "binder") and len(subtree.children) == 2:
                variable, sort = subtree.children
                annotated[str(variable)] = str(sort)
                continue
            if subtree.data == "application":
                symbol, args = str(subtree.children[0]), subtree.children[1:]
            elif subtree.data == "infix_atom":
                symbol, args = str(subtree.children[1]), subtree.children[::2]
            else:
                continue
            if symbol in signature.relations:
                slots = signature.relations[symbol]
            elif symbol in signature.functions:
                slots = signature.functions[symbol][0]
            else:
                continue
            for arg, slot in zip(args, slots):
                if isinstance(arg, Tree) and arg.data == "name":
                    variable = str(arg.children[0])
                    if variable_index(variable) is not None:
                        inferred.setdefault(variable, slot)
        inferred.update(annotated)
        return inferred

    def _formula(self, node, signature: Signature) -> Formula:
        kind = node.data
        parts = _trees(node)
        if kind == "implication":
            return Implies(self._formula(parts[0], signature), self._formula(parts[1], signature))
        if kind in ("disjunction", "big_or"):
            return disjunction([self._formula(p, signature) for p in parts])
        if kind in ("conjunction", "big_and"):
            return conjunction([self._formula(p, signature) for p in parts])
        if kind == "negation":
            return Not(self._formula(parts[0], signature))
        if kind == "truth":
            return TRUE
        if kind == "falsity":
            return FALSE
        if kind == "quantified":
            quantifier = Forall if node.children[0].type == "FORALL" else Exists
            variables = [self._binder(b, signature) for b in _trees(node, "binder")]
            body = self._formula(parts[-1], signature)
            for var in reversed(variables):
                body = quantifier(var, body)
            return body
        if kind == "equality":
            left, operator, right = node.children
            left, right = self._term(left, signature), self._term(right, signature)
            if left.sort != right.sort:
                self._fail(operator, f"Equality between sorts {left.sort} and {right.sort}")
            return Equals(left, right)
        if kind == "infix_atom":
            left, operator, right = node.children
            if str(operator) not in signature.relations:
                self._fail(operator, f"Expected '=' or a relation symbol but found '{operator}'")
            return Atom(str(operator), (self._term(left, signature), self._term(right, signature)))
        return self._bare_atom(parts[0], signature)

    def _bare_atom(self, term: Tree, signature: Signature) -> Formula:
        token = term.children[0]
        symbol = str(token)
        if term.data == "application" and symbol in signature.relations:
            return Atom(symbol, tuple(self._term(a, signature) for a in term.children[1:]))
        if term.data == "name" and symbol in signature.relations:
            sorting = signature.relations[symbol]
            if sorting:
                self._fail(token, f"Relation '{symbol}' expects {len(sorting)} arguments")
            return Atom(symbol, ())
        if term.data == "application" and symbol not in signature.functions:
            self._fail(token, f"Unknown symbol '{symbol}'", "declare it with 'rel'")
        self._term(term, signature)
        self._fail(token, f"Expected '=' or a relation symbol after '{symbol}'")

    def _binder(self, node: Tree, signature: Signature) -> Var:
        token, *sort = node.children
        return self._variable(token, sort[0] if sort else None, signature)

    def _variable(self, token: Token, sort_token: Optional[Token], signature: Signature) -> Var:
        index = variable_index(str(token))
        if index is None:
            self._fail(token, f"Unknown symbol '{token}'",
                       "variables are x, y, z, u, v, w with an optional numeric suffix")
        sort = None
        if sort_token is not None:
            if str(sort_token) not in signature.sorts:
                self._fail(sort_token, f"Undeclared sort '{sort_token}'")
            sort = str(sort_token)
        if sort is None:
            sort = signature.default_sort or self._var_sorts.get(str(token))
        if sort is None:
            self._fail(token, f"Cannot infer the sort of variable '{token}'",
                       f"annotate it as {token}@Sort")
        return Var(sort, index)

    def _term(self, node: Tree, signature: Signature) -> Term:
        token = node.children[0]
        symbol = str(token)
        if node.data == "application":
            if symbol not in signature.functions:
                hint = ("relations cannot appear inside terms" if symbol in signature.relations
                        else "declare it with 'fun'")
                self._fail(token, f"Unknown symbol '{symbol}'", hint)
            _, result = signature.functions[symbol]
            return App(symbol, tuple(self._term(a, signature) for a in node.children[1:]), result)
        if node.data == "name":
            if symbol in signature.constants:
                return Const(symbol, signature.constants[symbol])
            if symbol in signature.functions:
                arity, _ = signature.functions[symbol]
                self._fail(token, f"Function '{symbol}' expects {len(arity)} arguments")
            return self._variable(token, None, signature)
        return self._variable(token, node.children[1], signature)

    def _gtype(self, node: Tree, signature: Signature) -> GeometricType:
        members = [canonicalize(self._checked_formula(f, signature)) for f in _trees(node)]
        variables = set()
        for member in members:
            variables |= member.free_set
        ordered = tuple(sorted(variables, key=lambda v: v.key))
        return GeometricType(ordered, frozenset(members))


def parse_text(text: str, workspace=None, kind: Optional[str] = None):
    """Parse document text into the workspace and return its principal value.

    The kind comes from the header line when present, otherwise from the
    argument.

    Raises:
        ParseError: with positioned diagnostics
    """
    from poslog.frontend.workspace import Workspace

    workspace = workspace if workspace is not None else Workspace()
    header_kind = read_header(text)
    if header_kind is not None and kind is not None and header_kind != kind:
        raise ParseError([ParseDiagnostic(ERROR, 1, 1,
                                          f"Header declares {header_kind}, expected {kind}")])
    kind = header_kind or kind
    if kind is None:
        raise ParseError([ParseDiagnostic(ERROR, 1, 1, "Document kind is not declared",
                                          "start the file with '#poslog v1 <kind>'")])
    parser = Parser(text, workspace, kind)
    value = parser.parse_document()
    logger.debug(f"Parsed {kind} document")
    return value


def parse_formula(text: str, signature: Signature) -> Formula:
    from poslog.frontend.workspace import Workspace

    workspace = Workspace()
    workspace.register("signature", signature.name, signature)
    return parse_text(text, workspace, kind="formula")
