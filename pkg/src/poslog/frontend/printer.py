# frontend/printer.py
"""Deterministic serialization of poslog values to the text format."""
import logging
from typing import List, Optional

from poslog.logic.syntax import (
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
    Term,
    Truth,
    Var,
)

logger = logging.getLogger(__name__)

FORMAT_VERSION = "v1"


def is_operator_name(name: str) -> bool:
    return bool(name) and not (name[0].isalnum() or name[0] == "_")


def format_term(term: Term, show_sorts: bool = False) -> str:
    if isinstance(term, Var):
        return f"{term.name}@{term.sort}" if show_sorts else term.name
    if isinstance(term, Const):
        return term.name
    if isinstance(term, App):
        return f"{term.function}({','.join(format_term(a, show_sorts) for a in term.args)})"
    raise TypeError(f"Not a term: {term!r}")


def _is_primary(f: Formula) -> bool:
    return isinstance(f, (Truth, Falsity, Atom, Equals, And, Or, Not))


def format_formula(f: Formula, signature: Optional[Signature] = None) -> str:
    """Render a formula; variables carry @Sort in multi-sorted signatures."""
    show_sorts = signature is not None and signature.is_multi_sorted
    return _format(f, show_sorts)


def _format(f: Formula, show_sorts: bool) -> str:
    if isinstance(f, Truth):
        return "true"
    if isinstance(f, Falsity):
        return "false"
    if isinstance(f, Atom):
        args = [format_term(a, show_sorts) for a in f.args]
        if is_operator_name(f.relation) and len(args) == 2:
            return f"{args[0]}{f.relation}{args[1]}"
        if not args:
            return f.relation
        return f"{f.relation}({','.join(args)})"
    if isinstance(f, Equals):
        return f"{format_term(f.left, show_sorts)}={format_term(f.right, show_sorts)}"
    if isinstance(f, (And, Or)):
        inner = ", ".join(_format(c, show_sorts) for c in f.children())
        return f"{type(f).__name__}[{inner}]"
    if isinstance(f, Not):
        body = _format(f.body, show_sorts)
        return f"!{body}" if _is_primary(f.body) else f"!({body})"
    if isinstance(f, Implies):
        left = _format(f.antecedent, show_sorts)
        if isinstance(f.antecedent, (Implies, Exists, Forall)):
            left = f"({left})"
        right = _format(f.consequent, show_sorts)
        return f"{left} -> {right}"
    # quantifier block: merge directly nested binders of the same kind
    kind = type(f)
    names = []
    while isinstance(f, kind):
        names.append(format_term(f.var, show_sorts))
        f = f.body
    keyword = "exists" if kind is Exists else "forall"
    return f"{keyword} {','.join(names)}: {_format(f, show_sorts)}"


def format_gtype(gtype: GeometricType, signature: Optional[Signature] = None) -> str:
    return "GType[" + ", ".join(format_formula(f, signature) for f in gtype.ordered) + "]"


def format_signature(signature: Signature) -> str:
    lines = [f"signature {signature.name} {{"]
    for sort in signature.sorts:
        lines.append(f"  sort {sort};")
    for name, sorting in signature.relations.items():
        lines.append(f"  rel {name}({','.join(sorting)});")
    for name, (arity, result) in signature.functions.items():
        lines.append(f"  fun {name}({','.join(arity)}):{result};")
    for name, sort in signature.constants.items():
        lines.append(f"  const {name}:{sort};")
    lines.append("}")
    return "\n".join(lines)


def format_theory(theory, comments: Optional[List[str]] = None) -> str:
    lines = [f"theory {theory.name} over {theory.signature.name} : {theory.kind} {{"]
    for i, sentence in enumerate(theory.sentences):
        line = f"  axiom {format_formula(sentence, theory.signature)};"
        if comments and comments[i]:
            line += f"  # {comments[i]}"
        lines.append(line)
    lines.append("}")
    return "\n".join(lines)


def _format_tuple(values) -> str:
    if len(values) == 1:
        return values[0]
    return "(" + ",".join(values) + ")"


def format_structure(structure, over: Optional[str] = None) -> str:
    signature = structure.signature
    lines = [f"structure {structure.name} over {over or signature.name} {{"]
    for sort in signature.sorts:
        lines.append(f"  {sort} = {{{', '.join(structure.carriers[sort])}}};")
    for name in signature.relations:
        if not signature.relations[name]:
            lines.append(f"  {name} = {'true' if structure.relations[name] else 'false'};")
            continue
        rows = structure.sorted_tuples(name)
        lines.append(f"  {name} = {{{', '.join(_format_tuple(r) for r in rows)}}};")
    for name in signature.functions:
        table = structure.functions[name]
        entries = [f"{_format_tuple(args)} -> {table[args]}" for args in sorted(
            table, key=structure.tuple_order)]
        lines.append(f"  {name} = {{{', '.join(entries)}}};")
    for name in signature.constants:
        lines.append(f"  {name} = {structure.constants[name]};")
    lines.append("}")
    return "\n".join(lines)


def format_class(universe) -> str:
    over = universe.theory.name if universe.theory is not None else universe.signature.name
    names = ", ".join(m.name for m in universe.members)
    return f"class {universe.name} over {over} {{ {names} }}"


def format_fragment(fragment) -> str:
    lines = [f"fragment {fragment.name} over {fragment.signature.name} {{"]
    for member in fragment.members:
        lines.append(f"  {format_formula(member, fragment.signature)};")
    lines.append("}")
    return "\n".join(lines)


def header(kind: str) -> str:
    return f"#poslog {FORMAT_VERSION} {kind}"


def serialize(value, signature: Optional[Signature] = None) -> str:
    """Self-contained document text for a parsed value.

    Theories, structures, classes and fragments are preceded by the
    declarations they depend on, so the output reparses in an empty workspace.
    Formulas and geometric types reparse over ``signature``; pass it so that
    variables of a multi-sorted signature keep their @Sort.
    """
    from poslog.logic.theory import Theory
    from poslog.semantics.structures import FiniteStructure, UniverseClass
    from poslog.services.morleyisation import Fragment

    if isinstance(value, Formula):
        return header("formula") + "\n" + format_formula(value, signature) + "\n"
    if isinstance(value, GeometricType):
        return header("formula") + "\n" + format_gtype(value, signature) + "\n"
    if isinstance(value, Signature):
        return header("signature") + "\n" + format_signature(value) + "\n"
    if isinstance(value, Theory):
        return "\n".join([header("theory"), format_signature(value.signature),
                          format_theory(value)]) + "\n"
    if isinstance(value, FiniteStructure):
        return "\n".join([header("structure"), format_signature(value.signature),
                          format_structure(value)]) + "\n"
    if isinstance(value, UniverseClass):
        parts = [header("class"), format_signature(value.signature)]
        if value.theory is not None:
            parts.append(format_theory(value.theory))
        parts.extend(format_structure(m) for m in value.members)
        parts.append(format_class(value))
        return "\n".join(parts) + "\n"
    if isinstance(value, Fragment):
        return "\n".join([header("fragment"), format_signature(value.signature),
                          format_fragment(value)]) + "\n"
    raise TypeError(f"Cannot serialize {type(value).__name__}")
