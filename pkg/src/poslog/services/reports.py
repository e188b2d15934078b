# services/reports.py
"""Versioned report dictionaries and their JSON, text and DOT renderings.

Formulas inside reports are printed in the text format, so witnesses can be
pasted back into a .plt file.
"""
import json
import logging
from typing import Any, Dict, Iterable, List, Optional

import networkx as nx

from poslog.frontend.printer import format_formula, format_gtype
from poslog.logic.syntax import Formula, GeometricType, Signature

logger = logging.getLogger(__name__)

REPORT_VERSION = 1
FORMATS = ("text", "json", "dot")


def report(kind: str, passed: bool, **payload) -> Dict[str, Any]:
    """Build a report dictionary; every report carries its version, kind and verdict."""
    result = {"report_v": REPORT_VERSION, "kind": kind, "passed": bool(passed)}
    result.update(payload)
    return result


def formula_text(f: Optional[Formula], signature: Optional[Signature] = None) -> Optional[str]:
    if f is None:
        return None
    return format_formula(f, signature)


def formulas_text(formulas: Iterable[Formula], signature: Optional[Signature] = None) -> List[str]:
    return [format_formula(f, signature) for f in formulas]


def gtype_text(gtype: GeometricType, signature: Optional[Signature] = None) -> str:
    return format_gtype(gtype, signature)


def row_text(row) -> List[str]:
    return [str(e) for e in row]


def points_text(points) -> List[int]:
    return sorted(points)


def dumps(data: Dict[str, Any]) -> str:
    """Deterministic JSON: sorted keys, two-space indent."""
    return json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False)


def render_text(data: Dict[str, Any], indent: int = 0) -> str:
    """Plain key/value rendering with keys in sorted order."""
    lines = []
    pad = "  " * indent
    for key in sorted(data):
        value = data[key]
        if isinstance(value, dict):
            lines.append(f"{pad}{key}:")
            if value:
                lines.append(render_text(value, indent + 1))
        elif isinstance(value, list) and value and isinstance(value[0], dict):
            lines.append(f"{pad}{key}:")
            for item in value:
                lines.append(f"{pad}  -")
                lines.append(render_text(item, indent + 2))
        elif isinstance(value, list):
            lines.append(f"{pad}{key}: {', '.join(str(v) for v in value) if value else '-'}")
        else:
            lines.append(f"{pad}{key}: {value}")
    return "\n".join(lines)


def to_dot(graph: nx.DiGraph, name: str = "poslog") -> str:
    """DOT source of a graph, nodes labelled from their 'label' attribute."""
    copy = nx.DiGraph(name=name)
    for node, data in sorted(graph.nodes(data=True)):
        label = data.get("label", str(node))
        copy.add_node(str(node), label=json.dumps(str(label)))
    for source, target in sorted(graph.edges()):
        copy.add_edge(str(source), str(target))
    return nx.nx_pydot.to_pydot(copy).to_string()


def render(data: Dict[str, Any], output_format: str = "text",
           graph: Optional[nx.DiGraph] = None) -> str:
    if output_format == "json":
        return dumps(data)
    if output_format == "dot":
        if graph is None:
            logger.warning(f"Report kind {data.get('kind')} has no graph; printing JSON")
            return dumps(data)
        return to_dot(graph, name=str(data.get("kind", "poslog")).replace("-", "_"))
    return render_text(data)
