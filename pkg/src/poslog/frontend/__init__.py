from poslog.frontend.diagnostics import ParseDiagnostic
from poslog.frontend.parser import parse_formula, parse_text
from poslog.frontend.printer import format_formula, serialize
from poslog.frontend.workspace import SourceDocument, Workspace, parse
