# frontend/workspace.py
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional, Tuple

from poslog.exceptions import ParseError, PoslogError
from poslog.frontend.diagnostics import ERROR, ParseDiagnostic
from poslog.logic.syntax import Signature
from poslog.logic.theory import Theory

logger = logging.getLogger(__name__)

EXTENSION_KINDS = {
    ".pls": "structure",
    ".plt": "theory",
    ".plf": "formula",
}


class Workspace:
    """Named signatures, theories, structures, classes and fragments.

    Names are unique per kind. Later documents may refer to anything an
    earlier document defined.
    """

    def __init__(self):
        self.logger = logging.getLogger(__name__)
        self.signatures: Dict[str, Signature] = {}
        self.theories: Dict[str, Theory] = {}
        self.structures: Dict[str, object] = {}
        self.classes: Dict[str, object] = {}
        self.fragments: Dict[str, object] = {}
        self.current_signature: Optional[Signature] = None

    def _registry(self, kind: str) -> Dict[str, object]:
        registries = {
            "signature": self.signatures,
            "theory": self.theories,
            "structure": self.structures,
            "class": self.classes,
            "fragment": self.fragments,
        }
        if kind not in registries:
            raise PoslogError(f"Unknown workspace kind '{kind}'")
        return registries[kind]

    def register(self, kind: str, name: str, value):
        registry = self._registry(kind)
        existing = registry.get(name)
        if existing is not None and existing is not value:
            if kind == "signature" and existing == value:
                return
            raise PoslogError(f"{kind.capitalize()} '{name}' is already defined")
        registry[name] = value
        if kind == "signature":
            self.current_signature = value
        elif kind == "theory":
            self.current_signature = value.signature
            self.signatures.setdefault(value.signature.name, value.signature)
        self.logger.debug(f"Registered {kind} {name}")

    def get(self, kind: str, name: str):
        value = self._registry(kind).get(name)
        if value is None:
            raise PoslogError(f"Unknown {kind} '{name}'")
        return value

    def resolve_over(self, name: str) -> Tuple[Signature, Optional[Theory]]:
        """Resolve the target of an 'over' clause to a signature and an optional theory."""
        if name in self.theories:
            theory = self.theories[name]
            return theory.signature, theory
        if name in self.signatures:
            return self.signatures[name], None
        raise PoslogError(f"'{name}' is neither a signature nor a theory")

    def load(self, path, kind: Optional[str] = None):
        return parse(SourceDocument.from_path(path, kind), self)

    def __repr__(self):
        return (f"Workspace(signatures={list(self.signatures)}, theories={list(self.theories)}, "
                f"structures={list(self.structures)}, classes={list(self.classes)}, "
                f"fragments={list(self.fragments)})")


@dataclass(frozen=True)
class SourceDocument:
    text: str
    kind: Optional[str] = None
    path: Optional[str] = None

    @classmethod
    def from_path(cls, path, kind: Optional[str] = None) -> "SourceDocument":
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            raise ParseError([ParseDiagnostic(ERROR, 1, 1, f"Cannot read {path}: {e}")]) from e
        from poslog.frontend.parser import read_header

        # a header line decides; the extension only covers headerless files
        if kind is None and read_header(text) is None:
            kind = EXTENSION_KINDS.get(path.suffix)
        return cls(text, kind, str(path))


def parse(document: SourceDocument, workspace: Optional[Workspace] = None):
    """Parse a document into the workspace and return its principal value.

    Raises:
        ParseError: diagnostics carry the path of the document when known
    """
    from poslog.frontend.parser import parse_text

    workspace = workspace if workspace is not None else Workspace()
    try:
        return parse_text(document.text, workspace, document.kind)
    except ParseError as e:
        if document.path:
            logger.error(f"Failed to parse {document.path}: {e}")
        raise
