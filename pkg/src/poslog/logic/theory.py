# logic/theory.py
import logging
from dataclasses import dataclass
from typing import Iterable, Optional, Tuple

from poslog.exceptions import TheoryError
from poslog.logic.fragments import classify
from poslog.logic.syntax import Formula, Signature, check_sorts
from poslog.logic.transform import canonicalize

logger = logging.getLogger(__name__)

H_UNIVERSAL = "h-universal"
H_INDUCTIVE = "h-inductive"
G_INDUCTIVE = "g-inductive"
UNRESTRICTED = "unrestricted"
THEORY_KINDS = (H_UNIVERSAL, H_INDUCTIVE, G_INDUCTIVE, UNRESTRICTED)


def sentence_kind(sentence: Formula) -> str:
    """Narrowest theory kind admitting the sentence."""
    verdict = classify(sentence)
    if verdict.h_universal_basic:
        return H_UNIVERSAL
    if verdict.h_inductive_basic:
        return H_INDUCTIVE
    if verdict.g_inductive_basic:
        return G_INDUCTIVE
    return UNRESTRICTED


def infer_kind(sentences: Iterable[Formula]) -> str:
    rank = 0
    for sentence in sentences:
        rank = max(rank, THEORY_KINDS.index(sentence_kind(sentence)))
    return THEORY_KINDS[rank]


@dataclass(frozen=True)
class Theory:
    """A named set of sentences over a signature with a declared kind."""

    name: str
    signature: Signature
    sentences: Tuple[Formula, ...]
    kind: str = UNRESTRICTED

    def __post_init__(self):
        if self.kind not in THEORY_KINDS:
            raise TheoryError(f"Unknown theory kind '{self.kind}'")
        canonical = []
        for sentence in self.sentences:
            check_sorts(sentence, self.signature)
            if not sentence.is_sentence:
                raise TheoryError(f"Axiom of {self.name} has free variables: {sentence!r}")
            canonical.append(canonicalize(sentence))
        unique = {s.key: s for s in canonical}
        object.__setattr__(self, "sentences", tuple(unique[k] for k in sorted(unique)))
        allowed = THEORY_KINDS.index(self.kind)
        for sentence in self.sentences:
            needed = sentence_kind(sentence)
            if THEORY_KINDS.index(needed) > allowed:
                raise TheoryError(
                    f"Axiom {sentence!r} of {self.name} is {needed}, not {self.kind}"
                )

    @classmethod
    def build(cls, name: str, signature: Signature, sentences: Iterable[Formula],
              kind: Optional[str] = None) -> "Theory":
        sentences = tuple(sentences)
        if kind is None:
            kind = infer_kind(canonicalize(s) for s in sentences)
        return cls(name, signature, sentences, kind)
