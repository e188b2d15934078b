# services/morleyisation.py
"""Geometric Morleyisation of a theory relative to a finite fragment.

Every fragment member gets a relation symbol R_i over the sorts of its free
variables, and the emitted g-inductive axioms force R_i to track the member
in every model of the extended theory.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from poslog.config import settings
from poslog.exceptions import (
    FragmentCoverageError,
    ModelError,
    ResourceCeilingError,
    TheoryError,
)
from poslog.frontend.printer import format_formula, format_signature, header
from poslog.logic.syntax import (
    FALSE,
    TRUE,
    And,
    Atom,
    Exists,
    Forall,
    Formula,
    Implies,
    Not,
    Or,
    Signature,
    check_sorts,
    conjunction,
    disjunction,
    forall_all,
    is_atomic,
)
from poslog.logic.theory import G_INDUCTIVE, Theory
from poslog.logic.transform import canonicalize, depth
from poslog.semantics.evaluation import satisfies
from poslog.semantics.homomorphisms import map_violation
from poslog.semantics.structures import FiniteStructure, Row
from poslog.semantics.tables import extension_table

logger = logging.getLogger(__name__)

CLAUSES = ("i", "ii", "iii", "iv", "v", "vi")


def normalize(f: Formula) -> Formula:
    """Rewrite ∀yψ as ¬∃y¬ψ and φ → ψ as Or[¬φ, ψ], then canonicalize."""
    return canonicalize(_eliminate(f))


def _eliminate(f: Formula) -> Formula:
    if isinstance(f, Forall):
        return Not(Exists(f.var, Not(_eliminate(f.body))))
    if isinstance(f, Implies):
        return Or((Not(_eliminate(f.antecedent)), _eliminate(f.consequent)))
    if isinstance(f, (And, Or)):
        return type(f)(tuple(_eliminate(c) for c in f.children()))
    if isinstance(f, Not):
        return Not(_eliminate(f.body))
    if isinstance(f, Exists):
        return Exists(f.var, _eliminate(f.body))
    return f


def is_universal_pattern(f: Formula) -> bool:
    """True for ¬∃y¬ψ, the shape a universal member takes after normalization."""
    return (isinstance(f, Not) and isinstance(f.body, Exists)
            and isinstance(f.body.body, Not))


@dataclass(frozen=True)
class Fragment:
    """Subformula-closed finite set of formulas with a canonical indexing."""

    name: str
    signature: Signature
    members: Tuple[Formula, ...]
    relation_names: Dict[Formula, str] = field(default_factory=dict)

    def __contains__(self, f) -> bool:
        return isinstance(f, Formula) and canonicalize(f) in self.relation_names

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)

    def index(self, f: Formula) -> int:
        return self.members.index(canonicalize(f))

    def relation(self, f: Formula) -> str:
        return self.relation_names[canonicalize(f)]

    def relation_atom(self, f: Formula) -> Atom:
        """R_f applied to the free variables of f."""
        f = canonicalize(f)
        return Atom(self.relation_names[f], f.free_vars)

    def negation(self, f: Formula) -> Optional[Formula]:
        negated = canonicalize(Not(f))
        return negated if negated in self.relation_names else None


def _relation_prefix(signature: Signature) -> str:
    prefix = "R"
    while any(s.startswith(prefix + "_") for s in signature.symbols()):
        prefix += "R"
    return prefix


def close_fragment(seed: Iterable[Formula], signature: Signature, name: str = "F",
                   ceiling: Optional[int] = None) -> Fragment:
    """Least subformula-closed set containing the seed and the negations clauses need.

    Every non-negated member gets its negation, and every conjunct of a
    conjunction member gets its negation. Members are indexed by depth then
    canonical key.

    Raises:
        SortError: when a seed formula is ill-sorted
        ResourceCeilingError: when the closure exceeds the ceiling
    """
    ceiling = ceiling if ceiling is not None else settings.POSLOG_CEILING
    pending: List[Formula] = []
    for f in seed:
        check_sorts(f, signature)
        pending.append(normalize(f))
    found = set()
    while pending:
        f = pending.pop()
        if f in found:
            continue
        found.add(f)
        if len(found) > ceiling:
            raise ResourceCeilingError(
                f"Fragment {name} exceeded the ceiling {ceiling} while closing"
            )
        for child in f.children():
            pending.append(canonicalize(child))
        if not isinstance(f, Not):
            pending.append(canonicalize(Not(f)))
        if isinstance(f, And):
            pending.extend(canonicalize(Not(c)) for c in f.children())
    members = tuple(sorted(found, key=lambda f: (depth(f), f.key)))
    prefix = _relation_prefix(signature)
    names = {f: f"{prefix}_{i}" for i, f in enumerate(members)}
    logger.debug(f"Closed fragment {name} with {len(members)} members")
    return Fragment(name, signature, members, names)


@dataclass(frozen=True)
class MorleyAxiom:
    clause: str
    member: Formula
    sentence: Formula


@dataclass(frozen=True)
class MorleyizedTheory:
    source: Theory
    fragment: Fragment
    signature: Signature
    axioms: Tuple[MorleyAxiom, ...]

    @property
    def name(self) -> str:
        return f"{self.source.name}_G"

    @property
    def theory(self) -> Theory:
        return Theory(self.name, self.signature, tuple(a.sentence for a in self.axioms),
                      G_INDUCTIVE)

    def groups(self) -> Dict[str, Tuple[MorleyAxiom, ...]]:
        return {c: tuple(a for a in self.axioms if a.clause == c) for c in CLAUSES}

    def render(self) -> str:
        """Theory text in emission order with one clause comment per axiom."""
        lines = [header("theory"), format_signature(self.signature)]
        for member in self.fragment.members:
            lines.append(f"# {self.fragment.relation(member)} := "
                         f"{format_formula(member, self.signature)}")
        lines.append(f"theory {self.name} over {self.signature.name} : {G_INDUCTIVE} {{")
        for axiom in self.axioms:
            lines.append(f"  axiom {format_formula(axiom.sentence, self.signature)};"
                         f"  # clause ({axiom.clause})")
        lines.append("}")
        return "\n".join(lines) + "\n"


def morleyize(theory: Theory, fragment: Fragment) -> MorleyizedTheory:
    """Emit the g-inductive axioms of the Morleyisation, member by member.

    Raises:
        TheoryError: when the fragment is over another signature
        FragmentCoverageError: when a sentence of the theory is not a member
    """
    if fragment.signature != theory.signature:
        raise TheoryError(
            f"Fragment {fragment.name} is over {fragment.signature.name}, "
            f"not {theory.signature.name}"
        )
    sentences = set()
    for sentence in theory.sentences:
        normal = normalize(sentence)
        if normal not in fragment.relation_names:
            raise FragmentCoverageError(
                f"Sentence {sentence!r} of {theory.name} is outside fragment {fragment.name}"
            )
        sentences.add(normal)
    extension = {
        fragment.relation(f): tuple(v.sort for v in f.free_vars) for f in fragment.members
    }
    signature = theory.signature.extend(f"{theory.signature.name}_G", extension)
    axioms: List[MorleyAxiom] = []
    for member in fragment.members:
        axioms.extend(_member_axioms(fragment, member, member in sentences))
    logger.info(
        f"Morleyized {theory.name}: {len(fragment)} new relations, {len(axioms)} axioms"
    )
    return MorleyizedTheory(theory, fragment, signature, tuple(axioms))


def _member_axioms(fragment: Fragment, f: Formula, in_theory: bool) -> List[MorleyAxiom]:
    variables = f.free_vars
    r = fragment.relation_atom(f)
    emitted = []

    def emit(clause, body):
        emitted.append(MorleyAxiom(clause, f, forall_all(variables, body)))

    if is_atomic(f):
        emit("i", Implies(f, r))
        emit("i", Implies(r, f))
    if isinstance(f, Or):
        parts = disjunction(fragment.relation_atom(c) for c in f.children())
        emit("ii", Implies(r, parts))
        emit("ii", Implies(parts, r))
    negation = fragment.negation(f)
    if negation is not None:
        r_not = fragment.relation_atom(negation)
        emit("iii", Implies(conjunction((r, r_not)), FALSE))
        emit("iii", Implies(TRUE, disjunction((r, r_not))))
    if isinstance(f, And):
        negated = [fragment.relation_atom(Not(c)) for c in f.children()]
        emit("iv", Implies(conjunction((r, disjunction(negated))), FALSE))
        emit("iv", Implies(TRUE, disjunction([r] + negated)))
    if isinstance(f, Exists):
        witness = Exists(f.var, fragment.relation_atom(f.body))
        emit("v", Implies(r, witness))
        emit("v", Implies(witness, r))
    if in_theory:
        emitted.append(MorleyAxiom("vi", f, r))
    return emitted


def fragment_extension(structure: FiniteStructure, f: Formula) -> List[Row]:
    return extension_table(structure, f.free_vars).satisfying_rows(f)


def expand(structure: FiniteStructure, morleyized: MorleyizedTheory) -> FiniteStructure:
    """Interpret every R_φ as the extension of φ in the structure.

    Raises:
        ModelError: when the structure fails a sentence of the source theory,
            or the expansion fails an emitted axiom
    """
    for sentence in morleyized.source.sentences:
        if not satisfies(structure, sentence):
            raise ModelError(
                f"{structure.name} does not satisfy axiom {sentence!r} of "
                f"{morleyized.source.name}"
            )
    fragment = morleyized.fragment
    relations = {
        fragment.relation(f): fragment_extension(structure, f) for f in fragment.members
    }
    expanded = structure.expand(morleyized.signature, relations, name=f"{structure.name}_G")
    for axiom in morleyized.axioms:
        if not satisfies(expanded, axiom.sentence):
            logger.error(f"Expansion of {structure.name} fails clause ({axiom.clause}) axiom "
                         f"{axiom.sentence!r}")
            raise ModelError(
                f"Expansion of {structure.name} fails {axiom.sentence!r}"
            )
    return expanded


@dataclass(frozen=True)
class AxiomViolation:
    clause: str
    sentence: Formula
    row: Row


@dataclass(frozen=True)
class PointwiseMismatch:
    case: str
    member: Formula
    row: Row
    relation_holds: bool


@dataclass(frozen=True)
class ReductReport:
    structure: str
    axiom_violations: Tuple[AxiomViolation, ...]
    mismatches: Tuple[PointwiseMismatch, ...]
    failed_sentences: Tuple[Formula, ...]
    cases_checked: Dict[str, int]

    @property
    def passed(self) -> bool:
        return not (self.axiom_violations or self.mismatches or self.failed_sentences)


def member_case(f: Formula) -> str:
    """Induction case of a fragment member by its head connective."""
    if is_atomic(f):
        return "atomic"
    if isinstance(f, Or):
        return "or"
    if isinstance(f, And):
        return "and"
    if isinstance(f, Exists):
        return "exists"
    if is_universal_pattern(f):
        return "forall"
    return "not"


def _axiom_violation(structure: FiniteStructure, axiom: MorleyAxiom) -> Optional[AxiomViolation]:
    variables = []
    body = axiom.sentence
    while isinstance(body, Forall):
        variables.append(body.var)
        body = body.body
    table = extension_table(structure, variables)
    failing = table.full ^ table.extension(body)
    if not failing:
        return None
    index = (failing & -failing).bit_length() - 1
    return AxiomViolation(axiom.clause, axiom.sentence, table.rows[index])


def reduct_check(structure: FiniteStructure, morleyized: MorleyizedTheory) -> ReductReport:
    """Check the axioms, then R_φ(a) against φ(a) in the reduct, then the source theory."""
    if structure.signature != morleyized.signature:
        raise ModelError(
            f"{structure.name} is over {structure.signature.name}, "
            f"not {morleyized.signature.name}"
        )
    violations = []
    for axiom in morleyized.axioms:
        violation = _axiom_violation(structure, axiom)
        if violation is not None:
            logger.info(f"{structure.name} violates clause ({axiom.clause}) at {violation.row}")
            violations.append(violation)
    reduct = structure.reduct(morleyized.source.signature, name=f"{structure.name}_L")
    fragment = morleyized.fragment
    mismatches = []
    cases: Dict[str, int] = {}
    for member in fragment.members:
        case = member_case(member)
        table = extension_table(reduct, member.free_vars)
        truth = table.extension(member)
        name = fragment.relation(member)
        for i, row in enumerate(table.rows):
            cases[case] = cases.get(case, 0) + 1
            related = structure.holds(name, row)
            if related != bool((truth >> i) & 1):
                mismatches.append(PointwiseMismatch(case, member, row, related))
    failed = tuple(s for s in morleyized.source.sentences if not satisfies(reduct, s))
    return ReductReport(structure.name, tuple(violations), tuple(mismatches), failed,
                        dict(sorted(cases.items())))


@dataclass(frozen=True)
class FunctorVerdict:
    expansion_homomorphism: bool
    fragment_elementary: bool
    failing_member: Optional[Formula] = None

    @property
    def agree(self) -> bool:
        return self.expansion_homomorphism == self.fragment_elementary


def preserves_fragment(maps, source: FiniteStructure, target: FiniteStructure,
                       fragment: Fragment) -> Optional[Formula]:
    """First fragment member whose truth the map fails to carry over, or None."""
    for member in fragment.members:
        sorts = [v.sort for v in member.free_vars]
        target_table = extension_table(target, member.free_vars)
        for row in fragment_extension(source, member):
            image = tuple(maps[s][e] for s, e in zip(sorts, row))
            if not target_table.holds(member, image):
                return member
    return None


def functor_check(maps, source: FiniteStructure, target: FiniteStructure,
                  morleyized: MorleyizedTheory,
                  expansions: Optional[Dict[str, FiniteStructure]] = None) -> FunctorVerdict:
    """Compare the two sides of the model-category correspondence for one sorted map.

    One side asks whether the map is a homomorphism between the expansions,
    the other whether it is a homomorphism preserving every fragment member.
    ``expansions`` maps structure names to already expanded structures.
    """
    expansions = expansions if expansions is not None else {}
    expanded_source = expansions.get(source.name) or expand(source, morleyized)
    expanded_target = expansions.get(target.name) or expand(target, morleyized)
    lg_side = map_violation(expanded_source, expanded_target, maps) is None
    failing = None
    if map_violation(source, target, maps) is not None:
        fragment_side = False
    else:
        failing = preserves_fragment(maps, source, target, morleyized.fragment)
        fragment_side = failing is None
    verdict = FunctorVerdict(lg_side, fragment_side, failing)
    if not verdict.agree:
        logger.warning(
            f"Functor sides disagree on a map {source.name} -> {target.name}: "
            f"expansion hom {lg_side}, fragment-elementary {fragment_side}"
        )
    return verdict


def seeded_fragment(theory: Theory, seed: Sequence[Formula] = (), name: Optional[str] = None) -> Fragment:
    """Close the seed together with the sentences of the theory."""
    return close_fragment(list(seed) + list(theory.sentences), theory.signature,
                          name=name or f"F_{theory.name}")
