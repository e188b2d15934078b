# controller/command_controller.py
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from poslog.config import settings
from poslog.config.run_config import RunConfig, resolve_path
from poslog.exceptions import ConfigError, PoslogError
from poslog.frontend.parser import parse_formula, read_header
from poslog.frontend.workspace import Workspace
from poslog.logic.enumeration import FormulaEnumerator
from poslog.logic.fragments import classify
from poslog.logic.syntax import Formula, canonical_variables
from poslog.logic.theory import Theory
from poslog.semantics.closedness import continue_to_pec, is_pec
from poslog.semantics.homomorphisms import is_isomorphic
from poslog.semantics.structures import FiniteStructure, UniverseClass
from poslog.services import reports
from poslog.services.check_suite import CheckSuiteService
from poslog.services.forcing import (
    ForcingContext,
    back_and_forth,
    forces,
    is_existential,
    is_generic,
)
from poslog.services.geometric import dnf
from poslog.services.morleyisation import MorleyizedTheory, expand, morleyize, reduct_check
from poslog.services.type_spaces import (
    pmc_check,
    resultant,
    spectral_complement_cover,
    specialization_graph,
    type_space,
)

logger = logging.getLogger(__name__)

Outcome = Tuple[int, str]

# signature used for bare formula commands when no theory is given
DEFAULT_THEORY = "graph.plt"


class CommandController:
    """Runs one CLI command over the services and renders its report.

    Every command returns ``(exit_code, output)``: 0 when the report passed,
    1 when it records a semantic failure.
    """

    def __init__(self, config: RunConfig):
        self.config = config
        self.logger = logging.getLogger(__name__)
        self.workspace = Workspace()
        self._theory: Optional[Theory] = None
        self._universe: Optional[UniverseClass] = None
        self._fragment = None
        self._loaded = False
        config.apply()

    # --- inputs ---

    def _load(self):
        if self._loaded:
            return
        self._loaded = True
        if self.config.theory_path is not None:
            self._theory = self.workspace.load(self.config.theory_path)
        elif self.config.class_path is not None or self.config.fragment_path is not None:
            self._load_corpus_theories()
        if self.config.class_path is not None:
            self._universe = self.workspace.load(self.config.class_path)
        if self.config.fragment_path is not None:
            self._fragment = self.workspace.load(self.config.fragment_path)

    def _load_corpus_theories(self):
        # classes and fragments name their theory in an 'over' clause
        for path in sorted(Path(settings.CORPUS_DIR).glob("*.plt")):
            text = path.read_text(encoding="utf-8")
            if read_header(text) in ("theory", "signature"):
                self.logger.debug(f"No theory given; registering {path.name}")
                self.workspace.load(path)

    @property
    def theory(self) -> Optional[Theory]:
        self._load()
        if self._theory is None and self._universe is not None:
            return self._universe.theory
        return self._theory

    @property
    def universe(self) -> UniverseClass:
        self._load()
        if self._universe is None:
            raise ConfigError("This command needs --class")
        return self._universe

    @property
    def signature(self):
        self._load()
        if self._universe is not None:
            return self._universe.signature
        if self._theory is not None:
            return self._theory.signature
        if self._fragment is not None:
            return self._fragment.signature
        self.logger.info(f"No theory given; reading formulas over {DEFAULT_THEORY}")
        self._theory = self.workspace.load(resolve_path(DEFAULT_THEORY))
        return self._theory.signature

    def _formula(self, text: str) -> Formula:
        return parse_formula(text, self.signature)

    def _variables(self, default: int):
        count = self.config.variables if self.config.variables is not None else default
        sort = self.signature.default_sort
        if sort is None:
            raise ConfigError("Type spaces over a multi-sorted signature need explicit sorts")
        return canonical_variables((sort,) * count)

    def _enumerator(self) -> FormulaEnumerator:
        return FormulaEnumerator(self.signature, self.config.width_cap, self.config.ceiling)

    def _member(self, name: str) -> FiniteStructure:
        return self.universe.member(name)

    def _emit(self, data: Dict[str, Any], text: Optional[str] = None, graph=None) -> Outcome:
        if self.config.output_format == "text" and text is not None:
            output = text
        else:
            output = reports.render(data, self.config.output_format, graph)
        return (0 if data["passed"] else 1), output

    # --- formulas ---

    def classify(self, text: str) -> Outcome:
        f = self._formula(text)
        verdict = classify(f, self.signature)
        data = reports.report("classify", True, formula=reports.formula_text(f, self.signature),
                              headline=verdict.headline, fragments=list(verdict.flags()))
        return self._emit(data, text=verdict.headline)

    def dnf(self, text: str) -> Outcome:
        f = self._formula(text)
        normal = dnf(f, self.config.dnf_ceiling)
        rendered = reports.formula_text(normal.formula, self.signature)
        data = reports.report("dnf", True, formula=reports.formula_text(f, self.signature),
                              normal=rendered,
                              disjuncts=reports.formulas_text(normal.disjuncts, self.signature))
        return self._emit(data, text=rendered)

    # --- type spaces ---

    def _space(self, default_variables: int, variables=None):
        variables = variables if variables is not None else self._variables(default_variables)
        return type_space(self.universe, variables, self.config.depth, self.theory,
                          self._enumerator())

    def typespace(self) -> Outcome:
        space = self._space(1)
        points = []
        for i, t in enumerate(space.types):
            points.append({
                "point": i,
                "realized_by": [f"{m.name}{tuple(row)}" for m, row in space.realizations[i]],
                "formulas": len(t.formulas),
            })
        graph = specialization_graph(space)
        data = reports.report("typespace", True, variables=[v.name for v in space.variables],
                              depth=space.depth, supply=len(space.supply), points=points,
                              nested=[list(edge) for edge in sorted(graph.edges())])
        return self._emit(data, graph=graph)

    def resultant(self, text: str) -> Outcome:
        f = self._formula(text)
        free = f.free_vars
        context = self._variables(len(free))
        if not f.free_set <= set(context):
            context = free
        found = resultant(self.universe, f, self.config.depth, context, self._enumerator())
        space = self._space(len(context), context)
        cover = spectral_complement_cover(f, space)
        data = reports.report(
            "resultant", not cover.overlap,
            formula=reports.formula_text(f, self.signature), depth=self.config.depth,
            resultant=reports.formulas_text(found, self.signature),
            complement=reports.points_text(cover.complement),
            status=cover.status, uncovered=reports.points_text(cover.uncovered),
        )
        return self._emit(data)

    def pmc(self) -> Outcome:
        space = self._space(2)
        result = pmc_check(space)
        assignment = {reports.formula_text(k, self.signature): reports.formula_text(v, self.signature)
                      for k, v in result.assignment.items()}
        data = reports.report("pmc", result.total, depth=result.depth, assignment=assignment,
                              without_complement=reports.formulas_text(result.failures,
                                                                       self.signature))
        return self._emit(data)

    def pec(self) -> Outcome:
        members = []
        for member in self.universe.members:
            verdict = is_pec(member, self.universe)
            entry: Dict[str, Any] = {"structure": member.name, "pec": verdict.holds}
            if verdict.counterexample is not None:
                entry["counterexample"] = {"target": verdict.counterexample.target.name,
                                           "maps": verdict.counterexample.as_dict()}
            try:
                entry["continuation"] = continue_to_pec(member, self.universe).target.name
            except PoslogError as e:
                self.logger.warning(f"{member.name}: {str(e)}")
                entry["continuation"] = None
            members.append(entry)
        data = reports.report("pec", any(m["pec"] for m in members), members=members)
        return self._emit(data)

    # --- Morleyisation ---

    def _morleyized(self) -> MorleyizedTheory:
        self._load()
        if self._theory is None or self._fragment is None:
            raise ConfigError("Morleyisation needs --theory and --fragment")
        return morleyize(self._theory, self._fragment)

    def morleyize(self, output: Optional[str] = None) -> Outcome:
        morleyized = self._morleyized()
        text = morleyized.render()
        data = reports.report("morleyize", True, theory=morleyized.name,
                              relations=len(morleyized.fragment),
                              axioms={clause: len(group)
                                      for clause, group in morleyized.groups().items()})
        if output is None:
            if self.config.output_format == "text":
                return 0, text
            data["text"] = text
            return self._emit(data)
        try:
            Path(output).write_text(text, encoding="utf-8")
        except OSError as e:
            raise ConfigError(f"Cannot write {output}: {str(e)}") from e
        self.logger.info(f"Wrote {morleyized.name} to {output}")
        data["output"] = output
        return self._emit(data)

    def verify_morley(self, structure: str) -> Outcome:
        """Check a structure against the Morleyized theory.

        A class member name is expanded first; a structure file is read as an
        expansion already.
        """
        morleyized = self._morleyized()
        candidate = self._expanded_structure(structure, morleyized)
        result = reduct_check(candidate, morleyized)
        sig = morleyized.signature
        data = reports.report(
            "verify-morley", result.passed, structure=result.structure,
            axiom_violations=[{"clause": v.clause,
                               "sentence": reports.formula_text(v.sentence, sig),
                               "row": reports.row_text(v.row)}
                              for v in result.axiom_violations],
            mismatches=[{"case": m.case, "member": reports.formula_text(m.member, sig),
                         "row": reports.row_text(m.row), "relation_holds": m.relation_holds}
                        for m in result.mismatches],
            failed_sentences=reports.formulas_text(result.failed_sentences, sig),
            cases=result.cases_checked,
        )
        return self._emit(data)

    def _expanded_structure(self, structure: str, morleyized: MorleyizedTheory) -> FiniteStructure:
        if self._universe is not None and structure in {m.name for m in self._universe.members}:
            return expand(self._universe.member(structure), morleyized)
        path = resolve_path(structure)
        return Workspace().load(path, kind="structure")

    # --- forcing ---

    def _context(self, variables) -> ForcingContext:
        return ForcingContext(self.theory, self.universe, variables, self.config.depth,
                              self.config.existential_member,
                              existential_depth=self.config.depth,
                              enumerator=self._enumerator())

    def _selected(self, names: Sequence[str]) -> List[FiniteStructure]:
        if not names:
            return list(self.universe.members)
        return [self._member(n) for n in names]

    def forcing_check(self, structure: str, text: str, row: Sequence[str]) -> Outcome:
        member = self._member(structure)
        f = self._formula(text)
        variables = self._variables(len(row))
        if self.config.variables is not None and self.config.variables != len(row):
            raise ConfigError(f"--variables {self.config.variables} does not match "
                              f"a tuple of length {len(row)}")
        ctx = self._context(variables)
        forced = forces(member, f, tuple(row), ctx)
        data = reports.report(
            "forcing-check", forced, structure=member.name, row=list(row),
            formula=reports.formula_text(f, self.signature), depth=ctx.depth,
            extensions=reports.points_text(ctx.extensions(member, tuple(row))),
            points=reports.points_text(ctx.points(f)),
            existential_member=ctx.existential.name if ctx.existential is not None else None,
        )
        return self._emit(data)

    def forcing_generic(self, names: Sequence[str]) -> Outcome:
        ctx = self._context(self._variables(1))
        members = []
        for member in self._selected(names):
            result = is_generic(member, ctx)
            entry = {"structure": member.name, "generic": result.holds,
                     "checked": result.checked, "failed": result.failed}
            if result.first_failure is not None:
                f, row = result.first_failure
                entry["first_failure"] = {"formula": reports.formula_text(f, self.signature),
                                          "row": reports.row_text(row)}
            members.append(entry)
        data = reports.report("forcing-generic", all(m["generic"] for m in members),
                              depth=ctx.depth, width_cap=self.config.width_cap,
                              members=members)
        return self._emit(data)

    def forcing_existential(self, names: Sequence[str]) -> Outcome:
        members = []
        for member in self._selected(names):
            verdict = is_existential(member, self.universe, self.config.depth)
            entry: Dict[str, Any] = {"structure": member.name, "existential": verdict.holds}
            counterexample = verdict.counterexample
            if counterexample is not None:
                entry["counterexample"] = {
                    "partial_type": reports.formula_text(counterexample.partial_type,
                                                         self.signature),
                    "parameters": reports.row_text(counterexample.parameters),
                    "target": counterexample.target.name,
                    "realization": reports.row_text(counterexample.realization),
                }
            members.append(entry)
        data = reports.report("forcing-existential", all(m["existential"] for m in members),
                              depth=self.config.depth, members=members)
        return self._emit(data)

    def karp(self, first: str, second: str) -> Outcome:
        a, b = self._member(first), self._member(second)
        system = back_and_forth(a, b, self.config.depth)
        data = reports.report("karp", system.holds, first=a.name, second=b.name,
                              depth=system.depth, length=system.length, pairs=system.pairs(),
                              isomorphic=is_isomorphic(a, b))
        if system.failure is not None:
            element = system.failure.element
            data["failure"] = {"direction": system.failure.direction,
                               "element": list(element) if element is not None else None}
        return self._emit(data)

    # --- suites ---

    def check_suite(self, names: Optional[Sequence[str]] = None,
                    config_path: Optional[str] = None) -> Outcome:
        service = CheckSuiteService(config_path or settings.SUITE_CONFIG_PATH)
        data = service.run(list(names) if names else None)
        return self._emit(data)
