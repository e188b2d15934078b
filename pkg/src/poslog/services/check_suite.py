# services/check_suite.py
import itertools
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from poslog.config import settings
from poslog.exceptions import ConfigError, PoslogError
from poslog.frontend.parser import parse_formula
from poslog.frontend.workspace import Workspace
from poslog.logic.enumeration import FormulaEnumerator
from poslog.logic.fragments import is_normal_geometric
from poslog.logic.syntax import Exists, Forall, GeometricType, canonical_variables
from poslog.logic.theory import Theory
from poslog.logic.transform import canonicalize, subformulas
from poslog.semantics.closedness import pec_members
from poslog.semantics.homomorphisms import all_sorted_maps, is_isomorphic, iter_homomorphisms
from poslog.semantics.structures import UniverseClass
from poslog.semantics.tables import extension_table
from poslog.services import reports
from poslog.services.forcing import (
    ForcingContext,
    back_and_forth,
    is_existential,
    is_generic,
    pecte_check,
    stability_check,
)
from poslog.services.geometric import (
    dnf,
    geo_complement,
    open_sets_geometric,
    pp_supply,
    star_map,
    typgeo_check,
)
from poslog.services.morleyisation import expand, functor_check, morleyize, reduct_check
from poslog.services.type_spaces import (
    basic_set_algebra,
    constructible_resultant,
    hausdorff_witness,
    pmc_check,
    projection_check,
    spectral_complement_cover,
    type_space,
)

logger = logging.getLogger(__name__)


def is_quantifier_free(f) -> bool:
    return not any(isinstance(s, (Exists, Forall)) for s in subformulas(f))


class CheckSuiteService:
    """Runs the enabled invariant suites over the shipped corpus.

    Suites and their parameters come from a JSON file of the form
    ``{"suites": {name: {"enabled": bool, ...}}}``.
    """

    SUITES = (
        "constructible_resultant",
        "dnf_soundness",
        "forcing",
        "functor",
        "geo_complement",
        "hausdorff",
        "karp",
        "morley_roundtrip",
        "pmc",
        "spectral_complement",
        "topology",
        "typgeo",
    )

    # connectives whose forcing step must agree at an existential member
    BOOLEAN_CASES = ("atomic", "and", "not")

    def __init__(self, config_path: Optional[str] = None, corpus_dir: Optional[str] = None):
        self.logger = logging.getLogger(__name__)
        self.config_path = config_path or settings.SUITE_CONFIG_PATH
        self.corpus_dir = Path(corpus_dir or settings.CORPUS_DIR)
        self._load_suite_config()

    def _load_suite_config(self):
        """Load suite configuration from the configured JSON file"""
        if not os.path.exists(self.config_path):
            raise ConfigError(f"Suite config file not found at: {self.config_path}")

        try:
            with open(self.config_path, "r", encoding="utf-8") as f:
                config = json.load(f)
        except (OSError, ValueError) as e:
            raise ConfigError(f"Failed to load suite config: {str(e)}") from e

        suites = config.get("suites") if isinstance(config, dict) else None
        if not isinstance(suites, dict):
            raise ConfigError(f"Suite config {self.config_path} has no 'suites' table")
        unknown = sorted(set(suites) - set(self.SUITES))
        if unknown:
            raise ConfigError(f"Unknown suites in {self.config_path}: {', '.join(unknown)}")
        self.suites: Dict[str, Dict[str, Any]] = suites
        self.logger.info(f"Loaded suite config from {self.config_path}")

    def enabled_suites(self) -> List[str]:
        return sorted(name for name, params in self.suites.items() if params.get("enabled", False))

    # --- corpus ---

    def load(self, theory_file: str, class_file: str,
             fragment_file: Optional[str] = None) -> Tuple[Theory, UniverseClass, Any]:
        """Load a theory, a class over it and optionally a fragment into a fresh workspace."""
        workspace = Workspace()
        theory = workspace.load(self.corpus_dir / theory_file)
        universe = workspace.load(self.corpus_dir / class_file)
        fragment = workspace.load(self.corpus_dir / fragment_file) if fragment_file else None
        return theory, universe, fragment

    def _space(self, params: Dict[str, Any]):
        theory, universe, _ = self.load(params["theory"], params["class"])
        variables = canonical_variables((universe.signature.default_sort,) * params["variables"])
        return theory, universe, type_space(universe, variables, params["depth"], theory)

    # --- running ---

    def run(self, names: Optional[List[str]] = None) -> Dict[str, Any]:
        """Run the named suites, or every enabled one, and assemble one report."""
        names = sorted(names) if names else self.enabled_suites()
        for name in names:
            if name not in self.SUITES:
                raise ConfigError(f"Unknown suite '{name}'")
        with ThreadPoolExecutor(max_workers=settings.MAX_WORKERS) as executor:
            results = list(executor.map(self.run_suite, names))
        suites = dict(zip(names, results))
        passed = all(r["passed"] for r in results)
        self.logger.info(f"Check suite finished: "
                         f"{sum(r['passed'] for r in results)}/{len(results)} suites passed")
        return reports.report("check-suite", passed, suites=suites)

    def run_suite(self, name: str) -> Dict[str, Any]:
        params = self.suites.get(name, {})
        self.logger.info(f"Running suite {name}")
        try:
            result = getattr(self, f"_suite_{name}")(params)
        except PoslogError as e:
            self.logger.error(f"Suite {name} failed: {str(e)}", exc_info=True)
            result = reports.report(name, False, error=str(e))
        if not result["passed"]:
            self.logger.warning(f"Suite {name} did not pass")
        return result

    # --- suites ---

    def _suite_dnf_soundness(self, params):
        _, universe, _ = self.load(params["theory"], params["class"])
        enumerator = FormulaEnumerator(universe.signature)
        sort = universe.signature.default_sort
        failures, checked = [], 0
        for context in params["contexts"]:
            variables = canonical_variables((sort,) * context["variables"])
            tables = [extension_table(m, variables) for m in universe.members]
            for f in enumerator.positive(variables, context["depth"]):
                normal = dnf(f)
                g = normal.formula
                checked += 1
                if not is_normal_geometric(g):
                    failures.append({"formula": reports.formula_text(f), "reason": "not normal"})
                    continue
                for table in tables:
                    if table.extension(f) != table.extension(g):
                        failures.append({"formula": reports.formula_text(f),
                                         "structure": table.structure.name})
                        break
        return reports.report("dnf_soundness", not failures, checked=checked, failures=failures)

    def _suite_spectral_complement(self, params):
        _, _, space = self._space(params)
        covered, uncovered, overlapping = 0, [], []
        for f in space.supply:
            cover = spectral_complement_cover(f, space)
            if cover.overlap:
                overlapping.append(reports.formula_text(f))
            if cover.covered:
                covered += 1
            else:
                uncovered.append({"formula": reports.formula_text(f),
                                  "quantifier_free": is_quantifier_free(f),
                                  "points": reports.points_text(cover.uncovered)})
        quantifier_free_gaps = [u for u in uncovered if u["quantifier_free"]]
        return reports.report("spectral_complement",
                              not overlapping and not quantifier_free_gaps,
                              depth=space.depth, covered=covered,
                              required="quantifier-free supply",
                              quantified_gaps=len(uncovered) - len(quantifier_free_gaps),
                              uncovered=uncovered, overlapping=overlapping)

    def _suite_hausdorff(self, params):
        spaces, failures = [], []
        for space_params in params["spaces"]:
            _, universe, space = self._space(space_params)
            pairs = 0
            for p, q in itertools.combinations(space.types, 2):
                pairs += 1
                witness = hausdorff_witness(p, q)
                if (witness.formula in p.formulas) == (witness.formula in q.formulas):
                    failures.append({"class": universe.name, "first": p.provenance,
                                     "second": q.provenance})
            spaces.append({"class": universe.name, "points": len(space), "pairs": pairs})
        return reports.report("hausdorff", not failures, spaces=spaces, failures=failures)

    def _suite_pmc(self, params):
        _, universe, space = self._space(params)
        pmc = pmc_check(space)
        mismatched = []
        for phi_text, psi_text in sorted(params.get("expected", {}).items()):
            phi = parse_formula(phi_text, universe.signature)
            psi = parse_formula(psi_text, universe.signature)
            if pmc.assignment.get(canonicalize(phi)) != canonicalize(psi):
                found = pmc.assignment.get(canonicalize(phi))
                mismatched.append({"formula": phi_text, "expected": psi_text,
                                   "found": reports.formula_text(found)})
        gaps = [reports.formula_text(f) for f in pmc.failures if is_quantifier_free(f)]
        assignment = {reports.formula_text(k): reports.formula_text(v)
                      for k, v in pmc.assignment.items()}
        return reports.report("pmc", not mismatched and not gaps, depth=pmc.depth,
                              required="quantifier-free supply",
                              quantified_gaps=len(pmc.failures) - len(gaps),
                              total=pmc.total, assignment=assignment,
                              without_complement=reports.formulas_text(pmc.failures),
                              mismatched=mismatched)

    def _suite_constructible_resultant(self, params):
        persistent, raised, checked = [], 0, 0
        for space_params in params["spaces"]:
            _, universe, space = self._space(space_params)
            for chi in space.enumerator.constructible(space.variables, params["formula_depth"]):
                checked += 1
                result = constructible_resultant(chi, space)
                if result.uncovered:
                    raised += 1
                    retry = constructible_resultant(chi, space, space.depth + 1)
                    if retry.uncovered:
                        persistent.append({"class": universe.name,
                                           "formula": reports.formula_text(chi),
                                           "case": retry.case})
        return reports.report("constructible_resultant", not persistent, checked=checked,
                              covered_after_raise=raised - len(persistent),
                              persistent=persistent)

    def _suite_typgeo(self, params):
        spaces = []
        for space_params in params["spaces"]:
            _, universe, space = self._space(space_params)
            verdict = typgeo_check(space)
            spaces.append({"class": universe.name, "points": len(space),
                           "injective": verdict.injective, "surjective": verdict.surjective,
                           "nested": list(verdict.nested)})
        return reports.report("typgeo", all(s["injective"] and s["surjective"] for s in spaces),
                              spaces=spaces)

    def _suite_geo_complement(self, params):
        _, universe, space = self._space(params)
        supply = pp_supply(space)
        gtypes = [star_map(p, space, supply).as_gtype() for p in range(len(space))]
        gtypes += [GeometricType(space.variables, frozenset((f,)))
                   for f in supply if is_quantifier_free(f)]
        inexact = []
        for gtype in gtypes:
            result = geo_complement(gtype, space)
            if not result.exact:
                inexact.append({"type": reports.gtype_text(gtype),
                                "overlapping": list(result.overlapping),
                                "uncovered": list(result.uncovered)})
        return reports.report("geo_complement", not inexact, types=len(gtypes), inexact=inexact)

    def _suite_topology(self, params):
        theory, universe, space = self._space(params)
        algebra = basic_set_algebra(space)
        open_sets = open_sets_geometric(space)
        smaller = type_space(universe, space.variables[:-1], space.depth, theory)
        projection = projection_check(space, smaller)
        return reports.report(
            "topology", not algebra and open_sets.passed and not projection,
            algebra_failures=[{"connective": a.connective,
                               "left": reports.formula_text(a.left),
                               "right": reports.formula_text(a.right)} for a in algebra],
            unions_checked=open_sets.unions_checked,
            union_failures=[reports.points_text(u) for u in open_sets.union_failures],
            normal_form_failures=reports.formulas_text(open_sets.formula_failures),
            projection_shortfalls=reports.formulas_text(p.formula for p in projection),
        )

    def _morley_setup(self, params):
        theory, universe, fragment = self.load(params["theory"], params["class"],
                                               params["fragment"])
        return theory, universe, morleyize(theory, fragment)

    def _suite_morley_roundtrip(self, params):
        _, universe, morleyized = self._morley_setup(params)
        failed, missed = [], []
        mutations = 0
        for member in universe.members:
            expanded = expand(member, morleyized)
            if not reduct_check(expanded, morleyized).passed:
                failed.append(member.name)
            for mutant in self._mutants(expanded, morleyized):
                mutations += 1
                if reduct_check(mutant, morleyized).passed:
                    missed.append(mutant.name)
        return reports.report("morley_roundtrip", not failed and not missed,
                              structures=len(universe), mutations=mutations,
                              failed=failed, missed_mutations=missed)

    @staticmethod
    def _mutants(expanded, morleyized):
        """One shrunk and one enlarged R-table per expansion."""
        mutants = []
        fragment = morleyized.fragment
        relations = [fragment.relation(m) for m in fragment.members]
        for name in relations:
            rows = expanded.sorted_tuples(name)
            if rows:
                mutants.append(expanded.with_relation(name, rows[1:], name=f"{expanded.name}-{name}"))
                break
        for name in relations:
            sorting = morleyized.signature.relations[name]
            present = expanded.relations[name]
            extra = next((r for r in expanded.tuples(sorting) if tuple(r) not in present), None)
            if extra is not None:
                mutants.append(expanded.with_relation(name, set(present) | {tuple(extra)},
                                                      name=f"{expanded.name}+{name}"))
                break
        return mutants

    def _suite_functor(self, params):
        _, universe, morleyized = self._morley_setup(params)
        expansions = {m.name: expand(m, morleyized) for m in universe.members}
        maps_checked, disagreements = 0, []
        for source, target in itertools.product(universe.members, repeat=2):
            for maps in all_sorted_maps(source, target):
                maps_checked += 1
                verdict = functor_check(maps, source, target, morleyized, expansions)
                if not verdict.agree:
                    disagreements.append({"source": source.name, "target": target.name,
                                          "maps": maps})
        return reports.report("functor", not disagreements, maps=maps_checked,
                              disagreements=disagreements)

    def _suite_forcing(self, params):
        theory, universe, _ = self.load(params["theory"], params["class"])
        sort = universe.signature.default_sort
        depth = params["depth"]
        generic_ctx = ForcingContext(
            theory, universe, canonical_variables((sort,) * params["variables"]),
            depth, existential_depth=depth)
        members = []
        for member in universe.members:
            existential = is_existential(member, universe, depth).holds
            generic = is_generic(member, generic_ctx)
            members.append({"structure": member.name, "existential": existential,
                            "generic": generic.holds, "checked": generic.checked,
                            "failed": generic.failed})
        boolean_failures = [
            {"structure": m["structure"], "case": case, "failed": m["failed"][case]}
            for m in members if m["existential"]
            for case in self.BOOLEAN_CASES if m["failed"].get(case, 0)
        ]
        check_ctx = generic_ctx.at_depth(params["check_depth"])
        pecte = []
        for member in pec_members(universe):
            result = pecte_check(member, check_ctx)
            pecte.append({"structure": member.name, "total": result.total,
                          "consistent": result.consistent,
                          "undecided": len(result.undecided)})
        homs = [h for a, b in itertools.product(universe.members, repeat=2)
                for h in iter_homomorphisms(a, b)]
        unstable = stability_check(check_ctx, homs)
        passed = (all(m["existential"] == m["generic"] for m in members)
                  and not boolean_failures
                  and all(p["total"] and p["consistent"] for p in pecte) and not unstable)
        return reports.report("forcing", passed, depth=depth,
                              width_cap=generic_ctx.enumerator.width, members=members,
                              boolean_failures=boolean_failures, pecte=pecte,
                              homomorphisms=len(homs), unstable=len(unstable))

    def _suite_karp(self, params):
        _, universe, _ = self.load(params["theory"], params["class"])
        pairs, mismatches = 0, []
        for first, second in itertools.combinations_with_replacement(universe.members, 2):
            pairs += 1
            system = back_and_forth(first, second, params.get("depth", 0))
            if system.holds != is_isomorphic(first, second):
                mismatches.append({"first": first.name, "second": second.name,
                                   "back_and_forth": system.holds})
        return reports.report("karp", not mismatches, pairs=pairs, mismatches=mismatches)
