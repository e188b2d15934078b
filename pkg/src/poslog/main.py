# main.py
import argparse
import logging
import sys
from typing import List, Optional

from poslog.config.run_config import OUTPUT_FORMATS, RunConfig
from poslog.controller.command_controller import CommandController
from poslog.exceptions import ConfigError, ParseError, PoslogError, ResourceCeilingError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_CEILING = 3


def _shared_flags() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--theory", help="theory file (.plt), or a name in the corpus")
    shared.add_argument("--class", dest="universe", help="class file (.pls)")
    shared.add_argument("--fragment", help="fragment file (.plt)")
    shared.add_argument("--depth", type=int, help="formula depth bound")
    shared.add_argument("--width-cap", type=int, help="and/or width cap of the formula supply")
    shared.add_argument("--ceiling", type=int, help="count ceiling for enumerations")
    shared.add_argument("--format", dest="output_format", choices=OUTPUT_FORMATS,
                        default="text")
    shared.add_argument("--existential-member", help="class member used for [f] of "
                                                     "non-positive formulas")
    shared.add_argument("--variables", type=int, help="number of free variables")
    shared.add_argument("--verbose", action="store_true", help="debug logging on stderr")
    return shared


def build_parser() -> argparse.ArgumentParser:
    shared = _shared_flags()
    parser = argparse.ArgumentParser(prog="poslog", description="Positive model theory at desk scale")
    commands = parser.add_subparsers(dest="command", required=True)

    commands.add_parser("classify", parents=[shared]).add_argument("formula")
    commands.add_parser("dnf", parents=[shared]).add_argument("formula")
    commands.add_parser("typespace", parents=[shared])
    commands.add_parser("resultant", parents=[shared]).add_argument("formula")
    commands.add_parser("pmc", parents=[shared])
    commands.add_parser("pec", parents=[shared])
    morleyize = commands.add_parser("morleyize", parents=[shared])
    morleyize.add_argument("--output", help="write the Morleyized theory here")
    commands.add_parser("verify-morley", parents=[shared]).add_argument("structure")

    forcing = commands.add_parser("forcing")
    forcing_commands = forcing.add_subparsers(dest="forcing_command", required=True)
    check = forcing_commands.add_parser("check", parents=[shared])
    check.add_argument("structure")
    check.add_argument("formula")
    check.add_argument("row", nargs="*")
    forcing_commands.add_parser("generic", parents=[shared]).add_argument("structures",
                                                                          nargs="*")
    forcing_commands.add_parser("existential", parents=[shared]).add_argument("structures",
                                                                              nargs="*")
    forcing_karp = forcing_commands.add_parser("karp", parents=[shared])
    forcing_karp.add_argument("first")
    forcing_karp.add_argument("second")

    karp = commands.add_parser("karp", parents=[shared])
    karp.add_argument("first")
    karp.add_argument("second")

    suite = commands.add_parser("check-suite", parents=[shared])
    suite.add_argument("--suite", action="append", dest="suites",
                       help="run only this suite; may be repeated")
    suite.add_argument("--suite-config", help="suite JSON file")
    return parser


def dispatch(controller: CommandController, args: argparse.Namespace):
    command = args.command
    if command == "classify":
        return controller.classify(args.formula)
    if command == "dnf":
        return controller.dnf(args.formula)
    if command == "typespace":
        return controller.typespace()
    if command == "resultant":
        return controller.resultant(args.formula)
    if command == "pmc":
        return controller.pmc()
    if command == "pec":
        return controller.pec()
    if command == "morleyize":
        return controller.morleyize(args.output)
    if command == "verify-morley":
        return controller.verify_morley(args.structure)
    if command == "karp":
        return controller.karp(args.first, args.second)
    if command == "check-suite":
        return controller.check_suite(args.suites, args.suite_config)
    sub = args.forcing_command
    if sub == "check":
        return controller.forcing_check(args.structure, args.formula, args.row)
    if sub == "generic":
        return controller.forcing_generic(args.structures)
    if sub == "existential":
        return controller.forcing_existential(args.structures)
    return controller.karp(args.first, args.second)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK

    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        stream=sys.stderr)

    try:
        config = RunConfig.build(
            depth=args.depth, width_cap=args.width_cap, ceiling=args.ceiling,
            theory=args.theory, universe=args.universe, fragment=args.fragment,
            existential_member=args.existential_member, variables=args.variables,
            output_format=args.output_format,
        )
        code, output = dispatch(CommandController(config), args)
    except ParseError as e:
        for diagnostic in e.diagnostics:
            print(str(diagnostic), file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as e:
        logger.error(f"Configuration error: {str(e)}")
        return EXIT_USAGE
    except ResourceCeilingError as e:
        logger.error(f"Resource ceiling reached: {str(e)}")
        return EXIT_CEILING
    except PoslogError as e:
        logger.error(f"{args.command} failed: {str(e)}")
        return EXIT_FAILED
    except Exception as e:
        logger.error(f"Unexpected error in {args.command}: {str(e)}", exc_info=True)
        return EXIT_FAILED

    sys.stdout.write(output if output.endswith("\n") else output + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
