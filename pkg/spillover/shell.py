"""
Copyright (c) 2020 Nathan Telles

This Source Code Form is subject to the terms of the Mozilla Public
License, v. 2.0. If a copy of the MPL was not distributed with this
file, You can obtain one at http://mozilla.org/MPL/2.0/.
"""

import argparse
import cmd
import glob
import os
import shlex
from multiprocessing import Queue
from typing import Any, List
from typing import Optional as Opt

from . import __version__
from .core import Lab
from .errors import ConfigError, ReproductionFailure, SpilloverError
from .report import (coupling_table, dumps, run_report, run_table,
                     search_report, search_table)
from .reproduce import (compare_coupling_expectations,
                        compare_search_expectations)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_IDENTIFICATION = 2
EXIT_REPRODUCTION = 3
EXIT_NOT_FOUND = 4


def exit_code_for(ex: Exception) -> int:
    """Map an exception to the process exit code."""

    if isinstance(ex, ReproductionFailure):
        return EXIT_REPRODUCTION
    if isinstance(ex, (ConfigError, KeyError, ValueError)):
        return EXIT_CONFIG
    return EXIT_IDENTIFICATION


def _parser(verb: str, target: Opt[str], *flags: str
            ) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=verb, add_help=False)
    if target is not None:
        parser.add_argument(target)
    parser.add_argument('--json-only', action='store_true')
    parser.add_argument('--max-n', type=int)
    if 'seed' in flags:
        parser.add_argument('--seed', type=int)
    if 'budget' in flags:
        parser.add_argument('--budget', type=int)
    if 'workers' in flags:
        parser.add_argument('--workers', type=int)
    return parser


class Shell(cmd.Cmd):
    """Creates an interactive shell for the spillover lab.

    Every command can also be run once from the command line, in which case
    exit_code carries the result back to the caller.
    """

    prompt = 'spillover> '
    intro = ('Welcome to spillover {}. Type help or ? to list commands.'
             .format(__version__))

    PARSERS = {
        'run': _parser('run', 'file', 'seed'),
        'validate': _parser('validate', 'file'),
        'reproduce': _parser('reproduce', 'example'),
        'search': _parser('search', 'file', 'seed', 'budget', 'workers'),
        'coupling_test': _parser('coupling-test', 'file', 'seed'),
    }

    def __init__(self, lab: Opt[Lab] = None, log_q: Opt[Queue] = None,
                 *args: Any) -> None:
        """Overrides Cmd constructor to construct an instance of Lab."""

        self.log_q = log_q
        self.lab = lab if lab is not None else Lab(log_q=log_q)
        self.exit_code = EXIT_OK
        super().__init__(*args)

    @staticmethod
    def autocomplete_path(line: str, begidx: int, endidx: int) -> List[str]:
        """Autocomplete file path.

        Created with help from the Stack Overflow answer by meffie
        https://stackoverflow.com/a/27256663
        """

        before_arg = line.rfind(" ", 0, begidx)
        if before_arg == -1:
            return []

        fixed = line[before_arg+1:begidx]
        arg = line[before_arg+1:endidx]
        pattern = arg + '*'

        completions = []
        for path in glob.glob(pattern):
            path = Shell.append_slash_if_dir(path)
            completions.append(path.replace(fixed, "", 1))
        return completions

    @staticmethod
    def append_slash_if_dir(path: str) -> str:
        """Append a slash to path name if the path is a directory."""

        if path and os.path.isdir(path) and path[-1] != os.sep:
            return path + os.sep

        return path

    def precmd(self, line: str) -> str:
        # Verbs are written with hyphens, handlers with underscores
        verb, _, rest = line.partition(' ')
        return verb.replace('-', '_') + (' ' + rest if rest else '')

    def emptyline(self) -> bool:
        pass

    def default(self, line: str) -> bool:
        print('Unrecognized command:', line)
        self.exit_code = EXIT_CONFIG
        return False

    def _parse(self, verb: str, arg: str) -> Opt[argparse.Namespace]:
        self.exit_code = EXIT_OK
        try:
            return self.PARSERS[verb].parse_args(shlex.split(arg))
        except (SystemExit, ValueError):
            self.invalid_command(verb.replace('_', '-'))
            self.exit_code = EXIT_CONFIG
            return None

    def _lab(self, args: argparse.Namespace) -> Lab:
        if args.max_n is None:
            return self.lab
        return Lab(args.max_n, self.log_q)

    def _fail(self, ex: Exception) -> None:
        print(ex)
        self.exit_code = exit_code_for(ex)

    def do_run(self, arg: str) -> None:
        """Run a scenario and print its report.

        Usage: run file [--seed N] [--json-only] [--max-n K]"""

        args = self._parse('run', arg)
        if args is None:
            return

        try:
            result = self._lab(args).run(args.file, args.seed)
        except (SpilloverError, ValueError) as ex:
            self._fail(ex)
            return

        if not args.json_only:
            print(run_table(result))
        print(dumps(run_report(result)))

    def complete_run(self, _: str, line: str, beg: int, end: int
                     ) -> List[str]:
        """Autocomplete line with file paths for run command."""

        return self.autocomplete_path(line, beg, end)

    def do_validate(self, arg: str) -> None:
        """Validate a scenario file and list every problem found.

        Usage: validate file [--max-n K]"""

        args = self._parse('validate', arg)
        if args is None:
            return

        try:
            scenario = self._lab(args).validate(args.file)
        except (SpilloverError, ValueError) as ex:
            self._fail(ex)
            return

        print("Scenario '{}' is valid: n={}, {} context(s), digest {}".format(
            scenario.name, scenario.network.n, len(scenario.contexts),
            scenario.digest[:12]))

    def complete_validate(self, _: str, line: str, beg: int, end: int
                          ) -> List[str]:
        """Autocomplete line with file paths for validate command."""

        return self.autocomplete_path(line, beg, end)

    def do_reproduce(self, arg: str) -> None:
        """Reproduce a golden example, or all of them.

        Usage: reproduce {dim-2.1|spill-3.2|ordered-4.1|coupling-thm3|
                          game-prop1|all} [--json-only]"""

        args = self._parse('reproduce', arg)
        if args is None:
            return

        try:
            outcomes = self._lab(args).reproduce(args.example)
        except (SpilloverError, KeyError, ValueError) as ex:
            self._fail(ex)
            return

        if not args.json_only:
            print()
            print(str.format('{:<16} {:<6}', 'Example', 'Result'))
            print('-' * 23)
            for outcome in outcomes:
                print(str.format('{:<16} {:<6}', outcome.example_id,
                                 'pass' if outcome.passed else 'FAIL'))
            print()
        print(dumps({'version': __version__, 'reproductions': [
            {'id': o.example_id, 'passed': o.passed, 'diffs': o.diffs}
            for o in outcomes]}))

        for outcome in outcomes:
            if not outcome.passed:
                self._fail(ReproductionFailure(outcome.example_id,
                                               outcome.diffs))

    def complete_reproduce(self, txt: str, _0: str, _1: int, _2: int
                           ) -> List[str]:
        """Autocomplete line with golden example ids."""

        return [name for name in Lab.examples() + ['all']
                if name.startswith(txt)]

    def do_search(self, arg: str) -> None:
        """Search randomly for sign-preservation violations.

        Exits 0 when a violation is found and 4 when none is. A config whose
        expect block disagrees with the outcome exits 3.

        Usage: search file [--seed N] [--budget K] [--workers W]
                           [--json-only] [--max-n K]"""

        args = self._parse('search', arg)
        if args is None:
            return

        try:
            result = self._lab(args).search(args.file, args.seed, args.budget,
                                            args.workers)
        except (SpilloverError, ValueError) as ex:
            self._fail(ex)
            return

        if not args.json_only:
            print(search_table(result))
        print(dumps(search_report(result)))

        diffs = compare_search_expectations(result)
        if diffs:
            self._fail(ReproductionFailure(result.name, diffs))
        elif not result.hits:
            self.exit_code = EXIT_NOT_FOUND

    def complete_search(self, _: str, line: str, beg: int, end: int
                        ) -> List[str]:
        """Autocomplete line with file paths for search command."""

        return self.autocomplete_path(line, beg, end)

    def do_coupling_test(self, arg: str) -> None:
        """Check the neighbor-count coupling exactly and by sampling.

        Inexact rows or order violations the config does not expect exit 3.

        Usage: coupling-test file [--seed N] [--json-only]"""

        args = self._parse('coupling_test', arg)
        if args is None:
            return

        try:
            report = self._lab(args).coupling_test(args.file, args.seed)
        except (SpilloverError, ValueError) as ex:
            self._fail(ex)
            return

        if not args.json_only:
            print(coupling_table(report))
        print(dumps(report))

        diffs = compare_coupling_expectations(report)
        if diffs:
            self._fail(ReproductionFailure(report['name'], diffs))

    def complete_coupling_test(self, _: str, line: str, beg: int, end: int
                               ) -> List[str]:
        """Autocomplete line with file paths for coupling-test command."""

        return self.autocomplete_path(line, beg, end)

    def do_exit(self, _: str) -> bool:
        """Exit the spillover shell."""

        print("\nGoodbye!")
        return True

    def invalid_command(self, command: str) -> None:
        print("Invalid use of command", command)
        print()
        self.do_help(command.replace('-', '_'))
