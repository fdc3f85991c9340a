"""
Copyright (c) 2020 Nathan Telles

This Source Code Form is subject to the terms of the Mozilla Public
License, v. 2.0. If a copy of the MPL was not distributed with this
file, You can obtain one at http://mozilla.org/MPL/2.0/.
"""

from multiprocessing import Queue
from typing import Any, Dict, List
from typing import Optional as Opt

from .config import (Scenario, load_coupling_config, load_scenario,
                     load_search_config)
from .netcore import ENUMERATION_CAP
from .reproduce import REGISTRY, Reproduction, reproduce, reproduce_all
from .runner import RunResult, coupling_experiment, run_scenario
from .search import SearchResult, search_reversals


class Lab:
    """Provides the spillover API."""

    def __init__(self, max_n: int = ENUMERATION_CAP,
                 log_q: Opt[Queue] = None) -> None:
        """Lab constructor.

        Worker processes are only started when a log queue is available to
        hand them.
        """

        if not 1 <= max_n <= ENUMERATION_CAP:
            raise ValueError('max_n must lie in 1..{}'.format(ENUMERATION_CAP))
        self.max_n = max_n
        self._log_q = log_q

    def validate(self, file: str) -> Scenario:
        """Load and validate the scenario file."""

        return load_scenario(file, self.max_n)

    def run(self, file: str, seed: Opt[int] = None) -> RunResult:
        """Run every check the scenario requests."""

        return run_scenario(self.validate(file), seed)

    def search(self, file: str, seed: Opt[int] = None,
               budget: Opt[int] = None,
               workers: Opt[int] = None) -> SearchResult:
        """Randomized reversal search driven by a search config."""

        cfg = load_search_config(file, self.max_n, {
            'seed': seed, 'budget': budget, 'workers': workers})
        return search_reversals(cfg, self.max_n, self._log_q)

    def coupling_test(self, file: str, seed: Opt[int] = None
                      ) -> Dict[str, Any]:
        """Exact and sampled checks of the neighbor-count coupling."""

        return coupling_experiment(load_coupling_config(file), seed)

    def reproduce(self, example_id: str) -> List[Reproduction]:
        """Run one golden example, or all of them for 'all'."""

        if example_id == 'all':
            return reproduce_all(self.max_n)
        return [reproduce(example_id, self.max_n)]

    @staticmethod
    def examples() -> List[str]:
        return list(REGISTRY)
