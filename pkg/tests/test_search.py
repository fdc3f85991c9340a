"""
Copyright (c) 2020 Nathan Telles

This Source Code Form is subject to the terms of the Mozilla Public
License, v. 2.0. If a copy of the MPL was not distributed with this
file, You can obtain one at http://mozilla.org/MPL/2.0/.
"""

from multiprocessing import Queue

import numpy as np
import pytest

from spillover.config import load_search_config, scenario_from_dict
from spillover.helpers import chunk_ranges, drain_queue
from spillover.netcore import ENUMERATION_CAP
from spillover.report import search_report, search_table
from spillover.runner import run_scenario
from spillover.search import (CHUNK_SIZE, candidate_scenario,
                              evaluate_candidate, make_candidate,
                              monotone_closure, search_reversals)


@pytest.fixture
def dim_search(bundled):
    return load_search_config(bundled('search_dim_reversal.yaml'))


class TestCandidates:
    """Test candidate generation"""

    def test_monotone_closure(self):
        closed = monotone_closure(np.array([[3.0, 0.0, 0.0, 0.0]]), 2)
        assert list(closed[0]) == [3.0, 3.0, 3.0, 3.0]

    def test_monotone_closure_is_monotone(self):
        rng = np.random.default_rng(0)
        table = rng.integers(0, 4, size=(3, 8)).astype(float)
        closed = monotone_closure(table, 3)
        assert np.all(closed >= table)
        for code in range(8):
            for b in range(3):
                if code >> b & 1:
                    assert np.all(closed[:, code] >= closed[:, code ^ 1 << b])

    def test_deterministic(self, dim_search):
        first = make_candidate(dim_search, 17)
        again = make_candidate(dim_search, 17)
        assert np.array_equal(first.outcomes, again.outcomes)
        assert first.mechanism.to_dict() == again.mechanism.to_dict()
        assert first.network.to_dict() == again.network.to_dict()

    def test_shape(self, bundled):
        cfg = load_search_config(bundled('search_bernoulli_partial.yaml'))
        for index in range(20):
            candidate = make_candidate(cfg, index)
            n = candidate.network.n
            assert 2 <= n <= 5
            assert candidate.outcomes.shape == (n, 1 << n)

    def test_chunks(self):
        assert list(chunk_ranges(0, 600, CHUNK_SIZE)) == [
            (0, 250), (250, 500), (500, 600)]


@pytest.mark.incremental
class TestDimReversalSearch:
    """Test rediscovery of the difference-in-means reversal"""

    def test_found(self, dim_search):
        result = search_reversals(dim_search, ENUMERATION_CAP)
        assert len(result.hits) == 1
        assert result.evaluated % CHUNK_SIZE == 0

    def test_hit_reloads(self, dim_search):
        hit = search_reversals(dim_search, ENUMERATION_CAP).hits[0]
        result = run_scenario(scenario_from_dict(hit.scenario))
        assert result.criteria['partial'].verdict.value == 'VIOLATION'
        assert result.tau.value == pytest.approx(hit.tau, abs=1e-9)

    def test_candidate_scenario(self, dim_search):
        hit = search_reversals(dim_search, ENUMERATION_CAP).hits[0]
        candidate = make_candidate(dim_search, hit.index)
        assert candidate_scenario(dim_search, candidate) == hit.scenario
        assert evaluate_candidate(dim_search, candidate).tau_value == \
            pytest.approx(hit.tau)

    def test_reproducible(self, dim_search):
        first = search_reversals(dim_search, ENUMERATION_CAP)
        second = search_reversals(dim_search, ENUMERATION_CAP)
        assert [h.index for h in first.hits] == [h.index for h in second.hits]
        assert first.evaluated == second.evaluated

    def test_report(self, dim_search):
        result = search_reversals(dim_search, ENUMERATION_CAP)
        report = search_report(result)
        assert report['found'] == 1
        assert report['seed'] == 1
        assert 'search-dim-reversal' in search_table(result)


class TestNegativeControl:
    """Independent assignment never reverses partial comparisons"""

    def test_small_budget(self, bundled):
        cfg = load_search_config(bundled('search_bernoulli_partial.yaml'),
                                 overrides={'budget': 1000})
        result = search_reversals(cfg, ENUMERATION_CAP)
        assert result.hits == []
        assert result.evaluated == 1000

    @pytest.mark.slow
    def test_full_budget(self, bundled):
        cfg = load_search_config(bundled('search_bernoulli_partial.yaml'))
        result = search_reversals(cfg, ENUMERATION_CAP)
        assert result.hits == []
        assert result.evaluated == cfg.budget


class TestSlowSearches:
    """Full budget searches"""

    @pytest.mark.slow
    def test_monotone_fraction(self, bundled):
        cfg = load_search_config(bundled('search_fraction_monotone.yaml'))
        result = search_reversals(cfg, ENUMERATION_CAP)
        assert len(result.hits) == 1
        hit = result.hits[0]
        assert hit.tau < 0
        assert hit.premise in ('AllNonNegative', 'AllZero')

    @pytest.mark.slow
    def test_workers_do_not_change_results(self, bundled, dim_search):
        inline = search_reversals(dim_search, ENUMERATION_CAP)
        log_q = Queue()
        cfg = load_search_config(bundled('search_dim_reversal.yaml'),
                                 overrides={'workers': 2})
        try:
            pooled = search_reversals(cfg, ENUMERATION_CAP, log_q)
        finally:
            drain_queue(log_q)
        assert [h.index for h in pooled.hits] == [h.index for h in
                                                  inline.hits]
        assert pooled.evaluated == inline.evaluated
        assert pooled.skipped == inline.skipped
