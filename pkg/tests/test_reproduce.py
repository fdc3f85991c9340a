"""
Copyright (c) 2020 Nathan Telles

This Source Code Form is subject to the terms of the Mozilla Public
License, v. 2.0. If a copy of the MPL was not distributed with this
file, You can obtain one at http://mozilla.org/MPL/2.0/.
"""

import pytest

from spillover.config import load_scenario
from spillover.errors import ReproductionFailure
from spillover.reproduce import (DYAD_GRID, REGISTRY, Golden,
                                 compare_expectations, dyad_formula,
                                 reproduce, reproduce_all, verify)
from spillover.runner import run_scenario


class TestGoldenExamples:
    """Test every golden example against its recorded numbers"""

    @pytest.mark.parametrize('example_id', sorted(REGISTRY))
    def test_reproduces(self, example_id):
        outcome = reproduce(example_id)
        assert outcome.passed, outcome.diffs

    def test_all(self):
        outcomes = reproduce_all()
        assert [o.example_id for o in outcomes] == list(REGISTRY)
        assert all(o.passed for o in outcomes)

    def test_unknown(self):
        with pytest.raises(KeyError):
            reproduce('dim-9.9')

    def test_verify(self):
        assert verify('spill-3.2').passed

    def test_verify_failure(self, monkeypatch):
        monkeypatch.setitem(REGISTRY, 'always-fails', Golden(
            'quad_ordered.yaml', lambda scenario, result: ['forced']))
        with pytest.raises(ReproductionFailure) as info:
            verify('always-fails')
        assert info.value.diffs == ['forced']


class TestExpectations:
    """Test comparison of a run with its expect block"""

    def test_dyad_formula(self):
        assert dyad_formula(0.0, 0.5, 0.0) == pytest.approx(-1.0)
        for p_00, p_10, p_11 in DYAD_GRID:
            assert p_00 + 2 * p_10 + p_11 == pytest.approx(1.0)

    def test_mismatch_reported(self, bundled):
        result = run_scenario(load_scenario(bundled('dyad_dim.yaml')))
        diffs = compare_expectations(result, {'tau': 1.0,
                                              'criteria': {'partial':
                                                           'PRESERVED'}})
        assert len(diffs) == 2
        assert diffs[0].startswith('tau: expected 1.0')

    def test_entry_bounds(self, bundled):
        result = run_scenario(load_scenario(bundled('quad_ordered.yaml')))
        assert compare_expectations(result, {
            'entries': {'ordered': {'min': 0.0, 'max': 2.0}}}) == []
        diffs = compare_expectations(result, {
            'entries': {'ordered': {'min': 1.0}}})
        assert diffs == ['ordered entries min: expected 1.0, got 0.0']

    def test_missing_decomposition(self, bundled):
        result = run_scenario(load_scenario(bundled('quad_ordered.yaml')))
        assert compare_expectations(result, {'R_n': 0.0}) == [
            'R_n: expected 0.0, got None']
