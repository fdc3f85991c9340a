"""
Copyright (c) 2020 Nathan Telles

This Source Code Form is subject to the terms of the Mozilla Public
License, v. 2.0. If a copy of the MPL was not distributed with this
file, You can obtain one at http://mozilla.org/MPL/2.0/.
"""

import pytest

from spillover import Lab
from spillover.errors import ConfigIOError, InvalidScenario


@pytest.fixture
def lab():
    """Create a Lab with the default enumeration cap."""

    return Lab()


class TestLabAPI:
    """Test Lab API"""

    @pytest.mark.parametrize('max_n', [0, 25])
    def test_invalid_cap(self, max_n):
        with pytest.raises(ValueError):
            Lab(max_n)

    def test_examples(self):
        assert Lab.examples() == ['dim-2.1', 'spill-3.2', 'ordered-4.1',
                                  'coupling-thm3', 'game-prop1']

    def test_validate(self, lab, bundled):
        scenario = lab.validate(bundled('game_prop1.yaml'))
        assert scenario.network.n == 2

    def test_validate_missing(self, lab, tmp_path):
        with pytest.raises(ConfigIOError):
            lab.validate(str(tmp_path / 'missing.yaml'))

    def test_cap_applies(self, bundled):
        with pytest.raises(InvalidScenario):
            Lab(2).validate(bundled('quad_ordered.yaml'))

    def test_run(self, lab, bundled):
        result = lab.run(bundled('dyad_dim.yaml'))
        assert result.tau.value == pytest.approx(-1.0)

    def test_run_seed(self, lab, bundled):
        assert lab.run(bundled('dyad_dim.yaml'), seed=42).seed == 42

    def test_search(self, lab, bundled):
        result = lab.search(bundled('search_bernoulli_partial.yaml'),
                            budget=250)
        assert result.evaluated == 250

    def test_coupling(self, lab, test_scenario):
        assert lab.coupling_test(test_scenario('small_coupling.yaml'))[
            'all_exact']

    def test_reproduce_one(self, lab):
        outcomes = lab.reproduce('ordered-4.1')
        assert [o.passed for o in outcomes] == [True]

    def test_reproduce_all(self, lab):
        outcomes = lab.reproduce('all')
        assert len(outcomes) == 5
        assert all(o.passed for o in outcomes)
