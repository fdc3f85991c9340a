"""
Copyright (c) 2020 Nathan Telles

This Source Code Form is subject to the terms of the Mozilla Public
License, v. 2.0. If a copy of the MPL was not distributed with this
file, You can obtain one at http://mozilla.org/MPL/2.0/.
"""

import json

import pytest
import yaml

from spillover.config import (load_coupling_config, load_scenario,
                              scenario_from_dict)
from spillover.report import (coupling_table, dumps, run_report, run_table)
from spillover.runner import READING_NOTE, coupling_experiment, run_scenario
from spillover.verdicts import Verdict


@pytest.fixture
def run_bundled(bundled):
    def _run(file_name, seed=None):
        return run_scenario(load_scenario(bundled(file_name)), seed)
    return _run


@pytest.mark.incremental
class TestDyadRun:
    """Test a full run of the dyad scenario"""

    def test_tau(self, run_bundled):
        result = run_bundled('dyad_dim.yaml')
        assert result.tau.value == pytest.approx(-1.0, abs=1e-12)

    def test_decomposition(self, run_bundled):
        dec = run_bundled('dyad_dim.yaml').decomposition
        assert dec.tau_star == pytest.approx(1.0, abs=1e-12)
        assert dec.r_n == pytest.approx(-2.0, abs=1e-12)

    def test_assumptions(self, run_bundled):
        verdicts = {name: check.verdict for name, check in
                    run_bundled('dyad_dim.yaml').assumptions.items()}
        assert verdicts == {'correct_specification': Verdict.FAILS,
                            'pindown': Verdict.HOLDS,
                            'ci_selection': Verdict.FAILS,
                            'unit_independence': Verdict.FAILS}

    def test_criteria(self, run_bundled):
        criteria = run_bundled('dyad_dim.yaml').criteria
        assert {k: v.verdict.value for k, v in criteria.items()} == {
            'general': 'VACUOUS', 'partial': 'VIOLATION',
            'ordered': 'VIOLATION'}

    def test_seed(self, run_bundled):
        assert run_bundled('dyad_dim.yaml').seed == 0
        assert run_bundled('dyad_dim.yaml', seed=9).seed == 9


class TestRuns:
    """Test runs of the other bundled scenarios"""

    def test_triad(self, run_bundled):
        result = run_bundled('triad_spillover.yaml')
        assert result.tau.value == pytest.approx(-1.0, abs=1e-12)
        assert result.decomposition.r_n == pytest.approx(-2.0, abs=1e-12)
        assert result.assumptions['k_locality'].verdict is Verdict.FAILS

    def test_pindown_failure_skips_decomposition(self, bundled):
        with open(bundled('quad_ordered.yaml')) as file:
            raw = yaml.safe_load(file)
        raw['checks'].append('decomposition')
        result = run_scenario(scenario_from_dict(raw))
        assert result.decomposition is None
        assert result.assumptions['pindown'].verdict is Verdict.FAILS
        assert 'decomposition skipped: pin-down fails for unit 1' in \
            result.notes
        assert result.tau.value == pytest.approx(-1.0, abs=1e-12)

    def test_game(self, run_bundled):
        result = run_bundled('game_prop1.yaml')
        assert result.assumptions['equilibrium'].holds
        assert result.tau.value == pytest.approx(1.0, abs=1e-12)
        assert "2 pure equilibria in context 'c0'" in result.notes
        assert any('multiple equilibria' in note for note in result.notes)

    def test_ani(self, run_bundled):
        result = run_bundled('ani_path.yaml')
        assert [r.radius for r in result.ani] == [0, 1, 2, 3]
        gammas = [r.gamma_hat for r in result.ani]
        assert gammas == sorted(gammas, reverse=True)
        assert result.ani_bias.radius == 1
        assert result.ani_bias.within_gamma

    def test_contexts(self, test_scenario):
        result = run_scenario(load_scenario(test_scenario('contexts.yaml')))
        assert result.tau.value == pytest.approx(1.75)
        assert result.decomposition.r_n == pytest.approx(0.0, abs=1e-12)
        assert result.assumptions['unconfoundedness'].holds
        assert result.assumptions['unit_independence'].holds


class TestRunReport:
    """Test the canonical JSON report"""

    def test_keys(self, run_bundled):
        report = run_report(run_bundled('dyad_dim.yaml'))
        assert report['scenario'] == 'dyad-dim'
        assert report['R_n'] == pytest.approx(-2.0)
        assert report['deltas'] == {'1': '0', '2': '0'}
        assert report['criterion_verdicts']['partial'] == {
            'premise': 'AllNonNegative', 'verdict': 'VIOLATION'}
        assert 'sign_partial' in report['witnesses']
        assert report['reading'] == READING_NOTE

    def test_deterministic(self, run_bundled):
        first = dumps(run_report(run_bundled('triad_spillover.yaml')))
        second = dumps(run_report(run_bundled('triad_spillover.yaml')))
        assert first == second
        assert json.loads(first)['tau'] == pytest.approx(-1.0)

    def test_table(self, run_bundled):
        table = run_table(run_bundled('quad_ordered.yaml'))
        assert 'quad-ordered' in table
        assert 'runtime (s)' in table


class TestCouplingExperiment:
    """Test the coupling experiment driven by a config"""

    def test_small(self, test_scenario):
        report = coupling_experiment(load_coupling_config(
            test_scenario('small_coupling.yaml')))
        assert len(report['rows']) == 16
        assert report['all_exact']
        assert report['sampled_pairs'] == 16 * 2000
        assert report['order_violations'] == 0
        assert len(report['heterogeneous']) == 3

    def test_seeded(self, test_scenario):
        cfg = load_coupling_config(test_scenario('small_coupling.yaml'))
        assert coupling_experiment(cfg) == coupling_experiment(cfg)
        assert coupling_experiment(cfg, seed=99)['seed'] == 99

    def test_table(self, test_scenario):
        report = coupling_experiment(load_coupling_config(
            test_scenario('small_coupling.yaml')))
        assert 'order violations' in coupling_table(report)
