"""
Copyright (c) 2020 Nathan Telles

This Source Code Form is subject to the terms of the Mozilla Public
License, v. 2.0. If a copy of the MPL was not distributed with this
file, You can obtain one at http://mozilla.org/MPL/2.0/.
"""

import logging
import os
from typing import Any, Callable, Dict, List, NamedTuple
from typing import Optional as Opt

import numpy as np

from .config import (Scenario, load_coupling_config, load_scenario)
from .errors import ReproductionFailure
from .estimands import CriterionKind, comparison_set, tau
from .mechanisms import ExplicitTable, GameInduced
from .netcore import ENUMERATION_CAP
from .report import run_report
from .runner import RunResult, coupling_experiment, run_scenario
from .search import SearchResult

log = logging.getLogger(__name__)

SCENARIO_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)),
                            'scenarios')

# (P(00), P(10) = P(01), P(11)) for symmetric dyad mechanisms
DYAD_GRID = [(0.0, 0.5, 0.0), (0.25, 0.25, 0.25), (0.1, 0.3, 0.3),
             (0.4, 0.2, 0.2), (0.6, 0.1, 0.2)]


class Reproduction(NamedTuple):
    example_id: str
    diffs: List[str]
    report: Dict[str, Any]

    @property
    def passed(self) -> bool:
        return not self.diffs


def _close(a: Opt[float], b: float, tol: float) -> bool:
    return a is not None and abs(a - b) <= tol


def compare_expectations(result: RunResult, expect: Dict[str, Any]
                         ) -> List[str]:
    """Differences between a run and the expect block of its scenario."""

    tol = expect.get('tolerance', 1e-12)
    dec = result.decomposition
    diffs = []
    observed = {
        'tau': result.tau.value,
        'tau_star': None if dec is None else dec.tau_star,
        'R_n': None if dec is None else dec.r_n,
    }
    for key, value in observed.items():
        if key in expect and not _close(value, expect[key], tol):
            diffs.append('{}: expected {!r}, got {!r}'.format(
                key, expect[key], value))

    if dec is not None and dec.identity_gap > tol:
        diffs.append('tau - (tau* + R_n) = {!r}'.format(dec.identity_gap))

    for kind, wanted in expect.get('criteria', {}).items():
        got = result.criteria.get(kind)
        got_value = None if got is None else got.verdict.value
        if got_value != wanted:
            diffs.append('{} verdict: expected {}, got {}'.format(
                kind, wanted, got_value))
    for kind, wanted in expect.get('premises', {}).items():
        got = result.criteria.get(kind)
        got_value = None if got is None else got.premise.value
        if got_value != wanted:
            diffs.append('{} premise: expected {}, got {}'.format(
                kind, wanted, got_value))
    for name, wanted in expect.get('assumptions', {}).items():
        check = result.assumptions.get(name)
        got_value = None if check is None else check.verdict.name
        if got_value != wanted:
            diffs.append('{}: expected {}, got {}'.format(
                name, wanted, got_value))

    scenario = result.scenario
    for kind, bounds in expect.get('entries', {}).items():
        values = np.concatenate([
            comparison_set(CriterionKind(kind), result.estimand,
                           scenario.outcomes, i).all_values()
            for i in result.estimand.subpop])
        for bound, pick in (('min', np.min), ('max', np.max)):
            if bound in bounds:
                got = float(pick(values)) if len(values) else None
                if not _close(got, bounds[bound], tol):
                    diffs.append('{} entries {}: expected {!r}, got {!r}'
                                 .format(kind, bound, bounds[bound], got))
    return diffs


def dyad_formula(p_00: float, p_10: float, p_11: float) -> float:
    """tau(1, 0) of the dyad as 3 p4 + p2 - 2 p3 in conditional terms."""

    p2 = p_10 / (p_10 + p_11)
    p4 = p_11 / (p_10 + p_11)
    p3 = p_10 / (p_00 + p_10)
    return 3 * p4 + p2 - 2 * p3


def _dyad_symbolic(scenario: Scenario, result: RunResult) -> List[str]:
    diffs = []
    for p_00, p_10, p_11 in DYAD_GRID:
        mech = ExplicitTable(2, {0: p_00, 1: p_10, 2: p_10, 3: p_11})
        got = tau(scenario.estimand, scenario.outcomes, mech).value
        wanted = dyad_formula(p_00, p_10, p_11)
        if abs(got - wanted) > 1e-12:
            diffs.append('dyad formula at {}: expected {!r}, got {!r}'.format(
                (p_00, p_10, p_11), wanted, got))
    return diffs


def _game_adoption(scenario: Scenario, result: RunResult) -> List[str]:
    mech = scenario.mechanism
    assert isinstance(mech, GameInduced)
    diffs = []
    for ctx in scenario.contexts:
        adoption = mech.adoption(ctx.ctx_id)
        if not np.allclose(adoption, 0.5, rtol=0, atol=1e-12):
            diffs.append("adoption in '{}': expected 0.5 each, got {}".format(
                ctx.ctx_id, adoption.tolist()))
    if not any('multiple equilibria' in note for note in result.notes):
        diffs.append('second equilibrium from the all-adopt start not noted')
    return diffs


class Golden(NamedTuple):
    file: str
    extra: Opt[Callable[[Scenario, RunResult], List[str]]] = None
    coupling: bool = False


REGISTRY = {
    'dim-2.1': Golden('dyad_dim.yaml', _dyad_symbolic),
    'spill-3.2': Golden('triad_spillover.yaml'),
    'ordered-4.1': Golden('quad_ordered.yaml'),
    'coupling-thm3': Golden('coupling_star.yaml', coupling=True),
    'game-prop1': Golden('game_prop1.yaml', _game_adoption),
}


def bundled_path(file_name: str) -> str:
    return os.path.join(SCENARIO_DIR, file_name)


def compare_coupling_expectations(report: Dict[str, Any]) -> List[str]:
    """Differences between a coupling report and its expect block.

    Without an expect block every row must be exact and no sampled pair may
    break the order.
    """

    expect = report.get('expect') or {}
    diffs = []  # type: List[str]
    if expect.get('exact', True) and not report['all_exact']:
        bad = [r for r in report['rows'] if not r['exact']]
        diffs.append('{} inexact rows, first {}'.format(len(bad), bad[0]))
    wanted = expect.get('order_violations', 0)
    if report['order_violations'] != wanted:
        diffs.append('order violations: expected {}, got {}'.format(
            wanted, report['order_violations']))
    return diffs


def compare_search_expectations(result: SearchResult) -> List[str]:
    expect = result.expect or {}
    diffs = []  # type: List[str]
    if 'found' in expect and bool(result.hits) != expect['found']:
        diffs.append('found: expected {}, got {} hit(s)'.format(
            str(expect['found']).lower(), len(result.hits)))
    return diffs


def _reproduce_coupling(example_id: str, golden: Golden) -> Reproduction:
    cfg = load_coupling_config(bundled_path(golden.file))
    report = coupling_experiment(cfg)
    return Reproduction(example_id, compare_coupling_expectations(report),
                        report)


def reproduce(example_id: str, max_n: int = ENUMERATION_CAP
              ) -> Reproduction:
    """Run a golden example and compare it with its recorded numbers."""

    if example_id not in REGISTRY:
        raise KeyError("Unknown example '{}'. Choose from {}".format(
            example_id, ', '.join(REGISTRY)))
    golden = REGISTRY[example_id]
    if golden.coupling:
        outcome = _reproduce_coupling(example_id, golden)
    else:
        scenario = load_scenario(bundled_path(golden.file), max_n)
        result = run_scenario(scenario)
        diffs = compare_expectations(result, scenario.expect or {})
        if golden.extra is not None:
            diffs.extend(golden.extra(scenario, result))
        outcome = Reproduction(example_id, diffs, run_report(result))

    if outcome.passed:
        log.info("Reproduction '%s' passed", example_id)
    else:
        log.warning("Reproduction '%s' failed: %s", example_id,
                    '; '.join(outcome.diffs))
    return outcome


def reproduce_all(max_n: int = ENUMERATION_CAP) -> List[Reproduction]:
    return [reproduce(example_id, max_n) for example_id in REGISTRY]


def verify(example_id: str, max_n: int = ENUMERATION_CAP) -> Reproduction:
    """Like reproduce() but raise ReproductionFailure on any difference."""

    outcome = reproduce(example_id, max_n)
    if not outcome.passed:
        raise ReproductionFailure(example_id, outcome.diffs)
    return outcome
