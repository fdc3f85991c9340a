"""
Copyright (c) 2020 Nathan Telles

This Source Code Form is subject to the terms of the Mozilla Public
License, v. 2.0. If a copy of the MPL was not distributed with this
file, You can obtain one at http://mozilla.org/MPL/2.0/.
"""

import json
from typing import Any, Dict, List

import numpy as np

from . import __version__
from .runner import READING_NOTE, RunResult
from .search import SearchResult


def _jsonable(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (set, frozenset, tuple)):
        return list(value)
    raise TypeError('{!r} is not JSON serializable'.format(value))


def dumps(data: Dict[str, Any]) -> str:
    """Canonical JSON: sorted keys, fixed separators, no runtime fields."""

    return json.dumps(data, sort_keys=True, indent=2, default=_jsonable)


def run_report(result: RunResult) -> Dict[str, Any]:
    scenario = result.scenario
    dec = result.decomposition
    per_unit = {str(i): {'tau': v} for i, v in result.tau.per_unit.items()}
    if dec is not None:
        for i, terms in dec.per_unit.items():
            per_unit[str(i)].update(tau_star=terms.tau_star, R_n=terms.r_n)

    witnesses = {}  # type: Dict[str, Any]
    for name, check in result.assumptions.items():
        if check.witness is not None:
            witnesses[name] = check.witness
    for name, verdict in result.criteria.items():
        if verdict.witness is not None:
            witnesses['sign_' + name] = verdict.witness

    return {
        'version': __version__,
        'scenario': scenario.name,
        'digest': scenario.digest,
        'seed': result.seed,
        'estimand': result.estimand.to_dict(),
        'tau': result.tau.value,
        'tau_star': None if dec is None else dec.tau_star,
        'R_n': None if dec is None else dec.r_n,
        'deltas': None if dec is None else {
            str(i): str(d) for i, d in dec.deltas.items()},
        'per_unit': per_unit,
        'per_context': result.tau.to_dict()['per_context'],
        'assumption_verdicts': {name: check.verdict.name for name, check in
                                result.assumptions.items()},
        'criterion_verdicts': {name: {'premise': v.premise.value,
                                      'verdict': v.verdict.value}
                               for name, v in result.criteria.items()},
        'witnesses': witnesses,
        'ani': {
            'profile': [r.to_dict() for r in result.ani],
            'bias': None if result.ani_bias is None
            else result.ani_bias.to_dict(),
        },
        'notes': list(result.notes),
        'reading': READING_NOTE,
    }


def search_report(result: SearchResult) -> Dict[str, Any]:
    out = result.to_dict()
    out['version'] = __version__
    return out


def _row(label: str, value: Any) -> str:
    if isinstance(value, float):
        value = '{:.12g}'.format(value)
    return str.format('{:<28} {:<20}', label, str(value))


def run_table(result: RunResult) -> str:
    """Human summary of a run, runtime included."""

    dec = result.decomposition
    lines = ['', _row('Scenario', result.scenario.name), '-' * 49,
             _row('tau', result.tau.value)]  # type: List[str]
    if dec is not None:
        lines.append(_row('tau*', dec.tau_star))
        lines.append(_row('R_n', dec.r_n))
    for i, value in result.tau.per_unit.items():
        lines.append(_row('  tau unit {}'.format(i), value))
    for name, check in result.assumptions.items():
        lines.append(_row(name, check.verdict.name))
    for name, verdict in result.criteria.items():
        lines.append(_row('sign ' + name, '{} ({})'.format(
            verdict.verdict.value, verdict.premise.value)))
    for report in result.ani:
        lines.append(_row('gamma_hat({})'.format(report.radius),
                          report.gamma_hat))
    if result.ani_bias is not None:
        lines.append(_row('|tau - tau*|', result.ani_bias.gap))
    for note in result.notes:
        lines.append(_row('note', note))
    lines.append(_row('runtime (s)', round(result.elapsed, 3)))
    lines.append('')
    return '\n'.join(lines)


def search_table(result: SearchResult) -> str:
    lines = ['', _row('Search', result.name), '-' * 49,
             _row('evaluated', result.evaluated),
             _row('skipped', result.skipped),
             _row('found', len(result.hits))]
    for hit in result.hits:
        lines.append(_row('  candidate {}'.format(hit.index),
                          'tau = {:.6g}'.format(hit.tau)))
    lines.append(_row('runtime (s)', round(result.elapsed, 3)))
    lines.append('')
    return '\n'.join(lines)


def coupling_table(report: Dict[str, Any]) -> str:
    header = str.format('{:<10} {:<4} {:<6} {:<3} {:<4} {:<4} {:<12} {:<8}',
                        'Graph', 'n', 'p', 'd', 'tau', "tau'", 'max TV',
                        'Order ok')
    lines = ['', header, '-' * len(header)]
    for row in report['rows']:
        lines.append(str.format(
            '{:<10} {:<4} {:<6} {:<3} {:<4} {:<4} {:<12.3g} {:<8}',
            row['graph'], row['n'], row['p'], row['d'], row['tau_hi'],
            row['tau_lo'], max(row['tv_low'], row['tv_high']),
            str(row['ordered'] and not row.get('order_violations', 0))))
    for row in report['heterogeneous']:
        lines.append(_row('heterogeneous {} tau={}'.format(
            row['graph'], row['tau_hi']), max(row['tv_low'], row['tv_high'])))
    lines.append(_row('sampled pairs', report['sampled_pairs']))
    lines.append(_row('order violations', report['order_violations']))
    lines.append('')
    return '\n'.join(lines)
