"""
Copyright (c) 2020 Nathan Telles

This Source Code Form is subject to the terms of the Mozilla Public
License, v. 2.0. If a copy of the MPL was not distributed with this
file, You can obtain one at http://mozilla.org/MPL/2.0/.
"""

import itertools
from typing import Dict, Hashable, List, Sequence
from typing import Optional as Opt

import numpy as np

from ..exposures import ExposureSpec, ExposureValue
from ..netcore import AssignmentVector, Network, all_masks, project
from ..outcomes import DEFAULT_CONTEXT_ID, Context
from ..verdicts import HOLDS, TOLERANCE, CheckResult, Verdict
from .mechanism import ContextRef, Mechanism, conditional_law
from .tables import product_law


def _worst_cell(lhs: np.ndarray, rhs: np.ndarray) -> int:
    """Largest violation; ties go to cells the left side never reaches."""

    gap = np.abs(lhs - rhs)
    order = np.lexsort((lhs > 0, -gap))
    return int(order[0])


def check_ci_selection(mech: Mechanism, c: ContextRef, f: ExposureSpec,
                       net: Network, i: int, t: ExposureValue,
                       t_prime: ExposureValue,
                       radius: Opt[int] = None) -> CheckResult:
    """Does P(D=d | T_i=s) factor into the neighborhood piece given T_i=s
    times the unconditional outside piece, for s in {t, t'}?
    """

    if radius is None:
        radius = f.radius_for(net)
    inside_units = net.neighborhood(i, radius)
    outside_units = inside_units.complement(net.n)
    masks = all_masks(net.n)
    inside = project(masks, inside_units)
    outside = project(masks, outside_units)

    p_outside = np.bincount(outside, weights=mech.law(c),
                            minlength=1 << len(outside_units))

    worst = None
    for s in (t, t_prime):
        lhs = conditional_law(mech, c, f, net, i, s)
        p_inside = np.bincount(inside, weights=lhs,
                               minlength=1 << len(inside_units))
        rhs = p_inside[inside] * p_outside[outside]
        k = _worst_cell(lhs, rhs)
        gap = abs(lhs[k] - rhs[k])
        if gap > TOLERANCE and (worst is None or gap > worst['gap']):
            worst = {
                'unit': i,
                'exposure': f.format_value(s),
                'd': str(AssignmentVector(k, net.n)),
                'lhs': float(lhs[k]),
                'rhs': float(rhs[k]),
                'gap': float(gap),
            }

    if worst is None:
        return HOLDS
    return CheckResult(Verdict.FAILS, worst)


def check_unit_independence(mech: Mechanism,
                            c: ContextRef = DEFAULT_CONTEXT_ID
                            ) -> CheckResult:
    """Is the joint law the product of its unit marginals?

    Pairwise cylinder events {D_j = 1, D_k = 1} are tried first so the
    witness is a pair of units whenever one exists.
    """

    law = mech.law(c)
    p = mech.marginals(c)
    masks = all_masks(mech.n)

    for j, k in itertools.combinations(range(mech.n), 2):
        both = float(law[((masks >> j) & 1 == 1) & ((masks >> k) & 1 == 1)]
                     .sum())
        if abs(both - p[j] * p[k]) > TOLERANCE:
            return CheckResult(Verdict.FAILS, {
                'units': [j + 1, k + 1],
                'event': 'D_{}=1, D_{}=1'.format(j + 1, k + 1),
                'joint': both,
                'product': float(p[j] * p[k]),
            })

    product = product_law(p)
    gap = np.abs(law - product)
    b = int(np.argmax(gap))
    if gap[b] > TOLERANCE:
        return CheckResult(Verdict.FAILS, {
            'units': list(range(1, mech.n + 1)),
            'event': 'D={}'.format(AssignmentVector(b, mech.n)),
            'joint': float(law[b]),
            'product': float(product[b]),
        })
    return HOLDS


def check_unconfoundedness(mech: Mechanism, contexts: Sequence[Context]
                           ) -> CheckResult:
    """Contexts that differ only in their outcome shocks must share one
    assignment law.
    """

    groups = {}  # type: Dict[Hashable, List[Context]]
    for ctx in contexts:
        groups.setdefault(ctx.covariate_key, []).append(ctx)

    for members in groups.values():
        first = members[0]
        for other in members[1:]:
            gap = np.abs(mech.law(first) - mech.law(other))
            if np.max(gap) > TOLERANCE:
                b = int(np.argmax(gap))
                return CheckResult(Verdict.FAILS, {
                    'contexts': [first.ctx_id, other.ctx_id],
                    'd': str(AssignmentVector(b, mech.n)),
                    'probs': [float(mech.law(first)[b]),
                              float(mech.law(other)[b])],
                })
    return HOLDS
