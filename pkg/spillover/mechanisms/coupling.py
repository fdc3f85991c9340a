"""
Copyright (c) 2020 Nathan Telles

This Source Code Form is subject to the terms of the Mozilla Public
License, v. 2.0. If a copy of the MPL was not distributed with this
file, You can obtain one at http://mozilla.org/MPL/2.0/.
"""

import itertools
import logging
from math import perm
from typing import Any, Dict, NamedTuple, Sequence, Tuple, Union

import numpy as np

from ..errors import CouplingOrderViolation, CouplingPreconditionError
from ..exposures import ExposureKind, ExposureSpec
from ..netcore import AssignmentVector, Network, UnitSet, all_masks, embed
from ..verdicts import TOLERANCE
from .mechanism import conditional_law
from .tables import ProductBernoulli, product_law

log = logging.getLogger(__name__)

Probability = Union[float, Sequence[float]]

NEIGHBOR_COUNT = ExposureSpec(ExposureKind.NEIGHBOR_COUNT)


class CoupledPair(NamedTuple):
    """Assignments with tau_lo and tau_hi treated neighbors, high >= low."""

    low: AssignmentVector
    high: AssignmentVector

    @classmethod
    def ordered(cls, low: AssignmentVector,
                high: AssignmentVector) -> 'CoupledPair':
        if not high.dominates(low):
            raise CouplingOrderViolation(low, high)
        return cls(low, high)


def _unit_probabilities(net: Network, p: Probability) -> np.ndarray:
    values = np.full(net.n, float(p)) if np.isscalar(p) else np.array(
        p, dtype=float)
    if values.shape != (net.n,):
        raise CouplingPreconditionError(
            'Expected one probability per unit ({})'.format(net.n))
    if np.any(values <= 0) or np.any(values >= 1):
        raise CouplingPreconditionError(
            'Outside probabilities must lie strictly between 0 and 1')
    return values


def _check(net: Network, i: int, d: int, tau_hi: int, tau_lo: int,
           p: Probability) -> Tuple[UnitSet, UnitSet, np.ndarray]:
    if d not in (0, 1):
        raise CouplingPreconditionError('Ego treatment must be 0 or 1')
    gamma = net.degree(i)
    if not gamma >= tau_hi > tau_lo > 0:
        raise CouplingPreconditionError(
            'Need degree {} >= tau_hi {} > tau_lo {} > 0 for unit {}'.format(
                gamma, tau_hi, tau_lo, i))
    neighbors = net.neighbors(i)
    outside = net.neighborhood(i, 1).complement(net.n)
    return neighbors, outside, _unit_probabilities(net, p)


def sample_coupled_pair(net: Network, i: int, d: int, tau_hi: int,
                        tau_lo: int, p: Probability,
                        rng: np.random.Generator) -> CoupledPair:
    """One draw of the urn coupling.

    Outside units are independent Bernoulli(p). tau_lo neighbor indices are
    drawn without replacement and treated in low; tau_hi - tau_lo further
    indices are drawn and treated on top of them in high.
    """

    neighbors, outside, probs = _check(net, i, d, tau_hi, tau_lo, p)
    bits = d << (i - 1)
    for unit in outside:
        if rng.random() < probs[unit - 1]:
            bits |= 1 << (unit - 1)

    drawn = rng.choice(len(neighbors), size=tau_hi, replace=False)
    members = neighbors.members
    low = bits
    for k in drawn[:tau_lo]:
        low |= 1 << (members[k] - 1)
    high = low
    for k in drawn[tau_lo:]:
        high |= 1 << (members[k] - 1)

    return CoupledPair.ordered(AssignmentVector(low, net.n),
                               AssignmentVector(high, net.n))


def sample_coupled_pairs(net: Network, i: int, d: int, tau_hi: int,
                         tau_lo: int, p: Probability,
                         rng: np.random.Generator, size: int
                         ) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorized sample_coupled_pair returning (low, high) code arrays."""

    neighbors, outside, probs = _check(net, i, d, tau_hi, tau_lo, p)
    base = np.full(size, d << (i - 1), dtype=np.int64)
    if len(outside):
        cols = np.array(outside.members) - 1
        treated = rng.random((size, len(cols))) < probs[cols]
        base |= (treated.astype(np.int64) << cols).sum(axis=1)

    # Random permutations of the neighbor indices, one per row
    order = np.argsort(rng.random((size, len(neighbors))), axis=1)
    shifts = np.array(neighbors.members, dtype=np.int64) - 1
    flags = np.int64(1) << shifts[order]
    low = base | flags[:, :tau_lo].sum(axis=1)
    high = low | flags[:, tau_lo:tau_hi].sum(axis=1)
    return low, high


def order_violations(low: np.ndarray, high: np.ndarray) -> int:
    """Number of pairs where some unit is treated in low but not in high."""

    return int(np.count_nonzero(low & ~high))


class CouplingLaw(NamedTuple):
    law_low: np.ndarray
    law_high: np.ndarray
    joint: Dict[Tuple[int, int], float]


def exact_coupling_law(net: Network, i: int, d: int, tau_hi: int,
                       tau_lo: int, p: Probability) -> CouplingLaw:
    """Exact law of the coupling by enumerating every urn draw and every
    outside pattern.
    """

    neighbors, outside, probs = _check(net, i, d, tau_hi, tau_lo, p)
    all_masks(net.n)  # cap check

    gamma = len(neighbors)
    draw_prob = 1.0 / perm(gamma, tau_hi)
    inner = {}  # type: Dict[Tuple[int, int], float]
    for drawn in itertools.permutations(range(gamma), tau_hi):
        low = sum(1 << k for k in drawn[:tau_lo])
        high = low | sum(1 << k for k in drawn[tau_lo:])
        key = (low, high)
        inner[key] = inner.get(key, 0.0) + draw_prob

    outside_law = product_law(probs[np.array(outside.members, dtype=np.int64)
                                    - 1]) if len(outside) else np.ones(1)
    outside_masks = embed(np.arange(len(outside_law), dtype=np.int64),
                          outside)
    ego = d << (i - 1)

    law_low = np.zeros(1 << net.n)
    law_high = np.zeros(1 << net.n)
    joint = {}  # type: Dict[Tuple[int, int], float]
    for (low_nb, high_nb), weight in inner.items():
        low_code = int(embed(np.array([low_nb]), neighbors)[0]) | ego
        high_code = int(embed(np.array([high_nb]), neighbors)[0]) | ego
        low_codes = outside_masks | low_code
        high_codes = outside_masks | high_code
        mass = weight * outside_law
        np.add.at(law_low, low_codes, mass)
        np.add.at(law_high, high_codes, mass)
        for lo, hi, m in zip(low_codes, high_codes, mass):
            joint[(int(lo), int(hi))] = joint.get((int(lo), int(hi)), 0.0) \
                + float(m)
    return CouplingLaw(law_low, law_high, joint)


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())


class CouplingCheck(NamedTuple):
    unit: int
    d: int
    tau_hi: int
    tau_lo: int
    tv_low: float
    tv_high: float
    ordered: bool

    @property
    def exact(self) -> bool:
        """Both marginals equal the conditional laws and the joint is
        supported on ordered pairs.
        """

        return (self.tv_low <= TOLERANCE and self.tv_high <= TOLERANCE
                and self.ordered)

    def to_dict(self) -> Dict[str, Any]:
        out = self._asdict()
        out['exact'] = self.exact
        return out


def verify_coupling(net: Network, i: int, d: int, tau_hi: int, tau_lo: int,
                    p: Probability) -> CouplingCheck:
    """Compare the exact coupling with P(D | T_i = (d, tau)) under
    independent Bernoulli(p) assignment.

    With unit-specific p the urn marginals need not match; the distances
    are reported as they are.
    """

    law = exact_coupling_law(net, i, d, tau_hi, tau_lo, p)
    mech = ProductBernoulli(net.n, p)
    target_low = conditional_law(mech, 'c0', NEIGHBOR_COUNT, net, i,
                                 (d, tau_lo))
    target_high = conditional_law(mech, 'c0', NEIGHBOR_COUNT, net, i,
                                  (d, tau_hi))
    ordered = all(hi & lo == lo for lo, hi in law.joint)
    check = CouplingCheck(i, d, tau_hi, tau_lo,
                          total_variation(law.law_low, target_low),
                          total_variation(law.law_high, target_high),
                          ordered)
    log.debug('coupling tau=%d tau_prime=%d: tv=(%r, %r)', tau_hi, tau_lo,
              check.tv_low, check.tv_high)
    return check
