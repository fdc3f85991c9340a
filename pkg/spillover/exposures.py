"""
Copyright (c) 2020 Nathan Telles

This Source Code Form is subject to the terms of the Mozilla Public
License, v. 2.0. If a copy of the MPL was not distributed with this
file, You can obtain one at http://mozilla.org/MPL/2.0/.
"""

import logging
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Any, Dict, Iterable, List, NamedTuple
from typing import Optional as Opt
from typing import Tuple, Union

import numpy as np
import parse

from .netcore import (AssignmentVector, Network, UnitSet, all_masks,
                      labeled_isomorphic, project)
from .verdicts import Verdict

log = logging.getLogger(__name__)

OTHER = 'other'

ExposureValue = Union[int, Tuple[int, int], str, Fraction]

_PAIR_FORMAT = parse.compile('({:d},{:d})')
_FRACTION_FORMAT = parse.compile('{:d}/{:d}')


class ExposureKind(Enum):
    DIM = 'dim'
    ANY_TREATED_NEIGHBOR = 'any_treated_neighbor'
    NEIGHBOR_COUNT = 'neighbor_count'
    SUBNETWORK_ISO = 'subnetwork_iso'
    FRACTION_TREATED = 'fraction_treated'


_PAIR_KINDS = (ExposureKind.ANY_TREATED_NEIGHBOR, ExposureKind.NEIGHBOR_COUNT)


class Reference(NamedTuple):
    """Reference pairs (delta, a) and (delta', a) of a subnetwork exposure."""

    network: Network
    treated: AssignmentVector
    control: AssignmentVector


class ExposureSpec:
    """An exposure mapping f(i, d) that only looks at a neighborhood of i."""

    _IMPLIED_RADIUS = {
        ExposureKind.DIM: 0,
        ExposureKind.ANY_TREATED_NEIGHBOR: 1,
        ExposureKind.NEIGHBOR_COUNT: 1,
    }

    def __init__(self, kind: ExposureKind, own_treatment: Opt[int] = None,
                 radius: Opt[int] = None,
                 reference: Opt[Reference] = None) -> None:
        if kind is ExposureKind.SUBNETWORK_ISO:
            if reference is None or radius is None or radius < 0:
                raise ValueError(
                    'Subnetwork exposures need a reference and a radius K')
            size = reference.network.n
            if reference.treated.n != size or reference.control.n != size:
                raise ValueError(
                    'Reference subvectors must have one bit per unit of the '
                    'reference subnetwork')
        elif kind in self._IMPLIED_RADIUS:
            if radius is not None and radius != self._IMPLIED_RADIUS[kind]:
                raise ValueError('{} exposures have K = {}, not {}'.format(
                    kind.value, self._IMPLIED_RADIUS[kind], radius))
            radius = self._IMPLIED_RADIUS[kind]
        else:
            radius = None

        if own_treatment not in (None, 0, 1):
            raise ValueError('own_treatment must be 0 or 1')
        if own_treatment is not None and kind not in _PAIR_KINDS:
            raise ValueError(
                'own_treatment only applies to {} exposures'.format(
                    ' and '.join(k.value for k in _PAIR_KINDS)))

        self._kind = kind
        self._own = own_treatment
        self._radius = radius
        self._reference = reference

    @property
    def kind(self) -> ExposureKind:
        return self._kind

    @property
    def own_treatment(self) -> Opt[int]:
        return self._own

    @property
    def radius(self) -> Opt[int]:
        """K, or None for the fraction treated (it reads every unit)."""

        return self._radius

    @property
    def reference(self) -> Opt[Reference]:
        return self._reference

    def radius_for(self, net: Network) -> int:
        """A radius whose neighborhoods cover everything the mapping reads."""

        if self._radius is None:
            return net.n - 1
        return self._radius

    def neighborhood(self, net: Network, i: int) -> UnitSet:
        if self._radius is None:
            return net.units
        return net.neighborhood(i, self._radius)

    def value(self, net: Network, i: int, d: AssignmentVector
              ) -> ExposureValue:
        units = self.neighborhood(net, i)
        inside, _ = d.split(units)
        return self.pattern_value(net, i, units, inside.bits)

    def pattern_value(self, net: Network, i: int, units: UnitSet,
                      code: int) -> ExposureValue:
        """Exposure value of the neighborhood sub-word code of unit i."""

        treated = bin(code).count('1')
        if self._kind is ExposureKind.FRACTION_TREATED:
            return Fraction(treated, net.n)

        if self._kind is ExposureKind.SUBNETWORK_ISO:
            return self._iso_value(net, units, code)

        own = code >> units.index(i) & 1
        if self._kind is ExposureKind.DIM:
            return own
        if self._kind is ExposureKind.ANY_TREATED_NEIGHBOR:
            return (own, int(treated - own > 0))
        return (own, treated - own)

    def _iso_value(self, net: Network, units: UnitSet, code: int
                   ) -> ExposureValue:
        ref = self._reference
        if ref is None or len(units) != ref.network.n:
            return OTHER

        sub = net.subnetwork(units)
        treat = AssignmentVector(code, len(units))
        if labeled_isomorphic(sub, treat, ref.network, ref.treated).isomorphic:
            return 1
        if labeled_isomorphic(sub, treat, ref.network, ref.control).isomorphic:
            return 0
        return OTHER

    def zero_value(self, net: Network, i: int) -> ExposureValue:
        return self.pattern_value(net, i, self.neighborhood(net, i), 0)

    def parse_value(self, raw: Any) -> ExposureValue:
        """Read an exposure value written in a scenario or on the CLI."""

        if self._kind in _PAIR_KINDS:
            if isinstance(raw, (list, tuple)) and len(raw) == 2:
                return self.check_value((int(raw[0]), int(raw[1])))
            result = _PAIR_FORMAT.parse(str(raw).replace(' ', ''))
            if result is None:
                raise ValueError(
                    "Expected an exposure pair like '(1,2)', got {!r}".format(
                        raw))
            return self.check_value((result[0], result[1]))

        if self._kind is ExposureKind.FRACTION_TREATED:
            text = str(raw).replace(' ', '')
            result = _FRACTION_FORMAT.parse(text)
            if result is not None:
                return Fraction(result[0], result[1])
            return Fraction(text)

        text = str(raw).strip().lower()
        if self._kind is ExposureKind.SUBNETWORK_ISO and text == OTHER:
            return OTHER
        if text not in ('0', '1'):
            raise ValueError(
                'Expected exposure value 0 or 1, got {!r}'.format(raw))
        return int(text)

    def check_value(self, value: ExposureValue) -> ExposureValue:
        """Reject a pair whose own component contradicts own_treatment."""

        if (self._own is not None and isinstance(value, tuple)
                and value[0] != self._own):
            raise ValueError(
                'Exposure value {} has own treatment {}, the mapping fixes '
                'it to {}'.format(self.format_value(value), value[0],
                                  self._own))
        return value

    @staticmethod
    def format_value(value: ExposureValue) -> str:
        if isinstance(value, tuple):
            return '({},{})'.format(*value)
        return str(value)

    def describe_value(self, value: ExposureValue) -> Dict[str, Any]:
        """Named components of an exposure value for reports.

        The treated-neighbor count is called tau_count so that it cannot be
        confused with the estimand.
        """

        if self._kind is ExposureKind.NEIGHBOR_COUNT and isinstance(
                value, tuple):
            return {'own': value[0], 'tau_count': value[1]}
        if self._kind is ExposureKind.ANY_TREATED_NEIGHBOR and isinstance(
                value, tuple):
            return {'own': value[0], 'any_treated_neighbor': value[1]}
        return {'value': self.format_value(value)}

    def to_dict(self) -> Dict[str, Any]:
        out = {'kind': self._kind.value}  # type: Dict[str, Any]
        if self._own is not None:
            out['own_treatment'] = self._own
        if self._kind is ExposureKind.SUBNETWORK_ISO and self._reference:
            out['K'] = self._radius
            out['reference'] = {
                'network': self._reference.network.to_dict(),
                'treated': str(self._reference.treated),
                'control': str(self._reference.control),
            }
        return out

    def _key(self) -> Tuple[Any, ...]:
        return (self._kind, self._own, self._radius, self._reference)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ExposureSpec):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self) -> int:
        return hash(self._key())

    def __repr__(self) -> str:
        return 'ExposureSpec({})'.format(self.to_dict())


def exposure_value(f: ExposureSpec, net: Network, i: int,
                   d: AssignmentVector) -> ExposureValue:
    return f.value(net, i, d)


@lru_cache(maxsize=4096)
def pattern_values(f: ExposureSpec, net: Network, i: int
                   ) -> Tuple[ExposureValue, ...]:
    """Exposure value of every neighborhood sub-word of unit i."""

    units = f.neighborhood(net, i)
    return tuple(f.pattern_value(net, i, units, code)
                 for code in range(1 << len(units)))


class ExposureCodes(NamedTuple):
    units: UnitSet
    # Distinct exposure values in order of first appearance
    values: Tuple[ExposureValue, ...]
    # Index into values for every full assignment code
    codes: np.ndarray


def exposure_codes(f: ExposureSpec, net: Network, i: int) -> ExposureCodes:
    units = f.neighborhood(net, i)
    per_pattern = pattern_values(f, net, i)
    distinct = list(dict.fromkeys(per_pattern))
    index = {value: k for k, value in enumerate(distinct)}
    pattern_codes = np.array([index[v] for v in per_pattern], dtype=np.int64)
    codes = pattern_codes[project(all_masks(net.n), units)]
    return ExposureCodes(units, tuple(distinct), codes)


def event_patterns(f: ExposureSpec, net: Network, i: int,
                   t: ExposureValue) -> np.ndarray:
    """Neighborhood sub-words of unit i whose exposure equals t."""

    return np.array([code for code, value in enumerate(
        pattern_values(f, net, i)) if value == t], dtype=np.int64)


def event_mask(f: ExposureSpec, net: Network, i: int,
               t: ExposureValue) -> np.ndarray:
    """Boolean indicator of {T_i = t} over every full assignment code."""

    per_pattern = np.array([value == t for value in pattern_values(f, net, i)],
                           dtype=bool)
    return per_pattern[project(all_masks(net.n), f.neighborhood(net, i))]


def subpopulation(f: ExposureSpec, net: Network, degree: Opt[int] = None,
                  min_degree: Opt[int] = None,
                  units: Opt[Iterable[int]] = None) -> UnitSet:
    """The units the estimand averages over.

    An explicit list of units wins. Otherwise the kind decides: every unit
    for the difference in means and the fraction treated, units with at
    least min_degree (default one) neighbors for any treated neighbor, units
    with exactly degree neighbors for the neighbor count, and units whose
    K-neighborhood subnetwork is isomorphic to the reference for subnetwork
    exposures.
    """

    if units is not None:
        chosen = UnitSet(units)
    elif f.kind in (ExposureKind.DIM, ExposureKind.FRACTION_TREATED):
        chosen = net.units
    elif f.kind is ExposureKind.SUBNETWORK_ISO:
        chosen = UnitSet(i for i in net.units
                         if _has_reference_shape(f, net, i))
    elif f.kind is ExposureKind.NEIGHBOR_COUNT and degree is not None:
        chosen = UnitSet(i for i in net.units if net.degree(i) == degree)
    else:
        floor = 1 if min_degree is None else min_degree
        chosen = UnitSet(i for i in net.units if net.degree(i) >= floor)

    if not chosen:
        log.warning('Empty subpopulation for %s exposure', f.kind.value)
    return chosen


def _has_reference_shape(f: ExposureSpec, net: Network, i: int) -> bool:
    ref = f.reference
    units = f.neighborhood(net, i)
    if ref is None or len(units) != ref.network.n:
        return False
    blank = AssignmentVector(0, len(units))
    return labeled_isomorphic(net.subnetwork(units), blank, ref.network,
                              blank).isomorphic


class PindownResult(NamedTuple):
    verdict: Verdict
    unit: int
    # The unique neighborhood subvector when the check holds
    delta: Opt[AssignmentVector]
    witnesses: Tuple[AssignmentVector, ...] = ()

    @property
    def holds(self) -> bool:
        return self.verdict is Verdict.HOLDS

    def to_dict(self) -> Dict[str, Any]:
        return {
            'verdict': self.verdict.name,
            'unit': self.unit,
            'delta': None if self.delta is None else str(self.delta),
            'witnesses': [str(w) for w in self.witnesses],
        }


def check_pindown(f: ExposureSpec, net: Network, i: int,
                  t_prime: ExposureValue) -> PindownResult:
    """Does T_i = t' fix the whole neighborhood subvector of i?"""

    all_masks(net.n)  # cap check
    size = len(f.neighborhood(net, i))
    attaining = [
        AssignmentVector(int(code), size)
        for code in event_patterns(f, net, i, t_prime)
    ]  # type: List[AssignmentVector]

    if not attaining:
        return PindownResult(Verdict.FAILS_EMPTY, i, None)
    if len(attaining) > 1:
        return PindownResult(Verdict.FAILS, i, None, tuple(attaining[:2]))
    return PindownResult(Verdict.HOLDS, i, attaining[0])
