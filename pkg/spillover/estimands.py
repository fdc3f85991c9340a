"""
Copyright (c) 2020 Nathan Telles

This Source Code Form is subject to the terms of the Mozilla Public
License, v. 2.0. If a copy of the MPL was not distributed with this
file, You can obtain one at http://mozilla.org/MPL/2.0/.
"""

import logging
from enum import Enum
from typing import (Any, Dict, Iterator, List, NamedTuple, Sequence, Tuple)
from typing import Optional as Opt

import numpy as np

from .errors import EmptySubpopulation, PindownViolation
from .exposures import (ExposureSpec, ExposureValue, check_pindown,
                        event_patterns)
from .mechanisms import Mechanism, conditional_law
from .netcore import (AssignmentVector, Network, UnitSet, all_masks, embed,
                      project)
from .outcomes import (DEFAULT_CONTEXT, Context, OutcomeModel,
                       StructuralFamily, ani_discrepancy,
                       truncation_discrepancy)
from .verdicts import TOLERANCE

log = logging.getLogger(__name__)


class EstimandSpec:
    """tau(t, t') over a subpopulation, weighted contexts and a network."""

    def __init__(self, exposure: ExposureSpec, t: ExposureValue,
                 t_prime: ExposureValue, subpop: UnitSet, net: Network,
                 contexts: Sequence[Context] = (DEFAULT_CONTEXT,)) -> None:
        if t == t_prime:
            raise ValueError('t and t_prime must differ')
        exposure.check_value(t)
        exposure.check_value(t_prime)
        if not subpop:
            raise EmptySubpopulation()
        for i in subpop:
            if not 1 <= i <= net.n:
                raise ValueError('Subpopulation unit {} outside 1..{}'.format(
                    i, net.n))
        self.exposure = exposure
        self.t = t
        self.t_prime = t_prime
        self.subpop = subpop
        self.net = net
        self.contexts = tuple(contexts)

    @property
    def active_contexts(self) -> Tuple[Context, ...]:
        """Contexts with positive weight."""

        return tuple(c for c in self.contexts if c.weight > 0)

    def to_dict(self) -> Dict[str, Any]:
        f = self.exposure
        return {
            'exposure': f.to_dict(),
            't': f.format_value(self.t),
            't_prime': f.format_value(self.t_prime),
            't_components': f.describe_value(self.t),
            't_prime_components': f.describe_value(self.t_prime),
            'subpopulation': list(self.subpop),
        }


def _average(spec: EstimandSpec, terms: Dict[str, float]) -> float:
    active = spec.active_contexts
    total = sum(c.weight for c in active)
    return sum(c.weight * terms[c.ctx_id] for c in active) / total


class TauResult(NamedTuple):
    value: float
    per_unit: Dict[int, float]
    # (unit, context) -> (E[Y | T=t], E[Y | T=t'], contrast)
    per_context: Dict[Tuple[int, str], Tuple[float, float, float]]

    def to_dict(self) -> Dict[str, Any]:
        return {
            'tau': self.value,
            'per_unit': {str(i): v for i, v in self.per_unit.items()},
            'per_context': {'{}@{}'.format(i, c): list(v) for (i, c), v in
                            self.per_context.items()},
        }


def tau(spec: EstimandSpec, m: OutcomeModel, mech: Mechanism) -> TauResult:
    """Exact tau(t, t') with unit and context level terms."""

    per_unit = {}
    per_context = {}
    for i in spec.subpop:
        contrasts = {}
        for ctx in spec.active_contexts:
            y = m.values(ctx.ctx_id, i)
            mean_t = float(conditional_law(mech, ctx, spec.exposure,
                                           spec.net, i, spec.t) @ y)
            mean_tp = float(conditional_law(mech, ctx, spec.exposure,
                                            spec.net, i, spec.t_prime) @ y)
            contrasts[ctx.ctx_id] = mean_t - mean_tp
            per_context[(i, ctx.ctx_id)] = (mean_t, mean_tp, mean_t - mean_tp)
        per_unit[i] = _average(spec, contrasts)

    value = sum(per_unit.values()) / len(per_unit)
    return TauResult(value, per_unit, per_context)


def pindown_deltas(spec: EstimandSpec) -> Dict[int, AssignmentVector]:
    """delta_i for every unit, or PindownViolation for the first failure."""

    deltas = {}
    for i in spec.subpop:
        result = check_pindown(spec.exposure, spec.net, i, spec.t_prime)
        if not result.holds:
            raise PindownViolation(
                i, spec.exposure.format_value(spec.t_prime),
                [str(w) for w in result.witnesses])
        deltas[i] = result.delta
    return deltas


def _delta_codes(spec: EstimandSpec, i: int, delta: AssignmentVector
                 ) -> np.ndarray:
    """Codes of (delta_i, d_-N(i,K)) for every full code d."""

    units = spec.exposure.neighborhood(spec.net, i)
    fixed = int(embed(np.array([delta.bits], dtype=np.int64), units)[0])
    return (all_masks(spec.net.n) & ~units.mask) | fixed


class UnitDecomposition(NamedTuple):
    tau: float
    tau_star: float
    r_n: float


class Decomposition(NamedTuple):
    tau: float
    tau_star: float
    r_n: float
    per_unit: Dict[int, UnitDecomposition]
    deltas: Dict[int, AssignmentVector]

    @property
    def identity_gap(self) -> float:
        return abs(self.tau - (self.tau_star + self.r_n))

    def to_dict(self) -> Dict[str, Any]:
        return {
            'tau': self.tau,
            'tau_star': self.tau_star,
            'R_n': self.r_n,
            'per_unit': {str(i): u._asdict() for i, u in
                         self.per_unit.items()},
            'deltas': {str(i): str(d) for i, d in self.deltas.items()},
        }


def decompose(spec: EstimandSpec, m: OutcomeModel, mech: Mechanism
              ) -> Decomposition:
    """tau, tau* and the selection bias R_n together.

    tau* averages Y_i(d) - Y_i(delta_i, d_-N) under P(d | T_i = t) and R_n
    weighs Y_i(delta_i, d_-N) by P(d | T_i = t) - P(d | T_i = t').
    """

    deltas = pindown_deltas(spec)
    per_unit = {}
    for i in spec.subpop:
        index = _delta_codes(spec, i, deltas[i])
        parts = {'tau': {}, 'star': {}, 'r': {}
                 }  # type: Dict[str, Dict[str, float]]
        for ctx in spec.active_contexts:
            y = m.values(ctx.ctx_id, i)
            y_delta = y[index]
            law_t = conditional_law(mech, ctx, spec.exposure, spec.net, i,
                                    spec.t)
            law_tp = conditional_law(mech, ctx, spec.exposure, spec.net, i,
                                     spec.t_prime)
            parts['tau'][ctx.ctx_id] = float(y @ law_t - y @ law_tp)
            parts['star'][ctx.ctx_id] = float((y - y_delta) @ law_t)
            parts['r'][ctx.ctx_id] = float(y_delta @ (law_t - law_tp))
        per_unit[i] = UnitDecomposition(_average(spec, parts['tau']),
                                        _average(spec, parts['star']),
                                        _average(spec, parts['r']))

    size = len(per_unit)
    return Decomposition(
        sum(u.tau for u in per_unit.values()) / size,
        sum(u.tau_star for u in per_unit.values()) / size,
        sum(u.r_n for u in per_unit.values()) / size,
        per_unit, deltas)


def tau_star(spec: EstimandSpec, m: OutcomeModel, mech: Mechanism) -> float:
    return decompose(spec, m, mech).tau_star


def bias_rn(spec: EstimandSpec, m: OutcomeModel, mech: Mechanism) -> float:
    return decompose(spec, m, mech).r_n


class AniBiasReport(NamedTuple):
    radius: int
    gap: float
    gamma_hat: float
    declared: Opt[float]
    oscillation: float

    @property
    def within_gamma(self) -> bool:
        return self.gap <= self.gamma_hat + TOLERANCE

    @property
    def within_oscillation(self) -> bool:
        return self.gap <= self.oscillation + TOLERANCE

    def to_dict(self) -> Dict[str, Any]:
        out = self._asdict()
        out['within_gamma'] = self.within_gamma
        out['within_oscillation'] = self.within_oscillation
        return out


def ani_bias_check(spec: EstimandSpec, fam: StructuralFamily,
                   mech: Mechanism) -> AniBiasReport:
    """Compare |tau - tau*| with gamma_hat(K) of the structural family.

    The oscillation is the spread of the truncation discrepancy over the
    assignments either conditioning event can produce, which always bounds
    |R_n|. When the discrepancy is one-signed it is at most gamma_hat(K).
    """

    net = spec.net
    radius = spec.exposure.radius_for(net)
    model = fam.to_model(net, spec.contexts)
    dec = decompose(spec, model, mech)
    ani = ani_discrepancy(fam, net, radius, spec.contexts)

    oscillation = 0.0
    for i in spec.subpop:
        index = _delta_codes(spec, i, dec.deltas[i])
        support = np.zeros(1 << net.n, dtype=bool)
        for ctx in spec.active_contexts:
            for s in (spec.t, spec.t_prime):
                support |= conditional_law(mech, ctx, spec.exposure, net, i,
                                           s) > 0
        for discrepancy in truncation_discrepancy(
                fam, net, i, radius, spec.active_contexts).values():
            reached = discrepancy[index][support]
            oscillation = max(oscillation,
                              float(reached.max() - reached.min()))

    report = AniBiasReport(radius, abs(dec.tau - dec.tau_star),
                           ani.gamma_hat, ani.declared, oscillation)
    if not report.within_gamma:
        log.warning('|tau - tau*| = %r exceeds gamma_hat(%d) = %r',
                    report.gap, radius, report.gamma_hat)
    return report


class CriterionKind(Enum):
    GENERAL = 'general'
    PARTIAL = 'partial'
    ORDERED = 'ordered'


class ComparisonEntry(NamedTuple):
    context: str
    d: AssignmentVector
    d_prime: AssignmentVector
    value: float

    def to_dict(self) -> Dict[str, Any]:
        return {'context': self.context, 'd': str(self.d),
                'd_prime': str(self.d_prime), 'value': self.value}


class ComparisonSet:
    """Unit-level contrasts Y_i(d) - Y_i(d') a sign criterion ranges over.

    Pairs are held as code arrays per context and validated against the
    constraints of the kind on construction.
    """

    def __init__(self, owner: int, kind: CriterionKind, spec: EstimandSpec,
                 d: np.ndarray, d_prime: np.ndarray,
                 values: Dict[str, np.ndarray]) -> None:
        self.owner = owner
        self.kind = kind
        self._n = spec.net.n
        self._d = d
        self._d_prime = d_prime
        self._values = values
        self._validate(spec)

    def _validate(self, spec: EstimandSpec) -> None:
        f = spec.exposure
        units = f.neighborhood(spec.net, self.owner)
        hit_t = np.isin(project(self._d, units),
                        event_patterns(f, spec.net, self.owner, spec.t))
        hit_tp = np.isin(project(self._d_prime, units),
                         event_patterns(f, spec.net, self.owner, spec.t_prime))
        ok = hit_t & hit_tp
        if self.kind is not CriterionKind.GENERAL:
            ok &= (self._d & ~units.mask) == (self._d_prime & ~units.mask)
        if self.kind is CriterionKind.ORDERED:
            ok &= (self._d & self._d_prime) == self._d_prime
        if not np.all(ok):
            raise AssertionError(
                'Comparison pair violates the {} constraints'.format(
                    self.kind.value))

    @property
    def contexts(self) -> List[str]:
        return list(self._values)

    @property
    def pairs(self) -> int:
        return len(self._d)

    def __len__(self) -> int:
        return self.pairs * len(self._values)

    def values(self, ctx_id: str) -> np.ndarray:
        return self._values[ctx_id]

    def all_values(self) -> np.ndarray:
        if not self._values:
            return np.zeros(0)
        return np.concatenate(list(self._values.values()))

    def entry(self, ctx_id: str, k: int) -> ComparisonEntry:
        return ComparisonEntry(ctx_id, AssignmentVector(int(self._d[k]),
                                                        self._n),
                               AssignmentVector(int(self._d_prime[k]),
                                                self._n),
                               float(self._values[ctx_id][k]))

    def entries(self) -> Iterator[ComparisonEntry]:
        for ctx_id in self._values:
            for k in range(self.pairs):
                yield self.entry(ctx_id, k)

    def extreme(self, lowest: bool = True) -> Opt[ComparisonEntry]:
        """Smallest (or largest) entry, first in enumeration order."""

        best = None
        for ctx_id, vals in self._values.items():
            if not len(vals):
                continue
            k = int(np.argmin(vals) if lowest else np.argmax(vals))
            if best is None or (vals[k] < best.value if lowest
                                else vals[k] > best.value):
                best = self.entry(ctx_id, k)
        return best

    def __repr__(self) -> str:
        return 'ComparisonSet(unit={}, kind={}, pairs={})'.format(
            self.owner, self.kind.value, self.pairs)


def comparison_set(kind: CriterionKind, spec: EstimandSpec, m: OutcomeModel,
                   i: int) -> ComparisonSet:
    """Enumerate the qualifying (d, d') pairs of unit i.

    Partial and ordered sets iterate the outside subvectors once and pair
    the neighborhood patterns attaining t and t' within each.
    """

    f = spec.exposure
    net = spec.net
    units = f.neighborhood(net, i)
    all_masks(net.n)  # cap check
    inside_t = embed(event_patterns(f, net, i, spec.t), units)
    inside_tp = embed(event_patterns(f, net, i, spec.t_prime), units)

    if kind is CriterionKind.GENERAL:
        outside = units.complement(net.n)
        rest = embed(np.arange(1 << len(outside), dtype=np.int64), outside)
        full_t = (rest[:, None] | inside_t[None, :]).ravel()
        full_tp = (rest[:, None] | inside_tp[None, :]).ravel()
        d = np.repeat(full_t, len(full_tp))
        d_prime = np.tile(full_tp, len(full_t))
    else:
        a = np.repeat(inside_t, len(inside_tp))
        b = np.tile(inside_tp, len(inside_t))
        if kind is CriterionKind.ORDERED:
            keep = (a & b) == b
            a, b = a[keep], b[keep]
        outside = units.complement(net.n)
        rest = embed(np.arange(1 << len(outside), dtype=np.int64), outside)
        d = (rest[:, None] | a[None, :]).ravel()
        d_prime = (rest[:, None] | b[None, :]).ravel()

    values = {}
    for ctx in spec.active_contexts:
        y = m.values(ctx.ctx_id, i)
        values[ctx.ctx_id] = y[d] - y[d_prime]
    return ComparisonSet(i, kind, spec, d, d_prime, values)


class Premise(Enum):
    ALL_NON_NEGATIVE = 'AllNonNegative'
    ALL_NON_POSITIVE = 'AllNonPositive'
    # Every entry is zero, so both one-signed premises hold
    ALL_ZERO = 'AllZero'
    MIXED = 'Mixed'
    EMPTY_SETS = 'EmptySets'


class VerdictKind(Enum):
    PRESERVED = 'PRESERVED'
    VIOLATION = 'VIOLATION'
    VACUOUS = 'VACUOUS'


class SignVerdict(NamedTuple):
    kind: CriterionKind
    premise: Premise
    tau_value: float
    verdict: VerdictKind
    witness: Opt[Dict[str, Any]] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'kind': self.kind.value,
            'premise': self.premise.value,
            'tau': self.tau_value,
            'verdict': self.verdict.value,
            'witness': self.witness,
        }


def classify_premise(values: np.ndarray) -> Premise:
    if not len(values):
        return Premise.EMPTY_SETS
    non_negative = bool(np.all(values >= -TOLERANCE))
    non_positive = bool(np.all(values <= TOLERANCE))
    if non_negative and non_positive:
        return Premise.ALL_ZERO
    if non_negative:
        return Premise.ALL_NON_NEGATIVE
    if non_positive:
        return Premise.ALL_NON_POSITIVE
    return Premise.MIXED


def decide(premise: Premise, tau_value: float) -> VerdictKind:
    if premise in (Premise.MIXED, Premise.EMPTY_SETS):
        return VerdictKind.VACUOUS
    forces_non_negative = premise in (Premise.ALL_NON_NEGATIVE,
                                      Premise.ALL_ZERO)
    forces_non_positive = premise in (Premise.ALL_NON_POSITIVE,
                                      Premise.ALL_ZERO)
    if (forces_non_negative and tau_value < -TOLERANCE) or (
            forces_non_positive and tau_value > TOLERANCE):
        return VerdictKind.VIOLATION
    return VerdictKind.PRESERVED


def _extremes(sets: Sequence[ComparisonSet]) -> Dict[str, Any]:
    out = {}
    for cs in sets:
        low = cs.extreme(lowest=True)
        high = cs.extreme(lowest=False)
        out[str(cs.owner)] = {
            'pairs': cs.pairs,
            'min': None if low is None else low.to_dict(),
            'max': None if high is None else high.to_dict(),
        }
    return out


def check_sign_preservation(kind: CriterionKind, spec: EstimandSpec,
                            m: OutcomeModel, mech: Mechanism) -> SignVerdict:
    """Does a one-signed comparison premise carry over to tau?"""

    result = tau(spec, m, mech)
    sets = [comparison_set(kind, spec, m, i) for i in spec.subpop]
    entries = [cs.all_values() for cs in sets]
    premise = classify_premise(np.concatenate(entries) if entries
                               else np.zeros(0))
    verdict = decide(premise, result.value)

    witness = None
    if verdict is VerdictKind.VIOLATION:
        witness = {
            'tau_per_unit': {str(i): v for i, v in result.per_unit.items()},
            'extremes': _extremes(sets),
        }
        log.info('%s sign preservation violated: tau = %r', kind.value,
                 result.value)
    elif premise is Premise.MIXED:
        lows = [(cs.owner, cs.extreme(True)) for cs in sets]
        highs = [(cs.owner, cs.extreme(False)) for cs in sets]
        owner_low, low = min(((u, e) for u, e in lows if e is not None),
                             key=lambda pair: pair[1].value)
        owner_high, high = max(((u, e) for u, e in highs if e is not None),
                               key=lambda pair: pair[1].value)
        witness = {
            'negative': dict(low.to_dict(), unit=owner_low),
            'positive': dict(high.to_dict(), unit=owner_high),
        }
    return SignVerdict(kind, premise, result.value, verdict, witness)
