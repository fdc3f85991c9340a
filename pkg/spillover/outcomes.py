"""
Copyright (c) 2020 Nathan Telles

This Source Code Form is subject to the terms of the Mozilla Public
License, v. 2.0. If a copy of the MPL was not distributed with this
file, You can obtain one at http://mozilla.org/MPL/2.0/.
"""

import logging
import math
from abc import ABC, abstractmethod
from typing import (Any, Callable, Dict, Hashable, Iterable, List, Mapping,
                    NamedTuple, Sequence, Tuple, Union)
from typing import Optional as Opt

import networkx as nx
import numpy as np

from .errors import FamilyEvaluationError, MissingOutcome
from .exposures import ExposureSpec, exposure_codes
from .netcore import (AssignmentVector, Network, UnitSet, all_masks,
                      project, require_enumerable)
from .verdicts import HOLDS, TOLERANCE, CheckResult, Verdict

log = logging.getLogger(__name__)

DEFAULT_CONTEXT_ID = 'c0'


class Context:
    """One realization of the conditioning variables.

    A context carries its weight in the outer expectation, the per-unit
    discrete covariates X and, optionally, one realization of the outcome
    shocks. The network is shared by every context.
    """

    def __init__(self, ctx_id: str = DEFAULT_CONTEXT_ID, weight: float = 1.0,
                 covariates: Opt[Mapping[str, Sequence[Hashable]]] = None,
                 shocks: Opt[Sequence[float]] = None) -> None:
        if weight < 0 or not math.isfinite(weight):
            raise ValueError(
                "Context '{}' has invalid weight {}".format(ctx_id, weight))
        self._id = ctx_id
        self._weight = float(weight)
        self._covariates = {name: tuple(values) for name, values in
                            sorted((covariates or {}).items())}
        self._shocks = None if shocks is None else tuple(
            float(v) for v in shocks)

    @property
    def ctx_id(self) -> str:
        return self._id

    @property
    def weight(self) -> float:
        return self._weight

    @property
    def covariates(self) -> Dict[str, Tuple[Hashable, ...]]:
        return dict(self._covariates)

    @property
    def shocks(self) -> Opt[Tuple[float, ...]]:
        return self._shocks

    @property
    def covariate_key(self) -> Tuple[Tuple[str, Tuple[Hashable, ...]], ...]:
        """Contexts with equal keys differ only in their shock realization."""

        return tuple(self._covariates.items())

    def restrict(self, units: UnitSet
                 ) -> Tuple[Dict[str, Tuple[Hashable, ...]],
                            Opt[Tuple[float, ...]]]:
        """Covariates and shocks of the given units, in unit order."""

        covariates = {name: tuple(values[u - 1] for u in units)
                      for name, values in self._covariates.items()}
        shocks = None
        if self._shocks is not None:
            shocks = tuple(self._shocks[u - 1] for u in units)
        return covariates, shocks

    def check_size(self, n: int) -> List[str]:
        problems = []
        for name, values in self._covariates.items():
            if len(values) != n:
                problems.append(
                    "context '{}': covariate '{}' has {} values for {} "
                    "units".format(self._id, name, len(values), n))
        if self._shocks is not None and len(self._shocks) != n:
            problems.append("context '{}': {} shocks for {} units".format(
                self._id, len(self._shocks), n))
        return problems

    def to_dict(self) -> Dict[str, Any]:
        out = {'id': self._id, 'weight': self._weight}  # type: Dict[str, Any]
        if self._covariates:
            out['covariates'] = {k: list(v)
                                 for k, v in self._covariates.items()}
        if self._shocks is not None:
            out['shocks'] = list(self._shocks)
        return out

    def __repr__(self) -> str:
        return 'Context({!r}, weight={})'.format(self._id, self._weight)


DEFAULT_CONTEXT = Context()


def check_weights(contexts: Sequence[Context]) -> None:
    if not contexts:
        raise ValueError('At least one context is required')
    ids = [c.ctx_id for c in contexts]
    if len(set(ids)) != len(ids):
        raise ValueError('Context ids must be unique')
    total = sum(c.weight for c in contexts)
    if abs(total - 1.0) > TOLERANCE:
        raise ValueError(
            'Context weights sum to {!r}, not 1'.format(total))


class OutcomeModel:
    """Potential outcome table E[Y_i(d) | c] for every context and unit.

    Cells are stored sparsely as {(context id, unit, assignment code): value}
    and expanded lazily into one array per context of shape (n, 2^n), with
    NaN marking cells that have neither a value nor a default.
    """

    def __init__(self, n: int,
                 contexts: Sequence[Context] = (DEFAULT_CONTEXT,),
                 entries: Opt[Mapping[Tuple[str, int, int], float]] = None,
                 default: Opt[float] = None) -> None:
        require_enumerable(n)
        check_weights(contexts)
        self._n = n
        self._contexts = tuple(contexts)
        self._by_id = {c.ctx_id: c for c in self._contexts}
        self._default = None if default is None else float(default)
        self._entries = {}  # type: Dict[Tuple[str, int, int], float]
        self._arrays = {}  # type: Dict[str, np.ndarray]

        for (ctx_id, unit, bits), value in (entries or {}).items():
            if ctx_id not in self._by_id:
                raise ValueError("Outcome for unknown context '{}'".format(
                    ctx_id))
            if not 1 <= unit <= n:
                raise ValueError('Outcome for unit {} outside 1..{}'.format(
                    unit, n))
            if not 0 <= bits < 1 << n:
                raise ValueError(
                    'Assignment code {} out of range'.format(bits))
            if not math.isfinite(value):
                raise ValueError('Outcome for unit {} is not finite'.format(
                    unit))
            self._entries[(ctx_id, unit, bits)] = float(value)

    @classmethod
    def from_arrays(cls, n: int, contexts: Sequence[Context],
                    arrays: Mapping[str, np.ndarray]) -> 'OutcomeModel':
        """Model from dense per-context arrays of shape (n, 2^n)."""

        model = cls(n, contexts)
        for ctx in model.contexts:
            table = np.array(arrays[ctx.ctx_id], dtype=float)
            if table.shape != (n, 1 << n):
                raise ValueError("Outcome array for '{}' has shape {}".format(
                    ctx.ctx_id, table.shape))
            if not np.all(np.isfinite(table)):
                raise ValueError("Outcome array for '{}' is not finite".format(
                    ctx.ctx_id))
            table.setflags(write=False)
            model._arrays[ctx.ctx_id] = table
        return model

    @classmethod
    def from_function(cls, n: int,
                      fn: Callable[[Context, int, AssignmentVector], float],
                      contexts: Sequence[Context] = (DEFAULT_CONTEXT,)
                      ) -> 'OutcomeModel':
        masks = all_masks(n)
        arrays = {}
        for ctx in contexts:
            arrays[ctx.ctx_id] = np.array(
                [[fn(ctx, i, AssignmentVector(int(b), n)) for b in masks]
                 for i in range(1, n + 1)], dtype=float)
        return cls.from_arrays(n, contexts, arrays)

    @classmethod
    def zeros(cls, n: int) -> 'OutcomeModel':
        return cls(n, default=0.0)

    @property
    def n(self) -> int:
        return self._n

    @property
    def contexts(self) -> Tuple[Context, ...]:
        return self._contexts

    @property
    def default(self) -> Opt[float]:
        return self._default

    def context(self, ctx_id: str) -> Context:
        return self._by_id[ctx_id]

    def table(self, ctx_id: str) -> np.ndarray:
        """Dense (n, 2^n) table for a context, NaN where no value exists."""

        if ctx_id not in self._arrays:
            fill = np.nan if self._default is None else self._default
            table = np.full((self._n, 1 << self._n), fill, dtype=float)
            for (c, unit, bits), value in self._entries.items():
                if c == ctx_id:
                    table[unit - 1, bits] = value
            table.setflags(write=False)
            self._arrays[ctx_id] = table
        return self._arrays[ctx_id]

    def unit_vector(self, ctx_id: str, i: int) -> np.ndarray:
        return self.table(ctx_id)[i - 1]

    def values(self, ctx_id: str, i: int) -> np.ndarray:
        """Every outcome of unit i in a context; missing cells are errors."""

        row = self.unit_vector(ctx_id, i)
        missing = np.flatnonzero(np.isnan(row))
        if missing.size:
            raise MissingOutcome(ctx_id, i, str(AssignmentVector(
                int(missing[0]), self._n)))
        return row

    def mean_outcome(self, ctx_id: str, i: int, d: AssignmentVector) -> float:
        value = self.unit_vector(ctx_id, i)[d.bits]
        if np.isnan(value):
            raise MissingOutcome(ctx_id, i, str(d))
        return float(value)

    def __repr__(self) -> str:
        return 'OutcomeModel(n={}, contexts={})'.format(
            self._n, [c.ctx_id for c in self._contexts])


def context_id(c: Union[Context, str]) -> str:
    return c.ctx_id if isinstance(c, Context) else c


def mean_outcome(m: OutcomeModel, c: Union[Context, str], i: int,
                 d: AssignmentVector) -> float:
    return m.mean_outcome(context_id(c), i, d)


def _first_disagreement(keys: np.ndarray, y: np.ndarray
                        ) -> Opt[Tuple[int, int]]:
    """First code whose outcome differs from the first code with its key."""

    _, first, inverse = np.unique(keys, return_index=True, return_inverse=True)
    representative = first[inverse.ravel()]
    bad = np.flatnonzero(np.abs(y - y[representative]) > TOLERANCE)
    if not bad.size:
        return None
    k = int(bad[0])
    return int(representative[k]), k


def _disagreement_witness(m: OutcomeModel, ctx_id: str, i: int,
                          pair: Tuple[int, int]) -> Dict[str, Any]:
    y = m.values(ctx_id, i)
    d, d_prime = pair
    return {
        'context': ctx_id,
        'unit': i,
        'd': str(AssignmentVector(d, m.n)),
        'd_prime': str(AssignmentVector(d_prime, m.n)),
        'y': float(y[d]),
        'y_prime': float(y[d_prime]),
    }


def check_correct_specification(m: OutcomeModel, f: ExposureSpec,
                                net: Network) -> CheckResult:
    """Is every outcome a function of the unit's own exposure value?"""

    for ctx in m.contexts:
        for i in net.units:
            codes = exposure_codes(f, net, i).codes
            pair = _first_disagreement(codes, m.values(ctx.ctx_id, i))
            if pair is not None:
                return CheckResult(Verdict.FAILS, _disagreement_witness(
                    m, ctx.ctx_id, i, pair))
    return HOLDS


def check_k_locality(m: OutcomeModel, net: Network, k_prime: int
                     ) -> CheckResult:
    """Do outcomes depend only on the K'-neighborhood treatment subvector?"""

    if k_prime < 0:
        raise ValueError('K_prime must be non-negative')
    masks = all_masks(net.n)
    for ctx in m.contexts:
        for i in net.units:
            keys = project(masks, net.neighborhood(i, k_prime))
            pair = _first_disagreement(keys, m.values(ctx.ctx_id, i))
            if pair is not None:
                witness = _disagreement_witness(m, ctx.ctx_id, i, pair)
                witness['k_prime'] = k_prime
                return CheckResult(Verdict.FAILS, witness)
    return HOLDS


def pattern_bits(m: int) -> np.ndarray:
    """(2^m, m) matrix of the bits of every sub-word code."""

    codes = np.arange(1 << m, dtype=np.int64)
    return (codes[:, None] >> np.arange(m)) & 1


class StructuralFamily(ABC):
    """A structural outcome rule g evaluable on any unit subset.

    Evaluated on all units it is the full model g_n; evaluated on the
    s-neighborhood of a unit it is the truncated model used by the
    approximate neighborhood interference check.
    """

    def __init__(self, declared_gamma: Opt[Mapping[int, float]] = None
                 ) -> None:
        schedule = sorted((int(s), float(g))
                          for s, g in (declared_gamma or {}).items())
        for (_, g_a), (_, g_b) in zip(schedule, schedule[1:]):
            if g_b > g_a + TOLERANCE:
                raise ValueError('declared_gamma must be non-increasing in s')
        self._declared = dict(schedule)

    @property
    def declared_gamma(self) -> Dict[int, float]:
        return dict(self._declared)

    def declared_at(self, s: int) -> Opt[float]:
        """Declared decay at radius s, carried forward from smaller radii."""

        below = [r for r in self._declared if r <= s]
        if not below:
            return None
        return self._declared[max(below)]

    @abstractmethod
    def evaluate(self, sub: Network, ego: int, d_sub: AssignmentVector,
                 covariates: Mapping[str, Tuple[Hashable, ...]],
                 shocks: Opt[Tuple[float, ...]]) -> float:
        """g_|S|(ego, d_S) on the induced subnetwork relabeled 1..|S|."""

    def pattern_vector(self, sub: Network, ego: int,
                       covariates: Mapping[str, Tuple[Hashable, ...]],
                       shocks: Opt[Tuple[float, ...]]) -> np.ndarray:
        """Outcome of the ego under every sub-word of the subnetwork."""

        return np.array([self.evaluate(sub, ego, AssignmentVector(code, sub.n),
                                       covariates, shocks)
                         for code in range(1 << sub.n)], dtype=float)

    def outcome_vector(self, net: Network, i: int, units: UnitSet,
                       context: Context = DEFAULT_CONTEXT,
                       radius: Any = None) -> np.ndarray:
        """Outcome of unit i restricted to units, over every full code."""

        covariates, shocks = context.restrict(units)
        try:
            per_pattern = self.pattern_vector(
                net.subnetwork(units), units.index(i) + 1, covariates, shocks)
        except FamilyEvaluationError:
            raise
        except Exception as ex:
            raise FamilyEvaluationError(i, radius, ex) from ex
        return per_pattern[project(all_masks(net.n), units)]

    def full_vector(self, net: Network, i: int,
                    context: Context = DEFAULT_CONTEXT) -> np.ndarray:
        return self.outcome_vector(net, i, net.units, context, 'n')

    def truncated_vector(self, net: Network, i: int, s: int,
                         context: Context = DEFAULT_CONTEXT) -> np.ndarray:
        return self.outcome_vector(net, i, net.neighborhood(i, s), context, s)

    def to_model(self, net: Network,
                 contexts: Sequence[Context] = (DEFAULT_CONTEXT,)
                 ) -> OutcomeModel:
        arrays = {c.ctx_id: np.vstack([self.full_vector(net, i, c)
                                       for i in net.units])
                  for c in contexts}
        return OutcomeModel.from_arrays(net.n, contexts, arrays)


def _shock(shocks: Opt[Tuple[float, ...]], ego: int) -> float:
    return 0.0 if shocks is None else shocks[ego - 1]


class DistanceDecayFamily(StructuralFamily):
    """Y_i = own d_i + scale * sum_j base^-dist(i,j) d_j + e_i.

    Units unreachable from i contribute nothing.
    """

    def __init__(self, own: float = 1.0, base: float = 2.0,
                 scale: float = 1.0,
                 declared_gamma: Opt[Mapping[int, float]] = None) -> None:
        super().__init__(declared_gamma)
        if base <= 1:
            raise ValueError('Distance decay base must exceed 1')
        self.own = own
        self.base = base
        self.scale = scale

    def weights(self, sub: Network, ego: int) -> np.ndarray:
        w = np.zeros(sub.n)
        for j, dist in sub.distances(ego).items():
            w[j - 1] = (self.own if j == ego
                        else self.scale * self.base ** -dist)
        return w

    def pattern_vector(self, sub, ego, covariates, shocks):
        return pattern_bits(sub.n) @ self.weights(sub, ego) + _shock(
            shocks, ego)

    def evaluate(self, sub, ego, d_sub, covariates, shocks):
        bits = np.array(d_sub.as_tuple(), dtype=float)
        return float(bits @ self.weights(sub, ego) + _shock(shocks, ego))


class LocalSumFamily(StructuralFamily):
    """K'-local outcomes: own d_i plus a peer term in the count of treated
    units within radius K' of i.

    peer is either a slope on the count or a table indexed by the count,
    the last entry repeating for larger counts.
    """

    def __init__(self, radius: int, own: float = 1.0,
                 peer: Union[float, Sequence[float]] = 1.0,
                 declared_gamma: Opt[Mapping[int, float]] = None) -> None:
        super().__init__(declared_gamma)
        if radius < 0:
            raise ValueError('LocalSumFamily radius must be non-negative')
        self.radius = radius
        self.own = own
        self.peer = peer

    def _peer_term(self, count: np.ndarray) -> np.ndarray:
        if isinstance(self.peer, (int, float)):
            return self.peer * count
        table = np.asarray(self.peer, dtype=float)
        return table[np.minimum(count, len(table) - 1)]

    def pattern_vector(self, sub, ego, covariates, shocks):
        bits = pattern_bits(sub.n)
        inside = np.zeros(sub.n, dtype=np.int64)
        for j in sub.neighborhood(ego, self.radius):
            if j != ego:
                inside[j - 1] = 1
        count = bits @ inside
        return (self.own * bits[:, ego - 1] + self._peer_term(count)
                + _shock(shocks, ego))

    def evaluate(self, sub, ego, d_sub, covariates, shocks):
        return float(self.pattern_vector(sub, ego, covariates, shocks)[
            d_sub.bits])


class LinearInMeansFamily(StructuralFamily):
    """Endogenous peer effects Y = (I - beta W)^-1 (alpha + theta d + e)
    with W the row-normalized adjacency matrix.
    """

    def __init__(self, alpha: float = 0.0, theta: float = 1.0,
                 beta: float = 0.5,
                 declared_gamma: Opt[Mapping[int, float]] = None) -> None:
        super().__init__(declared_gamma)
        if not abs(beta) < 1:
            raise ValueError('Linear-in-means needs |beta| < 1')
        self.alpha = alpha
        self.theta = theta
        self.beta = beta

    def _multiplier_row(self, sub: Network, ego: int) -> np.ndarray:
        adjacency = nx.to_numpy_array(sub.graph, nodelist=list(sub.units))
        degree = adjacency.sum(axis=1, keepdims=True)
        w = np.divide(adjacency, degree, out=np.zeros_like(adjacency),
                      where=degree > 0)
        system = np.eye(sub.n) - self.beta * w
        unit = np.zeros(sub.n)
        unit[ego - 1] = 1.0
        # Row ego of the inverse is the solution of the transposed system
        return np.linalg.solve(system.T, unit)

    def pattern_vector(self, sub, ego, covariates, shocks):
        row = self._multiplier_row(sub, ego)
        base = np.full(sub.n, self.alpha)
        if shocks is not None:
            base = base + np.asarray(shocks)
        return pattern_bits(sub.n) @ (self.theta * row) + float(row @ base)

    def evaluate(self, sub, ego, d_sub, covariates, shocks):
        return float(self.pattern_vector(sub, ego, covariates, shocks)[
            d_sub.bits])


def truncation_discrepancy(fam: StructuralFamily, net: Network, i: int,
                           s: int,
                           contexts: Sequence[Context] = (DEFAULT_CONTEXT,)
                           ) -> Dict[Hashable, np.ndarray]:
    """Signed g_n - g_|N(i,s)| for unit i over every full code.

    Contexts sharing covariates differ only in their shocks, so their
    discrepancies are averaged by weight into one vector per covariate key.
    """

    groups = {}  # type: Dict[Hashable, List[Context]]
    for ctx in contexts:
        groups.setdefault(ctx.covariate_key, []).append(ctx)

    out = {}
    for key, members in groups.items():
        total = sum(c.weight for c in members)
        if total <= 0:
            continue
        acc = np.zeros(1 << net.n)
        for ctx in members:
            acc += ctx.weight * (fam.full_vector(net, i, ctx)
                                 - fam.truncated_vector(net, i, s, ctx))
        out[key] = acc / total
    return out


class AniReport(NamedTuple):
    radius: int
    per_unit: Dict[int, float]
    gamma_hat: float
    declared: Opt[float]
    within_declared: Opt[bool]

    def to_dict(self) -> Dict[str, Any]:
        return {
            'radius': self.radius,
            'per_unit': {str(i): v for i, v in self.per_unit.items()},
            'gamma_hat': self.gamma_hat,
            'declared': self.declared,
            'within_declared': self.within_declared,
        }


def ani_discrepancy(fam: StructuralFamily, net: Network, s: int,
                    contexts: Sequence[Context] = (DEFAULT_CONTEXT,)
                    ) -> AniReport:
    """Per-unit maxima and overall gamma_hat(s) of the truncation error."""

    if s < 0:
        raise ValueError('ANI radius must be non-negative')
    per_unit = {}
    for i in net.units:
        worst = 0.0
        for vector in truncation_discrepancy(fam, net, i, s,
                                             contexts).values():
            worst = max(worst, float(np.max(np.abs(vector))))
        per_unit[i] = worst

    gamma_hat = max(per_unit.values())
    declared = fam.declared_at(s)
    within = None if declared is None else gamma_hat <= declared + TOLERANCE
    log.debug('gamma_hat(%d) = %r', s, gamma_hat)
    return AniReport(s, per_unit, gamma_hat, declared, within)


def ani_profile(fam: StructuralFamily, net: Network, radii: Iterable[int],
                contexts: Sequence[Context] = (DEFAULT_CONTEXT,)
                ) -> List[AniReport]:
    reports = [ani_discrepancy(fam, net, s, contexts) for s in radii]
    for report in reports:
        if report.within_declared is False:
            log.warning('gamma_hat(%d) = %r exceeds the declared %r',
                        report.radius, report.gamma_hat, report.declared)
    return reports
