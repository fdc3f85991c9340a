"""
Copyright (c) 2020 Nathan Telles

This Source Code Form is subject to the terms of the Mozilla Public
License, v. 2.0. If a copy of the MPL was not distributed with this
file, You can obtain one at http://mozilla.org/MPL/2.0/.
"""

import itertools
import logging
from abc import ABC, abstractmethod
from typing import (Any, Dict, List, Mapping, NamedTuple, Sequence, Tuple)
from typing import Optional as Opt

import numpy as np

from ..errors import InvalidMechanism, NoConvergence
from ..netcore import AssignmentVector, Network, all_masks, popcount, project
from ..outcomes import DEFAULT_CONTEXT, Context
from ..verdicts import TOLERANCE
from .mechanism import Mechanism
from .tables import product_law

log = logging.getLogger(__name__)

# Per unit, the action taken by each private type
Profile = Tuple[Tuple[int, ...], ...]
TypeSupport = Sequence[Sequence[Tuple[float, float]]]


class Utility(ABC):
    """U_i(d_-i, X, A) before the additive private type nu_i."""

    @abstractmethod
    def base(self, net: Network, i: int, ctx: Context) -> np.ndarray:
        """Utility of unit i over every full code; bit i is ignored."""

    @abstractmethod
    def to_dict(self) -> Dict[str, Any]:
        pass


class LinearUtility(Utility):
    """intercept + peer * stat(treated neighbors) + sum_k coef_k X_ik.

    stat is one of 'all' (every neighbor adopts), 'any', 'count' or
    'fraction'. Isolated units see stat 0.
    """

    STATISTICS = ('all', 'any', 'count', 'fraction')

    def __init__(self, intercept: float = 0.0, peer: float = 0.0,
                 statistic: str = 'all',
                 covariate_effects: Opt[Mapping[str, float]] = None) -> None:
        if statistic not in self.STATISTICS:
            raise ValueError(
                "Unknown utility statistic '{}'".format(statistic))
        self.intercept = intercept
        self.peer = peer
        self.statistic = statistic
        self.covariate_effects = dict(covariate_effects or {})

    def base(self, net, i, ctx):
        neighbors = net.neighbors(i)
        count = popcount(project(all_masks(net.n), neighbors)).astype(float)
        size = len(neighbors)
        if size == 0:
            stat = np.zeros_like(count)
        elif self.statistic == 'all':
            stat = (count == size).astype(float)
        elif self.statistic == 'any':
            stat = (count > 0).astype(float)
        elif self.statistic == 'count':
            stat = count
        else:
            stat = count / size

        shift = self.intercept
        covariates = ctx.covariates
        for name, coef in self.covariate_effects.items():
            shift += coef * float(covariates[name][i - 1])
        return shift + self.peer * stat

    def to_dict(self):
        out = {'type': 'linear', 'intercept': self.intercept,
               'peer': self.peer, 'statistic': self.statistic}
        if self.covariate_effects:
            out['covariates'] = dict(self.covariate_effects)
        return out


class TableUtility(Utility):
    """Utilities listed per (unit, code of the other units' actions)."""

    def __init__(self, n: int, values: Mapping[Tuple[int, int], float],
                 default: float = 0.0) -> None:
        self.n = n
        self.values = dict(values)
        self.default = default

    def base(self, net, i, ctx):
        own = 1 << (i - 1)
        table = np.full(1 << net.n, self.default, dtype=float)
        for (unit, code), value in self.values.items():
            if unit == i:
                table[code & ~own] = value
                table[code | own] = value
        return table

    def to_dict(self):
        return {'type': 'table', 'default': self.default,
                'values': [{'unit': u,
                            'others': str(AssignmentVector(c, self.n)),
                            'value': v}
                           for (u, c), v in sorted(self.values.items())]}


def _check_types(types: TypeSupport, n: int, where: str) -> None:
    if len(types) != n:
        raise InvalidMechanism('{}: {} type supports for {} units'.format(
            where, len(types), n))
    for i, support in enumerate(types, 1):
        probs = [p for _, p in support]
        if not support or any(p < 0 for p in probs):
            raise InvalidMechanism(
                '{}: unit {} needs a non-empty type support with '
                'non-negative probabilities'.format(where, i))
        if abs(sum(probs) - 1.0) > TOLERANCE:
            raise InvalidMechanism(
                '{}: type probabilities of unit {} sum to {!r}'.format(
                    where, i, sum(probs)))


class SelectionGame:
    """Incomplete-information adoption game with independent private types.

    Unit i adopts iff E[U_i(D_-i) | nu_i] + nu_i > 0, the expectation taken
    over the other units' independent types.
    """

    def __init__(self, n: int, types: TypeSupport, utility: Utility,
                 context_types: Opt[Mapping[str, TypeSupport]] = None
                 ) -> None:
        _check_types(types, n, 'game types')
        for ctx_id, support in (context_types or {}).items():
            _check_types(support, n, "game types of context '{}'".format(
                ctx_id))
        self.n = n
        self.types = [list(s) for s in types]
        self.utility = utility
        self.context_types = {k: [list(s) for s in v]
                              for k, v in (context_types or {}).items()}

    def types_for(self, ctx_id: str) -> List[List[Tuple[float, float]]]:
        return self.context_types.get(ctx_id, self.types)

    def to_dict(self) -> Dict[str, Any]:
        out = {'types': [[list(t) for t in s] for s in self.types],
               'utility': self.utility.to_dict()}
        if self.context_types:
            out['context_types'] = self.context_types
        return out


def adoption_probabilities(types: Sequence[Sequence[Tuple[float, float]]],
                           profile: Profile) -> np.ndarray:
    return np.array([sum(p for (_, p), act in zip(support, actions) if act)
                     for support, actions in zip(types, profile)])


class _BestResponse:
    """Best-response map of a game in one context."""

    def __init__(self, g: SelectionGame, net: Network, ctx: Context) -> None:
        if net.n != g.n:
            raise InvalidMechanism('Game has {} units, network {}'.format(
                g.n, net.n))
        self.types = g.types_for(ctx.ctx_id)
        self.bits = (all_masks(net.n)[:, None] >> np.arange(net.n)) & 1
        self.base = [g.utility.base(net, i, ctx) for i in net.units]

    def __call__(self, profile: Profile) -> Profile:
        q = adoption_probabilities(self.types, profile)
        factors = np.where(self.bits == 1, q, 1.0 - q)
        response = []
        for k, support in enumerate(self.types):
            # Sum over codes with the own bit clear, others weighted by q
            others = np.delete(factors, k, axis=1).prod(axis=1)
            weights = np.where(self.bits[:, k] == 0, others, 0.0)
            expected = float(weights @ self.base[k])
            response.append(tuple(int(expected + nu > TOLERANCE)
                                  for nu, _ in support))
        return tuple(response)

    def constant(self, action: int) -> Profile:
        return tuple(tuple(action for _ in s) for s in self.types)

    def iterate(self, start: Profile, ctx_id: str) -> Tuple[Profile, int]:
        visited = {start: 0}  # type: Dict[Profile, int]
        profile = start
        while True:
            nxt = self(profile)
            if nxt == profile:
                return profile, len(visited)
            if nxt in visited:
                raise NoConvergence(ctx_id, len(visited) - visited[nxt])
            visited[nxt] = len(visited)
            profile = nxt


class GameInduced(Mechanism):
    """Product law pushed forward from the types through a profile."""

    def __init__(self, n: int, adoption: Mapping[str, Sequence[float]],
                 profiles: Opt[Mapping[str, Profile]] = None,
                 notes: Sequence[str] = ()) -> None:
        super().__init__(n)
        self._adoption = {k: np.array(v, dtype=float)
                          for k, v in adoption.items()}
        self._profiles = dict(profiles or {})
        self.notes = list(notes)

    def adoption(self, ctx_id: str) -> np.ndarray:
        return self._adoption[ctx_id].copy()

    def profile(self, ctx_id: str) -> Opt[Profile]:
        return self._profiles.get(ctx_id)

    def _build_law(self, ctx_id: str) -> np.ndarray:
        if ctx_id not in self._adoption:
            raise InvalidMechanism(
                "Game was not solved for context '{}'".format(ctx_id))
        return product_law(self._adoption[ctx_id])

    def to_dict(self) -> Dict[str, Any]:
        return {'type': 'game', 'adoption': {
            k: [float(p) for p in v] for k, v in sorted(
                self._adoption.items())}}


class GameSolution(NamedTuple):
    context: str
    profile: Profile
    adoption: np.ndarray
    iterations: int
    mechanism: GameInduced
    notes: Tuple[str, ...] = ()


def solve_incomplete_info_game(g: SelectionGame, net: Network,
                               c: Context = DEFAULT_CONTEXT) -> GameSolution:
    """Pure-strategy Bayes-Nash profile by synchronous best response.

    Iteration starts from nobody adopting. A second run from everybody
    adopting detects a different equilibrium, which is kept as a note.
    """

    respond = _BestResponse(g, net, c)
    profile, steps = respond.iterate(respond.constant(0), c.ctx_id)

    notes = []
    try:
        other, _ = respond.iterate(respond.constant(1), c.ctx_id)
    except NoConvergence:
        log.debug("Best response from all-adopt cycles in '%s'", c.ctx_id)
    else:
        if other != profile:
            note = ("multiple equilibria in context '{}': all-adopt start "
                    "reaches {}".format(c.ctx_id, _format_profile(other)))
            log.warning(note)
            notes.append(note)

    adoption = adoption_probabilities(respond.types, profile)
    mech = GameInduced(g.n, {c.ctx_id: adoption}, {c.ctx_id: profile}, notes)
    log.info("Game equilibrium in '%s' after %d steps: %s", c.ctx_id, steps,
             _format_profile(profile))
    return GameSolution(c.ctx_id, profile, adoption, steps, mech, tuple(notes))


def induced_mechanism(g: SelectionGame, net: Network,
                      contexts: Sequence[Context] = (DEFAULT_CONTEXT,)
                      ) -> GameInduced:
    """Solve the game in every context and bundle the induced laws."""

    solutions = [solve_incomplete_info_game(g, net, c) for c in contexts]
    return GameInduced(
        g.n, {s.context: s.adoption for s in solutions},
        {s.context: s.profile for s in solutions},
        [note for s in solutions for note in s.notes])


def enumerate_equilibria(g: SelectionGame, net: Network,
                         c: Context = DEFAULT_CONTEXT) -> List[Profile]:
    """Every pure profile that is its own best response."""

    respond = _BestResponse(g, net, c)
    sizes = [len(s) for s in respond.types]
    found = []
    for flat in itertools.product((0, 1), repeat=sum(sizes)):
        profile = []
        start = 0
        for size in sizes:
            profile.append(tuple(flat[start:start + size]))
            start += size
        candidate = tuple(profile)
        if respond(candidate) == candidate:
            found.append(candidate)
    return found


def _format_profile(profile: Profile) -> str:
    return ' '.join(''.join(str(a) for a in actions) for actions in profile)
