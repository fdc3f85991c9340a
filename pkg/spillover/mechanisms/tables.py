"""
Copyright (c) 2020 Nathan Telles

This Source Code Form is subject to the terms of the Mozilla Public
License, v. 2.0. If a copy of the MPL was not distributed with this
file, You can obtain one at http://mozilla.org/MPL/2.0/.
"""

from typing import Any, Dict, Mapping, Sequence, Union

import numpy as np

from ..errors import InvalidMechanism
from ..netcore import AssignmentVector, all_masks, popcount
from .mechanism import Mechanism


def product_law(p: np.ndarray) -> np.ndarray:
    """Law of independent Bernoulli(p_j) treatments over every code."""

    n = len(p)
    bits = (all_masks(n)[:, None] >> np.arange(n)) & 1
    return np.prod(np.where(bits == 1, p, 1.0 - p), axis=1)


def _probabilities(p: Union[float, Sequence[float]], n: int) -> np.ndarray:
    values = np.full(n, float(p)) if np.isscalar(p) else np.array(
        p, dtype=float)
    if values.shape != (n,):
        raise InvalidMechanism(
            'Expected one probability per unit ({}), got {}'.format(
                n, values.shape))
    if np.any(values < 0) or np.any(values > 1):
        raise InvalidMechanism('Bernoulli probabilities must lie in [0, 1]')
    return values


class ExplicitTable(Mechanism):
    """Listed probabilities for assignment codes; the rest have mass 0."""

    def __init__(self, n: int, probs: Mapping[int, float]) -> None:
        super().__init__(n)
        law = np.zeros(1 << n)
        for bits, value in probs.items():
            if not 0 <= bits < 1 << n:
                raise InvalidMechanism(
                    'Assignment code {} out of range'.format(bits))
            law[bits] += value
        self._table = law

    @classmethod
    def from_strings(cls, probs: Mapping[str, float]) -> 'ExplicitTable':
        rows = {AssignmentVector.from_string(k): v for k, v in probs.items()}
        sizes = {d.n for d in rows}
        if len(sizes) != 1:
            raise InvalidMechanism('Assignment strings differ in length')
        return cls(sizes.pop(), {d.bits: v for d, v in rows.items()})

    def _build_law(self, ctx_id: str) -> np.ndarray:
        return self._table

    def to_dict(self) -> Dict[str, Any]:
        return {'type': 'explicit', 'table': [
            {'assignment': str(AssignmentVector(int(b), self.n)),
             'prob': float(self._table[b])}
            for b in np.flatnonzero(self._table)]}


class ProductBernoulli(Mechanism):
    """Independent treatments with P(D_j = 1) = p_j."""

    def __init__(self, n: int, p: Union[float, Sequence[float]]) -> None:
        super().__init__(n)
        self._p = _probabilities(p, n)

    @property
    def p(self) -> np.ndarray:
        return self._p.copy()

    def _build_law(self, ctx_id: str) -> np.ndarray:
        return product_law(self._p)

    def to_dict(self) -> Dict[str, Any]:
        if np.all(self._p == self._p[0]):
            return {'type': 'bernoulli', 'p': float(self._p[0])}
        return {'type': 'bernoulli', 'p': [float(v) for v in self._p]}


class CompleteRandomization(Mechanism):
    """Uniform over assignments with exactly m treated units."""

    def __init__(self, n: int, m: int) -> None:
        super().__init__(n)
        if not 0 <= m <= n:
            raise InvalidMechanism(
                'Cannot treat {} of {} units'.format(m, n))
        self._m = m

    @property
    def treated(self) -> int:
        return self._m

    def _build_law(self, ctx_id: str) -> np.ndarray:
        hit = popcount(all_masks(self.n)) == self._m
        return hit / hit.sum()

    def to_dict(self) -> Dict[str, Any]:
        return {'type': 'complete', 'treated': self._m}


class ContextSwitch(Mechanism):
    """A default mechanism with per-context overrides."""

    def __init__(self, default: Mechanism,
                 overrides: Mapping[str, Mechanism]) -> None:
        super().__init__(default.n)
        for ctx_id, mech in overrides.items():
            if mech.n != default.n:
                raise InvalidMechanism(
                    "Override for context '{}' has {} units, not {}".format(
                        ctx_id, mech.n, default.n))
        self._default = default
        self._overrides = dict(overrides)

    def mechanism_for(self, ctx_id: str) -> Mechanism:
        return self._overrides.get(ctx_id, self._default)

    def _build_law(self, ctx_id: str) -> np.ndarray:
        return self.mechanism_for(ctx_id).law(ctx_id)

    def to_dict(self) -> Dict[str, Any]:
        out = self._default.to_dict()
        out['contexts'] = {k: v.to_dict()
                           for k, v in sorted(self._overrides.items())}
        return out
