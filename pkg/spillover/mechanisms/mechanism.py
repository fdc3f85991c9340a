"""
Copyright (c) 2020 Nathan Telles

This Source Code Form is subject to the terms of the Mozilla Public
License, v. 2.0. If a copy of the MPL was not distributed with this
file, You can obtain one at http://mozilla.org/MPL/2.0/.
"""

import logging
from abc import ABC, abstractmethod
from typing import Any, Dict, Union

import numpy as np

from ..errors import InvalidMechanism, OverlapViolation
from ..exposures import ExposureSpec, ExposureValue, event_mask
from ..netcore import AssignmentVector, Network, require_enumerable
from ..outcomes import DEFAULT_CONTEXT_ID, Context, context_id
from ..verdicts import TOLERANCE

ContextRef = Union[Context, str]


def validate_law(law: np.ndarray, n: int, where: str = 'mechanism'
                 ) -> np.ndarray:
    """Check a probability vector over {0,1}^n and return a read-only copy."""

    law = np.array(law, dtype=float)
    if law.shape != (1 << n,):
        raise InvalidMechanism('{}: expected {} probabilities, got {}'.format(
            where, 1 << n, law.shape))
    if not np.all(np.isfinite(law)) or np.any(law < -TOLERANCE):
        raise InvalidMechanism('{}: probabilities must be finite and '
                               'non-negative'.format(where))
    total = float(law.sum())
    if abs(total - 1.0) > TOLERANCE:
        raise InvalidMechanism(
            '{}: probabilities sum to {!r}, not 1'.format(where, total))
    law = np.clip(law, 0.0, None)
    law.setflags(write=False)
    return law


class Mechanism(ABC):
    """Abstract per-context law P(D = d | c) over {0,1}^n."""

    def __init__(self, n: int) -> None:
        require_enumerable(n)
        self._n = n
        self._laws = {}  # type: Dict[str, np.ndarray]
        self._log = logging.getLogger(type(self).__module__)

    @property
    def n(self) -> int:
        return self._n

    @property
    def log(self) -> logging.Logger:
        return self._log

    @abstractmethod
    def _build_law(self, ctx_id: str) -> np.ndarray:
        """Return the unvalidated probability vector for a context."""

    @abstractmethod
    def to_dict(self) -> Dict[str, Any]:
        """Scenario block describing this mechanism."""

    def law(self, c: ContextRef = DEFAULT_CONTEXT_ID) -> np.ndarray:
        ctx_id = context_id(c)
        if ctx_id not in self._laws:
            self._laws[ctx_id] = validate_law(
                self._build_law(ctx_id), self._n,
                "{} in context '{}'".format(type(self).__name__, ctx_id))
        return self._laws[ctx_id]

    def prob(self, c: ContextRef, d: AssignmentVector) -> float:
        return float(self.law(c)[d.bits])

    def marginals(self, c: ContextRef = DEFAULT_CONTEXT_ID) -> np.ndarray:
        """P(D_j = 1 | c) for every unit j."""

        law = self.law(c)
        masks = np.arange(1 << self._n, dtype=np.int64)
        return np.array([law[(masks >> j) & 1 == 1].sum()
                         for j in range(self._n)])

    def support(self, c: ContextRef = DEFAULT_CONTEXT_ID) -> Dict[str, float]:
        return law_support(self.law(c), self._n)

    def same_law(self, other: 'Mechanism', c_self: ContextRef,
                 c_other: ContextRef) -> bool:
        return bool(np.allclose(self.law(c_self), other.law(c_other),
                                rtol=0.0, atol=TOLERANCE))


def law_support(law: np.ndarray, n: int) -> Dict[str, float]:
    """Assignments with positive mass as {bit string: probability}."""

    return {str(AssignmentVector(int(b), n)): float(law[b])
            for b in np.flatnonzero(law > 0)}


def prob(mech: Mechanism, c: ContextRef, d: AssignmentVector) -> float:
    return mech.prob(c, d)


def conditional_law(mech: Mechanism, c: ContextRef, f: ExposureSpec,
                    net: Network, i: int, t: ExposureValue) -> np.ndarray:
    """P(D = d | T_i = t, c) over every assignment code.

    Raises OverlapViolation when the event has no mass in the context.
    """

    law = mech.law(c)
    restricted = np.where(event_mask(f, net, i, t), law, 0.0)
    mass = float(restricted.sum())
    if mass <= TOLERANCE:
        raise OverlapViolation(i, f.format_value(t), context_id(c))
    return restricted / mass
