"""
Copyright (c) 2020 Nathan Telles

This Source Code Form is subject to the terms of the Mozilla Public
License, v. 2.0. If a copy of the MPL was not distributed with this
file, You can obtain one at http://mozilla.org/MPL/2.0/.
"""

from enum import Enum
from typing import Any, Dict, NamedTuple
from typing import Optional as Opt

# Absolute tolerance for every exact identity on unit-scale quantities
TOLERANCE = 1e-12


class Verdict(Enum):
    """Outcome of an executable assumption check."""

    HOLDS = 0
    FAILS = 1
    FAILS_EMPTY = 2


class CheckResult(NamedTuple):
    verdict: Verdict
    witness: Opt[Dict[str, Any]] = None

    @property
    def holds(self) -> bool:
        return self.verdict is Verdict.HOLDS

    def to_dict(self) -> Dict[str, Any]:
        return {'verdict': self.verdict.name, 'witness': self.witness}


HOLDS = CheckResult(Verdict.HOLDS)
