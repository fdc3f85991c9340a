"""
Copyright (c) 2020 Nathan Telles

This Source Code Form is subject to the terms of the Mozilla Public
License, v. 2.0. If a copy of the MPL was not distributed with this
file, You can obtain one at http://mozilla.org/MPL/2.0/.
"""

from typing import Any, List, Sequence


class SpilloverError(Exception):
    """Base class for spillover exceptions."""


class ConfigError(SpilloverError):
    """Base class for Config exceptions.

    These are exceptions that occur from the scenario reading, parsing, and
    validating process.
    """


class ConfigIOError(ConfigError):
    """Exception class for when unable to read from a scenario file."""


class InvalidScenario(ConfigError):
    """Every problem found while validating a scenario, not just the first."""

    def __init__(self, problems: Sequence[str]) -> None:
        self.problems = list(problems)  # type: List[str]
        super().__init__('Invalid scenario:\n  ' + '\n  '.join(self.problems))


class NetworkError(SpilloverError):
    """Base class for network and enumeration errors."""


class InvalidNetwork(NetworkError):
    """Edge list or unit reference is not a simple undirected graph."""


class EnumerationCapExceeded(NetworkError):
    """Full enumeration of {0,1}^n was requested above the cap."""

    def __init__(self, n: int, cap: int) -> None:
        super().__init__(
            'Cannot enumerate {{0,1}}^{} (enumeration cap is {})'.format(
                n, cap))


class IsomorphismCapExceeded(NetworkError):
    """Permutation search was requested on a neighborhood above the cap."""

    def __init__(self, m: int, cap: int) -> None:
        super().__init__(
            'Neighborhood of size {} exceeds the isomorphism cap {}'.format(
                m, cap))


class SizeMismatch(NetworkError):
    """Labeled subnetworks of different sizes were compared."""


class OutcomeError(SpilloverError):
    """Base class for outcome model errors."""


class MissingOutcome(OutcomeError):
    """A cell was needed but the model has no value and no default."""

    def __init__(self, context: str, unit: int, assignment: str) -> None:
        super().__init__(
            "No outcome for unit {} under '{}' in context '{}' and no "
            "default_outcome".format(unit, assignment, context))


class FamilyEvaluationError(OutcomeError):
    """A structural family failed on a truncated model."""

    def __init__(self, unit: int, radius: Any, cause: Exception) -> None:
        super().__init__(
            'Structural family failed for unit {} at radius {}: {}'.format(
                unit, radius, cause))


class IdentificationError(SpilloverError):
    """Base class for overlap and pin-down failures."""


class OverlapViolation(IdentificationError):
    """The conditioning event has zero mass."""

    def __init__(self, unit: int, value: str, context: str) -> None:
        self.unit = unit
        self.value = value
        self.context = context
        super().__init__(
            "Event T_{} = {} has zero probability in context '{}'".format(
                unit, value, context))


class PindownViolation(IdentificationError):
    """The control exposure value does not fix the neighborhood subvector."""

    def __init__(self, unit: int, value: str,
                 witnesses: Sequence[str]) -> None:
        self.unit = unit
        self.witnesses = list(witnesses)
        if witnesses:
            detail = 'both {} attain it'.format(' and '.join(witnesses))
        else:
            detail = 'no neighborhood pattern attains it'
        super().__init__(
            'Exposure value {} does not pin down the neighborhood of unit {}: '
            '{}'.format(value, unit, detail))


class EmptySubpopulation(IdentificationError):
    """The estimand would average over no units."""

    def __init__(self) -> None:
        super().__init__('The subpopulation is empty; tau is undefined')


class MechanismError(SpilloverError):
    """Base class for assignment mechanism errors."""


class InvalidMechanism(MechanismError):
    """Probabilities are negative or do not sum to one."""


class CouplingPreconditionError(MechanismError):
    """Arguments of the urn coupling violate its preconditions."""


class CouplingOrderViolation(MechanismError):
    """A coupled pair treats some unit in low that high leaves untreated."""

    def __init__(self, low: Any, high: Any) -> None:
        self.low = low
        self.high = high
        super().__init__('Coupled pair is not ordered: low {} high {}'.format(
            low, high))


class NoConvergence(MechanismError):
    """Best-response iteration entered a cycle without a fixed point."""

    def __init__(self, context: str, cycle_length: int) -> None:
        self.cycle_length = cycle_length
        super().__init__(
            "Best-response iteration cycles with period {} in context '{}'"
            .format(cycle_length, context))


class ReproductionFailure(SpilloverError):
    """A golden reproduction did not match its recorded numbers."""

    def __init__(self, example_id: str, diffs: Sequence[str]) -> None:
        self.diffs = list(diffs)
        super().__init__("Reproduction '{}' failed:\n  {}".format(
            example_id, '\n  '.join(self.diffs)))
