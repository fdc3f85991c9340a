"""
Copyright (c) 2020 Nathan Telles

This Source Code Form is subject to the terms of the Mozilla Public
License, v. 2.0. If a copy of the MPL was not distributed with this
file, You can obtain one at http://mozilla.org/MPL/2.0/.
"""

import itertools
from typing import Dict, Iterable, Iterator, List, NamedTuple
from typing import Optional as Opt
from typing import Sequence, Tuple

import networkx as nx
import numpy as np

from .errors import (EnumerationCapExceeded, InvalidNetwork,
                     IsomorphismCapExceeded, SizeMismatch)

# Full {0,1}^n enumeration is refused above this many units (16.7M vectors)
ENUMERATION_CAP = 24

# Largest neighborhood handed to the permutation search
ISOMORPHISM_CAP = 10


def require_enumerable(n: int, cap: int = ENUMERATION_CAP) -> None:
    """Raise if enumerating {0,1}^n is over the cap."""

    if n > min(cap, ENUMERATION_CAP):
        raise EnumerationCapExceeded(n, min(cap, ENUMERATION_CAP))


class UnitSet:
    """Set of 1-indexed units that always iterates in ascending order."""

    def __init__(self, members: Iterable[int]) -> None:
        self._members = tuple(sorted(set(int(m) for m in members)))
        if self._members and self._members[0] < 1:
            raise InvalidNetwork(
                'Unit sets are 1-indexed, got {}'.format(self._members[0]))
        self._mask = 0
        for unit in self._members:
            self._mask |= 1 << (unit - 1)

    @property
    def members(self) -> Tuple[int, ...]:
        return self._members

    @property
    def mask(self) -> int:
        """Bit mask of the members (unit i is bit i - 1)."""

        return self._mask

    def index(self, unit: int) -> int:
        """Position of unit in canonical order."""

        return self._members.index(unit)

    def complement(self, n: int) -> 'UnitSet':
        return UnitSet(u for u in range(1, n + 1) if u not in self)

    def __iter__(self) -> Iterator[int]:
        return iter(self._members)

    def __len__(self) -> int:
        return len(self._members)

    def __contains__(self, unit: object) -> bool:
        return isinstance(unit, int) and 1 <= unit and bool(
            self._mask >> (unit - 1) & 1)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, UnitSet):
            return NotImplemented
        return self._members == other._members

    def __le__(self, other: 'UnitSet') -> bool:
        return self._mask & other._mask == self._mask

    def __hash__(self) -> int:
        return hash(self._members)

    def __repr__(self) -> str:
        return '{' + ','.join(str(m) for m in self._members) + '}'


class AssignmentVector:
    """Element of {0,1}^n stored as a bit set.

    Component i (1-indexed) is bit i - 1, so the string "110" is the integer 3.
    Sub-words produced by split() use the same encoding over the canonical
    order of the unit set they were projected on.
    """

    def __init__(self, bits: int, n: int) -> None:
        if n < 0 or bits < 0 or bits >> n:
            raise ValueError(
                'Bits {} do not fit in a length {} word'.format(bits, n))
        self._bits = int(bits)
        self._n = n

    @classmethod
    def from_string(cls, text: str) -> 'AssignmentVector':
        if any(char not in '01' for char in text):
            raise ValueError("Invalid assignment string '{}'".format(text))
        bits = sum(1 << k for k, char in enumerate(text) if char == '1')
        return cls(bits, len(text))

    @classmethod
    def from_sequence(cls, values: Sequence[int]) -> 'AssignmentVector':
        return cls.from_string(''.join('1' if v else '0' for v in values))

    @property
    def bits(self) -> int:
        return self._bits

    @property
    def n(self) -> int:
        return self._n

    @property
    def count(self) -> int:
        return bin(self._bits).count('1')

    def treated(self) -> UnitSet:
        return UnitSet(k + 1 for k in range(self._n) if self._bits >> k & 1)

    def as_tuple(self) -> Tuple[int, ...]:
        return tuple(self._bits >> k & 1 for k in range(self._n))

    def dominates(self, other: 'AssignmentVector') -> bool:
        """Componentwise self >= other."""

        return self._bits & other._bits == other._bits

    def split(self, units: UnitSet
              ) -> Tuple['AssignmentVector', 'AssignmentVector']:
        return split(self, units)

    def __getitem__(self, unit: int) -> int:
        if not 1 <= unit <= self._n:
            raise IndexError(unit)
        return self._bits >> (unit - 1) & 1

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AssignmentVector):
            return NotImplemented
        return (self._bits, self._n) == (other._bits, other._n)

    def __hash__(self) -> int:
        return hash((self._bits, self._n))

    def __str__(self) -> str:
        return ''.join(str(b) for b in self.as_tuple())

    def __repr__(self) -> str:
        return "AssignmentVector('{}')".format(self)


def _sub_word(bits: int, units: Iterable[int]) -> int:
    code = 0
    for k, unit in enumerate(units):
        code |= (bits >> (unit - 1) & 1) << k
    return code


def split(d: AssignmentVector, units: UnitSet
          ) -> Tuple[AssignmentVector, AssignmentVector]:
    """Partition d into its sub-words on units and on the other units."""

    outside = units.complement(d.n)
    return (AssignmentVector(_sub_word(d.bits, units), len(units)),
            AssignmentVector(_sub_word(d.bits, outside), len(outside)))


def recombine(inside: AssignmentVector, outside: AssignmentVector,
              units: UnitSet) -> AssignmentVector:
    """Inverse of split()."""

    n = inside.n + outside.n
    bits = 0
    for k, unit in enumerate(units):
        bits |= (inside.bits >> k & 1) << (unit - 1)
    for k, unit in enumerate(units.complement(n)):
        bits |= (outside.bits >> k & 1) << (unit - 1)
    return AssignmentVector(bits, n)


def all_masks(n: int, cap: int = ENUMERATION_CAP) -> np.ndarray:
    """Every assignment of n units as integer codes 0 .. 2^n - 1."""

    require_enumerable(n, cap)
    return np.arange(1 << n, dtype=np.int64)


def project(masks: np.ndarray, units: UnitSet) -> np.ndarray:
    """Vectorized sub-word extraction: full codes to codes over units."""

    codes = np.zeros_like(masks)
    for k, unit in enumerate(units):
        codes |= ((masks >> (unit - 1)) & 1) << k
    return codes


def embed(codes: np.ndarray, units: UnitSet) -> np.ndarray:
    """Vectorized inverse of project() with every other unit untreated."""

    masks = np.zeros_like(codes)
    for k, unit in enumerate(units):
        masks |= ((codes >> k) & 1) << (unit - 1)
    return masks


def popcount(masks: np.ndarray) -> np.ndarray:
    return np.bitwise_count(masks).astype(np.int64)


class Network:
    """Undirected simple graph on units 1..n."""

    def __init__(self, n: int, edges: Iterable[Sequence[int]] = ()) -> None:
        if n < 1:
            raise InvalidNetwork('A network needs at least one unit')
        require_enumerable(n)

        graph = nx.Graph()
        graph.add_nodes_from(range(1, n + 1))
        for edge in edges:
            i, j = (int(v) for v in edge)
            if not (1 <= i <= n and 1 <= j <= n):
                raise InvalidNetwork(
                    'Edge ({}, {}) references a unit outside 1..{}'.format(
                        i, j, n))
            if i == j:
                raise InvalidNetwork('Self link on unit {}'.format(i))
            if graph.has_edge(i, j):
                raise InvalidNetwork('Duplicate edge ({}, {})'.format(i, j))
            graph.add_edge(i, j)

        self._n = n
        self._graph = nx.freeze(graph)
        self._edges = tuple(sorted(tuple(sorted(e)) for e in graph.edges))
        self._neighbor_masks = tuple(
            UnitSet(graph.neighbors(i)).mask for i in range(1, n + 1))

    @classmethod
    def path(cls, n: int) -> 'Network':
        return cls(n, ((i, i + 1) for i in range(1, n)))

    @classmethod
    def cycle(cls, n: int) -> 'Network':
        return cls(n, [(i, i + 1) for i in range(1, n)] + [(n, 1)])

    @classmethod
    def star(cls, n: int) -> 'Network':
        """Star with center 1 and leaves 2..n."""

        return cls(n, ((1, j) for j in range(2, n + 1)))

    @classmethod
    def complete(cls, n: int) -> 'Network':
        return cls(n, itertools.combinations(range(1, n + 1), 2))

    @property
    def n(self) -> int:
        return self._n

    @property
    def edges(self) -> Tuple[Tuple[int, int], ...]:
        return self._edges

    @property
    def graph(self) -> nx.Graph:
        """Frozen networkx view of the network."""

        return self._graph

    @property
    def units(self) -> UnitSet:
        return UnitSet(range(1, self._n + 1))

    def adjacent(self, i: int, j: int) -> bool:
        return bool(self._neighbor_masks[i - 1] >> (j - 1) & 1)

    def degree(self, i: int) -> int:
        return bin(self._neighbor_masks[i - 1]).count('1')

    def neighbors(self, i: int) -> UnitSet:
        return UnitSet(self._graph.neighbors(i))

    def distances(self, i: int, cutoff: Opt[int] = None) -> Dict[int, int]:
        """Path distances from i by breadth-first search."""

        self._check_unit(i)
        return dict(nx.single_source_shortest_path_length(
            self._graph, i, cutoff=cutoff))

    def neighborhood(self, i: int, radius: int) -> UnitSet:
        """All units at most path distance radius from i."""

        if radius < 0:
            raise ValueError('Neighborhood radius must be non-negative')
        return UnitSet(self.distances(i, cutoff=radius))

    def diameter(self) -> Opt[int]:
        """Diameter, or None when the network is disconnected."""

        if not nx.is_connected(self._graph):
            return None
        return nx.diameter(self._graph)

    def subnetwork(self, units: UnitSet) -> 'Network':
        """Induced subnetwork relabeled 1..m in canonical order of units."""

        position = {unit: k + 1 for k, unit in enumerate(units)}
        edges = [(position[i], position[j]) for i, j in self._edges
                 if i in position and j in position]
        return Network(len(units), edges)

    def to_dict(self) -> Dict[str, object]:
        return {'n': self._n, 'edges': [list(e) for e in self._edges]}

    def _check_unit(self, i: int) -> None:
        if not 1 <= i <= self._n:
            raise InvalidNetwork(
                'Unit {} is outside 1..{}'.format(i, self._n))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Network):
            return NotImplemented
        return (self._n, self._edges) == (other._n, other._edges)

    def __hash__(self) -> int:
        return hash((self._n, self._edges))

    def __repr__(self) -> str:
        return 'Network(n={}, edges={})'.format(self._n, list(self._edges))


def neighborhood(net: Network, i: int, radius: int) -> UnitSet:
    return net.neighborhood(i, radius)


class IsomorphismResult(NamedTuple):
    isomorphic: bool
    # permutation[k] is the position in b mapped onto position k of a
    permutation: Opt[Tuple[int, ...]]


def labeled_isomorphic(net_a: Network, treat_a: AssignmentVector,
                       net_b: Network, treat_b: AssignmentVector,
                       cap: int = ISOMORPHISM_CAP) -> IsomorphismResult:
    """Search for pi with pi(treat_b) = treat_a and pi(net_b) = net_a.

    Positions are 0-based over the canonical order of each subnetwork.
    Candidates for each position are restricted to positions with the same
    (treatment, degree) signature and partial assignments are abandoned as
    soon as an adjacency disagrees.
    """

    m = net_a.n
    if net_b.n != m or treat_a.n != m or treat_b.n != m:
        raise SizeMismatch(
            'Cannot compare labeled subnetworks of sizes {} and {}'.format(
                net_a.n, net_b.n))
    if m > cap:
        raise IsomorphismCapExceeded(m, cap)

    def signature(net: Network, treat: AssignmentVector, k: int
                  ) -> Tuple[int, int]:
        return (treat[k + 1], net.degree(k + 1))

    sig_a = [signature(net_a, treat_a, k) for k in range(m)]
    sig_b = [signature(net_b, treat_b, k) for k in range(m)]
    if sorted(sig_a) != sorted(sig_b):
        return IsomorphismResult(False, None)

    candidates = [[q for q in range(m) if sig_b[q] == sig_a[k]]
                  for k in range(m)]
    # Most constrained positions first
    order = sorted(range(m), key=lambda k: len(candidates[k]))
    image = [-1] * m  # type: List[int]
    used = [False] * m

    def consistent(k: int, q: int) -> bool:
        for other in range(m):
            if image[other] < 0:
                continue
            if net_a.adjacent(k + 1, other + 1) != net_b.adjacent(
                    q + 1, image[other] + 1):
                return False
        return True

    def extend(depth: int) -> bool:
        if depth == m:
            return True
        k = order[depth]
        for q in candidates[k]:
            if used[q] or not consistent(k, q):
                continue
            image[k], used[q] = q, True
            if extend(depth + 1):
                return True
            image[k], used[q] = -1, False
        return False

    if extend(0):
        return IsomorphismResult(True, tuple(image))
    return IsomorphismResult(False, None)


def apply_permutation(net: Network, treat: AssignmentVector,
                      permutation: Sequence[int]
                      ) -> Tuple[Network, AssignmentVector]:
    """Return (pi(net), pi(treat)) with pi(x)_k = x_pi(k)."""

    m = net.n
    edges = [(k + 1, l + 1) for k, l in itertools.combinations(range(m), 2)
             if net.adjacent(permutation[k] + 1, permutation[l] + 1)]
    bits = sum(treat[permutation[k] + 1] << k for k in range(m))
    return Network(m, edges), AssignmentVector(bits, m)
