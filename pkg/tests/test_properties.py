"""
Copyright (c) 2020 Nathan Telles

This Source Code Form is subject to the terms of the Mozilla Public
License, v. 2.0. If a copy of the MPL was not distributed with this
file, You can obtain one at http://mozilla.org/MPL/2.0/.
"""

import itertools

import numpy as np
import pytest

from spillover.errors import NoConvergence
from spillover.estimands import (CriterionKind, EstimandSpec, Premise,
                                 VerdictKind, check_sign_preservation,
                                 comparison_set, decompose)
from spillover.exposures import ExposureKind, ExposureSpec, subpopulation
from spillover.mechanisms import (ExplicitTable, LinearUtility,
                                  ProductBernoulli, SelectionGame,
                                  check_ci_selection, check_unit_independence,
                                  enumerate_equilibria,
                                  solve_incomplete_info_game)
from spillover.netcore import Network
from spillover.outcomes import DEFAULT_CONTEXT, OutcomeModel
from spillover.search import monotone_closure

COUNT = ExposureSpec(ExposureKind.NEIGHBOR_COUNT)
DIM = ExposureSpec(ExposureKind.DIM)


def random_network(rng, n):
    """A path with random chords, so every unit has a neighbor."""

    chords = [e for e in itertools.combinations(range(1, n + 1), 2)
              if e[1] > e[0] + 1 and rng.random() < 0.3]
    return Network(n, [(i, i + 1) for i in range(1, n)] + chords)


def random_model(rng, n):
    table = rng.integers(-3, 4, size=(n, 1 << n)).astype(float)
    return OutcomeModel.from_arrays(n, [DEFAULT_CONTEXT],
                                    {DEFAULT_CONTEXT.ctx_id: table})


def count_estimand(net):
    return EstimandSpec(COUNT, (1, 1), (1, 0),
                        subpopulation(COUNT, net, min_degree=1), net)


def check_independent(seed):
    rng = np.random.default_rng([seed, 0])
    n = int(rng.integers(2, 7))
    net = random_network(rng, n)
    spec = count_estimand(net)
    model = random_model(rng, n)
    mech = ProductBernoulli(n, rng.uniform(0.05, 0.95, size=n))

    dec = decompose(spec, model, mech)
    assert dec.r_n == pytest.approx(0.0, abs=1e-12)
    verdict = check_sign_preservation(CriterionKind.PARTIAL, spec, model,
                                      mech)
    assert verdict.verdict is not VerdictKind.VIOLATION


def check_dependent(seed):
    rng = np.random.default_rng([seed, 1])
    n = int(rng.integers(2, 7))
    net = random_network(rng, n)
    law = rng.dirichlet(np.ones(1 << n))
    mech = ExplicitTable(n, dict(enumerate(law.tolist())))

    dec = decompose(count_estimand(net), random_model(rng, n), mech)
    assert dec.identity_gap <= 1e-12


def random_game(rng, n):
    types = []
    for _ in range(n):
        size = int(rng.integers(1, 4))
        values = rng.uniform(-1.0, 1.0, size=size)
        probs = rng.dirichlet(np.ones(size))
        types.append([(float(v), float(p)) for v, p in zip(values, probs)])
    utility = LinearUtility(intercept=float(rng.uniform(-1.0, 1.0)),
                            peer=float(rng.uniform(-1.0, 1.0)),
                            statistic='all')
    return SelectionGame(n, types, utility)


def check_game(seed, exhaustive):
    rng = np.random.default_rng([seed, 2])
    n = int(rng.integers(2, 6 if not exhaustive else 4))
    net = random_network(rng, n)
    game = random_game(rng, n)
    try:
        solution = solve_incomplete_info_game(game, net)
    except NoConvergence:
        return False

    mech = solution.mechanism
    assert check_unit_independence(mech).holds
    for i in range(1, n + 1):
        if 0.0 < solution.adoption[i - 1] < 1.0:
            assert check_ci_selection(mech, DEFAULT_CONTEXT, DIM, net, i,
                                      1, 0).holds
    if exhaustive:
        assert solution.profile in enumerate_equilibria(game, net)
    return True


class TestIndependentAssignment:
    """Independent assignment never needs a selection correction"""

    @pytest.mark.parametrize('block', range(4))
    def test_random_scenarios(self, block):
        for seed in range(block * 50, (block + 1) * 50):
            check_independent(seed)

    @pytest.mark.slow
    def test_thousand_scenarios(self):
        for seed in range(1000):
            check_independent(seed)


class TestDecompositionIdentity:
    """tau = tau* + R_n for dependent mechanisms that pin down exposures"""

    @pytest.mark.parametrize('block', range(4))
    def test_random_scenarios(self, block):
        for seed in range(block * 50, (block + 1) * 50):
            check_dependent(seed)

    @pytest.mark.slow
    def test_thousand_scenarios(self):
        for seed in range(1000):
            check_dependent(seed)


class TestGameInducedMechanisms:
    """Games with independent private types induce product laws"""

    def test_small_games_match_exhaustive_search(self):
        solved = sum(check_game(seed, exhaustive=True) for seed in range(60))
        assert solved > 0

    @pytest.mark.slow
    def test_hundred_games(self):
        solved = 0
        seed = 0
        while solved < 100:
            solved += check_game(seed, exhaustive=False)
            seed += 1


def pair_codes(cs):
    return {(e.context, e.d.bits, e.d_prime.bits) for e in cs.entries()}


def check_nesting(seed):
    rng = np.random.default_rng([seed, 3])
    n = int(rng.integers(2, 6))
    net = random_network(rng, n)
    levels = [(own, count) for own in (0, 1) for count in range(3)]
    first, second = rng.choice(len(levels), size=2, replace=False)
    spec = EstimandSpec(COUNT, levels[first], levels[second],
                        subpopulation(COUNT, net, min_degree=1), net)
    model = random_model(rng, n)

    for i in spec.subpop:
        general, partial, ordered = (
            comparison_set(kind, spec, model, i)
            for kind in (CriterionKind.GENERAL, CriterionKind.PARTIAL,
                         CriterionKind.ORDERED))
        assert pair_codes(ordered) <= pair_codes(partial)
        assert pair_codes(partial) <= pair_codes(general)
        if ordered.pairs:
            assert general.all_values().min() <= \
                partial.all_values().min() <= ordered.all_values().min()


def check_monotone_sign(seed):
    rng = np.random.default_rng([seed, 4])
    n = int(rng.integers(3, 7))
    net = random_network(rng, n)
    high = int(rng.integers(1, 3))
    low = int(rng.integers(0, high))
    spec = EstimandSpec(COUNT, (1, high), (1, low),
                        subpopulation(COUNT, net, min_degree=high), net)
    sign = 1.0 if rng.random() < 0.5 else -1.0
    table = sign * monotone_closure(
        rng.integers(-3, 4, size=(n, 1 << n)).astype(float), n)
    model = OutcomeModel.from_arrays(n, [DEFAULT_CONTEXT],
                                     {DEFAULT_CONTEXT.ctx_id: table})
    mech = ProductBernoulli(n, float(rng.uniform(0.05, 0.95)))

    verdict = check_sign_preservation(CriterionKind.ORDERED, spec, model,
                                      mech)
    assert verdict.premise in (Premise.ALL_ZERO, Premise.ALL_NON_NEGATIVE
                               if sign > 0 else Premise.ALL_NON_POSITIVE)
    assert sign * verdict.tau_value >= -1e-12
    assert verdict.verdict is VerdictKind.PRESERVED


class TestComparisonSetNesting:
    """Ordered comparisons are partial ones, partial ones are general"""

    @pytest.mark.parametrize('block', range(4))
    def test_random_scenarios(self, block):
        for seed in range(block * 50, (block + 1) * 50):
            check_nesting(seed)

    @pytest.mark.slow
    def test_thousand_scenarios(self):
        for seed in range(1000):
            check_nesting(seed)


class TestMonotoneOutcomes:
    """Monotone outcomes under Bernoulli assignment give a signed contrast"""

    @pytest.mark.parametrize('block', range(4))
    def test_random_scenarios(self, block):
        for seed in range(block * 50, (block + 1) * 50):
            check_monotone_sign(seed)

    @pytest.mark.slow
    def test_thousand_scenarios(self):
        for seed in range(1000):
            check_monotone_sign(seed)
