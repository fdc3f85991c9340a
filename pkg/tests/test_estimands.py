"""
Copyright (c) 2020 Nathan Telles

This Source Code Form is subject to the terms of the Mozilla Public
License, v. 2.0. If a copy of the MPL was not distributed with this
file, You can obtain one at http://mozilla.org/MPL/2.0/.
"""

import numpy as np
import pytest

from spillover.errors import (EmptySubpopulation, OverlapViolation,
                              PindownViolation)
from spillover.estimands import (CriterionKind, EstimandSpec, Premise,
                                 VerdictKind, ani_bias_check,
                                 check_sign_preservation, classify_premise,
                                 comparison_set, decide, decompose, tau)
from spillover.exposures import ExposureKind, ExposureSpec, subpopulation
from spillover.mechanisms import (CompleteRandomization, ExplicitTable,
                                  ProductBernoulli)
from spillover.netcore import Network, UnitSet
from spillover.outcomes import (Context, DistanceDecayFamily, LocalSumFamily,
                                OutcomeModel)


@pytest.fixture
def one_of_two():
    return CompleteRandomization(2, 1)


class TestEstimandSpec:
    """Test estimand construction"""

    def test_values_must_differ(self, dim, dyad):
        with pytest.raises(ValueError):
            EstimandSpec(dim, 1, 1, dyad.units, dyad)

    def test_empty_subpopulation(self, dim, dyad):
        with pytest.raises(EmptySubpopulation):
            EstimandSpec(dim, 1, 0, UnitSet([]), dyad)

    def test_own_treatment(self, dyad):
        treated_ego = ExposureSpec(ExposureKind.ANY_TREATED_NEIGHBOR,
                                   own_treatment=1)
        with pytest.raises(ValueError):
            EstimandSpec(treated_ego, (0, 1), (1, 0), dyad.units, dyad)
        spec = EstimandSpec(treated_ego, (1, 1), (1, 0), dyad.units, dyad)
        assert spec.to_dict()['exposure']['own_treatment'] == 1

    def test_unit_out_of_range(self, dim, dyad):
        with pytest.raises(ValueError):
            EstimandSpec(dim, 1, 0, UnitSet([3]), dyad)

    def test_to_dict(self, neighbor_count):
        net = Network.path(3)
        spec = EstimandSpec(neighbor_count, (1, 1), (1, 0), UnitSet([1, 3]),
                            net)
        out = spec.to_dict()
        assert out['t'] == '(1,1)'
        assert out['t_components'] == {'own': 1, 'tau_count': 1}
        assert out['subpopulation'] == [1, 3]


@pytest.mark.incremental
class TestDyadDecomposition:
    """Test tau, tau* and R_n on the dyad under complete randomization"""

    def test_tau(self, dyad_dim_spec, dyad_outcomes, one_of_two):
        result = tau(dyad_dim_spec, dyad_outcomes, one_of_two)
        assert result.value == pytest.approx(-1.0, abs=1e-12)
        assert result.per_unit == {1: pytest.approx(-1.0),
                                   2: pytest.approx(-1.0)}

    def test_decomposition(self, dyad_dim_spec, dyad_outcomes, one_of_two):
        dec = decompose(dyad_dim_spec, dyad_outcomes, one_of_two)
        assert dec.tau_star == pytest.approx(1.0, abs=1e-12)
        assert dec.r_n == pytest.approx(-2.0, abs=1e-12)
        assert dec.identity_gap <= 1e-12
        assert str(dec.deltas[1]) == '0'

    def test_formula(self, dyad_dim_spec, dyad_outcomes):
        # tau = 3 p4 + p2 - 2 p3 with p2 = P(D_2=0 | D_1=1),
        # p4 = P(D_2=1 | D_1=1) and p3 = P(D_2=1 | D_1=0)
        mech = ExplicitTable(2, {0: 0.1, 1: 0.3, 2: 0.3, 3: 0.3})
        p2, p4, p3 = 0.5, 0.5, 0.75
        result = tau(dyad_dim_spec, dyad_outcomes, mech)
        assert result.value == pytest.approx(3 * p4 + p2 - 2 * p3,
                                             abs=1e-12)


class TestTau:
    """Test tau over contexts and identification failures"""

    def test_context_weights(self, dim, dyad):
        contexts = [Context('a', 0.25), Context('b', 0.75)]
        arrays = {'a': np.array([[0, 1, 0, 1], [0, 0, 1, 1]], dtype=float),
                  'b': np.array([[0, 2, 0, 2], [0, 0, 2, 2]], dtype=float)}
        model = OutcomeModel.from_arrays(2, contexts, arrays)
        spec = EstimandSpec(dim, 1, 0, dyad.units, dyad, contexts)
        result = tau(spec, model, ProductBernoulli(2, 0.5))
        assert result.value == pytest.approx(1.75)
        assert result.per_context[(1, 'b')][2] == pytest.approx(2.0)

    def test_zero_weight_context_ignored(self, dim, dyad):
        contexts = [Context('a', 1.0), Context('b', 0.0)]
        model = OutcomeModel.from_function(2, lambda c, i, d: d[i], contexts)
        spec = EstimandSpec(dim, 1, 0, dyad.units, dyad, contexts)
        result = tau(spec, model, ProductBernoulli(2, 0.5))
        assert all(c == 'a' for _, c in result.per_context)

    def test_overlap(self, dyad_dim_spec, dyad_outcomes):
        with pytest.raises(OverlapViolation):
            tau(dyad_dim_spec, dyad_outcomes, CompleteRandomization(2, 2))

    def test_pindown_required(self, neighbor_count, dyad_outcomes):
        net = Network.complete(4)
        model = OutcomeModel.zeros(4)
        spec = EstimandSpec(neighbor_count, (1, 2), (1, 1), UnitSet([1]), net)
        mech = ExplicitTable.from_strings({'1110': 0.5, '1001': 0.5})
        with pytest.raises(PindownViolation) as info:
            decompose(spec, model, mech)
        assert info.value.unit == 1
        assert len(info.value.witnesses) == 2

    def test_independent_assignment_has_no_selection_bias(
            self, neighbor_count):
        net = Network.path(4)
        rng = np.random.default_rng(42)
        model = OutcomeModel.from_arrays(
            4, [Context()], {'c0': rng.normal(size=(4, 16))})
        spec = EstimandSpec(neighbor_count, (1, 1), (1, 0),
                            subpopulation(neighbor_count, net, degree=2), net)
        dec = decompose(spec, model, ProductBernoulli(4, [0.2, 0.4, 0.6,
                                                          0.8]))
        assert dec.r_n == pytest.approx(0.0, abs=1e-12)
        assert dec.tau == pytest.approx(dec.tau_star, abs=1e-12)

    def test_k_local_outcomes_have_no_selection_bias(self, neighbor_count):
        net = Network.path(5)
        model = LocalSumFamily(radius=1, peer=2.0).to_model(net)
        spec = EstimandSpec(neighbor_count, (1, 2), (1, 0),
                            subpopulation(neighbor_count, net, degree=2), net)
        dec = decompose(spec, model, CompleteRandomization(5, 3))
        assert dec.r_n == pytest.approx(0.0, abs=1e-12)


class TestComparisonSets:
    """Test enumeration of the comparison sets"""

    def test_partial(self, dyad_dim_spec, dyad_outcomes):
        cs = comparison_set(CriterionKind.PARTIAL, dyad_dim_spec,
                            dyad_outcomes, 1)
        assert cs.pairs == 2
        assert list(cs.all_values()) == [1.0, 1.0]

    def test_general(self, dyad_dim_spec, dyad_outcomes):
        cs = comparison_set(CriterionKind.GENERAL, dyad_dim_spec,
                            dyad_outcomes, 1)
        assert cs.pairs == 4
        assert sorted(cs.all_values()) == [-1.0, 1.0, 1.0, 3.0]

    def test_ordered_pairs_are_ordered(self, neighbor_count):
        net = Network.complete(4)
        spec = EstimandSpec(neighbor_count, (1, 2), (1, 1), UnitSet([1]), net)
        cs = comparison_set(CriterionKind.ORDERED, spec, OutcomeModel.zeros(4),
                            1)
        assert cs.pairs == 6
        for entry in cs.entries():
            assert entry.d.dominates(entry.d_prime)

    def test_extreme(self, dyad_dim_spec, dyad_outcomes):
        cs = comparison_set(CriterionKind.GENERAL, dyad_dim_spec,
                            dyad_outcomes, 1)
        low = cs.extreme(lowest=True)
        assert low.value == -1.0
        assert (str(low.d), str(low.d_prime)) == ('10', '01')


class TestSignPreservation:
    """Test premise classification and sign verdicts"""

    def test_classify(self):
        assert classify_premise(np.zeros(0)) is Premise.EMPTY_SETS
        assert classify_premise(np.zeros(3)) is Premise.ALL_ZERO
        assert classify_premise(np.array([0.0, 1.0])) is \
            Premise.ALL_NON_NEGATIVE
        assert classify_premise(np.array([-1.0, 0.0])) is \
            Premise.ALL_NON_POSITIVE
        assert classify_premise(np.array([-1.0, 1.0])) is Premise.MIXED

    def test_decide(self):
        assert decide(Premise.ALL_NON_NEGATIVE, -0.5) is VerdictKind.VIOLATION
        assert decide(Premise.ALL_NON_NEGATIVE, 0.0) is VerdictKind.PRESERVED
        assert decide(Premise.ALL_ZERO, 0.1) is VerdictKind.VIOLATION
        assert decide(Premise.MIXED, -5.0) is VerdictKind.VACUOUS
        assert decide(Premise.EMPTY_SETS, 1.0) is VerdictKind.VACUOUS

    def test_dyad_reversal(self, dyad_dim_spec, dyad_outcomes, one_of_two):
        verdict = check_sign_preservation(CriterionKind.PARTIAL,
                                          dyad_dim_spec, dyad_outcomes,
                                          one_of_two)
        assert verdict.premise is Premise.ALL_NON_NEGATIVE
        assert verdict.verdict is VerdictKind.VIOLATION
        assert set(verdict.witness['extremes']) == {'1', '2'}

    def test_dyad_general_is_vacuous(self, dyad_dim_spec, dyad_outcomes,
                                     one_of_two):
        verdict = check_sign_preservation(CriterionKind.GENERAL,
                                          dyad_dim_spec, dyad_outcomes,
                                          one_of_two)
        assert verdict.verdict is VerdictKind.VACUOUS
        assert verdict.witness['negative']['value'] == -1.0
        assert verdict.witness['positive']['value'] == 3.0

    def test_bernoulli_preserves(self, dyad_dim_spec, dyad_outcomes):
        verdict = check_sign_preservation(CriterionKind.PARTIAL,
                                          dyad_dim_spec, dyad_outcomes,
                                          ProductBernoulli(2, 0.3))
        assert verdict.verdict is VerdictKind.PRESERVED
        assert verdict.tau_value == pytest.approx(1.0)


class TestAniBias:
    """Test |tau - tau*| against the truncation discrepancy"""

    @pytest.mark.parametrize('radius', [0, 1])
    def test_within_gamma(self, radius, neighbor_count, dim):
        net = Network.path(6)
        f = dim if radius == 0 else neighbor_count
        t, t_prime = (1, 0) if radius == 0 else ((1, 1), (1, 0))
        spec = EstimandSpec(f, t, t_prime,
                            subpopulation(f, net, degree=2), net)
        report = ani_bias_check(spec, DistanceDecayFamily(),
                                CompleteRandomization(6, 3))
        assert report.radius == radius
        assert report.within_gamma
        assert report.within_oscillation
        assert report.gap > 0
