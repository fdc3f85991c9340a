"""
Copyright (c) 2020 Nathan Telles

This Source Code Form is subject to the terms of the Mozilla Public
License, v. 2.0. If a copy of the MPL was not distributed with this
file, You can obtain one at http://mozilla.org/MPL/2.0/.
"""

from fractions import Fraction

import numpy as np
import pytest

from spillover.exposures import (OTHER, ExposureKind, ExposureSpec,
                                 Reference, check_pindown, event_mask,
                                 exposure_codes, subpopulation)
from spillover.netcore import AssignmentVector, Network, UnitSet
from spillover.verdicts import Verdict


def vec(text):
    return AssignmentVector.from_string(text)


@pytest.fixture
def triangle_reference():
    """Ego in the middle of a path of three, one neighbor treated or none."""

    return Reference(Network.path(3), vec('110'), vec('010'))


@pytest.fixture
def iso(triangle_reference):
    return ExposureSpec(ExposureKind.SUBNETWORK_ISO, radius=1,
                        reference=triangle_reference)


class TestExposureValues:
    """Test each exposure mapping on small networks"""

    def test_dim(self, dim):
        assert dim.value(Network.path(3), 2, vec('010')) == 1
        assert dim.value(Network.path(3), 2, vec('101')) == 0

    def test_neighbor_count(self, neighbor_count):
        net = Network.path(3)
        assert neighbor_count.value(net, 2, vec('111')) == (1, 2)
        assert neighbor_count.value(net, 1, vec('011')) == (0, 1)

    def test_any_treated_neighbor(self):
        f = ExposureSpec(ExposureKind.ANY_TREATED_NEIGHBOR)
        net = Network.path(3)
        assert f.value(net, 2, vec('111')) == (1, 1)
        assert f.value(net, 2, vec('010')) == (1, 0)

    def test_fraction_treated(self):
        f = ExposureSpec(ExposureKind.FRACTION_TREATED)
        assert f.value(Network.path(3), 1, vec('110')) == Fraction(2, 3)
        assert f.radius is None

    def test_subnetwork_iso_treated(self, iso):
        net = Network.path(5)
        assert iso.value(net, 3, vec('01100')) == 1
        assert iso.value(net, 3, vec('00110')) == 1

    def test_subnetwork_iso_control(self, iso):
        assert iso.value(Network.path(5), 3, vec('00100')) == 0

    def test_subnetwork_iso_other(self, iso):
        assert iso.value(Network.path(5), 3, vec('01110')) == OTHER

    def test_subnetwork_iso_wrong_shape(self, iso):
        assert iso.value(Network.path(5), 1, vec('11000')) == OTHER

    def test_outside_units_ignored(self, neighbor_count):
        net = Network.path(5)
        codes = exposure_codes(neighbor_count, net, 2).codes
        assert codes[vec('11000').bits] == codes[vec('11011').bits]

    def test_event_mask(self, neighbor_count):
        mask = event_mask(neighbor_count, Network.path(3), 2, (1, 2))
        assert list(np.flatnonzero(mask)) == [vec('111').bits]


class TestExposureSpec:
    """Test construction and parsing of exposure values"""

    def test_iso_needs_reference(self):
        with pytest.raises(ValueError):
            ExposureSpec(ExposureKind.SUBNETWORK_ISO, radius=1)

    def test_reference_sizes(self):
        ref = Reference(Network.path(3), vec('11'), vec('010'))
        with pytest.raises(ValueError):
            ExposureSpec(ExposureKind.SUBNETWORK_ISO, radius=1,
                         reference=ref)

    def test_fixed_radius(self):
        with pytest.raises(ValueError):
            ExposureSpec(ExposureKind.DIM, radius=1)

    def test_own_treatment(self):
        with pytest.raises(ValueError):
            ExposureSpec(ExposureKind.DIM, own_treatment=2)
        with pytest.raises(ValueError):
            ExposureSpec(ExposureKind.DIM, own_treatment=1)

        treated_ego = ExposureSpec(ExposureKind.NEIGHBOR_COUNT,
                                   own_treatment=1)
        assert treated_ego.parse_value('(1,2)') == (1, 2)
        with pytest.raises(ValueError):
            treated_ego.parse_value('(0,1)')
        with pytest.raises(ValueError):
            treated_ego.parse_value([0, 1])
        assert treated_ego.to_dict()['own_treatment'] == 1

    def test_parse_pair(self, neighbor_count):
        assert neighbor_count.parse_value('(1, 2)') == (1, 2)
        assert neighbor_count.parse_value([0, 1]) == (0, 1)

    def test_parse_bad_pair(self, neighbor_count):
        with pytest.raises(ValueError):
            neighbor_count.parse_value('1,2')

    def test_parse_fraction(self):
        f = ExposureSpec(ExposureKind.FRACTION_TREATED)
        assert f.parse_value('3/4') == Fraction(3, 4)
        assert f.parse_value(0.5) == Fraction(1, 2)

    def test_parse_binary(self, dim):
        assert dim.parse_value(1) == 1
        assert dim.parse_value('0') == 0
        with pytest.raises(ValueError):
            dim.parse_value(2)

    def test_parse_other(self, iso):
        assert iso.parse_value('other') == OTHER

    def test_format(self):
        assert ExposureSpec.format_value((1, 0)) == '(1,0)'
        assert ExposureSpec.format_value(Fraction(1, 4)) == '1/4'

    def test_describe_count(self, neighbor_count):
        assert neighbor_count.describe_value((1, 2)) == {'own': 1,
                                                         'tau_count': 2}


class TestSubpopulation:
    """Test the default subpopulation of each exposure kind"""

    def test_dim_takes_everyone(self, dim):
        assert subpopulation(dim, Network(3)) == UnitSet([1, 2, 3])

    def test_count_by_degree(self, neighbor_count):
        net = Network.path(4)
        assert subpopulation(neighbor_count, net, degree=1) == UnitSet([1, 4])

    def test_any_treated_needs_a_neighbor(self):
        f = ExposureSpec(ExposureKind.ANY_TREATED_NEIGHBOR)
        net = Network(3, [(1, 2)])
        assert subpopulation(f, net) == UnitSet([1, 2])

    def test_explicit_units(self, neighbor_count):
        assert subpopulation(neighbor_count, Network.path(4),
                             units=[3]) == UnitSet([3])

    def test_iso_by_shape(self, iso):
        assert subpopulation(iso, Network.path(5)) == UnitSet([2, 3, 4])

    def test_empty(self, neighbor_count):
        assert not subpopulation(neighbor_count, Network.path(3), degree=3)


class TestPindown:
    """Test whether a control value fixes the neighborhood"""

    def test_no_treated_neighbors(self, neighbor_count):
        result = check_pindown(neighbor_count, Network.path(3), 2, (1, 0))
        assert result.holds
        assert str(result.delta) == '010'

    def test_one_treated_neighbor(self, neighbor_count):
        result = check_pindown(neighbor_count, Network.path(3), 2, (1, 1))
        assert result.verdict is Verdict.FAILS
        assert [str(w) for w in result.witnesses] == ['110', '011']

    def test_unattainable(self, neighbor_count):
        result = check_pindown(neighbor_count, Network.path(3), 2, (1, 3))
        assert result.verdict is Verdict.FAILS_EMPTY

    def test_all_treated_neighbors(self, neighbor_count):
        assert check_pindown(neighbor_count, Network.path(3), 2,
                             (0, 2)).holds

    def test_dim(self, dim):
        result = check_pindown(dim, Network.path(3), 1, 0)
        assert result.holds
        assert str(result.delta) == '0'

    def test_fraction_never_pins(self):
        f = ExposureSpec(ExposureKind.FRACTION_TREATED)
        result = check_pindown(f, Network.path(3), 1, Fraction(1, 3))
        assert result.verdict is Verdict.FAILS

    def test_to_dict(self, neighbor_count):
        out = check_pindown(neighbor_count, Network.path(3), 2,
                            (1, 1)).to_dict()
        assert out['verdict'] == 'FAILS'
        assert out['unit'] == 2
