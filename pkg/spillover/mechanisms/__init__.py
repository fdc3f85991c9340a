"""
Copyright (c) 2020 Nathan Telles

This Source Code Form is subject to the terms of the Mozilla Public
License, v. 2.0. If a copy of the MPL was not distributed with this
file, You can obtain one at http://mozilla.org/MPL/2.0/.
"""

from .checks import (check_ci_selection, check_unconfoundedness,
                     check_unit_independence)
from .coupling import (CoupledPair, CouplingCheck, CouplingLaw,
                       exact_coupling_law, order_violations,
                       sample_coupled_pair, sample_coupled_pairs,
                       total_variation, verify_coupling)
from .game import (GameInduced, GameSolution, LinearUtility, SelectionGame,
                   TableUtility, Utility, enumerate_equilibria,
                   induced_mechanism, solve_incomplete_info_game)
from .mechanism import (Mechanism, conditional_law, law_support, prob,
                        validate_law)
from .tables import (CompleteRandomization, ContextSwitch, ExplicitTable,
                     ProductBernoulli, product_law)
