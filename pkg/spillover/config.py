"""
Copyright (c) 2020 Nathan Telles

This Source Code Form is subject to the terms of the Mozilla Public
License, v. 2.0. If a copy of the MPL was not distributed with this
file, You can obtain one at http://mozilla.org/MPL/2.0/.
"""

import hashlib
import json
import logging
from typing import Any, Dict, List, Mapping, Sequence, Tuple
from typing import Optional as Opt

import schema as sch
import yaml

from .errors import (ConfigIOError, InvalidMechanism, InvalidScenario,
                     NetworkError)
from .estimands import CriterionKind, EstimandSpec
from .exposures import (ExposureKind, ExposureSpec, ExposureValue, Reference,
                        subpopulation)
from .mechanisms import (CompleteRandomization, ContextSwitch, ExplicitTable,
                         LinearUtility, Mechanism, ProductBernoulli,
                         SelectionGame, TableUtility, induced_mechanism)
from .netcore import ENUMERATION_CAP, AssignmentVector, Network, UnitSet
from .outcomes import (DEFAULT_CONTEXT, Context, DistanceDecayFamily,
                       LinearInMeansFamily, LocalSumFamily, OutcomeModel,
                       StructuralFamily, check_weights)

log = logging.getLogger(__name__)

SAFE_STR_REG = sch.Regex(r'^[\w\d.-]+$')

BITS = sch.Schema(sch.And(str, sch.Regex(r'^[01]+$')),
                  error='assignments must be quoted bit strings like "101"')
NUMBER = sch.And(sch.Or(int, float), sch.Use(float))
PROBABILITY = sch.And(NUMBER, lambda p: 0.0 <= p <= 1.0,
                      error='probabilities must lie in [0, 1]')
COUNT = sch.And(int, lambda k: k >= 0, error='expected a non-negative integer')
EDGE = sch.And([int], lambda e: len(e) == 2, error='edges are [i, j] pairs')

NETWORK_SCHEMA = sch.Schema({
    'n': sch.And(int, lambda n: n >= 1, error='network n must be >= 1'),
    sch.Optional('type'): sch.Or('path', 'cycle', 'star', 'complete'),
    sch.Optional('edges', default=[]): [EDGE],
})

CONTEXTS_SCHEMA = sch.Schema([{
    'id': sch.And(str, SAFE_STR_REG),
    sch.Optional('weight', default=1.0): NUMBER,
    sch.Optional('covariates', default={}): {
        sch.And(str, SAFE_STR_REG): [sch.Or(int, str)]},
    sch.Optional('shocks'): [NUMBER],
}])

FAMILY_SCHEMAS = {
    'distance_decay': sch.Schema({
        'type': 'distance_decay',
        sch.Optional('own', default=1.0): NUMBER,
        sch.Optional('base', default=2.0): NUMBER,
        sch.Optional('scale', default=1.0): NUMBER,
    }),
    'local_sum': sch.Schema({
        'type': 'local_sum',
        'radius': COUNT,
        sch.Optional('own', default=1.0): NUMBER,
        sch.Optional('peer', default=1.0): sch.Or(NUMBER, [NUMBER]),
    }),
    'linear_in_means': sch.Schema({
        'type': 'linear_in_means',
        sch.Optional('alpha', default=0.0): NUMBER,
        sch.Optional('theta', default=1.0): NUMBER,
        sch.Optional('beta', default=0.5): NUMBER,
    }),
}

OUTCOMES_SCHEMA = sch.Schema({
    sch.Optional('default_outcome'): NUMBER,
    sch.Optional('entries', default=[]): [{
        sch.Optional('context', default=DEFAULT_CONTEXT.ctx_id): str,
        'unit': int,
        'assignment': BITS,
        'value': NUMBER,
    }],
    sch.Optional('rows', default=[]): [{
        sch.Optional('context', default=DEFAULT_CONTEXT.ctx_id): str,
        'assignment': BITS,
        'values': [NUMBER],
    }],
    sch.Optional('family'): {'type': sch.Or(*FAMILY_SCHEMAS), str: object},
    sch.Optional('declared_gamma'): {COUNT: NUMBER},
})

UTILITY_SCHEMAS = {
    'linear': sch.Schema({
        'type': 'linear',
        sch.Optional('intercept', default=0.0): NUMBER,
        sch.Optional('peer', default=0.0): NUMBER,
        sch.Optional('statistic', default='all'): sch.Or(
            *LinearUtility.STATISTICS),
        sch.Optional('covariates', default={}): {str: NUMBER},
    }),
    'table': sch.Schema({
        'type': 'table',
        sch.Optional('default', default=0.0): NUMBER,
        'values': [{'unit': int, 'others': BITS, 'value': NUMBER}],
    }),
}

TYPES = [[sch.And([NUMBER], lambda t: len(t) == 2,
                  error='types are [value, probability] pairs')]]

MECHANISM_SCHEMAS = {
    'explicit': sch.Schema({
        'type': 'explicit',
        'table': [{'assignment': BITS, 'prob': PROBABILITY}],
    }),
    'bernoulli': sch.Schema({
        'type': 'bernoulli',
        'p': sch.Or(PROBABILITY, [PROBABILITY]),
    }),
    'complete': sch.Schema({
        'type': 'complete',
        'treated': COUNT,
    }),
    'game': sch.Schema({
        'type': 'game',
        'types': TYPES,
        'utility': {'type': sch.Or(*UTILITY_SCHEMAS), str: object},
        sch.Optional('context_types', default={}): {str: TYPES},
    }),
}

EXPOSURE_SCHEMA = sch.Schema({
    'kind': sch.Or(*(k.value for k in ExposureKind)),
    sch.Optional('own_treatment'): sch.Or(0, 1),
    sch.Optional('K'): COUNT,
    sch.Optional('reference'): {
        'network': NETWORK_SCHEMA,
        'treated': BITS,
        'control': BITS,
    },
})

ESTIMAND_SCHEMA = sch.Schema({
    'exposure': EXPOSURE_SCHEMA,
    't': sch.Or(str, int, float, list),
    't_prime': sch.Or(str, int, float, list),
    sch.Optional('subpopulation', default={}): {
        sch.Optional('degree'): COUNT,
        sch.Optional('min_degree'): COUNT,
        sch.Optional('units'): [int],
    },
})

CHECKS = ('correct_specification', 'k_locality', 'pindown', 'ci_selection',
          'unit_independence', 'unconfoundedness', 'equilibrium',
          'decomposition', 'ani') + tuple(
              'sign_' + k.value for k in CriterionKind)

DEFAULT_CHECKS = ['pindown', 'decomposition', 'sign_general', 'sign_partial',
                  'sign_ordered']

EXPECT_SCHEMA = sch.Schema({
    sch.Optional('tau'): NUMBER,
    sch.Optional('tau_star'): NUMBER,
    sch.Optional('R_n'): NUMBER,
    sch.Optional('criteria', default={}): {
        sch.Or(*(k.value for k in CriterionKind)): sch.Or(
            'PRESERVED', 'VIOLATION', 'VACUOUS')},
    sch.Optional('premises', default={}): {
        sch.Or(*(k.value for k in CriterionKind)): str},
    sch.Optional('assumptions', default={}): {
        str: sch.Or('HOLDS', 'FAILS', 'FAILS_EMPTY')},
    sch.Optional('entries', default={}): {
        sch.Or(*(k.value for k in CriterionKind)): {
            sch.Optional('min'): NUMBER, sch.Optional('max'): NUMBER}},
    sch.Optional('tolerance', default=1e-12): NUMBER,
})

SCENARIO_BLOCKS = {
    'network': NETWORK_SCHEMA,
    'contexts': CONTEXTS_SCHEMA,
    'outcomes': OUTCOMES_SCHEMA,
    'estimand': ESTIMAND_SCHEMA,
    'checks': sch.Schema([sch.Or(*CHECKS)]),
    'expect': EXPECT_SCHEMA,
}

TOP_SCHEMA = sch.Schema({
    'name': sch.And(str, SAFE_STR_REG),
    sch.Optional('description', default=''): str,
    sch.Optional('seed', default=0): COUNT,
    'network': object,
    sch.Optional('contexts'): object,
    'outcomes': object,
    'mechanism': object,
    'estimand': object,
    sch.Optional('checks'): object,
    sch.Optional('k_prime'): COUNT,
    sch.Optional('ani_radii', default=[]): [COUNT],
    sch.Optional('expect'): object,
})


def load_yaml(file_path: str) -> Any:
    """Read a YAML file, reporting parse errors with line and column."""

    try:
        with open(file_path, 'r') as file:
            return yaml.safe_load(file)
    except EnvironmentError as ex:
        raise ConfigIOError(
            "Unable to read file '{}'. {}".format(file_path, ex)) from ex
    except yaml.YAMLError as ex:
        mark = getattr(ex, 'problem_mark', None)
        where = '' if mark is None else ' at line {}, column {}'.format(
            mark.line + 1, mark.column + 1)
        problem = getattr(ex, 'problem', None) or str(ex)
        raise InvalidScenario(['YAML parse error{}: {}'.format(
            where, problem)]) from ex


def digest(raw: Mapping[str, Any]) -> str:
    text = json.dumps(raw, sort_keys=True, separators=(',', ':'))
    return hashlib.sha256(text.encode('utf-8')).hexdigest()


class Scenario:
    """A validated scenario bundling everything one run needs.

    The mechanism and the estimand are built on first use, so a game that
    never converges or an empty subpopulation surfaces when the scenario
    runs rather than when it loads.
    """

    def __init__(self, raw: Dict[str, Any], network: Network,
                 contexts: Sequence[Context], outcomes: OutcomeModel,
                 family: Opt[StructuralFamily], mechanism: Opt[Mechanism],
                 game: Opt[SelectionGame], exposure: ExposureSpec,
                 t: ExposureValue, t_prime: ExposureValue,
                 subpop_params: Dict[str, Any], path: Opt[str] = None
                 ) -> None:
        self._raw = raw
        self._network = network
        self._contexts = tuple(contexts)
        self._outcomes = outcomes
        self._family = family
        self._mechanism = mechanism
        self._game = game
        self._exposure = exposure
        self._t = t
        self._t_prime = t_prime
        self._subpop_params = subpop_params
        self._estimand = None  # type: Opt[EstimandSpec]
        self.path = path

    @property
    def raw(self) -> Dict[str, Any]:
        return self._raw

    @property
    def name(self) -> str:
        return self._raw['name']

    @property
    def description(self) -> str:
        return self._raw.get('description', '')

    @property
    def seed(self) -> int:
        return self._raw.get('seed', 0)

    @property
    def digest(self) -> str:
        return digest(self._raw)

    @property
    def network(self) -> Network:
        return self._network

    @property
    def contexts(self) -> Tuple[Context, ...]:
        return self._contexts

    @property
    def outcomes(self) -> OutcomeModel:
        return self._outcomes

    @property
    def family(self) -> Opt[StructuralFamily]:
        return self._family

    @property
    def game(self) -> Opt[SelectionGame]:
        return self._game

    @property
    def exposure(self) -> ExposureSpec:
        return self._exposure

    @property
    def checks(self) -> List[str]:
        return list(self._raw.get('checks', DEFAULT_CHECKS))

    @property
    def k_prime(self) -> Opt[int]:
        return self._raw.get('k_prime')

    @property
    def ani_radii(self) -> List[int]:
        return list(self._raw.get('ani_radii', []))

    @property
    def expect(self) -> Opt[Dict[str, Any]]:
        return self._raw.get('expect')

    @property
    def mechanism(self) -> Mechanism:
        if self._mechanism is None:
            assert self._game is not None
            self._mechanism = induced_mechanism(self._game, self._network,
                                                self._contexts)
        return self._mechanism

    @property
    def subpopulation(self) -> UnitSet:
        return subpopulation(self._exposure, self._network,
                             **self._subpop_params)

    @property
    def estimand(self) -> EstimandSpec:
        if self._estimand is None:
            self._estimand = EstimandSpec(self._exposure, self._t,
                                          self._t_prime, self.subpopulation,
                                          self._network, self._contexts)
        return self._estimand


class _Problems:
    """Collects every validation problem, prefixed with its block."""

    def __init__(self) -> None:
        self.items = []  # type: List[str]

    def add(self, block: str, message: Any) -> None:
        self.items.append('{}: {}'.format(block, message))

    def validate(self, block: str, schema: sch.Schema, data: Any) -> Any:
        try:
            return schema.validate(data)
        except sch.SchemaError as ex:
            self.add(block, ex.code)
            return None


def _network(problems: _Problems, block: str, data: Dict[str, Any],
             max_n: int) -> Opt[Network]:
    n = data['n']
    if n > max_n:
        problems.add(block, 'n={} exceeds the enumeration cap {}'.format(
            n, max_n))
        return None
    try:
        if 'type' in data:
            if data['edges']:
                problems.add(block, 'give either a type or edges, not both')
                return None
            return getattr(Network, data['type'])(n)
        return Network(n, data['edges'])
    except NetworkError as ex:
        problems.add(block, ex)
        return None


def _contexts(problems: _Problems, data: Opt[List[Dict[str, Any]]],
              n: Opt[int]) -> Opt[List[Context]]:
    if data is None:
        return [DEFAULT_CONTEXT]
    try:
        contexts = [Context(c['id'], c['weight'], c['covariates'],
                            c.get('shocks')) for c in data]
        check_weights(contexts)
    except ValueError as ex:
        problems.add('contexts', ex)
        return None
    if n is not None:
        for ctx in contexts:
            for message in ctx.check_size(n):
                problems.add('contexts', message)
    return contexts


def _family(problems: _Problems, data: Dict[str, Any],
            declared: Opt[Dict[int, float]]) -> Opt[StructuralFamily]:
    params = problems.validate('outcomes.family', FAMILY_SCHEMAS[data['type']],
                               data)
    if params is None:
        return None
    kind = params.pop('type')
    try:
        if kind == 'distance_decay':
            return DistanceDecayFamily(declared_gamma=declared, **params)
        if kind == 'local_sum':
            return LocalSumFamily(declared_gamma=declared, **params)
        return LinearInMeansFamily(declared_gamma=declared, **params)
    except ValueError as ex:
        problems.add('outcomes.family', ex)
        return None


def _rows_as_entries(problems: _Problems, rows: List[Dict[str, Any]], n: int
                     ) -> Opt[List[Dict[str, Any]]]:
    """Spread rows of per-unit values over single-cell entries."""

    entries = []
    for k, row in enumerate(rows, 1):
        if len(row['values']) != n:
            problems.add('outcomes', 'row {}: {} values, expected n={}'
                         .format(k, len(row['values']), n))
            return None
        entries.extend({'context': row['context'], 'unit': unit,
                        'assignment': row['assignment'], 'value': value}
                       for unit, value in enumerate(row['values'], 1))
    return entries


def _outcomes(problems: _Problems, data: Dict[str, Any], net: Network,
              contexts: List[Context]
              ) -> Tuple[Opt[OutcomeModel], Opt[StructuralFamily]]:
    n = net.n
    family = None
    if 'family' in data:
        if data['entries'] or data['rows']:
            problems.add('outcomes', 'give either a table or a family')
            return None, None
        family = _family(problems, data['family'], data.get('declared_gamma'))
        if family is None:
            return None, None
        return family.to_model(net, contexts), family

    listed = _rows_as_entries(problems, data['rows'], n)
    if listed is None:
        return None, None
    listed.extend(data['entries'])
    if not listed and 'default_outcome' not in data:
        problems.add('outcomes',
                     'needs rows, entries, a family or a default_outcome')
        return None, None

    known = {c.ctx_id for c in contexts}
    entries = {}
    ok = True
    for k, entry in enumerate(listed, 1):
        where = 'entry {}'.format(k)
        if len(entry['assignment']) != n:
            problems.add('outcomes', "{}: assignment '{}' has length {}, "
                         'expected n={}'.format(where, entry['assignment'],
                                                len(entry['assignment']), n))
            ok = False
            continue
        if not 1 <= entry['unit'] <= n:
            problems.add('outcomes', '{}: unit {} outside 1..{}'.format(
                where, entry['unit'], n))
            ok = False
            continue
        if entry['context'] not in known:
            problems.add('outcomes', "{}: unknown context '{}'".format(
                where, entry['context']))
            ok = False
            continue
        key = (entry['context'], entry['unit'],
               AssignmentVector.from_string(entry['assignment']).bits)
        if key in entries:
            problems.add('outcomes', '{}: duplicate cell'.format(where))
            ok = False
        entries[key] = entry['value']
    if not ok:
        return None, None
    return OutcomeModel(n, contexts, entries,
                        data.get('default_outcome')), None


def _simple_mechanism(problems: _Problems, block: str, data: Dict[str, Any],
                      n: int) -> Opt[Mechanism]:
    kind = data.get('type') if isinstance(data, dict) else None
    if kind not in MECHANISM_SCHEMAS or kind == 'game':
        problems.add(block, "type must be one of explicit, bernoulli, "
                     "complete{}".format(', game' if block == 'mechanism'
                                         else ''))
        return None
    params = problems.validate(block, MECHANISM_SCHEMAS[kind], data)
    if params is None:
        return None
    try:
        if kind == 'explicit':
            rows = {}
            for row in params['table']:
                if len(row['assignment']) != n:
                    problems.add(block, "assignment '{}' has length {}, "
                                 'expected n={}'.format(
                                     row['assignment'], len(row['assignment']),
                                     n))
                    return None
                bits = AssignmentVector.from_string(row['assignment']).bits
                rows[bits] = rows.get(bits, 0.0) + row['prob']
            return ExplicitTable(n, rows)
        if kind == 'bernoulli':
            return ProductBernoulli(n, params['p'])
        return CompleteRandomization(n, params['treated'])
    except InvalidMechanism as ex:
        problems.add(block, ex)
        return None


def _utility(problems: _Problems, data: Dict[str, Any], n: int
             ) -> Opt[Any]:
    params = problems.validate('mechanism.utility',
                               UTILITY_SCHEMAS[data['type']], data)
    if params is None:
        return None
    if params['type'] == 'linear':
        return LinearUtility(params['intercept'], params['peer'],
                             params['statistic'], params['covariates'])
    values = {}
    for row in params['values']:
        if len(row['others']) != n or not 1 <= row['unit'] <= n:
            problems.add('mechanism.utility',
                         "row for unit {} with '{}' does not fit n={}".format(
                             row['unit'], row['others'], n))
            return None
        values[(row['unit'],
                AssignmentVector.from_string(row['others']).bits)] = \
            row['value']
    return TableUtility(n, values, params['default'])


def _mechanism(problems: _Problems, data: Any, net: Network,
               contexts: List[Context]
               ) -> Tuple[Opt[Mechanism], Opt[SelectionGame]]:
    if not isinstance(data, dict):
        problems.add('mechanism', 'must be a mapping')
        return None, None

    n = net.n
    data = dict(data)
    overrides = data.pop('contexts', {}) or {}
    known = {c.ctx_id for c in contexts}

    if data.get('type') == 'game':
        if overrides:
            problems.add('mechanism', 'games take context_types, not '
                         'contexts overrides')
            return None, None
        params = problems.validate('mechanism', MECHANISM_SCHEMAS['game'],
                                   data)
        if params is None:
            return None, None
        utility = _utility(problems, params['utility'], n)
        unknown = set(params['context_types']) - known
        if unknown:
            problems.add('mechanism', 'context_types for unknown contexts '
                         '{}'.format(sorted(unknown)))
            return None, None
        if utility is None:
            return None, None
        try:
            game = SelectionGame(
                n, [[tuple(t) for t in s] for s in params['types']], utility,
                {k: [[tuple(t) for t in s] for s in v]
                 for k, v in params['context_types'].items()})
        except InvalidMechanism as ex:
            problems.add('mechanism', ex)
            return None, None
        if isinstance(utility, LinearUtility):
            for ctx in contexts:
                missing = set(utility.covariate_effects) - set(ctx.covariates)
                if missing:
                    problems.add('mechanism', "context '{}' lacks covariates "
                                 '{}'.format(ctx.ctx_id, sorted(missing)))
                    return None, None
                labels = sorted(
                    name for name in utility.covariate_effects
                    if not all(isinstance(v, (int, float))
                               for v in ctx.covariates[name]))
                if labels:
                    problems.add('mechanism', "context '{}' has non-numeric "
                                 'covariates {} used by the linear utility'
                                 .format(ctx.ctx_id, labels))
                    return None, None
        return None, game

    mech = _simple_mechanism(problems, 'mechanism', data, n)
    switched = {}
    for ctx_id, block in overrides.items():
        if ctx_id not in known:
            problems.add('mechanism', "override for unknown context '{}'"
                         .format(ctx_id))
            continue
        sub = _simple_mechanism(problems, 'mechanism.contexts.' + ctx_id,
                                block, n)
        if sub is not None:
            switched[ctx_id] = sub
    if mech is None or len(switched) != len(overrides):
        return None, None
    if switched:
        mech = ContextSwitch(mech, switched)

    # Probabilities are validated on load, context by context
    try:
        for ctx in contexts:
            mech.law(ctx)
    except InvalidMechanism as ex:
        problems.add('mechanism', ex)
        return None, None
    return mech, None


def _exposure(problems: _Problems, data: Dict[str, Any],
              max_n: int = ENUMERATION_CAP) -> Opt[ExposureSpec]:
    kind = ExposureKind(data['kind'])
    reference = None
    if 'reference' in data:
        ref = data['reference']
        ref_net = _network(problems, 'estimand.exposure.reference',
                           ref['network'], max_n)
        if ref_net is None:
            return None
        reference = Reference(ref_net,
                              AssignmentVector.from_string(ref['treated']),
                              AssignmentVector.from_string(ref['control']))
    try:
        return ExposureSpec(kind, data.get('own_treatment'), data.get('K'),
                            reference)
    except ValueError as ex:
        problems.add('estimand.exposure', ex)
        return None


def scenario_from_dict(raw: Any, max_n: int = ENUMERATION_CAP,
                       path: Opt[str] = None) -> Scenario:
    """Validate every block of a scenario and build it.

    Raises InvalidScenario carrying all problems found, not just the first.
    """

    problems = _Problems()
    if not isinstance(raw, dict):
        raise InvalidScenario(['scenario must be a mapping of blocks'])

    top = problems.validate('scenario', TOP_SCHEMA, raw)
    if top is None:
        raise InvalidScenario(problems.items)

    blocks = {}
    for name, block_schema in SCENARIO_BLOCKS.items():
        if name in top:
            blocks[name] = problems.validate(name, block_schema, top[name])

    net = None
    if blocks.get('network') is not None:
        net = _network(problems, 'network', blocks['network'], max_n)

    contexts = None
    if 'contexts' not in top or blocks.get('contexts') is not None:
        contexts = _contexts(problems, blocks.get('contexts'),
                             None if net is None else net.n)

    model = family = mech = game = exposure = None
    t = t_prime = None
    subpop_params = {}  # type: Dict[str, Any]
    if net is not None and contexts is not None:
        if blocks.get('outcomes') is not None:
            model, family = _outcomes(problems, blocks['outcomes'], net,
                                      contexts)
        mech, game = _mechanism(problems, top['mechanism'], net, contexts)

    estimand = blocks.get('estimand')
    if estimand is not None:
        exposure = _exposure(problems, estimand['exposure'], max_n)
        if exposure is not None:
            for key in ('t', 't_prime'):
                try:
                    value = exposure.parse_value(estimand[key])
                except ValueError as ex:
                    problems.add('estimand', '{}: {}'.format(key, ex))
                    continue
                if key == 't':
                    t = value
                else:
                    t_prime = value
            if t is not None and t == t_prime:
                problems.add('estimand', 't and t_prime must differ')
        subpop_params = dict(estimand['subpopulation'])
        if net is not None:
            for unit in subpop_params.get('units', []):
                if not 1 <= unit <= net.n:
                    problems.add('estimand', 'subpopulation unit {} outside '
                                 '1..{}'.format(unit, net.n))

    checks = blocks.get('checks') or []
    if 'k_locality' in checks and top.get('k_prime') is None:
        problems.add('checks', "'k_locality' needs k_prime")
    if 'ani' in checks and 'family' not in (blocks.get('outcomes') or {}):
        problems.add('checks', "'ani' needs a structural outcome family")
    is_game = isinstance(top['mechanism'], dict) and \
        top['mechanism'].get('type') == 'game'
    if 'equilibrium' in checks and not is_game:
        problems.add('checks', "'equilibrium' needs a game mechanism")

    if problems.items:
        raise InvalidScenario(problems.items)

    assert net is not None and contexts is not None and model is not None
    assert exposure is not None and t is not None and t_prime is not None
    top.update(blocks)
    log.info("Loaded scenario '%s' (n=%d)", top['name'], net.n)
    return Scenario(top, net, contexts, model, family, mech, game, exposure,
                    t, t_prime, subpop_params, path)


def load_scenario(file_path: str, max_n: int = ENUMERATION_CAP) -> Scenario:
    """Open the YAML scenario at the provided path and validate it."""

    return scenario_from_dict(load_yaml(file_path), max_n, file_path)


SEARCH_SCHEMA = sch.Schema({
    'name': sch.And(str, SAFE_STR_REG),
    sch.Optional('description', default=''): str,
    'exposure': EXPOSURE_SCHEMA,
    't': sch.Or(str, int, float, list),
    't_prime': sch.Or(str, int, float, list),
    sch.Optional('subpopulation', default={}): {
        sch.Optional('degree'): COUNT,
        sch.Optional('min_degree'): COUNT,
        sch.Optional('units'): [int],
    },
    sch.Optional('criterion', default='partial'): sch.Or(
        *(k.value for k in CriterionKind)),
    sch.Optional('target', default='violation'): sch.Or(
        'violation', 'negative_tau', 'positive_tau'),
    'n': sch.Or(sch.And(int, lambda n: n >= 1),
                sch.And([int], lambda r: len(r) == 2 and 1 <= r[0] <= r[1])),
    sch.Optional('graph', default='random'): sch.Or(
        'random', 'path', 'cycle', 'star', 'complete'),
    sch.Optional('edge_prob', default=0.5): PROBABILITY,
    sch.Optional('mechanism', default='explicit'): sch.Or(
        'explicit', 'bernoulli', 'complete'),
    sch.Optional('support', default=2): sch.And(int, lambda k: k >= 1),
    sch.Optional('p'): PROBABILITY,
    sch.Optional('values', default=[0, 1, 2, 3]): sch.And(
        [NUMBER], lambda v: len(v) >= 1),
    sch.Optional('monotone', default=False): bool,
    sch.Optional('seed', default=0): COUNT,
    sch.Optional('budget', default=10000): sch.And(int, lambda b: b > 0),
    sch.Optional('stop_after', default=1): COUNT,
    sch.Optional('workers', default=1): sch.And(int, lambda w: w >= 1),
    sch.Optional('expect'): {sch.Optional('found'): bool},
})

COUPLING_SCHEMA = sch.Schema({
    'name': sch.And(str, SAFE_STR_REG),
    sch.Optional('description', default=''): str,
    'graphs': [{'type': sch.Or('star', 'complete'),
                'n': sch.And(int, lambda n: n >= 3)}],
    sch.Optional('ego', default=1): sch.And(int, lambda i: i >= 1),
    'p': [sch.And(NUMBER, lambda p: 0 < p < 1)],
    sch.Optional('d', default=[0, 1]): [sch.Or(0, 1)],
    sch.Optional('samples', default=100000): COUNT,
    sch.Optional('seed', default=0): COUNT,
    sch.Optional('heterogeneous'): [sch.And(NUMBER, lambda p: 0 < p < 1)],
    sch.Optional('expect'): {
        sch.Optional('exact'): bool,
        sch.Optional('order_violations'): COUNT,
    },
})


class SearchConfig:
    """Validated reversal search configuration."""

    def __init__(self, raw: Dict[str, Any], exposure: ExposureSpec,
                 t: ExposureValue, t_prime: ExposureValue) -> None:
        self.raw = raw
        self.exposure = exposure
        self.t = t
        self.t_prime = t_prime

    def __getattr__(self, key: str) -> Any:
        try:
            return self.__dict__['raw'][key]
        except KeyError:
            raise AttributeError(key) from None

    @property
    def n_range(self) -> Tuple[int, int]:
        n = self.raw['n']
        return (n, n) if isinstance(n, int) else (n[0], n[1])

    @property
    def criterion(self) -> CriterionKind:
        return CriterionKind(self.raw['criterion'])


def search_config_from_dict(raw: Any, max_n: int = ENUMERATION_CAP,
                            overrides: Opt[Dict[str, Any]] = None
                            ) -> SearchConfig:
    problems = _Problems()
    if not isinstance(raw, dict):
        raise InvalidScenario(['search config must be a mapping'])
    merged = dict(raw)
    merged.update({k: v for k, v in (overrides or {}).items()
                   if v is not None})
    data = problems.validate('search', SEARCH_SCHEMA, merged)
    if data is None:
        raise InvalidScenario(problems.items)
    n_hi = data['n'] if isinstance(data['n'], int) else data['n'][1]
    if n_hi > max_n:
        problems.add('search', 'n={} exceeds the enumeration cap {}'.format(
            n_hi, max_n))
    exposure = _exposure(problems, data['exposure'], max_n)
    values = []  # type: List[ExposureValue]
    if exposure is not None:
        for key in ('t', 't_prime'):
            try:
                values.append(exposure.parse_value(data[key]))
            except ValueError as ex:
                problems.add('search', '{}: {}'.format(key, ex))
    if problems.items:
        raise InvalidScenario(problems.items)
    assert exposure is not None
    return SearchConfig(data, exposure, values[0], values[1])


def load_search_config(file_path: str, max_n: int = ENUMERATION_CAP,
                       overrides: Opt[Dict[str, Any]] = None
                       ) -> SearchConfig:
    return search_config_from_dict(load_yaml(file_path), max_n, overrides)


def coupling_config_from_dict(raw: Any, overrides: Opt[Dict[str, Any]] = None
                              ) -> Dict[str, Any]:
    problems = _Problems()
    if not isinstance(raw, dict):
        raise InvalidScenario(['coupling config must be a mapping'])
    merged = dict(raw)
    merged.update({k: v for k, v in (overrides or {}).items()
                   if v is not None})
    data = problems.validate('coupling', COUPLING_SCHEMA, merged)
    if data is None:
        raise InvalidScenario(problems.items)
    return data


def load_coupling_config(file_path: str,
                         overrides: Opt[Dict[str, Any]] = None
                         ) -> Dict[str, Any]:
    return coupling_config_from_dict(load_yaml(file_path), overrides)
