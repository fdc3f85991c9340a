"""
Copyright (c) 2020 Nathan Telles

This Source Code Form is subject to the terms of the Mozilla Public
License, v. 2.0. If a copy of the MPL was not distributed with this
file, You can obtain one at http://mozilla.org/MPL/2.0/.
"""

import logging
import queue
import time
from multiprocessing import Process, Queue
from typing import Any, Dict, List, NamedTuple, Tuple
from typing import Optional as Opt

import networkx as nx
import numpy as np

from .config import (SearchConfig, scenario_from_dict,
                     search_config_from_dict)
from .errors import (IdentificationError, MechanismError, NetworkError,
                     SpilloverError)
from .estimands import (EstimandSpec, SignVerdict, VerdictKind,
                        check_sign_preservation)
from .exposures import subpopulation
from .helpers import chunk_ranges, drain_queue
from .logger import configure_log
from .mechanisms import (CompleteRandomization, ExplicitTable, Mechanism,
                         ProductBernoulli)
from .netcore import AssignmentVector, Network
from .outcomes import DEFAULT_CONTEXT, OutcomeModel
from .verdicts import TOLERANCE

log = logging.getLogger(__name__)

CHUNK_SIZE = 250


class Candidate(NamedTuple):
    index: int
    network: Network
    outcomes: np.ndarray  # (n, 2^n)
    mechanism: Mechanism


class Hit(NamedTuple):
    index: int
    tau: float
    premise: str
    scenario: Dict[str, Any]


class SearchResult(NamedTuple):
    name: str
    seed: int
    hits: List[Hit]
    evaluated: int
    skipped: int
    elapsed: float
    expect: Opt[Dict[str, Any]] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'search': self.name,
            'seed': self.seed,
            'evaluated': self.evaluated,
            'skipped': self.skipped,
            'found': len(self.hits),
            'hits': [{'index': h.index, 'tau': h.tau, 'premise': h.premise,
                      'scenario': h.scenario} for h in self.hits],
        }


def monotone_closure(table: np.ndarray, n: int) -> np.ndarray:
    """Smallest table above the input that is non-decreasing in every bit."""

    out = np.array(table, dtype=float)
    codes = np.arange(1 << n)
    for b in range(n):
        with_bit = codes[(codes >> b) & 1 == 1]
        out[..., with_bit] = np.maximum(out[..., with_bit],
                                        out[..., with_bit ^ (1 << b)])
    return out


def _network(cfg: SearchConfig, n: int, rng: np.random.Generator
             ) -> Network:
    if cfg.graph != 'random':
        return getattr(Network, cfg.graph)(n)
    graph = nx.gnp_random_graph(n, cfg.edge_prob,
                                seed=int(rng.integers(2 ** 32)))
    return Network(n, ((u + 1, v + 1) for u, v in graph.edges))


def _mechanism(cfg: SearchConfig, n: int, rng: np.random.Generator
               ) -> Mechanism:
    if cfg.mechanism == 'bernoulli':
        p = cfg.raw.get('p')
        return ProductBernoulli(n, rng.uniform(0.1, 0.9) if p is None else p)
    if cfg.mechanism == 'complete':
        return CompleteRandomization(n, int(rng.integers(1, n)) if n > 1
                                     else 0)
    size = min(cfg.support, 1 << n)
    codes = rng.choice(1 << n, size=size, replace=False)
    probs = rng.dirichlet(np.ones(size))
    return ExplicitTable(n, {int(c): float(p) for c, p in zip(codes, probs)})


def make_candidate(cfg: SearchConfig, index: int) -> Candidate:
    """Draw candidate index from its own stream seeded by (seed, index)."""

    rng = np.random.default_rng([cfg.seed, index])
    lo, hi = cfg.n_range
    n = int(rng.integers(lo, hi + 1))
    net = _network(cfg, n, rng)
    table = rng.choice(np.asarray(cfg.values, dtype=float),
                       size=(n, 1 << n))
    if cfg.monotone:
        table = monotone_closure(table, n)
    return Candidate(index, net, table, _mechanism(cfg, n, rng))


def _estimand(cfg: SearchConfig, net: Network) -> EstimandSpec:
    subpop = subpopulation(cfg.exposure, net, **cfg.subpopulation)
    return EstimandSpec(cfg.exposure, cfg.t, cfg.t_prime, subpop, net)


def _is_hit(cfg: SearchConfig, verdict: SignVerdict) -> bool:
    if verdict.verdict is not VerdictKind.VIOLATION:
        return False
    if cfg.target == 'negative_tau':
        return verdict.tau_value < -TOLERANCE
    if cfg.target == 'positive_tau':
        return verdict.tau_value > TOLERANCE
    return True


def evaluate_candidate(cfg: SearchConfig, candidate: Candidate
                       ) -> SignVerdict:
    """Sign verdict of a candidate under the configured criterion."""

    spec = _estimand(cfg, candidate.network)
    model = OutcomeModel.from_arrays(
        candidate.network.n, [DEFAULT_CONTEXT],
        {DEFAULT_CONTEXT.ctx_id: candidate.outcomes})
    return check_sign_preservation(cfg.criterion, spec, model,
                                   candidate.mechanism)


def candidate_scenario(cfg: SearchConfig, candidate: Candidate
                       ) -> Dict[str, Any]:
    n = candidate.network.n
    entries = [{'unit': i, 'assignment': str(AssignmentVector(code, n)),
                'value': float(candidate.outcomes[i - 1, code])}
               for i in range(1, n + 1) for code in range(1 << n)]
    estimand = {
        'exposure': dict(cfg.raw['exposure']),
        't': cfg.exposure.format_value(cfg.t),
        't_prime': cfg.exposure.format_value(cfg.t_prime),
        'subpopulation': dict(cfg.subpopulation),
    }
    return {
        'name': '{}-{}'.format(cfg.name, candidate.index),
        'description': 'Found by search {} (seed {}, candidate {})'.format(
            cfg.name, cfg.seed, candidate.index),
        'seed': cfg.seed,
        'network': candidate.network.to_dict(),
        'outcomes': {'entries': entries},
        'mechanism': candidate.mechanism.to_dict(),
        'estimand': estimand,
        'checks': ['pindown', 'sign_' + cfg.criterion.value],
    }


def reverify(cfg: SearchConfig, raw: Dict[str, Any],
             max_n: int) -> Opt[SignVerdict]:
    """Load an emitted scenario from scratch and evaluate it again."""

    scenario = scenario_from_dict(raw, max_n)
    verdict = check_sign_preservation(cfg.criterion, scenario.estimand,
                                      scenario.outcomes, scenario.mechanism)
    return verdict if _is_hit(cfg, verdict) else None


def evaluate_range(cfg: SearchConfig, start: int, stop: int, max_n: int
                   ) -> Tuple[List[Hit], int]:
    hits = []
    skipped = 0
    for index in range(start, stop):
        try:
            candidate = make_candidate(cfg, index)
            verdict = evaluate_candidate(cfg, candidate)
        except (IdentificationError, MechanismError, NetworkError) as ex:
            log.debug('Skipping candidate %d: %s', index, ex)
            skipped += 1
            continue
        if not _is_hit(cfg, verdict):
            continue
        raw = candidate_scenario(cfg, candidate)
        try:
            again = reverify(cfg, raw, max_n)
        except SpilloverError as ex:
            log.warning('Candidate %d did not survive reloading: %s',
                        index, ex)
            continue
        if again is None or abs(again.tau_value - verdict.tau_value) > 1e-9:
            log.warning('Candidate %d changed verdict on reloading', index)
            continue
        hits.append(Hit(index, verdict.tau_value, verdict.premise.value, raw))
    return hits, skipped


def search_main(raw: Dict[str, Any], max_n: int, log_q: Queue,
                task_q: Queue, result_q: Queue) -> None:
    """Worker process evaluating candidate ranges until it receives None."""

    try:
        configure_log(log_q)
        cfg = search_config_from_dict(raw, max_n)
        while True:
            task = task_q.get()
            if task is None:
                break
            start, stop = task
            hits, skipped = evaluate_range(cfg, start, stop, max_n)
            result_q.put((start, stop, hits, skipped))

    except (KeyboardInterrupt, SystemExit):
        pass  # Prevent stack trace caused by keyboard interrupt
    finally:
        # Let the parent process handle joining the result queue
        result_q.cancel_join_thread()


class SearchPool:
    """Long-lived worker processes fed candidate ranges round by round."""

    def __init__(self, cfg: SearchConfig, max_n: int, log_q: Queue,
                 workers: int) -> None:
        self._task_q = Queue()  # type: Queue[Opt[Tuple[int, int]]]
        self._result_q = Queue(
        )  # type: Queue[Tuple[int, int, List[Hit], int]]
        self._procs = [Process(target=search_main,
                               args=(cfg.raw, max_n, log_q, self._task_q,
                                     self._result_q),
                               name='search-{}'.format(k))
                       for k in range(workers)]

    def __enter__(self) -> 'SearchPool':
        for proc in self._procs:
            proc.start()
        return self

    def __exit__(self, *exc: Any) -> None:
        for _ in self._procs:
            self._task_q.put(None)
        for proc in self._procs:
            proc.join(10)
            if proc.is_alive():
                proc.terminate()

        # Drain queues so joining this process does not block
        drain_queue(self._result_q)
        drain_queue(self._task_q)

    def run(self, ranges: List[Tuple[int, int]]
            ) -> List[Tuple[int, int, List[Hit], int]]:
        for task in ranges:
            self._task_q.put(task)
        results = []
        while len(results) < len(ranges):
            try:
                results.append(self._result_q.get(timeout=600))
            except queue.Empty:
                raise RuntimeError('Search workers stopped responding')
        return sorted(results, key=lambda r: r[0])


def search_reversals(cfg: SearchConfig, max_n: int,
                     log_q: Opt[Queue] = None) -> SearchResult:
    """Randomized search for sign-preservation violations.

    Candidates are evaluated in rounds of consecutive index ranges and merged
    by index, so the hits and counts depend only on the seed and the budget,
    never on the number of workers.
    """

    started = time.perf_counter()
    workers = cfg.workers if log_q is not None else 1
    ranges = list(chunk_ranges(0, cfg.budget, CHUNK_SIZE))
    log.info("Search '%s': budget %d, %d worker(s), %s criterion",
             cfg.name, cfg.budget, workers, cfg.criterion.value)

    hits = []  # type: List[Hit]
    evaluated = skipped = 0

    def absorb(results: List[Tuple[int, int, List[Hit], int]]) -> bool:
        nonlocal evaluated, skipped
        for start, stop, found, missed in results:
            evaluated += stop - start
            skipped += missed
            hits.extend(found)
            if cfg.stop_after and len(hits) >= cfg.stop_after:
                return True
        return False

    if workers == 1:
        for start, stop in ranges:
            if absorb([(start, stop) + evaluate_range(cfg, start, stop,
                                                      max_n)]):
                break
    else:
        assert log_q is not None
        with SearchPool(cfg, max_n, log_q, workers) as pool:
            for k in range(0, len(ranges), workers):
                if absorb(pool.run(ranges[k:k + workers])):
                    break

    if cfg.stop_after:
        hits = hits[:cfg.stop_after]
    if skipped:
        log.warning('Skipped %d of %d candidates without overlap or '
                    'pin-down', skipped, evaluated)
    elapsed = time.perf_counter() - started
    log.info("Search '%s' finished: %d hit(s) in %d candidates (%.2fs)",
             cfg.name, len(hits), evaluated, elapsed)
    return SearchResult(cfg.name, cfg.seed, hits, evaluated, skipped,
                        elapsed, cfg.raw.get('expect'))
