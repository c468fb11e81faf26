"""
Click log simulation from a label-keyed DCM or DBN

Every session draws from its own random stream, derived from (seed, session
index), and consumes a fixed number of uniforms per rank, so a session's
clicks depend only on the seed, its index and its SERP.
"""

import logging
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from .click_models import ClickModelKind, ClickModelParams, per_rank_probabilities
from .core import ImputationPolicy, LabeledSerp, Session
from .errors import ConfigurationError

logger = logging.getLogger(__name__)

# click, leave (stop / satisfied), continue
DRAWS_PER_RANK = 3


@dataclass(frozen=True)
class SimConfig:
    params: ClickModelParams
    sessions_per_query: int = 1
    seed: int = 0
    policy: ImputationPolicy = ImputationPolicy.ZERO

    def __post_init__(self):
        if self.sessions_per_query < 1:
            raise ConfigurationError(f'sessions_per_query must be >= 1, got {self.sessions_per_query}')
        if not isinstance(self.params, ClickModelParams):
            raise ConfigurationError('params must be ClickModelParams')


def session_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def simulate_clicks(attract: Sequence[float], leave: Sequence[float], model: ClickModelKind,
                    gamma: float, uniforms: np.ndarray) -> List[int]:
    """Walk one SERP top-down; a click needs examination"""
    clicks = [0] * len(attract)
    for k, (a, s) in enumerate(zip(attract, leave)):
        u_click, u_leave, u_continue = uniforms[DRAWS_PER_RANK * k:DRAWS_PER_RANK * (k + 1)]
        if u_click < a:
            clicks[k] = 1
            if u_leave < s:
                break
        if model is ClickModelKind.DBN and u_continue >= gamma:
            break
    return clicks


def simulate_sessions(serps: Sequence[LabeledSerp], config: SimConfig) -> List[Session]:
    params = config.params
    gamma = params.dbn_continuation
    sessions = []
    index = 0
    for serp in serps:
        attract, leave = per_rank_probabilities(serp, params, config.policy)
        docs = tuple(serp.doc_ids())
        for _ in range(config.sessions_per_query):
            uniforms = session_rng(config.seed, index).random(DRAWS_PER_RANK * len(serp))
            clicks = simulate_clicks(attract, leave, params.model, gamma, uniforms)
            sessions.append(Session(f's{index}', serp.query_id, docs, tuple(clicks)))
            index += 1
    logger.info('Simulated %d sessions over %d queries with %s (seed %d)',
                len(sessions), len(serps), params.model.value, config.seed)
    return sessions
