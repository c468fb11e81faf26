"""
Fitting label-keyed click model parameters from click logs joined with judgments

DCM: closed-form counts, examination assumed to end at the last click.
DBN: EM over the hidden examination / satisfaction chain.
"""

import logging
import math
from collections import Counter
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .click_models import ClickModelKind, ClickModelParams, session_log_likelihood
from .core import (
    DEFAULT_DEPTH, MAX_GRADE, Aspect, GainScheme, ImputationPolicy, JudgedResult,
    LabeledSerp, MISSING_LABELS, Session,
)
from .errors import ConfigurationError, EstimationError
from .judgment_store import JudgmentStore

logger = logging.getLogger(__name__)

DEFAULT_MAX_ITERS = 200
DEFAULT_TOL = 1e-6
DEFAULT_SMOOTHING = 1.0

# Prior mean of a Bernoulli parameter nothing was observed for
UNOBSERVED = 0.5

INIT_ATTRACTIVENESS = 0.5
INIT_SATISFACTION = 0.5
INIT_CONTINUATION = 0.9
INIT_JITTER = 0.05


@dataclass(frozen=True)
class FitConfig:
    max_iters: int = DEFAULT_MAX_ITERS
    tol: float = DEFAULT_TOL
    smoothing: float = DEFAULT_SMOOTHING
    seed: int = 0
    depth: int = DEFAULT_DEPTH
    policy: ImputationPolicy = ImputationPolicy.ZERO
    gain: GainScheme = GainScheme()

    def __post_init__(self):
        if self.max_iters < 1:
            raise ConfigurationError(f'max_iters must be >= 1, got {self.max_iters}')
        if not self.tol > 0:
            raise ConfigurationError(f'tol must be > 0, got {self.tol}')
        if not self.smoothing >= 0:
            raise ConfigurationError(f'smoothing must be >= 0, got {self.smoothing}')
        if self.depth < 1:
            raise ConfigurationError(f'depth must be >= 1, got {self.depth}')


@dataclass(frozen=True)
class FitResult:
    params: ClickModelParams
    log_likelihoods: Tuple[float, ...]  # mean per-session log-likelihood, one per E-step
    iterations: int
    converged: bool


def session_serp(session: Session, judgments: JudgmentStore) -> LabeledSerp:
    """The SERP a session saw, labelled from the judgment store"""
    results = []
    for rank, doc_id in enumerate(session.docs, start=1):
        labels = judgments.get(session.query_id, doc_id) or MISSING_LABELS
        results.append(JudgedResult(doc_id, rank, labels.topical, labels.perceived, labels.snippet))
    return LabeledSerp(session.query_id, tuple(results))


class SessionTable:
    """Sessions collapsed to distinct (labels, clicks) rows with counts, padded to a common width"""

    def __init__(self, sessions: Sequence[Session], judgments: JudgmentStore, policy: ImputationPolicy):
        counts: Counter = Counter()
        for session in sessions:
            serp = session_serp(session, judgments)
            key = (
                tuple(serp.grades(Aspect.PERCEIVED, policy)),
                tuple(serp.grades(Aspect.TOPICAL, policy)),
                session.clicks,
            )
            counts[key] += 1
        rows = sorted(counts.items())
        self.sessions = len(sessions)
        self.width = max((len(key[2]) for key, _ in rows), default=0)
        shape = (len(rows), self.width)
        self.perceived = np.zeros(shape, dtype=np.int64)
        self.topical = np.zeros(shape, dtype=np.int64)
        self.clicks = np.zeros(shape, dtype=np.int64)
        self.mask = np.zeros(shape, dtype=bool)
        self.weight = np.zeros(len(rows), dtype=np.float64)
        for r, ((perceived, topical, clicks), count) in enumerate(rows):
            n = len(clicks)
            self.perceived[r, :n] = perceived
            self.topical[r, :n] = topical
            self.clicks[r, :n] = clicks
            self.mask[r, :n] = True
            self.weight[r] = count
        self.lengths = self.mask.sum(axis=1)
        # last shown rank of each row: its outgoing transition is never observed
        self.last = np.zeros(shape, dtype=bool)
        self.last[np.arange(len(rows)), self.lengths - 1] = True

    def __len__(self) -> int:
        return len(self.weight)


def _check_sessions(sessions: Sequence[Session]):
    if not sessions:
        raise EstimationError('no sessions to fit on')
    if not any(any(s.clicks) for s in sessions):
        raise EstimationError('no session has a click')


def _smoothed(num: float, den: float, smoothing: float) -> float:
    if den + 2 * smoothing <= 0:
        return UNOBSERVED
    return (smoothing + num) / (2 * smoothing + den)


def train_dcm(sessions: Sequence[Session], judgments: JudgmentStore, config: FitConfig = FitConfig()) -> FitResult:
    """Count-based DCM estimate; sessions without clicks carry no evidence"""
    _check_sessions(sessions)
    table = SessionTable(sessions, judgments, config.policy)
    depth = max(config.depth, table.width)
    impressions = np.zeros(MAX_GRADE + 1)
    clicked = np.zeros(MAX_GRADE + 1)
    clicks_at = np.zeros(depth)
    last_clicks_at = np.zeros(depth)
    for r in range(len(table)):
        ranks = np.flatnonzero(table.clicks[r])
        if len(ranks) == 0:
            continue
        last = ranks[-1]
        w = table.weight[r]
        np.add.at(impressions, table.perceived[r, :last + 1], w)
        np.add.at(clicked, table.perceived[r, ranks], w)
        clicks_at[ranks] += w
        last_clicks_at[last] += w

    sm = config.smoothing
    attractiveness = {g: _smoothed(clicked[g], impressions[g], sm) for g in range(MAX_GRADE + 1)}
    stop = [_smoothed(last_clicks_at[i], clicks_at[i], sm) for i in range(depth)]
    params = ClickModelParams.dcm(attractiveness, stop, gain=config.gain)
    mean_ll = _mean_log_likelihood(table, params)
    logger.info('Fitted DCM on %d sessions (%d distinct), mean log-likelihood %.6f',
                table.sessions, len(table), mean_ll)
    return FitResult(params, (mean_ll,), 1, True)


def fit_dcm(sessions: Sequence[Session], judgments: JudgmentStore, config: FitConfig = FitConfig()) -> ClickModelParams:
    return train_dcm(sessions, judgments, config).params


def _cell_probabilities(table: SessionTable, model: ClickModelKind, attract: np.ndarray,
                        leave: np.ndarray, gamma: float):
    """Per-cell transition weights m11 (E_k=1 -> E_k+1=1), m10 and m00 given the observed click"""
    a = attract[table.perceived]
    if model is ClickModelKind.DCM:
        s = np.broadcast_to(leave[:table.width], a.shape)
        go_on_click, go_on_skip = 1.0 - s, 1.0
    else:
        s = leave[table.topical]
        go_on_click, go_on_skip = (1.0 - s) * gamma, gamma
    c = table.clicks == 1
    m11 = np.where(c, a * go_on_click, (1.0 - a) * go_on_skip)
    m10 = np.where(c, a * (1.0 - go_on_click), (1.0 - a) * (1.0 - go_on_skip))
    m00 = np.where(c, 0.0, 1.0)
    pad = ~table.mask
    m11 = np.where(pad, 1.0, m11)
    m10 = np.where(pad, 0.0, m10)
    m00 = np.where(pad, 1.0, m00)
    return a, s, m11, m10, m00


def _forward_backward(m11: np.ndarray, m10: np.ndarray, m00: np.ndarray):
    rows, width = m11.shape
    alpha1 = np.ones((rows, width + 1))
    alpha0 = np.zeros((rows, width + 1))
    beta1 = np.ones((rows, width + 1))
    beta0 = np.ones((rows, width + 1))
    for k in range(width):
        alpha1[:, k + 1] = alpha1[:, k] * m11[:, k]
        alpha0[:, k + 1] = alpha1[:, k] * m10[:, k] + alpha0[:, k] * m00[:, k]
    for k in range(width - 1, -1, -1):
        beta1[:, k] = m11[:, k] * beta1[:, k + 1] + m10[:, k] * beta0[:, k + 1]
        beta0[:, k] = m00[:, k] * beta0[:, k + 1]
    return alpha1, alpha0, beta1, beta0


def _mean_log_likelihood(table: SessionTable, params: ClickModelParams) -> float:
    attract, leave, gamma = _as_arrays(params)
    _, _, m11, m10, m00 = _cell_probabilities(table, params.model, attract, leave, gamma)
    _, _, beta1, _ = _forward_backward(m11, m10, m00)
    with np.errstate(divide='ignore'):
        log_l = np.log(beta1[:, 0])
    return float(np.dot(table.weight, log_l) / table.weight.sum())


def _as_arrays(params: ClickModelParams):
    attract = np.array([params.attractiveness.get(g, UNOBSERVED) for g in range(MAX_GRADE + 1)])
    if params.model is ClickModelKind.DCM:
        return attract, np.array(params.dcm_stop), None
    sat = np.array([params.dbn_satisfaction.get(g, UNOBSERVED) for g in range(MAX_GRADE + 1)])
    return attract, sat, params.dbn_continuation


@dataclass
class _ExpectedCounts:
    attract_num: np.ndarray
    attract_den: np.ndarray
    sat_num: np.ndarray
    sat_den: np.ndarray
    gamma_num: float
    gamma_den: float
    mean_ll: float


def _dbn_expected_counts(table: SessionTable, attract: np.ndarray, sat: np.ndarray, gamma: float) -> _ExpectedCounts:
    a, s, m11, m10, m00 = _cell_probabilities(table, ClickModelKind.DBN, attract, sat, gamma)
    alpha1, _, beta1, beta0 = _forward_backward(m11, m10, m00)
    likelihood = beta1[:, [0]]
    w = table.weight[:, None]
    c = table.clicks == 1
    real = table.mask
    inner = real & ~table.last

    a1 = alpha1[:, :-1]
    next1 = beta1[:, 1:]
    next0 = beta0[:, 1:]
    examined = a1 * beta1[:, :-1] / likelihood
    satisfied = a1 * a * s * next0 / likelihood
    trial = np.where(c, 1.0 - satisfied, examined)
    success = np.where(c, a1 * a * (1.0 - s) * gamma * next1, a1 * (1.0 - a) * gamma * next1) / likelihood

    bins = MAX_GRADE + 1
    weights = np.broadcast_to(w, c.shape)
    attract_num = np.bincount(table.perceived[real], weights=(weights * c)[real], minlength=bins)
    attract_den = np.bincount(table.perceived[real], weights=(weights * examined)[real], minlength=bins)
    sat_cells = inner & c
    sat_num = np.bincount(table.topical[sat_cells], weights=(weights * satisfied)[sat_cells], minlength=bins)
    sat_den = np.bincount(table.topical[sat_cells], weights=weights[sat_cells], minlength=bins)
    gamma_num = float(np.sum((weights * success)[inner]))
    gamma_den = float(np.sum((weights * trial)[inner]))
    with np.errstate(divide='ignore'):
        mean_ll = float(np.dot(table.weight, np.log(likelihood[:, 0])) / table.weight.sum())
    return _ExpectedCounts(attract_num, attract_den, sat_num, sat_den, gamma_num, gamma_den, mean_ll)


def _maximize(num: np.ndarray, den: np.ndarray, current: np.ndarray, smoothing: float, final: bool) -> np.ndarray:
    out = current.copy()
    for g in range(len(num)):
        if den[g] > 0:
            out[g] = min(1.0, max(0.0, (smoothing + num[g]) / (2 * smoothing + den[g])))
        elif final:
            out[g] = UNOBSERVED
    return out


def train_dbn(sessions: Sequence[Session], judgments: JudgmentStore, config: FitConfig = FitConfig()) -> FitResult:
    """EM for the label-keyed DBN.

    The iterations maximize the plain likelihood, so the mean log-likelihood
    never decreases; the Beta(smoothing, smoothing) pseudo-counts enter in a
    last M-step over the final expected counts.
    """
    _check_sessions(sessions)
    table = SessionTable(sessions, judgments, config.policy)
    rng = np.random.default_rng(config.seed)
    bins = MAX_GRADE + 1
    attract = INIT_ATTRACTIVENESS + rng.uniform(-INIT_JITTER, INIT_JITTER, size=bins)
    sat = INIT_SATISFACTION + rng.uniform(-INIT_JITTER, INIT_JITTER, size=bins)
    gamma = INIT_CONTINUATION + float(rng.uniform(-INIT_JITTER, INIT_JITTER))

    history: List[float] = []
    converged = False
    iterations = 0
    while True:
        counts = _dbn_expected_counts(table, attract, sat, gamma)
        history.append(counts.mean_ll)
        logger.debug('DBN EM iteration %d: mean log-likelihood %.10f', iterations, counts.mean_ll)
        if len(history) > 1 and abs(history[-1] - history[-2]) < config.tol:
            converged = True
            break
        if iterations == config.max_iters:
            break
        attract = _maximize(counts.attract_num, counts.attract_den, attract, 0.0, final=False)
        sat = _maximize(counts.sat_num, counts.sat_den, sat, 0.0, final=False)
        if counts.gamma_den > 0:
            gamma = min(1.0, max(0.0, counts.gamma_num / counts.gamma_den))
        iterations += 1

    sm = config.smoothing
    attract = _maximize(counts.attract_num, counts.attract_den, attract, sm, final=True)
    sat = _maximize(counts.sat_num, counts.sat_den, sat, sm, final=True)
    if counts.gamma_den > 0:
        gamma = min(1.0, max(0.0, _smoothed(counts.gamma_num, counts.gamma_den, sm)))
    params = ClickModelParams.dbn(
        {g: float(attract[g]) for g in range(bins)},
        {g: float(sat[g]) for g in range(bins)},
        float(gamma),
        gain=config.gain,
    )
    logger.info('Fitted DBN on %d sessions (%d distinct) in %d iterations (%s), mean log-likelihood %.6f',
                table.sessions, len(table), iterations, 'converged' if converged else 'iteration cap',
                history[-1])
    return FitResult(params, tuple(history), iterations, converged)


def fit_dbn(sessions: Sequence[Session], judgments: JudgmentStore, config: FitConfig = FitConfig()) -> ClickModelParams:
    return train_dbn(sessions, judgments, config).params


def fit(model: ClickModelKind, sessions: Sequence[Session], judgments: JudgmentStore,
        config: FitConfig = FitConfig()) -> FitResult:
    if model is ClickModelKind.DCM:
        return train_dcm(sessions, judgments, config)
    return train_dbn(sessions, judgments, config)


def log_likelihood(sessions: Sequence[Session], judgments: JudgmentStore, params: ClickModelParams,
                   policy: ImputationPolicy = ImputationPolicy.ZERO) -> float:
    """Sum of per-session log-likelihoods"""
    return math.fsum(
        session_log_likelihood(session, session_serp(session, judgments), params, policy)
        for session in sessions
    )


def mean_log_likelihood(sessions: Sequence[Session], judgments: JudgmentStore, params: ClickModelParams,
                        policy: ImputationPolicy = ImputationPolicy.ZERO) -> float:
    if not sessions:
        raise EstimationError('no sessions')
    return log_likelihood(sessions, judgments, params, policy) / len(sessions)
