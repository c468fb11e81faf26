"""
Label-conditioned cascade click models (DCM and DBN)

Both models walk the SERP top-down. A result can be clicked only if it is
examined; the click probability is the attractiveness a(A) of its perceived
label. After rank k the user goes on to rank k+1 with probability

    DCM:  1 - a(A_k) * s_k                 (s_k: stop after a click at rank k)
    DBN:  gamma * (1 - a(A_k) * sat(R_k))  (sat keyed by topical label)

The DCM stop parameter relates to the classic DCM continuation lambda_k as
s_k = 1 - lambda_k.
"""

import enum
import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np

from .core import GainScheme, ImputationPolicy, LabeledSerp, Session, Aspect, check_grade
from .errors import ConfigurationError, FormatError, SizeError

# Exhaustive enumeration is exponential in the SERP length
MAX_TRACE_DEPTH = 12


class ClickModelKind(enum.Enum):
    DCM = 'dcm'
    DBN = 'dbn'


def _check_probability(value: float, what: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigurationError(f'{what} must be a number, got {value!r}')
    value = float(value)
    if not (0.0 <= value <= 1.0):
        raise ConfigurationError(f'{what} = {value} is not a probability')
    return value


def _grade_map(values: Mapping, what: str) -> Dict[int, float]:
    out = {}
    for grade, prob in values.items():
        try:
            grade = check_grade(int(grade))
        except (TypeError, ValueError) as e:
            raise ConfigurationError(f'{what}: bad grade key {grade!r} ({e})')
        out[grade] = _check_probability(prob, f'{what}[{grade}]')
    return dict(sorted(out.items()))


@dataclass(frozen=True)
class ClickModelParams:
    """Parameters shared by every document carrying the same label"""
    model: ClickModelKind
    attractiveness: Mapping[int, float]
    dcm_stop: Tuple[float, ...] = ()
    dbn_satisfaction: Mapping[int, float] = field(default_factory=dict)
    dbn_continuation: Optional[float] = None
    gain: GainScheme = GainScheme()

    def __post_init__(self):
        if not isinstance(self.model, ClickModelKind):
            raise ConfigurationError(f'unknown click model {self.model!r}')
        if not self.attractiveness:
            raise ConfigurationError('attractiveness must have at least one grade')
        object.__setattr__(self, 'attractiveness', _grade_map(self.attractiveness, 'attractiveness'))
        object.__setattr__(self, 'dcm_stop', tuple(
            _check_probability(s, f'dcm_stop[{i}]') for i, s in enumerate(self.dcm_stop, start=1)
        ))
        object.__setattr__(self, 'dbn_satisfaction', _grade_map(self.dbn_satisfaction, 'dbn_satisfaction'))
        if self.dbn_continuation is not None:
            object.__setattr__(self, 'dbn_continuation',
                               _check_probability(self.dbn_continuation, 'dbn_continuation'))

        if self.model is ClickModelKind.DCM:
            if not self.dcm_stop:
                raise ConfigurationError('DCM parameters need dcm_stop')
            if self.dbn_satisfaction or self.dbn_continuation is not None:
                raise ConfigurationError('DCM parameters must not carry DBN fields')
        else:
            if not self.dbn_satisfaction or self.dbn_continuation is None:
                raise ConfigurationError('DBN parameters need dbn_satisfaction and dbn_continuation')
            if self.dcm_stop:
                raise ConfigurationError('DBN parameters must not carry dcm_stop')

    @classmethod
    def dcm(cls, attractiveness: Mapping[int, float], stop, gain: GainScheme = GainScheme()) -> 'ClickModelParams':
        return cls(ClickModelKind.DCM, attractiveness, dcm_stop=tuple(stop), gain=gain)

    @classmethod
    def dbn(cls, attractiveness: Mapping[int, float], satisfaction: Mapping[int, float],
            continuation: float, gain: GainScheme = GainScheme()) -> 'ClickModelParams':
        return cls(ClickModelKind.DBN, attractiveness, dbn_satisfaction=satisfaction,
                   dbn_continuation=continuation, gain=gain)

    @property
    def depth(self) -> Optional[int]:
        """Deepest rank the parameters cover (None: unbounded)"""
        return len(self.dcm_stop) if self.model is ClickModelKind.DCM else None

    def attractiveness_of(self, grade: int) -> float:
        try:
            return self.attractiveness[grade]
        except KeyError:
            raise ConfigurationError(f'no attractiveness for perceived grade {grade}')

    def satisfaction_of(self, grade: int) -> float:
        try:
            return self.dbn_satisfaction[grade]
        except KeyError:
            raise ConfigurationError(f'no satisfaction for topical grade {grade}')

    def stop_at(self, rank: int) -> float:
        if not 1 <= rank <= len(self.dcm_stop):
            raise ConfigurationError(f'no dcm_stop for rank {rank} (parameters cover {len(self.dcm_stop)})')
        return self.dcm_stop[rank - 1]


def per_rank_probabilities(serp: LabeledSerp, params: ClickModelParams,
                           policy: ImputationPolicy = ImputationPolicy.ZERO) -> Tuple[List[float], List[float]]:
    """(attractiveness, leave) per rank.

    leave is the DCM stop probability s_k, or the DBN satisfaction sat(R_k).
    """
    attract = [params.attractiveness_of(g) for g in serp.grades(Aspect.PERCEIVED, policy)]
    if params.model is ClickModelKind.DCM:
        leave = [params.stop_at(rank) for rank in range(1, len(serp) + 1)]
    else:
        leave = [params.satisfaction_of(g) for g in serp.grades(Aspect.TOPICAL, policy)]
    return attract, leave


@dataclass(frozen=True)
class ExaminationProfile:
    """exam[k] = P(E_k = 1), click[k] = P(C_k = 1), 0-based index k for rank k+1"""
    exam: np.ndarray
    click: np.ndarray

    def __post_init__(self):
        if len(self.exam) != len(self.click):
            raise ConfigurationError('exam and click lengths differ')

    def __len__(self) -> int:
        return len(self.exam)


def _require_model(params: ClickModelParams, model: ClickModelKind):
    if params.model is not model:
        raise ConfigurationError(f'expected {model.value} parameters, got {params.model.value}')


def dcm_profile(serp: LabeledSerp, params: ClickModelParams,
                policy: ImputationPolicy = ImputationPolicy.ZERO) -> ExaminationProfile:
    _require_model(params, ClickModelKind.DCM)
    attract, stop = per_rank_probabilities(serp, params, policy)
    exam = []
    examined = 1.0
    for a, s in zip(attract, stop):
        exam.append(examined)
        examined = examined * (1.0 - a * s)
    click = [a * e for a, e in zip(attract, exam)]
    return ExaminationProfile(np.array(exam), np.array(click))


def dbn_profile(serp: LabeledSerp, params: ClickModelParams,
                policy: ImputationPolicy = ImputationPolicy.ZERO) -> ExaminationProfile:
    _require_model(params, ClickModelKind.DBN)
    attract, sat = per_rank_probabilities(serp, params, policy)
    gamma = params.dbn_continuation
    exam = []
    examined = 1.0
    for a, s in zip(attract, sat):
        exam.append(examined)
        examined = examined * gamma * (1.0 - a * s)
    click = [a * e for a, e in zip(attract, exam)]
    return ExaminationProfile(np.array(exam), np.array(click))


def profile(serp: LabeledSerp, params: ClickModelParams,
            policy: ImputationPolicy = ImputationPolicy.ZERO) -> ExaminationProfile:
    if params.model is ClickModelKind.DCM:
        return dcm_profile(serp, params, policy)
    return dbn_profile(serp, params, policy)


def _transitions(model: ClickModelKind, a: float, leave: float, gamma: Optional[float]):
    """Branches out of an examined rank: (clicked, probability, goes on)"""
    if model is ClickModelKind.DCM:
        return [
            (1, a * leave, False),
            (1, a * (1.0 - leave), True),
            (0, 1.0 - a, True),
        ]
    return [
        (1, a * leave, False),
        (1, a * (1.0 - leave) * gamma, True),
        (1, a * (1.0 - leave) * (1.0 - gamma), False),
        (0, (1.0 - a) * gamma, True),
        (0, (1.0 - a) * (1.0 - gamma), False),
    ]


class TraceDistribution:
    """Probability of every (examination vector, click vector) a user can produce"""

    def __init__(self, n: int, traces: Dict[Tuple[Tuple[int, ...], Tuple[int, ...]], float]):
        self.n = n
        self.traces = traces

    def total(self) -> float:
        return math.fsum(self.traces.values())

    def click_distribution(self) -> Dict[Tuple[int, ...], float]:
        out: Dict[Tuple[int, ...], float] = {}
        for (_, clicks), prob in self.traces.items():
            out[clicks] = out.get(clicks, 0.0) + prob
        return out

    def click_marginals(self) -> np.ndarray:
        return np.array([
            math.fsum(p for (_, clicks), p in self.traces.items() if clicks[k])
            for k in range(self.n)
        ])

    def exam_marginals(self) -> np.ndarray:
        return np.array([
            math.fsum(p for (exam, _), p in self.traces.items() if exam[k])
            for k in range(self.n)
        ])

    def probability_of(self, clicks) -> float:
        return self.click_distribution().get(tuple(clicks), 0.0)


def enumerate_traces(serp: LabeledSerp, params: ClickModelParams,
                     policy: ImputationPolicy = ImputationPolicy.ZERO) -> TraceDistribution:
    """Brute-force every user behaviour trace on a short SERP"""
    n = len(serp)
    if n > MAX_TRACE_DEPTH:
        raise SizeError(f'cannot enumerate traces for {n} results (limit {MAX_TRACE_DEPTH})')
    attract, leave = per_rank_probabilities(serp, params, policy)
    gamma = params.dbn_continuation
    traces: Dict[Tuple[Tuple[int, ...], Tuple[int, ...]], float] = {}

    def walk(k: int, exam: Tuple[int, ...], clicks: Tuple[int, ...], prob: float):
        if k == n:
            key = (exam, clicks)
            traces[key] = traces.get(key, 0.0) + prob
            return
        for clicked, p, goes_on in _transitions(params.model, attract[k], leave[k], gamma):
            if p == 0.0:
                continue
            exam_next = exam + (1,)
            clicks_next = clicks + (clicked,)
            if goes_on:
                walk(k + 1, exam_next, clicks_next, prob * p)
            else:
                rest = (0,) * (n - k - 1)
                key = (exam_next + rest, clicks_next + rest)
                traces[key] = traces.get(key, 0.0) + prob * p

    walk(0, (), (), 1.0)
    return TraceDistribution(n, traces)


def session_log_likelihood(session: Session, serp: LabeledSerp, params: ClickModelParams,
                           policy: ImputationPolicy = ImputationPolicy.ZERO) -> float:
    """log P(observed clicks), summing over the hidden examination chain"""
    if len(session) != len(serp):
        raise FormatError(
            f'session {session.session_id!r} has {len(session)} click flags but the SERP has {len(serp)} results'
        )
    attract, leave = per_rank_probabilities(serp, params, policy)
    gamma = params.dbn_continuation
    is_dcm = params.model is ClickModelKind.DCM
    # forward pass over P(clicks so far, E_k = 1) and P(clicks so far, E_k = 0)
    examined, gone = 1.0, 0.0
    for a, s, clicked in zip(attract, leave, session.clicks):
        if clicked:
            w = examined * a
            go_on = (1.0 - s) if is_dcm else (1.0 - s) * gamma
            examined, gone = w * go_on, w * (1.0 - go_on)
        else:
            w = examined * (1.0 - a)
            if is_dcm:
                examined = w
            else:
                examined, gone = w * gamma, gone + w * (1.0 - gamma)
    total = examined + gone
    if total <= 0.0:
        return -math.inf
    return math.log(total)
