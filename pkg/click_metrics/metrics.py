"""
Click-model-based utility metrics and the DCG / ERR baselines

    uMetric   = sum_k P(C_k = 1) * gain(R_k)      document utility
    uMetric_S = sum_k P(E_k = 1) * gain(S_k)      utility of the SERP itself

uDCM / uDBN plug the DCM / DBN profiles into these sums. Their closed forms
below repeat the profile recursions operation for operation, so they equal the
generic composition exactly.
"""

import enum
import math
from dataclasses import dataclass
from typing import List, Optional

from .click_models import ClickModelKind, ClickModelParams, ExaminationProfile, dbn_profile, dcm_profile
from .core import DEFAULT_DEPTH, Aspect, GainKind, GainScheme, ImputationPolicy, LabeledSerp, gain
from .errors import ConfigurationError, EvaluationError


class MetricKind(enum.Enum):
    UMETRIC = 'umetric'
    UDCM = 'udcm'
    UDCM_S = 'udcm-s'
    UDBN = 'udbn'
    UDBN_S = 'udbn-s'
    DCG = 'dcg'
    ERR = 'err'

    @property
    def needs_params(self) -> bool:
        return self not in (MetricKind.DCG, MetricKind.ERR)

    @property
    def model(self) -> Optional[ClickModelKind]:
        if self in (MetricKind.UDCM, MetricKind.UDCM_S):
            return ClickModelKind.DCM
        if self in (MetricKind.UDBN, MetricKind.UDBN_S):
            return ClickModelKind.DBN
        return None


@dataclass(frozen=True)
class MetricSpec:
    kind: MetricKind = MetricKind.UDCM
    gain_topical: GainScheme = GainScheme()
    gain_snippet: GainScheme = GainScheme()
    depth: int = DEFAULT_DEPTH
    combine_weight: Optional[float] = None
    policy: ImputationPolicy = ImputationPolicy.ZERO

    def __post_init__(self):
        if self.depth < 1:
            raise ConfigurationError(f'depth must be >= 1, got {self.depth}')
        if self.combine_weight is not None and not 0.0 <= self.combine_weight <= 1.0:
            raise ConfigurationError(f'combine_weight must lie in [0, 1], got {self.combine_weight}')


def _gains(serp: LabeledSerp, aspect: Aspect, scheme: GainScheme, policy: ImputationPolicy) -> List[float]:
    return [gain(g, scheme) for g in serp.grades(aspect, policy)]


def _check_lengths(profile: ExaminationProfile, serp: LabeledSerp):
    if len(profile) != len(serp):
        raise EvaluationError(f'profile covers {len(profile)} ranks but SERP {serp.query_id!r} has {len(serp)}')


def u_metric(profile: ExaminationProfile, serp: LabeledSerp, spec: MetricSpec) -> float:
    """sum_k click[k] * gain(topical_k)"""
    _check_lengths(profile, serp)
    gains = _gains(serp, Aspect.TOPICAL, spec.gain_topical, spec.policy)
    return math.fsum(float(c) * g for c, g in zip(profile.click, gains))


def u_metric_s(profile: ExaminationProfile, serp: LabeledSerp, spec: MetricSpec) -> float:
    """sum_k exam[k] * gain(snippet_k)"""
    _check_lengths(profile, serp)
    gains = _gains(serp, Aspect.SNIPPET, spec.gain_snippet, spec.policy)
    return math.fsum(float(e) * g for e, g in zip(profile.exam, gains))


def _require(params: ClickModelParams, model: ClickModelKind):
    if params.model is not model:
        raise ConfigurationError(f'metric needs {model.value} parameters, got {params.model.value}')


def _dcm_inputs(serp: LabeledSerp, params: ClickModelParams, spec: MetricSpec):
    _require(params, ClickModelKind.DCM)
    serp = serp.truncated(spec.depth)
    if len(serp) > len(params.dcm_stop):
        raise ConfigurationError(f'dcm_stop covers {len(params.dcm_stop)} ranks, SERP has {len(serp)}')
    attract = [params.attractiveness_of(g) for g in serp.grades(Aspect.PERCEIVED, spec.policy)]
    return serp, attract


def u_dcm(serp: LabeledSerp, params: ClickModelParams, spec: MetricSpec) -> float:
    """sum_k a(A_k) * prod_{i<k} (1 - a(A_i) s_i) * gain(R_k)"""
    serp, attract = _dcm_inputs(serp, params, spec)
    gains = _gains(serp, Aspect.TOPICAL, spec.gain_topical, spec.policy)
    terms = []
    examined = 1.0
    for a, s, g in zip(attract, params.dcm_stop, gains):
        terms.append(a * examined * g)
        examined = examined * (1.0 - a * s)
    return math.fsum(terms)


def u_dcm_s(serp: LabeledSerp, params: ClickModelParams, spec: MetricSpec) -> float:
    """sum_k prod_{i<k} (1 - a(A_i) s_i) * gain(S_k)"""
    serp, attract = _dcm_inputs(serp, params, spec)
    gains = _gains(serp, Aspect.SNIPPET, spec.gain_snippet, spec.policy)
    terms = []
    examined = 1.0
    for a, s, g in zip(attract, params.dcm_stop, gains):
        terms.append(examined * g)
        examined = examined * (1.0 - a * s)
    return math.fsum(terms)


def _dbn_inputs(serp: LabeledSerp, params: ClickModelParams, spec: MetricSpec):
    _require(params, ClickModelKind.DBN)
    serp = serp.truncated(spec.depth)
    attract = [params.attractiveness_of(g) for g in serp.grades(Aspect.PERCEIVED, spec.policy)]
    sat = [params.satisfaction_of(g) for g in serp.grades(Aspect.TOPICAL, spec.policy)]
    return serp, attract, sat


def u_dbn(serp: LabeledSerp, params: ClickModelParams, spec: MetricSpec) -> float:
    serp, attract, sat = _dbn_inputs(serp, params, spec)
    gains = _gains(serp, Aspect.TOPICAL, spec.gain_topical, spec.policy)
    gamma = params.dbn_continuation
    terms = []
    examined = 1.0
    for a, s, g in zip(attract, sat, gains):
        terms.append(a * examined * g)
        examined = examined * gamma * (1.0 - a * s)
    return math.fsum(terms)


def u_dbn_s(serp: LabeledSerp, params: ClickModelParams, spec: MetricSpec) -> float:
    serp, attract, sat = _dbn_inputs(serp, params, spec)
    gains = _gains(serp, Aspect.SNIPPET, spec.gain_snippet, spec.policy)
    gamma = params.dbn_continuation
    terms = []
    examined = 1.0
    for a, s, g in zip(attract, sat, gains):
        terms.append(examined * g)
        examined = examined * gamma * (1.0 - a * s)
    return math.fsum(terms)


def dcg(serp: LabeledSerp, spec: MetricSpec) -> float:
    """sum_i (2^r_i - 1) / log2(i + 1) over raw topical grades"""
    serp = serp.truncated(spec.depth)
    grades = serp.grades(Aspect.TOPICAL, spec.policy)
    return math.fsum((2 ** r - 1) / math.log2(i + 1) for i, r in enumerate(grades, start=1))


def err(serp: LabeledSerp, spec: MetricSpec) -> float:
    """Expected reciprocal rank with exponential gain as the stopping probability"""
    serp = serp.truncated(spec.depth)
    scheme = GainScheme(GainKind.EXPONENTIAL, spec.gain_topical.max_grade)
    terms = []
    not_stopped = 1.0
    for k, r in enumerate(serp.grades(Aspect.TOPICAL, spec.policy), start=1):
        g = gain(r, scheme)
        terms.append(not_stopped * g / k)
        not_stopped *= 1.0 - g
    return math.fsum(terms)


def _combined(document: float, snippet: float, weight: float) -> float:
    return weight * document + (1.0 - weight) * snippet


def evaluate_serp(serp: LabeledSerp, spec: MetricSpec, params: Optional[ClickModelParams] = None,
                  profile: Optional[ExaminationProfile] = None) -> float:
    """Value of the metric spec.kind on one SERP.

    With combine_weight set, the uDCM / uDBN kinds (document or snippet
    variant alike) report w * document utility + (1 - w) * snippet utility.
    UMETRIC takes a precomputed profile, or builds one from params.
    """
    kind = spec.kind
    if kind is MetricKind.DCG:
        return dcg(serp, spec)
    if kind is MetricKind.ERR:
        return err(serp, spec)
    if kind is MetricKind.UMETRIC:
        serp = serp.truncated(spec.depth)
        if profile is None:
            if params is None:
                raise ConfigurationError('umetric needs a profile or click model parameters')
            build = dcm_profile if params.model is ClickModelKind.DCM else dbn_profile
            profile = build(serp, params, spec.policy)
        if spec.combine_weight is not None:
            return _combined(u_metric(profile, serp, spec), u_metric_s(profile, serp, spec), spec.combine_weight)
        return u_metric(profile, serp, spec)
    if params is None:
        raise ConfigurationError(f'{kind.value} needs click model parameters')
    if kind.model is ClickModelKind.DCM:
        document, snippet = u_dcm, u_dcm_s
    else:
        document, snippet = u_dbn, u_dbn_s
    if spec.combine_weight is not None:
        return _combined(document(serp, params, spec), snippet(serp, params, spec), spec.combine_weight)
    if kind in (MetricKind.UDCM, MetricKind.UDBN):
        return document(serp, params, spec)
    return snippet(serp, params, spec)
