"""
Per-query reports, system comparison, correlation with online click metrics
and multi-rater label aggregation
"""

import enum
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import kendalltau, pearsonr

from .click_models import ClickModelParams
from .core import MAX_GRADE, Aspect, LabelTriple, RankedRun, Session, check_grade, join
from .errors import AnalysisError, InsufficientDataError
from .judgment_store import JudgmentStore
from .metrics import MetricKind, MetricSpec, evaluate_serp

logger = logging.getLogger(__name__)

MIN_CORRELATION_POINTS = 3


@dataclass(frozen=True)
class MetricReport:
    run_tag: str
    metric: MetricKind
    per_query: Mapping[str, float] = field(default_factory=dict)

    @property
    def aggregate(self) -> float:
        """Unweighted mean over queries (nan for an empty report)"""
        if not self.per_query:
            return math.nan
        return math.fsum(self.per_query.values()) / len(self.per_query)


def evaluate_run(run: RankedRun, judgments: JudgmentStore, spec: MetricSpec,
                 params: Optional[ClickModelParams] = None) -> MetricReport:
    serps = join(run, judgments, spec.depth)
    per_query = {qid: evaluate_serp(serp, spec, params) for qid, serp in serps.items()}
    report = MetricReport(run.run_tag, spec.kind, per_query)
    logger.info('Evaluated run %s with %s over %d queries: %.6f',
                run.run_tag, spec.kind.value, len(per_query), report.aggregate)
    return report


def rank_systems(reports: Sequence[MetricReport]) -> List[str]:
    """Run tags from best to worst aggregate; ties go to the smaller tag"""
    return [r.run_tag for r in sorted(reports, key=lambda r: (-r.aggregate, r.run_tag))]


def group_means(report: MetricReport, groups: Mapping[str, str]) -> Dict[str, float]:
    """Mean per-query value within each query group; ungrouped queries are skipped"""
    buckets: Dict[str, List[float]] = {}
    for query_id, value in report.per_query.items():
        group = groups.get(query_id)
        if group is not None:
            buckets.setdefault(group, []).append(value)
    return {g: math.fsum(v) / len(v) for g, v in sorted(buckets.items())}


# Online click metrics

ONLINE_METRICS = ('UCTR', 'MaxRR', 'MinRR', 'MeanRR')


@dataclass(frozen=True)
class OnlineMetrics:
    sessions: int
    uctr: float
    max_rr: Optional[float]
    min_rr: Optional[float]
    mean_rr: Optional[float]

    def get(self, name: str) -> Optional[float]:
        return {'UCTR': self.uctr, 'MaxRR': self.max_rr, 'MinRR': self.min_rr, 'MeanRR': self.mean_rr}[name]


def online_metrics(sessions: Sequence[Session]) -> Dict[str, OnlineMetrics]:
    """Per-query click metrics; RR metrics are None when no session of the query has a click"""
    by_query: Dict[str, List[Session]] = {}
    for session in sessions:
        by_query.setdefault(session.query_id, []).append(session)
    out = {}
    for query_id in sorted(by_query):
        group = by_query[query_id]
        clicked = [s.clicked_ranks() for s in group if any(s.clicks)]
        if clicked:
            max_rr = math.fsum(1.0 / ranks[0] for ranks in clicked) / len(clicked)
            min_rr = math.fsum(1.0 / ranks[-1] for ranks in clicked) / len(clicked)
            mean_rr = math.fsum(math.fsum(1.0 / r for r in ranks) / len(ranks) for ranks in clicked) / len(clicked)
        else:
            max_rr = min_rr = mean_rr = None
        out[query_id] = OnlineMetrics(len(group), len(clicked) / len(group), max_rr, min_rr, mean_rr)
    return out


# Rank correlation

def kendall_tau(ranking_a: Sequence, ranking_b: Sequence) -> float:
    """Kendall's tau-b between two orderings of the same items"""
    if len(set(ranking_a)) != len(ranking_a) or len(set(ranking_b)) != len(ranking_b):
        raise AnalysisError('rankings must not contain duplicates')
    if set(ranking_a) != set(ranking_b):
        raise AnalysisError('rankings cover different items')
    if len(ranking_a) < 2:
        raise InsufficientDataError('need at least 2 items to compare rankings')
    position_b = {item: k for k, item in enumerate(ranking_b)}
    tau, _ = kendalltau(list(range(len(ranking_a))), [position_b[item] for item in ranking_a])
    return float(tau)


def kendall_tau_scores(scores_a: Mapping[str, float], scores_b: Mapping[str, float]) -> float:
    """Tie-aware tau-b between two per-query score maps over their common queries"""
    common = sorted(set(scores_a) & set(scores_b))
    if len(common) < 2:
        raise InsufficientDataError(f'{len(common)} common queries, need at least 2')
    tau, _ = kendalltau([scores_a[q] for q in common], [scores_b[q] for q in common])
    return float(tau)


class CorrelationMethod(enum.Enum):
    PEARSON = 'pearson'
    KENDALL = 'kendall'


def _defined(value: Optional[float]) -> bool:
    return value is not None and not math.isnan(value)


def correlate(per_query_metric: Mapping[str, Optional[float]], per_query_online: Mapping[str, Optional[float]],
              method: CorrelationMethod = CorrelationMethod.PEARSON) -> float:
    """Correlation over queries where both values are defined"""
    common = sorted(q for q in set(per_query_metric) & set(per_query_online)
                    if _defined(per_query_metric[q]) and _defined(per_query_online[q]))
    if len(common) < MIN_CORRELATION_POINTS:
        raise InsufficientDataError(
            f'{len(common)} queries with both values, need at least {MIN_CORRELATION_POINTS}'
        )
    x = np.array([per_query_metric[q] for q in common], dtype=np.float64)
    y = np.array([per_query_online[q] for q in common], dtype=np.float64)
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise AnalysisError('correlation is undefined for a constant series')
    if method is CorrelationMethod.PEARSON:
        value, _ = pearsonr(x, y)
    else:
        value, _ = kendalltau(x, y)
    return float(value)


# Rater aggregation

class AggregationRule(enum.Enum):
    MAJORITY_LOW = 'majority_low'
    MEAN_ROUND = 'mean_round'


@dataclass(frozen=True)
class RaterLabelSet:
    query_id: str
    doc_id: str
    aspect: Aspect
    labels: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, 'labels', tuple(self.labels))
        if not self.labels:
            raise AnalysisError(f'no rater labels for query {self.query_id!r}, doc {self.doc_id!r}')
        for label in self.labels:
            check_grade(label)


def aggregate_raters(label_set: RaterLabelSet, rule: AggregationRule = AggregationRule.MAJORITY_LOW) -> int:
    """One grade from many raters.

    majority_low: modal grade, ties to the lower grade.
    mean_round: mean rounded to the nearest grade, halves rounded down.
    """
    labels = label_set.labels
    if not labels:
        raise AnalysisError('no labels to aggregate')
    if rule is AggregationRule.MAJORITY_LOW:
        counts = Counter(labels)
        top = max(counts.values())
        return min(g for g, n in counts.items() if n == top)
    quotient, remainder = divmod(sum(labels), len(labels))
    return quotient + 1 if 2 * remainder > len(labels) else quotient


@dataclass(frozen=True)
class AgreementStats:
    items: int
    exact_agreement: float     # share of items where every rater gave the same grade
    pairwise_agreement: float  # mean per-item share of agreeing rater pairs
    fleiss_kappa: float


def _category_table(label_sets: Sequence[RaterLabelSet]) -> np.ndarray:
    """items x grades matrix of rater counts"""
    table = np.zeros((len(label_sets), MAX_GRADE + 1), dtype=np.int64)
    for i, label_set in enumerate(label_sets):
        for label in label_set.labels:
            table[i, label] += 1
    return table


def fleiss_kappa(table: np.ndarray) -> float:
    """Fleiss' kappa over items with at least two ratings; raters per item may vary"""
    table = table[table.sum(axis=1) >= 2]
    if len(table) == 0:
        raise InsufficientDataError('no item has two or more ratings')
    n = table.sum(axis=1).astype(float)
    subject_agreement = ((table * table).sum(axis=1) - n) / (n * (n - 1))
    observed = float(np.mean(subject_agreement))
    proportions = table.sum(axis=0) / table.sum()
    expected = float(np.dot(proportions, proportions))
    if expected >= 1.0:
        # every rating in one category
        return 1.0
    return (observed - expected) / (1.0 - expected)


def agreement(label_sets: Sequence[RaterLabelSet]) -> AgreementStats:
    if not label_sets:
        raise InsufficientDataError('no labelled items')
    table = _category_table(label_sets)
    unanimous = sum(1 for ls in label_sets if len(set(ls.labels)) == 1)
    multi = table[table.sum(axis=1) >= 2]
    if len(multi):
        n = multi.sum(axis=1).astype(float)
        pairwise = float(np.mean(((multi * multi).sum(axis=1) - n) / (n * (n - 1))))
    else:
        pairwise = math.nan
    kappa = fleiss_kappa(table) if len(multi) else math.nan
    return AgreementStats(len(label_sets), unanimous / len(label_sets), pairwise, kappa)


def aggregate_all(label_sets: Sequence[RaterLabelSet],
                  rule: AggregationRule = AggregationRule.MAJORITY_LOW) -> Tuple[Dict[Tuple[str, str], int], AgreementStats]:
    grades = {(ls.query_id, ls.doc_id): aggregate_raters(ls, rule) for ls in label_sets}
    return dict(sorted(grades.items())), agreement(label_sets)


def judgments_from_raters(label_sets: Sequence[RaterLabelSet],
                          rule: AggregationRule = AggregationRule.MAJORITY_LOW) -> JudgmentStore:
    """Judgment store of aggregated rater grades; aspects nobody rated stay missing"""
    merged: Dict[Tuple[str, str], Dict[str, int]] = {}
    for label_set in label_sets:
        key = (label_set.query_id, label_set.doc_id)
        merged.setdefault(key, {})[label_set.aspect.value] = aggregate_raters(label_set, rule)
    store = JudgmentStore('<raters>')
    for (query_id, doc_id), aspects in sorted(merged.items()):
        store.add(query_id, doc_id, LabelTriple(
            aspects.get('topical'), aspects.get('perceived'), aspects.get('snippet'),
        ))
    return store


def pairwise_taus(reports: Sequence[MetricReport]) -> List[Tuple[str, str, float]]:
    """Kendall tau between the per-query scores of every pair of runs"""
    out = []
    for a, b in combinations(reports, 2):
        try:
            tau = kendall_tau_scores(a.per_query, b.per_query)
        except InsufficientDataError:
            tau = math.nan
        out.append((a.run_tag, b.run_tag, tau))
    return out
