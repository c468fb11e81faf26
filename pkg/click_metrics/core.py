"""
Domain types for multi-aspect relevance evaluation: grades, gain mapping,
judged SERPs, ranked runs, logged sessions, and the run/judgment join
"""

import enum
import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Dict, Iterable, List, Optional, Tuple

from .errors import DomainError, EvaluationError, FormatError

if TYPE_CHECKING:
    from .judgment_store import JudgmentStore

logger = logging.getLogger(__name__)

# Label alphabet is 0..MAX_GRADE for every aspect
MAX_GRADE = 4
DEFAULT_DEPTH = 10

Grade = int


def check_grade(value: int, max_grade: int = MAX_GRADE) -> int:
    """Return value if it is a valid grade on a 0..max_grade scale"""
    if isinstance(value, bool) or not isinstance(value, int):
        raise DomainError(f'grade must be an integer, got {value!r}')
    if not 0 <= value <= max_grade:
        raise DomainError(f'grade {value} outside 0..{max_grade}')
    return value


class Aspect(enum.Enum):
    TOPICAL = 'topical'
    PERCEIVED = 'perceived'
    SNIPPET = 'snippet'


class GainKind(enum.Enum):
    EXPONENTIAL = 'exponential'
    LINEAR = 'linear'


@dataclass(frozen=True)
class GainScheme:
    """Maps a grade to a utility in [0, 1]"""
    kind: GainKind = GainKind.EXPONENTIAL
    max_grade: int = MAX_GRADE

    def __post_init__(self):
        if isinstance(self.max_grade, bool) or not isinstance(self.max_grade, int) or self.max_grade < 1:
            raise DomainError(f'max_grade must be a positive integer, got {self.max_grade!r}')

    def __call__(self, grade: int) -> float:
        return gain(grade, self)


def gain(grade: int, scheme: GainScheme) -> float:
    """exponential: (2^r - 1) / 2^max_grade, linear: r / max_grade"""
    check_grade(grade, scheme.max_grade)
    if scheme.kind is GainKind.EXPONENTIAL:
        return (2 ** grade - 1) / 2 ** scheme.max_grade
    return grade / scheme.max_grade


class ImputationPolicy(enum.Enum):
    """What consumers do with a missing label"""
    STRICT = 'strict'
    ZERO = 'zero'


def resolve_grade(grade: Optional[int], policy: ImputationPolicy, what: str = 'label') -> int:
    if grade is not None:
        return grade
    if policy is ImputationPolicy.STRICT:
        raise EvaluationError(f'missing {what}')
    return 0


@dataclass(frozen=True)
class LabelTriple:
    """Topical, perceived and snippet labels of one (query, doc); None means unjudged"""
    topical: Optional[int] = None
    perceived: Optional[int] = None
    snippet: Optional[int] = None

    def __post_init__(self):
        for value in (self.topical, self.perceived, self.snippet):
            if value is not None:
                check_grade(value)

    def get(self, aspect: Aspect) -> Optional[int]:
        return getattr(self, aspect.value)


MISSING_LABELS = LabelTriple()


@dataclass(frozen=True)
class JudgedResult:
    doc_id: str
    rank: int
    topical: Optional[int] = None
    perceived: Optional[int] = None
    snippet: Optional[int] = None

    @property
    def labels(self) -> LabelTriple:
        return LabelTriple(self.topical, self.perceived, self.snippet)


@dataclass(frozen=True)
class LabeledSerp:
    """One query's ranked results with their labels, ranks 1..N"""
    query_id: str
    results: Tuple[JudgedResult, ...]

    def __post_init__(self):
        object.__setattr__(self, 'results', tuple(self.results))
        if not self.results:
            raise DomainError(f'SERP for query {self.query_id!r} is empty')
        for expected, result in enumerate(self.results, start=1):
            if result.rank != expected:
                raise DomainError(
                    f'SERP for query {self.query_id!r}: rank {result.rank} at position {expected}'
                )

    def __len__(self) -> int:
        return len(self.results)

    def truncated(self, depth: int) -> 'LabeledSerp':
        if depth < 1:
            raise DomainError(f'depth must be >= 1, got {depth}')
        if depth >= len(self.results):
            return self
        return LabeledSerp(self.query_id, self.results[:depth])

    def doc_ids(self) -> List[str]:
        return [r.doc_id for r in self.results]

    def topical(self) -> List[Optional[int]]:
        return [r.topical for r in self.results]

    def perceived(self) -> List[Optional[int]]:
        return [r.perceived for r in self.results]

    def snippet(self) -> List[Optional[int]]:
        return [r.snippet for r in self.results]

    def grades(self, aspect: Aspect, policy: ImputationPolicy) -> List[int]:
        """Per-rank grades of one aspect with the imputation policy applied"""
        grades = []
        for result in self.results:
            what = f'{aspect.value} label for query {self.query_id!r}, doc {result.doc_id!r}'
            grades.append(resolve_grade(getattr(result, aspect.value), policy, what))
        return grades


@dataclass(frozen=True)
class RunEntry:
    query_id: str
    doc_id: str
    rank: int
    score: float
    run_tag: str


@dataclass(frozen=True)
class RankedRun:
    """A system's ranked output, possibly for many queries"""
    run_tag: str
    entries: Tuple[RunEntry, ...]

    def __post_init__(self):
        object.__setattr__(self, 'entries', tuple(self.entries))
        seen = set()
        for entry in self.entries:
            key = (entry.query_id, entry.rank)
            if key in seen:
                raise FormatError(f'duplicate rank {entry.rank} for query {entry.query_id!r}')
            seen.add(key)

    def queries(self) -> List[str]:
        return sorted({e.query_id for e in self.entries})

    def for_query(self, query_id: str) -> List[RunEntry]:
        return sorted((e for e in self.entries if e.query_id == query_id), key=lambda e: e.rank)


@dataclass(frozen=True)
class Session:
    """One logged impression: a query, the docs shown and the click flags per rank"""
    session_id: str
    query_id: str
    docs: Tuple[str, ...]
    clicks: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, 'docs', tuple(self.docs))
        object.__setattr__(self, 'clicks', tuple(self.clicks))
        if len(self.docs) != len(self.clicks):
            raise FormatError(
                f'session {self.session_id!r}: {len(self.docs)} docs but {len(self.clicks)} click flags'
            )
        if not self.docs:
            raise FormatError(f'session {self.session_id!r} shows no documents')
        for flag in self.clicks:
            if flag not in (0, 1) or isinstance(flag, float):
                raise FormatError(f'session {self.session_id!r}: click flag {flag!r} is not 0/1')

    def __len__(self) -> int:
        return len(self.docs)

    def clicked_ranks(self) -> List[int]:
        """1-based ranks of the clicked documents"""
        return [k for k, flag in enumerate(self.clicks, start=1) if flag]

    def last_click_rank(self) -> Optional[int]:
        ranks = self.clicked_ranks()
        return ranks[-1] if ranks else None


def join(run: RankedRun, judgments: 'JudgmentStore', depth: int = DEFAULT_DEPTH) -> Dict[str, LabeledSerp]:
    """Attach judgments to a run, one SERP per query truncated to depth.

    Unjudged documents keep missing labels; imputation is left to consumers.
    """
    if depth < 1:
        raise DomainError(f'depth must be >= 1, got {depth}')
    serps = {}
    renumbered = 0
    for query_id in run.queries():
        entries = run.for_query(query_id)
        ranks = [e.rank for e in entries]
        if len(set(ranks)) != len(ranks):
            raise FormatError(f'duplicate rank for query {query_id!r}')
        scores = [e.score for e in entries]
        if ranks != list(range(1, len(ranks) + 1)) or any(a < b for a, b in zip(scores, scores[1:])):
            renumbered += 1
        results = []
        for new_rank, entry in enumerate(entries[:depth], start=1):
            labels = judgments.get(query_id, entry.doc_id) or MISSING_LABELS
            results.append(JudgedResult(entry.doc_id, new_rank, labels.topical, labels.perceived, labels.snippet))
        serps[query_id] = LabeledSerp(query_id, tuple(results))
    if renumbered:
        logger.warning('Run %s: %d of %d queries have rank gaps or scores out of rank order; '
                       'ranks renumbered from 1 in rank-field order', run.run_tag, renumbered, len(serps))
    return serps


def serp_from_labels(query_id: str, labels: Iterable[Tuple[Optional[int], Optional[int], Optional[int]]],
                     doc_prefix: str = 'd') -> LabeledSerp:
    """Build a SERP from (topical, perceived, snippet) triples, docs named d1, d2, ..."""
    results = tuple(
        JudgedResult(f'{doc_prefix}{k}', k, topical, perceived, snippet)
        for k, (topical, perceived, snippet) in enumerate(labels, start=1)
    )
    return LabeledSerp(query_id, results)
