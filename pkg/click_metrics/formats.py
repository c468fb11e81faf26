"""
File formats: extended judgments TSV, TREC-style runs, JSON-lines click logs,
click model parameter JSON, rater label TSV, and number formatting for reports
"""

import json
import logging
from decimal import ROUND_HALF_EVEN, Decimal
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from .click_models import ClickModelKind, ClickModelParams
from .core import Aspect, GainKind, GainScheme, LabelTriple, RankedRun, RunEntry, Session, check_grade
from .errors import ClickMetricsError, DomainError, FormatError
from .judgment_store import JudgmentStore

logger = logging.getLogger(__name__)

MISSING_MARK = '-'
DECIMALS = 6
_QUANTUM = Decimal(1).scaleb(-DECIMALS)


def format_number(value: Optional[float]) -> str:
    """Fixed 6 decimals, round-half-even on the shortest decimal form; 'nan' / 'NA' otherwise"""
    if value is None:
        return 'NA'
    if value != value:
        return 'nan'
    if value in (float('inf'), float('-inf')):
        return 'inf' if value > 0 else '-inf'
    text = str(Decimal(repr(float(value))).quantize(_QUANTUM, rounding=ROUND_HALF_EVEN))
    return '0.000000' if text == '-0.000000' else text


def _lines(path: str) -> Iterator[Tuple[int, str]]:
    """(1-based line number, stripped line) for non-blank, non-comment lines"""
    with open(path, 'rb') as f:
        for number, raw in enumerate(f, start=1):
            try:
                line = raw.decode('utf-8').rstrip('\r\n')
            except UnicodeDecodeError:
                raise FormatError('invalid UTF-8', number, path)
            if not line.strip() or line.lstrip().startswith('#'):
                continue
            yield number, line


def _label(field: str, what: str, number: int, path: str) -> Optional[int]:
    if field == MISSING_MARK:
        return None
    try:
        return check_grade(int(field))
    except (ValueError, DomainError):
        raise FormatError(f'bad {what} label {field!r} (expected 0-4 or {MISSING_MARK})', number, path)


def parse_judgments(path: str) -> JudgmentStore:
    """qid<TAB>docid<TAB>topical<TAB>perceived<TAB>snippet"""
    store = JudgmentStore(path)
    for number, line in _lines(path):
        fields = line.split('\t')
        if len(fields) != 5:
            raise FormatError(f'expected 5 tab-separated fields, got {len(fields)}', number, path)
        query_id, doc_id = fields[0].strip(), fields[1].strip()
        if not query_id or not doc_id:
            raise FormatError('empty query or document id', number, path)
        labels = LabelTriple(
            _label(fields[2].strip(), 'topical', number, path),
            _label(fields[3].strip(), 'perceived', number, path),
            _label(fields[4].strip(), 'snippet', number, path),
        )
        store.add(query_id, doc_id, labels)
    logger.info('Loaded %d judgments from %s (%d duplicate rows)', len(store), path, store.duplicates)
    return store


def parse_run(path: str) -> RankedRun:
    """qid Q0 docid rank score tag, whitespace separated, one run tag per file"""
    entries: List[RunEntry] = []
    seen = set()
    run_tag = None
    for number, line in _lines(path):
        fields = line.split()
        if len(fields) != 6:
            raise FormatError(f'expected 6 whitespace-separated fields, got {len(fields)}', number, path)
        query_id, _, doc_id, rank_text, score_text, tag = fields
        try:
            rank = int(rank_text)
            score = float(score_text)
        except ValueError:
            raise FormatError(f'bad rank {rank_text!r} or score {score_text!r}', number, path)
        if rank < 1:
            raise FormatError(f'rank must be >= 1, got {rank}', number, path)
        if run_tag is None:
            run_tag = tag
        elif tag != run_tag:
            raise FormatError(f'run tag {tag!r} differs from {run_tag!r}', number, path)
        if (query_id, rank) in seen:
            raise FormatError(f'duplicate rank {rank} for query {query_id!r}', number, path)
        seen.add((query_id, rank))
        entries.append(RunEntry(query_id, doc_id, rank, score, tag))
    if run_tag is None:
        raise FormatError('run file has no entries', path=path)
    logger.info('Loaded run %s from %s: %d entries', run_tag, path, len(entries))
    return RankedRun(run_tag, tuple(entries))


def write_run(path: str, run: RankedRun):
    with open(path, 'w', encoding='utf-8') as f:
        for entry in sorted(run.entries, key=lambda e: (e.query_id, e.rank)):
            f.write(f'{entry.query_id} Q0 {entry.doc_id} {entry.rank} {entry.score!r} {entry.run_tag}\n')


def _session_from_json(record, number: int, path: str) -> Session:
    if not isinstance(record, dict):
        raise FormatError('click line must be a JSON object', number, path)
    for key in ('session_id', 'qid', 'docs', 'clicks'):
        if key not in record:
            raise FormatError(f'missing key {key!r}', number, path)
    session_id, query_id, docs, clicks = record['session_id'], record['qid'], record['docs'], record['clicks']
    if not isinstance(session_id, str) or not isinstance(query_id, str):
        raise FormatError('session_id and qid must be strings', number, path)
    if not isinstance(docs, list) or not all(isinstance(d, str) for d in docs):
        raise FormatError('docs must be an array of strings', number, path)
    if not isinstance(clicks, list) or not all(c in (0, 1) and not isinstance(c, (bool, float)) for c in clicks):
        raise FormatError('clicks must be an array of 0/1', number, path)
    if len(docs) != len(clicks):
        raise FormatError(f'{len(docs)} docs but {len(clicks)} click flags', number, path)
    try:
        return Session(session_id, query_id, tuple(docs), tuple(clicks))
    except FormatError as e:
        raise FormatError(str(e), number, path)


def parse_clicks(path: str) -> List[Session]:
    """One JSON object per line: session_id, qid, docs, clicks"""
    sessions = []
    for number, line in _lines(path):
        try:
            record = json.loads(line)
        except json.JSONDecodeError as e:
            raise FormatError(f'invalid JSON ({e.msg})', number, path)
        sessions.append(_session_from_json(record, number, path))
    logger.info('Loaded %d sessions from %s', len(sessions), path)
    return sessions


def session_to_json(session: Session) -> str:
    return json.dumps({
        'session_id': session.session_id,
        'qid': session.query_id,
        'docs': list(session.docs),
        'clicks': list(session.clicks),
    })


def write_clicks(path: str, sessions: Sequence[Session]):
    with open(path, 'w', encoding='utf-8') as f:
        for session in sessions:
            f.write(session_to_json(session) + '\n')
    logger.info('Wrote %d sessions to %s', len(sessions), path)


def params_to_dict(params: ClickModelParams) -> Dict:
    out = {
        'model': params.model.value,
        'attractiveness': {str(g): p for g, p in params.attractiveness.items()},
    }
    if params.model is ClickModelKind.DCM:
        out['dcm_stop'] = list(params.dcm_stop)
    else:
        out['dbn_satisfaction'] = {str(g): p for g, p in params.dbn_satisfaction.items()}
        out['dbn_continuation'] = params.dbn_continuation
    out['gain'] = {'kind': params.gain.kind.value, 'max_grade': params.gain.max_grade}
    return out


def params_from_dict(data, path: Optional[str] = None) -> ClickModelParams:
    if not isinstance(data, dict):
        raise FormatError('parameter file must hold a JSON object', path=path)
    try:
        model = ClickModelKind(data.get('model'))
    except ValueError:
        raise FormatError(f'unknown model {data.get("model")!r} (expected "dcm" or "dbn")', path=path)
    gain_data = data.get('gain', {})
    try:
        gain = GainScheme(GainKind(gain_data.get('kind', GainKind.EXPONENTIAL.value)),
                          gain_data.get('max_grade', GainScheme().max_grade))
    except (ValueError, AttributeError) as e:
        raise FormatError(f'bad gain section ({e})', path=path)
    try:
        if not isinstance(data.get('attractiveness'), dict):
            raise FormatError('attractiveness must be an object', path=path)
        if model is ClickModelKind.DCM:
            if not isinstance(data.get('dcm_stop'), list):
                raise FormatError('dcm parameters need a dcm_stop array', path=path)
            return ClickModelParams.dcm(data['attractiveness'], data['dcm_stop'], gain=gain)
        if not isinstance(data.get('dbn_satisfaction'), dict) or 'dbn_continuation' not in data:
            raise FormatError('dbn parameters need dbn_satisfaction and dbn_continuation', path=path)
        return ClickModelParams.dbn(data['attractiveness'], data['dbn_satisfaction'],
                                    data['dbn_continuation'], gain=gain)
    except FormatError:
        raise
    except ClickMetricsError as e:
        raise FormatError(str(e), path=path)


def read_params(path: str) -> ClickModelParams:
    with open(path, 'rb') as f:
        raw = f.read()
    try:
        text = raw.decode('utf-8')
    except UnicodeDecodeError as e:
        raise FormatError('invalid UTF-8', raw.count(b'\n', 0, e.start) + 1, path)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(f'invalid JSON ({e.msg})', e.lineno, path)
    params = params_from_dict(data, path)
    logger.info('Loaded %s parameters from %s', params.model.value, path)
    return params


def write_params(path: str, params: ClickModelParams):
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(params_to_dict(params), f, indent=2)
        f.write('\n')
    logger.info('Wrote %s parameters to %s', params.model.value, path)


def parse_rater_labels(path: str, aspect: Optional[Aspect] = None) -> List['RaterLabelSet']:
    """qid<TAB>docid<TAB>aspect<TAB>grade[<TAB>grade...], optionally keeping one aspect"""
    from .analysis import RaterLabelSet

    label_sets = []
    for number, line in _lines(path):
        fields = line.split('\t')
        if len(fields) < 4:
            raise FormatError(f'expected qid, docid, aspect and at least one grade, got {len(fields)} fields',
                              number, path)
        try:
            row_aspect = Aspect(fields[2].strip())
        except ValueError:
            raise FormatError(f'unknown aspect {fields[2]!r}', number, path)
        grades = []
        for field in fields[3:]:
            grade = _label(field.strip(), row_aspect.value, number, path)
            if grade is None:
                raise FormatError('rater grades cannot be missing', number, path)
            grades.append(grade)
        if aspect is None or row_aspect is aspect:
            label_sets.append(RaterLabelSet(fields[0].strip(), fields[1].strip(), row_aspect, tuple(grades)))
    logger.info('Loaded %d rater label sets from %s', len(label_sets), path)
    return label_sets
