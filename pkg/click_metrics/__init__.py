# Click metrics package
# Click-model-based evaluation over topical, perceived and snippet labels

from .errors import (
    ClickMetricsError,
    DomainError,
    FormatError,
    EvaluationError,
    ConfigurationError,
    EstimationError,
    AnalysisError,
    InsufficientDataError,
    SizeError,
    UsageError,
)

from .core import (
    MAX_GRADE,
    DEFAULT_DEPTH,
    Aspect,
    GainKind,
    GainScheme,
    gain,
    ImputationPolicy,
    LabelTriple,
    JudgedResult,
    LabeledSerp,
    RunEntry,
    RankedRun,
    Session,
    join,
    serp_from_labels,
)

from .judgment_store import JudgmentStore

from .click_models import (
    ClickModelKind,
    ClickModelParams,
    ExaminationProfile,
    TraceDistribution,
    dcm_profile,
    dbn_profile,
    profile,
    enumerate_traces,
    session_log_likelihood,
)

from .estimation import (
    FitConfig,
    FitResult,
    fit,
    fit_dcm,
    fit_dbn,
    train_dcm,
    train_dbn,
    log_likelihood,
    mean_log_likelihood,
)

from .metrics import (
    MetricKind,
    MetricSpec,
    u_metric,
    u_metric_s,
    u_dcm,
    u_dcm_s,
    u_dbn,
    u_dbn_s,
    dcg,
    err,
    evaluate_serp,
)

from .analysis import (
    MetricReport,
    evaluate_run,
    rank_systems,
    group_means,
    OnlineMetrics,
    online_metrics,
    kendall_tau,
    kendall_tau_scores,
    pairwise_taus,
    CorrelationMethod,
    correlate,
    AggregationRule,
    RaterLabelSet,
    AgreementStats,
    aggregate_raters,
    aggregate_all,
    agreement,
    fleiss_kappa,
    judgments_from_raters,
)

from .simulate import SimConfig, simulate_sessions

from .formats import (
    format_number,
    parse_judgments,
    parse_run,
    write_run,
    parse_clicks,
    write_clicks,
    read_params,
    write_params,
    parse_rater_labels,
)

__all__ = [
    # Errors
    'ClickMetricsError', 'DomainError', 'FormatError', 'EvaluationError', 'ConfigurationError',
    'EstimationError', 'AnalysisError', 'InsufficientDataError', 'SizeError', 'UsageError',
    # Core
    'MAX_GRADE', 'DEFAULT_DEPTH', 'Aspect', 'GainKind', 'GainScheme', 'gain', 'ImputationPolicy',
    'LabelTriple', 'JudgedResult', 'LabeledSerp', 'RunEntry', 'RankedRun', 'Session', 'join',
    'serp_from_labels', 'JudgmentStore',
    # Click models
    'ClickModelKind', 'ClickModelParams', 'ExaminationProfile', 'TraceDistribution', 'dcm_profile',
    'dbn_profile', 'profile', 'enumerate_traces', 'session_log_likelihood',
    # Estimation
    'FitConfig', 'FitResult', 'fit', 'fit_dcm', 'fit_dbn', 'train_dcm', 'train_dbn',
    'log_likelihood', 'mean_log_likelihood',
    # Metrics
    'MetricKind', 'MetricSpec', 'u_metric', 'u_metric_s', 'u_dcm', 'u_dcm_s', 'u_dbn', 'u_dbn_s',
    'dcg', 'err', 'evaluate_serp',
    # Analysis
    'MetricReport', 'evaluate_run', 'rank_systems', 'group_means', 'OnlineMetrics', 'online_metrics',
    'kendall_tau', 'kendall_tau_scores', 'pairwise_taus', 'CorrelationMethod', 'correlate',
    'AggregationRule', 'RaterLabelSet', 'AgreementStats', 'aggregate_raters', 'aggregate_all',
    'agreement', 'fleiss_kappa', 'judgments_from_raters',
    # Simulation
    'SimConfig', 'simulate_sessions',
    # Files
    'format_number', 'parse_judgments', 'parse_run', 'write_run', 'parse_clicks', 'write_clicks',
    'read_params', 'write_params', 'parse_rater_labels',
]
