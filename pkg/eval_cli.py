#!/usr/bin/env python3

"""
Command-line front end for click-model-based evaluation
Fits click models, evaluates and compares runs, simulates click logs,
correlates offline metrics with online click metrics and checks rater agreement.
Reports go to standard output as TSV, logs to standard error (or --log-file).
"""

import argparse
import logging
import sys
from typing import List, Optional

from click_metrics import (
    DEFAULT_DEPTH,
    AggregationRule,
    Aspect,
    ClickMetricsError,
    ClickModelKind,
    CorrelationMethod,
    FitConfig,
    GainKind,
    GainScheme,
    ImputationPolicy,
    MetricKind,
    MetricSpec,
    SimConfig,
    UsageError,
    AnalysisError,
    aggregate_all,
    correlate,
    evaluate_run,
    fit,
    format_number,
    join,
    online_metrics,
    pairwise_taus,
    parse_clicks,
    parse_judgments,
    parse_rater_labels,
    parse_run,
    rank_systems,
    read_params,
    simulate_sessions,
    write_clicks,
    write_params,
)
from click_metrics.analysis import ONLINE_METRICS
from click_metrics.estimation import DEFAULT_MAX_ITERS, DEFAULT_SMOOTHING, DEFAULT_TOL

logger = logging.getLogger('eval_cli')

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2

GAIN_CHOICES = {'exp': GainKind.EXPONENTIAL, 'exponential': GainKind.EXPONENTIAL, 'linear': GainKind.LINEAR}
METRIC_CHOICES = [k.value for k in MetricKind if k is not MetricKind.UMETRIC]

LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'


class CliArgumentParser(argparse.ArgumentParser):
    """ArgumentParser that raises UsageError instead of exiting"""

    def error(self, message):
        raise UsageError(f'{self.prog}: {message}')


def _add_common_options(parser: argparse.ArgumentParser, metric: bool = True):
    if metric:
        parser.add_argument('--metric', help='Metric to compute', choices=METRIC_CHOICES, required=True)
        parser.add_argument('--params', help='Click model parameter JSON (needed by u* metrics)', default=None)
        parser.add_argument('--combine-weight', help='Report w * document + (1 - w) * snippet utility',
                            type=float, default=None)
    parser.add_argument('--judgments', help='Extended judgments TSV', required=True)
    parser.add_argument('--depth', help='Evaluation / fitting depth', type=int, default=DEFAULT_DEPTH)
    parser.add_argument('--gain', help='Gain mapping (default: from the params file, else exp)',
                        choices=sorted(GAIN_CHOICES), default=None)
    parser.add_argument('--missing', help='Missing label handling',
                        choices=[policy.value for policy in ImputationPolicy], default=ImputationPolicy.ZERO.value)


def build_arg_parser() -> CliArgumentParser:
    parser = CliArgumentParser(
        prog='eval_cli',
        description='Click-model-based offline evaluation over topical, perceived and snippet labels'
    )
    parser.add_argument('-l', '--log-file', help='Log file path (default: standard error)', default=None)
    parser.add_argument('--debug', help='Enable debug logging', action='store_true')
    commands = parser.add_subparsers(dest='command', metavar='command', parser_class=CliArgumentParser)
    commands.required = True

    p = commands.add_parser('fit', help='Fit click model parameters from a click log')
    p.add_argument('--model', help='Click model', choices=[m.value for m in ClickModelKind], required=True)
    p.add_argument('--clicks', help='Click log (JSON lines)', required=True)
    p.add_argument('--out', help='Output parameter JSON', required=True)
    p.add_argument('--max-iters', help='EM iteration cap', type=int, default=DEFAULT_MAX_ITERS)
    p.add_argument('--tol', help='EM convergence tolerance', type=float, default=DEFAULT_TOL)
    p.add_argument('--smoothing', help='Beta pseudo-count', type=float, default=DEFAULT_SMOOTHING)
    p.add_argument('--seed', help='EM initialisation seed', type=int, default=0)
    _add_common_options(p, metric=False)

    p = commands.add_parser('evaluate', help='Evaluate one run')
    p.add_argument('--run', help='Run file', required=True)
    p.add_argument('--per-query', help='Also print per-query values', action='store_true')
    _add_common_options(p)

    p = commands.add_parser('compare', help='Rank several runs and compare their per-query scores')
    p.add_argument('--runs', help='Run files', nargs='+', required=True)
    _add_common_options(p)

    p = commands.add_parser('simulate', help='Simulate a click log for a run')
    p.add_argument('--model', help='Click model', choices=[m.value for m in ClickModelKind], required=True)
    p.add_argument('--params', help='Click model parameter JSON', required=True)
    p.add_argument('--run', help='Run file', required=True)
    p.add_argument('--sessions', help='Sessions per query', type=int, required=True)
    p.add_argument('--seed', help='Random seed', type=int, default=0)
    p.add_argument('--out', help='Output click log (JSON lines)', required=True)
    p.add_argument('--judgments', help='Extended judgments TSV', required=True)
    p.add_argument('--depth', help='Results shown per query', type=int, default=DEFAULT_DEPTH)
    p.add_argument('--missing', help='Missing label handling',
                   choices=[policy.value for policy in ImputationPolicy], default=ImputationPolicy.ZERO.value)

    p = commands.add_parser('correlate', help='Correlate a metric with online click metrics')
    p.add_argument('--run', help='Run file', required=True)
    p.add_argument('--clicks', help='Click log (JSON lines)', required=True)
    p.add_argument('--method', help='Correlation', choices=[m.value for m in CorrelationMethod],
                   default=CorrelationMethod.PEARSON.value)
    _add_common_options(p)

    p = commands.add_parser('agreement', help='Aggregate rater labels and report agreement')
    p.add_argument('--labels', help='Rater labels TSV', required=True)
    p.add_argument('--aspect', help='Label aspect', choices=[a.value for a in Aspect], required=True)
    p.add_argument('--rule', help='Aggregation rule', choices=[r.value for r in AggregationRule],
                   default=AggregationRule.MAJORITY_LOW.value)

    return parser


def setup_logging(debug: bool, log_file: Optional[str]):
    level = logging.DEBUG if debug else logging.INFO
    if log_file:
        logging.basicConfig(level=level, format=LOG_FORMAT, filename=log_file, force=True)
    else:
        logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr, force=True)


def emit(*fields):
    print('\t'.join(format_number(f) if isinstance(f, float) or f is None else str(f) for f in fields))


def _gain_scheme(args, params=None) -> GainScheme:
    if args.gain is not None:
        return GainScheme(GAIN_CHOICES[args.gain])
    if params is not None:
        return params.gain
    return GainScheme()


def _metric_setup(args):
    """(MetricSpec, params) for evaluate / compare / correlate"""
    kind = MetricKind(args.metric)
    params = None
    if kind.needs_params:
        if args.params is None:
            raise UsageError(f'metric {kind.value} needs --params')
        params = read_params(args.params)
        if params.model is not kind.model:
            raise UsageError(f'metric {kind.value} needs {kind.model.value} parameters, '
                             f'{args.params} holds {params.model.value}')
    if args.depth < 1:
        raise UsageError(f'--depth must be >= 1, got {args.depth}')
    if args.combine_weight is not None and not kind.needs_params:
        raise UsageError(f'--combine-weight does not apply to {kind.value}')
    scheme = _gain_scheme(args, params)
    spec = MetricSpec(
        kind=kind,
        gain_topical=scheme,
        gain_snippet=scheme,
        depth=args.depth,
        combine_weight=args.combine_weight,
        policy=ImputationPolicy(args.missing),
    )
    return spec, params


def cmd_fit(args) -> int:
    judgments = parse_judgments(args.judgments)
    sessions = parse_clicks(args.clicks)
    config = FitConfig(
        max_iters=args.max_iters,
        tol=args.tol,
        smoothing=args.smoothing,
        seed=args.seed,
        depth=args.depth,
        policy=ImputationPolicy(args.missing),
        gain=_gain_scheme(args),
    )
    result = fit(ClickModelKind(args.model), sessions, judgments, config)
    write_params(args.out, result.params)
    params = result.params
    emit('fit', params.model.value, len(sessions), result.iterations,
         'converged' if result.converged else 'capped', result.log_likelihoods[-1])
    for grade, value in params.attractiveness.items():
        emit('param', 'attractiveness', grade, value)
    for rank, value in enumerate(params.dcm_stop, start=1):
        emit('param', 'dcm_stop', rank, value)
    for grade, value in params.dbn_satisfaction.items():
        emit('param', 'dbn_satisfaction', grade, value)
    if params.dbn_continuation is not None:
        emit('param', 'dbn_continuation', '-', params.dbn_continuation)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    spec, params = _metric_setup(args)
    judgments = parse_judgments(args.judgments)
    report = evaluate_run(parse_run(args.run), judgments, spec, params)
    if args.per_query:
        for query_id in sorted(report.per_query):
            emit('query', report.run_tag, spec.kind.value, query_id, report.per_query[query_id])
    emit('all', report.run_tag, spec.kind.value, report.aggregate)
    return EXIT_OK


def cmd_compare(args) -> int:
    spec, params = _metric_setup(args)
    judgments = parse_judgments(args.judgments)
    reports = [evaluate_run(parse_run(path), judgments, spec, params) for path in args.runs]
    tags = [r.run_tag for r in reports]
    if len(set(tags)) != len(tags):
        raise UsageError(f'run tags must differ, got {", ".join(tags)}')
    by_tag = {r.run_tag: r for r in reports}
    for position, tag in enumerate(rank_systems(reports), start=1):
        emit('system', position, tag, spec.kind.value, by_tag[tag].aggregate)
    for tag_a, tag_b, tau in pairwise_taus(reports):
        emit('tau', tag_a, tag_b, tau)
    return EXIT_OK


def cmd_simulate(args) -> int:
    params = read_params(args.params)
    if params.model is not ClickModelKind(args.model):
        raise UsageError(f'--model {args.model} does not match {args.params} ({params.model.value})')
    if args.sessions < 1:
        raise UsageError(f'--sessions must be >= 1, got {args.sessions}')
    if args.depth < 1:
        raise UsageError(f'--depth must be >= 1, got {args.depth}')
    judgments = parse_judgments(args.judgments)
    serps = join(parse_run(args.run), judgments, args.depth)
    config = SimConfig(params, args.sessions, args.seed, ImputationPolicy(args.missing))
    sessions = simulate_sessions([serps[q] for q in sorted(serps)], config)
    write_clicks(args.out, sessions)
    emit('simulate', params.model.value, len(serps), len(sessions), args.seed)
    return EXIT_OK


def cmd_correlate(args) -> int:
    spec, params = _metric_setup(args)
    judgments = parse_judgments(args.judgments)
    report = evaluate_run(parse_run(args.run), judgments, spec, params)
    online = online_metrics(parse_clicks(args.clicks))
    method = CorrelationMethod(args.method)
    for name in ONLINE_METRICS:
        per_query_online = {q: m.get(name) for q, m in online.items()}
        try:
            value = correlate(report.per_query, per_query_online, method)
        except AnalysisError as e:
            logger.warning('No %s correlation with %s: %s', method.value, name, e)
            value = float('nan')
        emit('correlation', report.run_tag, spec.kind.value, name, method.value, value)
    return EXIT_OK


def cmd_agreement(args) -> int:
    aspect = Aspect(args.aspect)
    label_sets = parse_rater_labels(args.labels, aspect)
    grades, stats = aggregate_all(label_sets, AggregationRule(args.rule))
    for (query_id, doc_id), grade in grades.items():
        emit('grade', query_id, doc_id, aspect.value, grade)
    emit('agreement', 'items', stats.items)
    emit('agreement', 'exact', stats.exact_agreement)
    emit('agreement', 'pairwise', stats.pairwise_agreement)
    emit('agreement', 'fleiss_kappa', stats.fleiss_kappa)
    return EXIT_OK


COMMANDS = {
    'fit': cmd_fit,
    'evaluate': cmd_evaluate,
    'compare': cmd_compare,
    'simulate': cmd_simulate,
    'correlate': cmd_correlate,
    'agreement': cmd_agreement,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point; returns the process exit code"""
    parser = build_arg_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(e, file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:
        # --help
        return e.code or EXIT_OK

    setup_logging(args.debug, args.log_file)
    try:
        return COMMANDS[args.command](args)
    except UsageError as e:
        logger.error('%s', e)
        return EXIT_USAGE
    except (ClickMetricsError, OSError) as e:
        logger.error('%s', e)
        return EXIT_DATA


if __name__ == '__main__':
    sys.exit(main())
