import math

import numpy as np
import pytest

from click_metrics import (
    ClickModelKind,
    ClickModelParams,
    ConfigurationError,
    EstimationError,
    FitConfig,
    JudgmentStore,
    LabelTriple,
    SimConfig,
    Session,
    fit,
    fit_dbn,
    fit_dcm,
    log_likelihood,
    mean_log_likelihood,
    serp_from_labels,
    session_log_likelihood,
    simulate_sessions,
    train_dbn,
    train_dcm,
)
from click_metrics.estimation import session_serp

# Ranks 1-4 vary; ranks 5-6 are always highly attractive so nearly every session
# clicks somewhere below any given early rank
DCM_PERCEIVED = [
    [4, 0, 1, 2, 4, 4],
    [0, 4, 3, 1, 4, 4],
    [1, 2, 4, 3, 4, 4],
    [3, 1, 0, 4, 4, 4],
    [2, 3, 1, 0, 4, 4],
]
DCM_TRUE = ClickModelParams.dcm(
    {0: 0.1, 1: 0.25, 2: 0.45, 3: 0.65, 4: 0.9},
    [0.9, 0.88, 0.92, 0.9, 0.9, 1.0],
)

# (perceived, topical) per rank, chosen so both label kinds vary independently
DBN_LABELS = [
    [(4, 4), (2, 0), (3, 1), (1, 3), (0, 2), (2, 2)],
    [(3, 0), (4, 2), (0, 4), (2, 3), (1, 1), (3, 3)],
    [(2, 1), (1, 4), (4, 3), (3, 2), (4, 0), (0, 0)],
    [(1, 2), (3, 4), (2, 1), (4, 1), (3, 0), (1, 1)],
    [(0, 3), (2, 3), (1, 0), (4, 4), (2, 4), (4, 2)],
]
DBN_TRUE = ClickModelParams.dbn(
    {0: 0.15, 1: 0.3, 2: 0.5, 3: 0.65, 4: 0.8},
    {0: 0.1, 1: 0.3, 2: 0.5, 3: 0.7, 4: 0.85},
    0.9,
)


def _corpus(labels_per_serp):
    """(serps, judgments) from per-SERP lists of (perceived, topical)"""
    store = JudgmentStore()
    serps = []
    for i, labels in enumerate(labels_per_serp):
        query_id = f'q{i}'
        serp = serp_from_labels(query_id, [(t, p, 0) for p, t in labels])
        for result in serp.results:
            store.add(query_id, result.doc_id, result.labels)
        serps.append(serp)
    return serps, store


def _dcm_corpus():
    return _corpus([[(p, p) for p in perceived] for perceived in DCM_PERCEIVED])


class TestFitDcm:

    def test_single_session_counts(self):
        store = JudgmentStore()
        store.add('q1', 'a', LabelTriple(2, 3, 0))
        store.add('q1', 'b', LabelTriple(0, 1, 0))
        session = Session('s0', 'q1', ('a', 'b'), (1, 0))
        params = fit_dcm([session], store, FitConfig(smoothing=0.0, depth=2))
        assert params.attractiveness[3] == 1.0
        assert params.dcm_stop[0] == 1.0
        # nothing observed for the rest
        assert params.attractiveness[1] == 0.5
        assert params.dcm_stop[1] == 0.5

    def test_counting_formulas(self):
        store = JudgmentStore()
        for doc, perceived in (('a', 2), ('b', 2), ('c', 4)):
            store.add('q1', doc, LabelTriple(0, perceived, 0))
        sessions = [
            Session('s0', 'q1', ('a', 'b', 'c'), (0, 1, 1)),
            Session('s1', 'q1', ('a', 'b', 'c'), (1, 0, 0)),
            Session('s2', 'q1', ('a', 'b', 'c'), (0, 0, 0)),
        ]
        params = fit_dcm(sessions, store, FitConfig(smoothing=1.0, depth=3))
        # grade 2: 2 clicks over 3 impressions at or above the last click
        assert params.attractiveness[2] == pytest.approx(3 / 5)
        assert params.attractiveness[4] == pytest.approx(2 / 3)
        assert params.dcm_stop == pytest.approx((2 / 3, 1 / 3, 2 / 3))

    def test_empty(self):
        with pytest.raises(EstimationError):
            fit_dcm([], JudgmentStore())

    def test_no_clicks(self):
        store = JudgmentStore()
        with pytest.raises(EstimationError):
            fit_dcm([Session('s0', 'q1', ('a',), (0,))], store)

    def test_smoothing_keeps_interior(self):
        serps, store = _dcm_corpus()
        sessions = simulate_sessions(serps, SimConfig(DCM_TRUE, sessions_per_query=50, seed=1))
        params = fit_dcm(sessions, store, FitConfig(depth=6))
        values = list(params.attractiveness.values()) + list(params.dcm_stop)
        assert all(0.0 < v < 1.0 for v in values)

    def test_fit_result(self):
        serps, store = _dcm_corpus()
        sessions = simulate_sessions(serps, SimConfig(DCM_TRUE, sessions_per_query=20, seed=2))
        result = train_dcm(sessions, store, FitConfig(depth=6))
        assert result.converged
        assert result.iterations == 1
        assert result.log_likelihoods[0] == pytest.approx(
            mean_log_likelihood(sessions, store, result.params), abs=1e-9)

    @pytest.mark.slow
    def test_recovery(self):
        serps, store = _dcm_corpus()
        sessions = simulate_sessions(serps, SimConfig(DCM_TRUE, sessions_per_query=40000, seed=2024))
        params = fit_dcm(sessions, store, FitConfig(depth=6))
        for grade, value in DCM_TRUE.attractiveness.items():
            assert params.attractiveness[grade] == pytest.approx(value, abs=0.02)
        np.testing.assert_allclose(params.dcm_stop[:6], DCM_TRUE.dcm_stop, atol=0.02)


class TestFitDbn:

    def test_em_ascent(self):
        serps, store = _corpus(DBN_LABELS)
        sessions = simulate_sessions(serps, SimConfig(DBN_TRUE, sessions_per_query=400, seed=3))
        result = train_dbn(sessions, store, FitConfig(max_iters=100, tol=1e-12))
        history = np.array(result.log_likelihoods)
        assert len(history) == result.iterations + 1
        assert np.all(np.diff(history) >= -1e-9)

    def test_em_ascent_on_dcm_data(self):
        serps, store = _dcm_corpus()
        sessions = simulate_sessions(serps, SimConfig(DCM_TRUE, sessions_per_query=300, seed=4))
        result = train_dbn(sessions, store, FitConfig(max_iters=50, tol=1e-12, seed=9))
        assert np.all(np.diff(result.log_likelihoods) >= -1e-9)

    def test_outputs_are_probabilities(self):
        serps, store = _corpus(DBN_LABELS)
        sessions = simulate_sessions(serps, SimConfig(DBN_TRUE, sessions_per_query=100, seed=5))
        params = fit_dbn(sessions, store)
        values = list(params.attractiveness.values()) + list(params.dbn_satisfaction.values())
        values.append(params.dbn_continuation)
        assert all(0.0 < v < 1.0 for v in values)

    def test_deterministic(self):
        serps, store = _corpus(DBN_LABELS)
        sessions = simulate_sessions(serps, SimConfig(DBN_TRUE, sessions_per_query=100, seed=6))
        config = FitConfig(max_iters=30, seed=13)
        assert fit_dbn(sessions, store, config) == fit_dbn(sessions, store, config)

    def test_iteration_cap(self):
        serps, store = _corpus(DBN_LABELS)
        sessions = simulate_sessions(serps, SimConfig(DBN_TRUE, sessions_per_query=100, seed=7))
        result = train_dbn(sessions, store, FitConfig(max_iters=3, tol=1e-300))
        assert result.iterations == 3
        assert not result.converged

    def test_empty(self):
        with pytest.raises(EstimationError):
            fit_dbn([], JudgmentStore())

    @pytest.mark.slow
    def test_recovery(self):
        serps, store = _corpus(DBN_LABELS)
        sessions = simulate_sessions(serps, SimConfig(DBN_TRUE, sessions_per_query=40000, seed=2025))
        params = fit_dbn(sessions, store, FitConfig(max_iters=5000, tol=1e-12))
        for grade in range(5):
            assert params.attractiveness[grade] == pytest.approx(DBN_TRUE.attractiveness[grade], abs=0.05)
            assert params.dbn_satisfaction[grade] == pytest.approx(DBN_TRUE.dbn_satisfaction[grade], abs=0.05)
        assert params.dbn_continuation == pytest.approx(0.9, abs=0.02)

    @pytest.mark.slow
    def test_recovery_without_satisfaction(self):
        truth = ClickModelParams.dbn(DBN_TRUE.attractiveness, {g: 0.0 for g in range(5)}, 1.0)
        serps, store = _corpus(DBN_LABELS)
        sessions = simulate_sessions(serps, SimConfig(truth, sessions_per_query=40000, seed=2026))
        params = fit_dbn(sessions, store, FitConfig(max_iters=5000, tol=1e-12))
        assert all(v <= 0.05 for v in params.dbn_satisfaction.values())
        assert params.dbn_continuation >= 0.95


class TestLogLikelihood:

    def test_empty(self):
        assert log_likelihood([], JudgmentStore(), DCM_TRUE) == 0.0

    def test_single_term(self):
        store = JudgmentStore()
        store.add('q1', 'a', LabelTriple(0, 4, 0))
        params = ClickModelParams.dcm({4: 0.8}, [0.5])
        session = Session('s0', 'q1', ('a',), (1,))
        assert log_likelihood([session], store, params) == pytest.approx(math.log(0.8), abs=1e-12)

    def test_additive(self):
        serps, store = _dcm_corpus()
        sessions = simulate_sessions(serps, SimConfig(DCM_TRUE, sessions_per_query=10, seed=8))
        expected = math.fsum(
            session_log_likelihood(s, session_serp(s, store), DCM_TRUE) for s in sessions
        )
        assert log_likelihood(sessions, store, DCM_TRUE) == expected

    def test_fit_dispatch(self):
        serps, store = _dcm_corpus()
        sessions = simulate_sessions(serps, SimConfig(DCM_TRUE, sessions_per_query=10, seed=9))
        assert fit(ClickModelKind.DCM, sessions, store, FitConfig(depth=6)).params.model is ClickModelKind.DCM
        assert fit(ClickModelKind.DBN, sessions, store, FitConfig(max_iters=5)).params.model is ClickModelKind.DBN


class TestFitConfig:

    def test_validation(self):
        with pytest.raises(ConfigurationError):
            FitConfig(max_iters=0)
        with pytest.raises(ConfigurationError):
            FitConfig(tol=0.0)
        with pytest.raises(ConfigurationError):
            FitConfig(smoothing=-1.0)
