import os

import numpy as np
import pytest

from click_metrics import (
    ClickModelKind,
    ClickModelParams,
    GainKind,
    GainScheme,
    JudgmentStore,
    LabelTriple,
    MetricKind,
    MetricSpec,
    serp_from_labels,
)

FIXTURES_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'fixtures')

LINEAR = GainScheme(GainKind.LINEAR)


@pytest.fixture
def fixtures_dir():
    return FIXTURES_DIR


@pytest.fixture
def worked_serp():
    # (topical, perceived, snippet): a(A_1) = 0.8, a(A_2) = 0.4, linear gains [1, 0.5], snippet gains [0, 1]
    return serp_from_labels('q1', [(4, 3, 0), (2, 1, 4)])


@pytest.fixture
def worked_dcm():
    return ClickModelParams.dcm({0: 0.0, 1: 0.4, 2: 0.6, 3: 0.8, 4: 0.9}, [0.5, 0.5], gain=LINEAR)


@pytest.fixture
def worked_dbn():
    return ClickModelParams.dbn(
        {0: 0.0, 1: 0.4, 2: 0.6, 3: 0.8, 4: 0.9},
        {0: 0.1, 1: 0.2, 2: 0.3, 3: 0.4, 4: 0.5},
        0.9,
        gain=LINEAR,
    )


@pytest.fixture
def linear_spec():
    def make(kind=MetricKind.UDCM, **kwargs):
        return MetricSpec(kind=kind, gain_topical=LINEAR, gain_snippet=LINEAR, **kwargs)
    return make


def _random_params(rng: np.random.Generator, model: ClickModelKind, n: int) -> ClickModelParams:
    attractiveness = {g: float(rng.uniform(0.05, 0.95)) for g in range(5)}
    if model is ClickModelKind.DCM:
        return ClickModelParams.dcm(attractiveness, [float(s) for s in rng.uniform(0.05, 0.95, size=n)])
    satisfaction = {g: float(rng.uniform(0.05, 0.95)) for g in range(5)}
    return ClickModelParams.dbn(attractiveness, satisfaction, float(rng.uniform(0.05, 0.95)))


@pytest.fixture
def random_instances():
    """count seeded (serp, params) pairs with 1..max_n results"""
    def make(model: ClickModelKind, count: int = 100, max_n: int = 8, seed: int = 7):
        rng = np.random.default_rng(seed)
        instances = []
        for i in range(count):
            n = int(rng.integers(1, max_n + 1))
            labels = [tuple(int(x) for x in rng.integers(0, 5, size=3)) for _ in range(n)]
            instances.append((serp_from_labels(f'q{i}', labels), _random_params(rng, model, n)))
        return instances
    return make


@pytest.fixture
def store_for():
    """JudgmentStore from {query: [(topical, perceived, snippet), ...]}, docs named d1, d2, ..."""
    def make(labels_by_query):
        store = JudgmentStore()
        for query_id, labels in labels_by_query.items():
            for k, (topical, perceived, snippet) in enumerate(labels, start=1):
                store.add(query_id, f'd{k}', LabelTriple(topical, perceived, snippet))
        return store
    return make
