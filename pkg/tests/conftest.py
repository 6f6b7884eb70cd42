from pathlib import Path

import pytest

from navsift.graph import build_graph
from navsift.ingest import TrafficRecord
from navsift.labels import CategoryRegistry, DomainLabel, LabelStore

REPO_ROOT = Path(__file__).resolve().parents[1]
CONFIG_DIR = REPO_ROOT / "configs"

# Hand-checkable reference world, used all over the suite:
#   alpha -> beta 5000, beta -> alpha 4000, google -> alpha 6000,
#   facebook -> alpha 3500, alpha -> gamma 3000
# alpha and beta are labeled misinformation; gamma is unlabeled.
A = "alpha.example"
B = "beta.example"
C = "gamma.example"
D = "delta.example"
S = "google.com"
F = "facebook.com"

G1_EDGES = [
    (A, B, 5000),
    (B, A, 4000),
    (S, A, 6000),
    (F, A, 3500),
    (A, C, 3000),
]


def g1_record_list(month: str = "2022-10"):
    return [TrafficRecord(month, u, v, w) for u, v, w in G1_EDGES]


@pytest.fixture
def g1_records():
    return g1_record_list()


@pytest.fixture
def g1_graph():
    return build_graph(g1_record_list(), edge_threshold=3000)


@pytest.fixture
def g1_store():
    store = LabelStore()
    store._put(DomainLabel(A, "misinformation", False, "list-a"))
    store._put(DomainLabel(B, "misinformation", False, "list-a"))
    return store


@pytest.fixture
def registry():
    return CategoryRegistry.default()


@pytest.fixture
def g1_months(g1_store):
    """The reference world extended by one edge (gamma -> delta 3200)
    and replicated over two months, for deployment and feedback tests."""
    months = {}
    for month in ("2022-10", "2022-11"):
        recs = g1_record_list(month) + [TrafficRecord(month, C, D, 3200)]
        months[month] = build_graph(recs, edge_threshold=3000)
    return months


@pytest.fixture(scope="session")
def bench_binary_world():
    """Benchmark world shared by the slower statistical tests."""
    from navsift.synth import SynthConfig, generate

    config = SynthConfig.from_json(CONFIG_DIR / "bench_binary.json")
    result = generate(config)
    graphs = {m: build_graph(result.records_by_month[m]) for m in result.months}
    store = LabelStore()
    for label in result.labels:
        store._put(label)
    return result, graphs, store


@pytest.fixture(scope="session")
def bench_multiclass_world():
    from navsift.synth import SynthConfig, generate

    config = SynthConfig.from_json(CONFIG_DIR / "bench_multiclass.json")
    result = generate(config)
    graphs = {m: build_graph(result.records_by_month[m]) for m in result.months}
    store = LabelStore()
    for label in result.labels:
        store._put(label)
    return result, graphs, store
