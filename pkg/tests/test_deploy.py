"""Deployment runs: candidate filtering, the all-months positive rule,
artifacts, and review feedback."""

import numpy as np
import pytest

from navsift.deploy import (
    DeploymentRun,
    DeploymentStrategy,
    estimate_metrics,
    feedback,
    load_run,
    record_review,
    run_deployment,
    save_run,
    select_candidates,
)
from navsift.errors import EmptyInputError
from navsift.features import schema_id
from navsift.graph import build_graph
from navsift.ingest import TrafficRecord
from navsift.labels import CategoryRegistry, DomainLabel, LabelStore
from navsift.ml.models import CLASSES_BY_MODE
from navsift.synth import SynthConfig, generate

from conftest import A, B, C, D, g1_record_list


class StubModel:
    """Fixed per-month confidence scores; months arrive in sorted order."""

    def __init__(self, per_month_scores, mode="binary"):
        self.algorithm = "stub"
        self.mode = mode
        self.classes = list(CLASSES_BY_MODE[mode])
        self.schema = schema_id(mode)
        self._queue = [np.asarray(s, dtype=float) for s in per_month_scores]

    def confidence(self, matrix, target_class):
        return self._queue.pop(0)


def month_graphs(rows_by_month, threshold=3000):
    return {
        month: build_graph(rows, edge_threshold=threshold)
        for month, rows in rows_by_month.items()
    }


def mis_store(*domains):
    store = LabelStore()
    for d in domains:
        store._put(DomainLabel(d, "misinformation", False, "list"))
    return store


class TestStrategy:
    def test_egonet_kinds_reject_sample_size(self):
        with pytest.raises(ValueError):
            DeploymentStrategy(kind="one_hop_egonet", sample_size=100)
        with pytest.raises(ValueError):
            DeploymentStrategy(kind="two_hop_egonet", sample_size=100)

    def test_sampled_defaults(self):
        s = DeploymentStrategy(kind="sampled_traffic")
        assert s.sample_size == 50000
        assert s.traffic_floor == 3000
        with pytest.raises(ValueError):
            DeploymentStrategy(kind="sampled_traffic", sample_size=0)

    def test_bad_kind_and_seed_class(self):
        with pytest.raises(ValueError):
            DeploymentStrategy(kind="three_hop_egonet")
        with pytest.raises(ValueError):
            DeploymentStrategy(kind="one_hop_egonet", seed_class="benign")
        with pytest.raises(ValueError):
            DeploymentStrategy(kind="one_hop_egonet", traffic_floor=-1)

    def test_hops(self):
        assert DeploymentStrategy(kind="one_hop_egonet").hops == 1
        assert DeploymentStrategy(kind="two_hop_egonet").hops == 2
        assert DeploymentStrategy(kind="sampled_traffic").hops is None


class TestSelectCandidates:
    def test_one_hop_on_reference_graph(self, g1_graph, g1_store, registry):
        got = select_candidates(
            {"2022-10": g1_graph}, g1_store, registry, DeploymentStrategy(kind="one_hop_egonet")
        )
        assert got == (C,)

    def test_two_hop_on_reference_graph(self, g1_graph, g1_store, registry):
        got = select_candidates(
            {"2022-10": g1_graph}, g1_store, registry, DeploymentStrategy(kind="two_hop_egonet")
        )
        assert got == (C,)

    def test_two_hop_reaches_further(self, g1_months, g1_store, registry):
        one = select_candidates(g1_months, g1_store, registry, DeploymentStrategy(kind="one_hop_egonet"))
        two = select_candidates(g1_months, g1_store, registry, DeploymentStrategy(kind="two_hop_egonet"))
        assert one == (C,)
        assert two == (D, C)
        assert set(one) <= set(two)

    def test_empty_seed_set_raises(self, g1_graph, registry):
        store = LabelStore()
        store._put(DomainLabel("somewhere.example", "authoritative", False, "list"))
        with pytest.raises(EmptyInputError):
            select_candidates(
                {"2022-10": g1_graph}, store, registry, DeploymentStrategy(kind="one_hop_egonet")
            )

    def test_no_graphs_raises(self, g1_store, registry):
        with pytest.raises(EmptyInputError):
            select_candidates({}, g1_store, registry, DeploymentStrategy(kind="one_hop_egonet"))

    def test_confirming_a_domain_grows_the_pool(self, g1_months, g1_store, registry):
        strategy = DeploymentStrategy(kind="one_hop_egonet")
        before = select_candidates(g1_months, g1_store, registry, strategy)
        assert before == (C,)
        store = g1_store.copy()
        store.add_review_label(C, "confirmed_misinformation", "analyst")
        after = select_candidates(g1_months, store, registry, strategy)
        assert D in after
        assert C not in after  # now labeled, so no longer a candidate

    def test_traffic_floor_applies_to_present_months_only(self, registry):
        rows = {
            "2022-10": [
                TrafficRecord("2022-10", "mis.example", "x.example", 5000),
                TrafficRecord("2022-10", "mis.example", "y.example", 15000),
                TrafficRecord("2022-10", "mis.example", "z.example", 13000),
            ],
            "2022-11": [
                TrafficRecord("2022-11", "mis.example", "y.example", 15000),
            ],
        }
        graphs = month_graphs(rows)
        strategy = DeploymentStrategy(kind="one_hop_egonet", traffic_floor=12000)
        got = select_candidates(graphs, mis_store("mis.example"), registry, strategy)
        # x fails the floor in a month where it has traffic; z is simply
        # absent from the second month, which the floor ignores
        assert got == ("y.example", "z.example")

    def test_sampled_traffic_is_seeded(self, registry):
        rows = {
            "2022-10": [
                TrafficRecord("2022-10", "mis.example", f"s{i:03d}.example", 4000)
                for i in range(40)
            ]
        }
        graphs = month_graphs(rows)
        store = mis_store("mis.example")

        def run(seed, size=10):
            return select_candidates(
                graphs,
                store,
                registry,
                DeploymentStrategy(kind="sampled_traffic", sample_size=size, seed=seed),
            )

        assert run(1) == run(1)
        assert len(run(1)) == 10
        assert run(1) != run(2)
        assert len(run(3, size=500)) == 40  # sample larger than pool takes everything

    def test_idempotent(self, g1_months, g1_store, registry):
        strategy = DeploymentStrategy(kind="two_hop_egonet")
        assert select_candidates(g1_months, g1_store, registry, strategy) == select_candidates(
            g1_months, g1_store, registry, strategy
        )

    def test_one_hop_nests_in_two_hop_on_random_worlds(self, registry):
        for seed in (3, 4, 5):
            config = SynthConfig(
                n_misinformation=12,
                n_propaganda=3,
                n_authoritative=40,
                n_unlabeled_misinfo=6,
                n_benign_unlabeled=120,
                months=2,
                seed=seed,
            )
            result = generate(config)
            graphs = month_graphs(result.records_by_month)
            store = LabelStore()
            for label in result.labels:
                store._put(label)
            one = select_candidates(graphs, store, registry, DeploymentStrategy(kind="one_hop_egonet"))
            two = select_candidates(graphs, store, registry, DeploymentStrategy(kind="two_hop_egonet"))
            assert set(one) <= set(two)


class TestPositiveRule:
    def test_flagged_only_when_every_month_clears_half(self, g1_months, g1_store, registry):
        # candidates sorted: (delta, gamma)
        model = StubModel([(0.52, 0.7), (0.50, 0.6)])
        run = run_deployment(
            g1_months, model, g1_store, registry, DeploymentStrategy(kind="two_hop_egonet")
        )
        assert run.candidates == (D, C)
        assert run.positives == (C,)  # delta hit exactly 0.5, which does not count

    def test_single_month_just_above_half(self, g1_graph, g1_store, registry):
        model = StubModel([(0.51,)])
        run = run_deployment(
            {"2022-10": g1_graph}, model, g1_store, registry, DeploymentStrategy(kind="one_hop_egonet")
        )
        assert run.positives == (C,)

    def test_all_months_low_flags_nothing(self, g1_months, g1_store, registry):
        model = StubModel([(0.2, 0.3), (0.4, 0.45)])
        run = run_deployment(
            g1_months, model, g1_store, registry, DeploymentStrategy(kind="two_hop_egonet")
        )
        assert run.positives == ()

    def test_target_class_follows_seed_class(self, g1_graph, g1_store, registry):
        store = g1_store.copy()
        store._put(DomainLabel(A, "misinformation", True, "list"))
        model = StubModel([(0.9,)], mode="multiclass")
        run = run_deployment(
            {"2022-10": g1_graph},
            model,
            store,
            registry,
            DeploymentStrategy(kind="one_hop_egonet", seed_class="propaganda"),
        )
        assert run.target_class == "propaganda"

    def test_target_class_must_be_known_to_model(self, g1_graph, g1_store, registry):
        model = StubModel([(0.9,)])  # binary model has no propaganda class
        with pytest.raises(ValueError):
            run_deployment(
                {"2022-10": g1_graph},
                model,
                g1_store,
                registry,
                DeploymentStrategy(kind="one_hop_egonet"),
                target_class="propaganda",
            )

    def test_min_confidence_and_summary_counts(self, g1_months, g1_store, registry):
        model = StubModel([(0.52, 0.7), (0.50, 0.6)])
        run = run_deployment(
            g1_months, model, g1_store, registry, DeploymentStrategy(kind="two_hop_egonet")
        )
        assert run.min_confidence(C) == 0.6
        assert run.min_confidence(D) == 0.50
        doc = run.summary()
        assert doc["counts"] == {
            "2022-10": {"all": 2, "positive": 2},
            "2022-11": {"all": 2, "positive": 1},
        }
        assert doc["n_candidates"] == 2
        assert doc["n_positives"] == 1
        assert doc["model"]["algorithm"] == "stub"

    def test_run_id_defaults_to_strategy_and_stamp(self, g1_graph, g1_store, registry):
        model = StubModel([(0.9,)])
        run = run_deployment(
            {"2022-10": g1_graph},
            model,
            g1_store,
            registry,
            DeploymentStrategy(kind="one_hop_egonet"),
            created_at="2023-01-02T03:04:05Z",
        )
        assert run.created_at == "2023-01-02T03:04:05Z"
        assert run.run_id.startswith("one_hop_egonet-")


class TestArtifacts:
    def make_run(self, g1_months, g1_store, registry):
        model = StubModel([(0.52, 0.7), (0.50, 0.6)])
        return run_deployment(
            g1_months,
            model,
            g1_store,
            registry,
            DeploymentStrategy(kind="two_hop_egonet"),
            run_id="run-001",
            created_at="2023-01-01T00:00:00Z",
        )

    def test_round_trip(self, g1_months, g1_store, registry, tmp_path):
        run = self.make_run(g1_months, g1_store, registry)
        save_run(run, tmp_path / "run")
        back = load_run(tmp_path / "run")
        assert back.run_id == run.run_id
        assert back.created_at == run.created_at
        assert back.strategy == run.strategy
        assert back.target_class == run.target_class
        assert back.months == run.months
        assert back.candidates == run.candidates
        assert back.confidence == run.confidence  # repr() round-trips floats exactly
        assert back.positives == run.positives
        assert back.model_info == run.model_info

    def test_resave_is_byte_identical(self, g1_months, g1_store, registry, tmp_path):
        run = self.make_run(g1_months, g1_store, registry)
        save_run(run, tmp_path / "a")
        save_run(load_run(tmp_path / "a"), tmp_path / "b")
        for name in ("summary.json", "candidates.csv", "positives.csv", "reviews.jsonl"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_record_review_lands_in_reviews_file(self, g1_months, g1_store, registry, tmp_path):
        run = self.make_run(g1_months, g1_store, registry)
        save_run(run, tmp_path / "run")
        record_review(tmp_path / "run", {"domain": C, "verdict": "rejected", "reviewer": "r"})
        back = load_run(tmp_path / "run")
        assert back.reviews == [{"domain": C, "verdict": "rejected", "reviewer": "r"}]


def make_synthetic_run(n_candidates=1000, n_positives=300, target_class="misinformation"):
    candidates = tuple(f"c{i:04d}.example" for i in range(n_candidates))
    positives = candidates[:n_positives]
    months = ("2022-10",)
    scores = tuple(0.9 if d in set(positives) else 0.1 for d in candidates)
    return DeploymentRun(
        run_id="run-est",
        created_at="2023-01-01T00:00:00Z",
        strategy=DeploymentStrategy(kind="two_hop_egonet"),
        target_class=target_class,
        months=months,
        candidates=candidates,
        confidence={"2022-10": scores},
        positives=positives,
        model_info={},
    )


class TestEstimateMetrics:
    def test_precision_from_review_sample(self):
        run = make_synthetic_run()
        reviewed = [(f"c{i:04d}.example", "confirmed_misinformation") for i in range(234)]
        reviewed += [(f"c{i:04d}.example", "rejected") for i in range(234, 300)]
        got = estimate_metrics(run, reviewed)
        assert got.precision == pytest.approx(0.78)
        assert got.recall is None  # no negatives were reviewed
        assert (got.n_reviewed, got.n_confirmed) == (300, 234)

    def test_all_rejected(self):
        run = make_synthetic_run()
        reviewed = [(f"c{i:04d}.example", "rejected") for i in range(10)]
        got = estimate_metrics(run, reviewed)
        assert got.precision == 0.0
        assert got.recall is None

    def test_clean_negatives_give_full_recall(self):
        run = make_synthetic_run()
        reviewed = [("c0000.example", "confirmed_misinformation")]
        negatives = [(f"c{i:04d}.example", "rejected") for i in range(300, 310)]
        got = estimate_metrics(run, reviewed, negatives)
        assert got.recall == 1.0
        assert got.n_negatives_reviewed == 10
        assert got.n_negatives_confirmed == 0

    def test_missed_positives_lower_recall(self):
        run = make_synthetic_run()
        reviewed = [(f"c{i:04d}.example", "confirmed_misinformation") for i in range(100)]
        negatives = [(f"c{i:04d}.example", "confirmed_misinformation") for i in range(300, 310)]
        negatives += [(f"c{i:04d}.example", "rejected") for i in range(310, 400)]
        got = estimate_metrics(run, reviewed, negatives)
        # flagged-true 1.0 * 300 vs missed-true 0.1 * 700
        assert got.recall == pytest.approx(300 / 370)

    def test_zero_signal_recall_stays_unknown(self):
        run = make_synthetic_run()
        reviewed = [("c0000.example", "rejected")]
        negatives = [("c0500.example", "rejected")]
        got = estimate_metrics(run, reviewed, negatives)
        assert got.precision == 0.0
        assert got.recall is None  # nothing confirmed anywhere, so no rate to scale

    def test_validation(self):
        run = make_synthetic_run()
        with pytest.raises(EmptyInputError):
            estimate_metrics(run, [])
        with pytest.raises(ValueError):
            estimate_metrics(run, [("c0999.example", "rejected")])  # not flagged
        with pytest.raises(ValueError):
            estimate_metrics(
                run,
                [("c0000.example", "rejected")],
                [("c0001.example", "rejected")],  # flagged, so not a negative
            )
        with pytest.raises(ValueError):
            estimate_metrics(
                run,
                [("c0000.example", "rejected")],
                [("unseen.example", "rejected")],  # not a candidate at all
            )


class TestFeedback:
    def test_confirmed_positives_become_labels(self):
        run = make_synthetic_run()
        store = LabelStore()
        feedback(run, ["c0001.example", "c0000.example"], store, reviewer="analyst")
        assert store.class_of("c0000.example") == "misinformation"
        assert store.review_verdict("c0001.example") == "confirmed_misinformation"
        assert [e["domain"] for e in store.events] == ["c0000.example", "c0001.example"]
        assert all(e["run_id"] == "run-est" for e in store.events)
        assert all(e["reviewer"] == "analyst" for e in store.events)

    def test_propaganda_target_confirms_propaganda(self):
        run = make_synthetic_run(target_class="propaganda")
        store = LabelStore()
        feedback(run, ["c0000.example"], store)
        assert store.review_verdict("c0000.example") == "confirmed_propaganda"
        assert "c0000.example" in store.propaganda_domains()

    def test_rejects_domains_outside_positives(self):
        run = make_synthetic_run()
        store = LabelStore()
        with pytest.raises(ValueError):
            feedback(run, ["c0999.example"], store)

    def test_empty_confirmation_is_a_no_op(self):
        run = make_synthetic_run()
        store = LabelStore()
        feedback(run, [], store)
        assert len(store) == 0
        assert store.events == []
