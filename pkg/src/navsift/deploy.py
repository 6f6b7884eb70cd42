"""Deployment framework: candidate filtering, scoring, and review feedback.

A deployment run narrows the graph to candidate domains (egonets of known
misinformation domains, or a seeded random sample), scores every candidate
in every month, and flags the domains whose target-class confidence stays
strictly above 0.5 in all months. Reviewer verdicts flow back into the
label store, which grows the egonets available to the next run.
"""

from __future__ import annotations

import csv
import json
import logging
import os
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from navsift.errors import EmptyInputError
from navsift.features import extract_matrix
from navsift.graph import NavigationGraph, egonet, node_totals
from navsift.labels import CategoryRegistry, LabelStore, append_jsonl_line

log = logging.getLogger(__name__)

STRATEGY_KINDS = ("one_hop_egonet", "two_hop_egonet", "sampled_traffic")
SEED_CLASSES = ("misinformation", "propaganda")
DEFAULT_SAMPLE_SIZE = 50000
DEFAULT_TRAFFIC_FLOOR = 3000

POSITIVE_THRESHOLD = 0.5

SUMMARY_NAME = "summary.json"
CANDIDATES_NAME = "candidates.csv"
POSITIVES_NAME = "positives.csv"
REVIEWS_NAME = "reviews.jsonl"


@dataclass(frozen=True)
class DeploymentStrategy:
    """How candidates are chosen before any model sees them.

    `seed_class` picks which labeled domains grow egonets: "misinformation"
    uses every misinformation domain, "propaganda" only the flagged subset.
    """

    kind: str
    sample_size: int | None = None
    traffic_floor: int = DEFAULT_TRAFFIC_FLOOR
    seed: int = 0
    seed_class: str = "misinformation"

    def __post_init__(self):
        if self.kind not in STRATEGY_KINDS:
            raise ValueError(f"kind must be one of {STRATEGY_KINDS}, got {self.kind!r}")
        if self.kind == "sampled_traffic":
            if self.sample_size is None:
                object.__setattr__(self, "sample_size", DEFAULT_SAMPLE_SIZE)
            if self.sample_size < 1:
                raise ValueError(f"sample_size must be >= 1, got {self.sample_size}")
        elif self.sample_size is not None:
            raise ValueError(f"{self.kind} does not take a sample_size")
        if self.traffic_floor < 0:
            raise ValueError(f"traffic_floor must be >= 0, got {self.traffic_floor}")
        if self.seed_class not in SEED_CLASSES:
            raise ValueError(f"seed_class must be one of {SEED_CLASSES}, got {self.seed_class!r}")

    @property
    def hops(self) -> int | None:
        if self.kind == "one_hop_egonet":
            return 1
        if self.kind == "two_hop_egonet":
            return 2
        return None


@dataclass
class DeploymentRun:
    """One scored candidate set plus everything needed to replay it."""

    run_id: str
    created_at: str
    strategy: DeploymentStrategy
    target_class: str
    months: tuple[str, ...]
    candidates: tuple[str, ...]
    confidence: dict[str, tuple[float, ...]]  # month -> values aligned to candidates
    positives: tuple[str, ...]
    model_info: dict[str, str]
    reviews: list[dict] = field(default_factory=list)

    def min_confidence(self, domain: str) -> float:
        i = self.candidates.index(domain)
        return min(self.confidence[m][i] for m in self.months)

    def summary(self) -> dict:
        counts = {}
        for m in self.months:
            above = sum(1 for c in self.confidence[m] if c > POSITIVE_THRESHOLD)
            counts[m] = {"all": len(self.candidates), "positive": above}
        return {
            "run_id": self.run_id,
            "created_at": self.created_at,
            "strategy": asdict(self.strategy),
            "target_class": self.target_class,
            "months": list(self.months),
            "counts": counts,
            "n_candidates": len(self.candidates),
            "n_positives": len(self.positives),
            "model": dict(self.model_info),
        }


def _resolve_created_at(created_at: str | None) -> str:
    """Explicit value, then SOURCE_DATE_EPOCH, then the wall clock."""
    if created_at is not None:
        return created_at
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch:
        stamp = datetime.fromtimestamp(int(epoch), tz=timezone.utc)
    else:
        stamp = datetime.now(timezone.utc)
    return stamp.strftime("%Y-%m-%dT%H:%M:%SZ")


def _passes_floor(domain: str, graphs: dict[str, NavigationGraph], floor: int) -> bool:
    # the floor applies to months where the domain has any traffic at all;
    # fully absent months are scored as zero vectors instead
    for graph in graphs.values():
        if domain in graph:
            inbound, outbound = node_totals(graph, domain)
            if inbound + outbound < floor:
                return False
    return True


def _seed_domains(store: LabelStore, strategy: DeploymentStrategy) -> frozenset[str]:
    if strategy.seed_class == "propaganda":
        return store.propaganda_domains()
    return store.misinformation_domains()


def select_candidates(
    graphs: dict[str, NavigationGraph],
    store: LabelStore,
    registry: CategoryRegistry,
    strategy: DeploymentStrategy,
) -> tuple[str, ...]:
    """Pick the unlabeled domains a run will score, sorted by name."""
    if not graphs:
        raise EmptyInputError("no graphs provided")
    excluded = store.labeled_domains() | registry.all_hosts()

    if strategy.hops is not None:
        seeds = _seed_domains(store, strategy)
        if not seeds:
            raise EmptyInputError(
                f"no {strategy.seed_class} domains available to seed egonets"
            )
        pool: set[str] = set()
        for graph in graphs.values():
            for seed in seeds:
                if seed in graph:
                    pool |= egonet(graph, seed, strategy.hops, "both").nodes
    else:
        pool = set()
        for graph in graphs.values():
            pool |= graph.nodes
        pool -= excluded
        ordered = sorted(pool)
        rng = np.random.default_rng(strategy.seed)
        take = min(strategy.sample_size, len(ordered))
        picked = rng.choice(len(ordered), size=take, replace=False)
        pool = {ordered[i] for i in picked}

    pool -= excluded
    return tuple(
        d for d in sorted(pool) if _passes_floor(d, graphs, strategy.traffic_floor)
    )


def run_deployment(
    graphs: dict[str, NavigationGraph],
    model,
    store: LabelStore,
    registry: CategoryRegistry,
    strategy: DeploymentStrategy,
    target_class: str | None = None,
    run_id: str | None = None,
    created_at: str | None = None,
) -> DeploymentRun:
    """Score candidates in every month and flag the all-months positives."""
    if target_class is None:
        target_class = "propaganda" if strategy.seed_class == "propaganda" else "misinformation"
    if target_class not in model.classes:
        raise ValueError(f"{target_class!r} not among model classes {model.classes}")
    months = tuple(sorted(graphs))
    candidates = select_candidates(graphs, store, registry, strategy)
    created = _resolve_created_at(created_at)
    if run_id is None:
        run_id = f"{strategy.kind}-{created.replace(':', '').replace('-', '')}"

    confidence: dict[str, tuple[float, ...]] = {}
    for month in months:
        matrix = extract_matrix(
            graphs[month], store, registry, candidates, mode=model.mode, missing="zero"
        )
        if matrix.missing:
            log.warning(
                "%d candidates absent from %s scored as zero vectors",
                len(matrix.missing),
                month,
            )
        scores = model.confidence(matrix, target_class) if candidates else np.zeros(0)
        confidence[month] = tuple(float(s) for s in scores)

    positives = tuple(
        d
        for i, d in enumerate(candidates)
        if all(confidence[m][i] > POSITIVE_THRESHOLD for m in months)
    )
    return DeploymentRun(
        run_id=run_id,
        created_at=created,
        strategy=strategy,
        target_class=target_class,
        months=months,
        candidates=candidates,
        confidence=confidence,
        positives=positives,
        model_info={
            "algorithm": model.algorithm,
            "mode": model.mode,
            "schema": model.schema,
        },
    )


@dataclass(frozen=True)
class EstimatedMetrics:
    """Review-sample estimates, always reported with their sample sizes."""

    precision: float
    recall: float | None
    n_reviewed: int
    n_confirmed: int
    n_negatives_reviewed: int
    n_negatives_confirmed: int


def _is_confirming(verdict: str) -> bool:
    return verdict in ("confirmed_misinformation", "confirmed_propaganda")


def estimate_metrics(run: DeploymentRun, reviewed, negatives_reviewed=()) -> EstimatedMetrics:
    """Estimate precision from reviewed positives and scale recall.

    `reviewed` holds (domain, verdict) pairs drawn from the run's positives;
    `negatives_reviewed` the same for candidates the run did not flag. The
    recall estimate extrapolates both sample rates over the full candidate
    split, so it is only as good as the samples.
    """
    reviewed = list(reviewed)
    negatives_reviewed = list(negatives_reviewed)
    if not reviewed:
        raise EmptyInputError("estimate_metrics needs at least one reviewed positive")
    positives = set(run.positives)
    candidates = set(run.candidates)
    for domain, _ in reviewed:
        if domain not in positives:
            raise ValueError(f"{domain!r} was reviewed but is not a flagged positive")
    for domain, _ in negatives_reviewed:
        if domain not in candidates or domain in positives:
            raise ValueError(f"{domain!r} is not an unflagged candidate")

    n_confirmed = sum(1 for _, v in reviewed if _is_confirming(v))
    precision = n_confirmed / len(reviewed)
    n_neg_confirmed = sum(1 for _, v in negatives_reviewed if _is_confirming(v))

    recall: float | None = None
    if negatives_reviewed:
        miss_rate = n_neg_confirmed / len(negatives_reviewed)
        flagged_true = precision * len(run.positives)
        missed_true = miss_rate * (len(run.candidates) - len(run.positives))
        if flagged_true + missed_true > 0:
            recall = flagged_true / (flagged_true + missed_true)
    return EstimatedMetrics(
        precision=precision,
        recall=recall,
        n_reviewed=len(reviewed),
        n_confirmed=n_confirmed,
        n_negatives_reviewed=len(negatives_reviewed),
        n_negatives_confirmed=n_neg_confirmed,
    )


def feedback(
    run: DeploymentRun,
    confirmed,
    store: LabelStore,
    reviewer: str = "deployment-review",
    timestamp: str | None = None,
) -> LabelStore:
    """Fold confirmed positives back into the label store."""
    confirmed = sorted(set(confirmed))
    positives = set(run.positives)
    for domain in confirmed:
        if domain not in positives:
            raise ValueError(f"{domain!r} is not among the run's positives")
    verdict = (
        "confirmed_propaganda"
        if run.target_class == "propaganda"
        else "confirmed_misinformation"
    )
    for domain in confirmed:
        store.add_review_label(
            domain, verdict, reviewer, timestamp=timestamp, run_id=run.run_id
        )
    return store


# -- artifacts ----------------------------------------------------------------


def save_run(run: DeploymentRun, dir_path: str | Path) -> Path:
    """Write the run artifact directory; reviews keep their own JSONL file."""
    dir_path = Path(dir_path)
    dir_path.mkdir(parents=True, exist_ok=True)

    with open(dir_path / SUMMARY_NAME, "w", encoding="utf-8") as fh:
        json.dump(run.summary(), fh, indent=2, sort_keys=True)
        fh.write("\n")

    with open(dir_path / CANDIDATES_NAME, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["domain", *run.months, "positive"])
        positives = set(run.positives)
        for i, domain in enumerate(run.candidates):
            row = [domain]
            row.extend(repr(run.confidence[m][i]) for m in run.months)
            row.append("true" if domain in positives else "false")
            writer.writerow(row)

    with open(dir_path / POSITIVES_NAME, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["domain", "min_confidence"])
        for domain in run.positives:
            writer.writerow([domain, repr(run.min_confidence(domain))])

    reviews_path = dir_path / REVIEWS_NAME
    with open(reviews_path, "w", encoding="utf-8") as fh:
        for doc in run.reviews:
            fh.write(json.dumps(doc, sort_keys=True) + "\n")
    return dir_path


def record_review(dir_path: str | Path, doc: dict) -> None:
    """Mirror one review event into the run's reviews.jsonl."""
    append_jsonl_line(Path(dir_path) / REVIEWS_NAME, doc)


def load_run(dir_path: str | Path) -> DeploymentRun:
    dir_path = Path(dir_path)
    with open(dir_path / SUMMARY_NAME, encoding="utf-8") as fh:
        doc = json.load(fh)
    months = tuple(doc["months"])

    candidates: list[str] = []
    confidence: dict[str, list[float]] = {m: [] for m in months}
    with open(dir_path / CANDIDATES_NAME, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            candidates.append(row["domain"])
            for m in months:
                confidence[m].append(float(row[m]))

    positives: list[str] = []
    with open(dir_path / POSITIVES_NAME, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            positives.append(row["domain"])

    reviews: list[dict] = []
    reviews_path = dir_path / REVIEWS_NAME
    if reviews_path.exists():
        with open(reviews_path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    reviews.append(json.loads(line))

    return DeploymentRun(
        run_id=doc["run_id"],
        created_at=doc["created_at"],
        strategy=DeploymentStrategy(**doc["strategy"]),
        target_class=doc["target_class"],
        months=months,
        candidates=tuple(candidates),
        confidence={m: tuple(v) for m, v in confidence.items()},
        positives=tuple(positives),
        model_info=doc.get("model", {}),
        reviews=reviews,
    )
