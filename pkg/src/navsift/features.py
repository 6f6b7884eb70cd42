"""Egonet traffic features for domains in a navigation graph.

Every feature of a domain depends only on its own incident edges plus
the label store and category registry: log-scaled traffic volumes,
inbound and outbound traffic shares to labeled and category hosts, and
counts of 1-hop misinformation egonets the domain belongs to. Share
features are 0 whenever their denominator is 0, and an optional host
metadata block (registrar, creation year, registrant country, DNSSEC)
can be appended as one-hot columns.
"""

from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from navsift.errors import DomainNotFoundError, FeatureExtractionError
from navsift.graph import NavigationGraph
from navsift.labels import CategoryRegistry, LabelStore

SCHEMA_VERSION = "traffic-v1"
HOST_SCHEMA_VERSION = "host-v1"
MODES = ("binary", "multiclass")

_SHARE_GROUPS = [
    ("misinformation", None),
    ("authoritative", None),
    ("propaganda", "multiclass"),
    ("google", None),
    ("bing", None),
    ("duckduckgo", None),
    ("social", None),
    ("news", None),
    ("mail", None),
]


def feature_names(mode: str) -> list[str]:
    """Column names in fixed schema order for the given mode."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    names = ["inbound_traffic_log", "outbound_traffic_log"]
    for prefix in ("to_", "from_"):
        for group, only_mode in _SHARE_GROUPS:
            if only_mode is None or only_mode == mode:
                names.append(prefix + group)
    names += ["inbound_egonets", "outbound_egonets"]
    return names


def schema_id(mode: str, host_block: bool = False) -> str:
    base = f"{SCHEMA_VERSION}:{mode}"
    return f"{base}+{HOST_SCHEMA_VERSION}" if host_block else base


@dataclass(frozen=True)
class FeatureVector:
    """Traffic features for one domain in one month's graph."""

    domain: str
    mode: str
    inbound_traffic_log: float
    outbound_traffic_log: float
    to_misinformation: float
    to_authoritative: float
    to_google: float
    to_bing: float
    to_duckduckgo: float
    to_social: float
    to_news: float
    to_mail: float
    from_misinformation: float
    from_authoritative: float
    from_google: float
    from_bing: float
    from_duckduckgo: float
    from_social: float
    from_news: float
    from_mail: float
    inbound_egonets: int
    outbound_egonets: int
    to_propaganda: float | None = None
    from_propaganda: float | None = None

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in feature_names(self.mode)], dtype=np.float64)


def _share(edges: dict[str, int], total: int, members, exclude: str) -> float:
    if total <= 0:
        return 0.0
    hit = sum(w for v, w in edges.items() if v != exclude and v in members)
    return hit / total


def zero_vector(domain: str, mode: str) -> FeatureVector:
    """The feature vector of a domain with no traffic at all."""
    values = {name: 0.0 for name in feature_names(mode)}
    values["inbound_egonets"] = 0
    values["outbound_egonets"] = 0
    if mode == "binary":
        values["to_propaganda"] = None
        values["from_propaganda"] = None
    return FeatureVector(domain=domain, mode=mode, **values)


def extract_features(
    graph: NavigationGraph,
    store: LabelStore,
    registry: CategoryRegistry,
    domain: str,
    mode: str = "binary",
) -> FeatureVector:
    """Compute the feature vector for one domain present in the graph.

    Raises:
        DomainNotFoundError: if the domain has no edges in this month.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if domain not in graph:
        raise DomainNotFoundError(f"{domain!r} not in {graph.month} graph")

    out_edges = graph.successors(domain)
    in_edges = graph.predecessors(domain)
    out_total = sum(out_edges.values())
    in_total = sum(in_edges.values())

    mis = store.misinformation_domains()
    auth = store.authoritative_domains()

    groups: dict[str, frozenset[str]] = {
        "misinformation": mis,
        "authoritative": auth,
        "google": registry.google,
        "bing": registry.bing,
        "duckduckgo": registry.duckduckgo,
        "social": registry.social_media,
        "news": registry.news_aggregators,
        "mail": registry.mail_providers,
    }
    if mode == "multiclass":
        groups["propaganda"] = store.propaganda_domains()

    values: dict[str, float | int | None] = {
        "inbound_traffic_log": math.log10(1 + in_total),
        "outbound_traffic_log": math.log10(1 + out_total),
        "to_propaganda": None,
        "from_propaganda": None,
    }
    for group, only_mode in _SHARE_GROUPS:
        if only_mode is not None and only_mode != mode:
            continue
        values["to_" + group] = _share(out_edges, out_total, groups[group], domain)
        values["from_" + group] = _share(in_edges, in_total, groups[group], domain)

    # A domain sits in the 1-hop inbound egonet of m exactly when it has an
    # edge into m, and in the outbound egonet when m links to it.
    values["inbound_egonets"] = sum(1 for v in out_edges if v != domain and v in mis)
    values["outbound_egonets"] = sum(1 for v in in_edges if v != domain and v in mis)

    return FeatureVector(domain=domain, mode=mode, **values)


# -- host metadata block ---------------------------------------------------


@dataclass(frozen=True)
class HostRecord:
    registrar: str = "unknown"
    creation_year: str = "unknown"
    registrant_country: str = "unknown"
    dnssec: str = "unknown"


HOST_FIELDS = ("registrar", "creation_year", "registrant_country", "dnssec")


def load_host_table(path: str | Path) -> dict[str, HostRecord]:
    """Read host metadata CSV: domain,registrar,creation_year,registrant_country,dnssec."""
    table: dict[str, HostRecord] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        need = {"domain", *HOST_FIELDS}
        if reader.fieldnames is None or not need <= set(reader.fieldnames):
            raise ValueError(f"{path}: host CSV needs columns {sorted(need)}")
        for row in reader:
            domain = row["domain"].strip().lower()
            if not domain:
                continue
            table[domain] = HostRecord(
                **{f: (row[f].strip() or "unknown") for f in HOST_FIELDS}
            )
    return table


class HostEncoder:
    """One-hot encoder over host metadata with a top-20 vocabulary per field.

    Values outside the fitted vocabulary land in `other`; domains missing
    from the table land in `unknown`.
    """

    TOP_K = 20

    def __init__(self, table: dict[str, HostRecord]):
        self.table = table
        self.vocab: dict[str, list[str]] = {}
        for field in HOST_FIELDS:
            counts = Counter(getattr(rec, field) for rec in table.values())
            counts.pop("unknown", None)
            # ties broken lexicographically so the vocabulary is stable
            top = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[: self.TOP_K]
            self.vocab[field] = [v for v, _ in top]

    def column_names(self) -> list[str]:
        names = []
        for field in HOST_FIELDS:
            for value in self.vocab[field]:
                names.append(f"host_{field}={value}")
            names.append(f"host_{field}=other")
            names.append(f"host_{field}=unknown")
        return names

    def encode(self, domain: str) -> np.ndarray:
        out: list[float] = []
        rec = self.table.get(domain)
        for field in HOST_FIELDS:
            row = [0.0] * (len(self.vocab[field]) + 2)
            if rec is None:
                row[-1] = 1.0
            else:
                value = getattr(rec, field)
                if value == "unknown":
                    row[-1] = 1.0
                elif value in self.vocab[field]:
                    row[self.vocab[field].index(value)] = 1.0
                else:
                    row[-2] = 1.0
            out.extend(row)
        return np.array(out, dtype=np.float64)


# -- matrices ----------------------------------------------------------------


@dataclass
class FeatureMatrix:
    """Feature rows for a sorted list of domains, with schema metadata."""

    mode: str
    schema: str
    feature_names: list[str]
    domains: list[str]
    X: np.ndarray
    missing: tuple[str, ...] = ()

    def row(self, domain: str) -> np.ndarray:
        return self.X[self.domains.index(domain)]


def extract_matrix(
    graph: NavigationGraph,
    store: LabelStore,
    registry: CategoryRegistry,
    domains,
    mode: str = "binary",
    missing: str = "error",
    host_encoder: HostEncoder | None = None,
) -> FeatureMatrix:
    """Extract features for many domains as one matrix.

    Rows are ordered by sorted domain name. `missing` selects what to do
    with domains absent from the graph: "error" raises
    FeatureExtractionError carrying the partial result, "zero" gives
    them all-zero traffic rows and lists them in `matrix.missing`.
    """
    if missing not in ("error", "zero"):
        raise ValueError(f"missing must be 'error' or 'zero', got {missing!r}")
    ordered = sorted(set(domains))
    names = list(feature_names(mode))
    if host_encoder is not None:
        names = names + host_encoder.column_names()
    rows: list[np.ndarray] = []
    kept: list[str] = []
    absent: list[str] = []
    for domain in ordered:
        if domain in graph:
            vec = extract_features(graph, store, registry, domain, mode)
        elif missing == "zero":
            vec = zero_vector(domain, mode)
            absent.append(domain)
        else:
            absent.append(domain)
            continue
        arr = vec.as_array()
        if host_encoder is not None:
            arr = np.concatenate([arr, host_encoder.encode(domain)])
        rows.append(arr)
        kept.append(domain)
    X = np.vstack(rows) if rows else np.zeros((0, len(names)))
    matrix = FeatureMatrix(
        mode=mode,
        schema=schema_id(mode, host_encoder is not None),
        feature_names=names,
        domains=kept,
        X=X,
        missing=tuple(absent),
    )
    if missing == "error" and absent:
        raise FeatureExtractionError(absent, partial=matrix)
    return matrix


def write_matrix_csv(matrix: FeatureMatrix, path: str | Path) -> None:
    """Write a matrix CSV with a schema comment header and fixed columns."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# schema={matrix.schema} mode={matrix.mode}\n")
        writer = csv.writer(fh)
        writer.writerow(["domain"] + matrix.feature_names)
        for i, domain in enumerate(matrix.domains):
            writer.writerow([domain] + [repr(float(v)) for v in matrix.X[i]])


def read_matrix_csv(path: str | Path) -> FeatureMatrix:
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if not header.startswith("# schema="):
            raise ValueError(f"{path}: missing schema header comment")
        parts = dict(p.split("=", 1) for p in header[2:].split() if "=" in p)
        schema = parts.get("schema", "")
        mode = parts.get("mode", "")
        if mode not in MODES:
            raise ValueError(f"{path}: bad mode {mode!r} in header")
        reader = csv.reader(fh)
        columns = next(reader)
        if not columns or columns[0] != "domain":
            raise ValueError(f"{path}: first column must be domain")
        names = columns[1:]
        domains: list[str] = []
        rows: list[list[float]] = []
        for row in reader:
            if not row:
                continue
            domains.append(row[0])
            rows.append([float(v) for v in row[1:]])
    X = np.array(rows, dtype=np.float64) if rows else np.zeros((0, len(names)))
    return FeatureMatrix(mode=mode, schema=schema, feature_names=names, domains=domains, X=X)
