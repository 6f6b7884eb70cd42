"""Monthly directed navigation graphs and k-hop egonets.

An edge referrer->target exists when the month's aggregated page views
for that pair meet the edge threshold. Graphs keep adjacency in both
directions so egonet extraction touches only the egonet's neighborhood,
never the whole graph.
"""

from __future__ import annotations

import csv
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path

from navsift.errors import DomainNotFoundError
from navsift.ingest import MONTH_RE, TrafficRecord

DEFAULT_EDGE_THRESHOLD = 3000

DIRECTIONS = ("inbound", "outbound", "both")


class NavigationGraph:
    """Immutable directed weighted graph of domain navigation for one month.

    Nodes are exactly the endpoints of surviving edges; there are no
    self-loops and every weight met the build threshold.
    """

    __slots__ = ("month", "_succ", "_pred", "_nodes")

    def __init__(self, month: str, edges: dict[tuple[str, str], int]):
        self.month = month
        succ: dict[str, dict[str, int]] = {}
        pred: dict[str, dict[str, int]] = {}
        for (u, v), w in edges.items():
            succ.setdefault(u, {})[v] = w
            pred.setdefault(v, {})[u] = w
        self._succ = succ
        self._pred = pred
        self._nodes = frozenset(succ) | frozenset(pred)

    @property
    def nodes(self) -> frozenset[str]:
        return self._nodes

    def __contains__(self, domain: str) -> bool:
        return domain in self._nodes

    def __len__(self) -> int:
        return len(self._nodes)

    @property
    def n_edges(self) -> int:
        return sum(len(d) for d in self._succ.values())

    def successors(self, domain: str) -> dict[str, int]:
        return self._succ.get(domain, {})

    def predecessors(self, domain: str) -> dict[str, int]:
        return self._pred.get(domain, {})

    def weight(self, referrer: str, target: str) -> int | None:
        return self._succ.get(referrer, {}).get(target)

    def edge_items(self):
        """Iterate (referrer, target, weight) in sorted order."""
        for u in sorted(self._succ):
            row = self._succ[u]
            for v in sorted(row):
                yield u, v, row[v]

    def edge_dict(self) -> dict[tuple[str, str], int]:
        return {(u, v): w for u, v, w in self.edge_items()}

    def __eq__(self, other) -> bool:
        if not isinstance(other, NavigationGraph):
            return NotImplemented
        return self.month == other.month and self._succ == other._succ

    def __repr__(self) -> str:
        return f"NavigationGraph({self.month!r}, nodes={len(self._nodes)}, edges={self.n_edges})"


@dataclass(frozen=True)
class Egonet:
    """Induced subgraph around a center domain."""

    center: str
    k: int
    direction: str
    nodes: frozenset[str]
    edges: dict[tuple[str, str], int] = field(compare=False)


def build_graph(records, edge_threshold: int = DEFAULT_EDGE_THRESHOLD) -> NavigationGraph:
    """Build one month's graph from that month's traffic records.

    Pair views are aggregated, self-loops dropped, and an edge is kept
    only when its aggregated views are >= `edge_threshold`.

    Raises:
        ValueError: on an empty record list or records spanning months.
    """
    if edge_threshold < 0:
        raise ValueError(f"edge threshold must be >= 0, got {edge_threshold}")
    records = list(records)
    if not records:
        raise ValueError("cannot build a graph from zero records")
    months = {r.month for r in records}
    if len(months) != 1:
        raise ValueError(f"records span several months: {sorted(months)}")
    sums: dict[tuple[str, str], int] = defaultdict(int)
    for r in records:
        if r.referrer == r.target:
            continue
        sums[(r.referrer, r.target)] += r.page_views
    edges = {pair: w for pair, w in sums.items() if w >= edge_threshold}
    return NavigationGraph(month=records[0].month, edges=edges)


def _reach(adjacency, center: str, k: int) -> set[str]:
    """Nodes within k hops of center following the given adjacency."""
    seen = {center}
    frontier = [center]
    for _ in range(k):
        nxt = []
        for u in frontier:
            for v in adjacency.get(u, ()):
                if v not in seen:
                    seen.add(v)
                    nxt.append(v)
        if not nxt:
            break
        frontier = nxt
    return seen


def egonet(graph: NavigationGraph, center: str, k: int, direction: str) -> Egonet:
    """Extract the k-hop egonet around `center`.

    Directions:
        inbound: nodes that reach the center within k hops.
        outbound: nodes the center reaches within k hops.
        both: union of inbound and outbound node sets.

    The edge set is induced: every parent edge between member nodes.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if direction not in DIRECTIONS:
        raise ValueError(f"direction must be one of {DIRECTIONS}, got {direction!r}")
    if center not in graph:
        raise DomainNotFoundError(f"{center!r} not in {graph.month} graph")
    if direction == "inbound":
        nodes = _reach(graph._pred, center, k)
    elif direction == "outbound":
        nodes = _reach(graph._succ, center, k)
    else:
        nodes = _reach(graph._pred, center, k) | _reach(graph._succ, center, k)
    edges: dict[tuple[str, str], int] = {}
    for u in nodes:
        for v, w in graph.successors(u).items():
            if v in nodes:
                edges[(u, v)] = w
    return Egonet(center=center, k=k, direction=direction, nodes=frozenset(nodes), edges=edges)


def node_totals(graph: NavigationGraph, domain: str) -> tuple[int, int]:
    """Return (inbound_total, outbound_total) page views for a domain."""
    if domain not in graph:
        raise DomainNotFoundError(f"{domain!r} not in {graph.month} graph")
    inbound = sum(graph.predecessors(domain).values())
    outbound = sum(graph.successors(domain).values())
    return inbound, outbound


def write_graph_csv(graph: NavigationGraph, path: str | Path) -> None:
    """Write the edge list as CSV: month,referrer,target,weight, sorted."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["month", "referrer", "target", "weight"])
        for u, v, w in graph.edge_items():
            writer.writerow([graph.month, u, v, w])


def read_graph_csv(path: str | Path) -> NavigationGraph:
    """Read an edge-list CSV written by write_graph_csv.

    Round-trips bit-exactly: weights are integers and rows are kept as
    stored (re-exporting yields an identical file).
    """
    path = Path(path)
    edges: dict[tuple[str, str], int] = {}
    months: set[str] = set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        need = {"month", "referrer", "target", "weight"}
        if reader.fieldnames is None or not need <= set(reader.fieldnames):
            raise ValueError(f"{path}: graph CSV needs columns {sorted(need)}")
        for i, row in enumerate(reader, start=2):
            month = row["month"].strip()
            if not MONTH_RE.match(month):
                raise ValueError(f"{path}:{i}: bad month {month!r}")
            months.add(month)
            u, v = row["referrer"].strip(), row["target"].strip()
            if u == v:
                raise ValueError(f"{path}:{i}: self-loop {u!r}")
            w = int(row["weight"])
            if (u, v) in edges:
                raise ValueError(f"{path}:{i}: duplicate edge {u!r}->{v!r}")
            edges[(u, v)] = w
    if not edges:
        raise ValueError(f"{path}: no edges")
    if len(months) != 1:
        raise ValueError(f"{path}: edges span several months: {sorted(months)}")
    return NavigationGraph(month=months.pop(), edges=edges)


def load_graphs(dir_path: str | Path) -> dict[str, NavigationGraph]:
    """Load every per-month edge-list CSV in a directory, keyed by month."""
    dir_path = Path(dir_path)
    graphs: dict[str, NavigationGraph] = {}
    for path in sorted(dir_path.glob("*.csv")):
        g = read_graph_csv(path)
        if g.month in graphs:
            raise ValueError(f"duplicate month {g.month} in {dir_path}")
        graphs[g.month] = g
    if not graphs:
        raise ValueError(f"no graph CSVs found in {dir_path}")
    return dict(sorted(graphs.items()))
