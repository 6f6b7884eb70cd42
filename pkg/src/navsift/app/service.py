"""HTTP review service over pipeline artifacts.

The service is a thin, read-mostly layer: graphs, label store, and
deployment runs are loaded from an artifact root at startup, every GET
serves from that immutable state, and the only write path (POST
/reviews) funnels through one lock into the label store's event log plus
the run's reviews mirror. Restarting the service rebuilds identical
state from the artifacts alone.
"""

from __future__ import annotations

import threading
from pathlib import Path

from fastapi import FastAPI, HTTPException, Query
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel
from starlette.exceptions import HTTPException as StarletteHTTPException

from navsift.deploy import DeploymentRun, load_run, record_review
from navsift.errors import LabelConflictError
from navsift.features import extract_features, feature_names, zero_vector
from navsift.graph import load_graphs, node_totals
from navsift.labels import VERDICTS, CategoryRegistry, LabelStore

QUEUE_MAX_SIZE = 500


class ReviewRequest(BaseModel):
    run_id: str
    domain: str
    verdict: str
    reviewer: str
    checklist: list[bool] | None = None


class ServiceState:
    """Everything the endpoints read, rebuilt from artifacts on startup."""

    def __init__(self, root: Path):
        self.root = Path(root)
        self.lock = threading.Lock()

        registry_path = self.root / "registry.csv"
        self.registry = (
            CategoryRegistry.from_csv(registry_path)
            if registry_path.exists()
            else CategoryRegistry.default()
        )

        labels_dir = self.root / "labels"
        if (labels_dir / "snapshot.csv").exists() or (labels_dir / "events.jsonl").exists():
            self.store = LabelStore.open(labels_dir)
        else:
            labels_csv = self.root / "labels.csv"
            store = LabelStore.load_labels([labels_csv]) if labels_csv.exists() else LabelStore()
            store.save(labels_dir)
            self.store = LabelStore.open(labels_dir)

        graphs_dir = self.root / "graphs"
        self.graphs = load_graphs(graphs_dir) if graphs_dir.is_dir() else {}

        self.runs: dict[str, DeploymentRun] = {}
        self.run_dirs: dict[str, Path] = {}
        runs_dir = self.root / "runs"
        if runs_dir.is_dir():
            for sub in sorted(runs_dir.iterdir()):
                if (sub / "summary.json").exists():
                    run = load_run(sub)
                    self.runs[run.run_id] = run
                    self.run_dirs[run.run_id] = sub

    def last_review(self, domain: str) -> dict | None:
        found = None
        for event in self.store.events:
            if event.get("domain") == domain:
                found = event
        if found is None:
            return None
        return {
            "verdict": found["verdict"],
            "reviewer": found.get("reviewer", ""),
            "timestamp": found.get("timestamp", ""),
        }


def _error(status: int, code: str, message: str) -> HTTPException:
    return HTTPException(status_code=status, detail={"code": code, "message": message})


def create_app(root: str | Path) -> FastAPI:
    state = ServiceState(Path(root))
    app = FastAPI(title="navsift review service")
    app.state.navsift = state

    @app.exception_handler(StarletteHTTPException)
    async def _http_error(request, exc):
        detail = exc.detail
        if not isinstance(detail, dict):
            detail = {"code": "error", "message": str(detail)}
        return JSONResponse(status_code=exc.status_code, content=detail)

    @app.exception_handler(RequestValidationError)
    async def _validation_error(request, exc):
        errors = exc.errors()
        if errors:
            loc = ".".join(str(p) for p in errors[0].get("loc", ()))
            message = f"{loc}: {errors[0].get('msg', 'invalid')}"
        else:
            message = "invalid request"
        return JSONResponse(status_code=400, content={"code": "invalid_request", "message": message})

    def _get_run(run_id: str) -> DeploymentRun:
        run = state.runs.get(run_id)
        if run is None:
            raise _error(404, "run_not_found", f"no deployment run {run_id!r}")
        return run

    def _queue_item(run: DeploymentRun, domain: str) -> dict:
        i = run.candidates.index(domain)
        confidences = {m: run.confidence[m][i] for m in run.months}
        return {
            "domain": domain,
            "confidences": confidences,
            "min_confidence": min(confidences.values()),
            "predicted_class": run.target_class,
            "review": state.last_review(domain),
        }

    @app.get("/health")
    def health():
        return {
            "status": "ok",
            "months": sorted(state.graphs),
            "runs": len(state.runs),
            "labels": state.store.counts(),
        }

    @app.get("/runs")
    def runs():
        out = []
        for run_id in sorted(state.runs):
            run = state.runs[run_id]
            reviewed = sum(1 for d in run.positives if state.store.review_verdict(d))
            out.append(
                {
                    "run_id": run.run_id,
                    "created_at": run.created_at,
                    "strategy": run.strategy.kind,
                    "target_class": run.target_class,
                    "months": list(run.months),
                    "n_candidates": len(run.candidates),
                    "n_positives": len(run.positives),
                    "n_reviewed": reviewed,
                }
            )
        return out

    @app.get("/runs/{run_id}/queue")
    def queue(
        run_id: str,
        page: int = Query(default=1, ge=1),
        size: int = Query(default=20, ge=1, le=QUEUE_MAX_SIZE),
    ):
        run = _get_run(run_id)
        ordered = sorted(run.positives, key=lambda d: (-run.min_confidence(d), d))
        start = (page - 1) * size
        items = [_queue_item(run, d) for d in ordered[start : start + size]]
        return {
            "run_id": run_id,
            "page": page,
            "size": size,
            "total": len(ordered),
            "items": items,
        }

    @app.get("/domains/{domain}")
    def domain_view(domain: str):
        months = sorted(m for m, g in state.graphs.items() if domain in g)
        if not months:
            raise _error(404, "domain_not_found", f"{domain!r} has no traffic in any month")
        label = state.store.get(domain)
        names = feature_names("multiclass")

        per_month = {}
        neighbors: dict[str, dict] = {}
        for month in sorted(state.graphs):
            graph = state.graphs[month]
            if domain in graph:
                vector = extract_features(graph, state.store, state.registry, domain, mode="multiclass")
                inbound, outbound = node_totals(graph, domain)
                for n, w in graph.successors(domain).items():
                    neighbors.setdefault(n, {"in": {}, "out": {}})["out"][month] = w
                for n, w in graph.predecessors(domain).items():
                    neighbors.setdefault(n, {"in": {}, "out": {}})["in"][month] = w
            else:
                vector = zero_vector(domain, "multiclass")
                inbound = outbound = 0
            per_month[month] = {
                "features": {name: getattr(vector, name) for name in names},
                "inbound_total": inbound,
                "outbound_total": outbound,
            }

        def _label_class(d: str) -> str:
            entry = state.store.get(d)
            if entry is None:
                return "unlabeled"
            if entry.propaganda:
                return "propaganda"
            return entry.class_

        neighbor_rows = []
        for n in neighbors:
            total = sum(neighbors[n]["in"].values()) + sum(neighbors[n]["out"].values())
            neighbor_rows.append(
                {
                    "domain": n,
                    "label_class": _label_class(n),
                    "in_weights": neighbors[n]["in"],
                    "out_weights": neighbors[n]["out"],
                    "total_weight": total,
                }
            )
        neighbor_rows.sort(key=lambda r: (-r["total_weight"], r["domain"]))

        return {
            "domain": domain,
            "label": None
            if label is None
            else {
                "class": label.class_,
                "propaganda": label.propaganda,
                "source": label.source,
            },
            "review": state.last_review(domain),
            "months": per_month,
            "neighbors": neighbor_rows,
        }

    @app.post("/reviews")
    def post_review(body: ReviewRequest):
        if body.verdict not in VERDICTS:
            raise _error(400, "invalid_verdict", f"verdict must be one of {sorted(VERDICTS)}")
        if not body.reviewer.strip():
            raise _error(400, "invalid_reviewer", "reviewer must be non-empty")
        with state.lock:
            run = _get_run(body.run_id)
            if body.domain not in run.positives:
                raise _error(
                    404, "domain_not_flagged", f"{body.domain!r} is not flagged in run {body.run_id!r}"
                )
            try:
                state.store.add_review_label(
                    body.domain,
                    body.verdict,
                    body.reviewer,
                    run_id=body.run_id,
                    checklist=body.checklist,
                )
            except LabelConflictError as err:
                raise _error(409, "verdict_conflict", str(err))
            event = state.store.events[-1]
            run.reviews.append(event)
            record_review(state.run_dirs[body.run_id], event)
            return _queue_item(run, body.domain)

    ui_dir = state.root / "ui"
    if ui_dir.is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
