"""Pipeline configuration and the artifact directory layout.

One artifact root holds everything a service instance needs:

    root/
      graphs/<month>.csv      thresholded monthly graphs
      labels/                 label store (snapshot.csv + events.jsonl)
      registry.csv            category hosts (optional; defaults used if absent)
      models/<name>.json      trained models
      runs/<run_id>/          deployment run artifacts
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from navsift.graph import DEFAULT_EDGE_THRESHOLD
from navsift.ingest import DEFAULT_PRIVACY_FLOOR

CONFIG_VERSION = 1


@dataclass
class PipelineConfig:
    """Paths and knobs shared by CLI subcommands and the service."""

    root: Path
    logs: Path | None = None
    labels: Path | None = None
    registry: Path | None = None
    edge_threshold: int = DEFAULT_EDGE_THRESHOLD
    traffic_floor: int = DEFAULT_PRIVACY_FLOOR
    model: dict = field(default_factory=dict)
    strategy: dict = field(default_factory=dict)
    port: int = 8749

    def __post_init__(self):
        self.root = Path(self.root)
        for name in ("logs", "labels", "registry"):
            value = getattr(self, name)
            if value is not None:
                value = Path(value)
                setattr(self, name, value)
                if not value.exists():
                    raise FileNotFoundError(f"{name} path does not exist: {value}")
        if self.edge_threshold < 1:
            raise ValueError(f"edge_threshold must be >= 1, got {self.edge_threshold}")
        if self.traffic_floor < 1:
            raise ValueError(f"traffic_floor must be >= 1, got {self.traffic_floor}")
        if not 1 <= self.port <= 65535:
            raise ValueError(f"port must be a TCP port, got {self.port}")

    @classmethod
    def from_json(cls, path: str | Path) -> "PipelineConfig":
        path = Path(path)
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        version = doc.pop("config_version", CONFIG_VERSION)
        if version != CONFIG_VERSION:
            raise ValueError(f"{path}: unsupported config_version {version}")
        if "root" not in doc:
            doc["root"] = path.parent
        return cls(**doc)

    # -- layout ------------------------------------------------------------

    @property
    def graphs_dir(self) -> Path:
        return self.root / "graphs"

    @property
    def labels_dir(self) -> Path:
        return self.root / "labels"

    @property
    def models_dir(self) -> Path:
        return self.root / "models"

    @property
    def runs_dir(self) -> Path:
        return self.root / "runs"
