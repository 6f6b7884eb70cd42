"""Domain labels, category host registry, and the review event log.

Labels come from list files (CSV: domain,class,propaganda,source) merged
with misinformation-wins precedence, plus review verdicts appended as
JSONL events. The store persists as a compacted snapshot plus the
append-only event log and always replays to the same state.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path

from navsift.errors import LabelConflictError, LabelParseError

CLASSES = ("misinformation", "authoritative", "unlabeled")
VERDICTS = ("confirmed_misinformation", "confirmed_propaganda", "rejected")

SNAPSHOT_NAME = "snapshot.csv"
EVENTS_NAME = "events.jsonl"

_TRUE = {"true", "1", "yes"}
_FALSE = {"false", "0", "no", ""}


@dataclass(frozen=True)
class DomainLabel:
    domain: str
    class_: str
    propaganda: bool = False
    source: str = ""
    added_at: str = ""


def _now_iso() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def append_jsonl_line(path: str | Path, doc: dict) -> None:
    """Append one JSON document as a single line, durably.

    The whole serialized line goes through one write call on an O_APPEND
    descriptor followed by fsync, so a crash can lose the event but never
    leave a truncated line behind.
    """
    line = json.dumps(doc, sort_keys=True) + "\n"
    fd = os.open(path, os.O_WRONLY | os.O_APPEND | os.O_CREAT, 0o644)
    try:
        os.write(fd, line.encode("utf-8"))
        os.fsync(fd)
    finally:
        os.close(fd)


def _merge(a: DomainLabel, b: DomainLabel) -> DomainLabel:
    """Combine two labels for one domain: misinformation wins, propaganda ORs."""
    if "misinformation" in (a.class_, b.class_):
        cls = "misinformation"
    elif "authoritative" in (a.class_, b.class_):
        cls = "authoritative"
    else:
        cls = "unlabeled"
    propaganda = a.propaganda or b.propaganda
    if propaganda:
        cls = "misinformation"
    sources = [s for s in a.source.split(";") if s]
    for s in b.source.split(";"):
        if s and s not in sources:
            sources.append(s)
    return DomainLabel(
        domain=a.domain,
        class_=cls,
        propaganda=propaganda,
        source=";".join(sources),
        added_at=a.added_at or b.added_at,
    )


def _verdict_label(domain: str, verdict: str, added_at: str) -> DomainLabel:
    if verdict == "confirmed_misinformation":
        return DomainLabel(domain, "misinformation", False, "review", added_at)
    if verdict == "confirmed_propaganda":
        return DomainLabel(domain, "misinformation", True, "review", added_at)
    return DomainLabel(domain, "authoritative", False, "review", added_at)


class CategoryRegistry:
    """Known search, social, news-aggregator, and mail hosts.

    Search engines are tracked per engine (google, bing, duckduckgo)
    because traffic shares are reported per engine; the search set is
    their union. The four top-level sets are pairwise disjoint and
    their hosts are never classification candidates.
    """

    GROUPS = ("google", "bing", "duckduckgo", "social_media", "news_aggregators", "mail_providers")

    def __init__(self, groups: dict[str, frozenset[str]]):
        self._groups = {name: frozenset(groups.get(name, ())) for name in self.GROUPS}
        self._validate()

    def _validate(self) -> None:
        top = {
            "search": self.search_engines,
            "social": self.social_media,
            "news": self.news_aggregators,
            "mail": self.mail_providers,
        }
        names = list(top)
        for i, a in enumerate(names):
            for b in names[i + 1 :]:
                overlap = top[a] & top[b]
                if overlap:
                    raise ValueError(f"category sets {a} and {b} overlap: {sorted(overlap)}")

    def group(self, name: str) -> frozenset[str]:
        return self._groups[name]

    @property
    def google(self) -> frozenset[str]:
        return self._groups["google"]

    @property
    def bing(self) -> frozenset[str]:
        return self._groups["bing"]

    @property
    def duckduckgo(self) -> frozenset[str]:
        return self._groups["duckduckgo"]

    @property
    def search_engines(self) -> frozenset[str]:
        return self.google | self.bing | self.duckduckgo

    @property
    def social_media(self) -> frozenset[str]:
        return self._groups["social_media"]

    @property
    def news_aggregators(self) -> frozenset[str]:
        return self._groups["news_aggregators"]

    @property
    def mail_providers(self) -> frozenset[str]:
        return self._groups["mail_providers"]

    def all_hosts(self) -> frozenset[str]:
        out: frozenset[str] = frozenset()
        for hosts in self._groups.values():
            out |= hosts
        return out

    @classmethod
    def default(cls) -> "CategoryRegistry":
        return cls(
            {
                "google": frozenset({"google.com", "www.google.com"}),
                "bing": frozenset({"bing.com", "www.bing.com"}),
                "duckduckgo": frozenset({"duckduckgo.com"}),
                "social_media": frozenset(
                    {
                        "facebook.com",
                        "www.facebook.com",
                        "twitter.com",
                        "x.com",
                        "tiktok.com",
                        "www.tiktok.com",
                        "linkedin.com",
                        "www.linkedin.com",
                        "telegram.org",
                        "web.telegram.org",
                        "t.me",
                        "web.whatsapp.com",
                    }
                ),
                "news_aggregators": frozenset(
                    {
                        "bloomberg.com",
                        "www.bloomberg.com",
                        "msn.com",
                        "www.msn.com",
                        "news.google.com",
                        "news.yahoo.com",
                    }
                ),
                "mail_providers": frozenset(
                    {"gmail.com", "mail.google.com", "mail.yahoo.com", "outlook.com", "outlook.live.com"}
                ),
            }
        )

    @classmethod
    def from_csv(cls, path: str | Path) -> "CategoryRegistry":
        """Load a registry from CSV with header category,host."""
        groups: dict[str, set[str]] = {name: set() for name in cls.GROUPS}
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or not {"category", "host"} <= set(reader.fieldnames):
                raise ValueError(f"{path}: registry CSV needs columns category,host")
            for i, row in enumerate(reader, start=2):
                cat = row["category"].strip()
                if cat not in groups:
                    raise ValueError(f"{path}:{i}: unknown category {cat!r}")
                host = row["host"].strip().lower()
                if host:
                    groups[cat].add(host)
        return cls({k: frozenset(v) for k, v in groups.items()})

    def to_csv(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["category", "host"])
            for name in self.GROUPS:
                for host in sorted(self._groups[name]):
                    writer.writerow([name, host])


def _parse_bool(raw: str, path: str, line: int) -> bool:
    v = raw.strip().lower()
    if v in _TRUE:
        return True
    if v in _FALSE:
        return False
    raise LabelParseError(f"{path}:{line}: bad propaganda flag {raw!r}", path, line)


class LabelStore:
    """Mutable mapping of domain -> DomainLabel plus its review event log."""

    def __init__(self, labels: dict[str, DomainLabel] | None = None):
        self._labels: dict[str, DomainLabel] = dict(labels or {})
        self.events: list[dict] = []
        self._review_verdicts: dict[str, str] = {}
        self._log_path: Path | None = None

    # -- loading ---------------------------------------------------------

    @classmethod
    def load_labels(cls, paths) -> "LabelStore":
        """Load and merge one or more label CSV files.

        Later rows merge into earlier ones under misinformation-wins
        precedence; a propaganda flag promotes the class to
        misinformation so the propaganda subset invariant holds.
        """
        store = cls()
        for path in paths:
            path = Path(path)
            with open(path, newline="", encoding="utf-8") as fh:
                reader = csv.DictReader(fh)
                need = {"domain", "class", "propaganda", "source"}
                if reader.fieldnames is None or not need <= set(reader.fieldnames):
                    raise LabelParseError(f"{path}: label CSV needs columns {sorted(need)}", str(path), 1)
                for i, row in enumerate(reader, start=2):
                    domain = row["domain"].strip().lower()
                    if not domain:
                        raise LabelParseError(f"{path}:{i}: empty domain", str(path), i)
                    cls_ = row["class"].strip()
                    if cls_ not in CLASSES:
                        raise LabelParseError(f"{path}:{i}: unknown class {cls_!r}", str(path), i)
                    propaganda = _parse_bool(row["propaganda"], str(path), i)
                    if propaganda:
                        cls_ = "misinformation"
                    label = DomainLabel(domain, cls_, propaganda, row["source"].strip())
                    store._put(label)
        return store

    def _put(self, label: DomainLabel) -> None:
        cur = self._labels.get(label.domain)
        self._labels[label.domain] = _merge(cur, label) if cur else label

    # -- queries ---------------------------------------------------------

    def get(self, domain: str) -> DomainLabel | None:
        return self._labels.get(domain)

    def __contains__(self, domain: str) -> bool:
        return domain in self._labels

    def __len__(self) -> int:
        return len(self._labels)

    def class_of(self, domain: str) -> str:
        label = self._labels.get(domain)
        return label.class_ if label else "unlabeled"

    def misinformation_domains(self) -> frozenset[str]:
        return frozenset(d for d, l in self._labels.items() if l.class_ == "misinformation")

    def authoritative_domains(self) -> frozenset[str]:
        return frozenset(d for d, l in self._labels.items() if l.class_ == "authoritative")

    def propaganda_domains(self) -> frozenset[str]:
        return frozenset(d for d, l in self._labels.items() if l.propaganda)

    def labeled_domains(self) -> frozenset[str]:
        return frozenset(
            d for d, l in self._labels.items() if l.class_ in ("misinformation", "authoritative")
        )

    def counts(self) -> dict[str, int]:
        out = {c: 0 for c in CLASSES}
        out["propaganda"] = 0
        for label in self._labels.values():
            out[label.class_] += 1
            if label.propaganda:
                out["propaganda"] += 1
        return out

    def review_verdict(self, domain: str) -> str | None:
        return self._review_verdicts.get(domain)

    # -- review feedback ---------------------------------------------------

    def add_review_label(
        self,
        domain: str,
        verdict: str,
        reviewer: str,
        timestamp: str | None = None,
        run_id: str | None = None,
        checklist: list[bool] | None = None,
    ) -> DomainLabel:
        """Apply one human review verdict and append it to the event log.

        The domain must be previously unlabeled (or labeled only by an
        earlier identical review). A second, different verdict raises
        LabelConflictError, as does reviewing a list-labeled domain.
        """
        if verdict not in VERDICTS:
            raise ValueError(f"unknown verdict {verdict!r}, expected one of {VERDICTS}")
        if not domain:
            raise ValueError("empty domain")
        prior = self._review_verdicts.get(domain)
        if prior is not None:
            if prior != verdict:
                raise LabelConflictError(
                    f"{domain!r} already reviewed as {prior!r}, got conflicting {verdict!r}"
                )
        elif domain in self._labels:
            existing = self._labels[domain]
            raise LabelConflictError(
                f"{domain!r} already labeled {existing.class_!r} by {existing.source or 'unknown'!r}"
            )
        event = {
            "domain": domain,
            "verdict": verdict,
            "reviewer": reviewer,
            "timestamp": timestamp or _now_iso(),
        }
        if run_id is not None:
            event["run_id"] = run_id
        if checklist is not None:
            event["checklist"] = list(checklist)
        self._apply_event(event)
        self._append_event_line(event)
        return self._labels[domain]

    def _apply_event(self, event: dict) -> None:
        label = _verdict_label(event["domain"], event["verdict"], event.get("timestamp", ""))
        self._labels[label.domain] = label
        self._review_verdicts[label.domain] = event["verdict"]
        self.events.append(event)

    def _append_event_line(self, event: dict) -> None:
        if self._log_path is None:
            return
        append_jsonl_line(self._log_path, event)

    # -- persistence -------------------------------------------------------

    def bind_log(self, path: str | Path) -> None:
        """Route future review events to an on-disk JSONL log."""
        self._log_path = Path(path)
        self._log_path.parent.mkdir(parents=True, exist_ok=True)

    def write_snapshot(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["domain", "class", "propaganda", "source"])
            for domain in sorted(self._labels):
                label = self._labels[domain]
                writer.writerow(
                    [label.domain, label.class_, "true" if label.propaganda else "false", label.source]
                )

    def save(self, dir_path: str | Path) -> None:
        """Write snapshot.csv and events.jsonl into a store directory."""
        dir_path = Path(dir_path)
        dir_path.mkdir(parents=True, exist_ok=True)
        self.write_snapshot(dir_path / SNAPSHOT_NAME)
        with open(dir_path / EVENTS_NAME, "w", encoding="utf-8") as fh:
            for event in self.events:
                fh.write(json.dumps(event, sort_keys=True) + "\n")

    @classmethod
    def open(cls, dir_path: str | Path) -> "LabelStore":
        """Rebuild a store from snapshot.csv plus replayed events.jsonl.

        Replay is deterministic: the same snapshot and log always yield
        the same state. The reopened store keeps appending to the same
        event log.
        """
        dir_path = Path(dir_path)
        snapshot = dir_path / SNAPSHOT_NAME
        store = cls.load_labels([snapshot]) if snapshot.exists() else cls()
        events_path = dir_path / EVENTS_NAME
        if events_path.exists():
            with open(events_path, encoding="utf-8") as fh:
                for i, line in enumerate(fh, start=1):
                    line = line.strip()
                    if not line:
                        continue
                    event = json.loads(line)
                    if event.get("verdict") not in VERDICTS:
                        raise LabelParseError(
                            f"{events_path}:{i}: bad verdict {event.get('verdict')!r}", str(events_path), i
                        )
                    # Snapshot rows for earlier reviews are superseded here;
                    # replaying an event is idempotent by construction.
                    store._labels.pop(event["domain"], None)
                    store._review_verdicts.pop(event["domain"], None)
                    store._apply_event(event)
        store.bind_log(events_path)
        return store

    def copy(self) -> "LabelStore":
        out = LabelStore(dict(self._labels))
        out.events = [dict(e) for e in self.events]
        out._review_verdicts = dict(self._review_verdicts)
        return out
