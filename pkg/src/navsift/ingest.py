"""Parse raw referrer logs into monthly aggregated traffic records.

Input rows carry (month, referrer, target, page_views) in CSV or JSONL
form; a `timestamp` column may stand in for `month` and is bucketed to
YYYY-MM. Domains are canonicalized (lowercase, scheme/port/path stripped),
optionally alias-mapped, and malformed rows are counted rather than fatal.
"""

from __future__ import annotations

import csv
import json
import logging
import re
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path

from navsift.errors import EmptyInputError

logger = logging.getLogger(__name__)

MONTH_RE = re.compile(r"^\d{4}-(0[1-9]|1[0-2])$")
DOMAIN_RE = re.compile(r"^[a-z0-9._-]+$")

DEFAULT_PRIVACY_FLOOR = 3000


@dataclass(frozen=True)
class TrafficRecord:
    """One observed (or aggregated) referrer->target flow in a month."""

    month: str
    referrer: str
    target: str
    page_views: int


@dataclass
class ParseResult:
    records: list[TrafficRecord]
    total_rows: int
    malformed: int
    malformed_samples: list[str]


def canonical_domain(raw: str) -> str:
    """Normalize a raw host string: lowercase, strip scheme, port, path."""
    s = raw.strip().lower()
    if "://" in s:
        s = s.split("://", 1)[1]
    for sep in ("/", "?", "#"):
        s = s.split(sep, 1)[0]
    if "@" in s:
        s = s.rsplit("@", 1)[1]
    s = s.split(":", 1)[0]
    return s.rstrip(".")


def load_aliases(path: str | Path) -> dict[str, str]:
    """Read a host alias table: CSV with header from_host,to_host."""
    aliases: dict[str, str] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"from_host", "to_host"} <= set(reader.fieldnames):
            raise ValueError(f"alias file {path} must have columns from_host,to_host")
        for row in reader:
            src = canonical_domain(row["from_host"])
            dst = canonical_domain(row["to_host"])
            if src and dst:
                aliases[src] = dst
    return aliases


def _bucket_month(raw: str) -> str | None:
    """Reduce an ISO date or datetime to YYYY-MM; None if unparseable."""
    s = raw.strip()
    if MONTH_RE.match(s):
        return s
    m = s[:7]
    if MONTH_RE.match(m) and (len(s) == 7 or (len(s) > 7 and s[7] in "-T ")):
        return m
    return None


def _make_record(month_raw, referrer_raw, target_raw, views_raw, aliases) -> TrafficRecord | str:
    """Build one record, or return a short reason string when malformed."""
    if month_raw is None or referrer_raw is None or target_raw is None or views_raw is None:
        return "missing field"
    month = _bucket_month(str(month_raw))
    if month is None:
        return f"bad month {month_raw!r}"
    try:
        views = int(str(views_raw).strip())
    except (TypeError, ValueError):
        return f"bad page_views {views_raw!r}"
    if views < 1:
        return f"non-positive page_views {views}"
    referrer = canonical_domain(str(referrer_raw))
    target = canonical_domain(str(target_raw))
    if aliases:
        referrer = aliases.get(referrer, referrer)
        target = aliases.get(target, target)
    if not referrer or not DOMAIN_RE.match(referrer):
        return f"bad referrer {referrer_raw!r}"
    if not target or not DOMAIN_RE.match(target):
        return f"bad target {target_raw!r}"
    if referrer == target:
        return f"self referral {referrer!r}"
    return TrafficRecord(month=month, referrer=referrer, target=target, page_views=views)


def parse_log(
    path: str | Path,
    fmt: str | None = None,
    aliases: dict[str, str] | None = None,
) -> ParseResult:
    """Parse a CSV or JSONL referrer log.

    Args:
        path: input file. Format inferred from the suffix unless `fmt`
            ("csv" or "jsonl") is given.
        aliases: optional canonical-host mapping applied after
            canonicalization.

    Raises:
        EmptyInputError: if no row parses into a valid record.
    """
    path = Path(path)
    if fmt is None:
        fmt = "jsonl" if path.suffix in (".jsonl", ".ndjson", ".json") else "csv"
    if fmt not in ("csv", "jsonl"):
        raise ValueError(f"unknown log format {fmt!r}")

    records: list[TrafficRecord] = []
    total = 0
    malformed = 0
    samples: list[str] = []

    def note(line_no: int, reason: str) -> None:
        nonlocal malformed
        malformed += 1
        if len(samples) < 10:
            samples.append(f"line {line_no}: {reason}")

    with open(path, newline="", encoding="utf-8") as fh:
        if fmt == "csv":
            reader = csv.DictReader(fh)
            fields = set(reader.fieldnames or ())
            if not {"referrer", "target", "page_views"} <= fields or not ({"month", "timestamp"} & fields):
                raise ValueError(
                    f"{path}: CSV needs columns month (or timestamp), referrer, target, page_views"
                )
            for line_no, row in enumerate(reader, start=2):
                total += 1
                got = _make_record(
                    row.get("month") or row.get("timestamp"),
                    row.get("referrer"),
                    row.get("target"),
                    row.get("page_views"),
                    aliases,
                )
                if isinstance(got, TrafficRecord):
                    records.append(got)
                else:
                    note(line_no, got)
        else:
            for line_no, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                total += 1
                try:
                    row = json.loads(line)
                except json.JSONDecodeError:
                    note(line_no, "invalid json")
                    continue
                if not isinstance(row, dict):
                    note(line_no, "not an object")
                    continue
                got = _make_record(
                    row.get("month", row.get("timestamp")),
                    row.get("referrer"),
                    row.get("target"),
                    row.get("page_views"),
                    aliases,
                )
                if isinstance(got, TrafficRecord):
                    records.append(got)
                else:
                    note(line_no, got)

    if not records:
        raise EmptyInputError(f"{path}: no valid traffic rows (saw {total}, malformed {malformed})")
    if malformed:
        logger.warning("%s: skipped %d malformed of %d rows", path, malformed, total)
    return ParseResult(records=records, total_rows=total, malformed=malformed, malformed_samples=samples)


def aggregate_month(records) -> dict[str, list[TrafficRecord]]:
    """Group records by month and sum views per (referrer, target) pair.

    Output is deterministic: months ascending, records sorted by
    (referrer, target), one record per pair.
    """
    sums: dict[str, dict[tuple[str, str], int]] = defaultdict(lambda: defaultdict(int))
    for r in records:
        sums[r.month][(r.referrer, r.target)] += r.page_views
    out: dict[str, list[TrafficRecord]] = {}
    for month in sorted(sums):
        out[month] = [
            TrafficRecord(month=month, referrer=ref, target=tgt, page_views=views)
            for (ref, tgt), views in sorted(sums[month].items())
        ]
    return out


def _floor_survivors(month_records: list[TrafficRecord], floor: int, counting: str) -> list[TrafficRecord]:
    recs = month_records
    # A domain dropping out can pull a neighbor's total under the floor,
    # so filter repeatedly until stable; this also makes the op idempotent.
    while True:
        totals: dict[str, int] = defaultdict(int)
        for r in recs:
            if counting == "total":
                totals[r.referrer] += r.page_views
                totals[r.target] += r.page_views
            else:
                totals[r.target] += r.page_views
        keep = {d for d, t in totals.items() if t > floor}
        nxt = [r for r in recs if r.referrer in keep and r.target in keep]
        if len(nxt) == len(recs):
            return nxt
        recs = nxt


def apply_privacy_floor(
    records,
    floor: int = DEFAULT_PRIVACY_FLOOR,
    counting: str = "total",
) -> list[TrafficRecord]:
    """Drop domains whose monthly traffic does not exceed `floor`.

    A domain survives a month only when its traffic that month is
    strictly greater than the floor; all records incident to dropped
    domains are removed. `counting` selects the traffic definition:
    "total" (inbound plus outbound, the default) or "inbound".
    """
    if floor < 1:
        raise ValueError(f"privacy floor must be >= 1, got {floor}")
    if counting not in ("total", "inbound"):
        raise ValueError(f"counting must be 'total' or 'inbound', got {counting!r}")
    by_month: dict[str, list[TrafficRecord]] = defaultdict(list)
    order: list[str] = []
    for r in records:
        if r.month not in by_month:
            order.append(r.month)
        by_month[r.month].append(r)
    out: list[TrafficRecord] = []
    for month in order:
        out.extend(_floor_survivors(by_month[month], floor, counting))
    return out


def write_records_csv(records, path: str | Path) -> None:
    """Write records in the ingest CSV format (month,referrer,target,page_views)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["month", "referrer", "target", "page_views"])
        for r in records:
            writer.writerow([r.month, r.referrer, r.target, r.page_views])
