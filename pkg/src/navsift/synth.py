"""Seeded synthetic traffic generator with planted communities.

The generator emits monthly referrer records over a fixed population:
labeled misinformation domains (a propaganda subset forms a denser
sub-community), authoritative domains, planted *unlabeled* look-alike
misinformation domains, and benign unlabeled domains. Misinformation
domains route most outbound mass inside their community, authoritative
and benign domains send almost none there, and search/social hubs refer
traffic to everyone. In-community edge weights are floored at the edge
threshold so the community always survives graph building.

Two deliberately confusable sub-populations make deployment realistic:
a slice of misinformation domains has no in-community traffic at all
and lives off one search engine's referrals, and a slice of benign
domains shares that same inbound profile. Labeled training data never
covers the benign slice, which is exactly why candidate filtering beats
scanning the whole graph. Each labeled community member also keeps a
few standing floor-weight links with mainstream domains (fact-check
patterns), so mere adjacency is noisy while traffic shares stay
discriminative, and the touched slice of the web stays small.

Months are i.i.d. redraws sharing the population structure. The same
seed always yields byte-identical record files.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from navsift.ingest import TrafficRecord
from navsift.labels import DomainLabel

CONFIG_VERSION = 1
EDGE_FLOOR = 3000

START_YEAR = 2022
START_MONTH = 10

# Population-structure constants. These are part of the generator's design
# rather than per-run configuration.
FRINGE_SHARE = 0.10          # misinformation domains fed by search, no community ties
DDG_TAIL_SHARE = 0.015       # benign domains with the same search-fed inbound profile
CURIOUS_SHARE = 0.02         # benign domains sending a real slice of traffic to misinfo
OUT_HUB_SHARE = 0.06         # outbound mass any domain sends back to a search engine
PROP_CONCENTRATION = 0.75    # propaganda intra mass kept inside the propaganda subset
CROSS_LINK_LO = 1            # standing mainstream links per labeled domain, each direction
CROSS_LINK_HI = 3
CROSS_LINK_KEEP = 0.9        # chance a standing cross link carries traffic in a month

SEARCH_HUBS = ("google.com", "bing.com", "duckduckgo.com")
SOCIAL_HUBS = (("facebook.com", 0.7), ("twitter.com", 0.3))
NEWS_HUB = "news.google.com"
MAIL_HUB = "gmail.com"


@dataclass(frozen=True)
class SynthConfig:
    """Population sizes and routing knobs for one synthetic world."""

    n_misinformation: int
    n_propaganda: int
    n_authoritative: int
    n_unlabeled_misinfo: int
    n_benign_unlabeled: int
    months: int = 3
    intra_misinfo_share: float = 0.78
    search_referral_share: float = 0.25
    social_referral_share: float = 0.15
    traffic_scale: int = 40000
    seed: int = 7
    n_unlabeled_propaganda: int = 0

    def __post_init__(self):
        for name in (
            "n_misinformation",
            "n_propaganda",
            "n_authoritative",
            "n_unlabeled_misinfo",
            "n_benign_unlabeled",
            "n_unlabeled_propaganda",
        ):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.n_propaganda > self.n_misinformation:
            raise ValueError("n_propaganda cannot exceed n_misinformation")
        if self.n_unlabeled_propaganda > self.n_unlabeled_misinfo:
            raise ValueError("n_unlabeled_propaganda cannot exceed n_unlabeled_misinfo")
        if self.months < 1:
            raise ValueError(f"months must be >= 1, got {self.months}")
        if not 0.0 <= self.intra_misinfo_share <= 0.92:
            raise ValueError("intra_misinfo_share must be within [0, 0.92]")
        if self.search_referral_share < 0 or self.social_referral_share < 0:
            raise ValueError("referral shares must be >= 0")
        if self.search_referral_share + self.social_referral_share > 1.0:
            raise ValueError("search and social referral shares must sum to <= 1")
        if self.traffic_scale < EDGE_FLOOR:
            raise ValueError(f"traffic_scale must be >= {EDGE_FLOOR}")

    @classmethod
    def from_json(cls, path: str | Path) -> "SynthConfig":
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        version = doc.pop("config_version", CONFIG_VERSION)
        if version != CONFIG_VERSION:
            raise ValueError(f"{path}: unsupported config_version {version}")
        return cls(**doc)

    def to_json(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        doc = {"config_version": CONFIG_VERSION, **asdict(self)}
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")


@dataclass
class SynthResult:
    config: SynthConfig
    months: list[str]
    records_by_month: dict[str, list[TrafficRecord]]
    labels: list[DomainLabel]
    truth: dict[str, str]
    planted_misinformation: tuple[str, ...]
    planted_propaganda: tuple[str, ...]

    @property
    def records(self) -> list[TrafficRecord]:
        out: list[TrafficRecord] = []
        for month in self.months:
            out.extend(self.records_by_month[month])
        return out


def month_names(n: int) -> list[str]:
    out = []
    for i in range(n):
        total = (START_MONTH - 1) + i
        out.append(f"{START_YEAR + total // 12}-{total % 12 + 1:02d}")
    return out


class _Population:
    """Static structure shared by every month: names, classes, and roles."""

    def __init__(self, config: SynthConfig):
        c = config
        names: list[str] = []
        kinds: list[str] = []

        def add(count: int, pattern: str, kind: str) -> None:
            for i in range(count):
                names.append(pattern.format(i))
                kinds.append(kind)

        add(c.n_propaganda, "prop{0:04d}.example", "prop_labeled")
        add(c.n_misinformation - c.n_propaganda, "misinfo{0:04d}.example", "mis_labeled")
        add(c.n_unlabeled_propaganda, "unknown{0:04d}.example", "prop_planted")
        for i in range(c.n_unlabeled_propaganda, c.n_unlabeled_misinfo):
            names.append(f"unknown{i:04d}.example")
            kinds.append("mis_planted")
        add(c.n_authoritative, "press{0:04d}.example", "auth")
        add(c.n_benign_unlabeled, "site{0:04d}.example", "benign")

        self.names = np.array(names)
        self.kinds = np.array(kinds)
        n = len(names)
        self.community = np.isin(self.kinds, ("prop_labeled", "mis_labeled", "prop_planted", "mis_planted"))
        self.prop_like = np.isin(self.kinds, ("prop_labeled", "prop_planted"))
        self.labeled_mis = np.isin(self.kinds, ("prop_labeled", "mis_labeled"))
        benign = self.kinds == "benign"

        rng = np.random.default_rng(np.random.SeedSequence((c.seed, 0)))
        # role draws happen in one fixed order so months can share them.
        # Only the loosely organized general community has a search-fed
        # fringe; propaganda operations keep every member wired in.
        general = self.community & ~self.prop_like
        self.fringe = np.zeros(n, dtype=bool)
        self.fringe[general] = rng.random(int(general.sum())) < FRINGE_SHARE
        self.intra = np.zeros(n)
        jitter = rng.uniform(0.9, 1.1, size=int(self.community.sum()))
        self.intra[self.community] = np.minimum(jitter * c.intra_misinfo_share, 0.92)

        u = rng.random(int(benign.sum()))
        self.ddg_tail = np.zeros(n, dtype=bool)
        self.ddg_tail[benign] = u < DDG_TAIL_SHARE
        curious = np.zeros(n, dtype=bool)
        curious[benign] = (u >= DDG_TAIL_SHARE) & (u < DDG_TAIL_SHARE + CURIOUS_SHARE)
        self.curious_frac = np.zeros(n)
        self.curious_frac[benign] = rng.uniform(0.08, 0.2, size=int(benign.sum()))
        self.curious_frac[~curious] = 0.0

        searchy = self.ddg_tail | (self.fringe & self.community)
        base_alpha = np.where(searchy[:, None], (1.0, 1.0, 12.0), (8.0, 2.0, 1.0))
        gammas = rng.gamma(base_alpha)
        self.engine_pref = gammas / gammas.sum(axis=1, keepdims=True)
        self.hub_mult = rng.uniform(0.7, 1.3, size=n)
        self.hub_mult[searchy] *= 2.0
        # wired-in community members live off each other, not off search:
        # referral inbound shrinks so intra traffic dominates their inbound mix
        self.hub_mult[self.community & ~self.fringe] *= 0.6
        self.social_mult = np.where(searchy, 0.3, 1.0)
        self.size_mult = np.where(searchy, 0.4, 1.0)
        self.searchy = searchy

        core = self.community & ~self.fringe
        self.core_community = np.nonzero(core)[0]
        self.core_prop = np.nonzero(core & self.prop_like)[0]
        self.labeled_core = np.nonzero(core & self.labeled_mis)[0]
        # intra destinations prefer established (labeled) members 2:1 over
        # newer planted ones, mirroring how links accrete toward old sites
        self.general_targets = _weighted_pool(core & ~self.prop_like, self.labeled_mis)
        self.prop_targets = _weighted_pool(core & self.prop_like, self.labeled_mis)
        self.community_targets = _weighted_pool(core, self.labeled_mis)
        # mainstream destination pool: search-fed slices receive hub traffic only
        self.pool = np.nonzero((self.kinds == "auth") | (benign & ~self.ddg_tail))[0]
        self.mainstream = (self.kinds == "auth") | (benign & ~self.ddg_tail & ~curious)

        # Standing cross links are fixed here, not redrawn per month: a
        # fact-check article keeps referring trickle traffic for as long
        # as it stays up. Scaling them per labeled member rather than per
        # mainstream domain keeps community adjacency a thin slice of the
        # web no matter how large the benign population grows.
        mainstream_idx = np.nonzero(self.mainstream)[0]
        links: list[tuple[int, int]] = []
        if len(mainstream_idx) > 0:
            for j in self.labeled_core:
                for _ in range(int(rng.integers(CROSS_LINK_LO, CROSS_LINK_HI + 1))):
                    m = int(mainstream_idx[rng.integers(0, len(mainstream_idx))])
                    links.append((m, int(j)))
                for _ in range(int(rng.integers(CROSS_LINK_LO, CROSS_LINK_HI + 1))):
                    m = int(mainstream_idx[rng.integers(0, len(mainstream_idx))])
                    links.append((int(j), m))
        self.cross_links = tuple(links)


def _weighted_pool(members: np.ndarray, labeled: np.ndarray) -> np.ndarray:
    """Index pool where labeled members appear twice as often as others."""
    idx = np.nonzero(members)[0]
    doubled = idx[labeled[idx]]
    return np.sort(np.concatenate([idx, doubled]))


def _spread(rng, month, src_idx, mass, pool, names, out, floor, n_lo=2, n_hi=4):
    """Split `mass` across a few distinct pool members, excluding the source."""
    if mass <= 0 or len(pool) == 0:
        return
    if not floor and mass < EDGE_FLOOR:
        return
    n = int(rng.integers(n_lo, n_hi + 1)) if n_hi > n_lo else n_lo
    draw = rng.integers(0, len(pool), size=n + 3)
    targets: list[int] = []
    for t in draw:
        ti = int(pool[t])
        if ti == src_idx or ti in targets:
            continue
        targets.append(ti)
        if len(targets) == n:
            break
    if not targets:
        if not floor:
            return
        for ti in pool:  # deterministic fallback keeps the community connected
            if int(ti) != src_idx:
                targets = [int(ti)]
                break
        if not targets:
            return
    weights = rng.dirichlet(np.ones(len(targets))) * mass
    src = names[src_idx]
    for ti, w in zip(targets, weights):
        wi = int(round(w))
        if floor:
            wi = max(wi, EDGE_FLOOR)
        if wi >= EDGE_FLOOR:
            out.append(TrafficRecord(month, src, names[ti], wi))


def _one_month(config: SynthConfig, pop: _Population, month: str, month_index: int) -> list[TrafficRecord]:
    rng = np.random.default_rng(np.random.SeedSequence((config.seed, 1000 + month_index)))
    n = len(pop.names)
    vols = config.traffic_scale * (0.4 + rng.pareto(2.2, size=n)) * pop.size_mult
    out: list[TrafficRecord] = []
    for i in range(n):
        name = pop.names[i]
        vol = float(vols[i])
        hub_mass = OUT_HUB_SHARE * vol
        if hub_mass >= EDGE_FLOOR:
            engine = int(np.searchsorted(np.cumsum(pop.engine_pref[i]), rng.random()))
            out.append(TrafficRecord(month, name, SEARCH_HUBS[min(engine, 2)], int(round(hub_mass))))
        rest = vol - hub_mass
        if pop.community[i] and not pop.fringe[i]:
            intra_mass = pop.intra[i] * vol
            rest -= intra_mass
            if pop.prop_like[i]:
                _spread(rng, month, i, intra_mass * PROP_CONCENTRATION, pop.prop_targets, pop.names, out, floor=True, n_lo=2, n_hi=4)
                _spread(rng, month, i, intra_mass * (1 - PROP_CONCENTRATION), pop.community_targets, pop.names, out, floor=True, n_lo=2, n_hi=3)
            else:
                # degree varies widely (one link blogs up to well-wired hubs)
                # so neighbor counts stay coarse while shares stay clean
                _spread(rng, month, i, intra_mass, pop.general_targets, pop.names, out, floor=True, n_lo=1, n_hi=8)
        elif pop.curious_frac[i] > 0:
            cur_mass = pop.curious_frac[i] * vol
            rest -= cur_mass
            _spread(rng, month, i, cur_mass, pop.labeled_core, pop.names, out, floor=False, n_lo=1, n_hi=1)
        _spread(rng, month, i, rest, pop.pool, pop.names, out, floor=False, n_lo=2, n_hi=4)

        in_base = vol * pop.hub_mult[i]
        search_mass = config.search_referral_share * in_base
        for e, hub in enumerate(SEARCH_HUBS):
            w = search_mass * pop.engine_pref[i][e]
            if w >= EDGE_FLOOR:
                out.append(TrafficRecord(month, hub, name, int(round(w))))
        social_mass = config.social_referral_share * in_base * pop.social_mult[i]
        for hub, frac in SOCIAL_HUBS:
            w = social_mass * frac
            if w >= EDGE_FLOOR:
                out.append(TrafficRecord(month, hub, name, int(round(w))))
        if pop.mainstream[i]:
            if rng.random() < 0.3:
                w = 0.08 * in_base
                if w >= EDGE_FLOOR:
                    out.append(TrafficRecord(month, NEWS_HUB, name, int(round(w))))
            if rng.random() < 0.2:
                w = 0.05 * in_base
                if w >= EDGE_FLOOR:
                    out.append(TrafficRecord(month, MAIL_HUB, name, int(round(w))))

    # standing fact-check style links: adjacency counts get noisy while
    # traffic shares stay clean, since the weights sit right at the floor
    for src, dst in pop.cross_links:
        if rng.random() >= CROSS_LINK_KEEP:
            continue
        w = int(rng.integers(EDGE_FLOOR, EDGE_FLOOR + 1200))
        out.append(TrafficRecord(month, pop.names[src], pop.names[dst], w))
    return out


def generate(config: SynthConfig) -> SynthResult:
    """Build the population once and emit every month's records."""
    pop = _Population(config)
    months = month_names(config.months)
    records_by_month = {
        month: _one_month(config, pop, month, mi) for mi, month in enumerate(months)
    }

    labels: list[DomainLabel] = []
    truth: dict[str, str] = {}
    planted_mis: list[str] = []
    planted_prop: list[str] = []
    for name, kind in zip(pop.names, pop.kinds):
        if kind == "prop_labeled":
            labels.append(DomainLabel(name, "misinformation", True, "synthetic"))
            truth[name] = "propaganda"
        elif kind == "mis_labeled":
            labels.append(DomainLabel(name, "misinformation", False, "synthetic"))
            truth[name] = "misinformation"
        elif kind == "auth":
            labels.append(DomainLabel(name, "authoritative", False, "synthetic"))
            truth[name] = "authoritative"
        elif kind == "prop_planted":
            truth[name] = "propaganda"
            planted_prop.append(name)
            planted_mis.append(name)
        elif kind == "mis_planted":
            truth[name] = "misinformation"
            planted_mis.append(name)
        else:
            truth[name] = "authoritative"
    return SynthResult(
        config=config,
        months=months,
        records_by_month=records_by_month,
        labels=labels,
        truth=truth,
        planted_misinformation=tuple(planted_mis),
        planted_propaganda=tuple(planted_prop),
    )


def write_logs_csv(result: SynthResult, path: str | Path) -> None:
    from navsift.ingest import write_records_csv

    write_records_csv(result.records, path)


def write_labels_csv(result: SynthResult, path: str | Path) -> None:
    import csv

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["domain", "class", "propaganda", "source"])
        for label in sorted(result.labels, key=lambda l: l.domain):
            writer.writerow(
                [label.domain, label.class_, "true" if label.propaganda else "false", label.source]
            )


def write_truth_csv(result: SynthResult, path: str | Path) -> None:
    import csv

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["domain", "class"])
        for domain in sorted(result.truth):
            writer.writerow([domain, result.truth[domain]])


def read_truth_csv(path: str | Path) -> dict[str, str]:
    import csv

    truth: dict[str, str] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"domain", "class"} <= set(reader.fieldnames):
            raise ValueError(f"{path}: truth CSV needs columns domain,class")
        for row in reader:
            truth[row["domain"].strip()] = row["class"].strip()
    return truth
