"""Territory-pair citation flows, publication masses and flow reports."""

from __future__ import annotations

import csv
import enum
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .assignment import Attribution, CitingAssignment
from .geodesy import (
    Gazetteer,
    UnknownCountryError,
    country_capital,
    great_circle_distance,
)
from .ingest import CitingRecord

EDGE_FIELDS = ("level", "cited_id", "citing_id", "citations", "distance_km")
MASS_FIELDS = ("role", "territory_id", "mass")
LINK_FIELDS = ("level", "cited_pub", "citing_pub", "cited_id", "citing_id", "distance_km")

CITED_WINDOW = (2010, 2012)
CITING_WINDOW = (2010, 2017)


class AnalysisLevel(str, enum.Enum):
    NATIONAL = "national"
    INTERNATIONAL = "international"


class Partition(str, enum.Enum):
    ALL = "all"
    CONTINENTAL = "continental"
    INTERCONTINENTAL = "intercontinental"


class FlowError(LookupError):
    """A territory referenced by the flows is missing from the gazetteer."""


@dataclass(frozen=True)
class FlowEdge:
    cited_id: str
    citing_id: str
    citations: float
    distance_km: float
    level: AnalysisLevel = AnalysisLevel.NATIONAL

    def __post_init__(self):
        if not self.citations > 0:
            raise ValueError(f"edge {self.cited_id}->{self.citing_id}: non-positive flow {self.citations}")
        if not self.distance_km >= 0:
            raise ValueError(f"edge {self.cited_id}->{self.citing_id}: negative distance")


@dataclass(frozen=True)
class CitationLink:
    """One cited/citing publication pair resolved to territories."""

    cited_pub: str
    citing_pub: str
    cited_id: str
    citing_id: str
    distance_km: float
    level: AnalysisLevel


@dataclass(frozen=True)
class Drop:
    cited_pub: str
    citing_pub: str
    reason: str


@dataclass
class FlowSet:
    level: AnalysisLevel
    partition: Partition
    links: list[CitationLink]
    drops: list[Drop]
    edges: list[FlowEdge] = field(default_factory=list)

    @property
    def total_pairs(self) -> int:
        return len(self.links) + len(self.drops)

    def drop_counts(self) -> dict[str, int]:
        return dict(sorted(Counter(d.reason for d in self.drops).items()))


@dataclass
class MassTable:
    counts: dict[str, int]
    window: tuple[int, int] | None = None

    def __getitem__(self, territory_id):
        return self.counts[territory_id]

    def __contains__(self, territory_id):
        return territory_id in self.counts

    def __len__(self):
        return len(self.counts)

    def get(self, territory_id, default=None):
        return self.counts.get(territory_id, default)

    def merge(self, other: "MassTable") -> "MassTable":
        merged = Counter(self.counts)
        merged.update(other.counts)
        return MassTable(dict(sorted(merged.items())), self.window)


def _in_partition(citing_code, home, partition, g):
    if partition is Partition.ALL:
        return True
    same = g.continent(citing_code) is not None and g.continent(citing_code) == g.continent(home)
    return same if partition is Partition.CONTINENTAL else not same


def citation_links(
    cited_attrs: Mapping[str, Attribution],
    citing_attrs: Mapping[str, CitingAssignment],
    citing_recs: Iterable[CitingRecord],
    level: AnalysisLevel,
    g: Gazetteer,
    home: str = "IT",
    partition: Partition = Partition.ALL,
) -> tuple[list[CitationLink], list[Drop]]:
    """Resolve every (cited, citing) pair to a link or a ledgered drop."""
    level, partition = AnalysisLevel(level), Partition(partition)
    if level is AnalysisLevel.NATIONAL and partition is not Partition.ALL:
        raise ValueError("partition applies to the international level only")
    links, drops = [], []
    dist_cache: dict[tuple[str, str], float] = {}

    for rec in citing_recs:
        seen = set()
        ca = citing_attrs.get(rec.pub_id)
        for cited_pub in rec.cites:
            def drop(reason):
                drops.append(Drop(cited_pub, rec.pub_id, reason))

            if cited_pub in seen:
                drop("duplicate reference")
                continue
            seen.add(cited_pub)
            attr = cited_attrs.get(cited_pub)
            if attr is None:
                drop("cited publication unknown")
                continue
            if not attr.assigned:
                drop("cited unassigned")
                continue
            if ca is None or not ca.country.assigned:
                drop("citing unassigned")
                continue
            cited = attr.territory
            if cited.id not in g:
                raise FlowError(f"territory {cited.id!r} not in gazetteer")
            country = ca.country.territory_id
            if level is AnalysisLevel.NATIONAL:
                if country != home:
                    drop("citing foreign")
                    continue
                if ca.lau is None or not ca.lau.assigned:
                    drop("citing LAU unassigned")
                    continue
                citing = ca.lau.territory
                if citing.id not in g:
                    raise FlowError(f"territory {citing.id!r} not in gazetteer")
                key = (cited.id, citing.id)
                if key not in dist_cache:
                    dist_cache[key] = great_circle_distance(cited.centroid, citing.centroid)
            else:
                if country == home:
                    drop("citing domestic")
                    continue
                if not _in_partition(country, home, partition, g):
                    drop("outside partition")
                    continue
                key = (cited.id, country)
                if key not in dist_cache:
                    try:
                        capital = country_capital(country, g)
                    except UnknownCountryError as exc:
                        raise FlowError(f"territory {country!r} has no capital in gazetteer") from exc
                    dist_cache[key] = great_circle_distance(cited.centroid, capital)
            links.append(CitationLink(cited_pub, rec.pub_id, key[0], key[1], dist_cache[key], level))
    return links, drops


def aggregate_edges(links: Iterable[CitationLink]) -> list[FlowEdge]:
    """Collapse links into one edge per territory pair, sorted by (cited, citing)."""
    counts: Counter = Counter()
    dist, lvl = {}, {}
    for link in links:
        key = (link.cited_id, link.citing_id)
        counts[key] += 1
        dist[key] = link.distance_km
        lvl[key] = link.level
    return [FlowEdge(i, j, counts[(i, j)], dist[(i, j)], lvl[(i, j)]) for i, j in sorted(counts)]


def build_flow_edges(
    cited_attrs: Mapping[str, Attribution],
    citing_attrs: Mapping[str, CitingAssignment],
    citing_recs: Iterable[CitingRecord],
    level: AnalysisLevel,
    g: Gazetteer,
    home: str = "IT",
    partition: Partition = Partition.ALL,
) -> FlowSet:
    links, drops = citation_links(cited_attrs, citing_attrs, citing_recs, level, g, home, partition)
    return FlowSet(AnalysisLevel(level), Partition(partition), links, drops, aggregate_edges(links))


def split_partitions(edges: Sequence[FlowEdge], home: str, g: Gazetteer) -> dict[Partition, list[FlowEdge]]:
    """Divide international edges by whether the citing country shares the home continent."""
    out = {Partition.CONTINENTAL: [], Partition.INTERCONTINENTAL: []}
    for e in edges:
        part = Partition.CONTINENTAL if _in_partition(e.citing_id, home, Partition.CONTINENTAL, g) else Partition.INTERCONTINENTAL
        out[part].append(e)
    return out


def compute_masses(records, attrs: Mapping[str, Attribution], window: tuple[int, int] | None = None) -> MassTable:
    """Publications per territory among attributed records whose year is in ``window`` (inclusive)."""
    if window is not None and window[0] > window[1]:
        raise ValueError(f"malformed window {window}")
    counts: Counter = Counter()
    for rec in records:
        if window is not None and not window[0] <= rec.year <= window[1]:
            continue
        a = attrs.get(rec.pub_id)
        if a is not None and a.assigned:
            counts[a.territory_id] += 1
    return MassTable(dict(sorted(counts.items())), window)


def citing_level_attrs(citing_attrs: Mapping[str, CitingAssignment], level: AnalysisLevel) -> dict[str, Attribution]:
    """Pick the attribution that identifies a citing publication at ``level``."""
    out = {}
    for pub_id, ca in citing_attrs.items():
        if AnalysisLevel(level) is AnalysisLevel.NATIONAL:
            if ca.lau is not None:
                out[pub_id] = ca.lau
        else:
            out[pub_id] = ca.country
    return out


# -- reports -----------------------------------------------------------------


@dataclass(frozen=True)
class PublicationRow:
    pub_id: str
    intl_citations: int
    intl_avg_km: float | None
    nat_citations: int
    nat_avg_km: float | None


@dataclass(frozen=True)
class TerritoryRow:
    territory_id: str
    name: str
    pubs_cited: int
    intl_citations: int
    intl_avg_km: float | None
    nat_citations: int
    nat_avg_km: float | None
    local_only_share: float


def _mean(values):
    values = sorted(values)
    return sum(values) / len(values) if values else None


def publication_report(
    pub_id: str,
    national_links: Iterable[CitationLink],
    international_links: Iterable[CitationLink],
    include_domestic: bool = True,
) -> PublicationRow:
    """Citations received and per-citation mean distance, by analysis level.

    With ``include_domestic`` the international columns also count the
    home-country citations at their LAU distance.
    """
    nat = [l.distance_km for l in national_links if l.cited_pub == pub_id]
    intl = [l.distance_km for l in international_links if l.cited_pub == pub_id]
    if include_domestic:
        intl = intl + nat
    if not nat and not intl:
        raise KeyError(f"unknown publication {pub_id!r}")
    return PublicationRow(pub_id, len(intl), _mean(intl), len(nat), _mean(nat))


def territory_report(
    territory_id: str,
    cited_attrs: Mapping[str, Attribution],
    national_links: Iterable[CitationLink],
    international_links: Iterable[CitationLink],
    include_domestic: bool = True,
) -> TerritoryRow:
    """Aggregate flow figures for one cited territory.

    ``local_only_share`` is the fraction of the territory's cited publications
    whose every citation comes from the territory itself.
    """
    pubs = {p for p, a in cited_attrs.items() if a.territory_id == territory_id}
    if not pubs:
        raise KeyError(f"unknown territory {territory_id!r}")
    name = next(a.territory.name for p, a in cited_attrs.items() if p in pubs)
    nat = [l for l in national_links if l.cited_pub in pubs]
    intl = [l for l in international_links if l.cited_pub in pubs]
    citing_by_pub = defaultdict(set)
    for l in nat + intl:
        citing_by_pub[l.cited_pub].add(l.citing_id)
    if not citing_by_pub:
        raise KeyError(f"territory {territory_id!r} has no cited publications")
    local = sum(1 for s in citing_by_pub.values() if s == {territory_id})
    intl_d = [l.distance_km for l in intl] + ([l.distance_km for l in nat] if include_domestic else [])
    return TerritoryRow(
        territory_id,
        name,
        len(citing_by_pub),
        len(intl_d),
        _mean(intl_d),
        len(nat),
        _mean([l.distance_km for l in nat]),
        local / len(citing_by_pub),
    )


def _fmt_km(v):
    return "" if v is None else f"{v:.0f}"


PUBLICATION_HEADERS = ("pub_id", "intl_citations", "intl_avg_km", "nat_citations", "nat_avg_km")
TERRITORY_HEADERS = (
    "territory_id", "name", "pubs_cited", "intl_citations", "intl_avg_km",
    "nat_citations", "nat_avg_km", "local_only_share",
)


def _cells(row):
    if isinstance(row, PublicationRow):
        return [row.pub_id, str(row.intl_citations), _fmt_km(row.intl_avg_km), str(row.nat_citations), _fmt_km(row.nat_avg_km)]
    return [
        row.territory_id, row.name, str(row.pubs_cited), str(row.intl_citations), _fmt_km(row.intl_avg_km),
        str(row.nat_citations), _fmt_km(row.nat_avg_km), f"{100 * row.local_only_share:.1f}%",
    ]


def render_table(headers: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h) for i, h in enumerate(headers)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    for r in rows:
        lines.append("  ".join(c.rjust(w) if i else c.ljust(w) for i, (c, w) in enumerate(zip(r, widths))).rstrip())
    return "\n".join(lines) + "\n"


def report_text(rows) -> str:
    rows = list(rows)
    headers = TERRITORY_HEADERS if rows and isinstance(rows[0], TerritoryRow) else PUBLICATION_HEADERS
    return render_table(headers, [_cells(r) for r in rows])


def write_report_csv(fh, rows) -> None:
    rows = list(rows)
    headers = TERRITORY_HEADERS if rows and isinstance(rows[0], TerritoryRow) else PUBLICATION_HEADERS
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(headers)
    for r in rows:
        vals = [getattr(r, h) for h in headers]
        w.writerow(["" if v is None else (f"{v:.6f}" if isinstance(v, float) else v) for v in vals])


# -- flat-file formats --------------------------------------------------------


def _num(v):
    if isinstance(v, float) and v.is_integer() and abs(v) < 2**53:
        return str(int(v))
    return repr(v) if isinstance(v, float) else str(v)


def write_edges(fh, edges: Iterable[FlowEdge]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(EDGE_FIELDS)
    for e in edges:
        w.writerow([AnalysisLevel(e.level).value, e.cited_id, e.citing_id, _num(e.citations), repr(float(e.distance_km))])


def read_edges(fh) -> list[FlowEdge]:
    reader = csv.DictReader(fh)
    missing = [c for c in EDGE_FIELDS if c not in (reader.fieldnames or [])]
    if missing:
        raise ValueError(f"edges file missing columns {missing}")
    edges = []
    for row in reader:
        c = float(row["citations"])
        edges.append(
            FlowEdge(row["cited_id"], row["citing_id"], int(c) if c.is_integer() else c,
                     float(row["distance_km"]), AnalysisLevel(row["level"]))
        )
    return edges


def write_masses(fh, cited: MassTable, citing: MassTable) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(MASS_FIELDS)
    for role, table in (("cited", cited), ("citing", citing)):
        for tid, m in sorted(table.counts.items()):
            w.writerow([role, tid, _num(m)])


def read_masses(fh) -> tuple[MassTable, MassTable]:
    reader = csv.DictReader(fh)
    missing = [c for c in MASS_FIELDS if c not in (reader.fieldnames or [])]
    if missing:
        raise ValueError(f"masses file missing columns {missing}")
    tables = {"cited": {}, "citing": {}}
    for row in reader:
        if row["role"] not in tables:
            raise ValueError(f"unknown mass role {row['role']!r}")
        m = float(row["mass"])
        tables[row["role"]][row["territory_id"]] = int(m) if m.is_integer() else m
    return MassTable(tables["cited"]), MassTable(tables["citing"])


def write_links(fh, links: Iterable[CitationLink]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(LINK_FIELDS)
    for l in links:
        w.writerow([l.level.value, l.cited_pub, l.citing_pub, l.cited_id, l.citing_id, repr(float(l.distance_km))])


def read_links(fh) -> list[CitationLink]:
    return [
        CitationLink(r["cited_pub"], r["citing_pub"], r["cited_id"], r["citing_id"],
                     float(r["distance_km"]), AnalysisLevel(r["level"]))
        for r in csv.DictReader(fh)
    ]


def write_drops(fh, drops: Iterable[Drop]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(("cited_pub", "citing_pub", "reason"))
    for d in drops:
        w.writerow([d.cited_pub, d.citing_pub, d.reason])
