"""Attribute each publication to a single prevalent territory.

Cited publications use fractional author counting: every author carries a
unit weight split evenly over the distinct territories of their
affiliations. Citing publications only have an address list, so every
address counts once (no deduplication by default). In both cases a strict
maximum is required; ties leave the publication unassigned.
"""

from __future__ import annotations

import csv
import enum
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Mapping

from .geodesy import Gazetteer, Level, Territory, default_gazetteer
from .ingest import CitedRecord, CitingRecord, locate_address

ATTRIBUTION_FIELDS = ("pub_id", "level", "territory_id", "share", "basis")


class Basis(str, enum.Enum):
    AUTHOR_FRACTIONAL = "AUTHOR_FRACTIONAL"
    ADDRESS_FREQUENCY = "ADDRESS_FREQUENCY"


@dataclass(frozen=True)
class Attribution:
    pub_id: str
    territory: Territory | None
    share: Fraction | None
    basis: Basis
    level: Level = Level.LAU
    reason: str | None = None
    weights: Mapping[str, Fraction] = field(default_factory=dict, compare=False, repr=False)

    @property
    def assigned(self) -> bool:
        return self.territory is not None

    @property
    def territory_id(self) -> str | None:
        return None if self.territory is None else self.territory.id


@dataclass(frozen=True)
class CitingAssignment:
    """Country-level attribution plus, for home-country publications, the LAU one."""

    country: Attribution
    lau: Attribution | None = None


def _argmax(weights: Mapping[Hashable, Fraction]):
    """Strict argmax; returns (key, weight) or (None, weight) on a tie, (None, None) if empty."""
    if not weights:
        return None, None
    best = max(weights.values())
    winners = [k for k, w in weights.items() if w == best]
    if len(winners) > 1:
        return None, best
    return winners[0], best


def author_weights(rec: CitedRecord, locate: Callable[[str], str | None]):
    """Summed fractional author weight per location key, and the count of located authors."""
    weights: dict[str, Fraction] = defaultdict(Fraction)
    located = 0
    for author in rec.authors:
        keys = {locate(rec.affiliations[i]) for i in set(author.affil_idx)}
        keys.discard(None)
        if not keys:
            continue
        located += 1
        part = Fraction(1, len(keys))
        for key in keys:
            weights[key] += part
    return dict(weights), located


def _lau_locator(g: Gazetteer):
    def locate(raw):
        hit = locate_address(raw, g)
        if hit is None or hit[1] is None:
            return None
        return hit[1].id

    return locate


def _country_locator(g: Gazetteer):
    def locate(raw):
        hit = locate_address(raw, g)
        if hit is None or hit[0] not in g:
            return None
        return hit[0]

    return locate


def _fractional(rec, g, locate, level, home=None) -> Attribution:
    weights, n = author_weights(rec, locate)
    base = dict(pub_id=rec.pub_id, basis=Basis.AUTHOR_FRACTIONAL, level=level, weights=weights)
    winner, best = _argmax(weights)
    if best is None:
        return Attribution(territory=None, share=None, reason="no located affiliation", **base)
    if winner is None:
        return Attribution(territory=None, share=None, reason="tie", **base)
    territory = g.get(winner)
    if home is not None and territory.country_code != home:
        return Attribution(territory=None, share=None, reason="foreign winner", **base)
    return Attribution(territory=territory, share=best / n, **base)


def prevalent_territory_cited(rec: CitedRecord, g: Gazetteer | None = None, home: str | None = None) -> Attribution:
    """LAU with the greatest fractional share of authors.

    All territories compete, foreign ones included; with ``home`` set, a
    foreign winner is reported as unassigned.
    """
    g = g or default_gazetteer()
    return _fractional(rec, g, _lau_locator(g), Level.LAU, home)


def prevalent_country_cited(rec: CitedRecord, g: Gazetteer | None = None) -> Attribution:
    """Country with the greatest fractional share of authors."""
    g = g or default_gazetteer()
    return _fractional(rec, g, _country_locator(g), Level.COUNTRY)


def _frequency(pub_id, keys: list, g, level) -> Attribution:
    counts = Counter(k for k in keys if k is not None)
    weights = {k: Fraction(v) for k, v in counts.items()}
    base = dict(pub_id=pub_id, basis=Basis.ADDRESS_FREQUENCY, level=level, weights=weights)
    winner, best = _argmax(weights)
    if best is None:
        return Attribution(territory=None, share=None, reason="no located address", **base)
    if winner is None:
        return Attribution(territory=None, share=None, reason="tie", **base)
    return Attribution(territory=g.get(winner), share=best / sum(counts.values()), **base)


def _addresses(rec: CitingRecord, dedupe: bool):
    return list(dict.fromkeys(rec.addresses)) if dedupe else list(rec.addresses)


def prevalent_country_citing(rec: CitingRecord, g: Gazetteer | None = None, dedupe: bool = False) -> Attribution:
    """Most frequent country over the address list, full counting."""
    g = g or default_gazetteer()
    locate = _country_locator(g)
    return _frequency(rec.pub_id, [locate(a) for a in _addresses(rec, dedupe)], g, Level.COUNTRY)


def prevalent_lau_citing(
    rec: CitingRecord, home: str, g: Gazetteer | None = None, dedupe: bool = False
) -> Attribution:
    """Most frequent LAU among the home-country addresses.

    Raises ValueError when the record's prevalent country is not ``home``.
    """
    g = g or default_gazetteer()
    country = prevalent_country_citing(rec, g, dedupe)
    if country.territory_id != home:
        raise ValueError(f"{rec.pub_id}: prevalent country is {country.territory_id}, not {home}")
    keys = []
    for raw in _addresses(rec, dedupe):
        hit = locate_address(raw, g)
        if hit is not None and hit[0] == home and hit[1] is not None:
            keys.append(hit[1].id)
    return _frequency(rec.pub_id, keys, g, Level.LAU)


def assign_citing(rec: CitingRecord, home: str, g: Gazetteer | None = None, dedupe: bool = False) -> CitingAssignment:
    g = g or default_gazetteer()
    country = prevalent_country_citing(rec, g, dedupe)
    if country.territory_id == home:
        return CitingAssignment(country, prevalent_lau_citing(rec, home, g, dedupe))
    return CitingAssignment(country)


def convention_agreement(pairs: Iterable[tuple[CitedRecord, CitingRecord]], g: Gazetteer | None = None) -> float:
    """Share of publications whose two conventions name the same country.

    Each item pairs the author-linked view of a publication with its bare
    address list. Two unassigned results agree; one unassigned does not.
    """
    g = g or default_gazetteer()
    total = agree = 0
    for cited, citing in pairs:
        total += 1
        a = prevalent_country_cited(cited, g).territory_id
        b = prevalent_country_citing(citing, g).territory_id
        agree += a == b
    if total == 0:
        raise ValueError("empty sample")
    return agree / total


def write_attributions(fh, attributions: Iterable[Attribution]) -> int:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(ATTRIBUTION_FIELDS)
    n = 0
    for a in attributions:
        share = "" if a.share is None else f"{float(a.share):.12g}"
        writer.writerow([a.pub_id, a.level.value, a.territory_id or "", share, a.basis.value])
        n += 1
    return n


def read_attributions(fh, g: Gazetteer) -> dict[str, Attribution]:
    out = {}
    for row in csv.DictReader(fh):
        tid = row["territory_id"]
        out[row["pub_id"]] = Attribution(
            pub_id=row["pub_id"],
            territory=g.get(tid) if tid else None,
            share=Fraction(row["share"]).limit_denominator(10**6) if row["share"] else None,
            basis=Basis(row["basis"]),
            level=Level(row["level"]),
        )
    return out
