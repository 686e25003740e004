"""Publication records and reduction of affiliation lines to (city, country).

Address reduction is heuristic. The rules, applied to the comma-separated
segments of an affiliation line:

1. The last segment names the country. It is resolved through the alias
   table; if it does not match as a whole, leading postal/state tokens are
   dropped one at a time ("NJ USA" -> "USA", "NY 10021 USA" -> "USA").
2. The city is the nearest preceding segment that still has text once
   postal codes are removed ("I-40127 Bologna" -> "Bologna", "Seoul 137701"
   -> "Seoul", "Birmingham B15 2TH" -> "Birmingham") and that is not a region
   qualifier (two/three-letter province codes such as "BC" or "PQ", UK county
   forms such as "W Midlands").

Lines whose last segment matches no alias are left unparsed.
"""

from __future__ import annotations

import io
import json
import logging
import re
from dataclasses import dataclass, field
from os import PathLike
from typing import Iterable

from .geodesy import Gazetteer, default_gazetteer, lookup_territory, normalize_name

log = logging.getLogger(__name__)

_POSTAL_PATTERNS = [
    re.compile(r"\b[A-Z]{1,2}\d[A-Z\d]?\s+\d[A-Z]{2}\b"),  # UK: B15 2TH
    re.compile(r"\b[A-Z]\d[A-Z]\s*\d[A-Z]\d\b"),  # Canada: V5Z 1M9
    re.compile(r"\b\d{4}\s?[A-Z]{2}\b(?=\s+\S)"),  # Netherlands: 1081 HV Amsterdam
    re.compile(r"\b[A-Z]{1,3}-\d{3,6}\b"),  # I-40127, D-52062, CH-4056
    re.compile(r"\b\d{3,}(?:-\d+)?\b"),  # bare digit runs
]
_CODE_TOKEN = re.compile(r"^(?:[A-Z]{2,3}|\d+(?:-\d+)?|[A-Z]{1,3}-\d+)$")
_REGION_CODE = re.compile(r"^[A-Z]{2,3}$")

REGION_QUALIFIERS = frozenset(
    normalize_name(r)
    for r in (
        "W Midlands", "E Midlands", "W Yorkshire", "S Yorkshire", "N Yorkshire",
        "Merseyside", "Tyne & Wear", "Lancs", "Oxon", "Cambs", "Surrey", "Kent",
        "Essex", "Herts", "Berks", "Bucks", "Hants", "Middx", "Avon", "Devon",
        "Greater Manchester", "Midlothian", "Lanark", "Lothian",
    )
)


class RecordError(ValueError):
    """A JSONL line that violates the record schema."""


@dataclass(frozen=True)
class Author:
    key: str
    affil_idx: tuple[int, ...]


@dataclass(frozen=True)
class CitedRecord:
    pub_id: str
    year: int
    authors: tuple[Author, ...]
    affiliations: tuple[str, ...]

    def __post_init__(self):
        n = len(self.affiliations)
        for a in self.authors:
            if not a.affil_idx:
                raise RecordError(f"author {a.key!r} has no affiliation index")
            bad = [i for i in a.affil_idx if not 0 <= i < n]
            if bad:
                raise RecordError(f"author {a.key!r} affiliation index {bad} out of range")


@dataclass(frozen=True)
class CitingRecord:
    pub_id: str
    year: int
    addresses: tuple[str, ...]
    cites: tuple[str, ...]

    @property
    def assignable(self) -> bool:
        return len(self.addresses) > 0


@dataclass
class IngestStats:
    lines: int = 0
    loaded: int = 0
    skipped: int = 0
    unassignable: int = 0
    diagnostics: list[tuple[int, str]] = field(default_factory=list)
    addresses: int = 0
    unparsed: int = 0
    unmatched: int = 0

    def as_dict(self):
        return {
            "lines": self.lines,
            "loaded": self.loaded,
            "skipped": self.skipped,
            "unassignable": self.unassignable,
            "addresses": self.addresses,
            "unparsed_addresses": self.unparsed,
            "unmatched_cities": self.unmatched,
            "diagnostics": [{"line": n, "message": m} for n, m in self.diagnostics],
        }


def _strip_postal(segment: str) -> str:
    for pat in _POSTAL_PATTERNS:
        segment = pat.sub(" ", segment)
    return " ".join(segment.split())


def _is_region(segment: str) -> bool:
    return bool(_REGION_CODE.match(segment)) or normalize_name(segment) in REGION_QUALIFIERS


def _resolve_country(segment: str, g: Gazetteer) -> str | None:
    tokens = segment.split()
    for start in range(len(tokens)):
        if start > 0 and not _CODE_TOKEN.match(tokens[start - 1]):
            break
        code = g.country_code(" ".join(tokens[start:]))
        if code is not None:
            return code
    return None


def parse_address(raw: str, g: Gazetteer | None = None) -> tuple[str, str] | None:
    """Reduce one affiliation line to ``(city, country)``, or None if it cannot be."""
    g = g or default_gazetteer()
    segments = [s.strip() for s in raw.split(",")]
    segments = [s for s in segments if s]
    if len(segments) < 2:
        return None
    code = _resolve_country(segments[-1], g)
    if code is None:
        return None
    for seg in reversed(segments[:-1]):
        city = _strip_postal(seg)
        if city and not _is_region(city):
            return city, g.country_names.get(code, code)
    return None


def locate_address(raw: str, g: Gazetteer):
    """Parse an address and resolve it: returns ``(country_code, territory_or_None)``.

    ``None`` overall when the address does not parse.
    """
    parsed = parse_address(raw, g)
    if parsed is None:
        return None
    city, country = parsed
    return g.country_code(country) or country, lookup_territory(city, country, g)


def _open_lines(stream) -> Iterable[str]:
    if isinstance(stream, (str, PathLike)):
        with open(stream, encoding="utf-8") as fh:
            return fh.read().splitlines()
    if isinstance(stream, (bytes, bytearray)):
        return io.StringIO(stream.decode("utf-8")).read().splitlines()
    return [line.rstrip("\n") for line in stream]


def _require(obj, key, kind):
    if key not in obj:
        raise RecordError(f"missing field {key!r}")
    value = obj[key]
    if kind is int and isinstance(value, bool) or not isinstance(value, kind):
        raise RecordError(f"field {key!r} has wrong type {type(value).__name__}")
    return value


def _string_list(obj, key):
    values = _require(obj, key, list)
    if not all(isinstance(v, str) for v in values):
        raise RecordError(f"field {key!r} must be a list of strings")
    return tuple(values)


def _cited_from_json(obj) -> CitedRecord:
    authors = []
    for a in _require(obj, "authors", list):
        if not isinstance(a, dict):
            raise RecordError("author entry must be an object")
        idx = _require(a, "affil_idx", list)
        if not all(isinstance(i, int) and not isinstance(i, bool) for i in idx):
            raise RecordError("affil_idx must be a list of integers")
        authors.append(Author(str(_require(a, "key", str)), tuple(idx)))
    return CitedRecord(
        pub_id=_require(obj, "pub_id", str),
        year=_require(obj, "year", int),
        authors=tuple(authors),
        affiliations=_string_list(obj, "affiliations"),
    )


def _citing_from_json(obj) -> CitingRecord:
    rec = CitingRecord(
        pub_id=_require(obj, "pub_id", str),
        year=_require(obj, "year", int),
        addresses=_string_list(obj, "addresses"),
        cites=_string_list(obj, "cites"),
    )
    if not rec.cites:
        raise RecordError("empty cites list")
    return rec


def _load(stream, build):
    records, stats, seen = [], IngestStats(), set()
    for lineno, line in enumerate(_open_lines(stream), start=1):
        if not line.strip():
            continue
        stats.lines += 1
        try:
            obj = json.loads(line)
            if not isinstance(obj, dict):
                raise RecordError("line is not a JSON object")
            rec = build(obj)
            if not rec.pub_id:
                raise RecordError("empty pub_id")
            if rec.pub_id in seen:
                raise RecordError(f"duplicate pub_id {rec.pub_id!r}")
        except (json.JSONDecodeError, RecordError) as exc:
            stats.skipped += 1
            stats.diagnostics.append((lineno, str(exc)))
            log.warning("line %d skipped: %s", lineno, exc)
            continue
        seen.add(rec.pub_id)
        records.append(rec)
    stats.loaded = len(records)
    return records, stats


def load_cited(stream) -> tuple[list[CitedRecord], IngestStats]:
    """Read cited publications from JSONL (path, bytes, or iterable of lines).

    Malformed lines are skipped and reported in the stats, never fatal.
    """
    records, stats = _load(stream, _cited_from_json)
    stats.unassignable = sum(1 for r in records if not r.authors)
    return records, stats


def load_citing(stream) -> tuple[list[CitingRecord], IngestStats]:
    """Read citing publications from JSONL; empty address lists are flagged, not dropped."""
    records, stats = _load(stream, _citing_from_json)
    stats.unassignable = sum(1 for r in records if not r.assignable)
    return records, stats


def survey_addresses(addresses: Iterable[str], stats: IngestStats, g: Gazetteer) -> IngestStats:
    """Tally address parse failures and gazetteer misses into ``stats``."""
    for raw in addresses:
        stats.addresses += 1
        located = locate_address(raw, g)
        if located is None:
            stats.unparsed += 1
        elif located[1] is None:
            stats.unmatched += 1
    return stats


def cited_to_json(rec: CitedRecord) -> str:
    return json.dumps(
        {
            "pub_id": rec.pub_id,
            "year": rec.year,
            "affiliations": list(rec.affiliations),
            "authors": [{"key": a.key, "affil_idx": list(a.affil_idx)} for a in rec.authors],
        },
        ensure_ascii=False,
    )


def citing_to_json(rec: CitingRecord) -> str:
    return json.dumps(
        {"pub_id": rec.pub_id, "year": rec.year, "addresses": list(rec.addresses), "cites": list(rec.cites)},
        ensure_ascii=False,
    )
