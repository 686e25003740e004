"""Geographic primitives: points, great-circle distance and the gazetteer.

The gazetteer bundles four reference tables that ship as CSV data files
(see ``citegravity/data``) and can be swapped for user-supplied ones:

* ``gazetteer.csv``  -- ``id,level,name,country_code,lat,lon``
* ``capitals.csv``   -- ``country_code,name,lat,lon``
* ``countries.csv``  -- ``country_code,name,continent``
* ``aliases.csv``    -- ``alias,iso2``
"""

from __future__ import annotations

import csv
import enum
import math
import unicodedata
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

EARTH_RADIUS_KM = 6371.0088

GAZETTEER_FIELDS = ("id", "level", "name", "country_code", "lat", "lon")
CAPITAL_FIELDS = ("country_code", "name", "lat", "lon")
COUNTRY_FIELDS = ("country_code", "name", "continent")
ALIAS_FIELDS = ("alias", "iso2")


class GazetteerError(ValueError):
    """Malformed reference table."""

    def __init__(self, message, path=None):
        if path is not None:
            message = f"{path}: {message}"
        super().__init__(message)
        self.path = path


class UnknownCountryError(KeyError):
    """Country code missing from the capital index."""

    def __init__(self, code):
        super().__init__(code)
        self.code = code

    def __str__(self):
        return f"unknown country: {self.code!r}"


@dataclass(frozen=True)
class GeoPoint:
    lat: float
    lon: float

    def __post_init__(self):
        lat, lon = float(self.lat), float(self.lon)
        if not (math.isfinite(lat) and math.isfinite(lon)):
            raise ValueError(f"non-finite coordinate ({lat}, {lon})")
        if not -90.0 <= lat <= 90.0:
            raise ValueError(f"latitude {lat} outside [-90, 90]")
        if not -180.0 <= lon <= 180.0:
            raise ValueError(f"longitude {lon} outside [-180, 180]")
        if lon == 180.0:
            lon = -180.0
        object.__setattr__(self, "lat", lat)
        object.__setattr__(self, "lon", lon)


class Level(str, enum.Enum):
    COUNTRY = "COUNTRY"
    LAU = "LAU"


@dataclass(frozen=True)
class Territory:
    id: str
    level: Level
    name: str
    country_code: str
    centroid: GeoPoint


def haversine_km(lat1, lon1, lat2, lon2):
    """Vectorised haversine distance in km; accepts scalars or arrays in degrees."""
    p1, p2 = np.radians(lat1), np.radians(lat2)
    dphi = p2 - p1
    dlam = np.radians(np.asarray(lon2) - np.asarray(lon1))
    h = np.sin(dphi / 2.0) ** 2 + np.cos(p1) * np.cos(p2) * np.sin(dlam / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_KM * np.arcsin(np.sqrt(np.clip(h, 0.0, 1.0)))


def great_circle_distance(a: GeoPoint, b: GeoPoint) -> float:
    """Haversine distance between two points on the mean-radius sphere, in km."""
    # order the endpoints so that d(a, b) and d(b, a) run the exact same arithmetic
    if (b.lat, b.lon) < (a.lat, a.lon):
        a, b = b, a
    p1, p2 = math.radians(a.lat), math.radians(b.lat)
    dphi = p2 - p1
    dlam = math.radians(b.lon - a.lon)
    h = math.sin(dphi / 2.0) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dlam / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_KM * math.asin(math.sqrt(min(1.0, max(0.0, h))))


def normalize_name(text: str) -> str:
    """Case-fold, strip diacritics, trim and collapse whitespace."""
    decomposed = unicodedata.normalize("NFKD", text)
    stripped = "".join(c for c in decomposed if not unicodedata.combining(c))
    return " ".join(stripped.casefold().split())


@dataclass
class Gazetteer:
    """Territories plus the country reference tables used to resolve them."""

    entries: dict[str, Territory]
    capitals: dict[str, tuple[str, GeoPoint]]
    country_names: dict[str, str] = field(default_factory=dict)
    continents: dict[str, str] = field(default_factory=dict)
    aliases: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        self.city_index: dict[tuple[str, str], Territory] = {}
        for t in self.entries.values():
            if t.level is Level.LAU:
                self.city_index[(normalize_name(t.name), t.country_code)] = t
        # canonical names always resolve, whatever the alias table says
        for code, name in self.country_names.items():
            self.aliases.setdefault(normalize_name(name), code)
        self._countries: dict[str, Territory] = {}
        for code, (_, point) in self.capitals.items():
            self._countries[code] = Territory(
                id=code,
                level=Level.COUNTRY,
                name=self.country_names.get(code, code),
                country_code=code,
                centroid=point,
            )
        for t in self.entries.values():
            if t.level is Level.COUNTRY:
                self._countries.setdefault(t.country_code, t)

    @classmethod
    def from_csv(cls, gazetteer=None, capitals=None, countries=None, aliases=None):
        """Load from CSV paths; any omitted table falls back to the bundled one."""
        entries = {}
        for row in _read_table(gazetteer or _bundled("gazetteer.csv"), GAZETTEER_FIELDS):
            try:
                level = Level(row["level"].strip().upper())
                t = Territory(
                    id=row["id"].strip(),
                    level=level,
                    name=row["name"].strip(),
                    country_code=row["country_code"].strip().upper(),
                    centroid=GeoPoint(float(row["lat"]), float(row["lon"])),
                )
            except ValueError as exc:
                raise GazetteerError(f"bad row {dict(row)}: {exc}", gazetteer) from exc
            if level is Level.LAU and not t.country_code:
                raise GazetteerError(f"LAU {t.id} has no country_code", gazetteer)
            if t.id in entries:
                raise GazetteerError(f"duplicate territory id {t.id!r}", gazetteer)
            entries[t.id] = t

        caps = {}
        for row in _read_table(capitals or _bundled("capitals.csv"), CAPITAL_FIELDS):
            try:
                point = GeoPoint(float(row["lat"]), float(row["lon"]))
            except ValueError as exc:
                raise GazetteerError(f"bad row {dict(row)}: {exc}", capitals) from exc
            caps[row["country_code"].strip().upper()] = (row["name"].strip(), point)

        names, continents = {}, {}
        for row in _read_table(countries or _bundled("countries.csv"), COUNTRY_FIELDS):
            code = row["country_code"].strip().upper()
            names[code] = row["name"].strip()
            continents[code] = row["continent"].strip()

        alias_map = {}
        for row in _read_table(aliases or _bundled("aliases.csv"), ALIAS_FIELDS):
            alias_map[normalize_name(row["alias"])] = row["iso2"].strip().upper()

        return cls(entries, caps, names, continents, alias_map)

    def country_code(self, country: str) -> str | None:
        """Resolve a country name or alias to its ISO code."""
        return self.aliases.get(normalize_name(country))

    def country_territory(self, code: str) -> Territory:
        try:
            return self._countries[code]
        except KeyError:
            raise UnknownCountryError(code) from None

    def continent(self, code: str) -> str | None:
        return self.continents.get(code)

    def __contains__(self, territory_id):
        return territory_id in self.entries or territory_id in self._countries

    def get(self, territory_id: str) -> Territory:
        """Fetch a LAU or country territory by id."""
        if territory_id in self.entries:
            return self.entries[territory_id]
        if territory_id in self._countries:
            return self._countries[territory_id]
        raise KeyError(f"territory {territory_id!r} not in gazetteer")


def lookup_territory(city: str, country: str, g: Gazetteer) -> Territory | None:
    """Exact (normalized) match of a city within a country; None on a miss."""
    code = g.country_code(country)
    if code is None:
        code = country.strip().upper()
    return g.city_index.get((normalize_name(city), code))


def country_capital(country_code: str, g: Gazetteer) -> GeoPoint:
    try:
        return g.capitals[country_code.strip().upper()][1]
    except KeyError:
        raise UnknownCountryError(country_code) from None


@lru_cache(maxsize=1)
def default_gazetteer() -> Gazetteer:
    return Gazetteer.from_csv()


def _bundled(name):
    return resources.files("citegravity").joinpath("data").joinpath(name)


def _read_table(source, required: Iterable[str]) -> list[Mapping[str, str]]:
    label = str(source)
    if not hasattr(source, "open"):
        source = Path(source)
    try:
        with source.open("r", encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            header = reader.fieldnames or []
            missing = [c for c in required if c not in header]
            if missing:
                raise GazetteerError(f"header missing columns {missing}", label)
            return list(reader)
    except OSError as exc:
        raise GazetteerError(f"cannot read: {exc}", label) from exc
