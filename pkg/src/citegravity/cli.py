"""Command-line front end.

Every subcommand reads flat files and writes flat files into ``--out``, so
steps can be rerun in isolation. Settings come from an optional JSON config
file, overridden by flags. Reports embed a hash of the resolved settings.

Exit codes: 0 success, 1 usage/config error, 2 data error, 3 estimation error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from . import __version__
from .assignment import assign_citing, prevalent_territory_cited, write_attributions
from .flows import (
    CITED_WINDOW,
    CITING_WINDOW,
    AnalysisLevel,
    FlowError,
    Partition,
    build_flow_edges,
    citing_level_attrs,
    compute_masses,
    publication_report,
    read_edges,
    read_masses,
    report_text,
    split_partitions,
    territory_report,
    write_drops,
    write_edges,
    write_links,
    write_masses,
    write_report_csv,
)
from .geodesy import Gazetteer, GazetteerError
from .gravity import (
    BandSpec,
    Continuous,
    EstimationError,
    MassError,
    build_design,
    fit_table,
    fit_to_dict,
    ols_fit,
)
from .ingest import load_cited, load_citing, survey_addresses
from .synth import Counts, GravityParams, generate_world, recover

log = logging.getLogger("citegravity")

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_ESTIMATION = 0, 1, 2, 3
DEFAULT_BANDS = "50,400,800,1200"


class ConfigError(Exception):
    pass


class DataError(Exception):
    pass


@dataclass
class RunConfig:
    cited: str | None = None
    citing: str | None = None
    gazetteer: str | None = None
    capitals: str | None = None
    aliases: str | None = None
    continents: str | None = None
    edges: str | None = None
    masses: str | None = None
    home: str = "IT"
    level: str = "national"
    partition: str = "all"
    bands: str | None = None
    zero_distance: str = "exclude"
    cited_window: str = f"{CITED_WINDOW[0]}-{CITED_WINDOW[1]}"
    citing_window: str = f"{CITING_WINDOW[0]}-{CITING_WINDOW[1]}"
    dedupe_addresses: bool = False
    out: str = "out"
    seed: int = 42
    n_territories: int = 300
    noise: float = 0.1
    counts: str = "round"
    ln_k: float = -1.773
    alpha: float = 0.437
    beta: float = 0.437
    gamma: float = 0.474
    pubs: list = field(default_factory=list)
    min_pubs: int = 1

    def digest(self) -> str:
        """Short hash of the analysis settings; the output location is not part of it."""
        settings = {k: v for k, v in asdict(self).items() if k != "out"}
        blob = json.dumps(settings, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    @property
    def out_dir(self) -> Path:
        return Path(self.out)

    def breakpoints(self):
        try:
            return BandSpec(tuple(float(b) for b in self.bands.split(",")))
        except ValueError as exc:
            raise ConfigError(f"--bands: {exc}") from None

    def distance_spec(self):
        if self.bands:
            return self.breakpoints()
        zd = self.zero_distance
        if zd == "exclude":
            return Continuous()
        if zd.startswith("floor:"):
            try:
                km = float(zd.split(":", 1)[1])
            except ValueError:
                raise ConfigError(f"--zero-distance: bad floor {zd!r}") from None
            if km <= 0:
                raise ConfigError("--zero-distance floor must be positive")
            return Continuous(floor_km=km)
        raise ConfigError(f"--zero-distance must be 'exclude' or 'floor:<km>', got {zd!r}")

    def window(self, which):
        text = getattr(self, which)
        try:
            lo, hi = (int(v) for v in text.split("-"))
        except ValueError:
            raise ConfigError(f"{which}: expected YYYY-YYYY, got {text!r}") from None
        if lo > hi:
            raise ConfigError(f"{which}: empty window {text!r}")
        return lo, hi

    def gazetteer_obj(self) -> Gazetteer:
        return Gazetteer.from_csv(self.gazetteer, self.capitals, self.continents, self.aliases)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _common(p):
    p.add_argument("--config", help="JSON file of settings; flags override it")
    p.add_argument("--out", help="output directory")
    p.add_argument("--home", help="home country ISO code (default IT)")
    p.add_argument("--seed", type=int)


def _inputs(p):
    p.add_argument("--cited", help="cited publications JSONL")
    p.add_argument("--citing", help="citing publications JSONL")
    p.add_argument("--gazetteer", help="gazetteer CSV (id,level,name,country_code,lat,lon)")
    p.add_argument("--capitals", help="capitals CSV (country_code,name,lat,lon)")
    p.add_argument("--aliases", help="country alias CSV (alias,iso2)")
    p.add_argument("--continents", help="countries CSV (country_code,name,continent)")
    p.add_argument("--dedupe-addresses", dest="dedupe_addresses", action="store_true", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="citegravity", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    for name, help_ in (("ingest", "load records, survey addresses, write attributions"),
                        ("assign", "write prevalent-territory attributions")):
        p = sub.add_parser(name, help=help_)
        _common(p)
        _inputs(p)

    p = sub.add_parser("flows", help="build territory-pair flow edges and masses")
    _common(p)
    _inputs(p)
    p.add_argument("--level", choices=[l.value for l in AnalysisLevel])
    p.add_argument("--partition", choices=[x.value for x in Partition])
    p.add_argument("--cited-window", dest="cited_window")
    p.add_argument("--citing-window", dest="citing_window")

    p = sub.add_parser("fit", help="estimate the gravity model from edges and masses")
    _common(p)
    p.add_argument("--edges")
    p.add_argument("--masses")
    p.add_argument("--continents")
    p.add_argument("--bands", nargs="?", const=DEFAULT_BANDS, help=f"band breakpoints in km (default {DEFAULT_BANDS})")
    p.add_argument("--zero-distance", dest="zero_distance")
    p.add_argument("--partition", choices=[x.value for x in Partition] + ["split"])

    p = sub.add_parser("simulate", help="generate a synthetic world and run a recovery trial")
    _common(p)
    p.add_argument("--n", dest="n_territories", type=int)
    p.add_argument("--noise", type=float)
    p.add_argument("--counts", choices=[c.value for c in Counts])
    for name in ("ln-k", "alpha", "beta", "gamma"):
        p.add_argument(f"--{name}", dest=name.replace("-", "_"), type=float)

    p = sub.add_parser("report", help="per-publication and per-territory flow tables")
    _common(p)
    _inputs(p)
    p.add_argument("--pub", dest="pubs", action="append", help="cited pub_id to tabulate (repeatable)")
    p.add_argument("--min-pubs", dest="min_pubs", type=int)
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    values = {}
    if getattr(args, "config", None):
        try:
            values = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        known = {f.name for f in fields(RunConfig)}
        unknown = sorted(set(values) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    for f in fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            values[f.name] = v
    cfg = RunConfig(**values)
    for name in ("cited", "citing", "gazetteer", "capitals", "aliases", "continents", "edges", "masses"):
        path = getattr(cfg, name)
        if path is not None and not Path(path).is_file():
            raise ConfigError(f"--{name}: no such file {path}")
    if cfg.bands:
        cfg.breakpoints()
    cfg.home = cfg.home.upper()
    return cfg


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _write_csv(path: Path, writer, *items):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer(fh, *items)


def _write_rows(fh, header, rows):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _load_records(cfg: RunConfig):
    cited, cstats = load_cited(cfg.cited) if cfg.cited else ([], None)
    citing, kstats = load_citing(cfg.citing) if cfg.citing else ([], None)
    return cited, cstats, citing, kstats


def _attribute(cfg, g, cited, citing):
    cited_attrs = {r.pub_id: prevalent_territory_cited(r, g, home=cfg.home) for r in cited if r.authors}
    citing_attrs = {r.pub_id: assign_citing(r, cfg.home, g, cfg.dedupe_addresses) for r in citing if r.assignable}
    return cited_attrs, citing_attrs


def _unassigned_rows(cited, citing, cited_attrs, citing_attrs):
    rows = []
    for r in cited:
        a = cited_attrs.get(r.pub_id)
        if a is None:
            rows.append((r.pub_id, "cited", "no authors"))
        elif not a.assigned:
            rows.append((r.pub_id, "cited", a.reason))
    for r in citing:
        ca = citing_attrs.get(r.pub_id)
        if ca is None:
            rows.append((r.pub_id, "citing", "empty address list"))
        elif not ca.country.assigned:
            rows.append((r.pub_id, "citing", ca.country.reason))
        elif ca.lau is not None and not ca.lau.assigned:
            rows.append((r.pub_id, "citing-lau", ca.lau.reason))
    return rows


def _write_attributions(cfg, out, cited_attrs, citing_attrs):
    _write_csv(out / "attributions_cited.csv", write_attributions, cited_attrs.values())
    _write_csv(out / "attributions_citing.csv", write_attributions, [c.country for c in citing_attrs.values()])
    _write_csv(out / "attributions_citing_lau.csv", write_attributions,
               [c.lau for c in citing_attrs.values() if c.lau is not None])


def cmd_assign(cfg: RunConfig, with_stats: bool = False) -> int:
    g = cfg.gazetteer_obj()
    cited, cstats, citing, kstats = _load_records(cfg)
    cited_attrs, citing_attrs = _attribute(cfg, g, cited, citing)
    out = cfg.out_dir
    _write_attributions(cfg, out, cited_attrs, citing_attrs)
    rows = _unassigned_rows(cited, citing, cited_attrs, citing_attrs)
    _write_csv(out / "unassigned.csv", _write_rows, ("pub_id", "role", "reason"), rows)
    if with_stats:
        stats = {"config_hash": cfg.digest()}
        for role, recs, st, addrs in (
            ("cited", cited, cstats, lambda r: r.affiliations),
            ("citing", citing, kstats, lambda r: r.addresses),
        ):
            if st is None:
                continue
            for r in recs:
                survey_addresses(addrs(r), st, g)
            stats[role] = st.as_dict()
        stats["attributed"] = {
            "cited": sum(a.assigned for a in cited_attrs.values()),
            "citing_country": sum(c.country.assigned for c in citing_attrs.values()),
            "citing_lau": sum(c.lau.assigned for c in citing_attrs.values() if c.lau is not None),
        }
        _write(out / "ingest_stats.json", _dump(stats))
    log.info("wrote attributions for %d cited / %d citing records to %s", len(cited_attrs), len(citing_attrs), out)
    return EXIT_OK


def cmd_ingest(cfg: RunConfig) -> int:
    return cmd_assign(cfg, with_stats=True)


def _flow_pipeline(cfg, g, level, partition="all"):
    cited, _, citing, _ = _load_records(cfg)
    cited_attrs, citing_attrs = _attribute(cfg, g, cited, citing)
    flows = build_flow_edges(cited_attrs, citing_attrs, citing, level, g, cfg.home, partition)
    return cited, citing, cited_attrs, citing_attrs, flows


def cmd_flows(cfg: RunConfig) -> int:
    if not cfg.citing or not cfg.cited:
        raise ConfigError("flows needs --cited and --citing")
    g = cfg.gazetteer_obj()
    level = AnalysisLevel(cfg.level)
    cited, citing, cited_attrs, citing_attrs, flows = _flow_pipeline(cfg, g, level, cfg.partition)
    m_cited = compute_masses(cited, cited_attrs, cfg.window("cited_window"))
    m_citing = compute_masses(citing, citing_level_attrs(citing_attrs, level), cfg.window("citing_window"))
    out = cfg.out_dir
    _write_csv(out / "edges.csv", write_edges, flows.edges)
    _write_csv(out / "masses.csv", write_masses, m_cited, m_citing)
    _write_csv(out / f"links_{level.value}.csv", write_links, flows.links)
    _write_csv(out / "drops.csv", write_drops, flows.drops)
    summary = {
        "config_hash": cfg.digest(),
        "level": level.value,
        "partition": flows.partition.value,
        "input_citation_pairs": sum(len(r.cites) for r in citing),
        "edge_citations": int(sum(e.citations for e in flows.edges)),
        "edges": len(flows.edges),
        "dropped": len(flows.drops),
        "drop_reasons": flows.drop_counts(),
    }
    _write(out / "flows_summary.json", _dump(summary))
    log.info("%d edges, %d drops", len(flows.edges), len(flows.drops))
    return EXIT_OK


def _read_inputs_for_fit(cfg):
    out = cfg.out_dir
    edges_path = Path(cfg.edges) if cfg.edges else out / "edges.csv"
    masses_path = Path(cfg.masses) if cfg.masses else out / "masses.csv"
    for p in (edges_path, masses_path):
        if not p.is_file():
            raise ConfigError(f"missing input {p}")
    try:
        with open(edges_path, encoding="utf-8", newline="") as fh:
            edges = read_edges(fh)
        with open(masses_path, encoding="utf-8", newline="") as fh:
            m_cited, m_citing = read_masses(fh)
    except (ValueError, KeyError) as exc:
        raise DataError(f"{exc}") from exc
    return edges, m_cited, m_citing


def cmd_fit(cfg: RunConfig) -> int:
    spec = cfg.distance_spec()
    edges, m_cited, m_citing = _read_inputs_for_fit(cfg)
    header = {"config_hash": cfg.digest()}
    if cfg.partition == "all":
        groups = {"": edges}
    else:
        g = cfg.gazetteer_obj()
        unknown = sorted({e.citing_id for e in edges if g.continent(e.citing_id) is None})
        if unknown:
            raise DataError(f"no continent for citing territories: {', '.join(unknown[:5])}")
        parts = split_partitions(edges, cfg.home, g)
        wanted = [Partition.CONTINENTAL, Partition.INTERCONTINENTAL] if cfg.partition == "split" else [Partition(cfg.partition)]
        groups = {f"_{p.value}": parts[p] for p in wanted}

    out = cfg.out_dir
    for suffix, group in groups.items():
        title = f"OLS gravity fit ({spec.name}{', ' + suffix[1:] if suffix else ''})"
        if not group:
            notice = f"no {suffix[1:] or 'usable'} observations"
            _write(out / f"fit{suffix}.json", _dump({**header, "notice": notice, "n_obs": 0}))
            _write(out / f"fit{suffix}.txt", f"{title}\n{notice}\n")
            log.warning(notice)
            continue
        fit = ols_fit(build_design(group, m_cited, m_citing, spec))
        _write(out / f"fit{suffix}.json", _dump(fit_to_dict(fit, header)))
        _write(out / f"fit{suffix}.txt", f"# config {header['config_hash']}\n" + fit_table(fit, title))
    return EXIT_OK


def cmd_simulate(cfg: RunConfig) -> int:
    params = GravityParams(cfg.ln_k, cfg.alpha, cfg.beta, cfg.gamma, cfg.noise, cfg.seed)
    world = generate_world(cfg.n_territories, params, cfg.seed, counts=cfg.counts)
    result = recover(world)
    out = cfg.out_dir
    _write_csv(out / "edges.csv", write_edges, world.edges)
    _write_csv(out / "masses.csv", write_masses, world.cited_masses, world.citing_masses)
    report = {"config_hash": cfg.digest(), "n_territories": cfg.n_territories, "noise_sigma": cfg.noise,
              "seed": cfg.seed, "counts": cfg.counts, **result.as_dict()}
    _write(out / "recovery.json", _dump(report))
    lines = [f"# config {cfg.digest()}", f"{'param':<8}{'true':>10}{'fitted':>12}{'delta':>12}"]
    for k, v in result.true.items():
        lines.append(f"{k:<8}{v:>10.4f}{getattr(result.fit, k):>12.6f}{result.deltas[k]:>12.2e}")
    lines.append(f"R² {result.fit.r2:.6f}   obs {result.fit.n_obs}")
    _write(out / "recovery.txt", "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_report(cfg: RunConfig) -> int:
    if not cfg.citing or not cfg.cited:
        raise ConfigError("report needs --cited and --citing")
    g = cfg.gazetteer_obj()
    cited, citing, cited_attrs, citing_attrs, nat = _flow_pipeline(cfg, g, AnalysisLevel.NATIONAL)
    intl = build_flow_edges(cited_attrs, citing_attrs, citing, AnalysisLevel.INTERNATIONAL, g, cfg.home)
    cited_pubs = {l.cited_pub for l in nat.links} | {l.cited_pub for l in intl.links}
    pubs = cfg.pubs or sorted(cited_pubs)
    try:
        prow = [publication_report(p, nat.links, intl.links) for p in pubs]
    except KeyError as exc:
        raise DataError(str(exc)) from None
    counts = {}
    for p in cited_pubs:
        tid = cited_attrs[p].territory_id
        counts[tid] = counts.get(tid, 0) + 1
    trow = [territory_report(t, cited_attrs, nat.links, intl.links) for t in sorted(counts) if counts[t] >= cfg.min_pubs]
    out = cfg.out_dir
    head = f"# config {cfg.digest()}\n# international columns include home-country citing publications\n"
    _write(out / "report_publications.txt", head + report_text(prow))
    _write(out / "report_territories.txt", head + report_text(trow))
    _write_csv(out / "report_publications.csv", write_report_csv, prow)
    _write_csv(out / "report_territories.csv", write_report_csv, trow)
    return EXIT_OK


COMMANDS = {
    "ingest": cmd_ingest,
    "assign": cmd_assign,
    "flows": cmd_flows,
    "fit": cmd_fit,
    "simulate": cmd_simulate,
    "report": cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"citegravity: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, GazetteerError, FlowError, MassError) as exc:
        print(f"citegravity: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except EstimationError as exc:
        print(f"citegravity: estimation error: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION


if __name__ == "__main__":
    sys.exit(main())
