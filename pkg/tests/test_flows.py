import io

import pytest
from fixtures import (
    CITED5,
    CITED5_LAU,
    CITING10,
    CITING10_COUNTRY,
    CITING10_LAU,
    attribute,
    cited,
    citing,
    flows,
)
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import brute_force_edges

from citegravity.assignment import prevalent_territory_cited
from citegravity.flows import (
    AnalysisLevel,
    CitationLink,
    FlowEdge,
    FlowError,
    MassTable,
    Partition,
    build_flow_edges,
    compute_masses,
    publication_report,
    read_edges,
    read_masses,
    report_text,
    split_partitions,
    territory_report,
    write_edges,
    write_masses,
)
from citegravity.geodesy import (
    GeoPoint,
    Level,
    Territory,
    country_capital,
    default_gazetteer,
    great_circle_distance,
)

NAT, INTL = AnalysisLevel.NATIONAL, AnalysisLevel.INTERNATIONAL


TOTAL_PAIRS = sum(len(r.cites) for r in CITING10)


def test_fixture_attributions_match_hand_count(gaz):
    ca, cg = attribute(CITED5, CITING10, gaz)
    assert {p: a.territory_id for p, a in ca.items()} == CITED5_LAU
    assert {p: a.country.territory_id for p, a in cg.items()} == CITING10_COUNTRY
    assert {p: a.lau.territory_id for p, a in cg.items() if a.lau is not None} == CITING10_LAU


def test_national_edges_against_enumeration(gaz):
    fs = flows(CITED5, CITING10, gaz)
    expected = brute_force_edges(CITED5_LAU, CITING10_LAU, CITING10_COUNTRY,
                                 {r.pub_id: set(r.cites) for r in CITING10}, "IT")
    assert {(e.cited_id, e.citing_id): e.citations for e in fs.edges} == expected
    assert fs.drop_counts() == {
        "cited publication unknown": 1, "cited unassigned": 2, "citing LAU unassigned": 1,
        "citing foreign": 3, "citing unassigned": 1, "duplicate reference": 1,
    }


def test_national_distances(gaz):
    fs = flows(CITED5, CITING10, gaz)
    for e in fs.edges:
        a, b = gaz.get(e.cited_id).centroid, gaz.get(e.citing_id).centroid
        assert e.distance_km == great_circle_distance(a, b)
        if e.cited_id == e.citing_id:
            assert e.distance_km == 0.0


def test_international_edges(gaz):
    fs = flows(CITED5, CITING10, gaz, INTL)
    assert {(e.cited_id, e.citing_id): e.citations for e in fs.edges} == {
        ("IT:PISA", "GB"): 1, ("IT:BOLOGNA", "GB"): 1, ("IT:CATANIA", "DE"): 1,
    }
    assert all(e.citing_id != "IT" for e in fs.edges)
    e = next(e for e in fs.edges if e.citing_id == "DE")
    assert e.distance_km == great_circle_distance(gaz.get("IT:CATANIA").centroid, country_capital("DE", gaz))


@pytest.mark.parametrize("level", [NAT, INTL])
def test_conservation_on_fixture(level, gaz):
    fs = flows(CITED5, CITING10, gaz, level)
    assert sum(e.citations for e in fs.edges) + len(fs.drops) == TOTAL_PAIRS == fs.total_pairs


def test_no_citations(gaz):
    fs = flows([cited("P1", "Pisa")], [citing("C1", ["Rome"], ["P7"])], gaz)
    assert fs.edges == []


def test_three_citers_one_edge(gaz):
    citers = [citing(f"C{k}", ["Rome"], ["P1"]) for k in range(3)]
    fs = flows([cited("P1", "Pisa")], citers, gaz)
    assert [(e.cited_id, e.citing_id, e.citations) for e in fs.edges] == [("IT:PISA", "IT:ROME", 3)]


def test_partitions_add_up(gaz):
    extra = [citing("C11", ["Seoul Natl Univ, Seoul, South Korea"], ["P1", "P4"]),
             citing("C12", ["Taipei City Hosp, Taipei, Taiwan"], ["P1"])]
    recs = CITING10 + extra
    total = flows(CITED5, recs, gaz, INTL)
    parts = {p: flows(CITED5, recs, gaz, INTL, p) for p in (Partition.CONTINENTAL, Partition.INTERCONTINENTAL)}
    assert sum(e.citations for p in parts.values() for e in p.edges) == sum(e.citations for e in total.edges)
    assert sorted(parts[Partition.CONTINENTAL].edges + parts[Partition.INTERCONTINENTAL].edges,
                  key=lambda e: (e.cited_id, e.citing_id)) == total.edges
    assert {e.citing_id for e in parts[Partition.INTERCONTINENTAL].edges} == {"KR", "TW"}
    split = split_partitions(total.edges, "IT", gaz)
    assert split[Partition.CONTINENTAL] == parts[Partition.CONTINENTAL].edges
    assert split[Partition.INTERCONTINENTAL] == parts[Partition.INTERCONTINENTAL].edges


def test_partition_rejected_at_national_level(gaz):
    with pytest.raises(ValueError):
        flows(CITED5, CITING10, gaz, NAT, Partition.CONTINENTAL)


def test_territory_missing_from_gazetteer(gaz):
    ghost = Territory("IT:GHOST", Level.LAU, "Ghost", "IT", GeoPoint(40, 10))
    ca, cg = attribute(CITED5, CITING10, gaz)
    ca["P1"] = type(ca["P1"])("P1", ghost, ca["P1"].share, ca["P1"].basis)
    with pytest.raises(FlowError, match="IT:GHOST"):
        build_flow_edges(ca, cg, CITING10, NAT, gaz)


# random worlds for conservation
cities = st.sampled_from(["Pisa", "Rome", "Milan", "Turin", "UCL, London, England", "X, Paris, France", "Lab, Atlantis"])


@st.composite
def worlds(draw):
    n_cited = draw(st.integers(0, 6))
    cited_recs = [cited(f"P{k}", *draw(st.lists(cities, min_size=1, max_size=3))) for k in range(n_cited)]
    ids = [f"P{k}" for k in range(n_cited + 2)]
    citing_recs = [
        citing(f"C{k}", draw(st.lists(cities, min_size=1, max_size=3)), draw(st.lists(st.sampled_from(ids), min_size=1, max_size=4)))
        for k in range(draw(st.integers(0, 8)))
    ]
    return cited_recs, citing_recs


@settings(max_examples=40, deadline=None)
@given(worlds(), st.sampled_from([NAT, INTL]))
def test_conservation_property(world, level):
    cited_recs, citing_recs = world
    fs = flows(cited_recs, citing_recs, default_gazetteer(), level)
    assert sum(e.citations for e in fs.edges) + len(fs.drops) == sum(len(r.cites) for r in citing_recs)
    assert len({(e.cited_id, e.citing_id) for e in fs.edges}) == len(fs.edges)


class TestMasses:
    def test_empty(self):
        assert len(compute_masses([], {})) == 0

    def test_pisa_window(self, gaz):
        recs = [cited(f"P{k}", "Pisa", year=y) for k, y in enumerate([2010, 2011, 2011, 2012, 2014])]
        attrs = {r.pub_id: prevalent_territory_cited(r, gaz) for r in recs}
        assert compute_masses(recs, attrs, (2010, 2012))["IT:PISA"] == 4
        assert compute_masses(recs, attrs)["IT:PISA"] == 5

    def test_against_recount(self, gaz):
        ca, _ = attribute(CITED5, [], gaz)
        table = compute_masses(CITED5, ca, (2010, 2012))
        recount = {}
        for tid in CITED5_LAU.values():
            if tid:
                recount[tid] = recount.get(tid, 0) + 1
        assert table.counts == recount

    def test_bad_window(self):
        with pytest.raises(ValueError):
            compute_masses([], {}, (2012, 2010))

    def test_merge_is_commutative(self):
        a, b = MassTable({"x": 1, "y": 2}), MassTable({"y": 3, "z": 1})
        assert a.merge(b).counts == b.merge(a).counts == {"x": 1, "y": 5, "z": 1}

    def test_csv_round_trip(self):
        buf = io.StringIO()
        write_masses(buf, MassTable({"a": 3}), MassTable({"b": 7}))
        cited_t, citing_t = read_masses(io.StringIO(buf.getvalue()))
        assert cited_t.counts == {"a": 3} and citing_t.counts == {"b": 7}


def test_edges_csv_round_trip():
    edges = [FlowEdge("a", "b", 3, 123.456789, NAT), FlowEdge("a", "c", 1.5, 0.0, INTL)]
    buf = io.StringIO()
    write_edges(buf, edges)
    assert buf.getvalue().splitlines()[0] == "level,cited_id,citing_id,citations,distance_km"
    assert read_edges(io.StringIO(buf.getvalue())) == edges


def test_edge_invariants():
    with pytest.raises(ValueError):
        FlowEdge("a", "b", 0, 1.0)
    with pytest.raises(ValueError):
        FlowEdge("a", "b", 1, -1.0)


def link(cited_pub, citing_pub, cited_id, citing_id, d, level=NAT):
    return CitationLink(cited_pub, citing_pub, cited_id, citing_id, d, level)


class TestPublicationReport:
    def test_local_citation(self):
        row = publication_report("P", [link("P", "C", "T", "T", 0.0)], [])
        assert (row.nat_citations, row.nat_avg_km) == (1, 0.0)

    def test_mean(self):
        row = publication_report("P", [], [link("P", "C1", "T", "DE", 100.0, INTL), link("P", "C2", "T", "FR", 300.0, INTL)])
        assert row.intl_avg_km == 200.0 and row.intl_citations == 2 and row.nat_avg_km is None

    def test_inclusive_vs_exclusive(self):
        nat = [link("P", "C1", "T", "U", 100.0)]
        intl = [link("P", "C2", "T", "DE", 1000.0, INTL)]
        assert publication_report("P", nat, intl).intl_avg_km == 550.0
        assert publication_report("P", nat, intl, include_domestic=False).intl_avg_km == 1000.0

    def test_unknown(self):
        with pytest.raises(KeyError):
            publication_report("nope", [link("P", "C", "T", "T", 0.0)], [])

    @given(st.permutations([17.0, 250.5, 3.25, 999.0, 40.0, 0.1]))
    def test_permutation_invariant(self, ds):
        links = [link("P", f"C{k}", "T", "U", d) for k, d in enumerate(ds)]
        assert publication_report("P", links, []).nat_avg_km == publication_report("P", links[::-1], []).nat_avg_km
        assert publication_report("P", links, []).nat_avg_km == sum(sorted(ds)) / len(ds)


class TestTerritoryReport:
    def _attrs(self, gaz, n, city="Pisa"):
        recs = [cited(f"P{k}", city) for k in range(n)]
        return {r.pub_id: prevalent_territory_cited(r, gaz) for r in recs}

    def test_fully_local(self, gaz):
        row = territory_report("IT:PISA", self._attrs(gaz, 1), [link("P0", "C", "IT:PISA", "IT:PISA", 0.0)], [])
        assert row.local_only_share == 1.0 and row.pubs_cited == 1 and row.name == "Pisa"

    def test_never_local(self, gaz):
        row = territory_report("IT:PISA", self._attrs(gaz, 1), [link("P0", "C", "IT:PISA", "IT:ROME", 300.0)], [])
        assert row.local_only_share == 0.0

    def test_ten_publications_three_local(self, gaz):
        nat, intl = [], []
        for k in range(10):
            if k < 3:
                nat.append(link(f"P{k}", f"L{k}", "IT:PISA", "IT:PISA", 0.0))
            elif k < 6:
                nat += [link(f"P{k}", f"L{k}", "IT:PISA", "IT:PISA", 0.0), link(f"P{k}", f"R{k}", "IT:PISA", "IT:ROME", 270.0)]
            else:
                intl.append(link(f"P{k}", f"F{k}", "IT:PISA", "FR", 900.0, INTL))
        row = territory_report("IT:PISA", self._attrs(gaz, 10), nat, intl)
        # enumeration: P0-P2 only local, P3-P5 mixed, P6-P9 foreign only
        local = [k for k in range(10) if {l.citing_id for l in nat + intl if l.cited_pub == f"P{k}"} == {"IT:PISA"}]
        assert local == [0, 1, 2] and row.local_only_share == pytest.approx(0.3, abs=1e-15)
        assert (row.nat_citations, row.intl_citations) == (9, 13)

    def test_unknown(self, gaz):
        with pytest.raises(KeyError):
            territory_report("IT:ROME", self._attrs(gaz, 1), [], [])

    def test_report_text_layout(self, gaz):
        row = territory_report("IT:PISA", self._attrs(gaz, 1), [link("P0", "C", "IT:PISA", "IT:PISA", 0.0)], [])
        text = report_text([row])
        assert text.splitlines()[0].split() == ["territory_id", "name", "pubs_cited", "intl_citations",
                                                "intl_avg_km", "nat_citations", "nat_avg_km", "local_only_share"]
        assert "100.0%" in text
