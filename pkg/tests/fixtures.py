"""Shared test data: the worked-example records, a small flow corpus, the OLS fixture."""

from citegravity.assignment import assign_citing, prevalent_territory_cited
from citegravity.flows import (
    AnalysisLevel,
    FlowEdge,
    MassTable,
    Partition,
    build_flow_edges,
)
from citegravity.gravity import Continuous, build_design, ols_fit
from citegravity.ingest import Author, CitedRecord, CitingRecord

# byline of DOI 10.3389/fpsyg.2011.00227
FPSYG_AFFILIATIONS = (
    "Univ Bologna, Dept Psychol, I-40127 Bologna, Italy",
    "Rhein Westfal TH Aachen, Div Cognit Neurol, D-52062 Aachen, Germany",
    "Univ Catanzaro, Dept Med Sci, Catanzaro, Italy",
    "Univ Bologna, Dept Commun Disciplines, Bologna, Italy",
    "Univ Parma, Dept Neurosci, I-43100 Parma, Italy",
    "CNR, Inst Cognit Sci & Technol, Rome, Italy",
)
FPSYG_AUTHORS = (
    Author("Scorilli, C", (0,)),
    Author("Binkofski, F", (1,)),
    Author("Buccino, G", (2,)),
    Author("Nicoletti, R", (3,)),
    Author("Riggio, L", (4,)),
    Author("Borghi, AM", (0, 5)),
)

# address list of DOI 10.1182/blood-2010-01-261289
BLOOD_ADDRESSES = (
    "Catholic Univ Korea, Seoul St Marys Hosp, Div Hematol, Seoul 137701, South Korea",
    "Seoul Natl Univ, Coll Med, Seoul, South Korea",
    "Shanghai Med Univ 2, Ruijin Hosp, Shanghai, Peoples R China",
    "Hannover Med Sch, D-30623 Hannover, Germany",
    "Taipei City Hosp, Taipei, Taiwan",
    "Novartis Pharmaceut, E Hanover, NJ USA",
    "Novartis Pharma AG, Basel, Switzerland",
    "UCL, London, England",
)

# address list of DOI 10.1021/acs.inorgchem.8b02267
INORG_ADDRESSES = (
    "Hop Prive Jacques Cartier, Inst Cardiovasc Paris, Gen Sante, Dept Cardiol, Massy, France",
    "CHU Cavale Blanche, Dept Cardiol, Brest, France",
    "Columbia Univ, Med Ctr, Dept Cardiol, New York, NY USA",
    "New York Presbyterian Hosp, New York, NY USA",
    "Univ British Columbia, Dept Cardiol, Vancouver, BC V5Z 1M9, Canada",
    "Univ Laval, Quebec Heart & Lung Inst, Dept Cardiol, Quebec City, PQ, Canada",
    "Univ Catania, Ferrarotto Hosp, Dept Cardiol, Catania, Italy",
    "ETNA Fdn, Catania, Italy",
    "Univ Turin, Div Cardiol, Citta Salute & Sci, Turin, Italy",
    "Imperial Coll Healthcare NHS Trust, Div Cardiol, London, England",
    "Univ Birmingham, Queen Elizabeth Hosp, Birmingham B15 2TH, W Midlands, England",
)


def it(city):
    return f"Univ {city}, Dept X, {city}, Italy"


def cited(pub_id, *cities, year=2011):
    """One author per city; entries containing a comma are used verbatim."""
    return CitedRecord(pub_id, year, tuple(Author(f"a{k}", (k,)) for k in range(len(cities))),
                       tuple(it(c) if "," not in c else c for c in cities))


def citing(pub_id, cities, cites, year=2014):
    return CitingRecord(pub_id, year, tuple(it(c) if "," not in c else c for c in cities), tuple(cites))


# five cited and ten citing publications; expected territories written out by hand
CITED5 = [
    cited("P1", "Pisa"),
    cited("P2", "Bologna", "Bologna", "Rome"),
    cited("P3", "Turin", "Milan"),  # tie
    cited("P4", "Catania"),
    cited("P5", "Rome"),
]
CITED5_LAU = {"P1": "IT:PISA", "P2": "IT:BOLOGNA", "P3": None, "P4": "IT:CATANIA", "P5": "IT:ROME"}

CITING10 = [
    citing("C01", ["Pisa"], ["P1", "P2"]),
    citing("C02", ["Pisa", "Pisa", "Rome"], ["P1", "P1", "P3"]),
    citing("C03", ["Rome"], ["P2", "P4", "P5"]),
    citing("C04", ["Catania", "Turin"], ["P1"]),  # LAU tie
    citing("C05", ["UCL, London, England"], ["P1", "P2"]),
    citing("C06", ["Novartis, Basel, Switzerland", "Hannover Med Sch, Hannover, Germany",
                   "X, Hannover, Germany"], ["P4"]),
    citing("C07", ["Bologna"], ["P2", "P9"]),
    citing("C08", ["Milan", "Milan"], ["P5", "P4", "P1"]),
    citing("C09", ["Seoul Natl Univ, Seoul, South Korea", "Bologna"], ["P1"]),  # country tie
    citing("C10", ["Catania"], ["P4", "P3"]),
]
CITING10_COUNTRY = {"C01": "IT", "C02": "IT", "C03": "IT", "C04": "IT", "C05": "GB", "C06": "DE",
                    "C07": "IT", "C08": "IT", "C09": None, "C10": "IT"}
CITING10_LAU = {"C01": "IT:PISA", "C02": "IT:PISA", "C03": "IT:ROME", "C04": None, "C07": "IT:BOLOGNA",
                "C08": "IT:MILAN", "C10": "IT:CATANIA"}


def attribute(cited_recs, citing_recs, g, home="IT"):
    ca = {r.pub_id: prevalent_territory_cited(r, g, home=home) for r in cited_recs}
    cg = {r.pub_id: assign_citing(r, home, g) for r in citing_recs}
    return ca, cg


def flows(cited_recs, citing_recs, g, level=AnalysisLevel.NATIONAL, partition=Partition.ALL):
    ca, cg = attribute(cited_recs, citing_recs, g)
    return build_flow_edges(ca, cg, citing_recs, level, g, "IT", partition)


# 10-row fixture; oracle values frozen from the exact rational solve in oracles.exact_ols
FIX_C = [12, 3, 7, 1, 25, 4, 9, 2, 15, 6]
FIX_MI = [1200, 300, 800, 50, 5000, 150, 2200, 90, 3100, 640]
FIX_MJ = [900, 1500, 400, 220, 2600, 700, 180, 1100, 450, 3000]
FIX_D = [35.0, 410.0, 120.5, 880.0, 15.2, 260.0, 95.0, 1020.0, 48.0, 330.0]
FIX_COEF = [0.30202326162470877, 0.34698342072848415, 0.11815189677168604, -0.3043610224395153]
FIX_SE = [1.3062244068103617, 0.10238919304435401, 0.05434684450418913, 0.09678024322845717]
FIX_R2 = 0.9746682103420037
FIX_COV = [
    [1.706222200947081, -0.1295150918440143, -0.03915531085400114, -0.11573148853840164],
    [-0.1295150918440143, 0.010483546852273993, 0.002058666060949463, 0.008990756953155052],
    [-0.03915531085400114, 0.002058666060949463, 0.002953579507562513, 0.0013302647084111824],
    [-0.11573148853840164, 0.008990756953155052, 0.0013302647084111824, 0.009366415479359331],
]


def fixture_inputs(d=FIX_D):
    edges = [FlowEdge(f"i{k}", f"j{k}", c, dk) for k, (c, dk) in enumerate(zip(FIX_C, d))]
    mi = MassTable({f"i{k}": m for k, m in enumerate(FIX_MI)})
    mj = MassTable({f"j{k}": m for k, m in enumerate(FIX_MJ)})
    return edges, mi, mj


def fixture_fit(d=FIX_D):
    return ols_fit(build_design(*fixture_inputs(d), Continuous()))
