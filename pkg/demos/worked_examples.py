"""
Prevalent territories for three real bylines
============================================

Each publication is pinned to one territory. Cited publications carry the
author-to-affiliation links, so every author's unit weight is split over
their affiliations. Citing publications only list addresses, so each
address counts once.
"""

from citegravity.assignment import (
    prevalent_country_citing,
    prevalent_lau_citing,
    prevalent_territory_cited,
)
from citegravity.geodesy import default_gazetteer
from citegravity.ingest import Author, CitedRecord, CitingRecord, parse_address

g = default_gazetteer()

###############################################################################
# A cited paper with six authors. Borghi has two affiliations (Bologna and
# Rome), so Bologna collects 1 + 1 + 0.5 = 2.5 of the 6 authorships.

affiliations = (
    "Univ Bologna, Dept Psychol, I-40127 Bologna, Italy",
    "Rhein Westfal TH Aachen, Div Cognit Neurol, D-52062 Aachen, Germany",
    "Univ Catanzaro, Dept Med Sci, Catanzaro, Italy",
    "Univ Bologna, Dept Commun Disciplines, Bologna, Italy",
    "Univ Parma, Dept Neurosci, I-43100 Parma, Italy",
    "CNR, Inst Cognit Sci & Technol, Rome, Italy",
)
authors = (
    Author("Scorilli, C", (0,)),
    Author("Binkofski, F", (1,)),
    Author("Buccino, G", (2,)),
    Author("Nicoletti, R", (3,)),
    Author("Riggio, L", (4,)),
    Author("Borghi, AM", (0, 5)),
)
paper = CitedRecord("10.3389/fpsyg.2011.00227", 2011, authors, affiliations)

for raw in affiliations:
    print(f"{raw:<72} -> {parse_address(raw, g)}")

a = prevalent_territory_cited(paper, g)
print("\nweights:", {k: str(v) for k, v in sorted(a.weights.items())})
print(f"prevalent: {a.territory.name}, share {a.share} = {float(a.share):.1%}")

###############################################################################
# A citing paper from eight institutions in six countries. Only Korea
# appears twice.

blood = CitingRecord(
    "10.1182/blood-2010-01-261289",
    2010,
    (
        "Catholic Univ Korea, Seoul St Marys Hosp, Div Hematol, Seoul 137701, South Korea",
        "Seoul Natl Univ, Coll Med, Seoul, South Korea",
        "Shanghai Med Univ 2, Ruijin Hosp, Shanghai, Peoples R China",
        "Hannover Med Sch, D-30623 Hannover, Germany",
        "Taipei City Hosp, Taipei, Taiwan",
        "Novartis Pharmaceut, E Hanover, NJ USA",
        "Novartis Pharma AG, Basel, Switzerland",
        "UCL, London, England",
    ),
    ("-",),
)
c = prevalent_country_citing(blood, g)
print(f"\n{blood.pub_id}: {c.territory.name} with {c.weights[c.territory_id]} of {len(blood.addresses)} addresses")

###############################################################################
# Eleven addresses: Italy wins the country count with three, and among the
# Italian addresses Catania beats Turin two to one.

inorg = CitingRecord(
    "10.1021/acs.inorgchem.8b02267",
    2018,
    (
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
    ),
    ("-",),
)
country = prevalent_country_citing(inorg, g)
lau = prevalent_lau_citing(inorg, "IT", g)
print(f"{inorg.pub_id}: country {country.territory.name} "
      f"({ {k: int(v) for k, v in sorted(country.weights.items())} }), LAU {lau.territory.name}")
