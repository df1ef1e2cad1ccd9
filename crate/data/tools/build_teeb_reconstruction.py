#!/usr/bin/env python3
"""Regenerate the bundled reconstruction of the inland-wetland valuation records.

Categorical structure (article ids, service x wetland type, service x method,
quality evidence) is fixed by hand below. Monetary values, site sizes and
noise are synthetic: log values are drawn from a log-linear benefit function
with Gaussian noise under a fixed seed, then converted back into the
reporting currency and year using normalization_rates.csv.

Usage: python3 data/tools/build_teeb_reconstruction.py
"""
import csv
import math
import os

import numpy as np

HERE = os.path.dirname(os.path.abspath(__file__))
DATA = os.path.dirname(HERE)
SEED = 20140611

# US CPI-based price index relative to 2007.
CPI = {
    1975: 53.8, 1980: 82.4, 1981: 90.9, 1985: 107.6, 1989: 124.0, 1990: 130.7,
    1991: 136.2, 1993: 144.5, 1994: 148.2, 1995: 152.4, 1996: 156.9, 1997: 160.5,
    1998: 163.0, 1999: 166.6, 2000: 172.2, 2001: 177.1, 2002: 179.9, 2003: 184.0,
    2004: 188.9, 2005: 195.3, 2006: 201.6, 2007: 207.342, 2008: 215.303,
    2009: 214.537, 2010: 218.056,
}
DEFLATOR = {y: round(v / CPI[2007], 6) for y, v in CPI.items()}
DEFLATOR[2007] = 1.0

# US$ per unit of currency.
FX = {
    ("CNY", 2005): 0.12205,
    ("DKK", 2001): 0.12040,
    ("EUR", 2003): 1.13120,
    ("NZD", 2006): 0.65100,
    ("AUD", 2000): 0.58060,
    ("MYR", 1995): 0.39290,
    ("ZAR", 2007): 0.14190,
}

# country: (GNI per capita 2007 US$, population per km2)
COUNTRY = {
    "USA": (46040, 32), "DNK": (55440, 128), "DEU": (38860, 236), "NZL": (28780, 16),
    "AUS": (35960, 3), "CHN": (2360, 141), "MYS": (6420, 81), "LAO": (630, 26),
    "LKA": (1540, 306), "NGA": (930, 162), "UGA": (370, 153), "ZMB": (770, 16),
    "BWA": (5840, 3), "ZAF": (5760, 40), "SEN": (870, 63), "DJI": (1090, 36),
    "CMR": (1050, 40), "MOZ": (330, 28), "WLD": (7958, 50), "KHM": (540, 80),
    "TZA": (400, 45), "KEN": (680, 65), "GBR": (42740, 251), "NLD": (45820, 488),
    "FRA": (38500, 114), "IND": (950, 380), "BRA": (5910, 23),
}

FP, PW, SM, UN = "Floodplains", "PeatWetlands", "SwampsMarshes", "Unspecified"
AC, CV, DMP, FI, MR, RC, TC, BT = (
    "AvoidedCost", "ContingentValuation", "DirectMarketPricing",
    "FactorIncomeProduction", "MitigationRestorationCost", "ReplacementCost",
    "TravelCost", "BenefitTransfer",
)

# article: (country, currency, value_year, site size ha,
#           evidence (degradation, activities, market_price, ideal_state),
#           article quality code, retained (service, type, method) items)
ARTICLES = {
    "Acharya2000": ("NGA", "USD", 1999, 3500, (0, 0, 0, 0), "1",
                    [("Food", FP, FI), ("WaterFlows", FP, FI)]),
    "Adekola2008": ("ZAF", "ZAR", 2007, 450, (1, 1, 1, 0), "2",
                    [("Food", UN, DMP), ("Food", UN, DMP),
                     ("RawMaterials", UN, DMP), ("RawMaterials", UN, DMP)]),
    "Barbier1991": ("NGA", "USD", 1989, 730000, (1, 1, 1, 0), "2",
                    [("Food", FP, DMP), ("Food", FP, DMP),
                     ("RawMaterials", FP, DMP), ("RawMaterials", FP, DMP)]),
    "Costanza1997": ("WLD", "USD", 1994, 330000000, (0, 0, 0, 0), "1",
                     [("Waste", UN, RC), ("SoilFertility", UN, RC),
                      ("Waste", UN, AC), ("Recreation", UN, FI)]),
    "DOC2007": ("NZL", "NZD", 2006, 5690, (0, 0, 0, 0), "1",
                [("Recreation", UN, DMP), ("Water", UN, MR)]),
    "Dubgaard2002": ("DNK", "DKK", 2001, 2200, (0, 1, 0, 1), "1",
                     [("ExtremeEvents", FP, AC), ("Water", FP, RC)]),
    "Emerton2005": ("ZMB", "USD", 2004, 550000, (0, 0, 1, 0), "1",
                    [("Food", FP, DMP), ("Food", FP, DMP),
                     ("RawMaterials", FP, DMP), ("RawMaterials", FP, DMP),
                     ("Medical", FP, DMP)]),
    "EmertonBos2004": ("LKA", "USD", 2003, 3068, (0, 0, 0, 0), "1",
                       [("ExtremeEvents", PW, AC), ("ExtremeEvents", PW, AC),
                        ("Waste", PW, MR)]),
    "EmertonMuramira1999": ("UGA", "USD", 1998, 26000, (0, 0, 1, 0), "1",
                            [("Food", UN, DMP), ("RawMaterials", UN, DMP),
                             ("Genepool", UN, DMP)]),
    "Emerton1998": ("DJI", "USD", 1997, 1200, (0, 0, 1, 0), "1",
                    [("RawMaterials", UN, DMP)]),
    "Gerrard2004": ("LAO", "USD", 2003, 2000, (0, 1, 1, 0), "2(1)",
                    [("Food", SM, DMP), ("Food", SM, DMP),
                     ("RawMaterials", SM, DMP), ("RawMaterials", SM, DMP),
                     ("ExtremeEvents", SM, AC)]),
    "Karanja2001": ("UGA", "USD", 2000, 18000, (0, 1, 1, 0), "2",
                    [("Food", UN, DMP), ("Food", UN, DMP),
                     ("RawMaterials", UN, DMP)]),
    "Kasthala2008": ("KHM", "USD", 2007, 9500, (0, 1, 1, 0), "2",
                     [("Food", UN, DMP), ("Food", UN, FI)]),
    "Kumari1996": ("MYS", "MYR", 1995, 56000, (1, 1, 0, 0), "2",
                   [("Genepool", PW, CV), ("Recreation", PW, CV),
                    ("Waste", PW, RC)]),
    "LantRoberts1990": ("USA", "USD", 1989, 120000, (1, 0, 0, 1), "1",
                        [("Genepool", UN, CV)]),
    "Loth2004": ("CMR", "USD", 2003, 600000, (1, 1, 1, 1), "1",
                 [("Food", FP, DMP), ("Food", FP, DMP),
                  ("RawMaterials", FP, DMP), ("Water", FP, DMP)]),
    "Ly2006": ("SEN", "USD", 2005, 16000, (0, 0, 0, 0), "1",
               [("Recreation", SM, TC)]),
    "Mallawaarachchi2001": ("AUS", "AUD", 2000, 14000, (0, 0, 0, 0), "1",
                            [("Genepool", SM, CV), ("Waste", SM, CV)]),
    "MeyerhoffDehnhardt2004": ("DEU", "EUR", 2003, 15000, (0, 0, 0, 0), "1",
                               [("Waste", FP, RC)]),
    "Mmopelwa2009": ("BWA", "USD", 2007, 1600000, (0, 1, 1, 0), "2",
                     [("Food", UN, DMP), ("RawMaterials", UN, DMP)]),
    "Phillips1998": ("UGA", "USD", 1997, 3000000, (0, 1, 1, 0), "2",
                     [("Medical", UN, DMP)]),
    "Rosales2005": ("LAO", "USD", 2004, 42000, (0, 0, 1, 0), "1",
                    [("Food", SM, DMP), ("RawMaterials", SM, DMP),
                     ("RawMaterials", SM, DMP), ("Ornamental", SM, DMP),
                     ("ExtremeEvents", SM, AC)]),
    "Schuijt2002": ("NGA", "USD", 2001, 350000, (1, 1, 1, 0), "2",
                    [("Food", FP, DMP), ("RawMaterials", FP, DMP),
                     ("Recreation", FP, DMP)]),
    "ThibodeauOstro1981": ("USA", "USD", 1980, 3420, (0, 1, 0, 1), "1",
                           [("Water", UN, RC)]),
    "Tong2007": ("CHN", "CNY", 2005, 2900, (1, 1, 0, 0), "2",
                 [("Waste", SM, RC), ("Climate", SM, AC), ("Water", SM, AC),
                  ("ExtremeEvents", SM, MR)]),
    "Turpie1999": ("ZMB", "USD", 1998, 250000, (0, 1, 0, 0), "2",
                   [("Waste", FP, FI)]),
    "Turpie2000": ("MOZ", "USD", 1999, 80000, (1, 0, 1, 0), "2",
                   [("RawMaterials", UN, DMP)]),
}

# Log-linear benefit function used to synthesize values.
COEF = {
    "const": 1.645, AC: 5.182, CV: 2.201, DMP: 0.140, RC: 2.944,
    "size": -0.183, "quality": 1.562, FP: 0.670, PW: 1.199, SM: 0.799,
    "Climate": -2.989, "ExtremeEvents": -1.944, "Food": 1.324, "Genepool": -1.598,
    "Medical": -2.609, "RawMaterials": 0.388, "Recreation": -1.339,
    "SoilFertility": -2.454, "gni": 0.257,
}
NOISE_SD = 1.8

SERVICES = ["Climate", "ExtremeEvents", "Food", "Genepool", "Medical", "Ornamental",
            "RawMaterials", "Recreation", "SoilFertility", "Waste", "Water", "WaterFlows"]
TYPES = [FP, PW, SM, UN]
METHODS_NO_BT = [AC, CV, DMP, FI, MR, RC, TC]

HEADER = ["record_id", "article_id", "biome", "wetland_type", "service", "method",
          "value_basis", "raw_value", "currency_code", "value_year", "wetland_size_ha",
          "gni_per_capita", "population_density", "ev_degradation_described",
          "ev_degrading_activities", "ev_market_price_method", "ev_ideal_state_assumed",
          "quality_code"]


def log_value(service, wtype, method, size, gni, state_code):
    y = COEF["const"] + COEF.get(method, 0.0) + COEF.get(wtype, 0.0) + COEF.get(service, 0.0)
    y += COEF["size"] * math.log(size) + COEF["gni"] * math.log(gni)
    if state_code.startswith("1"):
        y += COEF["quality"]
    return y


def to_raw(value_2007, currency, year):
    fx = 1.0 if currency == "USD" else FX[(currency, year)]
    return value_2007 * DEFLATOR[year] / fx


def fmt_value(v):
    return f"{v:.2f}" if v >= 1 else f"{v:.4f}"


def main():
    rng = np.random.default_rng(SEED)
    rows = []

    def add(article, country, currency, year, size, ev, code, service, wtype, method,
            basis="PerAnnum", log_v=None):
        gni, dens = COUNTRY[country]
        if log_v is None:
            log_v = rng.normal(6.0, 1.5)
        raw = to_raw(math.exp(log_v), currency, year)
        rows.append({
            "article_id": article, "biome": "InlandWetlands", "wetland_type": wtype,
            "service": service, "method": method, "value_basis": basis,
            "raw_value": fmt_value(raw), "currency_code": currency, "value_year": str(year),
            "wetland_size_ha": str(size), "gni_per_capita": str(gni),
            "population_density": str(dens),
            "ev_degradation_described": str(ev[0]), "ev_degrading_activities": str(ev[1]),
            "ev_market_price_method": str(ev[2]), "ev_ideal_state_assumed": str(ev[3]),
            "quality_code": code,
        })

    # Analysis set: 70 single-service, per-annum, primary estimates.
    for article, (country, cur, year, size, ev, code, items) in ARTICLES.items():
        gni = COUNTRY[country][0]
        for service, wtype, method in items:
            y = log_value(service, wtype, method, size, gni, code) + rng.normal(0.0, NOISE_SD)
            add(article, country, cur, year, size, ev, code, service, wtype, method, log_v=y)
    tong = [r for r in rows if r["article_id"] == "Tong2007" and r["service"] == "Waste"]
    tong[0]["raw_value"] = "5807.00"

    retained_articles = list(ARTICLES)

    def random_item(methods):
        return (SERVICES[rng.integers(len(SERVICES))], TYPES[rng.integers(len(TYPES))],
                methods[rng.integers(len(methods))])

    def from_article(article, service, wtype, method, basis="PerAnnum"):
        country, cur, year, size, ev, code, _ = ARTICLES[article]
        add(article, country, cur, year, size, ev, code, service, wtype, method, basis)

    # Per-annum items from retained articles that are later dropped:
    # 6 benefit transfer, 15 TEV, 8 "various".
    for i in range(6):
        s, t, _ = random_item(METHODS_NO_BT)
        from_article(retained_articles[(3 * i) % 27], s, t, BT)
    for i in range(15):
        _, t, m = random_item(METHODS_NO_BT)
        from_article(retained_articles[(5 * i + 1) % 27], "TEV", t, m)
    for i in range(8):
        _, t, m = random_item(METHODS_NO_BT)
        from_article(retained_articles[(7 * i + 2) % 27], "Various", t, m)

    # 16 articles whose per-annum items are all benefit transfer or TEV/various
    # (28 BT + 22 TEV/various = 50 items).
    countries = ["GBR", "NLD", "FRA", "IND", "BRA", "KEN", "TZA", "USA", "DEU", "CHN",
                 "KHM", "UGA", "ZAF", "AUS", "LKA", "SEN"]
    excluded = []
    for j in range(16):
        name = f"Excluded{j + 1:02d}"
        size = int(rng.integers(200, 500000))
        excluded.append((name, countries[j], size))
    plan = [BT] * 28 + ["TEV"] * 14 + ["Various"] * 8
    for k, kind in enumerate(plan):
        name, country, size = excluded[k % 16]
        s, t, m = random_item(METHODS_NO_BT)
        if kind == BT:
            m = BT
        else:
            s = kind
        add(name, country, "USD", 2000 + int(rng.integers(0, 8)), size, (0, 0, 0, 0), "",
            s, t, m)

    assert len(rows) == 149, len(rows)

    # 75 items not of the per-annum type: 45 from retained/excluded articles,
    # 30 from articles reporting only capitalized or one-off values.
    others = retained_articles + [e[0] for e in excluded]
    for i in range(45):
        article = others[(11 * i) % len(others)]
        s, t, m = random_item(METHODS_NO_BT + [BT])
        if article in ARTICLES:
            from_article(article, s, t, m, basis="Other")
        else:
            _, country, size = next(e for e in excluded if e[0] == article)
            add(article, country, "USD", 2003, size, (0, 0, 0, 0), "", s, t, m, "Other")
    for i in range(30):
        name = f"NonAnnual{(i % 12) + 1:02d}"
        s, t, m = random_item(METHODS_NO_BT + [BT])
        add(name, countries[i % 16], "USD", 1995 + (i % 12), int(rng.integers(100, 90000)),
            (0, 0, 0, 0), "", s, t, m, "Other")

    unique = rows
    assert len(unique) == 224
    # 31 repeated items: exact copies of earlier items.
    picks = rng.choice(len(unique), size=31, replace=False)
    dupes = [dict(unique[p]) for p in sorted(picks)]

    # Shuffle originals, then place each duplicate somewhere after its original.
    order = list(rng.permutation(len(unique)))
    table = [dict(unique[i]) for i in order]
    for d in dupes:
        key = tuple(d[c] for c in HEADER[1:])
        first = next(i for i, r in enumerate(table) if tuple(r[c] for c in HEADER[1:]) == key)
        pos = int(rng.integers(first + 1, len(table) + 1))
        table.insert(pos, d)
    assert len(table) == 255

    with open(os.path.join(DATA, "teeb_inland_wetlands.csv"), "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(HEADER)
        for i, r in enumerate(table):
            r["record_id"] = f"TEEB-IW-{i + 1:03d}"
            w.writerow([r[c] for c in HEADER])

    with open(os.path.join(DATA, "normalization_rates.csv"), "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["kind", "currency_code", "year", "rate"])
        for y in sorted(DEFLATOR):
            w.writerow(["deflator", "", y, f"{DEFLATOR[y]:.6f}".rstrip("0").rstrip(".")])
        for y in sorted(DEFLATOR):
            w.writerow(["fx", "USD", y, "1"])
        for (cur, y), rate in sorted(FX.items()):
            w.writerow(["fx", cur, y, rate])


if __name__ == "__main__":
    main()
