#!/usr/bin/env python3
"""Regenerate data/countries.tsv and data/component_parts*.tsv.

Reference lists come from pycountry (ISO 3166-1 / ISO 3166-2); curated
aliases and display-name overrides live in this file. The generated tables
are committed, so pycountry is only needed when refreshing them.
"""
import sys
from pathlib import Path

import pycountry

CANONICAL = {
    "BO": "Bolivia", "BQ": "Caribbean Netherlands", "CD": "Democratic Republic of the Congo",
    "CG": "Republic of the Congo", "FK": "Falkland Islands", "FM": "Micronesia",
    "GB": "United Kingdom", "IR": "Iran", "KP": "North Korea", "KR": "South Korea",
    "LA": "Laos", "MD": "Moldova", "MF": "Saint Martin", "PS": "Palestine",
    "RU": "Russia", "SH": "Saint Helena", "SX": "Sint Maarten", "SY": "Syria",
    "TW": "Taiwan", "TZ": "Tanzania", "US": "United States", "VA": "Vatican City",
    "VE": "Venezuela", "VG": "British Virgin Islands", "VI": "U.S. Virgin Islands",
    "VN": "Vietnam", "BN": "Brunei", "TR": "Turkey", "CZ": "Czechia",
    "CV": "Cape Verde", "TL": "Timor-Leste", "MO": "Macao", "CC": "Cocos (Keeling) Islands",
}

EXTRA = {
    "AE": ["UAE", "U.A.E."],
    "AT": ["Österreich"],
    "BA": ["Bosnia", "Bosnia-Herzegovina"],
    "BQ": ["Bonaire", "Sint Eustatius", "Saba"],
    "BR": ["Brasil"],
    "BS": ["The Bahamas", "Bahamas"],
    "CC": ["Cocos Islands", "Keeling Islands"],
    "CD": ["DR Congo", "DRC", "Congo-Kinshasa", "Democratic Republic of Congo"],
    "CG": ["Congo-Brazzaville", "Congo Republic"],
    "CH": ["Schweiz", "Suisse", "Svizzera"],
    "CI": ["Ivory Coast", "Cote d'Ivoire"],
    "CN": ["PRC", "P.R. China", "PR China", "P. R. China", "Mainland China"],
    "CV": ["Cabo Verde"],
    "CW": ["Curacao"],
    "CZ": ["Czech Republic"],
    "DE": ["Deutschland", "FRG", "Federal Republic of Germany"],
    "DK": ["Danmark"],
    "ES": ["España", "Espana"],
    "FI": ["Suomi"],
    "FM": ["Federated States of Micronesia"],
    "GB": ["UK", "U.K.", "Great Britain", "Britain",
           "United Kingdom of Great Britain and Northern Ireland"],
    "GM": ["The Gambia"],
    "IE": ["Republic of Ireland", "Eire"],
    "IR": ["Islamic Republic of Iran", "Persia"],
    "IT": ["Italia"],
    "KP": ["DPRK", "Democratic People's Republic of Korea"],
    "KR": ["Republic of Korea", "Korea", "S. Korea", "ROK"],
    "LA": ["Lao PDR", "Lao People's Democratic Republic"],
    "MD": ["Republic of Moldova"],
    "MK": ["Macedonia", "Republic of Macedonia"],
    "MM": ["Burma"],
    "MO": ["Macau"],
    "MX": ["México"],
    "NL": ["The Netherlands", "Holland", "Kingdom of the Netherlands", "Nederland"],
    "NO": ["Norge"],
    "PE": ["Perú"],
    "PL": ["Polska"],
    "PS": ["State of Palestine", "Palestinian Territories"],
    "RE": ["Reunion"],
    "BL": ["Saint Barthelemy"],
    "RU": ["Russian Federation"],
    "SE": ["Sverige"],
    "ST": ["Sao Tome and Principe", "São Tomé and Príncipe"],
    "SY": ["Syrian Arab Republic"],
    "SZ": ["Swaziland", "Kingdom of Eswatini"],
    "TL": ["East Timor"],
    "TR": ["Türkiye", "Turkiye", "Republic of Turkey"],
    "TW": ["Republic of China", "Chinese Taipei"],
    "TZ": ["United Republic of Tanzania"],
    "US": ["USA", "US", "U.S.", "U.S.A.", "United States of America"],
    "VA": ["Holy See", "Vatican City State"],
    "VE": ["Bolivarian Republic of Venezuela"],
    "VI": ["US Virgin Islands", "United States Virgin Islands"],
    "VN": ["Viet Nam", "Socialist Republic of Vietnam"],
    "AX": ["Aland Islands"],
}

# Alpha-3 codes that are ordinary words in English or Romance languages.
ALPHA3_STOP = {"AND", "CAN", "PER", "COL", "BEN", "MAR", "FIN", "NOR", "ARM",
               "BRA", "DOM", "EST", "GIN", "LIE", "MUS", "PAN", "SUR", "TON",
               "GAB", "TUN", "CUB", "ITA", "MAC", "ESP", "CHE", "AUS", "SOM",
               "GUY", "CAF", "BEL", "MDA", "PRY", "SLE", "VAT", "GRD", "NIC",
               "ATA", "ATF", "ALA", "COM", "MLI", "NER", "SEN", "TGO", "IRL",
               "PRT", "ROU", "DEU", "SGP", "POL", "ISR", "IND"}
ALPHA3_KEEP_ANYWAY = {"AUS", "IND", "ISR", "DEU", "ESP", "ITA", "CHE", "POL", "SGP",
                      "IRL", "PRT", "BEL", "ROU", "PRK"}


def country_rows():
    rows = []
    for c in pycountry.countries:
        iso2 = c.alpha_2
        name = getattr(c, "common_name", None) or c.name
        canonical = CANONICAL.get(iso2, name)
        aliases = []
        for cand in (c.name, getattr(c, "official_name", None), getattr(c, "common_name", None)):
            if cand and "," not in cand and cand != canonical:
                aliases.append(cand)
        if "(" in canonical:
            aliases.append(canonical.split("(")[0].strip())
        aliases.extend(EXTRA.get(iso2, []))
        a3 = c.alpha_3
        if a3 not in ALPHA3_STOP or a3 in ALPHA3_KEEP_ANYWAY:
            aliases.append(a3)
        seen, uniq = set(), []
        for a in aliases:
            if a.lower() not in seen and a.lower() != canonical.lower():
                seen.add(a.lower())
                uniq.append(a)
        rows.append((iso2, canonical, uniq))
    rows.sort()
    return rows


def us_rows():
    rows = []
    for s in pycountry.subdivisions.get(country_code="US"):
        if s.type not in ("State", "District"):
            continue
        code = s.code.split("-")[1]
        name = s.name
        abbrevs = [code]
        if code == "DC":
            name = "District of Columbia"
            abbrevs += ["D.C.", "Washington DC", "Washington D.C."]
        rows.append((name, abbrevs, "US"))
    rows.sort()
    assert len(rows) == 51, len(rows)
    return rows


UK_ROWS = [
    ("England", [], "GB"),
    ("Northern Ireland", ["N. Ireland"], "GB"),
    ("Scotland", [], "GB"),
    ("Wales", [], "GB"),
]


def ext_rows():
    rows = []
    for cc in ("CA", "AU"):
        for s in pycountry.subdivisions.get(country_code=cc):
            code = s.code.split("-")[1]
            rows.append((s.name, [code], cc))
    rows.sort()
    return rows


def write_parts(path, rows, header):
    with open(path, "w", encoding="utf-8") as f:
        f.write(header)
        for name, abbrevs, parent in rows:
            f.write(f"{name}\t{'|'.join(abbrevs)}\t{parent}\n")


def main(out_dir):
    out = Path(out_dir)
    with open(out / "countries.tsv", "w", encoding="utf-8") as f:
        f.write("# ISO 3166-1 countries: iso2<TAB>canonical_name<TAB>alias|alias|...\n")
        f.write("# Aliases are normalized on load. ISO alpha-2 codes are deliberately absent\n")
        f.write("# except US and UK.\n")
        for iso2, canonical, aliases in country_rows():
            f.write(f"{iso2}\t{canonical}\t{'|'.join(aliases)}\n")
    write_parts(out / "component_parts.tsv", us_rows() + UK_ROWS,
                "# Component parts: part_name<TAB>abbrev|abbrev|...<TAB>parent_iso2\n"
                "# US states + DC (USPS codes) and the four UK nations.\n")
    write_parts(out / "component_parts_extended.tsv", ext_rows(),
                "# Optional extension: Canadian provinces/territories and Australian\n"
                "# states/territories. Loaded only with --extended-parts.\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data")
