#pragma once

// Output formats: enriched mention files, the identification breakdown,
// the preparation summary and IRC statistics. Everything here is a pure
// function of its inputs so reruns are byte-identical.

#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "ircm/corpus_prep.hpp"
#include "ircm/error.hpp"
#include "ircm/metrics.hpp"
#include "ircm/records.hpp"
#include "ircm/resolver.hpp"

namespace ircm {

inline constexpr std::string_view kIrcStatsSchema = "ircm.irc_stats/1";

inline std::string format_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline std::string csv_escape(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

/// Renders rows as a plain-text table; the first row is the header.
/// Columns after the first are right-aligned.
inline std::string aligned_table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& r : rows)
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (width.size() <= i) width.push_back(0);
      width[i] = std::max(width[i], ircm::detail::utf8_length(r[i]));
    }
  std::string out;
  auto rule = [&] {
    for (std::size_t i = 0; i < width.size(); ++i) {
      if (i) out += "  ";
      out += std::string(width[i], '-');
    }
    out += '\n';
  };
  for (std::size_t ri = 0; ri < rows.size(); ++ri) {
    const auto& r = rows[ri];
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) out += "  ";
      const std::string pad(width[i] - ircm::detail::utf8_length(r[i]), ' ');
      out += i == 0 ? r[i] + (i + 1 < r.size() ? pad : "") : pad + r[i];
    }
    out += '\n';
    if (ri == 0) rule();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Enriched mentions

inline nlohmann::ordered_json resolution_to_json(const Resolution& r) {
  nlohmann::ordered_json j;
  j["paper_id"] = r.paper_id;
  j["author_index"] = r.author_index;
  j["raw"] = r.raw;
  j["category"] = std::string(to_string(r.category));
  j["iso2"] = r.iso2 ? nlohmann::ordered_json(*r.iso2) : nlohmann::ordered_json(nullptr);
  j["evidence"] = r.evidence;
  j["ambiguous"] = r.ambiguous;
  return j;
}

inline void write_resolutions_jsonl(std::ostream& out, std::span<const Resolution> rs) {
  for (const auto& r : rs) out << resolution_to_json(r).dump() << '\n';
}

inline void write_resolutions_csv(std::ostream& out, std::span<const Resolution> rs) {
  out << "paper_id,author_index,raw,category,iso2,evidence,ambiguous\n";
  for (const auto& r : rs)
    out << csv_escape(r.paper_id) << ',' << r.author_index << ',' << csv_escape(r.raw) << ',' << to_string(r.category)
        << ',' << (r.iso2 ? *r.iso2 : "") << ',' << csv_escape(r.evidence) << ',' << (r.ambiguous ? "true" : "false")
        << '\n';
}

inline Resolution resolution_from_json(const nlohmann::json& j) {
  auto str = [&](const char* k) -> std::string {
    auto it = j.find(k);
    if (it == j.end() || !it->is_string()) throw InputError(std::string("enriched record lacks string field '") + k + "'");
    return it->get<std::string>();
  };
  Resolution r;
  r.paper_id = str("paper_id");
  r.raw = str("raw");
  r.evidence = str("evidence");
  auto cat = parse_category(str("category"));
  if (!cat) throw InputError("unknown category in enriched record");
  r.category = *cat;
  auto ai = j.find("author_index");
  if (ai == j.end() || !ai->is_number_unsigned()) throw InputError("enriched record lacks author_index");
  r.author_index = ai->get<std::size_t>();
  if (auto iso = j.find("iso2"); iso != j.end() && iso->is_string()) r.iso2 = iso->get<std::string>();
  if (auto amb = j.find("ambiguous"); amb != j.end() && amb->is_boolean()) r.ambiguous = amb->get<bool>();
  if (r.iso2.has_value() != identifies_country(r.category))
    throw InputError("enriched record for '" + r.paper_id + "' has iso2 inconsistent with its category");
  return r;
}

inline std::vector<Resolution> read_resolutions_jsonl(std::istream& in) {
  std::vector<Resolution> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) throw InputError("enriched file line " + std::to_string(lineno) + " is not JSON");
    try {
      out.push_back(resolution_from_json(j));
    } catch (const InputError& e) {
      throw InputError("enriched file line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Identification breakdown

inline constexpr std::array<std::pair<Category, std::string_view>, 5> kBreakdownRows = {{
    {Category::NullLike, "NA/Null values"},
    {Category::CountryName, "Country names identified"},
    {Category::ComponentPart, "Component parts identified"},
    {Category::Wikidata, "Identified by Wikidata"},
    {Category::Unidentified, "Not identified"},
}};

inline constexpr std::string_view kAffiliationsRow = "Affiliations";

inline IdentificationBreakdown breakdown_of(std::span<const Resolution> rs) {
  IdentificationBreakdown b;
  for (const auto& r : rs) b.add(r.category);
  return b;
}

inline std::string breakdown_csv(const IdentificationBreakdown& b) {
  std::string out = "row,count,percent\n";
  out += std::string(kAffiliationsRow) + "," + std::to_string(b.total) + ",100.00\n";
  for (const auto& [cat, name] : kBreakdownRows)
    out += std::string(name) + "," + std::to_string(b.count(cat)) + "," + format_fixed(b.percent(cat), 2) + "\n";
  return out;
}

inline std::string breakdown_text(const IdentificationBreakdown& b) {
  std::vector<std::vector<std::string>> rows = {{"Results", "Count", "Percent"}};
  rows.push_back({std::string(kAffiliationsRow), std::to_string(b.total), ""});
  for (const auto& [cat, name] : kBreakdownRows)
    rows.push_back({std::string(name), std::to_string(b.count(cat)), format_fixed(b.percent(cat), 2) + "%"});
  return aligned_table(rows);
}

// ---------------------------------------------------------------------------
// Preparation summary

struct PreparationReport {
  std::size_t total_works = 0;
  std::optional<int> first_year, last_year;
  std::size_t coauthored_works = 0;
  std::size_t rows_skipped = 0;
  std::size_t dropped_by_fos = 0;
  std::size_t dropped_as_overlap = 0;
  std::size_t single_author = 0;
  std::size_t no_author_data = 0;
  std::optional<FosFilter> fos;
};

template <std::ranges::input_range R>
void set_date_range(PreparationReport& rep, R&& records) {
  for (const BibRecord& r : records) {
    if (!r.year) continue;
    if (!rep.first_year || *r.year < *rep.first_year) rep.first_year = r.year;
    if (!rep.last_year || *r.year > *rep.last_year) rep.last_year = r.year;
  }
}

inline std::vector<std::pair<std::string, std::string>> preparation_rows(const PreparationReport& r) {
  std::string range = r.first_year ? std::to_string(*r.first_year) + "-" + std::to_string(*r.last_year) : "n/a";
  std::vector<std::pair<std::string, std::string>> rows = {
      {"Total works", std::to_string(r.total_works)},
      {"Date range", range},
      {"Unique, co-authored works", std::to_string(r.coauthored_works)},
      {"Rows skipped (malformed)", std::to_string(r.rows_skipped)},
      {"Dropped by FOS filter", std::to_string(r.dropped_by_fos)},
      {"Dropped as cross-set overlap", std::to_string(r.dropped_as_overlap)},
      {"Dropped as single-author", std::to_string(r.single_author)},
      {"Dropped for no author data", std::to_string(r.no_author_data)},
  };
  if (r.fos) {
    rows.push_back({"FOS terms", std::to_string(r.fos->terms.size())});
    rows.push_back({"FOS coverage of overlap", format_fixed(100.0 * r.fos->coverage, 2) + "%"});
  }
  return rows;
}

inline std::string preparation_csv(const PreparationReport& r) {
  std::string out = "feature,value\n";
  for (const auto& [k, v] : preparation_rows(r)) out += csv_escape(k) + "," + csv_escape(v) + "\n";
  return out;
}

inline std::string preparation_text(const PreparationReport& r) {
  std::vector<std::vector<std::string>> rows = {{"Features", "Value"}};
  for (const auto& [k, v] : preparation_rows(r)) rows.push_back({k, v});
  return aligned_table(rows);
}

// ---------------------------------------------------------------------------
// IRC statistics

inline nlohmann::ordered_json counts_json(const IrcCounts& c) {
  nlohmann::ordered_json j;
  j["total_papers"] = c.total_papers;
  j["international"] = c.international;
  j["domestic"] = c.domestic;
  j["unmeasurable"] = c.unmeasurable;
  auto ratio = c.irc_ratio();
  j["irc_ratio"] = ratio ? nlohmann::ordered_json(*ratio) : nlohmann::ordered_json(nullptr);
  return j;
}

inline std::string irc_stats_json(const IrcStats& s) {
  nlohmann::ordered_json j;
  j["schema"] = std::string(kIrcStatsSchema);
  const auto totals = counts_json(s.totals);
  for (const auto& [k, v] : totals.items()) j[k] = v;
  auto years = nlohmann::ordered_json::array();
  for (const auto& [y, c] : s.per_year) {
    nlohmann::ordered_json row;
    row["year"] = y ? nlohmann::ordered_json(*y) : nlohmann::ordered_json(nullptr);
    const auto counts = counts_json(c);
    for (const auto& [k, v] : counts.items()) row[k] = v;
    years.push_back(std::move(row));
  }
  j["per_year"] = std::move(years);
  auto pairs = nlohmann::ordered_json::array();
  for (const auto& [k, n] : s.pair_counts) pairs.push_back({{"a", k.first}, {"b", k.second}, {"papers", n}});
  j["pairs"] = std::move(pairs);
  return j.dump(2) + "\n";
}

inline std::string per_year_csv(const IrcStats& s) {
  std::string out = "year,total_papers,international,domestic,unmeasurable,irc_ratio\n";
  for (const auto& [y, c] : s.per_year) {
    auto ratio = c.irc_ratio();
    out += (y ? std::to_string(*y) : std::string("unknown")) + "," + std::to_string(c.total_papers) + "," +
           std::to_string(c.international) + "," + std::to_string(c.domestic) + "," + std::to_string(c.unmeasurable) +
           "," + (ratio ? format_fixed(*ratio, 6) : std::string()) + "\n";
  }
  return out;
}

inline std::string pairs_csv(const IrcStats& s) {
  std::string out = "country_a,country_b,papers\n";
  for (const auto& [k, n] : s.pair_counts) out += k.first + "," + k.second + "," + std::to_string(n) + "\n";
  return out;
}

inline std::string irc_summary_text(const IrcStats& s) {
  auto ratio = s.totals.irc_ratio();
  return aligned_table({{"Measure", "Value"},
                        {"Papers", std::to_string(s.totals.total_papers)},
                        {"International (>= 2 countries)", std::to_string(s.totals.international)},
                        {"Domestic (1 country)", std::to_string(s.totals.domestic)},
                        {"Unmeasurable (0 countries)", std::to_string(s.totals.unmeasurable)},
                        {"IRC ratio", ratio ? format_fixed(*ratio, 4) : "n/a"},
                        {"Country pairs", std::to_string(s.pair_counts.size())}});
}

}  // namespace ircm
