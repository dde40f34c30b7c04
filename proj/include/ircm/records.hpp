#pragma once

// Bibliographic record model and the three input readers.
//
//   MAG_TSV        headerless; paper_id, author_index, org, title, year, fos
//                  (fos is '|'-separated). One row per author; consecutive
//                  rows with the same paper_id form one record.
//   GENERIC_CSV    header row with at least paper_id, author_index,
//                  affiliation; optional title, year, fos, doi. Grouped like
//                  MAG_TSV.
//   GENERIC_JSONL  one record object per line:
//                  {"paper_id", "title", "year", "fos": [...], "doi",
//                   "source", "authors": [{"affiliation", "author_index"?}]}
//
// Malformed rows are skipped and counted in the ParseReport; they never abort
// a read. An unreadable file or unknown format throws InputError.

#include <charconv>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "json.hpp"

#include "ircm/error.hpp"

namespace ircm {

enum class Source { ACM, MAG, GENERIC };
enum class InputFormat { MagTsv, GenericCsv, GenericJsonl };

inline std::string_view to_string(Source s) {
  switch (s) {
    case Source::ACM: return "ACM";
    case Source::MAG: return "MAG";
    case Source::GENERIC: return "GENERIC";
  }
  return "GENERIC";
}

inline std::optional<Source> parse_source(std::string_view s) {
  if (s == "ACM" || s == "acm") return Source::ACM;
  if (s == "MAG" || s == "mag") return Source::MAG;
  if (s == "GENERIC" || s == "generic") return Source::GENERIC;
  return std::nullopt;
}

inline InputFormat parse_format(std::string_view s) {
  if (s == "mag" || s == "mag_tsv" || s == "MAG_TSV" || s == "tsv") return InputFormat::MagTsv;
  if (s == "csv" || s == "generic_csv" || s == "GENERIC_CSV") return InputFormat::GenericCsv;
  if (s == "jsonl" || s == "generic_jsonl" || s == "GENERIC_JSONL") return InputFormat::GenericJsonl;
  throw InputError("unknown input format '" + std::string(s) + "' (expected mag_tsv, generic_csv or generic_jsonl)");
}

inline InputFormat infer_format(const std::filesystem::path& p) {
  const auto ext = p.extension().string();
  if (ext == ".tsv") return InputFormat::MagTsv;
  if (ext == ".csv") return InputFormat::GenericCsv;
  if (ext == ".jsonl" || ext == ".ndjson") return InputFormat::GenericJsonl;
  throw InputError("cannot infer input format from '" + p.string() + "'; pass --format");
}

struct AffiliationMention {
  std::string paper_id;
  std::size_t author_index = 0;
  std::string raw;

  friend bool operator==(const AffiliationMention&, const AffiliationMention&) = default;
};

struct BibRecord {
  std::string paper_id;
  Source source = Source::GENERIC;
  std::string title;
  std::optional<int> year;  // absent when missing or outside [1800, 2100]
  bool year_invalid = false;
  std::string doi;
  std::vector<std::string> fos_terms;
  std::vector<AffiliationMention> mentions;

  friend bool operator==(const BibRecord&, const BibRecord&) = default;
};

inline constexpr int kMinYear = 1800;
inline constexpr int kMaxYear = 2100;

struct ParseReport {
  std::size_t rows_read = 0;
  std::size_t records_yielded = 0;
  std::size_t rows_skipped = 0;
  std::vector<std::string> skip_samples;  // first few reasons, for diagnostics

  void skip(std::size_t row, std::string why) {
    ++rows_skipped;
    if (skip_samples.size() < 20) skip_samples.push_back("row " + std::to_string(row) + ": " + std::move(why));
  }
};

namespace detail {

inline std::optional<long long> parse_int(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.empty()) return std::nullopt;
  long long v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

inline void set_year(BibRecord& r, std::string_view text) {
  if (text.find_first_not_of(" \t\r") == std::string_view::npos) return;
  auto y = parse_int(text);
  if (y && *y >= kMinYear && *y <= kMaxYear) {
    r.year = static_cast<int>(*y);
  } else {
    r.year_invalid = true;
  }
}

inline std::vector<std::string> split_fos(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    auto pos = s.find('|', start);
    auto piece = s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
    while (!piece.empty() && piece.front() == ' ') piece.remove_prefix(1);
    while (!piece.empty() && (piece.back() == ' ' || piece.back() == '\r')) piece.remove_suffix(1);
    if (!piece.empty()) out.emplace_back(piece);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

// RFC 4180 record: quoted fields may contain separators, doubled quotes and
// newlines. Returns false at end of input.
inline bool read_csv_record(std::istream& in, std::vector<std::string>& fields) {
  fields.clear();
  std::string line;
  if (!std::getline(in, line)) return false;
  std::string field;
  bool quoted = false;
  for (;;) {
    for (std::size_t i = 0; i < line.size(); ++i) {
      char c = line[i];
      if (quoted) {
        if (c == '"') {
          if (i + 1 < line.size() && line[i + 1] == '"') {
            field.push_back('"');
            ++i;
          } else {
            quoted = false;
          }
        } else {
          field.push_back(c);
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        fields.push_back(std::move(field));
        field.clear();
      } else if (c == '\r' && i + 1 == line.size()) {
      } else {
        field.push_back(c);
      }
    }
    if (!quoted) break;
    field.push_back('\n');
    if (!std::getline(in, line)) break;
  }
  fields.push_back(std::move(field));
  return true;
}

}  // namespace detail

/// Pull-based reader: next() yields records in input order.
class RecordReader {
 public:
  RecordReader(std::istream& in, InputFormat format, Source source = Source::GENERIC)
      : in_(in), format_(format), source_(format == InputFormat::MagTsv ? Source::MAG : source) {
    if (format_ == InputFormat::GenericCsv) read_csv_header();
  }

  std::optional<BibRecord> next() {
    auto r = format_ == InputFormat::GenericJsonl ? next_jsonl() : next_grouped();
    if (r) ++report_.records_yielded;
    return r;
  }

  const ParseReport& report() const noexcept { return report_; }

 private:
  struct Row {
    std::string paper_id;
    std::size_t author_index = 0;
    std::string affiliation, title, year, fos, doi;
  };

  void read_csv_header() {
    std::vector<std::string> h;
    if (!detail::read_csv_record(in_, h)) throw InputError("CSV input is empty; a header row is required");
    if (!h.empty() && h[0].rfind("\xEF\xBB\xBF", 0) == 0) h[0].erase(0, 3);
    for (std::size_t i = 0; i < h.size(); ++i) {
      const auto& name = h[i];
      if (name == "paper_id") col_.paper_id = i;
      else if (name == "author_index") col_.author_index = i;
      else if (name == "affiliation") col_.affiliation = i;
      else if (name == "title") col_.title = i;
      else if (name == "year") col_.year = i;
      else if (name == "fos") col_.fos = i;
      else if (name == "doi") col_.doi = i;
    }
    if (!col_.paper_id || !col_.author_index || !col_.affiliation)
      throw InputError("CSV header must contain paper_id, author_index and affiliation");
  }

  // Reads the next well-formed row; malformed rows are counted and skipped.
  std::optional<Row> read_row() {
    std::vector<std::string> f;
    for (;;) {
      if (format_ == InputFormat::MagTsv) {
        std::string line;
        if (!std::getline(in_, line)) return std::nullopt;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ++report_.rows_read;
        f.clear();
        std::size_t start = 0;
        for (;;) {
          auto pos = line.find('\t', start);
          f.push_back(line.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
          if (pos == std::string::npos) break;
          start = pos + 1;
        }
        if (f.size() != 6) {
          report_.skip(report_.rows_read, "expected 6 tab-separated columns, got " + std::to_string(f.size()));
          continue;
        }
        Row r{f[0], 0, f[2], f[3], f[4], f[5], {}};
        if (auto ai = detail::parse_int(f[1]); ai && *ai >= 0) {
          r.author_index = static_cast<std::size_t>(*ai);
        } else {
          report_.skip(report_.rows_read, "bad author_index");
          continue;
        }
        if (r.paper_id.empty()) {
          report_.skip(report_.rows_read, "missing paper_id");
          continue;
        }
        return r;
      }
      if (!detail::read_csv_record(in_, f)) return std::nullopt;
      if (f.size() == 1 && f[0].empty()) continue;
      ++report_.rows_read;
      auto get = [&](const std::optional<std::size_t>& c) -> std::string { return c && *c < f.size() ? f[*c] : std::string(); };
      if (*col_.affiliation >= f.size() || *col_.author_index >= f.size()) {
        report_.skip(report_.rows_read, "too few columns");
        continue;
      }
      Row r{get(col_.paper_id), 0, get(col_.affiliation), get(col_.title), get(col_.year), get(col_.fos), get(col_.doi)};
      if (r.paper_id.empty()) {
        report_.skip(report_.rows_read, "missing paper_id");
        continue;
      }
      if (auto ai = detail::parse_int(get(col_.author_index)); ai && *ai >= 0) {
        r.author_index = static_cast<std::size_t>(*ai);
      } else {
        report_.skip(report_.rows_read, "bad author_index");
        continue;
      }
      return r;
    }
  }

  std::optional<BibRecord> next_grouped() {
    std::optional<BibRecord> current;
    std::unordered_set<std::size_t> authors;
    auto start = [&](Row& row) {
      BibRecord r;
      r.paper_id = row.paper_id;
      r.source = source_;
      r.title = std::move(row.title);
      detail::set_year(r, row.year);
      r.fos_terms = detail::split_fos(row.fos);
      r.doi = std::move(row.doi);
      current = std::move(r);
      authors.clear();
    };
    if (pending_ && seen_.count(pending_->paper_id)) {
      report_.skip(report_.rows_read, "paper_id '" + pending_->paper_id + "' reappears after other records");
      pending_.reset();
    }
    if (pending_) {
      start(*pending_);
      authors.insert(pending_->author_index);
      current->mentions.push_back({current->paper_id, pending_->author_index, std::move(pending_->affiliation)});
      pending_.reset();
    }
    while (auto row = read_row()) {
      if (current && row->paper_id != current->paper_id) {
        pending_ = std::move(row);
        break;
      }
      if (!current) {
        if (seen_.count(row->paper_id)) {
          report_.skip(report_.rows_read, "paper_id '" + row->paper_id + "' reappears after other records");
          continue;
        }
        start(*row);
      }
      if (!authors.insert(row->author_index).second) {
        report_.skip(report_.rows_read, "duplicate author_index " + std::to_string(row->author_index));
        continue;
      }
      current->mentions.push_back({current->paper_id, row->author_index, std::move(row->affiliation)});
    }
    if (current) seen_.insert(current->paper_id);
    return current;
  }

  std::optional<BibRecord> next_jsonl() {
    std::string line;
    while (std::getline(in_, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") == std::string::npos) continue;
      ++report_.rows_read;
      auto j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.is_object()) {
        report_.skip(report_.rows_read, "not a JSON object");
        continue;
      }
      BibRecord r;
      r.source = source_;
      const auto id = j.find("paper_id");
      if (id != j.end() && id->is_string()) {
        r.paper_id = id->get<std::string>();
      } else if (id != j.end() && id->is_number_integer()) {
        r.paper_id = std::to_string(id->get<long long>());
      }
      if (r.paper_id.empty()) {
        report_.skip(report_.rows_read, "missing paper_id");
        continue;
      }
      if (seen_.count(r.paper_id)) {
        report_.skip(report_.rows_read, "duplicate paper_id '" + r.paper_id + "'");
        continue;
      }
      bool ok = true;
      if (auto t = j.find("title"); t != j.end() && t->is_string()) r.title = t->get<std::string>();
      if (auto s = j.find("source"); s != j.end() && s->is_string())
        if (auto src = parse_source(s->get<std::string>())) r.source = *src;
      if (auto d = j.find("doi"); d != j.end() && d->is_string()) r.doi = d->get<std::string>();
      if (auto y = j.find("year"); y != j.end() && !y->is_null()) {
        if (y->is_number_integer()) detail::set_year(r, std::to_string(y->get<long long>()));
        else if (y->is_string()) detail::set_year(r, y->get<std::string>());
        else r.year_invalid = true;
      }
      if (auto fos = j.find("fos"); fos != j.end() && !fos->is_null()) {
        if (!fos->is_array()) {
          ok = false;
        } else {
          for (const auto& t : *fos)
            if (t.is_string()) r.fos_terms.push_back(t.get<std::string>());
        }
      }
      if (auto authors = j.find("authors"); ok && authors != j.end() && !authors->is_null()) {
        if (!authors->is_array()) {
          ok = false;
        } else {
          std::unordered_set<std::size_t> used;
          std::size_t pos = 0;
          for (const auto& a : *authors) {
            if (!a.is_object()) {
              ok = false;
              break;
            }
            std::size_t idx = pos++;
            if (auto ai = a.find("author_index"); ai != a.end()) {
              if (!ai->is_number_integer() || ai->get<long long>() < 0) {
                ok = false;
                break;
              }
              idx = static_cast<std::size_t>(ai->get<long long>());
            }
            if (!used.insert(idx).second) {
              ok = false;
              break;
            }
            std::string raw;
            if (auto af = a.find("affiliation"); af != a.end() && af->is_string()) raw = af->get<std::string>();
            r.mentions.push_back({r.paper_id, idx, std::move(raw)});
          }
        }
      }
      if (!ok) {
        report_.skip(report_.rows_read, "schema violation in record '" + r.paper_id + "'");
        continue;
      }
      seen_.insert(r.paper_id);
      return r;
    }
    return std::nullopt;
  }

  struct Columns {
    std::optional<std::size_t> paper_id, author_index, affiliation, title, year, fos, doi;
  };

  std::istream& in_;
  InputFormat format_;
  Source source_;
  Columns col_;
  ParseReport report_;
  std::optional<Row> pending_;
  std::unordered_set<std::string> seen_;
};

/// Reads a whole file. Throws InputError when the file cannot be opened.
inline std::vector<BibRecord> read_records(const std::filesystem::path& path, InputFormat format,
                                           ParseReport* report = nullptr, Source source = Source::GENERIC) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open input '" + path.string() + "'");
  RecordReader reader(in, format, source);
  std::vector<BibRecord> out;
  while (auto r = reader.next()) out.push_back(std::move(*r));
  if (in.bad()) throw InputError("read error on '" + path.string() + "'");
  if (report) *report = reader.report();
  return out;
}

inline nlohmann::ordered_json record_to_json(const BibRecord& r) {
  nlohmann::ordered_json j;
  j["paper_id"] = r.paper_id;
  j["source"] = std::string(to_string(r.source));
  j["title"] = r.title;
  j["year"] = r.year ? nlohmann::ordered_json(*r.year) : nlohmann::ordered_json(nullptr);
  if (!r.doi.empty()) j["doi"] = r.doi;
  j["fos"] = r.fos_terms;
  auto authors = nlohmann::ordered_json::array();
  for (const auto& m : r.mentions) authors.push_back({{"author_index", m.author_index}, {"affiliation", m.raw}});
  j["authors"] = std::move(authors);
  return j;
}

inline void write_record_jsonl(std::ostream& out, const BibRecord& r) { out << record_to_json(r).dump() << '\n'; }

}  // namespace ircm
