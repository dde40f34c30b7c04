#pragma once

// Country / component-part reference tables and exact-match lookups.
//
// Table files (UTF-8, tab-separated, '#' starts a comment line):
//   countries.tsv                 iso2  canonical_name  alias|alias|...
//   component_parts.tsv           part_name  abbrev|abbrev|...  parent_iso2
//   component_parts_extended.tsv  same layout, loaded only on request
//   ambiguity.tsv                 token  interp|interp|...  marker|marker|...
//   masks.tsv                     one phrase per line (optional file)
//
// All names, aliases, abbreviations, markers and masks are stored in
// normalized form (see normalize.hpp).

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "ircm/error.hpp"
#include "ircm/normalize.hpp"

namespace ircm {

struct CountryEntry {
  std::string iso2;
  std::string canonical_name;
  std::vector<std::string> aliases;
};

struct ComponentPartEntry {
  std::string part_name;
  std::vector<std::string> abbreviations;
  std::string parent_iso2;
};

struct Interpretation {
  enum class Kind { Country, Part };
  Kind kind = Kind::Country;
  std::string iso2;       // country code, or parent code for a part
  std::string part_name;  // only for Kind::Part

  friend bool operator==(const Interpretation&, const Interpretation&) = default;
};

struct AmbiguityEntry {
  std::string token;
  std::vector<Interpretation> preferences;
  std::vector<std::string> context_markers;
};

struct CountryMatch {
  std::string iso2;
  std::string matched_alias;

  friend bool operator==(const CountryMatch&, const CountryMatch&) = default;
};

struct PartMatch {
  std::string parent_iso2;
  std::string part_name;

  friend bool operator==(const PartMatch&, const PartMatch&) = default;
};

struct GazetteerOptions {
  bool extended_parts = false;
};

namespace detail {

struct StringHash {
  using is_transparent = void;
  std::size_t operator()(std::string_view s) const noexcept { return std::hash<std::string_view>{}(s); }
};

template <typename V>
using StringMap = std::unordered_map<std::string, V, StringHash, std::equal_to<>>;
using StringSet = std::unordered_set<std::string, StringHash, std::equal_to<>>;

inline std::vector<std::string> split_on(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::string trim_copy(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

// Calls fn(line_number, fields) for each non-comment, non-blank line.
template <typename Fn>
void for_each_table_line(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string(), 0, "cannot open table file");
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (lineno == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (trim_copy(line).empty() || line.front() == '#') continue;
    fn(lineno, split_on(line, '\t'));
  }
}

inline std::size_t token_count(std::string_view normalized) {
  if (normalized.empty()) return 0;
  return static_cast<std::size_t>(std::count(normalized.begin(), normalized.end(), ' ')) + 1;
}

// Short codes (USA, U.S.A., MA, PRC) only count when they stand alone in a
// segment or end the affiliation; see match_step1.
inline bool is_code_like(std::string_view normalized) {
  std::size_t run = 0;
  for (char c : normalized) {
    if (c == ' ') {
      run = 0;
    } else if (++run > 3) {
      return false;
    }
  }
  return true;
}

}  // namespace detail

std::vector<CountryEntry> parse_country_table(const std::filesystem::path& path);
std::vector<ComponentPartEntry> parse_component_part_table(const std::filesystem::path& path);
std::vector<AmbiguityEntry> parse_ambiguity_table(const std::filesystem::path& path);

/// Immutable lookup structure over the country, component-part and
/// ambiguity tables. Safe for concurrent reads.
class Gazetteer {
 public:
  struct AliasInfo {
    std::size_t index = 0;  // into countries() or parts()
    bool code_like = false;
  };

  static Gazetteer load(const std::filesystem::path& data_dir, GazetteerOptions opts = {});

  /// Validates and indexes in-memory tables. Throws ConfigError when an alias
  /// maps to two entries and is not covered by the ambiguity table, when a
  /// part names an unknown parent country, or when a token is both a country
  /// alias and a part alias without an ambiguity entry.
  static Gazetteer from_tables(std::vector<CountryEntry> countries, std::vector<ComponentPartEntry> parts,
                               std::vector<AmbiguityEntry> ambiguities, std::vector<std::string> masks = {},
                               std::string origin = "<memory>");

  std::optional<CountryMatch> lookup_country(std::string_view token) const {
    const AliasInfo* a = country_alias(token);
    if (!a) return std::nullopt;
    return CountryMatch{countries_[a->index].iso2, std::string(token)};
  }

  std::optional<PartMatch> lookup_component_part(std::string_view token) const {
    const AliasInfo* a = part_alias(token);
    if (!a) return std::nullopt;
    const auto& p = parts_[a->index];
    return PartMatch{p.parent_iso2, p.part_name};
  }

  const AliasInfo* country_alias(std::string_view token) const {
    auto it = country_index_.find(token);
    return it == country_index_.end() ? nullptr : &it->second;
  }

  const AliasInfo* part_alias(std::string_view token) const {
    auto it = part_index_.find(token);
    return it == part_index_.end() ? nullptr : &it->second;
  }

  const AmbiguityEntry* ambiguity(std::string_view token) const {
    auto it = ambiguity_index_.find(token);
    return it == ambiguity_index_.end() ? nullptr : &ambiguities_[it->second];
  }

  bool is_mask(std::string_view phrase) const { return masks_.find(phrase) != masks_.end(); }

  /// True when some alias, part name, abbreviation or mask starts with `token`.
  bool starts_any_phrase(std::string_view token) const { return first_tokens_.find(token) != first_tokens_.end(); }

  /// Longest phrase (in tokens) across aliases, parts and masks.
  std::size_t max_phrase_tokens() const noexcept { return max_phrase_tokens_; }

  const CountryEntry* country(std::string_view iso2) const {
    auto it = by_iso2_.find(iso2);
    return it == by_iso2_.end() ? nullptr : &countries_[it->second];
  }
  bool has_country(std::string_view iso2) const { return country(iso2) != nullptr; }

  const std::vector<CountryEntry>& countries() const noexcept { return countries_; }
  const std::vector<ComponentPartEntry>& parts() const noexcept { return parts_; }
  const std::vector<AmbiguityEntry>& ambiguities() const noexcept { return ambiguities_; }

 private:
  void note_phrase(const std::string& phrase) {
    max_phrase_tokens_ = std::max(max_phrase_tokens_, detail::token_count(phrase));
    first_tokens_.insert(phrase.substr(0, phrase.find(' ')));
  }

  std::vector<CountryEntry> countries_;
  std::vector<ComponentPartEntry> parts_;
  std::vector<AmbiguityEntry> ambiguities_;
  detail::StringMap<AliasInfo> country_index_;
  detail::StringMap<AliasInfo> part_index_;
  detail::StringMap<std::size_t> ambiguity_index_;
  detail::StringMap<std::size_t> by_iso2_;
  detail::StringSet masks_;
  detail::StringSet first_tokens_;
  std::size_t max_phrase_tokens_ = 1;
};

// ---------------------------------------------------------------------------

inline std::vector<CountryEntry> parse_country_table(const std::filesystem::path& path) {
  std::vector<CountryEntry> rows;
  detail::for_each_table_line(path, [&](std::size_t lineno, const std::vector<std::string>& f) {
    if (f.size() < 2 || f.size() > 3) throw ConfigError(path.string(), lineno, "expected iso2<TAB>name<TAB>aliases");
    CountryEntry e;
    e.iso2 = detail::trim_copy(f[0]);
    e.canonical_name = detail::trim_copy(f[1]);
    if (e.iso2.size() != 2 || !std::all_of(e.iso2.begin(), e.iso2.end(), [](char c) { return c >= 'A' && c <= 'Z'; }))
      throw ConfigError(path.string(), lineno, "iso2 must be two upper-case letters: '" + e.iso2 + "'");
    if (e.canonical_name.empty()) throw ConfigError(path.string(), lineno, "empty canonical name");
    if (f.size() == 3 && !detail::trim_copy(f[2]).empty())
      for (auto& a : detail::split_on(f[2], '|'))
        if (auto t = detail::trim_copy(a); !t.empty()) e.aliases.push_back(std::move(t));
    rows.push_back(std::move(e));
  });
  return rows;
}

inline std::vector<ComponentPartEntry> parse_component_part_table(const std::filesystem::path& path) {
  std::vector<ComponentPartEntry> rows;
  detail::for_each_table_line(path, [&](std::size_t lineno, const std::vector<std::string>& f) {
    if (f.size() != 3) throw ConfigError(path.string(), lineno, "expected part_name<TAB>abbrevs<TAB>parent_iso2");
    ComponentPartEntry e;
    e.part_name = detail::trim_copy(f[0]);
    e.parent_iso2 = detail::trim_copy(f[2]);
    if (e.part_name.empty()) throw ConfigError(path.string(), lineno, "empty part name");
    if (e.parent_iso2.size() != 2) throw ConfigError(path.string(), lineno, "bad parent iso2 '" + e.parent_iso2 + "'");
    if (!detail::trim_copy(f[1]).empty())
      for (auto& a : detail::split_on(f[1], '|'))
        if (auto t = detail::trim_copy(a); !t.empty()) e.abbreviations.push_back(std::move(t));
    rows.push_back(std::move(e));
  });
  return rows;
}

inline std::vector<AmbiguityEntry> parse_ambiguity_table(const std::filesystem::path& path) {
  std::vector<AmbiguityEntry> rows;
  detail::for_each_table_line(path, [&](std::size_t lineno, const std::vector<std::string>& f) {
    if (f.size() < 2 || f.size() > 3)
      throw ConfigError(path.string(), lineno, "expected token<TAB>interpretations<TAB>markers");
    AmbiguityEntry e;
    e.token = normalize_text(f[0]);
    if (e.token.empty()) throw ConfigError(path.string(), lineno, "empty token");
    for (const auto& spec : detail::split_on(f[1], '|')) {
      auto parts = detail::split_on(detail::trim_copy(spec), ':');
      Interpretation in;
      if (parts.size() == 2 && parts[0] == "country") {
        in.kind = Interpretation::Kind::Country;
        in.iso2 = parts[1];
      } else if (parts.size() == 3 && parts[0] == "part") {
        in.kind = Interpretation::Kind::Part;
        in.iso2 = parts[1];
        in.part_name = parts[2];
      } else {
        throw ConfigError(path.string(), lineno, "bad interpretation '" + spec + "'");
      }
      e.preferences.push_back(std::move(in));
    }
    if (f.size() == 3)
      for (const auto& m : detail::split_on(f[2], '|'))
        if (auto t = normalize_text(m); !t.empty()) e.context_markers.push_back(std::move(t));
    rows.push_back(std::move(e));
  });
  return rows;
}

inline Gazetteer Gazetteer::from_tables(std::vector<CountryEntry> countries, std::vector<ComponentPartEntry> parts,
                                        std::vector<AmbiguityEntry> ambiguities, std::vector<std::string> masks,
                                        std::string origin) {
  Gazetteer g;
  g.countries_ = std::move(countries);
  g.parts_ = std::move(parts);
  g.ambiguities_ = std::move(ambiguities);

  for (std::size_t i = 0; i < g.ambiguities_.size(); ++i) {
    auto& a = g.ambiguities_[i];
    a.token = normalize_text(a.token);
    if (a.preferences.size() < 2) throw ConfigError(origin, 0, "ambiguity entry '" + a.token + "' needs two interpretations");
    for (auto& m : a.context_markers) m = normalize_text(m);
    g.ambiguity_index_.emplace(a.token, i);
  }

  for (std::size_t i = 0; i < g.countries_.size(); ++i) {
    const auto& c = g.countries_[i];
    if (!g.by_iso2_.emplace(c.iso2, i).second) throw ConfigError(origin, 0, "duplicate iso2 " + c.iso2);
  }

  // alias -> all entries claiming it; conflicts resolved below.
  std::map<std::string, std::vector<std::pair<std::size_t, bool>>> country_claims;
  for (std::size_t i = 0; i < g.countries_.size(); ++i) {
    auto& c = g.countries_[i];
    std::vector<std::string> normalized;
    for (const auto& a : c.aliases)
      if (auto n = normalize_text(a); !n.empty() && n != normalize_text(c.canonical_name)) normalized.push_back(n);
    std::sort(normalized.begin(), normalized.end());
    normalized.erase(std::unique(normalized.begin(), normalized.end()), normalized.end());
    c.aliases = std::move(normalized);
    auto add = [&](const std::string& n, bool allow_code) {
      auto& claims = country_claims[n];
      if (std::none_of(claims.begin(), claims.end(), [&](const auto& cl) { return cl.first == i; }))
        claims.emplace_back(i, allow_code && detail::is_code_like(n));
    };
    add(normalize_text(c.canonical_name), false);
    for (const auto& a : c.aliases) add(a, true);
  }

  std::map<std::string, std::vector<std::pair<std::size_t, bool>>> part_claims;
  for (std::size_t i = 0; i < g.parts_.size(); ++i) {
    auto& p = g.parts_[i];
    if (!g.has_country(p.parent_iso2))
      throw ConfigError(origin, 0, "component part '" + p.part_name + "' has unknown parent " + p.parent_iso2);
    std::vector<std::string> normalized;
    for (const auto& a : p.abbreviations)
      if (auto n = normalize_text(a); !n.empty()) normalized.push_back(n);
    std::sort(normalized.begin(), normalized.end());
    normalized.erase(std::unique(normalized.begin(), normalized.end()), normalized.end());
    p.abbreviations = std::move(normalized);
    part_claims[normalize_text(p.part_name)].emplace_back(i, false);
    for (const auto& a : p.abbreviations)
      if (a != normalize_text(p.part_name)) part_claims[a].emplace_back(i, detail::is_code_like(a));
  }

  auto preferred_country = [&](const std::string& token, const AmbiguityEntry& amb,
                               const std::vector<std::pair<std::size_t, bool>>& claims) {
    for (const auto& in : amb.preferences) {
      if (in.kind != Interpretation::Kind::Country) continue;
      for (const auto& cl : claims)
        if (g.countries_[cl.first].iso2 == in.iso2) return cl;
    }
    throw ConfigError(origin, 0, "ambiguity entry '" + token + "' lists no country that claims it");
  };
  auto preferred_part = [&](const std::string& token, const AmbiguityEntry& amb,
                            const std::vector<std::pair<std::size_t, bool>>& claims) {
    for (const auto& in : amb.preferences) {
      if (in.kind != Interpretation::Kind::Part) continue;
      for (const auto& cl : claims)
        if (g.parts_[cl.first].parent_iso2 == in.iso2 && g.parts_[cl.first].part_name == in.part_name) return cl;
    }
    throw ConfigError(origin, 0, "ambiguity entry '" + token + "' lists no part that claims it");
  };

  for (const auto& [token, claims] : country_claims) {
    const auto* amb = g.ambiguity(token);
    auto chosen = claims.front();
    if (claims.size() > 1) {
      if (!amb)
        throw ConfigError(origin, 0,
                          "alias '" + token + "' maps to both " + g.countries_[claims[0].first].iso2 + " and " +
                              g.countries_[claims[1].first].iso2 + " without an ambiguity entry");
      chosen = preferred_country(token, *amb, claims);
    }
    if (part_claims.count(token) && !amb)
      throw ConfigError(origin, 0, "token '" + token + "' is both a country and a component part; add an ambiguity entry");
    g.country_index_.emplace(token, AliasInfo{chosen.first, chosen.second});
    g.note_phrase(token);
  }
  for (const auto& [token, claims] : part_claims) {
    auto chosen = claims.front();
    if (claims.size() > 1) {
      const auto* amb = g.ambiguity(token);
      bool same_part = std::all_of(claims.begin(), claims.end(), [&](const auto& c) { return c.first == claims[0].first; });
      if (!same_part) {
        if (!amb) throw ConfigError(origin, 0, "part alias '" + token + "' maps to two parts without an ambiguity entry");
        chosen = preferred_part(token, *amb, claims);
      }
    }
    g.part_index_.emplace(token, AliasInfo{chosen.first, chosen.second});
    g.note_phrase(token);
  }
  for (const auto& m : masks) {
    auto n = normalize_text(m);
    if (n.empty()) continue;
    g.masks_.insert(n);
    g.note_phrase(n);
  }
  for (const auto& a : g.ambiguities_)
    for (const auto& m : a.context_markers) g.max_phrase_tokens_ = std::max(g.max_phrase_tokens_, detail::token_count(m));
  return g;
}

inline Gazetteer Gazetteer::load(const std::filesystem::path& data_dir, GazetteerOptions opts) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(data_dir)) throw ConfigError(data_dir.string(), 0, "gazetteer directory not found");
  auto countries = parse_country_table(data_dir / "countries.tsv");
  auto parts = parse_component_part_table(data_dir / "component_parts.tsv");
  if (opts.extended_parts) {
    auto ext = parse_component_part_table(data_dir / "component_parts_extended.tsv");
    parts.insert(parts.end(), std::make_move_iterator(ext.begin()), std::make_move_iterator(ext.end()));
  }
  auto ambiguities = parse_ambiguity_table(data_dir / "ambiguity.tsv");
  std::vector<std::string> masks;
  if (fs::exists(data_dir / "masks.tsv"))
    detail::for_each_table_line(data_dir / "masks.tsv",
                                [&](std::size_t, const std::vector<std::string>& f) { masks.push_back(f[0]); });
  return from_tables(std::move(countries), std::move(parts), std::move(ambiguities), std::move(masks),
                     data_dir.string());
}

}  // namespace ircm
