#pragma once

// Per-mention country resolution.
//
//   1. normalize; null-like strings stop here (NullLike)
//   2. gazetteer match, scanning tokens right to left: countries first over
//      the whole string, then component parts (CountryName / ComponentPart)
//   3. Wikidata lookup of comma-separated fragments, last to first, until
//      one answers with exactly one country (Wikidata)
//   4. otherwise Unidentified
//
// Every mention receives exactly one category.

#include <algorithm>
#include <array>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <ranges>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ircm/gazetteer.hpp"
#include "ircm/normalize.hpp"
#include "ircm/records.hpp"
#include "ircm/wikidata.hpp"

namespace ircm {

enum class Category { NullLike, CountryName, ComponentPart, Wikidata, Unidentified };

inline constexpr std::array<Category, 5> kAllCategories = {Category::NullLike, Category::CountryName,
                                                           Category::ComponentPart, Category::Wikidata,
                                                           Category::Unidentified};

inline std::string_view to_string(Category c) {
  switch (c) {
    case Category::NullLike: return "NullLike";
    case Category::CountryName: return "CountryName";
    case Category::ComponentPart: return "ComponentPart";
    case Category::Wikidata: return "Wikidata";
    case Category::Unidentified: return "Unidentified";
  }
  return "Unidentified";
}

inline std::optional<Category> parse_category(std::string_view s) {
  for (auto c : kAllCategories)
    if (to_string(c) == s) return c;
  return std::nullopt;
}

inline bool identifies_country(Category c) {
  return c == Category::CountryName || c == Category::ComponentPart || c == Category::Wikidata;
}

/// Outcome for one affiliation string, independent of which paper it is on.
struct ResolvedValue {
  Category category = Category::Unidentified;
  std::optional<std::string> iso2;
  std::string evidence;
  bool ambiguous = false;
  std::vector<std::string> unmapped_labels;

  friend bool operator==(const ResolvedValue&, const ResolvedValue&) = default;
};

struct Resolution {
  std::string paper_id;
  std::size_t author_index = 0;
  std::string raw;
  Category category = Category::Unidentified;
  std::optional<std::string> iso2;
  std::string evidence;
  bool ambiguous = false;

  friend bool operator==(const Resolution&, const Resolution&) = default;
};

struct Step1Match {
  std::string iso2;
  Category category = Category::CountryName;
  std::string evidence;
  bool ambiguous = false;

  friend bool operator==(const Step1Match&, const Step1Match&) = default;
};

namespace detail {

struct Tok {
  std::string_view text;
  std::size_t seg = 0;
  bool numeric = false;
};

struct SegInfo {
  std::size_t first = 0, last = 0;  // token range, inclusive
  std::size_t first_word = SIZE_MAX, last_word = SIZE_MAX;
};

// Windows never cross a segment boundary.
class TokenWindows {
 public:
  explicit TokenWindows(const NormalizedAffiliation& n) {
    for (std::size_t s = 0; s < n.segments.size(); ++s) {
      SegInfo info;
      info.first = toks_.size();
      std::string_view seg = n.segments[s];
      std::size_t start = 0;
      while (start < seg.size()) {
        auto sp = seg.find(' ', start);
        if (sp == std::string_view::npos) sp = seg.size();
        const auto t = seg.substr(start, sp - start);
        const bool numeric = std::any_of(t.begin(), t.end(), [](char c) { return c >= '0' && c <= '9'; });
        if (!numeric) {
          if (info.first_word == SIZE_MAX) info.first_word = toks_.size();
          info.last_word = toks_.size();
        }
        toks_.push_back({t, s, numeric});
        start = sp + 1;
      }
      info.last = toks_.size() - 1;
      segs_.push_back(info);
    }
  }

  std::size_t size() const noexcept { return toks_.size(); }
  const Tok& operator[](std::size_t i) const { return toks_[i]; }
  const SegInfo& seg_of(std::size_t i) const { return segs_[toks_[i].seg]; }
  bool in_last_segment(std::size_t i) const { return toks_[i].seg + 1 == segs_.size(); }

  const std::string& key(std::size_t s, std::size_t e) {
    buf_.clear();
    for (std::size_t i = s; i <= e; ++i) {
      if (i > s) buf_.push_back(' ');
      buf_.append(toks_[i].text);
    }
    return buf_;
  }

  // Code-like aliases (USA, MA, U.K.) count only when the window holds every
  // word of its segment, or ends the final segment.
  bool position_ok(std::size_t s, std::size_t e, bool code_like) const {
    if (!code_like) return true;
    const auto& seg = seg_of(s);
    if (seg.first_word >= s && seg.last_word <= e) return true;
    return in_last_segment(e) && seg.last_word == e;
  }

 private:
  std::vector<Tok> toks_;
  std::vector<SegInfo> segs_;
  std::string buf_;
};

inline bool contains_marker(const NormalizedAffiliation& n, const std::vector<std::string>& markers) {
  for (const auto& seg : n.segments) {
    const std::string padded = " " + seg + " ";
    for (const auto& m : markers)
      if (padded.find(" " + m + " ") != std::string::npos) return true;
  }
  return false;
}

inline std::size_t utf8_length(std::string_view s) {
  return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

inline const std::set<std::string, std::less<>>& fragment_stopwords() {
  static const std::set<std::string, std::less<>> words = {
      "of",        "the",     "and",     "for",        "in",       "at",      "on",    "de",     "la",
      "le",        "du",      "des",     "der",        "di",       "da",      "del",   "dept",   "department",
      "departments", "school", "faculty", "division",  "lab",      "labs",    "laboratory", "institute",
      "college",   "university", "center", "centre",   "unit",     "group",   "program", "inc",  "ltd",
      "co",        "corp",    "section", "graduate",   "research", "sciences", "science", "p",   "o",
      "box",       "po",      "street",  "st",         "road",     "rd",      "avenue", "ave",   "floor",
      "room",      "building", "campus", "email",      "e",        "mail"};
  return words;
}

}  // namespace detail

/// True when a normalized segment is worth a Wikidata query: at least four
/// characters and not made only of numbers and stopwords.
inline bool is_wikidata_fragment(std::string_view key) {
  if (detail::utf8_length(key) < 4) return false;
  const auto& stop = detail::fragment_stopwords();
  std::size_t start = 0;
  while (start < key.size()) {
    auto sp = key.find(' ', start);
    if (sp == std::string_view::npos) sp = key.size();
    const auto t = key.substr(start, sp - start);
    const bool numeric = std::all_of(t.begin(), t.end(), [](char c) { return c >= '0' && c <= '9'; });
    if (!numeric && stop.find(t) == stop.end()) return true;
    start = sp + 1;
  }
  return false;
}

/// Gazetteer step. Precondition: !n.null_like.
inline std::optional<Step1Match> match_step1(const NormalizedAffiliation& n, const Gazetteer& g) {
  if (n.null_like || n.segments.empty()) return std::nullopt;
  detail::TokenWindows w(n);
  const std::size_t maxw = g.max_phrase_tokens();

  auto from_interpretation = [&](const AmbiguityEntry& amb, std::string evidence_if_country) {
    const bool ctx = detail::contains_marker(n, amb.context_markers);
    const auto& in = amb.preferences[ctx ? 1 : 0];
    if (in.kind == Interpretation::Kind::Country)
      return Step1Match{in.iso2, Category::CountryName, std::move(evidence_if_country), true};
    return Step1Match{in.iso2, Category::ComponentPart, in.part_name, true};
  };

  // A hit strictly inside a longer component-part name or mask phrase is
  // ignored ("jersey" in "new jersey", "ireland" in "northern ireland").
  auto inside_longer = [&](std::size_t s, std::size_t e, bool parts_block) {
    const auto& seg = w.seg_of(s);
    const std::size_t lo = (e + 1 >= maxw && e + 1 - maxw > seg.first) ? e + 1 - maxw : seg.first;
    for (std::size_t s2 = lo; s2 <= s; ++s2) {
      for (std::size_t e2 = e; e2 <= seg.last && e2 - s2 + 1 <= maxw; ++e2) {
        if (s2 == s && e2 == e) continue;
        const auto& k = w.key(s2, e2);
        if (g.is_mask(k)) return true;
        if (parts_block) {
          if (const auto* a = g.part_alias(k); a && w.position_ok(s2, e2, a->code_like)) return true;
        }
      }
    }
    return false;
  };

  auto scan = [&](bool countries) -> std::optional<Step1Match> {
    for (std::size_t e = w.size(); e-- > 0;) {
      if (w[e].numeric) continue;
      const auto& seg = w.seg_of(e);
      const std::size_t widest = std::min(maxw, e - seg.first + 1);
      for (std::size_t width = widest; width >= 1; --width) {
        const std::size_t s = e + 1 - width;
        if (!g.starts_any_phrase(w[s].text)) continue;
        const std::string& window = w.key(s, e);
        const auto* alias = countries ? g.country_alias(window) : g.part_alias(window);
        if (!alias || !w.position_ok(s, e, alias->code_like)) continue;
        const std::string key = window;
        if (inside_longer(s, e, countries)) continue;
        if (const auto* amb = g.ambiguity(key)) return from_interpretation(*amb, key);
        if (countries) return Step1Match{g.countries()[alias->index].iso2, Category::CountryName, key, false};
        const auto& part = g.parts()[alias->index];
        return Step1Match{part.parent_iso2, Category::ComponentPart, part.part_name, false};
      }
    }
    return std::nullopt;
  };

  if (auto hit = scan(true)) return hit;
  return scan(false);
}

class Resolver {
 public:
  /// `lookup` may be null, which disables the Wikidata step.
  Resolver(const Gazetteer& g, const wikidata::LabelMap& labels, wikidata::CountryLookup* lookup = nullptr)
      : g_(g), labels_(labels), lookup_(lookup) {}

  ResolvedValue resolve_text(std::string_view raw) const {
    ResolvedValue v;
    const NormalizedAffiliation n = normalize_affiliation(raw);
    if (n.null_like) {
      v.category = Category::NullLike;
      return v;
    }
    if (auto hit = match_step1(n, g_)) {
      v.category = hit->category;
      v.iso2 = std::move(hit->iso2);
      v.evidence = std::move(hit->evidence);
      v.ambiguous = hit->ambiguous;
      return v;
    }
    v.category = Category::Unidentified;
    if (!lookup_) return v;

    std::string first_error;
    const auto fragments = raw_segments(raw);
    for (auto it = fragments.rbegin(); it != fragments.rend(); ++it) {
      if (!is_wikidata_fragment(it->key)) continue;
      wikidata::CacheEntry entry;
      try {
        entry = lookup_->query_country(it->display);
      } catch (const std::exception& ex) {
        if (first_error.empty()) first_error = ex.what();
        continue;
      }
      if (entry.status == wikidata::CacheStatus::Error) {
        if (first_error.empty()) first_error = entry.error;
        continue;
      }
      std::set<std::string> codes;
      bool unmapped = false;
      for (const auto& label : entry.countries) {
        if (auto code = labels_.label_to_iso2(label)) {
          codes.insert(*code);
        } else {
          unmapped = true;
          v.unmapped_labels.push_back(label);
        }
      }
      if (codes.size() == 1 && !unmapped) {
        v.category = Category::Wikidata;
        v.iso2 = *codes.begin();
        v.evidence = it->display;
        v.unmapped_labels.clear();
        return v;
      }
    }
    if (!first_error.empty()) v.evidence = "wikidata error: " + first_error;
    else if (!v.unmapped_labels.empty()) v.evidence = "unmapped label: " + v.unmapped_labels.front();
    return v;
  }

  Resolution resolve(const AffiliationMention& m) const { return make_resolution(m, resolve_text(m.raw)); }

  static Resolution make_resolution(const AffiliationMention& m, const ResolvedValue& v) {
    return Resolution{m.paper_id, m.author_index, m.raw, v.category, v.iso2, v.evidence, v.ambiguous};
  }

  const Gazetteer& gazetteer() const noexcept { return g_; }

 private:
  const Gazetteer& g_;
  const wikidata::LabelMap& labels_;
  wikidata::CountryLookup* lookup_;
};

struct IdentificationBreakdown {
  std::size_t total = 0;
  std::array<std::size_t, 5> counts{};

  void add(Category c) {
    ++total;
    ++counts[static_cast<std::size_t>(c)];
  }
  std::size_t count(Category c) const { return counts[static_cast<std::size_t>(c)]; }
  double percent(Category c) const { return total ? 100.0 * static_cast<double>(count(c)) / static_cast<double>(total) : 0.0; }

  friend bool operator==(const IdentificationBreakdown&, const IdentificationBreakdown&) = default;
};

struct CorpusResolution {
  std::vector<Resolution> resolutions;
  IdentificationBreakdown breakdown;
  std::size_t unique_strings = 0;
  std::set<std::string> unmapped_labels;
};

struct CorpusOptions {
  unsigned jobs = 1;
  bool memoize = true;
};

/// Resolves every mention of every record, in input order. With memoization
/// each distinct normalized string is resolved once, from its first raw
/// occurrence, so the output does not depend on `jobs`.
template <std::ranges::input_range R>
CorpusResolution resolve_corpus(R&& records, const Resolver& resolver, CorpusOptions opts = {}) {
  std::vector<const AffiliationMention*> mentions;
  for (const BibRecord& r : records)
    for (const auto& m : r.mentions) mentions.push_back(&m);

  std::vector<std::size_t> slot(mentions.size());
  std::vector<const std::string*> representatives;
  if (opts.memoize) {
    std::unordered_map<std::string, std::size_t> first;
    first.reserve(mentions.size());
    for (std::size_t i = 0; i < mentions.size(); ++i) {
      auto [it, inserted] = first.try_emplace(normalize_text(mentions[i]->raw), representatives.size());
      if (inserted) representatives.push_back(&mentions[i]->raw);
      slot[i] = it->second;
    }
  } else {
    for (std::size_t i = 0; i < mentions.size(); ++i) {
      slot[i] = i;
      representatives.push_back(&mentions[i]->raw);
    }
  }

  std::vector<ResolvedValue> values(representatives.size());
  const unsigned jobs = std::max(1u, std::min<unsigned>(opts.jobs, static_cast<unsigned>(std::max<std::size_t>(1, values.size()))));
  if (jobs == 1) {
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = resolver.resolve_text(*representatives[i]);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    std::vector<std::thread> workers;
    for (unsigned t = 0; t < jobs; ++t) {
      workers.emplace_back([&] {
        try {
          for (std::size_t i = next++; i < values.size(); i = next++) values[i] = resolver.resolve_text(*representatives[i]);
        } catch (...) {
          std::lock_guard lock(failure_mu);
          if (!failure) failure = std::current_exception();
          next = values.size();
        }
      });
    }
    for (auto& th : workers) th.join();
    if (failure) std::rethrow_exception(failure);
  }

  CorpusResolution out;
  out.unique_strings = opts.memoize ? representatives.size() : 0;
  out.resolutions.reserve(mentions.size());
  for (std::size_t i = 0; i < mentions.size(); ++i) {
    const auto& v = values[slot[i]];
    out.resolutions.push_back(Resolver::make_resolution(*mentions[i], v));
    out.breakdown.add(v.category);
  }
  for (const auto& v : values) out.unmapped_labels.insert(v.unmapped_labels.begin(), v.unmapped_labels.end());
  return out;
}

}  // namespace ircm
