#pragma once

// Corpus preparation: field-of-study filtering, cross-source deduplication
// and removal of single-author records. Every filter is a pure, order
// preserving subset operation over its input range.

#include <algorithm>
#include <cstddef>
#include <map>
#include <ranges>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "ircm/error.hpp"
#include "ircm/normalize.hpp"
#include "ircm/records.hpp"

namespace ircm {

struct FosFilter {
  std::set<std::string> terms;  // normalized
  double coverage = 0.0;        // fraction of overlap papers with >= 1 term
  std::size_t overlap_papers = 0;
};

namespace detail {

inline std::set<std::string> normalized_fos(const BibRecord& r) {
  std::set<std::string> out;
  for (const auto& t : r.fos_terms)
    if (auto n = normalize_text(t); !n.empty()) out.insert(std::move(n));
  return out;
}

}  // namespace detail

/// Picks the `top_k` most frequent FOS terms (paper frequency, ties broken
/// lexicographically) across the overlap records.
template <std::ranges::input_range R>
FosFilter compute_fos_filter(R&& overlap_records, std::size_t top_k) {
  if (top_k == 0) throw Error("top_k must be at least 1");
  std::map<std::string, std::size_t> freq;
  std::vector<std::set<std::string>> per_paper;
  for (const BibRecord& r : overlap_records) {
    auto terms = detail::normalized_fos(r);
    for (const auto& t : terms) ++freq[t];
    per_paper.push_back(std::move(terms));
  }
  if (per_paper.empty()) throw Error("cannot compute a FOS filter from an empty overlap");
  if (freq.empty()) throw Error("overlap records carry no FOS terms");

  std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(), freq.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });

  FosFilter f;
  for (std::size_t i = 0; i < ranked.size() && i < top_k; ++i) f.terms.insert(ranked[i].first);
  std::size_t covered = 0;
  for (const auto& terms : per_paper)
    if (std::any_of(terms.begin(), terms.end(), [&](const auto& t) { return f.terms.count(t) > 0; })) ++covered;
  f.overlap_papers = per_paper.size();
  f.coverage = static_cast<double>(covered) / static_cast<double>(per_paper.size());
  return f;
}

inline bool passes_fos(const BibRecord& r, const FosFilter& f) {
  for (const auto& t : r.fos_terms)
    if (f.terms.count(normalize_text(t))) return true;
  return false;
}

template <std::ranges::input_range R>
std::vector<BibRecord> filter_by_fos(R&& records, const FosFilter& f) {
  std::vector<BibRecord> out;
  for (const BibRecord& r : records)
    if (passes_fos(r, f)) out.push_back(r);
  return out;
}

/// Title key: lower-case letters and digits only, joined with the year.
/// Empty when the record has no usable title.
inline std::string title_year_key(const BibRecord& r) {
  std::string letters;
  for (char c : normalize_text(r.title))
    if (c != ' ' && c != ',') letters.push_back(c);
  if (letters.empty()) return {};
  return letters + "|" + (r.year ? std::to_string(*r.year) : std::string("?"));
}

inline std::string doi_key(std::string_view doi) {
  std::string d = normalize_text(doi);
  for (std::string_view prefix : {"https doi org ", "http doi org ", "doi "})
    if (d.rfind(prefix, 0) == 0) d.erase(0, prefix.size());
  return d;
}

/// Dedup keys of one source. A record matches when its DOI matches, or when
/// its title key matches an entry and the two sides do not both carry
/// (different) DOIs.
class DedupKeys {
 public:
  void add(const BibRecord& r) {
    const auto doi = r.doi.empty() ? std::string() : doi_key(r.doi);
    if (!doi.empty()) dois_.insert(doi);
    if (auto k = title_year_key(r); !k.empty()) titles_[k].insert(doi);
  }

  template <std::ranges::input_range R>
  static DedupKeys from(R&& records) {
    DedupKeys keys;
    for (const BibRecord& r : records) keys.add(r);
    return keys;
  }

  bool contains(const BibRecord& r) const {
    const auto doi = r.doi.empty() ? std::string() : doi_key(r.doi);
    if (!doi.empty() && dois_.count(doi)) return true;
    const auto k = title_year_key(r);
    if (k.empty()) return false;
    auto it = titles_.find(k);
    if (it == titles_.end()) return false;
    if (doi.empty()) return true;
    return it->second.count(std::string()) > 0;
  }

  std::size_t size() const noexcept { return titles_.size() + dois_.size(); }

 private:
  std::unordered_map<std::string, std::set<std::string>> titles_;  // title key -> DOIs ("" = none)
  std::unordered_set<std::string> dois_;
};

template <std::ranges::input_range R>
std::vector<BibRecord> dedup_overlap(R&& primary, const DedupKeys& secondary_keys) {
  std::vector<BibRecord> out;
  for (const BibRecord& r : primary)
    if (!secondary_keys.contains(r)) out.push_back(r);
  return out;
}

/// Records of `records` that also appear (by dedup key) in `other`.
template <std::ranges::input_range R>
std::vector<BibRecord> overlap_with(R&& records, const DedupKeys& other) {
  std::vector<BibRecord> out;
  for (const BibRecord& r : records)
    if (other.contains(r)) out.push_back(r);
  return out;
}

struct CoauthorCounts {
  std::size_t kept = 0;
  std::size_t single_author = 0;
  std::size_t no_author_data = 0;
};

inline std::size_t distinct_authors(const BibRecord& r) {
  std::unordered_set<std::size_t> idx;
  for (const auto& m : r.mentions) idx.insert(m.author_index);
  return idx.size();
}

template <std::ranges::input_range R>
std::vector<BibRecord> filter_coauthored(R&& records, CoauthorCounts* counts = nullptr) {
  CoauthorCounts c;
  std::vector<BibRecord> out;
  for (const BibRecord& r : records) {
    if (r.mentions.empty()) {
      ++c.no_author_data;
      continue;
    }
    if (distinct_authors(r) < 2) {
      ++c.single_author;
      continue;
    }
    ++c.kept;
    out.push_back(r);
  }
  if (counts) *counts = c;
  return out;
}

}  // namespace ircm
