#pragma once

// International research collaboration (IRC) statistics.
//
// A paper is international when its resolved mentions span two or more
// distinct countries, domestic with exactly one, and unmeasurable with none.
// The IRC ratio is international / (international + domestic).

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <ranges>
#include <set>
#include <span>
#include <string>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ircm/error.hpp"
#include "ircm/gazetteer.hpp"
#include "ircm/records.hpp"
#include "ircm/resolver.hpp"

namespace ircm {

struct PaperCountrySet {
  std::string paper_id;
  std::optional<int> year;
  std::set<std::string> countries;
  std::size_t unresolved_mentions = 0;

  friend bool operator==(const PaperCountrySet&, const PaperCountrySet&) = default;
};

struct IrcCounts {
  std::size_t total_papers = 0;
  std::size_t international = 0;
  std::size_t domestic = 0;
  std::size_t unmeasurable = 0;

  std::optional<double> irc_ratio() const {
    const auto measurable = international + domestic;
    if (measurable == 0) return std::nullopt;
    return static_cast<double>(international) / static_cast<double>(measurable);
  }

  void add(std::size_t distinct_countries) {
    ++total_papers;
    if (distinct_countries >= 2) ++international;
    else if (distinct_countries == 1) ++domestic;
    else ++unmeasurable;
  }

  IrcCounts& operator+=(const IrcCounts& o) {
    total_papers += o.total_papers;
    international += o.international;
    domestic += o.domestic;
    unmeasurable += o.unmeasurable;
    return *this;
  }

  friend bool operator==(const IrcCounts&, const IrcCounts&) = default;
};

using CountryPair = std::pair<std::string, std::string>;  // first < second

struct IrcStats {
  IrcCounts totals;
  std::map<std::optional<int>, IrcCounts> per_year;  // nullopt = year unknown
  std::map<CountryPair, std::size_t> pair_counts;

  void add(const PaperCountrySet& p) {
    totals.add(p.countries.size());
    per_year[p.year].add(p.countries.size());
    // std::set iteration is ordered, so (a, b) always has a < b.
    for (auto a = p.countries.begin(); a != p.countries.end(); ++a)
      for (auto b = std::next(a); b != p.countries.end(); ++b) ++pair_counts[{*a, *b}];
  }

  IrcStats& merge(const IrcStats& o) {
    totals += o.totals;
    for (const auto& [y, c] : o.per_year) per_year[y] += c;
    for (const auto& [k, n] : o.pair_counts) pair_counts[k] += n;
    return *this;
  }

  std::size_t pair_count(std::string_view a, std::string_view b) const {
    CountryPair key = a < b ? CountryPair{std::string(a), std::string(b)} : CountryPair{std::string(b), std::string(a)};
    auto it = pair_counts.find(key);
    return it == pair_counts.end() ? 0 : it->second;
  }

  friend bool operator==(const IrcStats&, const IrcStats&) = default;
};

/// Groups resolutions by paper, in the order of `records`. Throws
/// ConsistencyError for a resolution whose paper_id is not among the records,
/// or (when `g` is given) whose country code is not in the gazetteer.
template <std::ranges::input_range R>
std::vector<PaperCountrySet> collapse_to_papers(std::span<const Resolution> resolutions, R&& records,
                                                const Gazetteer* g = nullptr) {
  std::vector<PaperCountrySet> papers;
  std::unordered_map<std::string, std::size_t> index;
  for (const BibRecord& r : records) {
    if (index.try_emplace(r.paper_id, papers.size()).second) papers.push_back({r.paper_id, r.year, {}, 0});
  }
  for (const auto& res : resolutions) {
    auto it = index.find(res.paper_id);
    if (it == index.end()) throw ConsistencyError("resolution references unknown paper_id '" + res.paper_id + "'");
    auto& p = papers[it->second];
    if (res.iso2) {
      if (g && !g->has_country(*res.iso2))
        throw ConsistencyError("resolution for paper '" + res.paper_id + "' has unknown country code " + *res.iso2);
      p.countries.insert(*res.iso2);
    } else {
      ++p.unresolved_mentions;
    }
  }
  return papers;
}

/// Groups resolutions by paper in order of first appearance; years unknown.
inline std::vector<PaperCountrySet> collapse_to_papers(std::span<const Resolution> resolutions,
                                                       const Gazetteer* g = nullptr) {
  std::vector<BibRecord> stubs;
  std::unordered_map<std::string, bool> seen;
  for (const auto& r : resolutions)
    if (seen.try_emplace(r.paper_id, true).second) {
      BibRecord stub;
      stub.paper_id = r.paper_id;
      stubs.push_back(std::move(stub));
    }
  return collapse_to_papers(resolutions, stubs, g);
}

template <std::ranges::input_range R>
IrcStats compute_irc(R&& papers) {
  IrcStats s;
  for (const PaperCountrySet& p : papers) s.add(p);
  return s;
}

/// Partitioned aggregation; equal to compute_irc by associativity of merge.
inline IrcStats compute_irc_parallel(std::span<const PaperCountrySet> papers, unsigned jobs) {
  jobs = std::max(1u, jobs);
  if (jobs == 1 || papers.size() < 2) return compute_irc(papers);
  std::vector<IrcStats> partial(jobs);
  std::vector<std::thread> workers;
  const std::size_t chunk = (papers.size() + jobs - 1) / jobs;
  for (unsigned t = 0; t < jobs; ++t) {
    const std::size_t lo = std::min(papers.size(), t * chunk), hi = std::min(papers.size(), lo + chunk);
    workers.emplace_back([&, t, lo, hi] { partial[t] = compute_irc(papers.subspan(lo, hi - lo)); });
  }
  for (auto& w : workers) w.join();
  IrcStats out;
  for (const auto& p : partial) out.merge(p);
  return out;
}

}  // namespace ircm
