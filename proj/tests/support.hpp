#pragma once

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <unistd.h>

#include "ircm/ircm.hpp"

namespace testing_support {

namespace fs = std::filesystem;

inline fs::path data_dir() { return IRCM_DATA_DIR; }
inline fs::path fixture_dir() { return IRCM_FIXTURE_DIR; }
inline fs::path wikidata_fixture_dir() { return fixture_dir() / "wikidata"; }

inline const ircm::Gazetteer& gazetteer() {
  static const ircm::Gazetteer g = ircm::Gazetteer::load(data_dir());
  return g;
}

inline const ircm::wikidata::LabelMap& labels() {
  static const auto m = ircm::wikidata::LabelMap::load(gazetteer(), data_dir() / "wikidata_labels.tsv");
  return m;
}

inline std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void spit(const fs::path& p, std::string_view content) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << content;
}

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("ircm-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

/// Manual clock: sleep_for advances time instantly and records the request.
class FakeClock final : public ircm::wikidata::Clock {
 public:
  explicit FakeClock(std::chrono::system_clock::time_point start = std::chrono::system_clock::time_point(
                         std::chrono::seconds(1'700'000'000)))
      : now_(start) {}

  std::chrono::system_clock::time_point now() override {
    std::lock_guard lock(mu_);
    return now_;
  }
  void sleep_for(std::chrono::nanoseconds d) override {
    std::lock_guard lock(mu_);
    now_ += std::chrono::duration_cast<std::chrono::system_clock::duration>(d);
    sleeps_.push_back(d);
  }
  void advance(std::chrono::nanoseconds d) {
    std::lock_guard lock(mu_);
    now_ += std::chrono::duration_cast<std::chrono::system_clock::duration>(d);
  }
  std::vector<std::chrono::nanoseconds> sleeps() const {
    std::lock_guard lock(mu_);
    return sleeps_;
  }

 private:
  mutable std::mutex mu_;
  std::chrono::system_clock::time_point now_;
  std::vector<std::chrono::nanoseconds> sleeps_;
};

/// Transport that must never be reached.
class FailingTransport final : public ircm::wikidata::Transport {
 public:
  ircm::wikidata::HttpResponse get(const std::string&, const ircm::wikidata::Headers&) override {
    ++calls;
    throw std::runtime_error("network disabled in this test");
  }
  std::atomic<int> calls{0};
};

/// Replays a scripted sequence of responses and stamps each request time.
class ScriptedTransport final : public ircm::wikidata::Transport {
 public:
  ScriptedTransport(ircm::wikidata::Clock& clock, std::vector<ircm::wikidata::HttpResponse> script)
      : clock_(clock), script_(std::move(script)) {}

  ircm::wikidata::HttpResponse get(const std::string& url, const ircm::wikidata::Headers& headers) override {
    std::lock_guard lock(mu_);
    times.push_back(clock_.now());
    urls.push_back(url);
    last_headers = headers;
    if (script_.empty()) return {200, std::string(ircm::wikidata::kEmptyResultBody)};
    auto r = script_.front();
    if (script_.size() > 1) script_.erase(script_.begin());
    if (r.status < 0) throw std::runtime_error("connection reset");
    return r;
  }

  std::vector<std::chrono::system_clock::time_point> times;
  std::vector<std::string> urls;
  ircm::wikidata::Headers last_headers;

 private:
  ircm::wikidata::Clock& clock_;
  std::mutex mu_;
  std::vector<ircm::wikidata::HttpResponse> script_;
};

/// Lookup stub that answers from a fixed table and records every fragment.
class CountingLookup final : public ircm::wikidata::CountryLookup {
 public:
  explicit CountingLookup(std::map<std::string, std::vector<std::string>> answers = {}) : answers_(std::move(answers)) {}

  ircm::wikidata::CacheEntry query_country(std::string_view fragment) override {
    std::lock_guard lock(mu_);
    queries.emplace_back(fragment);
    ircm::wikidata::CacheEntry e;
    e.key = ircm::normalize_text(fragment);
    auto it = answers_.find(e.key);
    if (it != answers_.end()) e.countries = it->second;
    e.status = e.countries.empty() ? ircm::wikidata::CacheStatus::Empty : ircm::wikidata::CacheStatus::Hit;
    return e;
  }

  std::vector<std::string> queries;

 private:
  std::mutex mu_;
  std::map<std::string, std::vector<std::string>> answers_;
};

inline std::string sparql_body(const std::vector<std::string>& labels) {
  nlohmann::json j;
  j["head"]["vars"] = {"countryLabel"};
  j["results"]["bindings"] = nlohmann::json::array();
  for (const auto& l : labels)
    j["results"]["bindings"].push_back({{"countryLabel", {{"xml:lang", "en"}, {"type", "literal"}, {"value", l}}}});
  return j.dump();
}

struct LabeledRow {
  std::string raw;
  ircm::Category category;
  std::string iso2;
};

inline std::vector<LabeledRow> labeled_fixture() {
  std::vector<LabeledRow> rows;
  std::ifstream in(fixture_dir() / "labeled_affiliations.tsv", std::ios::binary);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto t1 = line.find('\t'), t2 = line.find('\t', t1 + 1);
    rows.push_back({line.substr(0, t1), *ircm::parse_category(line.substr(t1 + 1, t2 - t1 - 1)), line.substr(t2 + 1)});
  }
  return rows;
}

inline ircm::BibRecord make_record(std::string id, std::optional<int> year, std::vector<std::string> affiliations) {
  ircm::BibRecord r;
  r.paper_id = std::move(id);
  r.year = year;
  for (std::size_t i = 0; i < affiliations.size(); ++i) r.mentions.push_back({r.paper_id, i, affiliations[i]});
  return r;
}

}  // namespace testing_support
