#pragma once

// Country lookup through the Wikidata SPARQL endpoint.
//
// An affiliation fragment ("McGill University") is turned into an English
// Wikipedia article IRI, bridged to its Wikidata item with schema:about, and
// the item's country (P17) is returned as English labels. Results are kept
// in an append-only JSON-lines cache so later runs can replay offline.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"

#include "ircm/error.hpp"
#include "ircm/gazetteer.hpp"
#include "ircm/normalize.hpp"

namespace ircm::wikidata {

inline constexpr std::string_view kDefaultEndpoint = "https://query.wikidata.org/sparql";
inline constexpr std::string_view kDefaultUserAgent =
    "ircm/1.0 (affiliation country resolution; https://github.com/ircm) cpp-httplib";
inline constexpr std::string_view kWikipediaPrefix = "https://en.wikipedia.org/wiki/";
inline constexpr std::string_view kPlaceholder = "[AFFILIATION]";

// Prefixes for wikibase: and bd: are predefined by the Wikidata endpoint.
inline constexpr std::string_view kQueryTemplate =
    "PREFIX schema: <http://schema.org/>\n"
    "PREFIX wdt:\n"
    "<http://www.wikidata.org/prop/direct/>\n"
    "SELECT ?countryLabel WHERE\n"
    "{<https://en.wikipedia.org/wiki/[AFFILIATION]>\n"
    "schema:about ?datalink. ?datalink wdt:P17\n"
    "?country.SERVICE wikibase:label\n"
    "{bd:serviceParam wikibase:language \"en\".}}\n";

struct SparqlQuery {
  std::string text;
  std::string fragment;
  std::string url_title;

  std::string subject_iri() const { return std::string(kWikipediaPrefix) + url_title; }
};

namespace detail {

inline void percent_encode_byte(std::string& out, unsigned char c) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  out.push_back('%');
  out.push_back(kHex[c >> 4]);
  out.push_back(kHex[c & 0x0F]);
}

inline bool is_unreserved(unsigned char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '.' ||
         c == '_' || c == '~';
}

}  // namespace detail

/// Wikipedia article title as it appears in the path of a sitelink IRI:
/// whitespace runs become one underscore, the first letter is upper-cased
/// (Wikipedia titles always are), and everything outside the unreserved set
/// and MediaWiki's path-safe set `;@$!*(),/:` is percent-encoded as UTF-8.
inline std::string wikipedia_title(std::string_view fragment) {
  std::string collapsed = ircm::detail::collapse_spaces(fragment);
  if (!collapsed.empty() && collapsed[0] >= 'a' && collapsed[0] <= 'z')
    collapsed[0] = static_cast<char>(collapsed[0] - 'a' + 'A');
  std::string out;
  out.reserve(collapsed.size() * 3);
  for (unsigned char c : collapsed) {
    if (c == ' ') {
      out.push_back('_');
    } else if (detail::is_unreserved(c) || std::string_view(";@$!*(),/:").find(static_cast<char>(c)) != std::string_view::npos) {
      out.push_back(static_cast<char>(c));
    } else {
      detail::percent_encode_byte(out, c);
    }
  }
  return out;
}

inline SparqlQuery build_sparql_query(std::string_view fragment) {
  const std::string trimmed = ircm::detail::collapse_spaces(fragment);
  if (trimmed.empty()) throw Error("cannot build a SPARQL query for an empty fragment");
  SparqlQuery q;
  q.fragment = trimmed;
  q.url_title = wikipedia_title(trimmed);
  q.text = std::string(kQueryTemplate);
  q.text.replace(q.text.find(kPlaceholder), kPlaceholder.size(), q.url_title);
  return q;
}

/// application/x-www-form-urlencoded value encoding.
inline std::string form_encode(std::string_view s) {
  std::string out;
  out.reserve(s.size() * 3);
  for (unsigned char c : s) {
    if (detail::is_unreserved(c)) out.push_back(static_cast<char>(c));
    else if (c == ' ') out.push_back('+');
    else detail::percent_encode_byte(out, c);
  }
  return out;
}

inline std::string form_decode(std::string_view s) {
  auto hex = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return -1;
  };
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '+') {
      out.push_back(' ');
    } else if (s[i] == '%' && i + 2 < s.size() && hex(s[i + 1]) >= 0 && hex(s[i + 2]) >= 0) {
      out.push_back(static_cast<char>(hex(s[i + 1]) * 16 + hex(s[i + 2])));
      i += 2;
    } else {
      out.push_back(s[i]);
    }
  }
  return out;
}

inline std::string request_url(std::string_view endpoint, const SparqlQuery& q) {
  std::string url(endpoint);
  url += url.find('?') == std::string::npos ? '?' : '&';
  url += "query=" + form_encode(q.text) + "&format=json";
  return url;
}

// ---------------------------------------------------------------------------
// Cache

enum class CacheStatus { Hit, Empty, Error };

inline std::string_view to_string(CacheStatus s) {
  switch (s) {
    case CacheStatus::Hit: return "Hit";
    case CacheStatus::Empty: return "Empty";
    case CacheStatus::Error: return "Error";
  }
  return "Error";
}

using Timestamp = std::chrono::sys_seconds;

struct CacheEntry {
  std::string key;
  std::vector<std::string> countries;
  CacheStatus status = CacheStatus::Empty;
  Timestamp retrieved_at{};
  std::string error;  // only for CacheStatus::Error

  friend bool operator==(const CacheEntry&, const CacheEntry&) = default;
};

inline std::string format_timestamp(Timestamp t) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::optional<Timestamp> parse_timestamp(std::string_view s) {
  if (s.size() != 20 || s[4] != '-' || s[7] != '-' || s[10] != 'T' || s[13] != ':' || s[16] != ':' || s[19] != 'Z')
    return std::nullopt;
  auto num = [&](std::size_t pos, std::size_t len) -> int {
    int v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
      if (s[i] < '0' || s[i] > '9') return -1;
      v = v * 10 + (s[i] - '0');
    }
    return v;
  };
  const int y = num(0, 4), mo = num(5, 2), d = num(8, 2), h = num(11, 2), mi = num(14, 2), se = num(17, 2);
  if (y < 0 || mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 || mi < 0 || mi > 59 || se < 0 || se > 60)
    return std::nullopt;
  const auto days = std::chrono::sys_days(std::chrono::year(y) / mo / d);
  return Timestamp(days.time_since_epoch() + std::chrono::hours(h) + std::chrono::minutes(mi) +
                   std::chrono::seconds(se));
}

inline nlohmann::ordered_json to_json(const CacheEntry& e) {
  nlohmann::ordered_json j;
  j["key"] = e.key;
  j["countries"] = e.countries;
  j["status"] = std::string(to_string(e.status));
  j["retrieved_at"] = format_timestamp(e.retrieved_at);
  if (e.status == CacheStatus::Error) j["error"] = e.error;
  return j;
}

inline std::optional<CacheEntry> cache_entry_from_json(const nlohmann::json& j) {
  if (!j.is_object()) return std::nullopt;
  CacheEntry e;
  auto key = j.find("key");
  auto countries = j.find("countries");
  auto status = j.find("status");
  auto at = j.find("retrieved_at");
  if (key == j.end() || !key->is_string() || countries == j.end() || !countries->is_array() || status == j.end() ||
      !status->is_string() || at == j.end() || !at->is_string())
    return std::nullopt;
  e.key = key->get<std::string>();
  for (const auto& c : *countries) {
    if (!c.is_string()) return std::nullopt;
    e.countries.push_back(c.get<std::string>());
  }
  const auto st = status->get<std::string>();
  if (st == "Hit") e.status = CacheStatus::Hit;
  else if (st == "Empty") e.status = CacheStatus::Empty;
  else if (st == "Error") e.status = CacheStatus::Error;
  else return std::nullopt;
  auto ts = parse_timestamp(at->get<std::string>());
  if (!ts) return std::nullopt;
  e.retrieved_at = *ts;
  if (auto err = j.find("error"); err != j.end() && err->is_string()) e.error = err->get<std::string>();
  if (e.status == CacheStatus::Hit && e.countries.empty()) return std::nullopt;
  if (e.status == CacheStatus::Empty && !e.countries.empty()) return std::nullopt;
  return e;
}

/// Key -> entry store, optionally backed by an append-only JSON-lines file.
/// On load the last line for a key wins; unparsable lines are counted and
/// ignored. Writes are serialized.
class CacheStore {
 public:
  CacheStore() = default;

  explicit CacheStore(std::filesystem::path file) : path_(std::move(file)) {
    if (std::filesystem::exists(path_)) {
      std::ifstream in(path_, std::ios::binary);
      if (!in) throw InputError("cannot read cache file '" + path_.string() + "'");
      std::string line;
      while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto j = nlohmann::json::parse(line, nullptr, false);
        auto e = j.is_discarded() ? std::nullopt : cache_entry_from_json(j);
        if (!e) {
          ++malformed_lines_;
          continue;
        }
        entries_[e->key] = std::move(*e);
      }
    } else if (path_.has_parent_path()) {
      std::filesystem::create_directories(path_.parent_path());
    }
  }

  CacheStore(const CacheStore&) = delete;
  CacheStore& operator=(const CacheStore&) = delete;

  /// Error entries older than `error_ttl` are treated as absent.
  std::optional<CacheEntry> find(std::string_view key, Timestamp now,
                                 std::chrono::seconds error_ttl = std::chrono::hours(24)) const {
    std::lock_guard lock(mu_);
    auto it = entries_.find(std::string(key));
    if (it == entries_.end()) return std::nullopt;
    if (it->second.status == CacheStatus::Error && now - it->second.retrieved_at >= error_ttl) return std::nullopt;
    return it->second;
  }

  void put(const CacheEntry& e) {
    std::lock_guard lock(mu_);
    entries_[e.key] = e;
    if (path_.empty()) return;
    if (!out_.is_open()) {
      out_.open(path_, std::ios::binary | std::ios::app);
      if (!out_) throw InputError("cannot append to cache file '" + path_.string() + "'");
    }
    out_ << to_json(e).dump() << '\n';
    out_.flush();
  }

  std::size_t size() const {
    std::lock_guard lock(mu_);
    return entries_.size();
  }
  std::size_t malformed_lines() const noexcept { return malformed_lines_; }
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  mutable std::mutex mu_;
  std::map<std::string, CacheEntry> entries_;
  std::ofstream out_;
  std::size_t malformed_lines_ = 0;
};

// ---------------------------------------------------------------------------
// Time, rate limiting, transport

class Clock {
 public:
  virtual ~Clock() = default;
  virtual std::chrono::system_clock::time_point now() = 0;
  virtual void sleep_for(std::chrono::nanoseconds d) = 0;
};

class SystemClock final : public Clock {
 public:
  std::chrono::system_clock::time_point now() override { return std::chrono::system_clock::now(); }
  void sleep_for(std::chrono::nanoseconds d) override { std::this_thread::sleep_for(d); }
};

/// Spaces request starts at least 1/per_second apart across all callers.
class RateLimiter {
 public:
  RateLimiter(double per_second, Clock& clock) : clock_(clock) {
    if (per_second > 0)
      interval_ = std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::duration<double>(1.0 / per_second));
  }

  void acquire() {
    if (interval_.count() == 0) return;
    std::chrono::system_clock::time_point now, slot;
    {
      std::lock_guard lock(mu_);
      now = clock_.now();
      slot = std::max(now, next_);
      next_ = slot + std::chrono::duration_cast<std::chrono::system_clock::duration>(interval_);
    }
    if (slot > now) clock_.sleep_for(slot - now);
  }

  std::chrono::nanoseconds interval() const noexcept { return interval_; }

 private:
  Clock& clock_;
  std::mutex mu_;
  std::chrono::nanoseconds interval_{0};
  std::chrono::system_clock::time_point next_{};
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

using Headers = std::vector<std::pair<std::string, std::string>>;

/// Performs one HTTP GET. Throws on transport-level failure (DNS, TLS,
/// connection reset); HTTP error statuses are returned, not thrown.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse get(const std::string& url, const Headers& headers) = 0;
};

// ---------------------------------------------------------------------------
// Labels

/// English country label -> iso2. Seeded from the gazetteer's canonical
/// names and aliases plus an optional label file (label<TAB>iso2).
class LabelMap {
 public:
  static LabelMap from_gazetteer(const Gazetteer& g) {
    LabelMap m;
    for (const auto& c : g.countries()) {
      m.add(c.canonical_name, c.iso2, "countries.tsv");
      for (const auto& a : c.aliases) m.add(a, c.iso2, "countries.tsv");
    }
    return m;
  }

  static LabelMap load(const Gazetteer& g, const std::filesystem::path& label_file) {
    LabelMap m = from_gazetteer(g);
    ircm::detail::for_each_table_line(label_file, [&](std::size_t lineno, const std::vector<std::string>& f) {
      if (f.size() != 2) throw ConfigError(label_file.string(), lineno, "expected label<TAB>iso2");
      const auto iso2 = ircm::detail::trim_copy(f[1]);
      if (!g.has_country(iso2)) throw ConfigError(label_file.string(), lineno, "unknown iso2 " + iso2);
      m.add(f[0], iso2, label_file.string() + ":" + std::to_string(lineno));
    });
    return m;
  }

  void add(std::string_view label, const std::string& iso2, const std::string& origin) {
    auto key = normalize_text(label);
    if (key.empty()) return;
    auto [it, inserted] = labels_.emplace(key, iso2);
    if (!inserted && it->second != iso2)
      throw ConfigError(origin, 0, "label '" + key + "' maps to both " + it->second + " and " + iso2);
  }

  std::optional<std::string> label_to_iso2(std::string_view label) const {
    auto it = labels_.find(normalize_text(label));
    if (it == labels_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t size() const noexcept { return labels_.size(); }

 private:
  std::unordered_map<std::string, std::string> labels_;
};

inline std::optional<std::string> label_to_iso2(std::string_view label, const LabelMap& m) { return m.label_to_iso2(label); }

// ---------------------------------------------------------------------------
// Client

/// Anything that answers "which countries is this fragment in". The resolver
/// depends on this, so tests can substitute a counting stub.
class CountryLookup {
 public:
  virtual ~CountryLookup() = default;
  virtual CacheEntry query_country(std::string_view fragment) = 0;
};

enum class Mode { Online, Offline };

struct ClientOptions {
  std::string endpoint = std::string(kDefaultEndpoint);
  Mode mode = Mode::Online;
  double rate_limit = 2.0;  // requests per second, <= 0 disables
  int max_attempts = 5;
  std::chrono::milliseconds backoff_base{1000};
  double backoff_factor = 2.0;
  std::chrono::seconds error_ttl = std::chrono::hours(24);
  std::string user_agent = std::string(kDefaultUserAgent);
};

struct ClientStats {
  std::size_t lookups = 0;
  std::size_t cache_hits = 0;
  std::size_t network_requests = 0;
  std::size_t coalesced = 0;
};

/// Parses a SPARQL JSON result set; nullopt when the body is not one.
inline std::optional<std::vector<std::string>> parse_country_labels(std::string_view body) {
  auto j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  auto results = j.find("results");
  if (results == j.end() || !results->is_object()) return std::nullopt;
  auto bindings = results->find("bindings");
  if (bindings == results->end() || !bindings->is_array()) return std::nullopt;
  std::vector<std::string> labels;
  for (const auto& b : *bindings) {
    if (!b.is_object()) return std::nullopt;
    auto cl = b.find("countryLabel");
    if (cl == b.end()) continue;
    if (!cl->is_object() || !cl->contains("value") || !(*cl)["value"].is_string()) return std::nullopt;
    auto v = (*cl)["value"].get<std::string>();
    if (std::find(labels.begin(), labels.end(), v) == labels.end()) labels.push_back(std::move(v));
  }
  return labels;
}

class WikidataClient final : public CountryLookup {
 public:
  /// `transport` may be null in Offline mode.
  WikidataClient(ClientOptions opts, CacheStore& cache, Transport* transport, Clock& clock)
      : opts_(std::move(opts)), cache_(cache), transport_(transport), clock_(clock), limiter_(opts_.rate_limit, clock) {}

  /// Cache hit -> stored entry, no I/O. Miss + Online -> HTTP query, result
  /// cached (malformed responses excepted). Miss + Offline -> Error
  /// "offline-miss", not cached. Concurrent misses on one key share a
  /// single request.
  CacheEntry query_country(std::string_view fragment) override {
    const std::string key = normalize_text(fragment);
    if (key.empty()) throw Error("empty Wikidata fragment");
    ++lookups_;
    if (auto hit = cache_.find(key, now_seconds(), opts_.error_ttl)) {
      ++cache_hits_;
      return *hit;
    }
    if (opts_.mode == Mode::Offline) return error_entry(key, "offline-miss");

    std::promise<CacheEntry> promise;
    std::shared_future<CacheEntry> shared;
    {
      std::lock_guard lock(inflight_mu_);
      if (auto it = inflight_.find(key); it != inflight_.end()) {
        ++coalesced_;
        shared = it->second;
      } else if (auto hit = cache_.find(key, now_seconds(), opts_.error_ttl)) {
        ++cache_hits_;
        return *hit;
      } else {
        inflight_.emplace(key, promise.get_future().share());
      }
    }
    if (shared.valid()) return shared.get();

    CacheEntry entry;
    try {
      auto [fetched, cacheable] = fetch(fragment, key);
      if (cacheable) cache_.put(fetched);
      entry = std::move(fetched);
    } catch (...) {
      promise.set_exception(std::current_exception());
      std::lock_guard lock(inflight_mu_);
      inflight_.erase(key);
      throw;
    }
    promise.set_value(entry);
    std::lock_guard lock(inflight_mu_);
    inflight_.erase(key);
    return entry;
  }

  ClientStats stats() const {
    return {lookups_.load(), cache_hits_.load(), network_requests_.load(), coalesced_.load()};
  }

  const ClientOptions& options() const noexcept { return opts_; }

 private:
  Timestamp now_seconds() { return std::chrono::floor<std::chrono::seconds>(clock_.now()); }

  CacheEntry error_entry(const std::string& key, std::string why) {
    CacheEntry e;
    e.key = key;
    e.status = CacheStatus::Error;
    e.retrieved_at = now_seconds();
    e.error = std::move(why);
    return e;
  }

  std::pair<CacheEntry, bool> fetch(std::string_view fragment, const std::string& key) {
    if (!transport_) return {error_entry(key, "no transport configured"), false};
    const SparqlQuery q = build_sparql_query(fragment);
    const std::string url = request_url(opts_.endpoint, q);
    const Headers headers = {{"Accept", "application/sparql-results+json"}, {"User-Agent", opts_.user_agent}};

    std::string last_error;
    for (int attempt = 1; attempt <= std::max(1, opts_.max_attempts); ++attempt) {
      limiter_.acquire();
      ++network_requests_;
      bool retryable = false;
      try {
        HttpResponse resp = transport_->get(url, headers);
        if (resp.status >= 200 && resp.status < 300) {
          auto labels = parse_country_labels(resp.body);
          if (!labels) return {error_entry(key, "malformed SPARQL response"), false};
          CacheEntry e;
          e.key = key;
          e.countries = std::move(*labels);
          e.status = e.countries.empty() ? CacheStatus::Empty : CacheStatus::Hit;
          e.retrieved_at = now_seconds();
          return {std::move(e), true};
        }
        last_error = "HTTP " + std::to_string(resp.status);
        retryable = resp.status == 429 || resp.status >= 500;
      } catch (const std::exception& ex) {
        last_error = std::string("transport: ") + ex.what();
        retryable = true;
      }
      if (!retryable) break;
      if (attempt < opts_.max_attempts) {
        const double scale = std::pow(opts_.backoff_factor, attempt - 1);
        clock_.sleep_for(std::chrono::duration_cast<std::chrono::nanoseconds>(
            std::chrono::duration<double, std::milli>(static_cast<double>(opts_.backoff_base.count()) * scale)));
      }
    }
    return {error_entry(key, last_error), true};
  }

  ClientOptions opts_;
  CacheStore& cache_;
  Transport* transport_;
  Clock& clock_;
  RateLimiter limiter_;
  std::mutex inflight_mu_;
  std::unordered_map<std::string, std::shared_future<CacheEntry>> inflight_;
  std::atomic<std::size_t> lookups_{0}, cache_hits_{0}, network_requests_{0}, coalesced_{0};
};

}  // namespace ircm::wikidata
