#pragma once

// Replays recorded SPARQL responses from a directory instead of the network.
//
// The directory holds index.tsv with lines
//   <subject IRI><TAB><HTTP status><TAB><response file>
// and the response files it names. A request is matched on the Wikipedia
// subject IRI embedded in its query text.

#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "ircm/error.hpp"
#include "ircm/gazetteer.hpp"
#include "ircm/wikidata.hpp"

namespace ircm::wikidata {

inline constexpr std::string_view kEmptyResultBody =
    R"({"head":{"vars":["countryLabel"]},"results":{"bindings":[]}})";

/// Extracts the en.wikipedia subject IRI from a request URL built by
/// request_url(); empty when absent.
inline std::string subject_iri_of(std::string_view url) {
  const auto q = url.find("query=");
  if (q == std::string_view::npos) return {};
  auto value = url.substr(q + 6);
  value = value.substr(0, value.find('&'));
  const std::string text = form_decode(value);
  const auto start = text.find(std::string("<") + std::string(kWikipediaPrefix));
  if (start == std::string::npos) return {};
  const auto end = text.find('>', start);
  if (end == std::string::npos) return {};
  return text.substr(start + 1, end - start - 1);
}

class FixtureTransport final : public Transport {
 public:
  struct Recorded {
    int status = 200;
    std::string body;
  };

  /// With `missing_as_empty`, IRIs absent from the index answer with an
  /// empty result set (no article); otherwise they answer 404.
  explicit FixtureTransport(const std::filesystem::path& dir, bool missing_as_empty = false)
      : missing_as_empty_(missing_as_empty) {
    const auto index = dir / "index.tsv";
    ircm::detail::for_each_table_line(index, [&](std::size_t lineno, const std::vector<std::string>& f) {
      if (f.size() != 3) throw ConfigError(index.string(), lineno, "expected iri<TAB>status<TAB>file");
      std::ifstream in(dir / f[2], std::ios::binary);
      if (!in) throw ConfigError(index.string(), lineno, "missing response file " + f[2]);
      std::ostringstream body;
      body << in.rdbuf();
      responses_[f[0]] = Recorded{std::stoi(f[1]), body.str()};
    });
  }

  HttpResponse get(const std::string& url, const Headers&) override {
    ++calls_;
    const auto iri = subject_iri_of(url);
    auto it = responses_.find(iri);
    if (it != responses_.end()) return {it->second.status, it->second.body};
    if (missing_as_empty_) return {200, std::string(kEmptyResultBody)};
    return {404, "no recorded response for " + iri};
  }

  std::size_t calls() const noexcept { return calls_.load(); }
  bool has(const std::string& iri) const { return responses_.count(iri) > 0; }

 private:
  std::map<std::string, Recorded> responses_;
  bool missing_as_empty_;
  std::atomic<std::size_t> calls_{0};
};

}  // namespace ircm::wikidata
