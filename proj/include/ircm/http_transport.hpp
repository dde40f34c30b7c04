#pragma once

// Live HTTPS transport on cpp-httplib. Needs OpenSSL at link time; only the
// command-line tool includes this header.

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include "httplib.h"

#include <string>

#include "ircm/error.hpp"
#include "ircm/wikidata.hpp"

namespace ircm::wikidata {

class HttpTransport final : public Transport {
 public:
  explicit HttpTransport(std::chrono::seconds timeout = std::chrono::seconds(60)) : timeout_(timeout) {}

  HttpResponse get(const std::string& url, const Headers& headers) override {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw Error("bad endpoint URL '" + url + "'");
    const auto path_start = url.find('/', scheme_end + 3);
    const std::string origin = url.substr(0, path_start);
    const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

    httplib::Client client(origin);
    client.set_follow_location(true);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    httplib::Headers h;
    for (const auto& [k, v] : headers) h.emplace(k, v);
    auto res = client.Get(path, h);
    if (!res) throw Error("HTTP request failed: " + httplib::to_string(res.error()));
    return {res->status, res->body};
  }

 private:
  std::chrono::seconds timeout_;
};

}  // namespace ircm::wikidata
