#pragma once

// Umbrella header for the library (everything except the live HTTP transport,
// which lives in ircm/http_transport.hpp and needs OpenSSL).

#include "ircm/corpus_prep.hpp"
#include "ircm/error.hpp"
#include "ircm/fixture_transport.hpp"
#include "ircm/gazetteer.hpp"
#include "ircm/metrics.hpp"
#include "ircm/normalize.hpp"
#include "ircm/records.hpp"
#include "ircm/report.hpp"
#include "ircm/resolver.hpp"
#include "ircm/wikidata.hpp"
