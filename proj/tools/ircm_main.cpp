// ircm: affiliation country resolution and IRC statistics.
//
//   ircm prepare  --input corpus.tsv --output out/ [--fos-overlap acm.csv] [--dedup-against mag.tsv]
//   ircm resolve  --input out/prepared.jsonl --output out/ [--offline] [--cache file]
//   ircm metrics  --input out/enriched.jsonl --output out/ [--records out/prepared.jsonl]
//   ircm report   --input out/enriched.jsonl --output out/

#include <openssl/evp.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ircm/fixture_transport.hpp"
#include "ircm/http_transport.hpp"
#include "ircm/ircm.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr std::string_view kFixtureScheme = "fixture://";

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : std::move(fallback);
}

std::string sha256_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ircm::InputError("cannot read '" + p.string() + "' for digest");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0x0F]);
  }
  return out;
}

// Collects every artifact of a command and publishes them together: each is
// written to a temporary sibling, then all are renamed. On any failure the
// temporaries and already-renamed files are removed.
class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}

  void add(const std::string& name, std::string content) { files_.emplace_back(name, std::move(content)); }

  std::vector<fs::path> commit() {
    fs::create_directories(dir_);
    std::vector<fs::path> temps, published;
    try {
      for (const auto& [name, content] : files_) {
        const fs::path tmp = dir_ / (name + ".partial");
        temps.push_back(tmp);
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << content;
        out.close();
        if (!out) throw ircm::Error("cannot write '" + tmp.string() + "'");
      }
      for (std::size_t i = 0; i < files_.size(); ++i) {
        const fs::path dest = dir_ / files_[i].first;
        fs::rename(temps[i], dest);
        published.push_back(dest);
      }
    } catch (...) {
      std::error_code ec;
      for (const auto& p : temps) fs::remove(p, ec);
      for (const auto& p : published) fs::remove(p, ec);
      throw;
    }
    return published;
  }

 private:
  fs::path dir_;
  std::vector<std::pair<std::string, std::string>> files_;
};

struct Common {
  std::string input;
  std::string format;
  std::string output = ".";
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
};

ircm::InputFormat format_of(const std::string& flag, const fs::path& p) {
  return flag.empty() ? ircm::infer_format(p) : ircm::parse_format(flag);
}

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw ircm::InputError(std::string(what) + " is required");
  if (!fs::is_regular_file(path)) throw ircm::InputError(std::string(what) + " '" + path + "' does not exist");
}

ordered_json manifest_base(const std::string& command, const std::map<std::string, std::string>& inputs) {
  ordered_json m;
  m["tool"] = "ircm";
  m["command"] = command;
  ordered_json digests = ordered_json::object();
  for (const auto& [role, path] : inputs)
    if (!path.empty()) digests[role] = {{"path", path}, {"sha256", sha256_file(path)}};
  m["inputs"] = std::move(digests);
  return m;
}

std::string records_jsonl(const std::vector<ircm::BibRecord>& rs) {
  std::ostringstream out;
  for (const auto& r : rs) ircm::write_record_jsonl(out, r);
  return out.str();
}

// --------------------------------------------------------------------------- prepare

struct PrepareArgs {
  Common c;
  std::string fos_overlap, dedup_against, other_format;
  std::size_t top_k = 38;
};

int cmd_prepare(const PrepareArgs& a) {
  require_file(a.c.input, "--input");
  ircm::ParseReport parse;
  auto records = ircm::read_records(a.c.input, format_of(a.c.format, a.c.input), &parse);
  if (records.empty()) throw ircm::InputError("input '" + a.c.input + "' contains no records");

  ircm::PreparationReport rep;
  rep.total_works = records.size();
  rep.rows_skipped = parse.rows_skipped;
  ircm::set_date_range(rep, records);

  if (!a.fos_overlap.empty()) {
    require_file(a.fos_overlap, "--fos-overlap");
    const auto other = ircm::read_records(a.fos_overlap, format_of(a.other_format, a.fos_overlap));
    const auto overlap = ircm::overlap_with(records, ircm::DedupKeys::from(other));
    rep.fos = ircm::compute_fos_filter(overlap, a.top_k);
    auto kept = ircm::filter_by_fos(records, *rep.fos);
    rep.dropped_by_fos = records.size() - kept.size();
    records = std::move(kept);
  }
  if (!a.dedup_against.empty()) {
    require_file(a.dedup_against, "--dedup-against");
    const auto other = ircm::read_records(a.dedup_against, format_of(a.other_format, a.dedup_against));
    auto kept = ircm::dedup_overlap(records, ircm::DedupKeys::from(other));
    rep.dropped_as_overlap = records.size() - kept.size();
    records = std::move(kept);
  }
  ircm::CoauthorCounts cc;
  records = ircm::filter_coauthored(records, &cc);
  rep.single_author = cc.single_author;
  rep.no_author_data = cc.no_author_data;
  rep.coauthored_works = records.size();

  auto manifest = manifest_base("prepare", {{"input", a.c.input}, {"fos_overlap", a.fos_overlap},
                                            {"dedup_against", a.dedup_against}});
  manifest["config"] = {{"format", a.c.format.empty() ? "auto" : a.c.format},
                        {"top_k_fos", a.top_k},
                        {"output", a.c.output}};
  manifest["counts"] = {{"rows_read", parse.rows_read},
                        {"rows_skipped", parse.rows_skipped},
                        {"total_works", rep.total_works},
                        {"prepared_works", rep.coauthored_works}};

  OutputSet out(a.c.output);
  out.add("prepared.jsonl", records_jsonl(records));
  out.add("preparation_report.csv", ircm::preparation_csv(rep));
  out.add("preparation_report.txt", ircm::preparation_text(rep));
  out.add("run_manifest.prepare.json", manifest.dump(2) + "\n");
  out.commit();
  std::cout << ircm::preparation_text(rep);
  for (const auto& s : parse.skip_samples) std::cerr << "skipped: " << s << '\n';
  return 0;
}

// --------------------------------------------------------------------------- resolve

struct ResolveArgs {
  Common c;
  std::string gazetteer = IRCM_DEFAULT_DATA_DIR;
  std::string cache, endpoint, user_agent;
  bool offline = false, no_wikidata = false, extended_parts = false;
  double rate_limit = 2.0;
};

std::string default_cache_path(const std::string& output) {
  const std::string dir = env_or("IRC_CACHE_DIR", "");
  return ((dir.empty() ? fs::path(output) : fs::path(dir)) / "wikidata_cache.jsonl").string();
}

int cmd_resolve(ResolveArgs a) {
  require_file(a.c.input, "--input");
  const auto g = ircm::Gazetteer::load(a.gazetteer, {a.extended_parts});
  const fs::path label_file = fs::path(a.gazetteer) / "wikidata_labels.tsv";
  const auto labels = fs::exists(label_file) ? ircm::wikidata::LabelMap::load(g, label_file)
                                             : ircm::wikidata::LabelMap::from_gazetteer(g);

  if (a.endpoint.empty()) a.endpoint = env_or("IRC_SPARQL_ENDPOINT", std::string(ircm::wikidata::kDefaultEndpoint));
  if (a.user_agent.empty()) a.user_agent = env_or("IRC_USER_AGENT", std::string(ircm::wikidata::kDefaultUserAgent));
  if (a.cache.empty()) a.cache = default_cache_path(a.c.output);
  if (a.offline && !a.no_wikidata && !fs::is_regular_file(a.cache))
    throw ircm::InputError("offline mode requires an existing cache file, '" + a.cache + "' not found");

  ircm::ParseReport parse;
  const auto records = ircm::read_records(a.c.input, format_of(a.c.format, a.c.input), &parse);

  std::optional<ircm::wikidata::CacheStore> cache;
  std::unique_ptr<ircm::wikidata::Transport> transport;
  ircm::wikidata::SystemClock clock;
  std::optional<ircm::wikidata::WikidataClient> client;
  std::size_t cache_entries_at_start = 0;
  if (!a.no_wikidata) {
    cache.emplace(a.cache);
    cache_entries_at_start = cache->size();
    ircm::wikidata::ClientOptions opts;
    opts.endpoint = a.endpoint;
    opts.mode = a.offline ? ircm::wikidata::Mode::Offline : ircm::wikidata::Mode::Online;
    opts.rate_limit = a.rate_limit;
    opts.user_agent = a.user_agent;
    if (!a.offline) {
      if (a.endpoint.rfind(kFixtureScheme, 0) == 0) {
        transport = std::make_unique<ircm::wikidata::FixtureTransport>(a.endpoint.substr(kFixtureScheme.size()), true);
        opts.rate_limit = 0;
      } else {
        transport = std::make_unique<ircm::wikidata::HttpTransport>();
      }
    }
    client.emplace(opts, *cache, transport.get(), clock);
  }

  const ircm::Resolver resolver(g, labels, client ? &*client : nullptr);
  const auto result = ircm::resolve_corpus(records, resolver, {a.c.jobs, true});

  std::ostringstream enriched;
  ircm::write_resolutions_jsonl(enriched, result.resolutions);

  auto manifest = manifest_base("resolve", {{"input", a.c.input}});
  manifest["config"] = {{"format", a.c.format.empty() ? "auto" : a.c.format},
                        {"gazetteer", a.gazetteer},
                        {"extended_parts", a.extended_parts},
                        {"wikidata", !a.no_wikidata},
                        {"mode", a.offline ? "offline" : "online"},
                        {"endpoint", a.endpoint},
                        {"cache", a.no_wikidata ? "" : a.cache},
                        {"rate_limit", a.rate_limit},
                        {"jobs", a.c.jobs},
                        {"output", a.c.output}};
  ordered_json counts = {{"records", records.size()},
                         {"rows_skipped", parse.rows_skipped},
                         {"mentions", result.breakdown.total},
                         {"unique_strings", result.unique_strings},
                         {"cache_entries_at_start", cache_entries_at_start}};
  for (auto cat : ircm::kAllCategories) counts[std::string(ircm::to_string(cat))] = result.breakdown.count(cat);
  if (client) {
    const auto st = client->stats();
    counts["wikidata_lookups"] = st.lookups;
    counts["wikidata_cache_hits"] = st.cache_hits;
    counts["wikidata_requests"] = st.network_requests;
  }
  manifest["counts"] = std::move(counts);
  manifest["unmapped_labels"] = result.unmapped_labels;

  OutputSet out(a.c.output);
  out.add("enriched.jsonl", enriched.str());
  out.add("breakdown.csv", ircm::breakdown_csv(result.breakdown));
  out.add("breakdown.txt", ircm::breakdown_text(result.breakdown));
  out.add("run_manifest.resolve.json", manifest.dump(2) + "\n");
  out.commit();
  std::cout << ircm::breakdown_text(result.breakdown);
  for (const auto& l : result.unmapped_labels) std::cerr << "unmapped Wikidata label: " << l << '\n';
  return 0;
}

// --------------------------------------------------------------------------- metrics / report

std::vector<ircm::Resolution> load_enriched(const std::string& path) {
  require_file(path, "--input");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ircm::InputError("cannot open '" + path + "'");
  return ircm::read_resolutions_jsonl(in);
}

struct MetricsArgs {
  Common c;
  std::string records, records_format;
  std::string gazetteer = IRCM_DEFAULT_DATA_DIR;
};

int cmd_metrics(const MetricsArgs& a) {
  const auto resolutions = load_enriched(a.c.input);
  const auto g = ircm::Gazetteer::load(a.gazetteer);
  std::vector<ircm::PaperCountrySet> papers;
  if (!a.records.empty()) {
    require_file(a.records, "--records");
    const auto recs = ircm::read_records(a.records, format_of(a.records_format, a.records));
    papers = ircm::collapse_to_papers(resolutions, recs, &g);
  } else {
    papers = ircm::collapse_to_papers(resolutions, &g);
  }
  const auto stats = ircm::compute_irc_parallel(papers, a.c.jobs);

  auto manifest = manifest_base("metrics", {{"input", a.c.input}, {"records", a.records}});
  manifest["config"] = {{"gazetteer", a.gazetteer}, {"jobs", a.c.jobs}, {"output", a.c.output}};
  manifest["counts"] = {{"mentions", resolutions.size()},
                        {"papers", stats.totals.total_papers},
                        {"international", stats.totals.international},
                        {"domestic", stats.totals.domestic},
                        {"unmeasurable", stats.totals.unmeasurable}};

  OutputSet out(a.c.output);
  out.add("irc_stats.json", ircm::irc_stats_json(stats));
  out.add("irc_per_year.csv", ircm::per_year_csv(stats));
  out.add("irc_pairs.csv", ircm::pairs_csv(stats));
  out.add("irc_summary.txt", ircm::irc_summary_text(stats));
  out.add("run_manifest.metrics.json", manifest.dump(2) + "\n");
  out.commit();
  std::cout << ircm::irc_summary_text(stats);
  return 0;
}

int cmd_report(const Common& c) {
  const auto resolutions = load_enriched(c.input);
  const auto b = ircm::breakdown_of(resolutions);
  auto manifest = manifest_base("report", {{"input", c.input}});
  manifest["config"] = {{"output", c.output}};
  manifest["counts"] = {{"mentions", b.total}};
  OutputSet out(c.output);
  out.add("breakdown.csv", ircm::breakdown_csv(b));
  out.add("breakdown.txt", ircm::breakdown_text(b));
  out.add("run_manifest.report.json", manifest.dump(2) + "\n");
  out.commit();
  std::cout << ircm::breakdown_text(b);
  return 0;
}

void add_common(CLI::App* sub, Common& c, const char* input_help) {
  sub->add_option("--input,-i", c.input, input_help)->required();
  sub->add_option("--output,-o", c.output, "Output directory");
  sub->add_option("--jobs,-j", c.jobs, "Worker threads")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Resolve author affiliations to countries and compute collaboration statistics"};
  app.require_subcommand(1);

  PrepareArgs prep;
  auto* p = app.add_subcommand("prepare", "Filter a corpus to unique, co-authored works");
  add_common(p, prep.c, "Corpus file");
  p->add_option("--format,-f", prep.c.format, "mag_tsv | generic_csv | generic_jsonl (default: by extension)");
  p->add_option("--fos-overlap", prep.fos_overlap, "Second corpus; its overlap with the input selects FOS terms");
  p->add_option("--dedup-against", prep.dedup_against, "Second corpus whose works are removed from the input");
  p->add_option("--other-format", prep.other_format, "Format of the second corpus files");
  p->add_option("--top-k-fos", prep.top_k, "Number of FOS terms kept")->check(CLI::PositiveNumber);

  ResolveArgs res;
  auto* r = app.add_subcommand("resolve", "Resolve affiliations to countries");
  add_common(r, res.c, "Prepared corpus");
  r->add_option("--format,-f", res.c.format, "Input format (default: by extension)");
  r->add_option("--gazetteer,-g", res.gazetteer, "Gazetteer table directory");
  r->add_option("--cache", res.cache, "Wikidata cache file (default: $IRC_CACHE_DIR or output dir)");
  r->add_option("--endpoint", res.endpoint, "SPARQL endpoint, or fixture://DIR for recorded responses");
  r->add_option("--rate-limit", res.rate_limit, "Maximum requests per second");
  r->add_option("--user-agent", res.user_agent, "User-Agent header");
  r->add_flag("--offline", res.offline, "Use the cache only; misses stay unidentified");
  r->add_flag("--no-wikidata", res.no_wikidata, "Skip the Wikidata step entirely");
  r->add_flag("--extended-parts", res.extended_parts, "Also match Canadian and Australian subdivisions");

  MetricsArgs met;
  auto* m = app.add_subcommand("metrics", "Compute IRC statistics from enriched mentions");
  add_common(m, met.c, "Enriched mentions (JSON lines)");
  m->add_option("--records", met.records, "Prepared corpus, for publication years and paper order");
  m->add_option("--records-format", met.records_format, "Format of --records");
  m->add_option("--gazetteer,-g", met.gazetteer, "Gazetteer table directory");

  Common rep;
  auto* t = app.add_subcommand("report", "Rebuild the identification breakdown from enriched mentions");
  add_common(t, rep, "Enriched mentions (JSON lines)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (p->parsed()) return cmd_prepare(prep);
    if (r->parsed()) return cmd_resolve(res);
    if (m->parsed()) return cmd_metrics(met);
    if (t->parsed()) return cmd_report(rep);
  } catch (const std::exception& e) {
    std::cerr << "ircm: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
