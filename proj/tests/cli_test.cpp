#include <gtest/gtest.h>

#include <sys/wait.h>

#include "support.hpp"

using testing_support::fixture_dir;
using testing_support::slurp;
using testing_support::spit;
using testing_support::TempDir;

namespace {

struct Run {
  int code;
  std::string out;
};

std::string quote(const std::string& s) {
  std::string q = "'";
  for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return q + "'";
}

Run cli(const std::vector<std::string>& args, const std::string& env = "") {
  std::string cmd = env + (env.empty() ? "" : " ") + quote(IRCM_CLI_PATH);
  for (const auto& a : args) cmd += " " + quote(a);
  cmd += " 2>&1";
  Run r{-1, ""};
  FILE* p = ::popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, p)) r.out.append(buf, n);
  const int status = ::pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string fixture_endpoint() { return "fixture://" + testing_support::wikidata_fixture_dir().string(); }

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST(Cli, PrepareDropsSingleAuthorWorks) {
  TempDir out;
  const auto r = cli({"prepare", "--input", (fixture_dir() / "prepare_20.tsv").string(), "--output", out.path().string()});
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(lines(slurp(out / "prepared.jsonl")).size(), 14u);
  const auto report = slurp(out / "preparation_report.csv");
  EXPECT_NE(report.find("Total works,20\n"), std::string::npos);
  EXPECT_NE(report.find("\"Unique, co-authored works\",14\n"), std::string::npos);
  EXPECT_NE(report.find("Dropped as single-author,6\n"), std::string::npos);
  EXPECT_NE(report.find("Date range,2000-2006\n"), std::string::npos);
  const auto manifest = nlohmann::json::parse(slurp(out / "run_manifest.prepare.json"));
  EXPECT_EQ(manifest["counts"]["prepared_works"], 14);
  EXPECT_EQ(manifest["inputs"]["input"]["sha256"].get<std::string>().size(), 64u);
}

TEST(Cli, PrepareEmptyInputFailsWithoutOutputs) {
  TempDir dir;
  spit(dir / "empty.tsv", "");
  const auto out = dir / "out";
  const auto r = cli({"prepare", "--input", (dir / "empty.tsv").string(), "--output", out.string()});
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.out.find("no records"), std::string::npos) << r.out;
  EXPECT_FALSE(std::filesystem::exists(out));
}

TEST(Cli, MissingInputFails) {
  TempDir dir;
  const auto r = cli({"metrics", "--input", (dir / "nope.jsonl").string(), "--output", (dir / "o").string()});
  EXPECT_NE(r.code, 0);
  EXPECT_FALSE(std::filesystem::exists(dir / "o"));
}

TEST(Cli, UnknownFormatFails) {
  TempDir dir;
  const auto r = cli({"prepare", "--input", (fixture_dir() / "prepare_20.tsv").string(), "--format", "xml", "--output",
                      (dir / "o").string()});
  EXPECT_NE(r.code, 0);
}

TEST(Cli, ResolveWithFixtureEndpointThenOffline) {
  TempDir dir;
  const auto input = (fixture_dir() / "prepare_20.tsv").string();
  const auto online = dir / "online";
  auto r = cli({"resolve", "--input", input, "--output", online.string(), "--endpoint", fixture_endpoint()});
  ASSERT_EQ(r.code, 0) << r.out;
  const auto manifest = nlohmann::json::parse(slurp(online / "run_manifest.resolve.json"));
  EXPECT_EQ(manifest["counts"]["mentions"], 45);
  EXPECT_GT(manifest["counts"]["Wikidata"].get<int>(), 0);

  // Offline replay from the cache written above, with no transport at all.
  const auto offline = dir / "offline";
  r = cli({"resolve", "--input", input, "--output", offline.string(), "--offline", "--cache",
           (online / "wikidata_cache.jsonl").string()});
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(slurp(offline / "enriched.jsonl"), slurp(online / "enriched.jsonl"));
  const auto m2 = nlohmann::json::parse(slurp(offline / "run_manifest.resolve.json"));
  EXPECT_EQ(m2["counts"]["wikidata_requests"], 0);
}

TEST(Cli, OfflineWithoutCacheFails) {
  TempDir dir;
  const auto r = cli({"resolve", "--input", (fixture_dir() / "prepare_20.tsv").string(), "--output",
                      (dir / "o").string(), "--offline", "--cache", (dir / "missing.jsonl").string()});
  EXPECT_NE(r.code, 0);
  EXPECT_FALSE(std::filesystem::exists(dir / "o"));
}

TEST(Cli, AllNullCorpusIsAllNullLike) {
  TempDir dir;
  spit(dir / "nulls.tsv", "a\t0\tNA\tT\t2001\t\na\t1\tnull\tT\t2001\t\nb\t0\t \tT\t2002\t\nb\t1\tN/A\tT\t2002\t\n");
  const auto r = cli({"resolve", "--input", (dir / "nulls.tsv").string(), "--output", (dir / "o").string(),
                      "--no-wikidata"});
  ASSERT_EQ(r.code, 0) << r.out;
  const auto csv = lines(slurp(dir / "o" / "breakdown.csv"));
  EXPECT_EQ(csv[1], "Affiliations,4,100.00");
  EXPECT_EQ(csv[2], "NA/Null values,4,100.00");
}

TEST(Cli, ResolveIsDeterministicAcrossJobs) {
  TempDir dir;
  const auto input = (fixture_dir() / "prepare_20.tsv").string();
  std::vector<std::string> outs;
  for (const char* jobs : {"1", "8", "1"}) {
    const auto o = dir / ("o" + std::to_string(outs.size()));
    const auto r = cli({"resolve", "--input", input, "--output", o.string(), "--endpoint", fixture_endpoint(), "--jobs",
                        jobs});
    ASSERT_EQ(r.code, 0) << r.out;
    outs.push_back(slurp(o / "enriched.jsonl") + slurp(o / "breakdown.csv") + slurp(o / "breakdown.txt"));
  }
  EXPECT_EQ(outs[0], outs[1]);
  EXPECT_EQ(outs[0], outs[2]);
}

TEST(Cli, MetricsOnHandComputedFixture) {
  TempDir dir;
  const auto r = cli({"metrics", "--input", (fixture_dir() / "metrics_enriched.jsonl").string(), "--records",
                      (fixture_dir() / "metrics_records.jsonl").string(), "--output", dir.path().string()});
  ASSERT_EQ(r.code, 0) << r.out;
  const auto j = nlohmann::json::parse(slurp(dir / "irc_stats.json"));
  EXPECT_EQ(j["total_papers"], 2);
  EXPECT_EQ(j["international"], 1);
  EXPECT_EQ(j["domestic"], 1);
  EXPECT_DOUBLE_EQ(j["irc_ratio"].get<double>(), 0.5);
  EXPECT_EQ(lines(slurp(dir / "irc_per_year.csv")),
            (std::vector<std::string>{"year,total_papers,international,domestic,unmeasurable,irc_ratio",
                                      "2010,1,1,0,0,1.000000", "2011,1,0,1,0,0.000000"}));
  EXPECT_EQ(slurp(dir / "irc_pairs.csv"), "country_a,country_b,papers\nCA,NZ,1\n");
}

TEST(Cli, MetricsOnEmptyEnrichedIsZero) {
  TempDir dir;
  spit(dir / "e.jsonl", "");
  const auto r = cli({"metrics", "--input", (dir / "e.jsonl").string(), "--output", (dir / "o").string()});
  ASSERT_EQ(r.code, 0) << r.out;
  const auto j = nlohmann::json::parse(slurp(dir / "o" / "irc_stats.json"));
  EXPECT_EQ(j["total_papers"], 0);
  EXPECT_TRUE(j["irc_ratio"].is_null());
}

TEST(Cli, MetricsRejectsUnknownPaper) {
  TempDir dir;
  spit(dir / "r.jsonl", R"({"paper_id":"p1","authors":[{"affiliation":"x"}]})" "\n");
  const auto r = cli({"metrics", "--input", (fixture_dir() / "metrics_enriched.jsonl").string(), "--records",
                      (dir / "r.jsonl").string(), "--output", (dir / "o").string()});
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.out.find("p2"), std::string::npos) << r.out;
  EXPECT_FALSE(std::filesystem::exists(dir / "o"));
}

TEST(Cli, ReportRebuildsBreakdown) {
  TempDir dir;
  const auto r = cli({"report", "--input", (fixture_dir() / "metrics_enriched.jsonl").string(), "--output",
                      dir.path().string()});
  ASSERT_EQ(r.code, 0) << r.out;
  const auto csv = lines(slurp(dir / "breakdown.csv"));
  EXPECT_EQ(csv[1], "Affiliations,5,100.00");
  EXPECT_EQ(csv[2], "NA/Null values,1,20.00");
  EXPECT_EQ(csv[3], "Country names identified,2,40.00");
}

TEST(Cli, EnvironmentSuppliesEndpointAndCacheDir) {
  TempDir dir;
  const auto cache_dir = dir / "cache";
  const auto r = cli({"resolve", "--input", (fixture_dir() / "prepare_20.tsv").string(), "--output",
                      (dir / "o").string()},
                     "IRC_SPARQL_ENDPOINT=" + quote(fixture_endpoint()) + " IRC_CACHE_DIR=" + quote(cache_dir.string()));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_TRUE(std::filesystem::exists(cache_dir / "wikidata_cache.jsonl"));
}
