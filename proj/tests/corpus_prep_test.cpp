#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using ircm::BibRecord;
using testing_support::make_record;

namespace {

BibRecord titled(std::string id, std::string title, std::optional<int> year, std::string doi = "") {
  BibRecord r = make_record(std::move(id), year, {"A", "B"});
  r.title = std::move(title);
  r.doi = std::move(doi);
  return r;
}

BibRecord tagged(std::string id, std::vector<std::string> fos) {
  BibRecord r = make_record(std::move(id), 2000, {"A", "B"});
  r.fos_terms = std::move(fos);
  return r;
}

std::vector<BibRecord> fos_corpus(std::uint32_t seed, std::size_t n) {
  static const std::vector<std::string> terms = {"Machine learning", "machine-learning", "Databases",  "Computer vision",
                                                 "Biology",          "Chemistry",        "Algorithms", "Data mining",
                                                 "Robotics",         "Economics",        "Physics",    "Networks"};
  std::mt19937 rng(seed);
  std::vector<BibRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::string> fos;
    for (std::size_t k = rng() % 4; k > 0; --k) fos.push_back(terms[rng() % terms.size()]);
    out.push_back(tagged("f" + std::to_string(i), fos));
  }
  return out;
}

}  // namespace

TEST(FosFilter, SingleTermCorpus) {
  std::vector<BibRecord> rs;
  for (int i = 0; i < 10; ++i) rs.push_back(tagged("p" + std::to_string(i), {"machine learning"}));
  const auto f = ircm::compute_fos_filter(rs, 1);
  EXPECT_EQ(f.terms, (std::set<std::string>{"machine learning"}));
  EXPECT_DOUBLE_EQ(f.coverage, 1.0);
  EXPECT_EQ(f.overlap_papers, 10u);
}

TEST(FosFilter, EmptyOverlapIsError) {
  EXPECT_THROW(ircm::compute_fos_filter(std::vector<BibRecord>{}, 5), ircm::Error);
}

TEST(FosFilter, TermsCompareNormalized) {
  const auto f = ircm::compute_fos_filter(std::vector<BibRecord>{tagged("a", {"Machine Learning"}), tagged("b", {"machine-learning"})}, 1);
  EXPECT_EQ(f.terms, (std::set<std::string>{"machine learning"}));
  EXPECT_DOUBLE_EQ(f.coverage, 1.0);
}

TEST(FosFilter, HundredPaperFixtureMatchesRecount) {
  const auto corpus = fos_corpus(101, 100);
  const auto f = ircm::compute_fos_filter(corpus, 5);

  // Recount: paper frequency per normalized term, top five, then coverage.
  std::map<std::string, int> freq;
  for (const auto& r : corpus) {
    std::set<std::string> uniq;
    for (const auto& t : r.fos_terms) uniq.insert(ircm::normalize_text(t));
    for (const auto& t : uniq) ++freq[t];
  }
  std::vector<std::pair<int, std::string>> ranked;
  for (const auto& [t, n] : freq) ranked.emplace_back(-n, t);
  std::sort(ranked.begin(), ranked.end());
  std::set<std::string> top;
  for (std::size_t i = 0; i < 5 && i < ranked.size(); ++i) top.insert(ranked[i].second);
  EXPECT_EQ(f.terms, top);

  int covered = 0;
  for (const auto& r : corpus) {
    bool hit = false;
    for (const auto& t : r.fos_terms) hit = hit || top.count(ircm::normalize_text(t));
    covered += hit;
  }
  EXPECT_DOUBLE_EQ(f.coverage, covered / 100.0);
}

TEST(FosFilter, FilterMatchesBruteForceScan) {
  const auto corpus = fos_corpus(5, 300);
  const auto f = ircm::compute_fos_filter(corpus, 3);
  const auto kept = ircm::filter_by_fos(corpus, f);
  std::vector<std::string> expected;
  for (const auto& r : corpus)
    for (const auto& t : r.fos_terms)
      if (f.terms.count(ircm::normalize_text(t))) {
        expected.push_back(r.paper_id);
        break;
      }
  std::vector<std::string> got;
  for (const auto& r : kept) got.push_back(r.paper_id);
  EXPECT_EQ(got, expected);
}

TEST(FosFilter, RecordWithoutTermsDropped) {
  ircm::FosFilter f;
  f.terms = {"databases"};
  EXPECT_FALSE(ircm::passes_fos(tagged("x", {}), f));
  EXPECT_TRUE(ircm::passes_fos(tagged("y", {"Databases"}), f));
}

TEST(Dedup, IdenticalTitleYearDropped) {
  const auto keys = ircm::DedupKeys::from(std::vector<BibRecord>{titled("m1", "Deep Learning", 2015)});
  EXPECT_TRUE(ircm::dedup_overlap(std::vector<BibRecord>{titled("a1", "Deep learning.", 2015)}, keys).empty());
}

TEST(Dedup, SameTitleDifferentYearKept) {
  const auto keys = ircm::DedupKeys::from(std::vector<BibRecord>{titled("m1", "Deep Learning", 2015)});
  EXPECT_EQ(ircm::dedup_overlap(std::vector<BibRecord>{titled("a1", "Deep Learning", 2016)}, keys).size(), 1u);
}

TEST(Dedup, DoiDecidesWhenBothHaveOne) {
  const auto keys = ircm::DedupKeys::from(std::vector<BibRecord>{titled("m1", "Intro", 2010, "10.1/AAA")});
  EXPECT_EQ(ircm::dedup_overlap(std::vector<BibRecord>{titled("a", "Intro", 2010, "10.1/bbb")}, keys).size(), 1u);
  EXPECT_TRUE(ircm::dedup_overlap(std::vector<BibRecord>{titled("b", "Other", 2011, "https://doi.org/10.1/aaa")}, keys).empty());
  EXPECT_TRUE(ircm::dedup_overlap(std::vector<BibRecord>{titled("c", "Intro", 2010)}, keys).empty());
}

TEST(Dedup, SevenKnownOverlaps) {
  const std::vector<BibRecord> secondary = {
      titled("m1", "A Survey of Query Optimization", 2001),
      titled("m2", "Graph Neural Networks", 2019, "10.5555/gnn"),
      titled("m3", "On the Complexity of Sorting", 1985),
      titled("m4", "Privacy in the Cloud", 2012),
      titled("m5", "Sparse Matrices", 1999),
      titled("m6", "Learning to Rank", 2009),
      titled("m7", "Consensus Protocols", 2014, "10.1/consensus"),
      titled("m8", "Unrelated Paper", 2000),
  };
  const std::vector<BibRecord> primary = {
      titled("a1", "A survey of query optimization.", 2001),       // overlap: punctuation and case
      titled("a2", "Graph neural networks", 2019, "10.5555/GNN"),   // overlap: DOI
      titled("a3", "On the complexity of sorting", 1986),           // year differs
      titled("a4", "PRIVACY IN THE CLOUD", 2012),                    // overlap
      titled("a5", "Sparse matrices", 1999, "10.9/sparse"),          // overlap: only one side has a DOI
      titled("a6", "Learning-to-Rank", 2009),                        // overlap
      titled("a7", "Consensus protocols", 2014, "10.1/other"),       // both DOIs, different
      titled("a8", "Totally different title", 2014, "10.1/consensus"),  // overlap: DOI
      titled("a9", "Learning to Rank", 2019),                        // year differs
      titled("a10", "Unrelated paper", 2000),                        // overlap
      titled("a11", "", 2000),                                       // no title key
  };
  const auto kept = ircm::dedup_overlap(primary, ircm::DedupKeys::from(secondary));
  EXPECT_EQ(primary.size() - kept.size(), 7u);
  std::vector<std::string> ids;
  for (const auto& r : kept) ids.push_back(r.paper_id);
  EXPECT_EQ(ids, (std::vector<std::string>{"a3", "a7", "a9", "a11"}));
}

TEST(Coauthored, Examples) {
  ircm::CoauthorCounts counts;
  const std::vector<BibRecord> in = {make_record("one", 2000, {"A"}), make_record("two", 2000, {"A", "B"}),
                                     make_record("zero", 2000, {})};
  const auto kept = ircm::filter_coauthored(in, &counts);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0].paper_id, "two");
  EXPECT_EQ(counts.single_author, 1u);
  EXPECT_EQ(counts.no_author_data, 1u);
  EXPECT_EQ(counts.kept, 1u);
}

TEST(Coauthored, CountsDistinctAuthorIndices) {
  BibRecord r = make_record("r", 2000, {"A"});
  r.mentions.push_back({"r", 0, "B"});
  EXPECT_EQ(ircm::distinct_authors(r), 1u);
  EXPECT_TRUE(ircm::filter_coauthored(std::vector<BibRecord>{r}).empty());
}

// Each filter returns an order-preserving subsequence of unmodified records.
TEST(CorpusPrepProperty, FiltersAreOrderPreservingSubsets) {
  std::mt19937 rng(23);
  auto corpus = fos_corpus(77, 200);
  for (auto& r : corpus) {
    r.mentions.resize(rng() % 4);
    for (std::size_t i = 0; i < r.mentions.size(); ++i) r.mentions[i] = {r.paper_id, i, "x"};
    r.title = "t" + std::to_string(rng() % 50);
  }
  const auto f = ircm::compute_fos_filter(corpus, 4);
  const auto secondary = std::vector<BibRecord>(corpus.begin(), corpus.begin() + 40);
  const auto keys = ircm::DedupKeys::from(secondary);
  const std::vector<std::vector<BibRecord>> outputs = {ircm::filter_by_fos(corpus, f), ircm::dedup_overlap(corpus, keys),
                                                       ircm::filter_coauthored(corpus)};
  for (const auto& out : outputs) {
    std::size_t j = 0;
    for (const auto& r : out) {
      while (j < corpus.size() && corpus[j].paper_id != r.paper_id) ++j;
      ASSERT_LT(j, corpus.size());
      ASSERT_EQ(corpus[j], r);
      ++j;
    }
  }
}
