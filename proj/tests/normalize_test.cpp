#include <gtest/gtest.h>

#include <random>
#include <string>

#include "support.hpp"

using ircm::normalize_affiliation;
using ircm::normalize_text;

namespace {

// Straight-line ASCII reference: lower-case, blank the tab marker, keep
// letters/digits/commas, then tidy the comma-separated pieces.
std::string ascii_oracle(const std::string& raw) {
  std::string s;
  for (char c : raw) s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  for (std::size_t p; (p = s.find("#tab#")) != std::string::npos;) s.replace(p, 5, " ");
  for (char& c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != ',') c = ' ';
  std::vector<std::string> segs;
  std::stringstream ss(s);
  std::string piece;
  while (std::getline(ss, piece, ',')) {
    std::stringstream ws(piece);
    std::string w, seg;
    while (ws >> w) seg += (seg.empty() ? "" : " ") + w;
    if (!seg.empty()) segs.push_back(seg);
  }
  std::string out;
  for (const auto& seg : segs) out += (out.empty() ? "" : ", ") + seg;
  return out;
}

std::string random_ascii(std::mt19937& rng, std::size_t max_len) {
  static const std::string alphabet = "abcXYZ019 ,,.-_/#tabTAB()&'\"\t";
  std::uniform_int_distribution<std::size_t> len(0, max_len), pick(0, alphabet.size() - 1);
  std::string s;
  for (std::size_t i = len(rng); i > 0; --i) s.push_back(alphabet[pick(rng)]);
  return s;
}

std::string random_unicode(std::mt19937& rng) {
  static const std::vector<std::string> pieces = {"a", "Z", "ß", "é", "É", "ﬁ", "Ⅻ", "①", "ı", "İ", "東京", "Ａ", "，",
                                                  ",", " ", " ", "-", "\u2014", "·", "#TAB#", "Straße", "ǅ", "́"};
  std::uniform_int_distribution<std::size_t> len(0, 12), pick(0, pieces.size() - 1);
  std::string s;
  for (std::size_t i = len(rng); i > 0; --i) s += pieces[pick(rng)];
  return s;
}

}  // namespace

TEST(Normalize, NaIsNullLike) { EXPECT_TRUE(normalize_affiliation("NA").null_like); }

TEST(Normalize, TrailingTabMarkerRemoved) {
  const auto n = normalize_affiliation("Dept. of CS, McGill University#TAB#");
  EXPECT_EQ(n.cleaned, "dept of cs, mcgill university");
  EXPECT_FALSE(n.null_like);
  EXPECT_EQ(n.segments, (std::vector<std::string>{"dept of cs", "mcgill university"}));
  EXPECT_EQ(n.tokens, (std::vector<std::string>{"dept", "of", "cs", "mcgill", "university"}));
}

TEST(Normalize, EmptyIsNullLike) {
  const auto n = normalize_affiliation("");
  EXPECT_TRUE(n.null_like);
  EXPECT_EQ(n.cleaned, "");
  EXPECT_TRUE(n.tokens.empty());
}

TEST(Normalize, NullSynonymsAnyCase) {
  for (const char* s : {"NA", "na", "N/A", "n/a", "NULL", "Null", "NONE", "none", "-", "  -  ", "#TAB#", "n.a."})
    EXPECT_TRUE(normalize_affiliation(s).null_like) << s;
  for (const char* s : {"NASA", "Nanjing", "N/A University", "None Such Lab", "nul"})
    EXPECT_FALSE(normalize_affiliation(s).null_like) << s;
}

TEST(Normalize, InteriorTabMarkerIsWordBreak) {
  EXPECT_EQ(normalize_text("Edinburgh#TAB#United Kingdom"), "edinburgh united kingdom");
  EXPECT_EQ(normalize_text("x#tab##TaB#y"), "x y");
}

TEST(Normalize, CommasDelimitSegments) {
  EXPECT_EQ(normalize_text(" ,a ,, b c ,"), "a, b c");
  EXPECT_EQ(normalize_text("Cambridge,MA"), "cambridge, ma");
}

TEST(Normalize, CompatibilityAndCaseFolding) {
  EXPECT_EQ(normalize_text("ＭＩＴ"), "mit");
  EXPECT_EQ(normalize_text("Technische Universität München"), "technische universität münchen");
  EXPECT_EQ(normalize_text("Straße"), "strasse");
  EXPECT_EQ(normalize_text("ﬁnland"), "finland");
  EXPECT_EQ(normalize_text("Université de Montréal"), "université de montréal");
  EXPECT_EQ(normalize_text("Tokyo，Japan"), "tokyo, japan");
}

TEST(Normalize, DecomposedAndComposedAgree) {
  EXPECT_EQ(normalize_text("Montréal"), normalize_text("Montréal"));
}

TEST(Normalize, InvalidUtf8DoesNotThrow) {
  const std::string bad = "abc\xff\xfe def";
  EXPECT_NO_THROW(normalize_affiliation(bad));
}

TEST(NormalizeProperty, AsciiMatchesOracle) {
  std::mt19937 rng(7);
  for (int i = 0; i < 5000; ++i) {
    const auto s = random_ascii(rng, 40);
    ASSERT_EQ(normalize_text(s), ascii_oracle(s)) << '"' << s << '"';
  }
}

TEST(NormalizeProperty, AsciiFastPathMatchesIcu) {
  std::mt19937 rng(11);
  for (int i = 0; i < 2000; ++i) {
    const auto s = random_ascii(rng, 30);
    ASSERT_EQ(ircm::detail::fold_case_compat(s), ircm::detail::icu_normalize(ircm::detail::nfkc_casefold(), s));
  }
}

TEST(NormalizeProperty, Idempotent) {
  std::mt19937 rng(3);
  for (int i = 0; i < 5000; ++i) {
    const auto s = i % 2 ? random_ascii(rng, 40) : random_unicode(rng);
    const auto once = normalize_affiliation(s);
    const auto twice = normalize_affiliation(once.cleaned);
    ASSERT_EQ(twice.cleaned, once.cleaned) << s;
    ASSERT_EQ(twice.segments, once.segments) << s;
    ASSERT_EQ(normalize_text(normalize_text(s)), normalize_text(s)) << s;
  }
}

TEST(NormalizeProperty, NullLikeOnlyForEmptyOrSynonym) {
  std::mt19937 rng(5);
  for (int i = 0; i < 5000; ++i) {
    const auto s = i % 2 ? random_ascii(rng, 12) : random_unicode(rng);
    const auto n = normalize_affiliation(s);
    const auto text = normalize_text(s);
    ASSERT_EQ(n.null_like, text.empty() || ircm::is_null_synonym(text)) << s;
    if (n.null_like) {
      ASSERT_TRUE(n.cleaned.empty());
      ASSERT_TRUE(n.tokens.empty());
    } else {
      ASSERT_EQ(n.cleaned, text);
    }
  }
}

TEST(NormalizeProperty, TokensDeriveFromSegments) {
  std::mt19937 rng(9);
  for (int i = 0; i < 2000; ++i) {
    const auto n = normalize_affiliation(random_ascii(rng, 40));
    std::string rejoined;
    for (const auto& seg : n.segments) rejoined += (rejoined.empty() ? "" : ", ") + seg;
    ASSERT_EQ(rejoined, n.cleaned);
    std::size_t words = 0;
    for (const auto& seg : n.segments) words += ircm::detail::split_tokens(seg).size();
    ASSERT_EQ(words, n.tokens.size());
  }
}

TEST(RawSegments, KeepCasingAndAlignWithSegments) {
  const auto segs = ircm::raw_segments("Dept. of CS,  McGill   University#TAB#, ,Montréal");
  ASSERT_EQ(segs.size(), 3u);
  EXPECT_EQ(segs[0].display, "Dept. of CS");
  EXPECT_EQ(segs[1].display, "McGill University");
  EXPECT_EQ(segs[1].key, "mcgill university");
  EXPECT_EQ(segs[2].display, "Montréal");
  const auto n = normalize_affiliation("Dept. of CS,  McGill   University#TAB#, ,Montréal");
  ASSERT_EQ(n.segments.size(), segs.size());
  for (std::size_t i = 0; i < segs.size(); ++i) EXPECT_EQ(segs[i].key, n.segments[i]);
}
