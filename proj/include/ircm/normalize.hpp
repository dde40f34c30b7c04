#pragma once

// Affiliation-string normalization.
//
// Pipeline (order matters, each step operates on the output of the previous):
//   1. Unicode NFKC with case folding (NFKC_Casefold)
//   2. removal of the literal "#tab#" marker left behind by broken exports
//   3. every code point that is not a letter, mark, digit or comma -> space
//   4. comma-separated segments are trimmed and whitespace-collapsed; empty
//      segments are dropped and the rest rejoined with ", "
//
// A result that is empty, or equal to one of the null synonyms
// (na, n/a, null, none, "-"), is null-like and has an empty `cleaned`.

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include "ircm/error.hpp"

namespace ircm {

struct NormalizedAffiliation {
  std::string cleaned;
  std::vector<std::string> tokens;
  std::vector<std::string> segments;
  bool null_like = false;
};

namespace detail {

inline bool is_ascii(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return static_cast<unsigned char>(c) < 0x80; });
}

inline const icu::Normalizer2& nfkc_casefold() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* n = icu::Normalizer2::getNFKCCasefoldInstance(status);
  if (U_FAILURE(status) || n == nullptr) throw Error("ICU NFKC_Casefold normalizer unavailable");
  return *n;
}

inline const icu::Normalizer2& nfkc() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* n = icu::Normalizer2::getNFKCInstance(status);
  if (U_FAILURE(status) || n == nullptr) throw Error("ICU NFKC normalizer unavailable");
  return *n;
}

inline std::string icu_normalize(const icu::Normalizer2& norm, std::string_view s) {
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
  UErrorCode status = U_ZERO_ERROR;
  icu::UnicodeString out = norm.normalize(u, status);
  if (U_FAILURE(status)) throw Error("Unicode normalization failed");
  std::string result;
  out.toUTF8String(result);
  return result;
}

inline std::string fold_case_compat(std::string_view s) {
  if (is_ascii(s)) {
    std::string out(s);
    for (char& c : out)
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
  }
  return icu_normalize(nfkc_casefold(), s);
}

inline std::string compat_only(std::string_view s) {
  if (is_ascii(s)) return std::string(s);
  return icu_normalize(nfkc(), s);
}

// Case-sensitive removal; callers pass already-folded text.
// The marker stands in for a lost tab, so it becomes a word break rather
// than vanishing ("Edinburgh#TAB#UK" must not fuse into one token).
inline void blank_all(std::string& s, std::string_view needle) {
  for (auto pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + 1))
    s.replace(pos, needle.size(), " ");
}

inline void blank_all_icase_ascii(std::string& s, std::string_view needle) {
  auto lower = [](char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; };
  auto from = s.begin();
  for (;;) {
    auto it = std::search(from, s.end(), needle.begin(), needle.end(),
                          [&](char a, char b) { return lower(a) == lower(b); });
    if (it == s.end()) return;
    const auto pos = static_cast<std::size_t>(it - s.begin());
    s.replace(pos, needle.size(), " ");
    from = s.begin() + static_cast<std::ptrdiff_t>(pos + 1);
  }
}

inline bool keeps_code_point(UChar32 c) {
  if (c < 0x80) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == ',';
  }
  switch (u_charType(c)) {
    case U_UPPERCASE_LETTER:
    case U_LOWERCASE_LETTER:
    case U_TITLECASE_LETTER:
    case U_MODIFIER_LETTER:
    case U_OTHER_LETTER:
    case U_NON_SPACING_MARK:
    case U_ENCLOSING_MARK:
    case U_COMBINING_SPACING_MARK:
    case U_DECIMAL_DIGIT_NUMBER:
    case U_LETTER_NUMBER:
    case U_OTHER_NUMBER:
      return true;
    default:
      return false;
  }
}

// Replaces dropped code points by a single ASCII space.
inline std::string strip_punctuation(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  const auto* bytes = reinterpret_cast<const uint8_t*>(s.data());
  const auto len = static_cast<int32_t>(s.size());
  int32_t i = 0;
  while (i < len) {
    const int32_t start = i;
    UChar32 c;
    U8_NEXT(bytes, i, len, c);
    if (c >= 0 && keeps_code_point(c))
      out.append(s.substr(static_cast<std::size_t>(start), static_cast<std::size_t>(i - start)));
    else
      out.push_back(' ');
  }
  return out;
}

inline std::string collapse_spaces(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending = false;
  for (char c : s) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
      pending = !out.empty();
      continue;
    }
    if (pending) out.push_back(' ');
    pending = false;
    out.push_back(c);
  }
  return out;
}

inline std::vector<std::string> split_segments(std::string_view s) {
  std::vector<std::string> segs;
  std::size_t start = 0;
  for (;;) {
    const auto comma = s.find(',', start);
    const auto piece = s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    std::string seg = collapse_spaces(piece);
    if (!seg.empty()) segs.push_back(std::move(seg));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return segs;
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out.append(sep);
    out.append(parts[i]);
  }
  return out;
}

inline std::vector<std::string> split_tokens(std::string_view segment) {
  std::vector<std::string> toks;
  std::size_t start = 0;
  while (start < segment.size()) {
    auto sp = segment.find(' ', start);
    if (sp == std::string_view::npos) sp = segment.size();
    if (sp > start) toks.emplace_back(segment.substr(start, sp - start));
    start = sp + 1;
  }
  return toks;
}

inline constexpr std::array<std::string_view, 4> kNullSynonyms = {"na", "n a", "null", "none"};

}  // namespace detail

inline constexpr std::string_view kTabMarker = "#tab#";

/// Cleans a string without null-like detection. Used for gazetteer aliases,
/// FOS terms and Wikidata labels so they compare equal to affiliation text.
inline std::string normalize_text(std::string_view raw) {
  std::string folded = detail::fold_case_compat(raw);
  detail::blank_all(folded, kTabMarker);
  const std::string stripped = detail::strip_punctuation(folded);
  return detail::join(detail::split_segments(stripped), ", ");
}

inline bool is_null_synonym(std::string_view cleaned) {
  return std::find(detail::kNullSynonyms.begin(), detail::kNullSynonyms.end(), cleaned) !=
         detail::kNullSynonyms.end();
}

inline NormalizedAffiliation normalize_affiliation(std::string_view raw) {
  NormalizedAffiliation n;
  std::string cleaned = normalize_text(raw);
  if (cleaned.empty() || is_null_synonym(cleaned)) {
    n.null_like = true;
    return n;
  }
  n.segments = detail::split_segments(cleaned);
  for (const auto& seg : n.segments) {
    auto toks = detail::split_tokens(seg);
    n.tokens.insert(n.tokens.end(), std::make_move_iterator(toks.begin()), std::make_move_iterator(toks.end()));
  }
  n.cleaned = std::move(cleaned);
  return n;
}

/// One comma-separated piece of a raw affiliation, in two forms: `display`
/// keeps the source casing and punctuation (compatibility-normalized,
/// whitespace-collapsed, "#TAB#" blanked) and `key` is its normalized text.
struct RawSegment {
  std::string display;
  std::string key;
};

/// Raw segments in source order. Entries with an empty key are omitted, so
/// keys line up one-to-one with NormalizedAffiliation::segments.
inline std::vector<RawSegment> raw_segments(std::string_view raw) {
  std::string compat = detail::compat_only(raw);
  detail::blank_all_icase_ascii(compat, kTabMarker);
  std::vector<RawSegment> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = compat.find(',', start);
    const auto piece = std::string_view(compat).substr(
        start, comma == std::string::npos ? std::string_view::npos : comma - start);
    std::string key = normalize_text(piece);
    if (!key.empty()) out.push_back({detail::collapse_spaces(piece), std::move(key)});
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace ircm
