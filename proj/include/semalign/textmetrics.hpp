#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "semalign/hash.hpp"

namespace semalign {

/**
 * Deterministic text metrics for the benchmark. All heuristics are pinned
 * here and documented in the README; traces produced with them are
 * internally consistent but not byte-comparable to traces produced with
 * other tokenizer/sentence conventions.
 *
 *  - words: maximal runs of characters that are alphanumeric, apostrophe,
 *    or hyphen (bytes >= 0x80 count as word characters so UTF-8 sequences
 *    stay intact); everything else separates.
 *  - sentences: split at '.', '!' or '?' followed by whitespace or end of
 *    text; empty segments are discarded after trimming; a trailing
 *    unterminated segment counts as a sentence.
 *  - hash64: FNV-1a over UTF-8 bytes.
 */

inline bool is_word_char(unsigned char c) {
  return std::isalnum(c) || c == '\'' || c == '-' || c >= 0x80;
}

inline std::vector<std::string> words(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char c : text) {
    if (is_word_char(c)) {
      cur.push_back(static_cast<char>(c));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    cur.push_back(c);
    const bool terminator = c == '.' || c == '!' || c == '?';
    const bool boundary =
        terminator && (i + 1 == text.size() ||
                       std::isspace(static_cast<unsigned char>(text[i + 1])));
    if (boundary) {
      std::string t = trim(cur);
      if (!t.empty()) out.push_back(std::move(t));
      cur.clear();
    }
  }
  std::string t = trim(cur);
  if (!t.empty()) out.push_back(std::move(t));
  return out;
}

inline std::uint64_t hash64(std::string_view text) { return fnv1a64(text); }

inline const std::set<std::string>& pronoun_blocklist() {
  static const std::set<std::string> list{
      "i",    "me",   "my",    "mine", "we",   "us",    "our",  "ours",
      "you",  "your", "yours", "he",   "him",  "his",   "she",  "her",
      "hers", "it",   "its",   "they", "them", "their", "theirs"};
  return list;
}

/// Marker the toy backend keys its concentration behaviour on; the
/// standard Central Context prompt contains it.
inline constexpr std::string_view kCentralContextMarker = "CENTRAL CONTEXT";

/// The anchor prompt plus its machine-checkable constraint checklist:
/// (i) exactly two sentences, (ii) every sentence begins with the literal
/// prefix, (iii) at most word_limit words, (iv) no blocklisted pronoun.
struct CentralContext {
  std::string prompt;
  int word_limit = 24;
  std::string sentence_prefix = "Therefore,";

  static CentralContext standard() {
    return CentralContext{
        "CENTRAL CONTEXT: Output exactly two sentences. Each sentence must "
        "begin with \"Therefore,\". Use present tense. Use at most 24 words "
        "in total. Do not use personal pronouns."};
  }
};

/// Per-check results in checklist order (i)-(iv).
inline std::array<bool, 4> compliance_checks(std::string_view text,
                                             const CentralContext& ctx) {
  const std::vector<std::string> sentences = split_sentences(text);
  const std::vector<std::string> toks = words(text);

  const bool two_sentences = sentences.size() == 2;

  bool prefixed = !sentences.empty();
  for (const std::string& s : sentences)
    if (s.rfind(ctx.sentence_prefix, 0) != 0) prefixed = false;

  const bool within_limit =
      toks.size() <= static_cast<std::size_t>(ctx.word_limit);

  bool no_pronouns = true;
  for (const std::string& w : toks)
    if (pronoun_blocklist().count(to_lower(w))) no_pronouns = false;

  return {two_sentences, prefixed, within_limit, no_pronouns};
}

/// Fraction of the four checks satisfied; total over any input (the empty
/// text fails (i) and (ii) and vacuously passes (iii) and (iv), giving 0.5).
inline double compliance_score(std::string_view text, const CentralContext& ctx) {
  const auto checks = compliance_checks(text, ctx);
  int sat = 0;
  for (bool ok : checks) sat += ok ? 1 : 0;
  return static_cast<double>(sat) / 4.0;
}

/// Word-level Jaccard similarity over lowercased word sets; two empty
/// texts are identical by convention (1.0).
inline double jaccard_similarity(std::string_view a, std::string_view b) {
  std::set<std::string> wa, wb;
  for (const std::string& w : words(a)) wa.insert(to_lower(w));
  for (const std::string& w : words(b)) wb.insert(to_lower(w));
  if (wa.empty() && wb.empty()) return 1.0;
  std::size_t inter = 0;
  for (const std::string& w : wa) inter += wb.count(w);
  const std::size_t uni = wa.size() + wb.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

/// 1 - (distinct hash64 values) / N over the final outputs.
inline double collision_rate(const std::vector<std::string>& finals) {
  if (finals.empty()) throw std::invalid_argument("collision_rate of empty list");
  std::set<std::uint64_t> unique;
  for (const std::string& t : finals) unique.insert(hash64(t));
  return 1.0 - static_cast<double>(unique.size()) /
                   static_cast<double>(finals.size());
}

}  // namespace semalign
