// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 The adgate Authors

#ifndef ADGATE_CORE_LEXICON_HPP
#define ADGATE_CORE_LEXICON_HPP

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tokens.hpp"

namespace adgate::lexicon {

inline constexpr std::size_t kMaxPhraseTokens = 8;
inline constexpr double kDefaultThreshold = 0.02;

class PhraseMatcher;

/**
 * A set of offensive phrases, each a sequence of 1..8 normalized tokens.
 *
 * Phrase ids are positions in phrases(), in first-seen order. The lexicon is
 * immutable once built, and the multi-pattern matcher is constructed eagerly
 * so a lexicon can be shared across threads without synchronization.
 */
class OffensiveLexicon {
 public:
  /// Throws EmptyLexicon when no phrase survives, PhraseTooLong past 8 tokens.
  /// Empty phrases are skipped and duplicates dropped.
  static OffensiveLexicon from_phrases(std::vector<Tokens> phrases,
                                       std::size_t source_line_count = 0);

  const std::vector<Tokens> &phrases() const noexcept { return phrases_; }
  std::size_t size() const noexcept { return phrases_.size(); }
  std::size_t source_line_count() const noexcept { return source_line_count_; }

  /// Phrase tokens joined with a single space.
  std::string phrase_text(std::size_t phrase_id) const;
  bool contains(const Tokens &phrase) const;

  /// One phrase per line, LF terminated; parse_lexicon() reads it back.
  std::string to_text() const;

  const PhraseMatcher &matcher() const noexcept { return *matcher_; }

 private:
  OffensiveLexicon() = default;

  std::vector<Tokens> phrases_;
  std::size_t source_line_count_ = 0;
  std::shared_ptr<const PhraseMatcher> matcher_;
};

struct Match {
  std::size_t start;
  std::size_t length;
  std::size_t phrase_id;

  friend bool operator==(const Match &, const Match &) = default;
  friend auto operator<=>(const Match &, const Match &) = default;
};

/// Sorted by (start, length, phrase_id).
using MatchSet = std::vector<Match>;

/// Aho-Corasick automaton over whole tokens.
class PhraseMatcher {
 public:
  explicit PhraseMatcher(const std::vector<Tokens> &phrases);

  MatchSet find_all(std::span<const std::string> tokens) const;

 private:
  struct Node {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> next;  // sorted by symbol
    std::uint32_t fail = 0;
    std::uint32_t dict = 0;  // nearest proper suffix node that ends a phrase
    std::int64_t phrase = -1;
    std::uint32_t depth = 0;
  };

  std::int64_t symbol(std::string_view token) const;
  std::int64_t child(std::uint32_t node, std::uint32_t sym) const;

  std::vector<Node> nodes_;
  std::vector<std::pair<std::string, std::uint32_t>> symbols_;  // sorted by token
};

/**
 * Parses a lexicon file: one phrase per line, '#' comment lines and blank
 * lines ignored, LF or CRLF endings. Phrases are case folded, trimmed and
 * have internal whitespace runs collapsed.
 */
OffensiveLexicon parse_lexicon(std::string_view content);

MatchSet match_phrases(std::span<const std::string> tokens,
                       const OffensiveLexicon &lex);

struct Coverage {
  double ratio = 0.0;
  bool insufficient_text = false;
  std::size_t covered = 0;
  std::size_t total = 0;
};

/// Fraction of token positions covered by at least one match.
Coverage offensiveness_ratio(std::span<const std::string> tokens,
                             const OffensiveLexicon &lex);

enum class Verdict { NonOffensive, Offensive };

struct Label {
  Verdict value = Verdict::NonOffensive;
  double ratio = 0.0;
  bool insufficient_text = false;
};

/// Offensive iff ratio > threshold and the text was not empty.
Label label(double ratio, double threshold, bool insufficient_text);

std::string_view verdict_name(Verdict v) noexcept;

}  // namespace adgate::lexicon

#endif  // ADGATE_CORE_LEXICON_HPP
