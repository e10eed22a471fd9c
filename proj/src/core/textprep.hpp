// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 The adgate Authors

#ifndef ADGATE_CORE_TEXTPREP_HPP
#define ADGATE_CORE_TEXTPREP_HPP

#include <array>
#include <cstddef>
#include <set>
#include <span>
#include <string>
#include <string_view>

#include "tokens.hpp"

namespace adgate::textprep {

/// Unicode simple case folding of a UTF-8 string. Invalid sequences become U+FFFD.
std::string fold_case(std::string_view utf8);

/**
 * Replaces every code point that is not alphabetic, a decimal digit, an
 * apostrophe or whitespace with a single space, and case folds the rest.
 * Whitespace is emitted as ' '; the typographic apostrophe U+2019 as '\''.
 */
std::string strip_special(std::string_view text);

/// Splits on runs of ASCII whitespace, dropping empty fragments.
Tokens tokenize(std::string_view text);

class StopwordList {
 public:
  StopwordList() = default;

  /// One word per line, '#' comment lines ignored; words are case folded.
  static StopwordList parse(std::string_view content, std::string origin);

  /// The bundled Onix list (see data/onix_stopwords.txt).
  static const StopwordList &bundled();

  bool contains(std::string_view word) const { return words_.find(word) != words_.end(); }
  std::size_t size() const noexcept { return words_.size(); }
  const std::string &origin() const noexcept { return origin_; }

 private:
  std::set<std::string, std::less<>> words_;
  std::string origin_;
};

Tokens remove_stopwords(std::span<const std::string> tokens, const StopwordList &stops);

/**
 * One pass of the Porter suffix-stripping stemmer. Tokens that are not purely
 * ASCII a-z are returned unchanged, as are tokens of length <= 2.
 */
std::string porter_stem(std::string_view token);

/// porter_stem applied until the word stops changing; idempotent.
std::string stem(std::string_view token);

/**
 * Single-field pipeline: strip_special -> tokenize -> remove_stopwords ->
 * stem. Stems that land on a stopword are dropped as well, which keeps the
 * pipeline idempotent on its own output.
 */
Tokens prepare_text(std::string_view text, const StopwordList &stops);

inline constexpr std::size_t kFieldCount = 3;
enum Field : std::size_t { kTitle = 0, kSubtitle = 1, kDescription = 2 };

struct PreparedDocument {
  Tokens merged;  // title ++ subtitle ++ description
  std::array<Tokens, kFieldCount> fields;
};

PreparedDocument prepare_document(std::string_view title, std::string_view subtitle,
                                  std::string_view description, const StopwordList &stops);

std::string join(std::span<const std::string> tokens);

}  // namespace adgate::textprep

#endif  // ADGATE_CORE_TEXTPREP_HPP
