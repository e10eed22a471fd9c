// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 The adgate Authors

#ifndef ADGATE_CORE_SENTIMENT_HPP
#define ADGATE_CORE_SENTIMENT_HPP

#include <array>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "textprep.hpp"
#include "tokens.hpp"

namespace adgate::sentiment {

inline constexpr int kDecent = 0;
inline constexpr int kHarsh = 1;
inline constexpr std::size_t kCommentsPerVideo = 20;

struct LabeledComment {
  Tokens tokens;
  int label = kDecent;
};

/// Bernoulli naive Bayes with Laplace smoothing. Class 1 is "harsh".
struct BnbModel {
  std::map<std::string, std::size_t, std::less<>> vocabulary;
  std::array<double, 2> log_prior{};
  std::array<std::vector<double>, 2> log_prob_present;
  std::array<std::vector<double>, 2> log_prob_absent;

  std::size_t vocab_size() const noexcept { return vocabulary.size(); }
};

/// P(present | c) = (docs of c containing term + 1) / (docs of c + 2).
/// Throws SingleClass unless both classes occur.
BnbModel train_bnb(std::span<const LabeledComment> corpus);

/// P(harsh | comment) with every vocabulary term contributing its present or
/// absent likelihood; tokens outside the vocabulary are ignored.
double bnb_posterior(std::span<const std::string> comment, const BnbModel &model);

struct SentimentScore {
  double value = 0.5;
  std::size_t n_comments_used = 0;
  bool prior_only = true;
};

/// Mean posterior over the first min(20, n) comments in stored order.
SentimentScore video_sentiment(std::span<const Tokens> comments, const BnbModel &model);

struct RawComment {
  int label;
  std::string text;
};

/// "<0|1>\t<comment text>" per line; blank and '#' lines skipped. Throws MalformedLine.
std::vector<RawComment> parse_corpus(std::string_view content);

/// Runs every comment through textprep::prepare_text.
std::vector<LabeledComment> prepare_corpus(std::span<const RawComment> raw,
                                           const textprep::StopwordList &stops);

/// The synthetic corpus shipped in data/sentiment_corpus.tsv.
std::string_view bundled_corpus();

}  // namespace adgate::sentiment

#endif  // ADGATE_CORE_SENTIMENT_HPP
