// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 The adgate Authors

#include "sentiment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "error.hpp"

namespace adgate::bundled {
extern const std::string_view sentiment_corpus;
}

namespace adgate::sentiment {

BnbModel train_bnb(std::span<const LabeledComment> corpus) {
  std::array<std::size_t, 2> class_docs{0, 0};
  std::map<std::string, std::array<std::size_t, 2>, std::less<>> term_docs;
  for (const auto &doc : corpus) {
    if (doc.label != kDecent && doc.label != kHarsh) {
      throw Error(ErrorCode::InvalidArgument, "class label must be 0 or 1");
    }
    const auto c = static_cast<std::size_t>(doc.label);
    ++class_docs[c];
    for (const auto &t : std::set<std::string>(doc.tokens.begin(), doc.tokens.end())) ++term_docs[t][c];
  }
  if (class_docs[0] == 0 || class_docs[1] == 0) {
    throw Error(ErrorCode::SingleClass, "sentiment corpus must contain both classes");
  }

  BnbModel m;
  const double total = static_cast<double>(class_docs[0] + class_docs[1]);
  for (std::size_t c = 0; c < 2; ++c) {
    m.log_prior[c] = std::log(static_cast<double>(class_docs[c]) / total);
    m.log_prob_present[c].reserve(term_docs.size());
    m.log_prob_absent[c].reserve(term_docs.size());
  }
  for (const auto &[term, counts] : term_docs) {
    m.vocabulary.emplace(term, m.vocabulary.size());
    for (std::size_t c = 0; c < 2; ++c) {
      const double p = (static_cast<double>(counts[c]) + 1.0) / (static_cast<double>(class_docs[c]) + 2.0);
      m.log_prob_present[c].push_back(std::log(p));
      m.log_prob_absent[c].push_back(std::log1p(-p));
    }
  }
  return m;
}

double bnb_posterior(std::span<const std::string> comment, const BnbModel &model) {
  std::vector<bool> present(model.vocab_size(), false);
  for (const auto &t : comment) {
    auto it = model.vocabulary.find(t);
    if (it != model.vocabulary.end()) present[it->second] = true;
  }
  std::array<double, 2> joint{};
  for (std::size_t c = 0; c < 2; ++c) {
    double s = model.log_prior[c];
    for (std::size_t i = 0; i < present.size(); ++i) {
      s += present[i] ? model.log_prob_present[c][i] : model.log_prob_absent[c][i];
    }
    joint[c] = s;
  }
  const double top = std::max(joint[0], joint[1]);
  const double e0 = std::exp(joint[0] - top);
  const double e1 = std::exp(joint[1] - top);
  const double p = e1 / (e0 + e1);
  // Smoothed likelihoods never yield certainty; keep that true in floating point.
  return std::clamp(p, std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
}

SentimentScore video_sentiment(std::span<const Tokens> comments, const BnbModel &model) {
  SentimentScore s;
  const auto n = std::min(comments.size(), kCommentsPerVideo);
  if (n == 0) return s;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += bnb_posterior(comments[i], model);
  s.value = sum / static_cast<double>(n);
  s.n_comments_used = n;
  s.prior_only = false;
  return s;
}

std::vector<RawComment> parse_corpus(std::string_view content) {
  std::vector<RawComment> out;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < content.size()) {
    auto end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    auto line = content.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos || line.starts_with('#')) continue;
    if (line.size() < 2 || (line[0] != '0' && line[0] != '1') || line[1] != '\t') {
      throw Error(ErrorCode::MalformedLine,
                  "line " + std::to_string(line_no) + ": expected '<0|1><TAB><text>'");
    }
    out.push_back({line[0] - '0', std::string(line.substr(2))});
  }
  if (out.empty()) throw Error(ErrorCode::EmptyCorpus, "sentiment corpus has no records");
  return out;
}

std::vector<LabeledComment> prepare_corpus(std::span<const RawComment> raw,
                                           const textprep::StopwordList &stops) {
  std::vector<LabeledComment> out;
  out.reserve(raw.size());
  for (const auto &r : raw) out.push_back({textprep::prepare_text(r.text, stops), r.label});
  return out;
}

std::string_view bundled_corpus() { return bundled::sentiment_corpus; }

}  // namespace adgate::sentiment
