// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 The adgate Authors

#ifndef ADGATE_PIPELINE_SCORING_HPP
#define ADGATE_PIPELINE_SCORING_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "training.hpp"

namespace adgate::pipeline {

inline constexpr std::size_t kTopTerms = 20;

struct VideoVerdict {
  std::string video_id;
  lexicon::Verdict verdict = lexicon::Verdict::NonOffensive;  // ensemble argmax
  double probability = 0.0;                                    // P(offensive)
  lexicon::Label lexicon_label;                                // ratio and lexicon verdict
  sentiment::SentimentScore sentiment;
};

struct TermCount {
  std::string term;
  std::size_t count = 0;
};

struct ChannelStats {
  std::optional<double> likes_dislikes_ratio;  // empty when dislikes total 0
  std::uint64_t total_likes = 0;
  std::uint64_t total_dislikes = 0;
  std::uint64_t total_views = 0;
  std::uint64_t total_subscribers = 0;  // largest value reported by any video
  std::string max_threat_video;
  double max_threat_probability = 0.0;
  std::string min_threat_video;
  double min_threat_probability = 0.0;
  std::vector<TermCount> top_terms;  // matches in flagged videos only
  std::size_t total_matches = 0;     // matches across all of the channel's videos
};

struct ChannelReport {
  std::string channel_id;
  std::size_t n_videos = 0;
  std::size_t flagged = 0;
  double threat_percentage = 0.0;  // 100 * flagged / n_videos
  std::vector<VideoVerdict> videos;
  ChannelStats stats;
};

/// Throws EmptyChannel when videos is empty.
ChannelReport score_channel(std::string_view channel_id, std::span<const VideoRecord> videos,
                            const DataSource &source, const Artifacts &artifacts, const MatchingLexicon &lex,
                            double threshold);

io::Json stats_json(const ChannelStats &stats);
io::Json channel_report_json(const ChannelReport &report);

using ProgressFn = std::function<void(std::size_t channels_done)>;

/**
 * Scores each channel independently. A channel that cannot be scored is
 * listed under "errors" and does not affect the others. Output:
 *   {threshold, model_version, channels: [...], errors: [{channel_id, error}]}
 */
io::Json score_channels(const DataSource &source, const Artifacts &artifacts, const MatchingLexicon &lex,
                        std::span<const std::string> channel_ids, double threshold, const ProgressFn &progress = {});

/// Stable text form of a report document.
std::string report_text(const io::Json &report);

}  // namespace adgate::pipeline

#endif  // ADGATE_PIPELINE_SCORING_HPP
