// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 The adgate Authors

#ifndef ADGATE_PIPELINE_NUMERIC_HPP
#define ADGATE_PIPELINE_NUMERIC_HPP

#include <array>
#include <cstddef>
#include <vector>

#include "core/features.hpp"
#include "core/model_io.hpp"
#include "core/sentiment.hpp"
#include "core/textprep.hpp"
#include "records.hpp"

namespace adgate::pipeline {

/// Raw numeric columns: likes, dislikes, views, subscribers, sentiment,
/// video-level block, frame-level block.
inline constexpr std::size_t kCountColumns = 4;
inline constexpr std::size_t kSentimentColumn = 4;
inline constexpr std::size_t kRawNumericColumns = 5 + kVideoLevelDims + kFrameLevelDims;

/// Presence flags appended after the PCA projection.
enum NumericFlag : std::size_t { kNoComments, kVideoLevelMissing, kFrameLevelMissing, kThumbnailMissing, kFlagCount };

struct RawNumeric {
  std::vector<double> values;  // kRawNumericColumns
  std::vector<std::uint8_t> missing;
  std::array<double, kFlagCount> flags{};
  sentiment::SentimentScore sentiment;
};

/// Builds the raw row. thumbnail_present tells whether a thumbnail decoded.
RawNumeric raw_numeric(const VideoRecord &record, const sentiment::BnbModel &bnb,
                       const textprep::StopwordList &stops, bool thumbnail_present);

/**
 * impute -> winsorize -> Box-Cox -> standardize -> PCA, fitted on training
 * rows. Box-Cox is skipped for columns that are constant after winsorizing.
 * PCA scores are divided by the leading component's standard deviation so
 * the network sees unit-scale inputs while relative magnitudes survive.
 */
struct NumericPipeline {
  features::ImputeModel impute;
  features::WinsorBounds winsor;
  std::vector<features::BoxCoxParams> boxcox;
  std::vector<std::uint8_t> boxcox_skipped;
  features::StandardizeModel standardize;
  features::PcaModel pca;

  /// Length of the vector produced by apply: PCA k plus the flags.
  std::size_t output_dim() const noexcept { return pca.k + kFlagCount; }
  double score_scale() const;
};

/// k is clamped to min(k, rows, columns).
NumericPipeline fit_numeric(const std::vector<RawNumeric> &rows, std::size_t k);
std::vector<double> apply_numeric(const RawNumeric &row, const NumericPipeline &p);

io::Json encode(const NumericPipeline &p);
NumericPipeline decode_numeric(const io::Json &doc);

}  // namespace adgate::pipeline

#endif  // ADGATE_PIPELINE_NUMERIC_HPP
