// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 The adgate Authors

#include "numeric.hpp"

#include <algorithm>
#include <cmath>

#include "core/error.hpp"

namespace adgate::pipeline {

namespace {

features::FeatureMatrix to_matrix(const std::vector<RawNumeric> &rows) {
  features::FeatureMatrix m;
  m.rows = rows.size();
  m.cols = kRawNumericColumns;
  m.data.reserve(m.rows * m.cols);
  m.missing.reserve(m.rows * m.cols);
  for (const auto &r : rows) {
    m.data.insert(m.data.end(), r.values.begin(), r.values.end());
    m.missing.insert(m.missing.end(), r.missing.begin(), r.missing.end());
  }
  return m;
}

void apply_boxcox(features::FeatureMatrix &m, const NumericPipeline &p) {
  for (std::size_t c = 0; c < m.cols; ++c) {
    if (p.boxcox_skipped[c]) continue;
    const auto col = features::boxcox_apply(m.column(c), p.boxcox[c]);
    for (std::size_t r = 0; r < m.rows; ++r) m.at(r, c) = col[r];
  }
}

}  // namespace

RawNumeric raw_numeric(const VideoRecord &record, const sentiment::BnbModel &bnb,
                       const textprep::StopwordList &stops, bool thumbnail_present) {
  RawNumeric r;
  r.values.assign(kRawNumericColumns, 0.0);
  r.missing.assign(kRawNumericColumns, 0);
  const std::array<const std::optional<std::uint64_t> *, kCountColumns> counts{&record.likes, &record.dislikes,
                                                                              &record.views, &record.subscribers};
  for (std::size_t c = 0; c < kCountColumns; ++c) {
    if (*counts[c]) {
      r.values[c] = static_cast<double>(**counts[c]);
    } else {
      r.missing[c] = 1;
    }
  }
  std::vector<Tokens> comments;
  const auto used = std::min(record.comments.size(), sentiment::kCommentsPerVideo);
  for (std::size_t i = 0; i < used; ++i) comments.push_back(textprep::prepare_text(record.comments[i], stops));
  r.sentiment = sentiment::video_sentiment(comments, bnb);
  r.values[kSentimentColumn] = r.sentiment.value;
  if (record.video_level) {
    std::copy(record.video_level->begin(), record.video_level->end(), r.values.begin() + 5);
  }
  if (record.frame_level) {
    std::copy(record.frame_level->begin(), record.frame_level->end(), r.values.begin() + 5 + kVideoLevelDims);
  }
  r.flags[kNoComments] = record.comments.empty() ? 1.0 : 0.0;
  r.flags[kVideoLevelMissing] = record.video_level ? 0.0 : 1.0;
  r.flags[kFrameLevelMissing] = record.frame_level ? 0.0 : 1.0;
  r.flags[kThumbnailMissing] = thumbnail_present ? 0.0 : 1.0;
  return r;
}

NumericPipeline fit_numeric(const std::vector<RawNumeric> &rows, std::size_t k) {
  if (rows.size() < 3) throw Error(ErrorCode::InvalidArgument, "numeric pipeline needs at least 3 rows");
  NumericPipeline p;
  auto m = to_matrix(rows);
  p.impute = features::fit_impute(m);
  m = features::apply_impute(m, p.impute);
  p.winsor = features::fit_winsor(m);
  m = features::apply_winsor(m, p.winsor);
  p.boxcox.assign(m.cols, {});
  p.boxcox_skipped.assign(m.cols, 0);
  for (std::size_t c = 0; c < m.cols; ++c) {
    try {
      p.boxcox[c] = features::boxcox_fit(m.column(c), c < kCountColumns ? 1.0 : 0.0);
    } catch (const Error &e) {
      if (e.code() != ErrorCode::DegenerateColumn) throw;
      p.boxcox_skipped[c] = 1;
    }
  }
  apply_boxcox(m, p);
  auto st = features::standardize(m);
  p.standardize = std::move(st.model);
  p.pca = features::pca_fit(st.matrix, std::min({k, st.matrix.rows, st.matrix.cols}));
  return p;
}

std::vector<double> apply_numeric(const RawNumeric &row, const NumericPipeline &p) {
  auto m = to_matrix({row});
  m = features::apply_impute(m, p.impute);
  m = features::apply_winsor(m, p.winsor);
  apply_boxcox(m, p);
  m = features::apply_standardize(m, p.standardize);
  auto out = features::pca_project_row(m.data, p.pca);
  const double scale = p.score_scale();
  for (auto &x : out) x *= scale;
  out.insert(out.end(), row.flags.begin(), row.flags.end());
  return out;
}

double NumericPipeline::score_scale() const {
  if (pca.explained_variance.empty() || !(pca.explained_variance[0] > 0.0)) return 1.0;
  return 1.0 / std::sqrt(pca.explained_variance[0]);
}

io::Json encode(const NumericPipeline &p) {
  io::Json j = io::header("numeric");
  j["impute"] = io::encode(p.impute);
  j["winsor"] = io::encode(p.winsor);
  io::Json bc = io::Json::array();
  for (std::size_t c = 0; c < p.boxcox.size(); ++c) {
    bc.push_back(p.boxcox_skipped[c] ? io::Json(nullptr) : io::encode(p.boxcox[c]));
  }
  j["boxcox"] = std::move(bc);
  j["standardize"] = io::encode(p.standardize);
  j["pca"] = io::encode(p.pca);
  return j;
}

NumericPipeline decode_numeric(const io::Json &doc) {
  io::check_header(doc, "numeric");
  NumericPipeline p;
  try {
    p.impute = io::decode_impute(doc.at("impute"));
    p.winsor = io::decode_winsor(doc.at("winsor"));
    for (const auto &b : doc.at("boxcox")) {
      p.boxcox_skipped.push_back(b.is_null() ? 1 : 0);
      p.boxcox.push_back(b.is_null() ? features::BoxCoxParams{} : io::decode_boxcox(b));
    }
    p.standardize = io::decode_standardize(doc.at("standardize"));
    p.pca = io::decode_pca(doc.at("pca"));
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorCode::Format, std::string("numeric pipeline: ") + e.what());
  }
  const auto n = kRawNumericColumns;
  if (p.impute.medians.size() != n || p.winsor.lower.size() != n || p.boxcox.size() != n ||
      p.standardize.means.size() != n || p.pca.dims != n) {
    throw Error(ErrorCode::Format, "numeric pipeline column counts are inconsistent");
  }
  return p;
}

}  // namespace adgate::pipeline
