// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 The adgate Authors

#ifndef ADGATE_CORE_MODEL_IO_HPP
#define ADGATE_CORE_MODEL_IO_HPP

#include <cstdint>
#include <string>
#include <string_view>

#include <json.hpp>

#include "ensemble.hpp"
#include "features.hpp"
#include "logistic.hpp"
#include "sentiment.hpp"
#include "vectorize.hpp"

// JSON codecs for fitted models. Every document starts with
// {"format": "adgate-<kind>", "version": 1}. Reals are written in shortest
// round-trip decimal form, so decode(encode(m)) == m bit for bit. Decoders
// throw Error(Format) on anything unexpected.
namespace adgate::io {

using Json = nlohmann::ordered_json;

inline constexpr int kArtifactVersion = 1;

Json header(std::string_view kind);
void check_header(const Json &doc, std::string_view kind);

Json encode(const vectorize::TfIdfModel &m);
vectorize::TfIdfModel decode_tfidf(const Json &doc);

Json encode(const sentiment::BnbModel &m);
sentiment::BnbModel decode_bnb(const Json &doc);

Json encode(const models::LogisticModel &m);
models::LogisticModel decode_logistic(const Json &doc);

Json encode_config(const models::EnsembleConfig &c);
models::EnsembleConfig decode_config(const Json &doc);

/// The "adgate-model" document: config, seed and every named tensor.
Json encode(const models::EnsembleModel &m, std::uint64_t seed);
struct LoadedEnsemble {
  models::EnsembleModel model;
  std::uint64_t seed = 0;
};
LoadedEnsemble decode_ensemble(const Json &doc);

Json encode(const features::ImputeModel &m);
features::ImputeModel decode_impute(const Json &j);
Json encode(const features::WinsorBounds &m);
features::WinsorBounds decode_winsor(const Json &j);
Json encode(const features::BoxCoxParams &m);
features::BoxCoxParams decode_boxcox(const Json &j);
Json encode(const features::StandardizeModel &m);
features::StandardizeModel decode_standardize(const Json &j);
Json encode(const features::PcaModel &m);
features::PcaModel decode_pca(const Json &j);

/// Array of finite reals. Throws InvalidArgument on NaN or infinity.
Json real_array(std::span<const double> values);
std::vector<double> read_reals(const Json &j, std::string_view what);

Json parse_json(std::string_view text, std::string_view what);

/// Non-negative integer, whether stored signed or unsigned.
inline bool is_count(const Json &j) {
  return j.is_number_unsigned() || (j.is_number_integer() && j.get<std::int64_t>() >= 0);
}

}  // namespace adgate::io

#endif  // ADGATE_CORE_MODEL_IO_HPP
