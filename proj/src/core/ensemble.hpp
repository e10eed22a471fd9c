// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 The adgate Authors

#ifndef ADGATE_CORE_ENSEMBLE_HPP
#define ADGATE_CORE_ENSEMBLE_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tensor.hpp"
#include "textprep.hpp"
#include "vectorize.hpp"

namespace adgate::models {

inline constexpr std::size_t kClassCount = 2;

struct EnsembleConfig {
  std::size_t embed_dim = 50;
  std::size_t gru_hidden = 32;
  std::size_t attention_dim = 32;
  std::array<std::size_t, textprep::kFieldCount> field_lengths{200, 200, 200};
  std::size_t image_side = 25;
  std::vector<std::size_t> cnn_filters{8, 16};
  std::size_t cnn_kernel = 3;
  std::size_t cnn_pool = 2;
  std::size_t image_hidden = 32;
  std::size_t numeric_dim = 104;
  std::size_t numeric_hidden = 64;
  std::size_t merge_hidden = 64;

  /// Throws InvalidArgument when an extent is zero or the CNN stack shrinks
  /// the image below one pixel.
  void validate() const;
  /// Length of the flattened CNN output feeding the image dense layer.
  std::size_t cnn_flat_size() const;

  friend bool operator==(const EnsembleConfig &, const EnsembleConfig &) = default;
};

/// Per-video model input.
struct FeatureBundle {
  std::array<vectorize::DocMatrix, textprep::kFieldCount> fields;
  std::vector<double> numeric;
  std::vector<double> image;  // image_side * image_side
};

/// Throws ShapeMismatch when the bundle does not fit the configuration.
void check_bundle(const FeatureBundle &bundle, const EnsembleConfig &config);

struct Parameter {
  std::string name;
  Tensor value;
};

/**
 * Parameters of the text/image/numeric ensemble:
 *
 *   text:    GRU over each field's embedded tokens, word attention pooling
 *            per field, field attention across the three field vectors
 *   image:   [conv -> ReLU -> maxpool] x len(cnn_filters) -> dense -> ReLU
 *   numeric: dense -> ReLU
 *   head:    concat -> dense -> ReLU -> dense -> softmax
 *
 * The GRU and word-attention weights are shared by the three fields.
 */
class EnsembleModel {
 public:
  /// All tensors zero; shapes dictated by config.
  static EnsembleModel zeros(const EnsembleConfig &config);
  /// Weights uniform in +-sqrt(6 / (fan_in + fan_out)), biases zero.
  static EnsembleModel initialize(const EnsembleConfig &config, std::uint64_t seed);

  const EnsembleConfig &config() const noexcept { return config_; }
  std::vector<Parameter> &parameters() noexcept { return params_; }
  const std::vector<Parameter> &parameters() const noexcept { return params_; }

  /// Throws NotFound for unknown names.
  Tensor &param(std::string_view name);
  const Tensor &param(std::string_view name) const;

  bool all_finite() const;

  friend bool operator==(const EnsembleModel &a, const EnsembleModel &b) {
    if (!(a.config_ == b.config_) || a.params_.size() != b.params_.size()) return false;
    for (std::size_t i = 0; i < a.params_.size(); ++i) {
      if (a.params_[i].name != b.params_[i].name || !(a.params_[i].value == b.params_[i].value)) return false;
    }
    return true;
  }

 private:
  EnsembleConfig config_;
  std::vector<Parameter> params_;
};

struct ForwardResult {
  std::array<double, kClassCount> probabilities{};
  /// One weight per matrix row; padding rows hold exactly 0.
  std::array<std::vector<double>, textprep::kFieldCount> word_attention;
  /// Zero for fields without tokens.
  std::array<double, textprep::kFieldCount> field_attention{};
};

ForwardResult ensemble_forward(const FeatureBundle &bundle, const EnsembleModel &model);

/// argmax with ties resolved toward class 0.
int predicted_class(const ForwardResult &result);

struct LossGrad {
  double loss = 0.0;
  std::vector<Tensor> gradients;  // aligned with model.parameters()
};

/// Mean cross-entropy over the batch and its exact gradient.
LossGrad ensemble_loss_grad(std::span<const FeatureBundle> batch, std::span<const int> labels,
                            const EnsembleModel &model);

struct TrainConfig {
  double learning_rate = 0.05;
  std::size_t epochs = 50;
  std::size_t batch_size = 16;
  std::uint64_t seed = 7;
  double clip_norm = 5.0;

  void validate() const;
};

struct TrainResult {
  EnsembleModel model;
  std::vector<double> loss_trace;  // mean training loss per epoch
};

/// Return false to stop training after the reported epoch.
using EpochCallback = std::function<bool(std::size_t epoch, double loss, const EnsembleModel &model)>;

/**
 * Mini-batch SGD with global-norm gradient clipping.
 *
 * Samples are first put in a canonical content-derived order, then shuffled
 * each epoch by a generator seeded from config.seed (skipped when one batch
 * covers the whole set). The result therefore depends only on the multiset
 * of samples and the seed, not on the order they are passed in.
 */
TrainResult train_ensemble(std::span<const FeatureBundle> samples, std::span<const int> labels,
                           const EnsembleConfig &config, const TrainConfig &train,
                           const EpochCallback &on_epoch = {});

/// Fraction of samples whose argmax prediction equals the label.
double evaluate(std::span<const FeatureBundle> samples, std::span<const int> labels,
                const EnsembleModel &model);

}  // namespace adgate::models

#endif  // ADGATE_CORE_ENSEMBLE_HPP
