// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 The adgate Authors

#ifndef ADGATE_CORE_LOGISTIC_HPP
#define ADGATE_CORE_LOGISTIC_HPP

#include <span>
#include <vector>

#include "ensemble.hpp"
#include "features.hpp"

namespace adgate::models {

struct LogisticModel {
  std::vector<double> weights;
  double bias = 0.0;

  friend bool operator==(const LogisticModel &, const LogisticModel &) = default;
};

/**
 * Full-batch gradient descent on mean cross-entropy from a zero start.
 * Only learning_rate and epochs are read from the config; the result does
 * not depend on the seed.
 */
LogisticModel lr_train(const features::FeatureMatrix &x, std::span<const int> labels,
                       const TrainConfig &config);

/// sigmoid(w.x + b). Throws ShapeMismatch.
double lr_predict(std::span<const double> x, const LogisticModel &model);

/// Fraction of rows where (p > 0.5) matches the label.
double lr_accuracy(const features::FeatureMatrix &x, std::span<const int> labels,
                   const LogisticModel &model);

}  // namespace adgate::models

#endif  // ADGATE_CORE_LOGISTIC_HPP
