// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 The adgate Authors

#include "logistic.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"

namespace adgate::models {

namespace {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void check_inputs(const features::FeatureMatrix &x, std::span<const int> labels) {
  if (x.rows != labels.size()) {
    throw Error(ErrorCode::ShapeMismatch, "feature matrix has " + std::to_string(x.rows) + " rows but " +
                                              std::to_string(labels.size()) + " labels were given");
  }
  if (x.rows == 0) throw Error(ErrorCode::InvalidArgument, "no training rows");
  if (x.any_missing()) throw Error(ErrorCode::InvalidArgument, "feature matrix has missing cells");
  for (int y : labels) {
    if (y != 0 && y != 1) throw Error(ErrorCode::InvalidArgument, "labels must be 0 or 1");
  }
}

}  // namespace

LogisticModel lr_train(const features::FeatureMatrix &x, std::span<const int> labels, const TrainConfig &config) {
  config.validate();
  check_inputs(x, labels);
  const bool has0 = std::find(labels.begin(), labels.end(), 0) != labels.end();
  const bool has1 = std::find(labels.begin(), labels.end(), 1) != labels.end();
  if (!has0 || !has1) throw Error(ErrorCode::SingleClass, "training labels contain a single class");

  LogisticModel m{std::vector<double>(x.cols, 0.0), 0.0};
  std::vector<double> grad(x.cols);
  const double inv_n = 1.0 / static_cast<double>(x.rows);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double gb = 0.0;
    for (std::size_t r = 0; r < x.rows; ++r) {
      const double *row = x.data.data() + r * x.cols;
      double z = m.bias;
      for (std::size_t c = 0; c < x.cols; ++c) z += m.weights[c] * row[c];
      const double err = sigmoid(z) - labels[r];
      for (std::size_t c = 0; c < x.cols; ++c) grad[c] += err * row[c];
      gb += err;
    }
    for (std::size_t c = 0; c < x.cols; ++c) m.weights[c] -= config.learning_rate * grad[c] * inv_n;
    m.bias -= config.learning_rate * gb * inv_n;
  }
  return m;
}

double lr_predict(std::span<const double> x, const LogisticModel &model) {
  if (x.size() != model.weights.size()) {
    throw Error(ErrorCode::ShapeMismatch, "feature vector has " + std::to_string(x.size()) +
                                              " entries, model expects " + std::to_string(model.weights.size()));
  }
  double z = model.bias;
  for (std::size_t i = 0; i < x.size(); ++i) z += model.weights[i] * x[i];
  return sigmoid(z);
}

double lr_accuracy(const features::FeatureMatrix &x, std::span<const int> labels, const LogisticModel &model) {
  check_inputs(x, labels);
  std::size_t correct = 0;
  for (std::size_t r = 0; r < x.rows; ++r) {
    const int pred = lr_predict(std::span(x.data).subspan(r * x.cols, x.cols), model) > 0.5 ? 1 : 0;
    if (pred == labels[r]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(x.rows);
}

}  // namespace adgate::models
