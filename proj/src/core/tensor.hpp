// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 The adgate Authors

#ifndef ADGATE_CORE_TENSOR_HPP
#define ADGATE_CORE_TENSOR_HPP

#include <cstddef>
#include <functional>
#include <numeric>
#include <vector>

namespace adgate::models {

/// Dense row-major float64 tensor.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> extents)
      : shape(std::move(extents)),
        data(std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>()), 0.0) {}

  std::size_t size() const noexcept { return data.size(); }
  double &operator[](std::size_t i) { return data[i]; }
  double operator[](std::size_t i) const { return data[i]; }

  friend bool operator==(const Tensor &, const Tensor &) = default;
};

}  // namespace adgate::models

#endif  // ADGATE_CORE_TENSOR_HPP
