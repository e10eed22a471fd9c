// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 The adgate Authors

#include <doctest.h>

#include <cmath>
#include <random>

#include "core/error.hpp"
#include "core/features.hpp"
#include "criteria.hpp"
#include "fixture.hpp"
#include "oracles.hpp"

using namespace adgate;
using namespace adgate::features;

namespace {

ErrorCode code_of(auto &&fn) {
  try {
    fn();
  } catch (const Error &e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::InvalidArgument;
}

FeatureMatrix column(std::vector<double> values, std::vector<std::uint8_t> missing = {}) {
  FeatureMatrix m(values.size(), 1);
  m.data = std::move(values);
  if (!missing.empty()) m.missing = std::move(missing);
  return m;
}

}  // namespace

TEST_CASE("median imputation") {
  const auto m = impute(column({1, 0, 3}, {0, 1, 0}));
  CHECK(m.data == std::vector<double>{1, 2, 3});
  CHECK_FALSE(m.any_missing());
  const auto same = impute(column({4, 5, 6}));
  CHECK(same.data == std::vector<double>{4, 5, 6});
  CHECK(code_of([] { impute(column({0, 0}, {1, 1})); }) == ErrorCode::AllMissingColumn);
}

TEST_CASE("winsorization clips to fitted percentiles") {
  std::vector<double> v;
  for (int i = 0; i <= 100; ++i) v.push_back(i);
  v.back() = 1e6;
  const auto m = column(v);
  const auto b = fit_winsor(m);
  const auto w = apply_winsor(m, b);
  CHECK(w.data.front() == doctest::Approx(1.0));
  CHECK(w.data.back() == doctest::Approx(b.upper[0]));
  CHECK(b.upper[0] < 1e6);
  CHECK(w.data[50] == 50.0);
}

TEST_CASE("Box-Cox formula examples") {
  CHECK(boxcox_apply(std::vector<double>{5.0}, {1.0, 0.0})[0] == 4.0);
  CHECK(boxcox_apply(std::vector<double>{std::exp(1.0)}, {0.0, 0.0})[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(boxcox_apply(std::vector<double>{4.0}, {0.5, 0.0})[0] == 2.0);
  CHECK(boxcox_apply(std::vector<double>{2.0}, {1.0, 3.0})[0] == 4.0);
  CHECK(code_of([] { boxcox_apply(std::vector<double>{1.0, -1.0}, {1.0, 0.0}); }) == ErrorCode::NonPositiveInput);
  CHECK(code_of([] { boxcox_fit(std::vector<double>{2, 2, 2}); }) == ErrorCode::DegenerateColumn);
  CHECK(boxcox_lambda_grid().size() == 81);
}

TEST_CASE("Box-Cox shift rules") {
  CHECK(boxcox_fit(std::vector<double>{0.5, 1.0, 3.0}).shift == 0.0);
  CHECK(boxcox_fit(std::vector<double>{-2.0, 1.0, 3.0}).shift == 3.0);
  CHECK(boxcox_fit(std::vector<double>{0.0, 1.0, 3.0}).shift == 1.0);
  CHECK(boxcox_fit(std::vector<double>{0.0, 5.0, 9.0}, 1.0).shift == 1.0);
  CHECK(boxcox_fit(std::vector<double>{7.0, 8.0, 9.0}, 1.0).shift == 1.0);
}

TEST_CASE("Box-Cox fit on normal and lognormal samples") {
  std::mt19937_64 gen(21);
  auto normal = [&] {
    const double u1 = std::max(testing::unit_real(gen()), 1e-300), u2 = testing::unit_real(gen());
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  };
  std::vector<double> shifted;
  for (int i = 0; i < 1000; ++i) shifted.push_back(normal() + 5.0);
  const auto fit = boxcox_fit(shifted);
  CHECK(fit.lambda == oracle::boxcox_grid_lambda(shifted, fit.shift));
  CHECK(std::abs(fit.lambda - 1.0) <= 0.5);

  const auto r = criteria::boxcox(13);
  INFO(r.detail);
  CHECK(r.pass);
}

TEST_CASE("standardization") {
  const auto s = standardize(column({1, 2, 3}));
  CHECK(s.matrix.data[0] == doctest::Approx(-1.224744871391589).epsilon(1e-12));
  CHECK(s.matrix.data[1] == doctest::Approx(0.0));
  CHECK(s.matrix.data[2] == doctest::Approx(1.224744871391589).epsilon(1e-12));
  const auto again = standardize(s.matrix);
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(again.matrix.data[i] - s.matrix.data[i]) <= 1e-10);
  const auto flat = standardize(column({7, 7, 7}));
  CHECK(flat.matrix.data == std::vector<double>{0, 0, 0});
  CHECK(flat.model.zero_variance[0] == 1);
}

TEST_CASE("PCA on points along a diagonal") {
  FeatureMatrix m(4, 2);
  m.data = {1, 1, 2, 2, 3, 3, 4, 4};
  const auto p = pca_fit(m, 2);
  CHECK(p.component(0)[0] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(p.component(0)[1] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(std::abs(p.explained_variance[1]) <= 1e-12);
  const auto mean_row = pca_project_row(p.mean, p);
  CHECK(std::abs(mean_row[0]) <= 1e-15);
  std::vector<double> shifted(p.mean);
  for (std::size_t d = 0; d < 2; ++d) shifted[d] += p.component(0)[d];
  CHECK(pca_project_row(shifted, p)[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(code_of([&] { pca_fit(m, 0); }) == ErrorCode::InvalidK);
  CHECK(code_of([&] { pca_project_row(std::vector<double>{1, 2, 3}, p); }) == ErrorCode::ShapeMismatch);
}

TEST_CASE("PCA completes rank-deficient bases and survives wide matrices with zero columns") {
  FeatureMatrix m(12, 300);
  std::mt19937_64 gen(5);
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t c = 0; c < m.cols; ++c) {
      // Three informative columns, a block that only toggles, zeros elsewhere.
      if (c < 3) m.data[r * m.cols + c] = testing::unit_real(gen());
      else if (c < 200) m.data[r * m.cols + c] = r % 2 ? 1.0 : -1.0;
    }
  }
  const auto p = pca_fit(m, 10);
  double gram = 0.0;
  for (std::size_t i = 0; i < p.k; ++i) {
    for (std::size_t j = 0; j < p.k; ++j) {
      double dot = 0.0;
      for (std::size_t d = 0; d < p.dims; ++d) dot += p.component(i)[d] * p.component(j)[d];
      gram = std::max(gram, std::abs(dot - (i == j ? 1.0 : 0.0)));
    }
  }
  CHECK(gram <= 1e-8);
  for (std::size_t i = 4; i < p.k; ++i) CHECK(p.explained_variance[i] == 0.0);
  double total = 0.0, explained = 0.0;
  for (std::size_t c = 0; c < m.cols; ++c) {
    const auto col = m.column(c);
    double mean = 0.0, var = 0.0;
    for (double x : col) mean += x / static_cast<double>(col.size());
    for (double x : col) var += (x - mean) * (x - mean) / static_cast<double>(col.size() - 1);
    total += var;
  }
  for (double v : p.explained_variance) explained += v;
  CHECK(explained <= total * (1 + 1e-12));
}

TEST_CASE("PCA agrees with the dense eigen oracle") {
  const auto r = criteria::pca(60, 17);
  INFO(r.detail);
  CHECK(r.pass);
}

TEST_CASE("thumbnail resampling") {
  GrayImage same{25, 25, {}};
  for (std::size_t i = 0; i < 625; ++i) same.pixels.push_back(static_cast<double>(i % 11) / 10.0);
  CHECK(thumbnail_vector(same) == same.pixels);

  const auto flat = thumbnail_vector(GrayImage{50, 50, std::vector<double>(2500, 0.5)});
  for (double v : flat) CHECK(v == doctest::Approx(0.5).epsilon(1e-15));

  const auto ramp = thumbnail_vector(GrayImage{2, 1, {0.0, 1.0}});
  // Corner-aligned: column j samples x = j / 24.
  CHECK(ramp[0] == 0.0);
  CHECK(ramp[12] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(ramp[24] == 1.0);
  for (std::size_t r = 0; r < 25; ++r) {
    for (std::size_t c = 1; c < 25; ++c) CHECK(ramp[r * 25 + c] >= ramp[r * 25 + c - 1]);
  }
  CHECK(code_of([] { thumbnail_vector(GrayImage{0, 0, {}}); }) == ErrorCode::EmptyImage);
}

TEST_CASE("graymap codec") {
  GrayImage img{3, 2, {0.0, 0.2, 0.4, 0.6, 0.8, 1.0}};
  const auto back = read_pgm(write_pgm(img));
  CHECK(back.width == 3);
  CHECK(back.height == 2);
  for (std::size_t i = 0; i < 6; ++i) CHECK(std::abs(back.pixels[i] - img.pixels[i]) <= 0.5 / 255.0);
  const std::string p5 = std::string("P5\n# c\n2 1\n255\n") + '\x00' + '\xff';
  const auto bin = read_pgm(p5);
  CHECK(bin.pixels == std::vector<double>{0.0, 1.0});
  CHECK_THROWS_AS(read_pgm("P6\n1 1\n255\n\x01\x02\x03"), Error);
  CHECK_THROWS_AS(read_pgm("P2\n2 2\n255\n1 2 3\n"), Error);
}
