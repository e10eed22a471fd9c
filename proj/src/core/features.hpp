// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 The adgate Authors

#ifndef ADGATE_CORE_FEATURES_HPP
#define ADGATE_CORE_FEATURES_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace adgate::features {

/// Row-major matrix with a per-cell missing mask of identical shape.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;
  std::vector<std::uint8_t> missing;

  FeatureMatrix() = default;
  FeatureMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0), missing(r * c, 0) {}
  static FeatureMatrix from_rows(const std::vector<std::vector<double>> &rows);

  double &at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  bool is_missing(std::size_t r, std::size_t c) const { return missing[r * cols + c] != 0; }
  void set_missing(std::size_t r, std::size_t c) { missing[r * cols + c] = 1; data[r * cols + c] = 0.0; }
  bool any_missing() const;

  std::vector<double> column(std::size_t c) const;
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
};

// -- imputation -------------------------------------------------------------

struct ImputeModel {
  std::vector<double> medians;
};

/// Column medians over observed cells. Throws AllMissingColumn.
ImputeModel fit_impute(const FeatureMatrix &m);
FeatureMatrix apply_impute(const FeatureMatrix &m, const ImputeModel &model);
FeatureMatrix impute(const FeatureMatrix &m);

// -- outlier clipping -------------------------------------------------------

struct WinsorBounds {
  std::vector<double> lower;
  std::vector<double> upper;
};

/// Linear-interpolation quantile of already sorted values.
double quantile_sorted(std::span<const double> sorted, double q);

WinsorBounds fit_winsor(const FeatureMatrix &m, double lower_q = 0.01, double upper_q = 0.99);
FeatureMatrix apply_winsor(const FeatureMatrix &m, const WinsorBounds &bounds);

// -- Box-Cox ----------------------------------------------------------------

struct BoxCoxParams {
  double lambda = 1.0;
  double shift = 0.0;
};

/// Grid searched by boxcox_fit: -2.00, -1.95, ..., 2.00.
std::vector<double> boxcox_lambda_grid();

/// -(n/2) ln(var(y)) + (lambda - 1) sum ln(x + shift), population variance.
double boxcox_log_likelihood(std::span<const double> column, double lambda, double shift);

/// shift = max(min_shift, min > 0 ? 0 : 1 - min); lambda maximizes the log likelihood
/// over the grid (first maximum wins). Throws DegenerateColumn when constant.
BoxCoxParams boxcox_fit(std::span<const double> column, double min_shift = 0.0);

/// Throws NonPositiveInput naming the first index with x + shift <= 0.
std::vector<double> boxcox_apply(std::span<const double> column, const BoxCoxParams &params);

// -- standardization --------------------------------------------------------

struct StandardizeModel {
  std::vector<double> means;
  std::vector<double> stds;  // population std; 0 for flagged columns
  std::vector<std::uint8_t> zero_variance;
};

struct Standardized {
  FeatureMatrix matrix;
  StandardizeModel model;
};

Standardized standardize(const FeatureMatrix &m);
FeatureMatrix apply_standardize(const FeatureMatrix &m, const StandardizeModel &model);

// -- PCA --------------------------------------------------------------------

struct PcaModel {
  std::size_t dims = 0;
  std::size_t k = 0;
  std::vector<double> mean;                // dims
  std::vector<double> components;          // k x dims, rows orthonormal
  std::vector<double> explained_variance;  // k, non-increasing

  std::span<const double> component(std::size_t i) const { return {components.data() + i * dims, dims}; }
};

/**
 * Principal axes of the mean-centred data via a thin SVD. Variances use the
 * n - 1 denominator. Each component is signed so its largest-magnitude entry
 * is positive. When k exceeds the numerical rank the trailing components are
 * completed to an orthonormal set and carry zero variance.
 */
PcaModel pca_fit(const FeatureMatrix &m, std::size_t k);
FeatureMatrix pca_project(const FeatureMatrix &m, const PcaModel &model);
std::vector<double> pca_project_row(std::span<const double> row, const PcaModel &model);

// -- thumbnails -------------------------------------------------------------

inline constexpr std::size_t kThumbnailSide = 25;
inline constexpr std::size_t kThumbnailSize = kThumbnailSide * kThumbnailSide;

struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> pixels;  // row-major, each in [0, 1]
};

/// Bilinear (corner-aligned) resample to 25x25, flattened row-major.
std::vector<double> thumbnail_vector(const GrayImage &image);

/// Reads P2 or P5 portable graymaps (maxval <= 65535), scaled to [0, 1].
GrayImage read_pgm(std::string_view bytes);
/// Writes an ASCII (P2) graymap.
std::string write_pgm(const GrayImage &image, unsigned maxval = 255);

}  // namespace adgate::features

#endif  // ADGATE_CORE_FEATURES_HPP
