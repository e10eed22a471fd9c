// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 The adgate Authors

#include "features.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <sstream>

#include "error.hpp"

namespace adgate::features {

FeatureMatrix FeatureMatrix::from_rows(const std::vector<std::vector<double>> &rows) {
  FeatureMatrix m(rows.size(), rows.empty() ? 0 : rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != m.cols) throw Error(ErrorCode::ShapeMismatch, "ragged rows");
    std::copy(rows[r].begin(), rows[r].end(), m.data.begin() + static_cast<std::ptrdiff_t>(r * m.cols));
  }
  return m;
}

bool FeatureMatrix::any_missing() const {
  return std::any_of(missing.begin(), missing.end(), [](std::uint8_t v) { return v != 0; });
}

std::vector<double> FeatureMatrix::column(std::size_t c) const {
  std::vector<double> out(rows);
  for (std::size_t r = 0; r < rows; ++r) out[r] = at(r, c);
  return out;
}

namespace {

void require_complete(const FeatureMatrix &m, std::string_view what) {
  if (m.any_missing()) {
    throw Error(ErrorCode::InvalidArgument, std::string(what) + " requires a matrix without missing cells");
  }
}

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double population_variance(std::span<const double> v) {
  const double mu = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - mu) * (x - mu);
  return s / static_cast<double>(v.size());
}

}  // namespace

// ---------------------------------------------------------------------------

ImputeModel fit_impute(const FeatureMatrix &m) {
  ImputeModel model;
  model.medians.resize(m.cols);
  std::vector<double> observed;
  for (std::size_t c = 0; c < m.cols; ++c) {
    observed.clear();
    for (std::size_t r = 0; r < m.rows; ++r) {
      if (!m.is_missing(r, c)) observed.push_back(m.at(r, c));
    }
    if (observed.empty()) {
      throw Error(ErrorCode::AllMissingColumn, "column " + std::to_string(c) + " has no observed values");
    }
    std::sort(observed.begin(), observed.end());
    model.medians[c] = quantile_sorted(observed, 0.5);
  }
  return model;
}

FeatureMatrix apply_impute(const FeatureMatrix &m, const ImputeModel &model) {
  if (model.medians.size() != m.cols) throw Error(ErrorCode::ShapeMismatch, "impute model width differs from matrix");
  FeatureMatrix out = m;
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t c = 0; c < m.cols; ++c) {
      if (m.is_missing(r, c)) out.at(r, c) = model.medians[c];
    }
  }
  std::fill(out.missing.begin(), out.missing.end(), 0);
  return out;
}

FeatureMatrix impute(const FeatureMatrix &m) { return apply_impute(m, fit_impute(m)); }

// ---------------------------------------------------------------------------

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw Error(ErrorCode::InvalidArgument, "quantile of an empty sample");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

WinsorBounds fit_winsor(const FeatureMatrix &m, double lower_q, double upper_q) {
  require_complete(m, "winsorization");
  if (m.rows == 0) throw Error(ErrorCode::InvalidArgument, "winsorization needs at least one row");
  WinsorBounds b;
  b.lower.resize(m.cols);
  b.upper.resize(m.cols);
  for (std::size_t c = 0; c < m.cols; ++c) {
    auto col = m.column(c);
    std::sort(col.begin(), col.end());
    b.lower[c] = quantile_sorted(col, lower_q);
    b.upper[c] = quantile_sorted(col, upper_q);
  }
  return b;
}

FeatureMatrix apply_winsor(const FeatureMatrix &m, const WinsorBounds &bounds) {
  if (bounds.lower.size() != m.cols) throw Error(ErrorCode::ShapeMismatch, "winsor bounds width differs from matrix");
  FeatureMatrix out = m;
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t c = 0; c < m.cols; ++c) {
      out.at(r, c) = std::clamp(m.at(r, c), bounds.lower[c], bounds.upper[c]);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<double> boxcox_lambda_grid() {
  std::vector<double> grid;
  for (int i = -40; i <= 40; ++i) grid.push_back(static_cast<double>(i) / 20.0);
  return grid;
}

double boxcox_log_likelihood(std::span<const double> column, double lambda, double shift) {
  const auto n = static_cast<double>(column.size());
  std::vector<double> t(column.size());
  double log_sum = 0.0;
  for (std::size_t i = 0; i < column.size(); ++i) {
    const double x = column[i] + shift;
    const double lx = std::log(x);
    log_sum += lx;
    // var((x^l - 1) / l) == var(x^l) / l^2, which avoids cancellation near 1/l.
    t[i] = lambda == 0.0 ? lx : std::exp(lambda * lx);
  }
  double var = population_variance(t);
  if (lambda != 0.0) var /= lambda * lambda;
  return -0.5 * n * std::log(var) + (lambda - 1.0) * log_sum;
}

BoxCoxParams boxcox_fit(std::span<const double> column, double min_shift) {
  if (column.size() < 3) throw Error(ErrorCode::InvalidArgument, "Box-Cox fit needs at least 3 values");
  const auto [lo, hi] = std::minmax_element(column.begin(), column.end());
  if (*lo == *hi) throw Error(ErrorCode::DegenerateColumn, "Box-Cox fit on a constant column");
  BoxCoxParams p;
  // Strictly positive columns are left unshifted; moving them changes the
  // shape of the distribution and with it the fitted lambda.
  p.shift = std::max(min_shift, *lo > 0.0 ? 0.0 : 1.0 - *lo);
  double best = -std::numeric_limits<double>::infinity();
  for (double lambda : boxcox_lambda_grid()) {
    const double ll = boxcox_log_likelihood(column, lambda, p.shift);
    if (ll > best) {
      best = ll;
      p.lambda = lambda;
    }
  }
  return p;
}

std::vector<double> boxcox_apply(std::span<const double> column, const BoxCoxParams &params) {
  std::vector<double> out(column.size());
  for (std::size_t i = 0; i < column.size(); ++i) {
    const double x = column[i] + params.shift;
    if (!(x > 0.0)) {
      throw Error(ErrorCode::NonPositiveInput,
                  "value at index " + std::to_string(i) + " is not positive after shift");
    }
    out[i] = params.lambda == 0.0 ? std::log(x) : (std::pow(x, params.lambda) - 1.0) / params.lambda;
  }
  return out;
}

// ---------------------------------------------------------------------------

Standardized standardize(const FeatureMatrix &m) {
  require_complete(m, "standardization");
  if (m.rows == 0) throw Error(ErrorCode::InvalidArgument, "standardization needs at least one row");
  Standardized s;
  auto &model = s.model;
  model.means.resize(m.cols);
  model.stds.resize(m.cols);
  model.zero_variance.assign(m.cols, 0);
  for (std::size_t c = 0; c < m.cols; ++c) {
    const auto col = m.column(c);
    const double mu = mean_of(col);
    const double sd = std::sqrt(population_variance(col));
    model.means[c] = mu;
    if (sd <= 1e-12 * std::max(1.0, std::abs(mu))) {
      model.zero_variance[c] = 1;
      model.stds[c] = 0.0;
    } else {
      model.stds[c] = sd;
    }
  }
  s.matrix = apply_standardize(m, model);
  return s;
}

FeatureMatrix apply_standardize(const FeatureMatrix &m, const StandardizeModel &model) {
  if (model.means.size() != m.cols) throw Error(ErrorCode::ShapeMismatch, "standardize model width differs from matrix");
  FeatureMatrix out = m;
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t c = 0; c < m.cols; ++c) {
      out.at(r, c) = model.zero_variance[c] ? 0.0 : (m.at(r, c) - model.means[c]) / model.stds[c];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

PcaModel pca_fit(const FeatureMatrix &m, std::size_t k) {
  require_complete(m, "PCA");
  if (k < 1) throw Error(ErrorCode::InvalidK, "PCA needs k >= 1");
  if (k > std::min(m.rows, m.cols)) {
    throw Error(ErrorCode::InvalidK, "k = " + std::to_string(k) + " exceeds min(rows, cols) = " +
                                         std::to_string(std::min(m.rows, m.cols)));
  }
  const auto n = static_cast<Eigen::Index>(m.rows);
  const auto d = static_cast<Eigen::Index>(m.cols);
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> raw(m.data.data(), n, d);
  const Eigen::RowVectorXd mean = raw.colwise().mean();
  const Eigen::MatrixXd centered = raw.rowwise() - mean;

  Eigen::VectorXd sv;
  Eigen::MatrixXd v;
  {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
    sv = svd.singularValues();
    v = svd.matrixV();
  }
  // Divide-and-conquer occasionally returns non-finite factors on inputs
  // with many exactly-zero columns; one-sided Jacobi is slower but robust.
  if (!sv.allFinite() || !v.allFinite()) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
    sv = svd.singularValues();
    v = svd.matrixV();
  }
  const double denom = m.rows > 1 ? static_cast<double>(m.rows - 1) : 1.0;
  const double tol = (sv.size() > 0 ? sv(0) : 0.0) * static_cast<double>(std::max(n, d)) *
                     std::numeric_limits<double>::epsilon();

  PcaModel model;
  model.dims = m.cols;
  model.k = k;
  model.mean.assign(mean.data(), mean.data() + d);
  model.components.assign(k * m.cols, 0.0);
  model.explained_variance.assign(k, 0.0);

  std::vector<Eigen::VectorXd> basis;
  std::size_t next_unit = 0;
  for (std::size_t i = 0; i < k; ++i) {
    Eigen::VectorXd c = v.col(static_cast<Eigen::Index>(i));
    const bool informative = sv(static_cast<Eigen::Index>(i)) > tol;
    if (informative) {
      model.explained_variance[i] = sv(static_cast<Eigen::Index>(i)) * sv(static_cast<Eigen::Index>(i)) / denom;
    } else {
      // Null-space direction: re-orthonormalize against the accepted basis,
      // falling back to unit vectors when the solver's column degenerates.
      auto orthonormalize = [&](Eigen::VectorXd x) {
        for (int pass = 0; pass < 2; ++pass) {
          for (const auto &b : basis) x -= b.dot(x) * b;
        }
        return x;
      };
      c = orthonormalize(c);
      while (c.norm() < 0.5) {
        c = orthonormalize(Eigen::VectorXd::Unit(d, static_cast<Eigen::Index>(next_unit++)));
      }
      c.normalize();
    }
    Eigen::Index arg = 0;
    c.cwiseAbs().maxCoeff(&arg);
    if (c(arg) < 0) c = -c;
    basis.push_back(c);
    std::copy(c.data(), c.data() + d, model.components.begin() + static_cast<std::ptrdiff_t>(i * m.cols));
  }
  return model;
}

std::vector<double> pca_project_row(std::span<const double> row, const PcaModel &model) {
  if (row.size() != model.dims) {
    throw Error(ErrorCode::ShapeMismatch, "row has " + std::to_string(row.size()) + " columns, PCA expects " +
                                              std::to_string(model.dims));
  }
  std::vector<double> out(model.k, 0.0);
  for (std::size_t i = 0; i < model.k; ++i) {
    const auto comp = model.component(i);
    double s = 0.0;
    for (std::size_t j = 0; j < model.dims; ++j) s += (row[j] - model.mean[j]) * comp[j];
    out[i] = s;
  }
  return out;
}

FeatureMatrix pca_project(const FeatureMatrix &m, const PcaModel &model) {
  if (m.cols != model.dims) {
    throw Error(ErrorCode::ShapeMismatch, "matrix has " + std::to_string(m.cols) + " columns, PCA expects " +
                                              std::to_string(model.dims));
  }
  FeatureMatrix out(m.rows, model.k);
  for (std::size_t r = 0; r < m.rows; ++r) {
    const auto p = pca_project_row(m.row(r), model);
    std::copy(p.begin(), p.end(), out.data.begin() + static_cast<std::ptrdiff_t>(r * model.k));
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<double> thumbnail_vector(const GrayImage &image) {
  if (image.width == 0 || image.height == 0) throw Error(ErrorCode::EmptyImage, "image has no pixels");
  if (image.pixels.size() != image.width * image.height) {
    throw Error(ErrorCode::ShapeMismatch, "pixel count does not match width x height");
  }
  auto source = [](std::size_t i, std::size_t extent) {
    if (extent == 1) return 0.0;
    return static_cast<double>(i) * static_cast<double>(extent - 1) / static_cast<double>(kThumbnailSide - 1);
  };
  std::vector<double> out(kThumbnailSize);
  for (std::size_t r = 0; r < kThumbnailSide; ++r) {
    const double sy = source(r, image.height);
    const auto y0 = std::min(static_cast<std::size_t>(sy), image.height - 1);
    const auto y1 = std::min(y0 + 1, image.height - 1);
    const double fy = sy - static_cast<double>(y0);
    for (std::size_t c = 0; c < kThumbnailSide; ++c) {
      const double sx = source(c, image.width);
      const auto x0 = std::min(static_cast<std::size_t>(sx), image.width - 1);
      const auto x1 = std::min(x0 + 1, image.width - 1);
      const double fx = sx - static_cast<double>(x0);
      auto px = [&](std::size_t y, std::size_t x) { return image.pixels[y * image.width + x]; };
      const double top = px(y0, x0) + fx * (px(y0, x1) - px(y0, x0));
      const double bottom = px(y1, x0) + fx * (px(y1, x1) - px(y1, x0));
      out[r * kThumbnailSide + c] = std::clamp(top + fy * (bottom - top), 0.0, 1.0);
    }
  }
  return out;
}

namespace {

class PgmCursor {
 public:
  explicit PgmCursor(std::string_view b) : bytes_(b) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const auto c = static_cast<unsigned char>(bytes_[pos_]);
      if (std::isspace(c)) {
        ++pos_;
      } else if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  unsigned long number() {
    skip_space_and_comments();
    const auto start = pos_;
    unsigned long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
      v = v * 10 + static_cast<unsigned long>(bytes_[pos_] - '0');
      if (v > 1'000'000'000UL) throw Error(ErrorCode::Format, "PGM value out of range");
      ++pos_;
    }
    if (pos_ == start) throw Error(ErrorCode::Format, "malformed PGM header or raster");
    return v;
  }

  std::string_view take(std::size_t n) {
    if (bytes_.size() - pos_ < n) throw Error(ErrorCode::Format, "truncated PGM raster");
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  void skip_one_space() {
    if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      throw Error(ErrorCode::Format, "missing whitespace before PGM raster");
    }
    ++pos_;
  }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

GrayImage read_pgm(std::string_view bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5')) {
    throw Error(ErrorCode::Format, "not a P2/P5 graymap");
  }
  const bool binary = bytes[1] == '5';
  PgmCursor cur(bytes.substr(2));
  GrayImage img;
  img.width = cur.number();
  img.height = cur.number();
  const auto maxval = cur.number();
  if (img.width == 0 || img.height == 0) throw Error(ErrorCode::EmptyImage, "PGM has zero extent");
  if (maxval == 0 || maxval > 65535) throw Error(ErrorCode::Format, "PGM maxval must be in [1, 65535]");
  const std::size_t count = img.width * img.height;
  img.pixels.resize(count);
  const double scale = 1.0 / static_cast<double>(maxval);
  if (binary) {
    cur.skip_one_space();
    const std::size_t width = maxval < 256 ? 1 : 2;
    const auto raster = cur.take(count * width);
    for (std::size_t i = 0; i < count; ++i) {
      unsigned long v = static_cast<unsigned char>(raster[i * width]);
      if (width == 2) v = (v << 8) | static_cast<unsigned char>(raster[i * width + 1]);
      if (v > maxval) throw Error(ErrorCode::Format, "PGM sample exceeds maxval");
      img.pixels[i] = static_cast<double>(v) * scale;
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      const auto v = cur.number();
      if (v > maxval) throw Error(ErrorCode::Format, "PGM sample exceeds maxval");
      img.pixels[i] = static_cast<double>(v) * scale;
    }
  }
  return img;
}

std::string write_pgm(const GrayImage &image, unsigned maxval) {
  std::ostringstream out;
  out << "P2\n" << image.width << ' ' << image.height << '\n' << maxval << '\n';
  for (std::size_t r = 0; r < image.height; ++r) {
    for (std::size_t c = 0; c < image.width; ++c) {
      const double v = std::clamp(image.pixels[r * image.width + c], 0.0, 1.0);
      out << (c ? " " : "") << static_cast<unsigned>(std::lround(v * maxval));
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace adgate::features
