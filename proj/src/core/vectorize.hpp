// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 The adgate Authors

#ifndef ADGATE_CORE_VECTORIZE_HPP
#define ADGATE_CORE_VECTORIZE_HPP

#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tokens.hpp"

namespace adgate::vectorize {

/// Document-frequency statistics. Columns follow lexicographic term order.
struct TfIdfModel {
  std::map<std::string, std::size_t, std::less<>> vocabulary;
  std::vector<std::size_t> doc_freq;  // indexed by column
  std::size_t n_docs = 0;

  std::size_t dims() const noexcept { return doc_freq.size(); }

  /// ln((1 + n_docs) / (1 + df)) + 1
  double idf(std::size_t column) const;
};

TfIdfModel fit_tfidf(std::span<const Tokens> corpus);

struct SparseVector {
  std::size_t dims = 0;
  std::vector<std::pair<std::size_t, double>> entries;  // sorted by column

  std::vector<double> to_dense() const;
  double norm() const;
};

/// Raw-count tf times smoothed idf, then L2 normalized. Unseen terms ignored.
SparseVector tfidf_transform(std::span<const std::string> doc, const TfIdfModel &model);

class EmbeddingTable {
 public:
  explicit EmbeddingTable(std::size_t dim);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return order_.size(); }

  /// Later writes of the same token overwrite the vector but keep its slot.
  void set(const std::string &token, std::span<const double> vec);
  std::span<const double> find(std::string_view token) const;

  /// Tokens in first-insertion order.
  const std::vector<std::string> &tokens() const noexcept { return order_; }

  friend bool operator==(const EmbeddingTable &a, const EmbeddingTable &b);

 private:
  std::size_t dim_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::string> order_;
  std::vector<double> data_;
};

/**
 * Reads the common word-vector text format: "token v1 ... vd" per line.
 * A leading "count dim" line (two integers) is treated as a header.
 * Throws DimensionMismatch or MalformedLine, citing the 1-based line number.
 */
EmbeddingTable load_embeddings(std::istream &in);

/// Writes without a header using shortest round-trip decimal formatting.
void save_embeddings(std::ostream &out, const EmbeddingTable &table);

/// rows x cols, row-major. Rows at or beyond valid_len are zero padding.
struct DocMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t valid_len = 0;
  std::vector<double> data;

  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
};

/// OOV tokens embed as zeros; sequences longer than max_len lose their tail.
DocMatrix embed_document(std::span<const std::string> tokens, const EmbeddingTable &table,
                         std::size_t max_len);

}  // namespace adgate::vectorize

#endif  // ADGATE_CORE_VECTORIZE_HPP
