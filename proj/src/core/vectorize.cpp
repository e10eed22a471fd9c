// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 The adgate Authors

#include "vectorize.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>

#include "error.hpp"

namespace adgate::vectorize {

double TfIdfModel::idf(std::size_t column) const {
  const double n = static_cast<double>(n_docs);
  const double df = static_cast<double>(doc_freq.at(column));
  return std::log((1.0 + n) / (1.0 + df)) + 1.0;
}

TfIdfModel fit_tfidf(std::span<const Tokens> corpus) {
  if (corpus.empty()) throw Error(ErrorCode::EmptyCorpus, "cannot fit tf-idf on an empty corpus");
  std::map<std::string, std::size_t, std::less<>> df;
  for (const auto &doc : corpus) {
    std::set<std::string_view> seen(doc.begin(), doc.end());
    for (auto term : seen) ++df[std::string(term)];
  }
  TfIdfModel model;
  model.n_docs = corpus.size();
  model.doc_freq.reserve(df.size());
  for (auto &[term, count] : df) {
    model.vocabulary.emplace(term, model.doc_freq.size());
    model.doc_freq.push_back(count);
  }
  return model;
}

std::vector<double> SparseVector::to_dense() const {
  std::vector<double> out(dims, 0.0);
  for (const auto &[i, v] : entries) out[i] = v;
  return out;
}

double SparseVector::norm() const {
  double s = 0.0;
  for (const auto &e : entries) s += e.second * e.second;
  return std::sqrt(s);
}

SparseVector tfidf_transform(std::span<const std::string> doc, const TfIdfModel &model) {
  std::map<std::size_t, double> counts;
  for (const auto &t : doc) {
    auto it = model.vocabulary.find(t);
    if (it != model.vocabulary.end()) counts[it->second] += 1.0;
  }
  SparseVector v;
  v.dims = model.dims();
  double sq = 0.0;
  for (const auto &[col, tf] : counts) {
    const double w = tf * model.idf(col);
    v.entries.emplace_back(col, w);
    sq += w * w;
  }
  if (sq > 0.0) {
    const double inv = 1.0 / std::sqrt(sq);
    for (auto &e : v.entries) e.second *= inv;
  }
  return v;
}

// ---------------------------------------------------------------------------

EmbeddingTable::EmbeddingTable(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw Error(ErrorCode::InvalidArgument, "embedding dimension must be >= 1");
}

void EmbeddingTable::set(const std::string &token, std::span<const double> vec) {
  if (vec.size() != dim_) {
    throw Error(ErrorCode::DimensionMismatch, "vector for '" + token + "' has length " +
                                                  std::to_string(vec.size()) + ", expected " +
                                                  std::to_string(dim_));
  }
  auto [it, inserted] = index_.emplace(token, order_.size());
  if (inserted) {
    order_.push_back(token);
    data_.insert(data_.end(), vec.begin(), vec.end());
  } else {
    std::copy(vec.begin(), vec.end(), data_.begin() + static_cast<std::ptrdiff_t>(it->second * dim_));
  }
}

std::span<const double> EmbeddingTable::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return {};
  return {data_.data() + it->second * dim_, dim_};
}

bool operator==(const EmbeddingTable &a, const EmbeddingTable &b) {
  return a.dim_ == b.dim_ && a.order_ == b.order_ && a.data_ == b.data_;
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  auto space = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
  while (i < line.size()) {
    while (i < line.size() && space(line[i])) ++i;
    std::size_t j = i;
    while (j < line.size() && !space(line[j])) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

bool parse_size(std::string_view s, std::size_t &out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}

bool parse_double(std::string_view s, double &out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size() && std::isfinite(out);
}

}  // namespace

EmbeddingTable load_embeddings(std::istream &in) {
  std::string line;
  std::size_t line_no = 0;
  std::size_t dim = 0;
  bool first = true;
  std::vector<std::pair<std::string, std::vector<double>>> rows;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_fields(line);
    if (fields.empty()) continue;
    if (first) {
      first = false;
      std::size_t count = 0, header_dim = 0;
      if (fields.size() == 2 && parse_size(fields[0], count) && parse_size(fields[1], header_dim)) {
        dim = header_dim;
        continue;
      }
    }
    if (fields.size() < 2) {
      throw Error(ErrorCode::MalformedLine,
                  "line " + std::to_string(line_no) + ": token without vector values");
    }
    values.clear();
    for (std::size_t i = 1; i < fields.size(); ++i) {
      double v = 0.0;
      if (!parse_double(fields[i], v)) {
        throw Error(ErrorCode::MalformedLine, "line " + std::to_string(line_no) +
                                                  ": cannot parse '" + std::string(fields[i]) +
                                                  "' as a number");
      }
      values.push_back(v);
    }
    if (dim == 0) dim = values.size();
    if (values.size() != dim) {
      throw Error(ErrorCode::DimensionMismatch,
                  "line " + std::to_string(line_no) + ": vector length " +
                      std::to_string(values.size()) + ", expected " + std::to_string(dim));
    }
    rows.emplace_back(std::string(fields[0]), values);
  }
  if (rows.empty()) throw Error(ErrorCode::MalformedLine, "embedding file contains no vectors");
  EmbeddingTable table(dim);
  for (const auto &[tok, vec] : rows) table.set(tok, vec);
  return table;
}

void save_embeddings(std::ostream &out, const EmbeddingTable &table) {
  char buf[64];
  std::string line;
  for (const auto &tok : table.tokens()) {
    line = tok;
    for (double v : table.find(tok)) {
      auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
      line += ' ';
      line.append(buf, p);
    }
    line += '\n';
    out << line;
  }
}

DocMatrix embed_document(std::span<const std::string> tokens, const EmbeddingTable &table,
                         std::size_t max_len) {
  if (max_len == 0) throw Error(ErrorCode::InvalidArgument, "max length must be >= 1");
  DocMatrix m;
  m.rows = max_len;
  m.cols = table.dim();
  m.valid_len = std::min(tokens.size(), max_len);
  m.data.assign(m.rows * m.cols, 0.0);
  for (std::size_t i = 0; i < m.valid_len; ++i) {
    auto vec = table.find(tokens[i]);
    if (!vec.empty()) std::copy(vec.begin(), vec.end(), m.data.begin() + static_cast<std::ptrdiff_t>(i * m.cols));
  }
  return m;
}

}  // namespace adgate::vectorize
