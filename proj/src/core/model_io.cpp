// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 The adgate Authors

#include "model_io.hpp"

#include <cmath>

#include "error.hpp"

namespace adgate::io {

namespace {

[[noreturn]] void bad(std::string_view what) { throw Error(ErrorCode::Format, std::string(what)); }

const Json &field(const Json &j, std::string_view key) {
  if (!j.is_object()) bad("expected an object holding '" + std::string(key) + "'");
  auto it = j.find(key);
  if (it == j.end()) bad("missing field '" + std::string(key) + "'");
  return *it;
}

std::size_t read_size(const Json &j, std::string_view what) {
  if (!is_count(j)) bad(std::string(what) + " must be a non-negative integer");
  return j.get<std::size_t>();
}

double read_real(const Json &j, std::string_view what) {
  if (!j.is_number()) bad(std::string(what) + " must be a number");
  return j.get<double>();
}

std::vector<std::size_t> read_sizes(const Json &j, std::string_view what) {
  if (!j.is_array()) bad(std::string(what) + " must be an array");
  std::vector<std::size_t> out;
  out.reserve(j.size());
  for (const auto &v : j) out.push_back(read_size(v, what));
  return out;
}

std::vector<std::string> read_strings(const Json &j, std::string_view what) {
  if (!j.is_array()) bad(std::string(what) + " must be an array");
  std::vector<std::string> out;
  out.reserve(j.size());
  for (const auto &v : j) {
    if (!v.is_string()) bad(std::string(what) + " must hold strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

std::map<std::string, std::size_t, std::less<>> vocabulary_from(const Json &j) {
  std::map<std::string, std::size_t, std::less<>> vocab;
  const auto terms = read_strings(j, "vocabulary");
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (!vocab.emplace(terms[i], i).second) bad("duplicate vocabulary term '" + terms[i] + "'");
  }
  return vocab;
}

Json vocabulary_to(const std::map<std::string, std::size_t, std::less<>> &vocab) {
  std::vector<std::string> terms(vocab.size());
  for (const auto &[t, i] : vocab) terms.at(i) = t;
  return Json(terms);
}

}  // namespace

Json header(std::string_view kind) {
  Json j = Json::object();
  j["format"] = "adgate-" + std::string(kind);
  j["version"] = kArtifactVersion;
  return j;
}

void check_header(const Json &doc, std::string_view kind) {
  const auto expected = "adgate-" + std::string(kind);
  const auto &fmt = field(doc, "format");
  if (!fmt.is_string() || fmt.get<std::string>() != expected) bad("document is not an " + expected + " artifact");
  const auto &ver = field(doc, "version");
  if (!ver.is_number_integer() || ver.get<int>() != kArtifactVersion) {
    bad(expected + " version " + ver.dump() + " is not supported");
  }
}

Json parse_json(std::string_view text, std::string_view what) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error &e) {
    bad(std::string(what) + ": " + e.what());
  }
}

Json real_array(std::span<const double> values) {
  Json arr = Json::array();
  for (double v : values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "cannot serialize a non-finite value");
    arr.push_back(v);
  }
  return arr;
}

std::vector<double> read_reals(const Json &j, std::string_view what) {
  if (!j.is_array()) bad(std::string(what) + " must be an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto &v : j) out.push_back(read_real(v, what));
  return out;
}

// -- tf-idf -----------------------------------------------------------------

Json encode(const vectorize::TfIdfModel &m) {
  Json j = header("tfidf");
  j["n_docs"] = m.n_docs;
  j["vocabulary"] = vocabulary_to(m.vocabulary);
  j["doc_freq"] = m.doc_freq;
  return j;
}

vectorize::TfIdfModel decode_tfidf(const Json &doc) {
  check_header(doc, "tfidf");
  vectorize::TfIdfModel m;
  m.n_docs = read_size(field(doc, "n_docs"), "n_docs");
  m.vocabulary = vocabulary_from(field(doc, "vocabulary"));
  m.doc_freq = read_sizes(field(doc, "doc_freq"), "doc_freq");
  if (m.doc_freq.size() != m.vocabulary.size()) bad("doc_freq and vocabulary lengths differ");
  for (auto df : m.doc_freq) {
    if (df < 1 || df > m.n_docs) bad("doc_freq out of range");
  }
  return m;
}

// -- Bernoulli NB ------------------------------------------------------------

Json encode(const sentiment::BnbModel &m) {
  Json j = header("bnb");
  j["vocabulary"] = vocabulary_to(m.vocabulary);
  j["log_prior"] = real_array(m.log_prior);
  j["log_prob_present"] = Json::array({real_array(m.log_prob_present[0]), real_array(m.log_prob_present[1])});
  j["log_prob_absent"] = Json::array({real_array(m.log_prob_absent[0]), real_array(m.log_prob_absent[1])});
  return j;
}

sentiment::BnbModel decode_bnb(const Json &doc) {
  check_header(doc, "bnb");
  sentiment::BnbModel m;
  m.vocabulary = vocabulary_from(field(doc, "vocabulary"));
  const auto prior = read_reals(field(doc, "log_prior"), "log_prior");
  if (prior.size() != 2) bad("log_prior must hold 2 values");
  m.log_prior = {prior[0], prior[1]};
  for (const char *key : {"log_prob_present", "log_prob_absent"}) {
    const auto &arr = field(doc, key);
    if (!arr.is_array() || arr.size() != 2) bad(std::string(key) + " must hold 2 rows");
    auto &dst = std::string_view(key) == "log_prob_present" ? m.log_prob_present : m.log_prob_absent;
    for (std::size_t c = 0; c < 2; ++c) {
      dst[c] = read_reals(arr[c], key);
      if (dst[c].size() != m.vocabulary.size()) bad(std::string(key) + " row length differs from vocabulary");
    }
  }
  return m;
}

// -- logistic regression -----------------------------------------------------

Json encode(const models::LogisticModel &m) {
  Json j = header("logistic");
  j["bias"] = real_array(std::span(&m.bias, 1))[0];
  j["weights"] = real_array(m.weights);
  return j;
}

models::LogisticModel decode_logistic(const Json &doc) {
  check_header(doc, "logistic");
  return {read_reals(field(doc, "weights"), "weights"), read_real(field(doc, "bias"), "bias")};
}

// -- ensemble ------------------------------------------------------------------

Json encode_config(const models::EnsembleConfig &c) {
  Json j = Json::object();
  j["embed_dim"] = c.embed_dim;
  j["gru_hidden"] = c.gru_hidden;
  j["attention_dim"] = c.attention_dim;
  j["field_lengths"] = c.field_lengths;
  j["image_side"] = c.image_side;
  j["cnn_filters"] = c.cnn_filters;
  j["cnn_kernel"] = c.cnn_kernel;
  j["cnn_pool"] = c.cnn_pool;
  j["image_hidden"] = c.image_hidden;
  j["numeric_dim"] = c.numeric_dim;
  j["numeric_hidden"] = c.numeric_hidden;
  j["merge_hidden"] = c.merge_hidden;
  j["class_count"] = models::kClassCount;
  return j;
}

models::EnsembleConfig decode_config(const Json &j) {
  models::EnsembleConfig c;
  c.embed_dim = read_size(field(j, "embed_dim"), "embed_dim");
  c.gru_hidden = read_size(field(j, "gru_hidden"), "gru_hidden");
  c.attention_dim = read_size(field(j, "attention_dim"), "attention_dim");
  const auto lengths = read_sizes(field(j, "field_lengths"), "field_lengths");
  if (lengths.size() != c.field_lengths.size()) bad("field_lengths must hold 3 values");
  std::copy(lengths.begin(), lengths.end(), c.field_lengths.begin());
  c.image_side = read_size(field(j, "image_side"), "image_side");
  c.cnn_filters = read_sizes(field(j, "cnn_filters"), "cnn_filters");
  c.cnn_kernel = read_size(field(j, "cnn_kernel"), "cnn_kernel");
  c.cnn_pool = read_size(field(j, "cnn_pool"), "cnn_pool");
  c.image_hidden = read_size(field(j, "image_hidden"), "image_hidden");
  c.numeric_dim = read_size(field(j, "numeric_dim"), "numeric_dim");
  c.numeric_hidden = read_size(field(j, "numeric_hidden"), "numeric_hidden");
  c.merge_hidden = read_size(field(j, "merge_hidden"), "merge_hidden");
  if (j.contains("class_count") && read_size(j["class_count"], "class_count") != models::kClassCount) {
    bad("class_count must be 2");
  }
  try {
    c.validate();
  } catch (const Error &e) {
    bad(std::string("invalid config: ") + e.what());
  }
  return c;
}

Json encode(const models::EnsembleModel &m, std::uint64_t seed) {
  Json j = header("model");
  j["config"] = encode_config(m.config());
  j["seed"] = seed;
  Json tensors = Json::array();
  for (const auto &p : m.parameters()) {
    Json t = Json::object();
    t["name"] = p.name;
    t["shape"] = p.value.shape;
    t["data"] = real_array(p.value.data);
    tensors.push_back(std::move(t));
  }
  j["tensors"] = std::move(tensors);
  return j;
}

LoadedEnsemble decode_ensemble(const Json &doc) {
  check_header(doc, "model");
  LoadedEnsemble out{models::EnsembleModel::zeros(decode_config(field(doc, "config"))),
                     read_size(field(doc, "seed"), "seed")};
  const auto &tensors = field(doc, "tensors");
  auto &params = out.model.parameters();
  if (!tensors.is_array() || tensors.size() != params.size()) {
    bad("model holds " + std::to_string(tensors.is_array() ? tensors.size() : 0) + " tensors, config implies " +
        std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto &t = tensors[i];
    const auto &name = field(t, "name");
    if (!name.is_string() || name.get<std::string>() != params[i].name) {
      bad("tensor " + std::to_string(i) + " should be '" + params[i].name + "'");
    }
    if (read_sizes(field(t, "shape"), "shape") != params[i].value.shape) bad("tensor '" + params[i].name + "' has the wrong shape");
    auto data = read_reals(field(t, "data"), "data");
    if (data.size() != params[i].value.size()) bad("tensor '" + params[i].name + "' has the wrong length");
    params[i].value.data = std::move(data);
  }
  return out;
}

// -- numeric feature models ----------------------------------------------------

Json encode(const features::ImputeModel &m) { return Json{{"medians", real_array(m.medians)}}; }
features::ImputeModel decode_impute(const Json &j) { return {read_reals(field(j, "medians"), "medians")}; }

Json encode(const features::WinsorBounds &m) {
  return Json{{"lower", real_array(m.lower)}, {"upper", real_array(m.upper)}};
}
features::WinsorBounds decode_winsor(const Json &j) {
  features::WinsorBounds b{read_reals(field(j, "lower"), "lower"), read_reals(field(j, "upper"), "upper")};
  if (b.lower.size() != b.upper.size()) bad("winsor bounds lengths differ");
  return b;
}

Json encode(const features::BoxCoxParams &m) {
  return Json{{"lambda", m.lambda}, {"shift", m.shift}};
}
features::BoxCoxParams decode_boxcox(const Json &j) {
  return {read_real(field(j, "lambda"), "lambda"), read_real(field(j, "shift"), "shift")};
}

Json encode(const features::StandardizeModel &m) {
  std::vector<bool> flags(m.zero_variance.begin(), m.zero_variance.end());
  return Json{{"means", real_array(m.means)}, {"stds", real_array(m.stds)}, {"zero_variance", flags}};
}
features::StandardizeModel decode_standardize(const Json &j) {
  features::StandardizeModel m;
  m.means = read_reals(field(j, "means"), "means");
  m.stds = read_reals(field(j, "stds"), "stds");
  const auto &flags = field(j, "zero_variance");
  if (!flags.is_array()) bad("zero_variance must be an array");
  for (const auto &f : flags) {
    if (!f.is_boolean()) bad("zero_variance must hold booleans");
    m.zero_variance.push_back(f.get<bool>() ? 1 : 0);
  }
  if (m.means.size() != m.stds.size() || m.means.size() != m.zero_variance.size()) bad("standardize lengths differ");
  return m;
}

Json encode(const features::PcaModel &m) {
  Json j = Json::object();
  j["dims"] = m.dims;
  j["k"] = m.k;
  j["mean"] = real_array(m.mean);
  j["components"] = real_array(m.components);
  j["explained_variance"] = real_array(m.explained_variance);
  return j;
}
features::PcaModel decode_pca(const Json &j) {
  features::PcaModel m;
  m.dims = read_size(field(j, "dims"), "dims");
  m.k = read_size(field(j, "k"), "k");
  m.mean = read_reals(field(j, "mean"), "mean");
  m.components = read_reals(field(j, "components"), "components");
  m.explained_variance = read_reals(field(j, "explained_variance"), "explained_variance");
  if (m.mean.size() != m.dims || m.components.size() != m.k * m.dims || m.explained_variance.size() != m.k) {
    bad("pca model lengths are inconsistent");
  }
  return m;
}

}  // namespace adgate::io
