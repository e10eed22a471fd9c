// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 The adgate Authors

#include "training.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "core/error.hpp"

namespace adgate::pipeline {

namespace {

constexpr const char *kManifest = "manifest.json";
constexpr const char *kLexiconFile = "lexicon.txt";
constexpr const char *kOptionsFile = "options.json";
constexpr const char *kTfidfFile = "tfidf.json";
constexpr const char *kEmbeddingsFile = "embeddings.txt";
constexpr const char *kNumericFile = "numeric.json";
constexpr const char *kSentimentFile = "sentiment.json";
constexpr const char *kBaselineFile = "baseline.json";
constexpr const char *kEnsembleFile = "ensemble.json";
constexpr const char *kEvaluationFile = "evaluation.json";

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

[[noreturn]] void bad_option(const std::string &msg) { throw Error(ErrorCode::InvalidArgument, "training config: " + msg); }

void check_keys(const io::Json &obj, std::initializer_list<std::string_view> allowed, std::string_view where) {
  if (!obj.is_object()) bad_option(std::string(where) + " must be an object");
  for (const auto &[key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      bad_option("unknown key '" + key + "' in " + std::string(where));
    }
  }
}

std::size_t get_size(const io::Json &obj, const char *key, std::size_t fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!io::is_count(*it)) bad_option(std::string(key) + " must be a non-negative integer");
  return it->get<std::size_t>();
}

double get_real(const io::Json &obj, const char *key, double fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number()) bad_option(std::string(key) + " must be a number");
  return it->get<double>();
}

std::vector<std::size_t> get_sizes(const io::Json &obj, const char *key, std::vector<std::size_t> fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_array()) bad_option(std::string(key) + " must be an array");
  std::vector<std::size_t> out;
  for (const auto &v : *it) {
    if (!io::is_count(v)) bad_option(std::string(key) + " must hold non-negative integers");
    out.push_back(v.get<std::size_t>());
  }
  return out;
}

models::TrainConfig read_train(const io::Json &obj, models::TrainConfig t, std::string_view where) {
  check_keys(obj, {"learning_rate", "epochs", "batch_size", "seed", "clip_norm"}, where);
  t.learning_rate = get_real(obj, "learning_rate", t.learning_rate);
  t.epochs = get_size(obj, "epochs", t.epochs);
  t.batch_size = get_size(obj, "batch_size", t.batch_size);
  t.seed = get_size(obj, "seed", t.seed);
  t.clip_norm = get_real(obj, "clip_norm", t.clip_norm);
  try {
    t.validate();
  } catch (const Error &e) {
    bad_option(std::string(where) + ": " + e.what());
  }
  return t;
}

io::Json encode_train(const models::TrainConfig &t) {
  return io::Json{{"learning_rate", t.learning_rate},
                  {"epochs", t.epochs},
                  {"batch_size", t.batch_size},
                  {"seed", t.seed},
                  {"clip_norm", t.clip_norm}};
}

std::string file_text(const io::Json &j) { return j.dump(1) + "\n"; }

std::vector<int> to_ints(const std::vector<VideoLabel> &labels, const std::vector<std::size_t> &idx) {
  std::vector<int> out;
  for (auto i : idx) out.push_back(labels[i].label.value == lexicon::Verdict::Offensive ? 1 : 0);
  return out;
}

}  // namespace

std::string content_hash(std::string_view bytes) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(bytes)));
  return buf;
}

// -- lexicon preparation ---------------------------------------------------------

MatchingLexicon prepare_lexicon(const lexicon::OffensiveLexicon &source, const textprep::StopwordList &stops) {
  std::vector<Tokens> prepared;
  std::map<Tokens, std::string> first;
  for (std::size_t i = 0; i < source.size(); ++i) {
    auto toks = textprep::prepare_text(source.phrase_text(i), stops);
    if (toks.empty()) continue;
    first.try_emplace(toks, source.phrase_text(i));
    prepared.push_back(std::move(toks));
  }
  if (prepared.empty()) {
    throw Error(ErrorCode::EmptyLexicon, "every lexicon phrase consists of stopwords or symbols only");
  }
  MatchingLexicon m{source, lexicon::OffensiveLexicon::from_phrases(std::move(prepared), source.source_line_count()),
                    {}};
  for (const auto &p : m.prepared.phrases()) m.display.push_back(first.at(p));
  return m;
}

lexicon::Label label_document(const textprep::PreparedDocument &doc, const MatchingLexicon &lex, double threshold) {
  const auto cov = lexicon::offensiveness_ratio(doc.merged, lex.prepared);
  return lexicon::label(cov.ratio, threshold, cov.insufficient_text);
}

std::vector<VideoLabel> build_labeled_dataset(std::span<const VideoRecord> records, const MatchingLexicon &lex,
                                              double threshold, const textprep::StopwordList &stops) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw Error(ErrorCode::InvalidThreshold, "threshold must lie in [0, 1]");
  }
  std::vector<VideoLabel> out;
  out.reserve(records.size());
  for (const auto &r : records) {
    const auto doc = textprep::prepare_document(r.title, r.subtitle, r.description, stops);
    out.push_back({r.video_id, label_document(doc, lex, threshold)});
  }
  return out;
}

// -- options -----------------------------------------------------------------------

TrainingOptions parse_training_options(std::string_view json) {
  TrainingOptions o;
  const auto doc = io::parse_json(json, "training config");
  check_keys(doc, {"ensemble", "train", "baseline", "pca_components"}, "config");
  if (auto it = doc.find("ensemble"); it != doc.end()) {
    const auto &e = *it;
    check_keys(e,
               {"gru_hidden", "attention_dim", "field_lengths", "cnn_filters", "cnn_kernel", "cnn_pool",
                "image_hidden", "numeric_hidden", "merge_hidden"},
               "ensemble");
    auto &c = o.ensemble;
    c.gru_hidden = get_size(e, "gru_hidden", c.gru_hidden);
    c.attention_dim = get_size(e, "attention_dim", c.attention_dim);
    const auto lengths = get_sizes(e, "field_lengths", {c.field_lengths.begin(), c.field_lengths.end()});
    if (lengths.size() != c.field_lengths.size()) bad_option("field_lengths must hold 3 values");
    std::copy(lengths.begin(), lengths.end(), c.field_lengths.begin());
    c.cnn_filters = get_sizes(e, "cnn_filters", c.cnn_filters);
    c.cnn_kernel = get_size(e, "cnn_kernel", c.cnn_kernel);
    c.cnn_pool = get_size(e, "cnn_pool", c.cnn_pool);
    c.image_hidden = get_size(e, "image_hidden", c.image_hidden);
    c.numeric_hidden = get_size(e, "numeric_hidden", c.numeric_hidden);
    c.merge_hidden = get_size(e, "merge_hidden", c.merge_hidden);
    try {
      c.validate();
    } catch (const Error &err) {
      bad_option(std::string("ensemble: ") + err.what());
    }
  }
  if (auto it = doc.find("train"); it != doc.end()) o.train = read_train(*it, o.train, "train");
  if (auto it = doc.find("baseline"); it != doc.end()) o.baseline = read_train(*it, o.baseline, "baseline");
  o.pca_components = get_size(doc, "pca_components", o.pca_components);
  if (o.pca_components < 1) bad_option("pca_components must be >= 1");
  return o;
}

io::Json encode(const TrainingOptions &o) {
  const auto &c = o.ensemble;
  io::Json e = io::Json::object();
  e["gru_hidden"] = c.gru_hidden;
  e["attention_dim"] = c.attention_dim;
  e["field_lengths"] = c.field_lengths;
  e["cnn_filters"] = c.cnn_filters;
  e["cnn_kernel"] = c.cnn_kernel;
  e["cnn_pool"] = c.cnn_pool;
  e["image_hidden"] = c.image_hidden;
  e["numeric_hidden"] = c.numeric_hidden;
  e["merge_hidden"] = c.merge_hidden;
  io::Json j = io::Json::object();
  j["ensemble"] = std::move(e);
  j["train"] = encode_train(o.train);
  j["baseline"] = encode_train(o.baseline);
  j["pca_components"] = o.pca_components;
  return j;
}

// -- features ------------------------------------------------------------------------

PreparedVideo prepare_video(const VideoRecord &record, const DataSource &source, const sentiment::BnbModel &bnb,
                            const textprep::StopwordList &stops) {
  PreparedVideo v;
  v.doc = textprep::prepare_document(record.title, record.subtitle, record.description, stops);
  std::optional<features::GrayImage> thumb;
  try {
    thumb = source.thumbnail(record);
  } catch (const Error &e) {
    throw Error(e.code(), "video " + record.video_id + ": " + e.what());
  }
  v.image = thumb ? features::thumbnail_vector(*thumb) : std::vector<double>(features::kThumbnailSize, 0.0);
  v.raw = raw_numeric(record, bnb, stops, thumb.has_value());
  return v;
}

models::FeatureBundle assemble_bundle(const PreparedVideo &video, const vectorize::EmbeddingTable &embeddings,
                                      const models::EnsembleConfig &config, const NumericPipeline &numeric) {
  models::FeatureBundle b;
  for (std::size_t f = 0; f < textprep::kFieldCount; ++f) {
    b.fields[f] = vectorize::embed_document(video.doc.fields[f], embeddings, config.field_lengths[f]);
  }
  b.numeric = apply_numeric(video.raw, numeric);
  b.image = video.image;
  models::check_bundle(b, config);
  return b;
}

std::vector<double> baseline_features(const PreparedVideo &video, const models::FeatureBundle &bundle,
                                      const vectorize::TfIdfModel &tfidf) {
  auto out = vectorize::tfidf_transform(video.doc.merged, tfidf).to_dense();
  out.insert(out.end(), bundle.numeric.begin(), bundle.numeric.end());
  out.insert(out.end(), bundle.image.begin(), bundle.image.end());
  return out;
}

bool in_test_split(std::string_view video_id, std::uint64_t seed) {
  std::string key(video_id);
  key += '\0';
  key += std::to_string(seed);
  return fnv1a(key) % 5 == 0;
}

// -- training -------------------------------------------------------------------------

Artifacts run_training(const DataSource &source, const LabelSet &labels, const vectorize::EmbeddingTable &embeddings,
                       const TrainingOptions &options, const fs::path &out_dir) {
  const auto &stops = textprep::StopwordList::bundled();
  const auto &records = source.videos();
  if (records.size() < 2) throw Error(ErrorCode::InvalidArgument, "training needs at least 2 records");

  std::map<std::string, lexicon::Label, std::less<>> by_id;
  for (const auto &l : labels.labels) by_id.emplace(l.video_id, l.label);
  std::vector<VideoLabel> labeled;
  labeled.reserve(records.size());
  for (const auto &r : records) {
    auto it = by_id.find(r.video_id);
    if (it == by_id.end()) {
      throw Error(ErrorCode::Conflict, "record " + r.video_id + " has no label; re-run the label step");
    }
    labeled.push_back({r.video_id, it->second});
  }
  const auto n_off = std::count_if(labeled.begin(), labeled.end(),
                                   [](const VideoLabel &l) { return l.label.value == lexicon::Verdict::Offensive; });
  if (n_off == 0 || static_cast<std::size_t>(n_off) == labeled.size()) {
    throw Error(ErrorCode::SingleClass, "every record carries the same label at threshold " +
                                            std::to_string(labels.threshold));
  }

  Artifacts a(prepare_lexicon(lexicon::parse_lexicon(labels.lexicon_text), stops));
  a.threshold = labels.threshold;
  a.options = options;
  a.embeddings = embeddings;
  const auto seed = options.train.seed;

  std::vector<std::size_t> train_idx, test_idx;
  for (std::size_t i = 0; i < records.size(); ++i) {
    (in_test_split(records[i].video_id, seed) ? test_idx : train_idx).push_back(i);
  }
  const auto train_y = to_ints(labeled, train_idx);
  const auto test_y = to_ints(labeled, test_idx);
  if (std::find(train_y.begin(), train_y.end(), 0) == train_y.end() ||
      std::find(train_y.begin(), train_y.end(), 1) == train_y.end()) {
    throw Error(ErrorCode::SingleClass, "the training split holds a single class");
  }

  const auto corpus = sentiment::parse_corpus(sentiment::bundled_corpus());
  a.bnb = sentiment::train_bnb(sentiment::prepare_corpus(corpus, stops));

  std::vector<PreparedVideo> prepared;
  prepared.reserve(records.size());
  for (const auto &r : records) prepared.push_back(prepare_video(r, source, a.bnb, stops));

  std::vector<RawNumeric> train_raw;
  std::vector<Tokens> train_docs;
  for (auto i : train_idx) {
    train_raw.push_back(prepared[i].raw);
    train_docs.push_back(prepared[i].doc.merged);
  }
  a.numeric = fit_numeric(train_raw, options.pca_components);
  a.tfidf = vectorize::fit_tfidf(train_docs);

  auto config = options.ensemble;
  config.embed_dim = embeddings.dim();
  config.numeric_dim = a.numeric.output_dim();
  config.validate();

  std::vector<models::FeatureBundle> bundles;
  bundles.reserve(records.size());
  for (const auto &p : prepared) bundles.push_back(assemble_bundle(p, embeddings, config, a.numeric));

  auto gather = [&](const std::vector<std::size_t> &idx) {
    std::vector<models::FeatureBundle> out;
    for (auto i : idx) out.push_back(bundles[i]);
    return out;
  };
  auto baseline_matrix = [&](const std::vector<std::size_t> &idx) {
    std::vector<std::vector<double>> rows;
    for (auto i : idx) rows.push_back(baseline_features(prepared[i], bundles[i], a.tfidf));
    return features::FeatureMatrix::from_rows(rows);
  };
  const auto train_x = gather(train_idx);
  const auto test_x = gather(test_idx);
  auto trained = models::train_ensemble(train_x, train_y, config, options.train);
  a.ensemble = std::move(trained.model);
  const auto base_train = baseline_matrix(train_idx);
  a.baseline = models::lr_train(base_train, train_y, options.baseline);

  io::Json eval = io::Json::object();
  eval["records"] = records.size();
  eval["train"] = train_idx.size();
  eval["test"] = test_idx.size();
  eval["offensive"] = n_off;
  eval["non_offensive"] = labeled.size() - static_cast<std::size_t>(n_off);
  io::Json ens = io::Json::object();
  ens["train_accuracy"] = models::evaluate(train_x, train_y, a.ensemble);
  ens["test_accuracy"] = test_idx.empty() ? io::Json(nullptr) : io::Json(models::evaluate(test_x, test_y, a.ensemble));
  ens["final_loss"] = trained.loss_trace.back();
  io::Json base = io::Json::object();
  base["train_accuracy"] = models::lr_accuracy(base_train, train_y, a.baseline);
  base["test_accuracy"] = test_idx.empty() ? io::Json(nullptr)
                                           : io::Json(models::lr_accuracy(baseline_matrix(test_idx), test_y, a.baseline));
  eval["ensemble"] = std::move(ens);
  eval["baseline"] = std::move(base);
  a.evaluation = std::move(eval);

  std::map<std::string, std::string> files;
  files[kLexiconFile] = a.lexicon.source.to_text();
  files[kOptionsFile] = file_text(encode(options));
  files[kTfidfFile] = file_text(io::encode(a.tfidf));
  std::ostringstream emb;
  vectorize::save_embeddings(emb, embeddings);
  files[kEmbeddingsFile] = std::move(emb).str();
  files[kNumericFile] = file_text(encode(a.numeric));
  files[kSentimentFile] = file_text(io::encode(a.bnb));
  files[kBaselineFile] = file_text(io::encode(a.baseline));
  files[kEnsembleFile] = file_text(io::encode(a.ensemble, seed));
  files[kEvaluationFile] = file_text(a.evaluation);

  io::Json manifest = io::header("manifest");
  manifest["seed"] = seed;
  manifest["threshold"] = a.threshold;
  manifest["config_hash"] = content_hash(files[kOptionsFile]);
  io::Json hashes = io::Json::object();
  for (const auto &[name, content] : files) hashes[name] = content_hash(content);
  manifest["files"] = std::move(hashes);
  const auto manifest_text = file_text(manifest);
  a.model_version = content_hash(manifest_text);

  fs::create_directories(out_dir);
  for (const auto &[name, content] : files) write_file(out_dir / name, content);
  write_file(out_dir / kManifest, manifest_text);
  return a;
}

Artifacts load_artifacts(const fs::path &dir) {
  std::error_code ec;
  if (!fs::exists(dir / kManifest, ec)) throw Error(ErrorCode::NotFound, "no model manifest in " + dir.string());
  const auto manifest_text = read_file(dir / kManifest);
  const auto manifest = io::parse_json(manifest_text, "manifest");
  io::check_header(manifest, "manifest");

  auto load = [&](const char *name) {
    auto content = read_file(dir / name);
    std::string expected;
    try {
      expected = manifest.at("files").at(name).get<std::string>();
    } catch (const nlohmann::json::exception &) {
      throw Error(ErrorCode::Format, std::string("manifest does not list ") + name);
    }
    if (content_hash(content) != expected) {
      throw Error(ErrorCode::Format, std::string(name) + " does not match the manifest hash");
    }
    return content;
  };

  const auto &stops = textprep::StopwordList::bundled();
  Artifacts a(prepare_lexicon(lexicon::parse_lexicon(load(kLexiconFile)), stops));
  try {
    a.threshold = manifest.at("threshold").get<double>();
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorCode::Format, std::string("manifest: ") + e.what());
  }
  a.options = parse_training_options(load(kOptionsFile));
  a.tfidf = io::decode_tfidf(io::parse_json(load(kTfidfFile), kTfidfFile));
  std::istringstream emb(load(kEmbeddingsFile));
  a.embeddings = vectorize::load_embeddings(emb);
  a.numeric = decode_numeric(io::parse_json(load(kNumericFile), kNumericFile));
  a.bnb = io::decode_bnb(io::parse_json(load(kSentimentFile), kSentimentFile));
  a.baseline = io::decode_logistic(io::parse_json(load(kBaselineFile), kBaselineFile));
  a.ensemble = io::decode_ensemble(io::parse_json(load(kEnsembleFile), kEnsembleFile)).model;
  a.evaluation = io::parse_json(load(kEvaluationFile), kEvaluationFile);
  a.model_version = content_hash(manifest_text);

  const auto &c = a.ensemble.config();
  if (c.embed_dim != a.embeddings.dim() || c.numeric_dim != a.numeric.output_dim() ||
      a.baseline.weights.size() != a.tfidf.dims() + c.numeric_dim + features::kThumbnailSize) {
    throw Error(ErrorCode::Format, "artifact dimensions are inconsistent");
  }
  return a;
}

}  // namespace adgate::pipeline
