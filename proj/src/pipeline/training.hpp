// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 The adgate Authors

#ifndef ADGATE_PIPELINE_TRAINING_HPP
#define ADGATE_PIPELINE_TRAINING_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "core/ensemble.hpp"
#include "core/lexicon.hpp"
#include "core/logistic.hpp"
#include "core/model_io.hpp"
#include "core/sentiment.hpp"
#include "core/textprep.hpp"
#include "core/vectorize.hpp"
#include "numeric.hpp"
#include "store.hpp"

namespace adgate::pipeline {

/// 16 hex digits of FNV-1a 64 over the bytes.
std::string content_hash(std::string_view bytes);

/**
 * A user lexicon plus the same phrases passed through the text pipeline so
 * they match prepared documents. Phrases that prepare to nothing (all
 * stopwords) are dropped; display maps prepared phrase ids back to the
 * first source phrase that produced them.
 */
struct MatchingLexicon {
  lexicon::OffensiveLexicon source;
  lexicon::OffensiveLexicon prepared;
  std::vector<std::string> display;
};

/// Throws EmptyLexicon when no phrase survives preparation.
MatchingLexicon prepare_lexicon(const lexicon::OffensiveLexicon &source, const textprep::StopwordList &stops);

lexicon::Label label_document(const textprep::PreparedDocument &doc, const MatchingLexicon &lex, double threshold);

/// Lexicon label for every record, in record order.
std::vector<VideoLabel> build_labeled_dataset(std::span<const VideoRecord> records, const MatchingLexicon &lex,
                                              double threshold, const textprep::StopwordList &stops);

struct TrainingOptions {
  models::EnsembleConfig ensemble;  // embed_dim and numeric_dim are filled in by training
  models::TrainConfig train;
  models::TrainConfig baseline{0.5, 300, 16, 7, 5.0};
  std::size_t pca_components = 100;
};

/// Reads a JSON training config; absent keys keep their defaults and
/// unknown keys are rejected with InvalidArgument.
TrainingOptions parse_training_options(std::string_view json);
io::Json encode(const TrainingOptions &o);

/// Everything needed to score videos.
struct Artifacts {
  explicit Artifacts(MatchingLexicon lex) : lexicon(std::move(lex)) {}

  MatchingLexicon lexicon;
  double threshold = lexicon::kDefaultThreshold;
  TrainingOptions options;
  vectorize::TfIdfModel tfidf;
  vectorize::EmbeddingTable embeddings{1};
  NumericPipeline numeric;
  sentiment::BnbModel bnb;
  models::LogisticModel baseline;
  models::EnsembleModel ensemble;
  std::string model_version;  // hash of the manifest
  io::Json evaluation;
};

/// Text, raw numeric and image features of one video, before any fitted
/// transform is applied.
struct PreparedVideo {
  textprep::PreparedDocument doc;
  RawNumeric raw;
  std::vector<double> image;  // 625 values, zeros when the thumbnail is missing
};

PreparedVideo prepare_video(const VideoRecord &record, const DataSource &source, const sentiment::BnbModel &bnb,
                            const textprep::StopwordList &stops);

models::FeatureBundle assemble_bundle(const PreparedVideo &video, const vectorize::EmbeddingTable &embeddings,
                                      const models::EnsembleConfig &config, const NumericPipeline &numeric);

/// Flattened baseline input: dense tf-idf of the merged text, the numeric
/// vector and the thumbnail.
std::vector<double> baseline_features(const PreparedVideo &video, const models::FeatureBundle &bundle,
                                      const vectorize::TfIdfModel &tfidf);

/// True when the record lands in the held-out fifth for this seed.
bool in_test_split(std::string_view video_id, std::uint64_t seed);

/**
 * Fits every transform on the training split of the labeled store, trains
 * the baseline and the ensemble and writes the artifact directory. Throws
 * SingleClass when the labels (or the training split) hold one class.
 */
Artifacts run_training(const DataSource &source, const LabelSet &labels, const vectorize::EmbeddingTable &embeddings,
                       const TrainingOptions &options, const fs::path &out_dir);

/// Reads an artifact directory, verifying file hashes against the manifest.
Artifacts load_artifacts(const fs::path &dir);

}  // namespace adgate::pipeline

#endif  // ADGATE_PIPELINE_TRAINING_HPP
