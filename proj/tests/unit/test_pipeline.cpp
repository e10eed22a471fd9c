// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 The adgate Authors

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numeric>

#include "core/error.hpp"
#include "fixture.hpp"
#include "pipeline/numeric.hpp"
#include "pipeline/scoring.hpp"
#include "pipeline/store.hpp"
#include "pipeline/training.hpp"

using namespace adgate;
using namespace adgate::pipeline;

namespace {

constexpr double kThreshold = 0.02;

// One trained model shared by every case in this file.
struct Trained {
  testing::Fixture fx;
  fs::path store, model;
  std::unique_ptr<FixtureStore> source;
  std::unique_ptr<Artifacts> artifacts;
  LabelSet labels;
};

vectorize::EmbeddingTable load_table(const fs::path &p) {
  std::ifstream in(p);
  return vectorize::load_embeddings(in);
}

Trained &trained() {
  static Trained t = [] {
    Trained t;
    const auto root = testing::scratch_dir("pipeline");
    t.fx = testing::write_fixture(root / "fx");
    t.store = root / "store";
    t.model = root / "model";
    ingest(t.store, {t.fx.records});
    t.source = std::make_unique<FixtureStore>(FixtureStore::open(t.store));
    const auto &stops = textprep::StopwordList::bundled();
    const auto lex = prepare_lexicon(lexicon::parse_lexicon(read_file(t.fx.lexicon)), stops);
    t.labels.threshold = kThreshold;
    t.labels.lexicon_text = read_file(t.fx.lexicon);
    t.labels.labels = build_labeled_dataset(t.source->videos(), lex, kThreshold, stops);
    write_labels(t.store, t.labels);
    t.artifacts = std::make_unique<Artifacts>(run_training(*t.source, t.labels, load_table(t.fx.embeddings),
                                                           parse_training_options(read_file(t.fx.config)), t.model));
    return t;
  }();
  return t;
}

std::vector<std::string> fixture_channels() { return parse_channel_list(read_file(trained().fx.channels)); }

}  // namespace

TEST_CASE("lexicon labels follow the planted offensive videos") {
  auto &t = trained();
  std::size_t checked = 0;
  for (const auto &l : t.labels.labels) {
    const auto it = t.fx.planted_offensive.find(l.video_id);
    if (it == t.fx.planted_offensive.end()) continue;
    CHECK_MESSAGE((l.label.value == lexicon::Verdict::Offensive) == it->second, l.video_id);
    ++checked;
  }
  CHECK(checked == 30);
}

TEST_CASE("training reaches full accuracy and records its evaluation") {
  const auto &ev = trained().artifacts->evaluation;
  CHECK(ev.at("ensemble").at("train_accuracy").get<double>() == 1.0);
  // baseline only needs to beat the majority class (50 of 90)
  CHECK(ev.at("baseline").at("train_accuracy").get<double>() > 0.6);
  CHECK(trained().artifacts->model_version.size() == 16);
}

TEST_CASE("scoring reproduces the planted percentages") {
  auto &t = trained();
  const auto ids = fixture_channels();
  const auto report = score_channels(*t.source, *t.artifacts, t.artifacts->lexicon, ids, kThreshold);
  CHECK(report.at("errors").empty());
  CHECK(report.at("model_version") == t.artifacts->model_version);
  REQUIRE(report.at("channels").size() == 3);
  for (const auto &ch : report.at("channels")) {
    const auto id = ch.at("channel_id").get<std::string>();
    CHECK_MESSAGE(ch.at("threat_percentage").get<double>() == t.fx.expected_percentage.at(id), id);
    CHECK(ch.at("n_videos") == 10);
  }
  CHECK(report_text(report).find("UCcharlie") != std::string::npos);
}

TEST_CASE("unknown channels become per-channel errors") {
  auto &t = trained();
  const std::vector<std::string> ids{"UCalpha", "UCmissing"};
  std::vector<std::size_t> progress;
  const auto report = score_channels(*t.source, *t.artifacts, t.artifacts->lexicon, ids, kThreshold,
                                     [&](std::size_t n) { progress.push_back(n); });
  CHECK(report.at("channels").size() == 1);
  REQUIRE(report.at("errors").size() == 1);
  CHECK(report.at("errors")[0].at("channel_id") == "UCmissing");
  CHECK(progress == std::vector<std::size_t>{1, 2});
}

TEST_CASE("channel statistics match sums over the records") {
  auto &t = trained();
  for (const std::string id : {"UCalpha", "UCbravo"}) {
    const auto videos = t.source->channel_videos(id);
    const auto r = score_channel(id, videos, *t.source, *t.artifacts, t.artifacts->lexicon, kThreshold);
    std::uint64_t likes = 0, dislikes = 0, views = 0, subs = 0;
    for (const auto &v : videos) {
      likes += v.likes.value_or(0);
      dislikes += v.dislikes.value_or(0);
      views += v.views.value_or(0);
      subs = std::max<std::uint64_t>(subs, v.subscribers.value_or(0));
    }
    CHECK(r.stats.total_likes == likes);
    CHECK(r.stats.total_dislikes == dislikes);
    CHECK(r.stats.total_views == views);
    CHECK(r.stats.total_subscribers == subs);
    if (dislikes == 0) {
      CHECK_FALSE(r.stats.likes_dislikes_ratio.has_value());
      CHECK(stats_json(r.stats).at("likes_dislikes_ratio").is_null());
    } else {
      CHECK(*r.stats.likes_dislikes_ratio == doctest::Approx(double(likes) / double(dislikes)).epsilon(1e-12));
    }
    double hi = -1, lo = 2;
    std::size_t flagged = 0;
    for (const auto &v : r.videos) {
      hi = std::max(hi, v.probability);
      lo = std::min(lo, v.probability);
      flagged += v.verdict == lexicon::Verdict::Offensive;
    }
    CHECK(r.stats.max_threat_probability == hi);
    CHECK(r.stats.min_threat_probability == lo);
    CHECK(r.flagged == flagged);
    CHECK(r.threat_percentage == 100.0 * double(flagged) / double(r.videos.size()));
    std::size_t term_total = 0;
    for (const auto &term : r.stats.top_terms) term_total += term.count;
    CHECK(term_total <= r.stats.total_matches);
    CHECK(r.stats.top_terms.size() <= kTopTerms);
    if (id == "UCbravo") CHECK(r.stats.top_terms.empty());
  }
}

TEST_CASE("video sentiment uses the first twenty comments only") {
  auto &t = trained();
  const auto *rec = t.source->find(t.fx.many_comments_video);
  REQUIRE(rec != nullptr);
  REQUIRE(rec->comments.size() == 25);
  const auto &stops = textprep::StopwordList::bundled();
  const auto p = prepare_video(*rec, *t.source, t.artifacts->bnb, stops);
  CHECK(p.raw.sentiment.n_comments_used == 20);
  double sum = 0.0;
  for (std::size_t i = 0; i < 20; ++i)
    sum += sentiment::bnb_posterior(textprep::prepare_text(rec->comments[i], stops), t.artifacts->bnb);
  CHECK(p.raw.sentiment.value == doctest::Approx(sum / 20.0).epsilon(1e-12));
}

TEST_CASE("artifacts reload to identical predictions") {
  auto &t = trained();
  const auto loaded = load_artifacts(t.model);
  CHECK(loaded.model_version == t.artifacts->model_version);
  const auto ids = fixture_channels();
  const auto a = score_channels(*t.source, *t.artifacts, t.artifacts->lexicon, ids, kThreshold);
  const auto b = score_channels(*t.source, loaded, loaded.lexicon, ids, kThreshold);
  CHECK(a.dump() == b.dump());
}

TEST_CASE("tampered artifacts are rejected") {
  auto &t = trained();
  const auto copy = testing::scratch_dir("tampered");
  fs::copy(t.model, copy, fs::copy_options::recursive | fs::copy_options::overwrite_existing);
  auto text = read_file(copy / "ensemble.json");
  text.insert(text.size() - 1, " ");
  write_file(copy / "ensemble.json", text);
  try {
    load_artifacts(copy);
    FAIL("expected a Format error");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::Format);
  }
  fs::remove(copy / "ensemble.json");
  CHECK_THROWS_AS(load_artifacts(copy), Error);
  fs::remove_all(copy);
}

TEST_CASE("training on one class fails with SingleClass") {
  auto &t = trained();
  LabelSet one = t.labels;
  for (auto &l : one.labels) l.label.value = lexicon::Verdict::NonOffensive;
  const auto out = testing::scratch_dir("single");
  try {
    run_training(*t.source, one, load_table(t.fx.embeddings), parse_training_options(read_file(t.fx.config)), out);
    FAIL("expected SingleClass");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::SingleClass);
  }
  fs::remove_all(out);
}

TEST_CASE("training options validate their fields") {
  CHECK_NOTHROW(parse_training_options("{}"));
  CHECK_THROWS_AS(parse_training_options("{\"train\":{\"epochs\":-1}}"), Error);
  CHECK_THROWS_AS(parse_training_options("[1]"), Error);
  const auto o = parse_training_options(read_file(trained().fx.config));
  CHECK(parse_training_options(encode(o).dump()).pca_components == o.pca_components);
}

TEST_CASE("test split is a stable hash of the id") {
  std::size_t in_test = 0;
  for (int i = 0; i < 2000; ++i) {
    const auto id = "vid" + std::to_string(i);
    CHECK(in_test_split(id, 7) == in_test_split(id, 7));
    in_test += in_test_split(id, 7);
  }
  CHECK(in_test > 300);
  CHECK(in_test < 500);
}

TEST_CASE("numeric pipeline output shape and scaling") {
  auto &t = trained();
  const auto &np = t.artifacts->numeric;
  CHECK(np.pca.dims == kRawNumericColumns);
  const auto &stops = textprep::StopwordList::bundled();
  std::vector<double> first;
  double sq = 0.0;
  std::size_t n = 0;
  for (const auto &rec : t.source->videos()) {
    const auto p = prepare_video(rec, *t.source, t.artifacts->bnb, stops);
    const auto out = apply_numeric(p.raw, np);
    REQUIRE(out.size() == np.pca.k + kFlagCount);
    for (double x : out) CHECK(std::isfinite(x));
    CHECK(out[out.size() - kFlagCount + kNoComments] == (rec.comments.empty() ? 1.0 : 0.0));
    CHECK(out[out.size() - kFlagCount + kVideoLevelMissing] == (rec.video_level ? 0.0 : 1.0));
    sq += out[0] * out[0];
    ++n;
  }
  // leading score has roughly unit scale after normalization
  CHECK(std::sqrt(sq / double(n)) > 0.3);
  CHECK(std::sqrt(sq / double(n)) < 3.0);
  CHECK_THROWS_AS(fit_numeric({}, 3), Error);
}
