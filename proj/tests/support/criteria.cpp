// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 The adgate Authors

#include "criteria.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <csignal>
#include <cstdio>
#include <fcntl.h>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <spawn.h>
#include <sys/wait.h>
#include <thread>
#include <unistd.h>

#include <httplib.h>
#include <json.hpp>

#include "core/ensemble.hpp"
#include "core/error.hpp"
#include "core/features.hpp"
#include "core/lexicon.hpp"
#include "core/logistic.hpp"
#include "core/sentiment.hpp"
#include "core/textprep.hpp"
#include "core/vectorize.hpp"
#include "fixture.hpp"
#include "oracles.hpp"

extern char **environ;

namespace adgate::criteria {

namespace {

using Clock = std::chrono::steady_clock;
using Json = nlohmann::json;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char *f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

struct Rng {
  std::mt19937_64 gen;
  explicit Rng(std::uint64_t seed) : gen(seed) {}
  double uniform() { return testing::unit_real(gen()); }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(gen() % n); }
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * uniform());
  }
};

const std::vector<std::string> kAlphabet{"ab", "cd", "ef", "gh", "ij"};

Tokens random_tokens(Rng &rng, std::size_t max_len) {
  Tokens t(rng.below(max_len + 1));
  for (auto &x : t) x = kAlphabet[rng.below(kAlphabet.size())];
  return t;
}

std::vector<Tokens> random_phrases(Rng &rng, std::size_t max_phrases) {
  std::vector<Tokens> p(1 + rng.below(max_phrases));
  for (auto &ph : p) {
    ph.resize(1 + rng.below(3));
    for (auto &x : ph) x = kAlphabet[rng.below(kAlphabet.size())];
  }
  return p;
}

std::vector<Tokens> first_seen_unique(const std::vector<Tokens> &in) {
  std::vector<Tokens> out;
  for (const auto &p : in) {
    if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
  }
  return out;
}

std::string read_all(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

Result lexicon_oracle(std::size_t cases, std::uint64_t seed) {
  const auto t0 = Clock::now();
  Rng rng(seed);
  std::size_t match_failures = 0, ratio_failures = 0, total_matches = 0;
  double worst = 0.0;
  for (std::size_t c = 0; c < cases; ++c) {
    const auto phrases = random_phrases(rng, 15);
    const auto tokens = random_tokens(rng, 30);
    const auto lex = lexicon::OffensiveLexicon::from_phrases(phrases);
    const auto unique = first_seen_unique(phrases);
    if (lex.phrases() != unique) ++match_failures;
    std::vector<oracle::WindowMatch> got;
    for (const auto &m : lexicon::match_phrases(tokens, lex)) got.push_back({m.start, m.length, m.phrase_id});
    const auto want = oracle::window_scan(tokens, unique);
    total_matches += want.size();
    if (got != want) ++match_failures;
    const auto cov = lexicon::offensiveness_ratio(tokens, lex);
    const double err = std::abs(cov.ratio - oracle::covered_ratio(tokens, unique));
    worst = std::max(worst, err);
    if (err > kRatioTolerance || cov.insufficient_text != tokens.empty()) ++ratio_failures;
  }
  Result r;
  r.seconds = since(t0);
  r.pass = match_failures == 0 && ratio_failures == 0 && r.seconds < kLexiconSeconds;
  r.detail = std::to_string(cases) + " cases, " + std::to_string(total_matches) + " matches, " +
             std::to_string(match_failures) + " match mismatches, " + std::to_string(ratio_failures) +
             " ratio mismatches, worst ratio error " + fmt("%.3g", worst);
  return r;
}

Result monotonicity(std::size_t cases, std::uint64_t seed) {
  const auto t0 = Clock::now();
  Rng rng(seed);
  std::size_t growth_violations = 0, threshold_violations = 0;
  for (std::size_t c = 0; c < cases; ++c) {
    auto phrases = random_phrases(rng, 10);
    const auto tokens = random_tokens(rng, 30);
    const double before = lexicon::offensiveness_ratio(tokens, lexicon::OffensiveLexicon::from_phrases(phrases)).ratio;
    phrases.push_back(random_phrases(rng, 1).front());
    const double after = lexicon::offensiveness_ratio(tokens, lexicon::OffensiveLexicon::from_phrases(phrases)).ratio;
    if (after < before) ++growth_violations;
  }
  for (std::size_t c = 0; c < cases; ++c) {
    const auto tokens = random_tokens(rng, 30);
    const auto cov = lexicon::offensiveness_ratio(tokens, lexicon::OffensiveLexicon::from_phrases(random_phrases(rng, 5)));
    const double t = rng.below(4) == 0 ? cov.ratio : rng.uniform();
    // t' is either t itself, the ratio (boundary) or a larger random value.
    const double choices[3] = {t, std::max(t, cov.ratio), t + (1.0 - t) * rng.uniform()};
    const double t2 = choices[rng.below(3)];
    const auto a = lexicon::label(cov.ratio, t, cov.insufficient_text);
    const auto b = lexicon::label(cov.ratio, t2, cov.insufficient_text);
    if (a.value == lexicon::Verdict::NonOffensive && b.value != lexicon::Verdict::NonOffensive) ++threshold_violations;
  }
  Result r;
  r.seconds = since(t0);
  r.pass = growth_violations == 0 && threshold_violations == 0;
  r.detail = std::to_string(cases) + " growth cases (" + std::to_string(growth_violations) + " violations), " +
             std::to_string(cases) + " threshold cases (" + std::to_string(threshold_violations) + " violations)";
  return r;
}

Result tfidf_bnb_oracle(std::size_t corpora, std::uint64_t seed) {
  const auto t0 = Clock::now();
  Rng rng(seed);
  const std::vector<std::string> vocab{"apple", "berry", "cocoa", "date", "elder", "fig", "grape", "hazel", "iris",
                                       "jade"};
  auto doc = [&](std::size_t max_len, std::size_t v) {
    Tokens d(1 + rng.below(max_len));
    for (auto &x : d) x = vocab[rng.below(v)];
    return d;
  };
  double worst_tfidf = 0.0, worst_bnb = 0.0;
  for (std::size_t c = 0; c < corpora; ++c) {
    std::vector<Tokens> corpus(1 + rng.below(5));
    for (auto &d : corpus) d = doc(6, 8);
    const auto model = vectorize::fit_tfidf(corpus);
    auto probes = corpus;
    probes.push_back(doc(6, 10));  // may hold terms unseen at fit time
    for (const auto &p : probes) {
      const auto got = vectorize::tfidf_transform(p, model).to_dense();
      const auto want = oracle::tfidf(corpus, p);
      if (got.size() != want.size()) {
        worst_tfidf = INFINITY;
        continue;
      }
      for (std::size_t i = 0; i < got.size(); ++i) worst_tfidf = std::max(worst_tfidf, std::abs(got[i] - want[i]));
    }

    std::vector<std::pair<Tokens, int>> labeled(2 + rng.below(5));
    std::vector<sentiment::LabeledComment> comments;
    for (std::size_t i = 0; i < labeled.size(); ++i) {
      labeled[i] = {doc(5, 10), i < 2 ? static_cast<int>(i) : static_cast<int>(rng.below(2))};
      comments.push_back({labeled[i].first, labeled[i].second});
    }
    const auto nb = sentiment::train_bnb(comments);
    for (int p = 0; p < 4; ++p) {
      const auto probe = doc(5, 10);
      worst_bnb = std::max(worst_bnb,
                           std::abs(sentiment::bnb_posterior(probe, nb) - oracle::bernoulli_posterior(labeled, probe)));
    }
  }
  Result r;
  r.seconds = since(t0);
  r.pass = worst_tfidf <= kTfIdfTolerance && worst_bnb <= kBnbTolerance;
  r.detail = std::to_string(corpora) + " corpora, worst tf-idf error " + fmt("%.3g", worst_tfidf) +
             ", worst posterior error " + fmt("%.3g", worst_bnb);
  return r;
}

Result pca(std::size_t trials, std::uint64_t seed) {
  const auto t0 = Clock::now();
  Rng rng(seed);
  double ortho = 0.0, recon = 0.0, variance = 0.0, oracle_err = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t rows = t % 2 == 0 ? 6 : 8 + rng.below(12);
    const std::size_t cols = t % 2 == 0 ? 4 : 2 + rng.below(rows - 2);
    features::FeatureMatrix m(rows, cols);
    for (auto &x : m.data) x = rng.normal() * (1.0 + 3.0 * rng.uniform());
    const auto full = features::pca_fit(m, cols);
    for (std::size_t i = 0; i < cols; ++i) {
      for (std::size_t j = 0; j < cols; ++j) {
        double dot = 0.0;
        for (std::size_t d = 0; d < cols; ++d) dot += full.component(i)[d] * full.component(j)[d];
        ortho = std::max(ortho, std::abs(dot - (i == j ? 1.0 : 0.0)));
      }
    }
    const auto proj = features::pca_project(m, full);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t d = 0; d < cols; ++d) {
        double x = full.mean[d];
        for (std::size_t i = 0; i < cols; ++i) x += proj.data[r * cols + i] * full.component(i)[d];
        recon = std::max(recon, std::abs(x - m.data[r * cols + d]));
      }
    }
    for (std::size_t i = 0; i < cols; ++i) {
      double mean = 0.0, var = 0.0;
      for (std::size_t r = 0; r < rows; ++r) mean += proj.data[r * cols + i] / static_cast<double>(rows);
      for (std::size_t r = 0; r < rows; ++r) {
        var += std::pow(proj.data[r * cols + i] - mean, 2) / static_cast<double>(rows - 1);
      }
      variance = std::max(variance, std::abs(var - full.explained_variance[i]));
    }
    if (rows == 6 && cols == 4) {
      const auto [values, vectors] = oracle::jacobi_eigen(oracle::covariance(m.data, rows, cols), cols);
      const auto k2 = features::pca_fit(m, 2);
      for (std::size_t i = 0; i < 2; ++i) {
        auto v = vectors[i];
        const auto big = std::max_element(v.begin(), v.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
        if (*big < 0) {
          for (auto &x : v) x = -x;
        }
        oracle_err = std::max(oracle_err, std::abs(values[i] - k2.explained_variance[i]));
        for (std::size_t d = 0; d < cols; ++d) oracle_err = std::max(oracle_err, std::abs(v[d] - k2.component(i)[d]));
      }
    }
  }
  Result r;
  r.seconds = since(t0);
  r.pass = ortho <= kPcaTolerance && recon <= kPcaTolerance && variance <= kPcaVarianceTolerance &&
           oracle_err <= kPcaTolerance;
  r.detail = std::to_string(trials) + " matrices, orthonormality " + fmt("%.3g", ortho) + ", reconstruction " +
             fmt("%.3g", recon) + ", variance " + fmt("%.3g", variance) + ", eigen oracle " + fmt("%.3g", oracle_err);
  return r;
}

Result boxcox(std::uint64_t seed) {
  const auto t0 = Clock::now();
  Rng rng(seed);
  std::vector<double> x(1000);
  for (auto &v : x) v = std::exp(rng.normal());
  bool exact = true;
  const auto one = features::boxcox_apply(x, {1.0, 0.0});
  const auto zero = features::boxcox_apply(x, {0.0, 0.0});
  for (std::size_t i = 0; i < x.size(); ++i) {
    exact = exact && one[i] == x[i] - 1.0 && zero[i] == std::log(x[i]);
  }
  const auto fit = features::boxcox_fit(x);
  const double oracle_lambda = oracle::boxcox_grid_lambda(x, fit.shift);
  const auto y = features::boxcox_apply(x, fit);
  const double skew_before = oracle::skewness(x), skew_after = oracle::skewness(y);
  Result r;
  r.seconds = since(t0);
  r.pass = exact && std::abs(skew_after) < std::abs(skew_before) && std::abs(fit.lambda) <= kBoxCoxLambdaDistance &&
           fit.lambda == oracle_lambda;
  r.detail = std::string(exact ? "special cases exact" : "special cases differ") + ", lambda " +
             fmt("%.2f", fit.lambda) + " (grid oracle " + fmt("%.2f", oracle_lambda) + "), skewness " +
             fmt("%.3f", skew_before) + " -> " + fmt("%.3f", skew_after);
  return r;
}

namespace {

models::EnsembleConfig toy_config() {
  models::EnsembleConfig c;
  c.embed_dim = 3;
  c.gru_hidden = 4;
  c.attention_dim = 4;
  c.field_lengths = {5, 5, 5};
  c.cnn_filters = {2};
  c.cnn_kernel = 3;
  c.cnn_pool = 2;
  c.image_hidden = 3;
  c.numeric_dim = 6;
  c.numeric_hidden = 4;
  c.merge_hidden = 4;
  return c;
}

models::FeatureBundle toy_bundle(const models::EnsembleConfig &c, Rng &rng, std::array<std::size_t, 3> lens) {
  models::FeatureBundle b;
  for (std::size_t f = 0; f < 3; ++f) {
    auto &m = b.fields[f];
    m.rows = c.field_lengths[f];
    m.cols = c.embed_dim;
    m.valid_len = lens[f];
    m.data.assign(m.rows * m.cols, 0.0);
    for (std::size_t i = 0; i < lens[f] * m.cols; ++i) m.data[i] = rng.uniform() * 2.0 - 1.0;
  }
  for (std::size_t i = 0; i < c.numeric_dim; ++i) b.numeric.push_back(rng.uniform() * 2.0 - 1.0);
  for (std::size_t i = 0; i < c.image_side * c.image_side; ++i) b.image.push_back(rng.uniform());
  return b;
}

}  // namespace

Result gradient_check(std::uint64_t seed) {
  const auto t0 = Clock::now();
  const auto c = toy_config();
  Rng rng(seed);
  const std::vector<models::FeatureBundle> batch{toy_bundle(c, rng, {3, 5, 2}), toy_bundle(c, rng, {1, 0, 4}),
                                                 toy_bundle(c, rng, {5, 2, 1})};
  const std::vector<int> labels{1, 0, 1};
  auto model = models::EnsembleModel::initialize(c, seed);
  // Perturb biases too so every activation path carries gradient.
  for (auto &p : model.parameters()) {
    for (auto &x : p.value.data) x += 0.1 * (rng.uniform() - 0.5);
  }
  const auto analytic = models::ensemble_loss_grad(batch, labels, model);
  const double eps = 1e-6;
  double worst = 0.0;
  std::string worst_at;
  std::size_t checked = 0;
  for (std::size_t p = 0; p < model.parameters().size(); ++p) {
    auto &value = model.parameters()[p].value;
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double saved = value[i];
      value[i] = saved + eps;
      const double up = models::ensemble_loss_grad(batch, labels, model).loss;
      value[i] = saved - eps;
      const double down = models::ensemble_loss_grad(batch, labels, model).loss;
      value[i] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double a = analytic.gradients[p][i];
      const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-6});
      ++checked;
      if (rel > worst) {
        worst = rel;
        worst_at = model.parameters()[p].name;
      }
    }
  }
  Result r;
  r.seconds = since(t0);
  r.pass = worst < kGradientTolerance && r.seconds < kGradientSeconds;
  r.detail = std::to_string(model.parameters().size()) + " tensors, " + std::to_string(checked) +
             " entries, worst relative error " + fmt("%.3g", worst) + " (" + worst_at + ")";
  return r;
}

Result capacity(std::uint64_t seed) {
  const auto t0 = Clock::now();
  Rng rng(seed);
  // Logistic regression: 200 points split by a hyperplane with a margin.
  features::FeatureMatrix x(200, 5);
  std::vector<int> y;
  for (std::size_t r = 0; r < 200; ++r) {
    double s;
    do {
      for (std::size_t d = 0; d < 5; ++d) x.data[r * 5 + d] = rng.uniform() * 2.0 - 1.0;
      s = x.data[r * 5] + 0.5 * x.data[r * 5 + 1] - 0.25 * x.data[r * 5 + 4] + 0.1;
    } while (std::abs(s) < 0.05);
    y.push_back(s > 0 ? 1 : 0);
  }
  models::TrainConfig lr_cfg;
  lr_cfg.learning_rate = 0.5;
  lr_cfg.epochs = 300;
  const double lr_acc = models::lr_accuracy(x, y, models::lr_train(x, y, lr_cfg));

  // Ensemble: 20 samples whose labels are a function of the text only.
  auto c = toy_config();
  std::vector<models::FeatureBundle> xs;
  std::vector<int> ys;
  for (int n = 0; n < 20; ++n) {
    auto b = toy_bundle(c, rng, {3, 2, 4});
    const int label = n % 2;
    for (std::size_t t = 0; t < 3; ++t) b.fields[0].data[t * c.embed_dim] = label ? 1.0 : -1.0;
    xs.push_back(std::move(b));
    ys.push_back(label);
  }
  models::TrainConfig t;
  t.learning_rate = 0.05;
  t.epochs = kEnsembleEpochBudget;
  t.batch_size = 4;
  t.seed = seed;
  std::size_t reached = 0;
  models::train_ensemble(xs, ys, c, t, [&](std::size_t epoch, double, const models::EnsembleModel &m) {
    if (models::evaluate(xs, ys, m) == 1.0) {
      reached = epoch + 1;
      return false;
    }
    return true;
  });
  Result r;
  r.seconds = since(t0);
  r.pass = lr_acc >= kBaselineAccuracy && reached > 0 && reached <= kEnsembleEpochBudget && r.seconds < kCapacitySeconds;
  r.detail = "baseline train accuracy " + fmt("%.3f", lr_acc) + ", ensemble " +
             (reached ? "reached 100% at epoch " + std::to_string(reached) : std::string("never reached 100%"));
  return r;
}

int run_process(const std::vector<std::string> &argv, const fs::path &out_path) {
  std::vector<char *> args;
  for (const auto &a : argv) args.push_back(const_cast<char *>(a.c_str()));
  args.push_back(nullptr);
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  if (!out_path.empty()) {
    posix_spawn_file_actions_addopen(&actions, STDOUT_FILENO, out_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  } else {
    posix_spawn_file_actions_addopen(&actions, STDOUT_FILENO, "/dev/null", O_WRONLY, 0);
  }
  pid_t pid;
  const int rc = posix_spawn(&pid, args[0], &actions, nullptr, args.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  if (rc != 0) return -1;
  int status = 0;
  waitpid(pid, &status, 0);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

namespace {

struct Layout {
  fs::path fixture, store, model_a, model_b, report_a, report_b;
  explicit Layout(const fs::path &work)
      : fixture(work / "fixture"),
        store(work / "store"),
        model_a(work / "model_a"),
        model_b(work / "model_b"),
        report_a(work / "report_a.json"),
        report_b(work / "report_b.json") {}
};

constexpr const char *kThreshold = "0.02";

}  // namespace

Result end_to_end(const Paths &paths) {
  const auto t0 = Clock::now();
  Result r;
  const Layout l(paths.work);
  fs::remove_all(paths.work);
  fs::create_directories(paths.work);
  const auto fx = testing::write_fixture(l.fixture);
  const std::string cli = paths.cli.string();
  auto step = [&](std::vector<std::string> args, const fs::path &out = {}) {
    args.insert(args.begin(), cli);
    const int rc = run_process(args, out);
    if (rc != 0) throw std::runtime_error("'" + args[1] + "' exited with " + std::to_string(rc));
  };
  try {
    step({"ingest", "--records", fx.records.string(), "--store", l.store.string()});
    step({"label", "--store", l.store.string(), "--lexicon", fx.lexicon.string(), "--threshold", kThreshold});
    for (const auto &model : {l.model_a, l.model_b}) {
      step({"train", "--store", l.store.string(), "--embeddings", fx.embeddings.string(), "--config",
            fx.config.string(), "--out", model.string()});
    }
    step({"score", "--store", l.store.string(), "--model", l.model_a.string(), "--channels", fx.channels.string(),
          "--threshold", kThreshold, "--out", l.report_a.string()});
    step({"score", "--store", l.store.string(), "--model", l.model_b.string(), "--channels", fx.channels.string(),
          "--threshold", kThreshold, "--out", l.report_b.string()});
  } catch (const std::exception &e) {
    r.detail = e.what();
    r.seconds = since(t0);
    return r;
  }
  const auto text_a = read_all(l.report_a), text_b = read_all(l.report_b);
  const bool identical = !text_a.empty() && text_a == text_b;
  const auto report = Json::parse(text_a);

  bool percentages = report.at("channels").size() == fx.expected_percentage.size() && report.at("errors").empty();
  std::string observed;
  for (const auto &ch : report.at("channels")) {
    const auto id = ch.at("channel_id").get<std::string>();
    const double pct = ch.at("threat_percentage").get<double>();
    const double tenth = pct / 10.0;
    percentages = percentages && tenth == std::floor(tenth) && pct >= 0.0 && pct <= 100.0 &&
                  fx.expected_percentage.count(id) && fx.expected_percentage.at(id) == pct;
    observed += (observed.empty() ? "" : " ") + id + "=" + fmt("%g", pct);
  }

  // Sentiment over the long comment thread: exactly the first 20 count.
  bool twenty = false;
  std::string sentiment_note = "video with 25 comments not found";
  const auto &stops = textprep::StopwordList::bundled();
  const auto bnb =
      sentiment::train_bnb(sentiment::prepare_corpus(sentiment::parse_corpus(sentiment::bundled_corpus()), stops));
  for (const auto &ch : report.at("channels")) {
    for (const auto &v : ch.at("videos")) {
      if (v.at("video_id") != fx.many_comments_video) continue;
      double first20 = 0.0, all25 = 0.0;
      for (std::size_t i = 0; i < fx.many_comments.size(); ++i) {
        const double p = sentiment::bnb_posterior(textprep::prepare_text(fx.many_comments[i], stops), bnb);
        if (i < 20) first20 += p / 20.0;
        all25 += p / static_cast<double>(fx.many_comments.size());
      }
      const auto used = v.at("sentiment").at("comments_used").get<std::size_t>();
      const double value = v.at("sentiment").at("value").get<double>();
      twenty = fx.many_comments.size() == 25 && used == 20 && std::abs(value - first20) <= 1e-12 &&
               std::abs(first20 - all25) > 1e-9;
      sentiment_note = "25-comment video used " + std::to_string(used) + " (value " + fmt("%.6f", value) +
                       ", first-20 mean " + fmt("%.6f", first20) + ", all-25 mean " + fmt("%.6f", all25) + ")";
    }
  }
  r.seconds = since(t0);
  r.pass = identical && percentages && twenty;
  r.detail = observed + "; reports " + (identical ? "byte-identical" : "differ") + "; " + sentiment_note;
  return r;
}

namespace {

struct Server {
  pid_t pid = -1;
  int port = 0;

  Server(const std::vector<std::string> &argv) {
    int fds[2];
    if (pipe(fds) != 0) return;
    std::vector<char *> args;
    for (const auto &a : argv) args.push_back(const_cast<char *>(a.c_str()));
    args.push_back(nullptr);
    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, fds[1], STDOUT_FILENO);
    posix_spawn_file_actions_addclose(&actions, fds[0]);
    if (posix_spawn(&pid, args[0], &actions, nullptr, args.data(), environ) != 0) pid = -1;
    posix_spawn_file_actions_destroy(&actions);
    close(fds[1]);
    std::string line;
    char ch;
    while (pid > 0 && read(fds[0], &ch, 1) == 1) {
      if (ch != '\n') {
        line += ch;
        continue;
      }
      const auto colon = line.rfind(':');
      if (line.rfind("listening on ", 0) == 0 && colon != std::string::npos) {
        port = std::stoi(line.substr(colon + 1));
        break;
      }
      line.clear();
    }
    close(fds[0]);
  }

  int stop() {
    if (pid <= 0) return -1;
    kill(pid, SIGTERM);
    int status = 0;
    waitpid(pid, &status, 0);
    pid = -1;
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  ~Server() {
    if (pid > 0) stop();
  }
};

int state_rank(const std::string &s) {
  if (s == "queued") return 0;
  if (s == "running") return 1;
  if (s == "done" || s == "failed") return 2;
  return -1;
}

bool has_secondary_artifacts(const fs::path &build_dir) {
  if (build_dir.empty() || !fs::exists(build_dir)) return false;
  for (auto it = fs::recursive_directory_iterator(build_dir); it != fs::recursive_directory_iterator(); ++it) {
    const auto name = it->path().filename().string();
    if (name == "node_modules" || name == "package.json" || name == "index.html") return true;
  }
  return false;
}

}  // namespace

Result service_parity(const Paths &paths) {
  const auto t0 = Clock::now();
  Result r;
  const Layout l(paths.work);
  if (!fs::exists(l.report_a)) {
    r.detail = "no CLI report to compare against";
    return r;
  }
  const auto cli_report = Json::parse(read_all(l.report_a));
  Server server({paths.cli.string(), "serve", "--store", l.store.string(), "--model", l.model_a.string(), "--port",
                 "0", "--workers", "1"});
  if (server.port == 0) {
    r.detail = "service did not report a listening port";
    return r;
  }
  httplib::Client client("127.0.0.1", server.port);
  client.set_read_timeout(30, 0);
  httplib::MultipartFormDataItems form{
      {"lexicon", read_all(l.fixture / "lexicon.txt"), "lexicon.txt", "text/plain"},
      {"channels", read_all(l.fixture / "channels.txt"), "channels.txt", "text/plain"},
      {"threshold", kThreshold, "", ""},
  };
  auto posted = client.Post("/api/jobs", form);
  if (!posted || posted->status != 202) {
    r.detail = "job submission failed";
    return r;
  }
  const auto job_id = Json::parse(posted->body).at("job_id").get<std::string>();

  std::vector<std::string> states;
  bool legal = true;
  for (int i = 0; i < 6000; ++i) {
    auto res = client.Get("/api/jobs/" + job_id);
    if (!res || res->status != 200) {
      legal = false;
      break;
    }
    const auto state = Json::parse(res->body).at("state").get<std::string>();
    if (states.empty() || states.back() != state) states.push_back(state);
    if (state_rank(state) == 2) break;
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (state_rank(states[i]) < 0 || (i > 0 && state_rank(states[i]) <= state_rank(states[i - 1]))) legal = false;
  }
  legal = legal && !states.empty() && states.back() == "done";

  // The ledger must show the same lifecycle in order.
  std::vector<std::string> events;
  {
    std::ifstream in(l.store / "jobs.jsonl");
    std::string line;
    while (std::getline(in, line)) {
      const auto ev = Json::parse(line);
      if (ev.at("job_id") == job_id) events.push_back(ev.at("event").get<std::string>());
    }
  }
  legal = legal && events == std::vector<std::string>{"submitted", "running", "done"};

  bool equal = false;
  std::string compared;
  auto report = client.Get("/api/jobs/" + job_id + "/report");
  if (report && report->status == 200) {
    const auto body = Json::parse(report->body);
    equal = body.at("channels") == cli_report.at("channels") && body.at("errors") == cli_report.at("errors");
    for (const auto &ch : body.at("channels")) {
      const auto id = ch.at("channel_id").get<std::string>();
      bool found = false;
      for (const auto &c2 : cli_report.at("channels")) {
        if (c2.at("channel_id") == id) {
          found = c2.at("threat_percentage").get<double>() == ch.at("threat_percentage").get<double>();
        }
      }
      equal = equal && found;
      compared += (compared.empty() ? "" : " ") + id + "=" + fmt("%g", ch.at("threat_percentage").get<double>());
    }
  }
  auto root = client.Get("/");
  const bool no_secondary = root && root->status == 404 && !has_secondary_artifacts(paths.build_dir);
  const int exit_code = server.stop();

  std::string seq;
  for (const auto &s : states) seq += (seq.empty() ? "" : "->") + s;
  r.seconds = since(t0);
  r.pass = equal && legal && no_secondary && exit_code == 0;
  r.detail = "service " + compared + (equal ? " equals CLI" : " differs from CLI") + "; states " + seq +
             (legal ? " (legal)" : " (illegal)") + "; " + (no_secondary ? "no dashboard built" : "dashboard present") +
             "; clean shutdown " + (exit_code == 0 ? "yes" : "no");
  return r;
}

}  // namespace adgate::criteria
