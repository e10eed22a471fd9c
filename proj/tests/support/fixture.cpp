// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 The adgate Authors

#include "fixture.hpp"

#include <fstream>
#include <random>
#include <set>
#include <unistd.h>

#include <json.hpp>

#include "core/features.hpp"
#include "core/textprep.hpp"

namespace adgate::testing {

namespace {

const std::vector<std::string> kClean{"garden", "recipe", "travel",  "guitar",  "puppy",   "sunset",  "coffee",
                                      "painting", "mountain", "river", "bakery", "piano",   "kitten",  "harvest",
                                      "picnic",  "festival", "library", "bicycle", "ocean",  "violin"};
const std::vector<std::string> kOffensive{"bomb", "massacre", "extremist", "weapon", "riot", "brutal"};
const std::vector<std::string> kHarsh{"you are a disgusting idiot", "worst trash ever, pathetic",
                                      "hateful garbage channel", "stupid and vile"};
const std::vector<std::string> kDecent{"lovely video, thank you", "great recipe, very helpful",
                                       "beautiful sunset shot", "wonderful music and calm"};

void write(const fs::path &p, const std::string &content) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << content;
}

}  // namespace

double unit_real(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

fs::path scratch_dir(const std::string &name) {
  auto dir = fs::temp_directory_path() / ("adgate_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Fixture write_fixture(const fs::path &root, const FixtureOptions &opts) {
  Fixture fx;
  fx.root = root;
  fs::create_directories(root);
  std::mt19937_64 gen(opts.seed);
  auto uniform = [&] { return unit_real(gen()); };
  auto pick = [&](const std::vector<std::string> &v) { return v[gen() % v.size()]; };
  const auto &stops = textprep::StopwordList::bundled();

  // Vocabulary file: single words and one two-word phrase.
  fx.lexicon = root / "lexicon.txt";
  std::string lex = "# synthetic vocabulary\n";
  for (const auto &w : kOffensive) lex += w + "\n";
  lex += "Hate  Crime\n";
  write(fx.lexicon, lex);

  // Word vectors keyed by prepared tokens: offensive words point along axis
  // 0, clean words along axis 1, everything else is random and small.
  const std::size_t dim = 8;
  std::set<std::string> written;
  std::string emb;
  auto add_vec = [&](const std::string &surface, int axis) {
    for (const auto &tok : textprep::prepare_text(surface, stops)) {
      if (!written.insert(tok).second) continue;
      emb += tok;
      for (std::size_t d = 0; d < dim; ++d) {
        double v = (uniform() - 0.5) * 0.2;
        if (static_cast<int>(d) == axis) v += 1.0;
        char buf[32];
        std::snprintf(buf, sizeof buf, " %.6f", v);
        emb += buf;
      }
      emb += '\n';
    }
  };
  for (const auto &w : kOffensive) add_vec(w, 0);
  add_vec("hate crime", 0);
  for (const auto &w : kClean) add_vec(w, 1);
  for (const auto &c : kHarsh) add_vec(c, -1);
  for (const auto &c : kDecent) add_vec(c, -1);
  fx.embeddings = root / "embeddings.txt";
  write(fx.embeddings, emb);

  std::string records;
  std::string channel_list = "# channels to screen\n";
  std::size_t channel_no = 0;
  // The extra channel only widens the training set; it is never screened.
  auto plans = opts.channels;
  if (opts.training_videos > 0) plans.push_back({"UCtraining", opts.training_videos / 2});
  for (const auto &plan : plans) {
    const bool screened = channel_no < opts.channels.size();
    const std::size_t n_videos = screened ? opts.videos_per_channel : opts.training_videos;
    if (screened) {
      channel_list += channel_no % 2 == 0 ? plan.channel_id + "\n"
                                          : "https://www.youtube.com/channel/" + plan.channel_id + "/videos\n";
      fx.expected_percentage[plan.channel_id] =
          100.0 * static_cast<double>(plan.offensive) / static_cast<double>(n_videos);
    }
    const std::uint64_t subscribers = 1000 * (channel_no + 1) + gen() % 500;
    for (std::size_t v = 0; v < n_videos; ++v) {
      const bool offensive = screened ? v < plan.offensive : v % 2 == 0;
      char idbuf[64];
      std::snprintf(idbuf, sizeof idbuf, "%s_v%02zu", plan.channel_id.c_str() + 2, v);
      const std::string id = idbuf;
      if (screened) fx.planted_offensive[id] = offensive;

      // Only the text carries the label; counts, blocks and thumbnails are noise.
      // Text: clean words with 3 planted hits for offensive videos, so the
      // lexicon ratio is at least 3/14 against a 0.02 threshold.
      std::vector<std::string> title, desc;
      for (int i = 0; i < 4; ++i) title.push_back(pick(kClean));
      for (int i = 0; i < 10; ++i) desc.push_back(pick(kClean));
      if (offensive) {
        title[1] = pick(kOffensive);
        desc[3] = pick(kOffensive);
        if (v % 2 == 0) {
          desc[6] = "hate";
          desc[7] = "crime";
        } else {
          desc[7] = pick(kOffensive);
        }
      }
      auto joined = [](const std::vector<std::string> &w) {
        std::string s;
        for (const auto &x : w) s += (s.empty() ? "" : " ") + x;
        return s;
      };
      nlohmann::ordered_json r;
      r["video_id"] = id;
      r["channel_id"] = plan.channel_id;
      r["title"] = joined(title) + (offensive ? "!!" : "");
      r["subtitle"] = v % 3 == 0 ? "" : (offensive ? pick(kOffensive) : pick(kClean)) + " " + pick(kClean);
      r["description"] = joined(desc);
      if (v % 4 != 3) {
        r["likes"] = 100 + gen() % 900;
        r["dislikes"] = plan.offensive == 0 ? 0 : gen() % 60;
      }
      r["views"] = 5000 + gen() % 50000;
      r["subscribers"] = subscribers;
      std::vector<std::string> comments;
      std::size_t n_comments = v % 5 == 4 ? 0 : 3;
      if (channel_no == 0 && v == 0) n_comments = 25;
      for (std::size_t c = 0; c < n_comments; ++c) {
        comments.push_back(gen() % 2 == 0 ? pick(kHarsh) : pick(kDecent));
      }
      if (n_comments == 25) {
        fx.many_comments_video = id;
        fx.many_comments = comments;
      }
      r["comments"] = comments;
      if (v % 3 == 0) {
        features::GrayImage img{40, 30, {}};
        img.pixels.assign(40 * 30, 0.4);
        write(root / "thumbs" / (id + ".pgm"), features::write_pgm(img));
        r["thumbnail"] = "thumbs/" + id + ".pgm";
      } else if (v % 3 == 1) {
        r["thumbnail"] = {{"width", 6}, {"height", 6}, {"pixels", std::vector<double>(36, 0.4)}};
      }
      if (v % 2 == 0) {
        std::vector<double> vl(1080);
        for (std::size_t i = 0; i < vl.size(); ++i) vl[i] = static_cast<double>(i % 7) / 7.0;
        r["video_level"] = vl;
      }
      if (v % 3 != 2) {
        std::vector<double> fl(256);
        for (std::size_t i = 0; i < fl.size(); ++i) fl[i] = static_cast<double>(i % 5) / 5.0;
        r["frame_level"] = fl;
      }
      records += r.dump() + "\n";
    }
    ++channel_no;
  }
  fx.records = root / "records.jsonl";
  write(fx.records, records);
  fx.channels = root / "channels.txt";
  write(fx.channels, channel_list);

  nlohmann::ordered_json cfg;
  cfg["ensemble"] = {{"gru_hidden", 8},   {"attention_dim", 8},  {"field_lengths", {8, 6, 16}},
                     {"cnn_filters", {2}}, {"cnn_kernel", 3},     {"cnn_pool", 2},
                     {"image_hidden", 4},  {"numeric_hidden", 8}, {"merge_hidden", 8}};
  cfg["train"] = {{"learning_rate", 0.03}, {"epochs", opts.epochs}, {"batch_size", 8}, {"seed", opts.seed}};
  cfg["baseline"] = {{"learning_rate", 0.5}, {"epochs", 200}};
  cfg["pca_components"] = 10;
  fx.config = root / "config.json";
  write(fx.config, cfg.dump(2) + "\n");
  return fx;
}

}  // namespace adgate::testing
