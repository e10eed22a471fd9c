// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 The adgate Authors

#ifndef ADGATE_TESTS_FIXTURE_HPP
#define ADGATE_TESTS_FIXTURE_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace adgate::testing {

namespace fs = std::filesystem;

struct ChannelPlan {
  std::string channel_id;
  std::size_t offensive = 0;  // planted offensive videos among videos_per_channel
};

struct FixtureOptions {
  std::vector<ChannelPlan> channels{{"UCalpha", 3}, {"UCbravo", 0}, {"UCcharlie", 7}};
  std::size_t videos_per_channel = 10;
  std::size_t training_videos = 60;  // unscreened channel, half offensive
  std::uint64_t seed = 11;
  std::size_t epochs = 300;
};

struct Fixture {
  fs::path root;
  fs::path records;     // records.jsonl referencing thumbs/*.pgm
  fs::path lexicon;     // vocabulary file
  fs::path embeddings;  // word vectors keyed by prepared tokens
  fs::path config;      // small training config
  fs::path channels;    // channel list, mixing ids and URLs
  std::map<std::string, double> expected_percentage;
  std::map<std::string, bool> planted_offensive;  // by video_id
  std::string many_comments_video;                // has 25 comments
  std::vector<std::string> many_comments;
};

/// Writes a deterministic synthetic corpus under root.
Fixture write_fixture(const fs::path &root, const FixtureOptions &opts = {});

/// Uniform [0, 1) from the top 53 bits; portable across standard libraries.
double unit_real(std::uint64_t bits);

/// Fresh empty directory under the system temp dir.
fs::path scratch_dir(const std::string &name);

}  // namespace adgate::testing

#endif  // ADGATE_TESTS_FIXTURE_HPP
