// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 The adgate Authors

#ifndef ADGATE_PIPELINE_STORE_HPP
#define ADGATE_PIPELINE_STORE_HPP

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "core/lexicon.hpp"
#include "records.hpp"

namespace adgate::pipeline {

namespace fs = std::filesystem;

std::string read_file(const fs::path &path);
/// Writes through a temporary file and rename.
void write_file(const fs::path &path, std::string_view content);

/// Where video records come from. Implementations must be safe for
/// concurrent readers.
class DataSource {
 public:
  virtual ~DataSource() = default;
  /// Every record, in stable order.
  virtual const std::vector<VideoRecord> &videos() const = 0;
  /// Records of one channel in stable order; empty when unknown.
  virtual std::vector<VideoRecord> channel_videos(std::string_view channel_id) const = 0;
  /// Decoded thumbnail, or nullopt when the record has none. Throws on
  /// unreadable or malformed images.
  virtual std::optional<features::GrayImage> thumbnail(const VideoRecord &record) const = 0;
};

/**
 * Directory-backed store:
 *   records.jsonl   one record per line, sorted by video_id
 *   thumbnails/     PGM files referenced as "thumbnails/<video_id>.pgm"
 *   labels.json     output of the label step
 */
class FixtureStore : public DataSource {
 public:
  /// Loads records.jsonl (an absent file means an empty store).
  static FixtureStore open(const fs::path &dir);

  const fs::path &dir() const noexcept { return dir_; }
  const std::vector<VideoRecord> &videos() const override { return records_; }
  std::vector<VideoRecord> channel_videos(std::string_view channel_id) const override;
  std::optional<features::GrayImage> thumbnail(const VideoRecord &record) const override;
  const VideoRecord *find(std::string_view video_id) const;

 private:
  fs::path dir_;
  std::vector<VideoRecord> records_;
};

struct IngestSummary {
  std::size_t added = 0;
  std::size_t replaced = 0;
  std::size_t total = 0;
  std::vector<std::pair<std::string, Diagnostic>> diagnostics;  // file, problem
};

/**
 * Parses each records file, copies referenced thumbnails into the store and
 * merges by video_id (a later record replaces an earlier one). Files with no
 * valid record contribute a diagnostic; NoValidRecords is thrown only when
 * nothing at all was ingested.
 */
IngestSummary ingest(const fs::path &store_dir, const std::vector<fs::path> &inputs);

struct VideoLabel {
  std::string video_id;
  lexicon::Label label;
};

struct LabelSet {
  double threshold = lexicon::kDefaultThreshold;
  std::string lexicon_text;  // normalized lexicon, one phrase per line
  std::vector<VideoLabel> labels;  // store order
};

void write_labels(const fs::path &store_dir, const LabelSet &labels);
/// Throws NotFound when the store has not been labeled.
LabelSet read_labels(const fs::path &store_dir);

/// Channel-list file: one id or URL per line, '#' comments. URLs reduce to
/// their trailing channel identifier. Throws InvalidChannelList.
std::vector<std::string> parse_channel_list(std::string_view content);

}  // namespace adgate::pipeline

#endif  // ADGATE_PIPELINE_STORE_HPP
