// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 The adgate Authors

#ifndef ADGATE_PIPELINE_RECORDS_HPP
#define ADGATE_PIPELINE_RECORDS_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "core/features.hpp"
#include "core/model_io.hpp"

namespace adgate::pipeline {

inline constexpr std::size_t kVideoLevelDims = 1080;
inline constexpr std::size_t kFrameLevelDims = 256;

/// Either a PGM path (relative to the file or store that holds the record)
/// or inline pixels.
struct ThumbnailRef {
  std::string path;
  std::optional<features::GrayImage> image;
};

struct VideoRecord {
  std::string video_id;
  std::string channel_id;
  std::string title;
  std::string subtitle;
  std::string description;
  std::optional<std::uint64_t> likes;
  std::optional<std::uint64_t> dislikes;
  std::optional<std::uint64_t> views;
  std::optional<std::uint64_t> subscribers;
  std::vector<std::string> comments;
  std::optional<ThumbnailRef> thumbnail;
  std::optional<std::vector<double>> video_level;
  std::optional<std::vector<double>> frame_level;
};

/// Video ids: 1..64 characters from [A-Za-z0-9_-].
bool valid_video_id(std::string_view id);
/// Channel ids: 1..128 characters from [A-Za-z0-9_.@-].
bool valid_channel_id(std::string_view id);

struct Diagnostic {
  std::size_t line = 0;
  std::string message;
};

struct ParsedRecords {
  std::vector<VideoRecord> records;
  std::vector<Diagnostic> diagnostics;
};

/// Throws Error(SchemaViolation) describing the first problem.
VideoRecord record_from_json(const io::Json &j);
io::Json record_to_json(const VideoRecord &r);

/**
 * One JSON object per line; blank lines are skipped. Bad lines (including a
 * repeated video_id) are reported in diagnostics and skipped. Throws
 * NoValidRecords when nothing parses.
 */
ParsedRecords parse_records(std::string_view content);

/// Inverse of parse_records for valid records.
std::string serialize_records(const std::vector<VideoRecord> &records);

}  // namespace adgate::pipeline

#endif  // ADGATE_PIPELINE_RECORDS_HPP
