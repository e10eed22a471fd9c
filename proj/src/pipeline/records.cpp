// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 The adgate Authors

#include "records.hpp"

#include <cmath>
#include <set>

#include "core/error.hpp"

namespace adgate::pipeline {

namespace {

[[noreturn]] void violation(const std::string &msg) { throw Error(ErrorCode::SchemaViolation, msg); }

bool id_chars(std::string_view id, std::size_t max_len, std::string_view extra) {
  if (id.empty() || id.size() > max_len) return false;
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
                    c == '-' || extra.find(c) != std::string_view::npos;
    if (!ok) return false;
  }
  return true;
}

std::string text_field(const io::Json &j, const char *key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return {};
  if (!it->is_string()) violation(std::string(key) + " must be a string");
  return it->get<std::string>();
}

std::optional<std::uint64_t> count_field(const io::Json &j, const char *key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (it->is_number_unsigned()) return it->get<std::uint64_t>();
  if (it->is_number_integer()) {
    const auto v = it->get<std::int64_t>();
    if (v < 0) violation(std::string(key) + " must be non-negative, got " + it->dump());
    return static_cast<std::uint64_t>(v);
  }
  if (it->is_number_float()) {
    const double v = it->get<double>();
    if (v < 0) violation(std::string(key) + " must be non-negative, got " + it->dump());
    if (v == std::floor(v) && v < 1.8e19) return static_cast<std::uint64_t>(v);
  }
  violation(std::string(key) + " must be a non-negative integer");
}

std::optional<std::vector<double>> block_field(const io::Json &j, const char *key, std::size_t dims) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_array() || it->size() != dims) {
    violation(std::string(key) + " must be an array of " + std::to_string(dims) + " numbers");
  }
  std::vector<double> out;
  out.reserve(dims);
  for (const auto &v : *it) {
    if (!v.is_number()) violation(std::string(key) + " must hold numbers only");
    out.push_back(v.get<double>());
  }
  return out;
}

std::optional<ThumbnailRef> thumbnail_field(const io::Json &j) {
  auto it = j.find("thumbnail");
  if (it == j.end() || it->is_null()) return std::nullopt;
  ThumbnailRef ref;
  if (it->is_string()) {
    ref.path = it->get<std::string>();
    if (ref.path.empty()) violation("thumbnail path is empty");
    return ref;
  }
  if (!it->is_object()) violation("thumbnail must be a path or a {width, height, pixels} object");
  features::GrayImage img;
  const auto w = it->find("width"), h = it->find("height"), p = it->find("pixels");
  if (w == it->end() || h == it->end() || p == it->end() || !io::is_count(*w) || !io::is_count(*h) ||
      !p->is_array()) {
    violation("thumbnail object needs unsigned width, height and a pixels array");
  }
  img.width = w->get<std::size_t>();
  img.height = h->get<std::size_t>();
  if (img.width == 0 || img.height == 0 || p->size() != img.width * img.height) {
    violation("thumbnail pixel count does not match width x height");
  }
  for (const auto &v : *p) {
    if (!v.is_number()) violation("thumbnail pixels must be numbers");
    const double x = v.get<double>();
    if (!(x >= 0.0 && x <= 1.0)) violation("thumbnail pixels must lie in [0, 1]");
    img.pixels.push_back(x);
  }
  ref.image = std::move(img);
  return ref;
}

}  // namespace

bool valid_video_id(std::string_view id) { return id_chars(id, 64, ""); }
bool valid_channel_id(std::string_view id) { return id_chars(id, 128, ".@"); }

VideoRecord record_from_json(const io::Json &j) {
  if (!j.is_object()) violation("record must be an object");
  VideoRecord r;
  r.video_id = text_field(j, "video_id");
  if (!valid_video_id(r.video_id)) violation("video_id '" + r.video_id + "' is missing or invalid");
  r.channel_id = text_field(j, "channel_id");
  if (!valid_channel_id(r.channel_id)) violation("channel_id '" + r.channel_id + "' is missing or invalid");
  r.title = text_field(j, "title");
  r.subtitle = text_field(j, "subtitle");
  r.description = text_field(j, "description");
  r.likes = count_field(j, "likes");
  r.dislikes = count_field(j, "dislikes");
  r.views = count_field(j, "views");
  r.subscribers = count_field(j, "subscribers");
  if (auto it = j.find("comments"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) violation("comments must be an array of strings");
    for (const auto &c : *it) {
      if (!c.is_string()) violation("comments must be an array of strings");
      r.comments.push_back(c.get<std::string>());
    }
  }
  r.thumbnail = thumbnail_field(j);
  r.video_level = block_field(j, "video_level", kVideoLevelDims);
  r.frame_level = block_field(j, "frame_level", kFrameLevelDims);
  return r;
}

io::Json record_to_json(const VideoRecord &r) {
  io::Json j = io::Json::object();
  j["video_id"] = r.video_id;
  j["channel_id"] = r.channel_id;
  j["title"] = r.title;
  j["subtitle"] = r.subtitle;
  j["description"] = r.description;
  auto count = [](const std::optional<std::uint64_t> &v) { return v ? io::Json(*v) : io::Json(nullptr); };
  j["likes"] = count(r.likes);
  j["dislikes"] = count(r.dislikes);
  j["views"] = count(r.views);
  j["subscribers"] = count(r.subscribers);
  j["comments"] = r.comments;
  if (!r.thumbnail) {
    j["thumbnail"] = nullptr;
  } else if (r.thumbnail->image) {
    const auto &img = *r.thumbnail->image;
    j["thumbnail"] = io::Json{{"width", img.width}, {"height", img.height}, {"pixels", io::real_array(img.pixels)}};
  } else {
    j["thumbnail"] = r.thumbnail->path;
  }
  j["video_level"] = r.video_level ? io::real_array(*r.video_level) : io::Json(nullptr);
  j["frame_level"] = r.frame_level ? io::real_array(*r.frame_level) : io::Json(nullptr);
  return j;
}

ParsedRecords parse_records(std::string_view content) {
  ParsedRecords out;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= content.size()) {
    auto nl = content.find('\n', pos);
    if (nl == std::string_view::npos) nl = content.size();
    auto line = content.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
      if (nl == content.size()) break;
      continue;
    }
    try {
      io::Json j;
      try {
        j = io::Json::parse(line);
      } catch (const nlohmann::json::parse_error &e) {
        violation(std::string("not valid JSON: ") + e.what());
      }
      auto rec = record_from_json(j);
      if (!seen.insert(rec.video_id).second) violation("duplicate video_id '" + rec.video_id + "'");
      out.records.push_back(std::move(rec));
    } catch (const Error &e) {
      out.diagnostics.push_back({line_no, e.what()});
    }
    if (nl == content.size()) break;
  }
  if (out.records.empty()) {
    std::string msg = "no valid records";
    if (!out.diagnostics.empty()) {
      msg += " (line " + std::to_string(out.diagnostics.front().line) + ": " + out.diagnostics.front().message + ")";
    }
    throw Error(ErrorCode::NoValidRecords, msg);
  }
  return out;
}

std::string serialize_records(const std::vector<VideoRecord> &records) {
  std::string out;
  for (const auto &r : records) {
    out += record_to_json(r).dump();
    out += '\n';
  }
  return out;
}

}  // namespace adgate::pipeline
