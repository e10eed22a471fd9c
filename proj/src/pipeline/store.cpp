// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 The adgate Authors

#include "store.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <set>
#include <sstream>
#include <unistd.h>

#include "core/error.hpp"
#include "core/textprep.hpp"

namespace adgate::pipeline {

namespace {

constexpr const char *kRecordsFile = "records.jsonl";
constexpr const char *kThumbDir = "thumbnails";
constexpr const char *kLabelsFile = "labels.json";

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::string read_file(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::Io, "failed reading " + path.string());
  return std::move(ss).str();
}

void write_file(const fs::path &path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp" + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::Io, "failed writing " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot replace " + path.string() + ": " + ec.message());
}

// -- FixtureStore -------------------------------------------------------------

FixtureStore FixtureStore::open(const fs::path &dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw Error(ErrorCode::Io, "store directory " + dir.string() + " does not exist");
  FixtureStore s;
  s.dir_ = dir;
  const auto file = dir / kRecordsFile;
  if (fs::exists(file, ec)) {
    const auto content = read_file(file);
    if (content.find_first_not_of(" \t\r\n") != std::string::npos) {
      auto parsed = parse_records(content);
      if (!parsed.diagnostics.empty()) {
        const auto &d = parsed.diagnostics.front();
        throw Error(ErrorCode::SchemaViolation,
                    file.string() + " line " + std::to_string(d.line) + ": " + d.message);
      }
      s.records_ = std::move(parsed.records);
    }
  }
  return s;
}

std::vector<VideoRecord> FixtureStore::channel_videos(std::string_view channel_id) const {
  std::vector<VideoRecord> out;
  for (const auto &r : records_) {
    if (r.channel_id == channel_id) out.push_back(r);
  }
  return out;
}

const VideoRecord *FixtureStore::find(std::string_view video_id) const {
  auto it = std::lower_bound(records_.begin(), records_.end(), video_id,
                             [](const VideoRecord &r, std::string_view id) { return r.video_id < id; });
  return it != records_.end() && it->video_id == video_id ? &*it : nullptr;
}

std::optional<features::GrayImage> FixtureStore::thumbnail(const VideoRecord &record) const {
  if (!record.thumbnail) return std::nullopt;
  if (record.thumbnail->image) return record.thumbnail->image;
  const fs::path rel(record.thumbnail->path);
  if (rel.is_absolute() || std::any_of(rel.begin(), rel.end(), [](const fs::path &p) { return p == ".."; })) {
    throw Error(ErrorCode::Format, "thumbnail path '" + record.thumbnail->path + "' escapes the store");
  }
  return features::read_pgm(read_file(dir_ / rel));
}

// -- ingest --------------------------------------------------------------------

IngestSummary ingest(const fs::path &store_dir, const std::vector<fs::path> &inputs) {
  if (inputs.empty()) throw Error(ErrorCode::InvalidArgument, "no records files given");
  fs::create_directories(store_dir);
  auto store = FixtureStore::open(store_dir);
  std::map<std::string, VideoRecord, std::less<>> merged;
  for (const auto &r : store.videos()) merged.emplace(r.video_id, r);

  IngestSummary summary;
  std::size_t ingested = 0;
  std::map<std::string, std::string> pending_thumbs;  // store-relative target -> PGM bytes
  for (const auto &file : inputs) {
    ParsedRecords parsed;
    try {
      parsed = parse_records(read_file(file));
    } catch (const Error &e) {
      if (e.code() != ErrorCode::NoValidRecords) throw;
      summary.diagnostics.push_back({file.string(), {0, e.what()}});
      continue;
    }
    for (auto &d : parsed.diagnostics) summary.diagnostics.push_back({file.string(), std::move(d)});
    const auto base = file.parent_path();
    for (auto &rec : parsed.records) {
      if (rec.thumbnail && !rec.thumbnail->image) {
        const fs::path src = fs::path(rec.thumbnail->path).is_absolute() ? fs::path(rec.thumbnail->path)
                                                                          : base / rec.thumbnail->path;
        std::string bytes;
        try {
          bytes = read_file(src);
          (void)features::read_pgm(bytes);
        } catch (const Error &e) {
          summary.diagnostics.push_back(
              {file.string(), {0, "video " + rec.video_id + ": thumbnail " + src.string() + ": " + e.what()}});
          continue;
        }
        rec.thumbnail->path = std::string(kThumbDir) + "/" + rec.video_id + ".pgm";
        pending_thumbs[rec.thumbnail->path] = std::move(bytes);
      }
      auto [it, added] = merged.try_emplace(rec.video_id);
      if (added) {
        ++summary.added;
      } else {
        ++summary.replaced;
      }
      it->second = std::move(rec);
      ++ingested;
    }
  }
  if (ingested == 0) throw Error(ErrorCode::NoValidRecords, "no valid records in the given files");
  for (const auto &[rel, bytes] : pending_thumbs) write_file(store_dir / rel, bytes);
  std::vector<VideoRecord> all;
  all.reserve(merged.size());
  for (auto &[id, r] : merged) all.push_back(std::move(r));
  summary.total = all.size();
  write_file(store_dir / kRecordsFile, serialize_records(all));
  return summary;
}

// -- labels ----------------------------------------------------------------------

void write_labels(const fs::path &store_dir, const LabelSet &labels) {
  io::Json j = io::header("labels");
  j["threshold"] = labels.threshold;
  j["lexicon"] = labels.lexicon_text;
  io::Json arr = io::Json::array();
  for (const auto &l : labels.labels) {
    io::Json e = io::Json::object();
    e["video_id"] = l.video_id;
    e["label"] = lexicon::verdict_name(l.label.value);
    e["ratio"] = l.label.ratio;
    e["insufficient_text"] = l.label.insufficient_text;
    arr.push_back(std::move(e));
  }
  j["labels"] = std::move(arr);
  write_file(store_dir / kLabelsFile, j.dump(2) + "\n");
}

LabelSet read_labels(const fs::path &store_dir) {
  const auto file = store_dir / kLabelsFile;
  std::error_code ec;
  if (!fs::exists(file, ec)) {
    throw Error(ErrorCode::NotFound, "store " + store_dir.string() + " has no labels; run the label step first");
  }
  const auto j = io::parse_json(read_file(file), file.string());
  io::check_header(j, "labels");
  LabelSet out;
  try {
    out.threshold = j.at("threshold").get<double>();
    out.lexicon_text = j.at("lexicon").get<std::string>();
    for (const auto &e : j.at("labels")) {
      VideoLabel l;
      l.video_id = e.at("video_id").get<std::string>();
      const auto name = e.at("label").get<std::string>();
      if (name != "offensive" && name != "non_offensive") throw Error(ErrorCode::Format, "unknown label " + name);
      l.label.value = name == "offensive" ? lexicon::Verdict::Offensive : lexicon::Verdict::NonOffensive;
      l.label.ratio = e.at("ratio").get<double>();
      l.label.insufficient_text = e.at("insufficient_text").get<bool>();
      out.labels.push_back(std::move(l));
    }
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorCode::Format, file.string() + ": " + e.what());
  }
  return out;
}

// -- channel lists -------------------------------------------------------------------

std::vector<std::string> parse_channel_list(std::string_view content) {
  static const std::set<std::string, std::less<>> kTabs{"videos",   "featured", "about", "playlists", "community",
                                                        "channels", "streams",  "shorts", "live",    "home"};
  std::vector<std::string> out;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  std::istringstream in{std::string(content)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    std::string id = line;
    const bool url = line.find("://") != std::string::npos || line.find('/') != std::string::npos;
    if (url) {
      auto rest = std::string_view(line);
      if (auto p = rest.find("://"); p != std::string_view::npos) rest.remove_prefix(p + 3);
      rest = rest.substr(0, rest.find_first_of("?#"));
      std::vector<std::string> segments;
      std::size_t pos = 0;
      while (pos <= rest.size()) {
        auto slash = rest.find('/', pos);
        if (slash == std::string_view::npos) slash = rest.size();
        if (slash > pos) segments.emplace_back(rest.substr(pos, slash - pos));
        pos = slash + 1;
      }
      if (!segments.empty()) segments.erase(segments.begin());  // host
      while (!segments.empty() && kTabs.contains(textprep::fold_case(segments.back()))) segments.pop_back();
      if (segments.empty()) {
        throw Error(ErrorCode::InvalidChannelList,
                    "line " + std::to_string(line_no) + ": URL has no channel identifier: " + line);
      }
      id = segments.back();
    }
    if (!valid_channel_id(id)) {
      throw Error(ErrorCode::InvalidChannelList, "line " + std::to_string(line_no) + ": invalid channel id '" + id + "'");
    }
    if (seen.insert(id).second) out.push_back(id);
  }
  if (out.empty()) throw Error(ErrorCode::InvalidChannelList, "channel list names no channels");
  return out;
}

}  // namespace adgate::pipeline
