// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 The adgate Authors

#include "scoring.hpp"

#include <algorithm>
#include <map>

#include "core/error.hpp"

namespace adgate::pipeline {

ChannelReport score_channel(std::string_view channel_id, std::span<const VideoRecord> videos,
                            const DataSource &source, const Artifacts &artifacts, const MatchingLexicon &lex,
                            double threshold) {
  if (videos.empty()) {
    throw Error(ErrorCode::EmptyChannel, "no records for channel " + std::string(channel_id));
  }
  const auto &stops = textprep::StopwordList::bundled();
  ChannelReport rep;
  rep.channel_id = channel_id;
  rep.n_videos = videos.size();
  auto &st = rep.stats;
  std::map<std::size_t, std::size_t> term_hits;
  std::uint64_t likes = 0, dislikes = 0;

  for (const auto &rec : videos) {
    const auto prepared = prepare_video(rec, source, artifacts.bnb, stops);
    const auto bundle =
        assemble_bundle(prepared, artifacts.embeddings, artifacts.ensemble.config(), artifacts.numeric);
    const auto fwd = models::ensemble_forward(bundle, artifacts.ensemble);
    VideoVerdict v;
    v.video_id = rec.video_id;
    v.probability = fwd.probabilities[1];
    v.verdict = models::predicted_class(fwd) == 1 ? lexicon::Verdict::Offensive : lexicon::Verdict::NonOffensive;
    v.lexicon_label = label_document(prepared.doc, lex, threshold);
    v.sentiment = prepared.raw.sentiment;

    const auto matches = lexicon::match_phrases(prepared.doc.merged, lex.prepared);
    st.total_matches += matches.size();
    if (v.verdict == lexicon::Verdict::Offensive) {
      ++rep.flagged;
      for (const auto &m : matches) ++term_hits[m.phrase_id];
    }
    likes += rec.likes.value_or(0);
    dislikes += rec.dislikes.value_or(0);
    st.total_views += rec.views.value_or(0);
    st.total_subscribers = std::max(st.total_subscribers, rec.subscribers.value_or(0));
    rep.videos.push_back(std::move(v));
  }
  st.total_likes = likes;
  st.total_dislikes = dislikes;
  if (dislikes > 0) st.likes_dislikes_ratio = static_cast<double>(likes) / static_cast<double>(dislikes);
  rep.threat_percentage = 100.0 * static_cast<double>(rep.flagged) / static_cast<double>(rep.n_videos);

  const VideoVerdict *hi = &rep.videos.front();
  const VideoVerdict *lo = hi;
  for (const auto &v : rep.videos) {
    if (v.probability > hi->probability || (v.probability == hi->probability && v.video_id < hi->video_id)) hi = &v;
    if (v.probability < lo->probability || (v.probability == lo->probability && v.video_id < lo->video_id)) lo = &v;
  }
  st.max_threat_video = hi->video_id;
  st.max_threat_probability = hi->probability;
  st.min_threat_video = lo->video_id;
  st.min_threat_probability = lo->probability;

  for (const auto &[id, count] : term_hits) st.top_terms.push_back({lex.display.at(id), count});
  std::sort(st.top_terms.begin(), st.top_terms.end(), [](const TermCount &a, const TermCount &b) {
    return a.count != b.count ? a.count > b.count : a.term < b.term;
  });
  if (st.top_terms.size() > kTopTerms) st.top_terms.resize(kTopTerms);
  return rep;
}

io::Json stats_json(const ChannelStats &s) {
  io::Json j = io::Json::object();
  j["likes_dislikes_ratio"] = s.likes_dislikes_ratio ? io::Json(*s.likes_dislikes_ratio) : io::Json(nullptr);
  j["total_likes"] = s.total_likes;
  j["total_dislikes"] = s.total_dislikes;
  j["total_views"] = s.total_views;
  j["total_subscribers"] = s.total_subscribers;
  j["max_threat_video"] = io::Json{{"video_id", s.max_threat_video}, {"probability", s.max_threat_probability}};
  j["min_threat_video"] = io::Json{{"video_id", s.min_threat_video}, {"probability", s.min_threat_probability}};
  io::Json terms = io::Json::array();
  for (const auto &t : s.top_terms) terms.push_back(io::Json{{"term", t.term}, {"count", t.count}});
  j["top_terms"] = std::move(terms);
  j["total_matches"] = s.total_matches;
  return j;
}

io::Json channel_report_json(const ChannelReport &r) {
  io::Json j = io::Json::object();
  j["channel_id"] = r.channel_id;
  j["n_videos"] = r.n_videos;
  j["flagged"] = r.flagged;
  j["threat_percentage"] = r.threat_percentage;
  io::Json videos = io::Json::array();
  for (const auto &v : r.videos) {
    io::Json e = io::Json::object();
    e["video_id"] = v.video_id;
    e["label"] = lexicon::verdict_name(v.verdict);
    e["probability"] = v.probability;
    e["ratio"] = v.lexicon_label.ratio;
    e["insufficient_text"] = v.lexicon_label.insufficient_text;
    e["lexicon_label"] = lexicon::verdict_name(v.lexicon_label.value);
    e["sentiment"] = io::Json{{"value", v.sentiment.value},
                              {"comments_used", v.sentiment.n_comments_used},
                              {"prior_only", v.sentiment.prior_only}};
    videos.push_back(std::move(e));
  }
  j["videos"] = std::move(videos);
  j["stats"] = stats_json(r.stats);
  return j;
}

io::Json score_channels(const DataSource &source, const Artifacts &artifacts, const MatchingLexicon &lex,
                        std::span<const std::string> channel_ids, double threshold, const ProgressFn &progress) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw Error(ErrorCode::InvalidThreshold, "threshold must lie in [0, 1]");
  }
  io::Json doc = io::Json::object();
  doc["threshold"] = threshold;
  doc["model_version"] = artifacts.model_version;
  io::Json channels = io::Json::array();
  io::Json errors = io::Json::array();
  std::size_t done = 0;
  for (const auto &id : channel_ids) {
    try {
      const auto videos = source.channel_videos(id);
      channels.push_back(channel_report_json(score_channel(id, videos, source, artifacts, lex, threshold)));
    } catch (const Error &e) {
      errors.push_back(io::Json{{"channel_id", id}, {"code", error_code_name(e.code())}, {"error", e.what()}});
    }
    ++done;
    if (progress) progress(done);
  }
  doc["channels"] = std::move(channels);
  doc["errors"] = std::move(errors);
  return doc;
}

std::string report_text(const io::Json &report) { return report.dump(2) + "\n"; }

}  // namespace adgate::pipeline
