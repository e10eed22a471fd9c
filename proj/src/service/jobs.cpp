// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 The adgate Authors

#include "jobs.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <random>
#include <sstream>

#include "core/error.hpp"

namespace adgate::service {

namespace {

constexpr const char *kLedger = "jobs.jsonl";
constexpr const char *kReportDir = "jobs";

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

fs::path report_path(const fs::path &store, std::string_view id) {
  return store / kReportDir / (std::string(id) + ".report.json");
}

}  // namespace

std::string_view job_state_name(JobState s) noexcept {
  switch (s) {
    case JobState::Queued: return "queued";
    case JobState::Running: return "running";
    case JobState::Done: return "done";
    case JobState::Failed: return "failed";
  }
  return "unknown";
}

io::Json status_json(const JobStatus &s) {
  io::Json j = io::Json::object();
  j["job_id"] = s.job_id;
  j["state"] = job_state_name(s.state);
  j["threshold"] = s.threshold;
  j["submitted_at"] = s.submitted_at;
  j["progress"] = io::Json{{"channels_done", s.channels_done}, {"channels_total", s.channels_total}};
  j["error"] = s.error.empty() ? io::Json(nullptr) : io::Json(s.error);
  return j;
}

JobManager::JobManager(std::shared_ptr<const pipeline::DataSource> source,
                       std::shared_ptr<const pipeline::Artifacts> artifacts, fs::path store_dir, std::size_t workers)
    : source_(std::move(source)), artifacts_(std::move(artifacts)), store_dir_(std::move(store_dir)) {
  fs::create_directories(store_dir_ / kReportDir);
  replay_ledger();
  if (workers == 0) workers = 1;
  for (std::size_t i = 0; i < workers; ++i) workers_.emplace_back([this] { worker_loop(); });
}

JobManager::~JobManager() {
  {
    std::lock_guard lock(mu_);
    stopping_ = true;
  }
  cv_.notify_all();
  for (auto &t : workers_) t.join();
}

std::string JobManager::new_job_id() {
  static thread_local std::mt19937_64 gen{std::random_device{}()};
  for (;;) {
    char buf[33];
    std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(gen()),
                  static_cast<unsigned long long>(gen()));
    if (!jobs_.contains(std::string_view(buf))) return buf;
  }
}

std::string JobManager::submit(std::string_view lexicon_text, std::string_view channels_text,
                               std::optional<double> threshold) {
  const double t = threshold.value_or(lexicon::kDefaultThreshold);
  if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorCode::InvalidThreshold, "threshold must lie in [0, 1]");
  auto lex = std::make_shared<const pipeline::MatchingLexicon>(
      pipeline::prepare_lexicon(lexicon::parse_lexicon(lexicon_text), textprep::StopwordList::bundled()));
  auto channels = pipeline::parse_channel_list(channels_text);

  Job job;
  job.status.threshold = t;
  job.status.submitted_at = utc_now();
  job.status.channels_total = channels.size();
  job.lexicon = std::move(lex);
  job.channels = std::move(channels);
  std::string id;
  {
    std::lock_guard lock(mu_);
    id = new_job_id();
    job.status.job_id = id;
    append_ledger(io::Json{{"event", "submitted"},
                           {"job_id", id},
                           {"threshold", t},
                           {"submitted_at", job.status.submitted_at},
                           {"channels_total", job.status.channels_total}});
    jobs_.emplace(id, std::move(job));
    queue_.push_back(id);
  }
  cv_.notify_one();
  return id;
}

std::optional<JobStatus> JobManager::status(std::string_view job_id) const {
  std::lock_guard lock(mu_);
  auto it = jobs_.find(job_id);
  if (it == jobs_.end()) return std::nullopt;
  return it->second.status;
}

const JobManager::Job &JobManager::finished_job(std::string_view job_id) const {
  auto it = jobs_.find(job_id);
  if (it == jobs_.end()) throw Error(ErrorCode::NotFound, "unknown job " + std::string(job_id));
  const auto &job = it->second;
  if (job.status.state != JobState::Done) {
    throw Error(ErrorCode::Conflict, "job " + std::string(job_id) + " is " +
                                         std::string(job_state_name(job.status.state)) + ", not done");
  }
  return job;
}

std::string JobManager::report(std::string_view job_id) const {
  std::lock_guard lock(mu_);
  return *finished_job(job_id).report;
}

std::string JobManager::channel_stats(std::string_view job_id, std::string_view channel_id) const {
  std::shared_ptr<const io::Json> doc;
  {
    std::lock_guard lock(mu_);
    doc = finished_job(job_id).report_doc;
  }
  for (const auto &ch : doc->at("channels")) {
    if (ch.at("channel_id").get<std::string>() == channel_id) return ch.at("stats").dump(2) + "\n";
  }
  throw Error(ErrorCode::NotFound, "channel " + std::string(channel_id) + " is not in the report of job " +
                                       std::string(job_id));
}

void JobManager::wait_idle() {
  std::unique_lock lock(mu_);
  idle_cv_.wait(lock, [this] { return queue_.empty() && active_ == 0; });
}

void JobManager::worker_loop() {
  for (;;) {
    std::string id;
    {
      std::unique_lock lock(mu_);
      cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
      if (stopping_) return;
      id = std::move(queue_.front());
      queue_.pop_front();
      ++active_;
      jobs_.at(id).status.state = JobState::Running;
      append_ledger(io::Json{{"event", "running"}, {"job_id", id}});
    }
    run(id);
    {
      std::lock_guard lock(mu_);
      --active_;
    }
    idle_cv_.notify_all();
  }
}

void JobManager::run(const std::string &id) {
  std::shared_ptr<const pipeline::MatchingLexicon> lex;
  std::vector<std::string> channels;
  double threshold = 0;
  {
    std::lock_guard lock(mu_);
    const auto &job = jobs_.at(id);
    lex = job.lexicon;
    channels = job.channels;
    threshold = job.status.threshold;
  }
  try {
    auto body = pipeline::score_channels(*source_, *artifacts_, *lex, channels, threshold, [&](std::size_t done) {
      std::lock_guard lock(mu_);
      auto &st = jobs_.at(id).status;
      st.channels_done = std::max(st.channels_done, done);
    });
    io::Json doc = io::Json::object();
    doc["job_id"] = id;
    for (auto &[k, v] : body.items()) doc[k] = v;
    auto text = std::make_shared<const std::string>(pipeline::report_text(doc));
    pipeline::write_file(report_path(store_dir_, id), *text);
    std::lock_guard lock(mu_);
    auto &job = jobs_.at(id);
    job.report = std::move(text);
    job.report_doc = std::make_shared<const io::Json>(std::move(doc));
    job.status.channels_done = job.status.channels_total;
    job.status.state = JobState::Done;
    append_ledger(io::Json{{"event", "done"}, {"job_id", id}});
  } catch (const std::exception &e) {
    std::lock_guard lock(mu_);
    auto &job = jobs_.at(id);
    job.status.state = JobState::Failed;
    job.status.error = e.what();
    append_ledger(io::Json{{"event", "failed"}, {"job_id", id}, {"error", job.status.error}});
  }
}

void JobManager::append_ledger(const io::Json &event) {
  std::lock_guard lock(ledger_mu_);
  std::ofstream out(store_dir_ / kLedger, std::ios::app | std::ios::binary);
  out << event.dump() << '\n';
  out.flush();
  if (!out) throw Error(ErrorCode::Io, "cannot append to the job ledger");
}

void JobManager::replay_ledger() {
  const auto path = store_dir_ / kLedger;
  std::error_code ec;
  if (!fs::exists(path, ec)) return;
  std::istringstream in(pipeline::read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    io::Json ev;
    try {
      ev = io::Json::parse(line);
      const auto kind = ev.at("event").get<std::string>();
      const auto id = ev.at("job_id").get<std::string>();
      if (kind == "submitted") {
        Job job;
        job.status.job_id = id;
        job.status.threshold = ev.at("threshold").get<double>();
        job.status.submitted_at = ev.at("submitted_at").get<std::string>();
        job.status.channels_total = ev.at("channels_total").get<std::size_t>();
        jobs_.insert_or_assign(id, std::move(job));
        continue;
      }
      auto it = jobs_.find(id);
      if (it == jobs_.end()) continue;
      auto &st = it->second.status;
      if (kind == "running") {
        st.state = JobState::Running;
      } else if (kind == "done") {
        st.state = JobState::Done;
        st.channels_done = st.channels_total;
      } else if (kind == "failed") {
        st.state = JobState::Failed;
        st.error = ev.value("error", std::string("failed"));
      }
    } catch (const nlohmann::json::exception &) {
      continue;  // a torn final line from a crash
    }
  }
  for (auto &[id, job] : jobs_) {
    if (job.status.state == JobState::Done) {
      try {
        auto text = pipeline::read_file(report_path(store_dir_, id));
        job.report_doc = std::make_shared<const io::Json>(io::parse_json(text, "job report"));
        job.report = std::make_shared<const std::string>(std::move(text));
        continue;
      } catch (const Error &e) {
        job.status.state = JobState::Failed;
        job.status.error = std::string("report unavailable after restart: ") + e.what();
      }
    } else if (job.status.state != JobState::Failed) {
      job.status.state = JobState::Failed;
      job.status.error = "service restarted before the job finished";
    } else {
      continue;
    }
    append_ledger(io::Json{{"event", "failed"}, {"job_id", id}, {"error", job.status.error}});
  }
}

}  // namespace adgate::service
