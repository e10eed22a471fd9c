// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 The adgate Authors

#ifndef ADGATE_SERVICE_JOBS_HPP
#define ADGATE_SERVICE_JOBS_HPP

#include <condition_variable>
#include <cstddef>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "pipeline/scoring.hpp"
#include "pipeline/store.hpp"
#include "pipeline/training.hpp"

namespace adgate::service {

namespace fs = std::filesystem;

enum class JobState { Queued, Running, Done, Failed };

std::string_view job_state_name(JobState s) noexcept;

struct JobStatus {
  std::string job_id;
  JobState state = JobState::Queued;
  double threshold = lexicon::kDefaultThreshold;
  std::string submitted_at;  // UTC, RFC 3339
  std::size_t channels_done = 0;
  std::size_t channels_total = 0;
  std::string error;
};

io::Json status_json(const JobStatus &s);

/**
 * Owns queued and finished scoring jobs. Jobs run on a small worker pool
 * against an immutable store snapshot and artifact set. Every state change
 * is appended to <store>/jobs.jsonl; reports are written once to
 * <store>/jobs/<id>.report.json. On construction the ledger is replayed:
 * finished jobs are listed again and jobs that never finished are marked
 * failed.
 */
class JobManager {
 public:
  JobManager(std::shared_ptr<const pipeline::DataSource> source, std::shared_ptr<const pipeline::Artifacts> artifacts,
             fs::path store_dir, std::size_t workers = 2);
  ~JobManager();

  JobManager(const JobManager &) = delete;
  JobManager &operator=(const JobManager &) = delete;

  /// Validates the inputs and queues a job. Throws EmptyLexicon,
  /// PhraseTooLong, InvalidChannelList or InvalidThreshold.
  std::string submit(std::string_view lexicon_text, std::string_view channels_text,
                     std::optional<double> threshold);

  std::optional<JobStatus> status(std::string_view job_id) const;

  /// Throws NotFound for unknown jobs and Conflict unless the job is done.
  std::string report(std::string_view job_id) const;
  /// Throws NotFound for unknown jobs or channels, Conflict unless done.
  std::string channel_stats(std::string_view job_id, std::string_view channel_id) const;

  /// Blocks until no job is queued or running.
  void wait_idle();

  const pipeline::Artifacts &artifacts() const noexcept { return *artifacts_; }

 private:
  struct Job {
    JobStatus status;
    std::shared_ptr<const pipeline::MatchingLexicon> lexicon;
    std::vector<std::string> channels;
    std::shared_ptr<const std::string> report;  // set once done
    std::shared_ptr<const io::Json> report_doc;
  };

  void worker_loop();
  void run(const std::string &id);
  void append_ledger(const io::Json &event);
  void replay_ledger();
  const Job &finished_job(std::string_view job_id) const;
  std::string new_job_id();

  std::shared_ptr<const pipeline::DataSource> source_;
  std::shared_ptr<const pipeline::Artifacts> artifacts_;
  fs::path store_dir_;

  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::condition_variable idle_cv_;
  std::map<std::string, Job, std::less<>> jobs_;
  std::deque<std::string> queue_;
  std::size_t active_ = 0;
  bool stopping_ = false;
  std::mutex ledger_mu_;
  std::vector<std::thread> workers_;
};

}  // namespace adgate::service

#endif  // ADGATE_SERVICE_JOBS_HPP
