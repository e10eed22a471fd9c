// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 The adgate Authors

#ifndef ADGATE_SERVICE_HTTP_SERVER_HPP
#define ADGATE_SERVICE_HTTP_SERVER_HPP

#include <memory>
#include <string>

#include "jobs.hpp"

namespace adgate::service {

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::string cors_origin;  // empty disables CORS headers
  std::string static_dir;   // optional directory served at /
};

/**
 * HTTP front end:
 *   POST /api/jobs                          multipart lexicon, channels, threshold
 *   GET  /api/jobs/{id}                     job status
 *   GET  /api/jobs/{id}/report              full report (409 until done)
 *   GET  /api/jobs/{id}/channels/{cid}/stats
 *   GET  /api/health
 */
class HttpServer {
 public:
  HttpServer(std::shared_ptr<JobManager> jobs, ServerOptions options);
  ~HttpServer();

  HttpServer(const HttpServer &) = delete;
  HttpServer &operator=(const HttpServer &) = delete;

  /// Binds and starts serving on a background thread. Returns the bound
  /// port. Throws Io when the address cannot be bound.
  int start();
  void stop();
  int port() const noexcept { return port_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int port_ = 0;
};

}  // namespace adgate::service

#endif  // ADGATE_SERVICE_HTTP_SERVER_HPP
