// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 The adgate Authors

#include "http_server.hpp"

#include <charconv>
#include <thread>

#include <httplib.h>

#include "core/error.hpp"

namespace adgate::service {

namespace {

constexpr const char *kJson = "application/json";

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotFound: return 404;
    case ErrorCode::Conflict: return 409;
    case ErrorCode::Io: return 500;
    default: return 400;
  }
}

void send_error(httplib::Response &res, int status, std::string_view code, std::string_view message) {
  res.status = status;
  res.set_content(io::Json{{"error", code}, {"message", message}}.dump() + "\n", kJson);
}

void send_error(httplib::Response &res, const Error &e) {
  send_error(res, http_status(e.code()), error_code_name(e.code()), e.what());
}

std::optional<double> parse_threshold(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r' || text.back() == '\n')) {
    text.remove_suffix(1);
  }
  if (text.empty()) return std::nullopt;
  double v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::InvalidThreshold, "threshold '" + std::string(text) + "' is not a number");
  }
  return v;
}

}  // namespace

struct HttpServer::Impl {
  std::shared_ptr<JobManager> jobs;
  ServerOptions options;
  httplib::Server server;
  std::thread thread;
};

HttpServer::HttpServer(std::shared_ptr<JobManager> jobs, ServerOptions options)
    : impl_(std::make_unique<Impl>()) {
  impl_->jobs = std::move(jobs);
  impl_->options = std::move(options);
  auto &srv = impl_->server;
  auto *jm = impl_->jobs.get();

  srv.Post("/api/jobs", [jm](const httplib::Request &req, httplib::Response &res) {
    if (!req.is_multipart_form_data()) {
      send_error(res, 400, "InvalidArgument", "expected multipart/form-data with lexicon and channels");
      return;
    }
    for (const char *field : {"lexicon", "channels"}) {
      if (!req.has_file(field)) {
        send_error(res, 400, "InvalidArgument", std::string("missing multipart field '") + field + "'");
        return;
      }
    }
    try {
      std::optional<double> threshold;
      if (req.has_file("threshold")) {
        threshold = parse_threshold(req.get_file_value("threshold").content);
      } else if (req.has_param("threshold")) {
        threshold = parse_threshold(req.get_param_value("threshold"));
      }
      const auto id =
          jm->submit(req.get_file_value("lexicon").content, req.get_file_value("channels").content, threshold);
      res.status = 202;
      res.set_content(io::Json{{"job_id", id}, {"state", "queued"}}.dump() + "\n", kJson);
    } catch (const Error &e) {
      send_error(res, e);
    }
  });

  srv.Get(R"(/api/jobs/([0-9a-f]+))", [jm](const httplib::Request &req, httplib::Response &res) {
    auto st = jm->status(req.matches[1].str());
    if (!st) {
      send_error(res, 404, "NotFound", "unknown job " + req.matches[1].str());
      return;
    }
    res.set_content(status_json(*st).dump(2) + "\n", kJson);
  });

  srv.Get(R"(/api/jobs/([0-9a-f]+)/report)", [jm](const httplib::Request &req, httplib::Response &res) {
    try {
      res.set_content(jm->report(req.matches[1].str()), kJson);
    } catch (const Error &e) {
      send_error(res, e);
    }
  });

  srv.Get(R"(/api/jobs/([0-9a-f]+)/channels/([^/]+)/stats)",
          [jm](const httplib::Request &req, httplib::Response &res) {
            try {
              res.set_content(jm->channel_stats(req.matches[1].str(), req.matches[2].str()), kJson);
            } catch (const Error &e) {
              send_error(res, e);
            }
          });

  srv.Get("/api/health", [jm](const httplib::Request &, httplib::Response &res) {
    res.set_content(io::Json{{"status", "ok"}, {"model_version", jm->artifacts().model_version}}.dump() + "\n", kJson);
  });

  if (!impl_->options.cors_origin.empty()) {
    const auto origin = impl_->options.cors_origin;
    srv.set_post_routing_handler([origin](const httplib::Request &, httplib::Response &res) {
      res.set_header("Access-Control-Allow-Origin", origin);
      res.set_header("Vary", "Origin");
    });
    srv.Options(R"(/api/.*)", [origin](const httplib::Request &, httplib::Response &res) {
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
      res.status = 204;
    });
  }

  if (!impl_->options.static_dir.empty() && !srv.set_mount_point("/", impl_->options.static_dir)) {
    throw Error(ErrorCode::Io, "static directory " + impl_->options.static_dir + " does not exist");
  }
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::start() {
  auto &srv = impl_->server;
  const auto &opt = impl_->options;
  if (opt.port == 0) {
    port_ = srv.bind_to_any_port(opt.host);
    if (port_ < 0) throw Error(ErrorCode::Io, "cannot bind " + opt.host);
  } else {
    if (!srv.bind_to_port(opt.host, opt.port)) {
      throw Error(ErrorCode::Io, "cannot bind " + opt.host + ":" + std::to_string(opt.port));
    }
    port_ = opt.port;
  }
  impl_->thread = std::thread([&srv] { srv.listen_after_bind(); });
  srv.wait_until_ready();
  return port_;
}

void HttpServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace adgate::service
