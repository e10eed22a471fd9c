// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 The adgate Authors

#include "adgate/adgate.h"

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <new>
#include <string>

#include "core/error.hpp"
#include "pipeline/scoring.hpp"
#include "pipeline/store.hpp"
#include "pipeline/training.hpp"
#include "service/http_server.hpp"
#include "service/jobs.hpp"

namespace {

using namespace adgate;

constexpr std::uint32_t kLexiconMagic = 0x4c455831;  // LEX1
constexpr std::uint32_t kStoreMagic = 0x53544f31;    // STO1
constexpr std::uint32_t kModelMagic = 0x4d444c31;    // MDL1
constexpr std::uint32_t kServiceMagic = 0x53525631;  // SRV1

thread_local std::string g_last_error;

struct Failure {
  int status;
  std::string message;
};

int fail(int status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

template <typename F>
int guarded(F &&body) {
  g_last_error.clear();
  try {
    body();
    return ADGATE_OK;
  } catch (const Failure &f) {
    return fail(f.status, f.message);
  } catch (const Error &e) {
    return fail(static_cast<int>(e.code()) + 1, e.what());
  } catch (const std::filesystem::filesystem_error &e) {
    return fail(ADGATE_E_IO, e.what());
  } catch (const std::bad_alloc &) {
    return fail(ADGATE_E_INTERNAL, "out of memory");
  } catch (const std::exception &e) {
    return fail(ADGATE_E_INTERNAL, e.what());
  } catch (...) {
    return fail(ADGATE_E_INTERNAL, "unknown failure");
  }
}

void need(const void *p, const char *name) {
  if (!p) throw Failure{ADGATE_E_NULL_POINTER, std::string(name) + " is NULL"};
}

char *dup_string(std::string_view s) {
  auto *out = static_cast<char *>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size());
  out[s.size()] = '\0';
  return out;
}

std::string_view view(const char *text, std::size_t len) {
  if (!text && len != 0) throw Failure{ADGATE_E_NULL_POINTER, "text is NULL"};
  return text ? std::string_view(text, len) : std::string_view();
}

template <std::uint32_t Magic>
struct Checked {
  std::uint32_t magic = Magic;
  bool valid() const { return magic == Magic; }
};

}  // namespace

struct adgate_lexicon : Checked<kLexiconMagic> {
  std::shared_ptr<const pipeline::MatchingLexicon> lex;
};

struct adgate_store : Checked<kStoreMagic> {
  std::shared_ptr<const pipeline::FixtureStore> store;
};

struct adgate_model : Checked<kModelMagic> {
  std::shared_ptr<const pipeline::Artifacts> artifacts;
};

struct adgate_service : Checked<kServiceMagic> {
  std::shared_ptr<service::JobManager> jobs;
  std::unique_ptr<service::HttpServer> server;
};

namespace {

template <typename H>
const H &handle(const H *h, const char *name) {
  need(h, name);
  if (!h->valid()) throw Failure{ADGATE_E_BAD_HANDLE, std::string(name) + " is not a live handle"};
  return *h;
}

template <typename H>
void release(H *h) {
  if (!h || !h->valid()) return;
  h->magic = 0;
  delete h;
}

}  // namespace

extern "C" {

const char *adgate_version(void) { return "1.0.0"; }

const char *adgate_status_name(int status) {
  switch (status) {
    case ADGATE_OK: return "OK";
    case ADGATE_E_NULL_POINTER: return "NullPointer";
    case ADGATE_E_BAD_HANDLE: return "BadHandle";
    case ADGATE_E_INTERNAL: return "Internal";
    default: break;
  }
  if (status >= ADGATE_E_INVALID_ARGUMENT && status <= ADGATE_E_CONFLICT) {
    return error_code_name(static_cast<ErrorCode>(status - 1)).data();
  }
  return "Unknown";
}

const char *adgate_last_error(void) { return g_last_error.c_str(); }

void adgate_string_free(char *s) { std::free(s); }

// -- lexicon ---------------------------------------------------------------------

int adgate_lexicon_parse(const char *text, size_t len, adgate_lexicon **out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    auto lex = std::make_shared<const pipeline::MatchingLexicon>(
        pipeline::prepare_lexicon(lexicon::parse_lexicon(view(text, len)), textprep::StopwordList::bundled()));
    auto *h = new adgate_lexicon;
    h->lex = std::move(lex);
    *out = h;
  });
}

int adgate_lexicon_size(const adgate_lexicon *lex, size_t *out) {
  return guarded([&] {
    const auto &h = handle(lex, "lexicon");
    need(out, "out");
    *out = h.lex->source.size();
  });
}

int adgate_lexicon_text(const adgate_lexicon *lex, char **out) {
  return guarded([&] {
    const auto &h = handle(lex, "lexicon");
    need(out, "out");
    *out = dup_string(h.lex->source.to_text());
  });
}

int adgate_lexicon_ratio(const adgate_lexicon *lex, const char *text, size_t len, double *ratio, int *insufficient) {
  return guarded([&] {
    const auto &h = handle(lex, "lexicon");
    need(ratio, "ratio");
    const auto tokens = textprep::prepare_text(view(text, len), textprep::StopwordList::bundled());
    const auto cov = lexicon::offensiveness_ratio(tokens, h.lex->prepared);
    *ratio = cov.ratio;
    if (insufficient) *insufficient = cov.insufficient_text ? 1 : 0;
  });
}

int adgate_lexicon_label(const adgate_lexicon *lex, const char *text, size_t len, double threshold, int *offensive) {
  return guarded([&] {
    const auto &h = handle(lex, "lexicon");
    need(offensive, "offensive");
    const auto tokens = textprep::prepare_text(view(text, len), textprep::StopwordList::bundled());
    const auto cov = lexicon::offensiveness_ratio(tokens, h.lex->prepared);
    *offensive = lexicon::label(cov.ratio, threshold, cov.insufficient_text).value == lexicon::Verdict::Offensive;
  });
}

void adgate_lexicon_free(adgate_lexicon *lex) { release(lex); }

// -- store -----------------------------------------------------------------------------

int adgate_ingest(const char *store_dir, const char *const *record_files, size_t n_files, char **summary) {
  return guarded([&] {
    need(store_dir, "store_dir");
    need(record_files, "record_files");
    std::vector<std::filesystem::path> inputs;
    for (size_t i = 0; i < n_files; ++i) {
      need(record_files[i], "record file");
      inputs.emplace_back(record_files[i]);
    }
    const auto s = pipeline::ingest(store_dir, inputs);
    if (summary) {
      io::Json j = io::Json::object();
      j["added"] = s.added;
      j["replaced"] = s.replaced;
      j["total"] = s.total;
      io::Json diags = io::Json::array();
      for (const auto &[file, d] : s.diagnostics) {
        diags.push_back(io::Json{{"file", file}, {"line", d.line}, {"message", d.message}});
      }
      j["diagnostics"] = std::move(diags);
      *summary = dup_string(j.dump(2));
    }
  });
}

int adgate_label(const char *store_dir, const adgate_lexicon *lex, double threshold, char **summary) {
  return guarded([&] {
    need(store_dir, "store_dir");
    const auto &h = handle(lex, "lexicon");
    const auto store = pipeline::FixtureStore::open(store_dir);
    if (store.videos().empty()) throw Error(ErrorCode::NoValidRecords, "store holds no records");
    pipeline::LabelSet set;
    set.threshold = threshold;
    set.lexicon_text = h.lex->source.to_text();
    set.labels = pipeline::build_labeled_dataset(store.videos(), *h.lex, threshold, textprep::StopwordList::bundled());
    pipeline::write_labels(store_dir, set);
    if (summary) {
      std::size_t offensive = 0, insufficient = 0;
      for (const auto &l : set.labels) {
        offensive += l.label.value == lexicon::Verdict::Offensive;
        insufficient += l.label.insufficient_text;
      }
      io::Json j = io::Json::object();
      j["records"] = set.labels.size();
      j["offensive"] = offensive;
      j["non_offensive"] = set.labels.size() - offensive;
      j["insufficient_text"] = insufficient;
      j["threshold"] = threshold;
      *summary = dup_string(j.dump(2));
    }
  });
}

int adgate_train(const char *store_dir, const char *embeddings_file, const char *config_file, const char *out_dir,
                 char **summary) {
  return guarded([&] {
    need(store_dir, "store_dir");
    need(embeddings_file, "embeddings_file");
    need(out_dir, "out_dir");
    const auto store = pipeline::FixtureStore::open(store_dir);
    const auto labels = pipeline::read_labels(store_dir);
    std::ifstream emb(embeddings_file, std::ios::binary);
    if (!emb) throw Error(ErrorCode::Io, std::string("cannot open ") + embeddings_file);
    const auto table = vectorize::load_embeddings(emb);
    const auto options = config_file ? pipeline::parse_training_options(pipeline::read_file(config_file))
                                     : pipeline::TrainingOptions{};
    const auto artifacts = pipeline::run_training(store, labels, table, options, out_dir);
    if (summary) {
      io::Json j = io::Json::object();
      j["model_version"] = artifacts.model_version;
      j["evaluation"] = artifacts.evaluation;
      *summary = dup_string(j.dump(2));
    }
  });
}

int adgate_store_open(const char *store_dir, adgate_store **out) {
  return guarded([&] {
    need(store_dir, "store_dir");
    need(out, "out");
    *out = nullptr;
    auto s = std::make_shared<const pipeline::FixtureStore>(pipeline::FixtureStore::open(store_dir));
    auto *h = new adgate_store;
    h->store = std::move(s);
    *out = h;
  });
}

int adgate_store_video_count(const adgate_store *store, size_t *out) {
  return guarded([&] {
    const auto &h = handle(store, "store");
    need(out, "out");
    *out = h.store->videos().size();
  });
}

void adgate_store_free(adgate_store *store) { release(store); }

// -- model ---------------------------------------------------------------------------------

int adgate_model_open(const char *model_dir, adgate_model **out) {
  return guarded([&] {
    need(model_dir, "model_dir");
    need(out, "out");
    *out = nullptr;
    auto a = std::make_shared<const pipeline::Artifacts>(pipeline::load_artifacts(model_dir));
    auto *h = new adgate_model;
    h->artifacts = std::move(a);
    *out = h;
  });
}

int adgate_model_version(const adgate_model *model, char **out) {
  return guarded([&] {
    const auto &h = handle(model, "model");
    need(out, "out");
    *out = dup_string(h.artifacts->model_version);
  });
}

void adgate_model_free(adgate_model *model) { release(model); }

int adgate_score(const adgate_store *store, const adgate_model *model, const adgate_lexicon *lex,
                 const char *channels_text, size_t len, double threshold, char **report) {
  return guarded([&] {
    const auto &s = handle(store, "store");
    const auto &m = handle(model, "model");
    need(report, "report");
    const auto &matching = lex ? *handle(lex, "lexicon").lex : m.artifacts->lexicon;
    const auto channels = pipeline::parse_channel_list(view(channels_text, len));
    const auto doc = pipeline::score_channels(*s.store, *m.artifacts, matching, channels, threshold);
    *report = dup_string(pipeline::report_text(doc));
  });
}

// -- service ------------------------------------------------------------------------------------

int adgate_service_start(const adgate_store *store, const adgate_model *model, const adgate_service_options *options,
                         adgate_service **out) {
  return guarded([&] {
    const auto &s = handle(store, "store");
    const auto &m = handle(model, "model");
    need(out, "out");
    *out = nullptr;
    service::ServerOptions opt;
    unsigned workers = 2;
    if (options) {
      if (options->host && *options->host) opt.host = options->host;
      if (options->port < 0 || options->port > 65535) throw Error(ErrorCode::InvalidArgument, "port out of range");
      opt.port = options->port;
      if (options->cors_origin) opt.cors_origin = options->cors_origin;
      if (options->static_dir) opt.static_dir = options->static_dir;
      if (options->workers) workers = options->workers;
    }
    auto svc = std::make_unique<adgate_service>();
    svc->jobs = std::make_shared<service::JobManager>(s.store, m.artifacts, s.store->dir(), workers);
    svc->server = std::make_unique<service::HttpServer>(svc->jobs, opt);
    svc->server->start();
    *out = svc.release();
  });
}

int adgate_service_port(const adgate_service *service, int *out) {
  return guarded([&] {
    const auto &h = handle(service, "service");
    need(out, "out");
    *out = h.server->port();
  });
}

void adgate_service_stop(adgate_service *service) {
  if (!service || !service->valid()) return;
  service->server->stop();
  release(service);
}

}  // extern "C"
