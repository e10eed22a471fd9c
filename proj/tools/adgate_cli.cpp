// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 The adgate Authors

// Command-line front end. Talks to the engine only through the C API.

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <pthread.h>

#include <CLI11.hpp>

#include "adgate/adgate.h"

namespace {

struct CallFailed {
  int status;
};

void check(int status) {
  if (status != ADGATE_OK) throw CallFailed{status};
}

struct Owned {
  char *p = nullptr;
  ~Owned() { adgate_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

template <typename T, void (*Free)(T *)>
struct Handle {
  T *p = nullptr;
  ~Handle() { Free(p); }
};

using Lexicon = Handle<adgate_lexicon, adgate_lexicon_free>;
using Store = Handle<adgate_store, adgate_store_free>;
using Model = Handle<adgate_model, adgate_model_free>;

std::string slurp(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void write_output(const std::string &path, const std::string &content) {
  if (path == "-") {
    std::cout << content << std::flush;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  out.flush();
  if (!out) throw std::runtime_error("cannot write " + path);
}

void load_lexicon(const std::string &path, Lexicon &lex) {
  const auto text = slurp(path);
  check(adgate_lexicon_parse(text.data(), text.size(), &lex.p));
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"adgate: brand-safety screening for video channels"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(adgate_version()));

  std::vector<std::string> records;
  std::string store_dir, lexicon_file, embeddings_file, config_file, out_path, model_dir, channels_file;
  std::string host = "127.0.0.1", cors_origin, static_dir;
  double threshold = 0.02;
  int port = 8080;
  unsigned workers = 2;

  auto *ingest = app.add_subcommand("ingest", "Merge record files into a store");
  ingest->add_option("--records", records, "Line-delimited JSON record files")->required()->check(CLI::ExistingFile);
  ingest->add_option("--store", store_dir, "Store directory")->required();

  auto *label = app.add_subcommand("label", "Label stored videos with an offensive vocabulary");
  label->add_option("--store", store_dir, "Store directory")->required()->check(CLI::ExistingDirectory);
  label->add_option("--lexicon", lexicon_file, "Vocabulary file")->required()->check(CLI::ExistingFile);
  label->add_option("--threshold", threshold, "Ratio above which a video is offensive")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));

  auto *train = app.add_subcommand("train", "Fit features and train the models on a labeled store");
  train->add_option("--store", store_dir, "Store directory")->required()->check(CLI::ExistingDirectory);
  train->add_option("--embeddings", embeddings_file, "Word-vector text file")->required()->check(CLI::ExistingFile);
  train->add_option("--config", config_file, "JSON training config")->check(CLI::ExistingFile);
  train->add_option("--out", out_path, "Model output directory")->required();

  auto *score = app.add_subcommand("score", "Score channels and write a report");
  score->add_option("--store", store_dir, "Store directory")->required()->check(CLI::ExistingDirectory);
  score->add_option("--model", model_dir, "Model directory")->required()->check(CLI::ExistingDirectory);
  score->add_option("--channels", channels_file, "Channel list file")->required()->check(CLI::ExistingFile);
  score->add_option("--threshold", threshold, "Lexicon ratio threshold reported per video")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  score->add_option("--lexicon", lexicon_file, "Vocabulary file (default: the one saved with the model)")
      ->check(CLI::ExistingFile);
  score->add_option("--out", out_path, "Report path, '-' for stdout")->required();

  auto *serve = app.add_subcommand("serve", "Run the HTTP job service");
  serve->add_option("--store", store_dir, "Store directory")->envname("ADGATE_STORE")->required();
  serve->add_option("--model", model_dir, "Model directory")->envname("ADGATE_MODEL")->required();
  serve->add_option("--port", port, "Port, 0 for any free port")
      ->envname("ADGATE_PORT")
      ->capture_default_str()
      ->check(CLI::Range(0, 65535));
  serve->add_option("--host", host, "Address to bind")->capture_default_str();
  serve->add_option("--cors-origin", cors_origin, "Origin allowed to call the API from a browser");
  serve->add_option("--static-dir", static_dir, "Directory served at /")->check(CLI::ExistingDirectory);
  serve->add_option("--workers", workers, "Concurrent scoring jobs")->capture_default_str()->check(CLI::Range(1u, 64u));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) {
      std::vector<const char *> files;
      for (const auto &r : records) files.push_back(r.c_str());
      Owned summary;
      check(adgate_ingest(store_dir.c_str(), files.data(), files.size(), &summary.p));
      std::cout << summary.str() << "\n";
    } else if (*label) {
      Lexicon lex;
      load_lexicon(lexicon_file, lex);
      Owned summary;
      check(adgate_label(store_dir.c_str(), lex.p, threshold, &summary.p));
      std::cout << summary.str() << "\n";
    } else if (*train) {
      Owned summary;
      check(adgate_train(store_dir.c_str(), embeddings_file.c_str(), config_file.empty() ? nullptr : config_file.c_str(),
                         out_path.c_str(), &summary.p));
      std::cout << summary.str() << "\n";
    } else if (*score) {
      Store store;
      Model model;
      Lexicon lex;
      check(adgate_store_open(store_dir.c_str(), &store.p));
      check(adgate_model_open(model_dir.c_str(), &model.p));
      if (!lexicon_file.empty()) load_lexicon(lexicon_file, lex);
      const auto channels = slurp(channels_file);
      Owned report;
      check(adgate_score(store.p, model.p, lex.p, channels.data(), channels.size(), threshold, &report.p));
      write_output(out_path, report.str());
    } else if (*serve) {
      // Block termination signals before any service thread starts so that
      // sigwait below is the only place they are delivered.
      sigset_t signals;
      sigemptyset(&signals);
      sigaddset(&signals, SIGINT);
      sigaddset(&signals, SIGTERM);
      pthread_sigmask(SIG_BLOCK, &signals, nullptr);

      Store store;
      Model model;
      check(adgate_store_open(store_dir.c_str(), &store.p));
      check(adgate_model_open(model_dir.c_str(), &model.p));
      adgate_service_options opt{host.c_str(), port, cors_origin.c_str(), static_dir.c_str(), workers};
      adgate_service *svc = nullptr;
      check(adgate_service_start(store.p, model.p, &opt, &svc));
      int bound = 0;
      adgate_service_port(svc, &bound);
      std::cout << "listening on http://" << host << ":" << bound << std::endl;
      int sig = 0;
      sigwait(&signals, &sig);
      adgate_service_stop(svc);
      std::cout << "stopped" << std::endl;
    }
  } catch (const CallFailed &f) {
    std::cerr << "adgate: " << adgate_status_name(f.status) << ": " << adgate_last_error() << "\n";
    return 1;
  } catch (const std::exception &e) {
    std::cerr << "adgate: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
