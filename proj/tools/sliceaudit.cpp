/*
 * Copyright 2026 The sliceaudit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// sliceaudit: find under- and over-performing data slices in a model's
// predictions.
//
//   sliceaudit analyze --data adult.csv --predictions preds.csv --label income -o out.json
//   sliceaudit serve   --data adult.csv --predictions preds.csv --label income --port 8080

#include <csignal>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <pthread.h>

#include <CLI11.hpp>

#include "sliceaudit/config.hpp"
#include "sliceaudit/http.hpp"
#include "sliceaudit/service.hpp"

namespace {

void add_analysis_flags(CLI::App& cmd, sliceaudit::AnalysisConfig& c, std::string& schema) {
  cmd.add_option("--data", c.data_path, "Dataset CSV (header row required)")->required();
  cmd.add_option("--predictions", c.predictions_path, "Prediction CSV with y_true,p_pos[,y_pred]")->required();
  cmd.add_option("--label", c.label_column, "Label column in the dataset (excluded from slicing)")->required();
  cmd.add_option("--schema", schema, "Optional JSON schema sidecar [{name, kind, bins?}]");
  cmd.add_option("--bins", c.bins, "Equal-frequency bins per continuous column")->capture_default_str();
  cmd.add_option("--max-degree", c.max_degree, "Maximum predicates per slice (1 or 2)")->capture_default_str();
  cmd.add_option("--min-size", c.min_size, "Minimum slice size")->capture_default_str();
  cmd.add_option("--effect-threshold", c.effect_threshold,
                 "Effect size at or above which a slice underperforms (and at or below minus which it overperforms)")
      ->capture_default_str();
  cmd.add_option("--threads", c.threads, "Worker threads for slice scoring")->capture_default_str();
}

int run_serve(sliceaudit::AnalysisConfig config, const std::optional<std::filesystem::path>& static_dir,
              const std::string& host) {
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  try {
    const sliceaudit::Analysis analysis = sliceaudit::run_analysis(config);
    const sliceaudit::Service service(analysis);
    httplib::Server server;
    sliceaudit::register_routes(server, service, static_dir);
    if (!server.bind_to_port(host, config.port)) {
      std::cerr << "error: cannot bind " << host << ":" << config.port << " (port already in use?)\n";
      return 1;
    }

    std::jthread stopper([&server, signals] {
      int sig = 0;
      sigwait(&signals, &sig);
      server.stop();
    });
    std::cout << "serving " << analysis.slices().size() << " slices on http://" << host << ":" << config.port
              << std::endl;
    server.listen_after_bind();
    // Unblock the waiter if the server stopped for some other reason.
    pthread_kill(stopper.native_handle(), SIGTERM);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Find and rank under- and over-performing data slices in model predictions"};
  app.require_subcommand(1);

  sliceaudit::AnalysisConfig analyze_cfg;
  std::string analyze_schema;
  std::filesystem::path out_path = "analysis.json";
  auto* analyze = app.add_subcommand("analyze", "Run one analysis and write the full JSON document");
  add_analysis_flags(*analyze, analyze_cfg, analyze_schema);
  analyze->add_option("-o,--out", out_path, "Output JSON path")->capture_default_str();

  sliceaudit::AnalysisConfig serve_cfg;
  std::string serve_schema;
  std::string static_dir;
  std::string host = "127.0.0.1";
  auto* serve = app.add_subcommand("serve", "Analyze once, then serve the query API over HTTP");
  add_analysis_flags(*serve, serve_cfg, serve_schema);
  serve->add_option("--port", serve_cfg.port, "HTTP port")->envname("PORT")->capture_default_str();
  serve->add_option("--host", host, "Bind address")->capture_default_str();
  serve->add_option("--static-dir", static_dir, "Directory of UI assets served at /");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help exits 0; every malformed command line exits 2.
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const auto finish = [](sliceaudit::AnalysisConfig& c, const std::string& schema) -> bool {
    if (!schema.empty()) c.schema_path = schema;
    try {
      sliceaudit::validate(c);
    } catch (const sliceaudit::ValidationError& e) {
      std::cerr << "error: " << e.what() << '\n';
      return false;
    }
    return true;
  };

  if (*analyze) {
    if (!finish(analyze_cfg, analyze_schema)) return 2;
    return sliceaudit::cmd_analyze(analyze_cfg, out_path, std::cout, std::cerr);
  }
  if (!finish(serve_cfg, serve_schema)) return 2;
  return run_serve(serve_cfg, static_dir.empty() ? std::nullopt : std::optional<std::filesystem::path>(static_dir),
                   host);
}
