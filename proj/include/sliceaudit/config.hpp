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

#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sliceaudit/error.hpp"
#include "sliceaudit/ingest.hpp"
#include "sliceaudit/overlap_graph.hpp"
#include "sliceaudit/query.hpp"
#include "sliceaudit/slice_engine.hpp"

namespace sliceaudit {

struct AnalysisConfig {
  std::filesystem::path data_path;
  std::filesystem::path predictions_path;
  std::string label_column;
  std::optional<std::filesystem::path> schema_path;
  int bins = 4;
  int max_degree = 2;
  std::size_t min_size = 30;
  double effect_threshold = 0.4;
  unsigned threads = 1;
  int port = 8080;
};

/// Number of top slices (by |effect_size|) the analyze document graphs.
inline constexpr std::size_t kAnalyzeGraphSlices = 100;

inline void validate(const AnalysisConfig& c) {
  if (c.data_path.empty()) throw ValidationError("a data file is required");
  if (c.predictions_path.empty()) throw ValidationError("a predictions file is required");
  if (c.label_column.empty()) throw ValidationError("a label column is required");
  if (c.bins < 2) throw ValidationError("bins must be at least 2");
  if (c.max_degree != 1 && c.max_degree != 2) throw ValidationError("max-degree must be 1 or 2");
  if (c.min_size < 1) throw ValidationError("min-size must be at least 1");
  if (!(c.effect_threshold > 0) || !std::isfinite(c.effect_threshold))
    throw ValidationError("effect-threshold must be a positive number");
  if (c.threads < 1) throw ValidationError("threads must be at least 1");
  if (c.port < 1 || c.port > 65535) throw ValidationError("port must be in 1..65535");
}

inline Json to_json(const AnalysisConfig& c) {
  Json j;
  j["data_path"] = c.data_path.string();
  j["predictions_path"] = c.predictions_path.string();
  j["label_column"] = c.label_column;
  j["schema_path"] = c.schema_path ? Json(c.schema_path->string()) : Json(nullptr);
  j["bins"] = c.bins;
  j["max_degree"] = c.max_degree;
  j["min_size"] = c.min_size;
  j["effect_threshold"] = c.effect_threshold;
  return j;
}

inline Analysis run_analysis(const AnalysisConfig& c) {
  validate(c);
  const SchemaOverrides overrides = c.schema_path ? load_schema_overrides(*c.schema_path) : SchemaOverrides{};
  Dataset dataset = load_dataset(c.data_path, c.label_column, c.bins, overrides);
  const PredictionSet preds = load_predictions(c.predictions_path, dataset.row_count);
  EngineOptions options;
  options.min_size = c.min_size;
  options.effect_threshold = c.effect_threshold;
  options.max_degree = c.max_degree;
  options.threads = c.threads;
  return Analysis(std::move(dataset), preds, options);
}

/// Full analyze document: config, overall metrics, every slice in engine
/// order, and the overlap graph over the top slices.
inline std::string analysis_document(const Analysis& analysis, const AnalysisConfig& c) {
  std::vector<const SliceStats*> all;
  for (const auto& s : analysis.slices()) all.push_back(&s);
  const std::size_t n_graph = std::min(all.size(), kAnalyzeGraphSlices);
  const OverlapGraph graph = build_graph(std::span<const SliceStats* const>(all.data(), n_graph), 1);
  const auto summaries = summarize(analysis.dataset(), all);
  return serialize_analysis(summaries, analysis.overall(), graph, to_json(c));
}

/// One-shot analysis. Returns the process exit status.
inline int cmd_analyze(const AnalysisConfig& c, const std::filesystem::path& out_path, std::ostream& out,
                       std::ostream& err) {
  try {
    const Analysis analysis = run_analysis(c);
    const std::string doc = analysis_document(analysis, c);
    std::ofstream file(out_path, std::ios::binary);
    if (!file) throw Error("cannot write output file: " + out_path.string());
    file << doc << '\n';
    if (!file) throw Error("failed writing output file: " + out_path.string());

    std::size_t under = 0;
    std::size_t over = 0;
    for (const auto& s : analysis.slices()) {
      under += s.classification == Performance::underperforming;
      over += s.classification == Performance::overperforming;
    }
    out << "slices: " << analysis.slices().size() << " total, " << under << " underperforming, " << over
        << " overperforming, " << analysis.slices().size() - under - over << " neutral\n";
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace sliceaudit
