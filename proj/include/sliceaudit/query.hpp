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

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "sliceaudit/error.hpp"
#include "sliceaudit/metrics.hpp"
#include "sliceaudit/overlap_graph.hpp"
#include "sliceaudit/slice_engine.hpp"

namespace sliceaudit {

using Json = nlohmann::ordered_json;

enum class SortKey { log_loss, log_loss_pct_diff, effect_size, size, accuracy, balanced_accuracy, precision, recall };

inline constexpr std::array<std::pair<SortKey, std::string_view>, 8> kSortKeys{{
    {SortKey::log_loss, "log_loss"},
    {SortKey::log_loss_pct_diff, "log_loss_pct_diff"},
    {SortKey::effect_size, "effect_size"},
    {SortKey::size, "size"},
    {SortKey::accuracy, "accuracy"},
    {SortKey::balanced_accuracy, "balanced_accuracy"},
    {SortKey::precision, "precision"},
    {SortKey::recall, "recall"},
}};

inline std::string_view to_string(SortKey key) {
  for (const auto& [k, name] : kSortKeys)
    if (k == key) return name;
  return "effect_size";
}

inline SortKey parse_sort_key(std::string_view name) {
  for (const auto& [k, n] : kSortKeys)
    if (n == name) return k;
  std::string valid;
  for (const auto& [k, n] : kSortKeys) valid += (valid.empty() ? "" : ", ") + std::string(n);
  throw ValidationError("unknown sort_by \"" + std::string(name) + "\"; valid options: " + valid);
}

inline Performance parse_performance_class(std::string_view name) {
  if (name == "underperforming") return Performance::underperforming;
  if (name == "overperforming") return Performance::overperforming;
  throw ValidationError("unknown class \"" + std::string(name) + "\"; valid options: underperforming, overperforming");
}

struct SliceQuery {
  SortKey sort_by = SortKey::effect_size;
  std::optional<std::size_t> top_k;  // nullopt = ALL
  std::size_t min_size = 1;
  std::vector<std::string> features_include;
  Performance performance_class = Performance::underperforming;
  std::size_t min_overlap = 1;  // graph requests only
};

inline void validate(const SliceQuery& q, const Dataset& dataset) {
  if (q.top_k && *q.top_k < 1) throw ValidationError("top_k must be at least 1 or \"all\"");
  if (q.min_size < 1) throw ValidationError("min_size must be at least 1");
  if (q.min_overlap < 1) throw ValidationError("min_overlap must be at least 1");
  if (q.performance_class == Performance::neutral)
    throw ValidationError("class must be underperforming or overperforming");
  for (const auto& f : q.features_include) {
    if (dataset.feature_index(f)) continue;
    std::string valid;
    for (const auto& s : dataset.schemas) valid += (valid.empty() ? "" : ", ") + s.name;
    throw ValidationError("unknown feature \"" + f + "\"; valid options: " + valid);
  }
}

namespace detail {

inline std::size_t parse_count(std::string_view name, std::string_view text) {
  std::size_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size())
    throw ValidationError(std::string(name) + " must be a non-negative integer, got \"" + std::string(text) + "\"");
  return value;
}

}  // namespace detail

/// Builds a query from URL parameters: sort_by, top_k ("all" or integer),
/// min_size, features (comma separated), class, min_overlap.
inline SliceQuery parse_query(const std::multimap<std::string, std::string>& params) {
  SliceQuery q;
  for (const auto& [key, value] : params) {
    if (key == "sort_by") {
      q.sort_by = parse_sort_key(value);
    } else if (key == "top_k") {
      if (value == "all" || value == "ALL") {
        q.top_k.reset();
      } else {
        q.top_k = detail::parse_count(key, value);
      }
    } else if (key == "min_size") {
      q.min_size = detail::parse_count(key, value);
    } else if (key == "features") {
      std::string_view rest = value;
      while (!rest.empty()) {
        const auto comma = rest.find(',');
        const auto item = rest.substr(0, comma);
        if (!item.empty()) q.features_include.emplace_back(item);
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
      }
    } else if (key == "class") {
      q.performance_class = parse_performance_class(value);
    } else if (key == "min_overlap") {
      q.min_overlap = detail::parse_count(key, value);
    } else {
      throw ValidationError("unknown query parameter \"" + key +
                            "\"; valid parameters: sort_by, top_k, min_size, features, class, min_overlap");
    }
  }
  return q;
}

inline std::optional<double> sort_value(const SliceStats& s, SortKey key) {
  switch (key) {
    case SortKey::log_loss:
      return s.metrics.log_loss;
    case SortKey::log_loss_pct_diff:
      return s.log_loss_pct_diff;
    case SortKey::effect_size:
      return s.effect_size;
    case SortKey::size:
      return static_cast<double>(s.size);
    case SortKey::accuracy:
      return s.metrics.accuracy;
    case SortKey::balanced_accuracy:
      return s.metrics.balanced_accuracy;
    case SortKey::precision:
      return s.metrics.precision;
    case SortKey::recall:
      return s.metrics.recall;
  }
  return std::nullopt;
}

/// Loss-like and size keys sort descending. Accuracy-family keys sort worst
/// first (ascending) for underperforming slices and best first otherwise.
inline bool sorts_descending(SortKey key, Performance view) {
  switch (key) {
    case SortKey::log_loss:
    case SortKey::log_loss_pct_diff:
    case SortKey::effect_size:
    case SortKey::size:
      return true;
    default:
      return view == Performance::overperforming;
  }
}

/// Filters (class, min_size, features) then sorts and truncates.
inline std::vector<const SliceStats*> apply_query(const Analysis& analysis, const SliceQuery& q) {
  validate(q, analysis.dataset());
  std::vector<std::size_t> wanted;
  for (const auto& f : q.features_include) wanted.push_back(*analysis.dataset().feature_index(f));

  std::vector<const SliceStats*> out;
  for (const auto& s : analysis.slices()) {
    if (s.classification != q.performance_class) continue;
    if (s.size < q.min_size) continue;
    if (!wanted.empty()) {
      const bool hit = std::any_of(s.def.predicates.begin(), s.def.predicates.end(), [&](const Predicate& p) {
        return std::find(wanted.begin(), wanted.end(), p.feature) != wanted.end();
      });
      if (!hit) continue;
    }
    out.push_back(&s);
  }

  const bool descending = sorts_descending(q.sort_by, q.performance_class);
  std::sort(out.begin(), out.end(), [&](const SliceStats* a, const SliceStats* b) {
    const auto va = sort_value(*a, q.sort_by);
    const auto vb = sort_value(*b, q.sort_by);
    if (va.has_value() != vb.has_value()) return va.has_value();
    if (va && *va != *vb) return descending ? *va > *vb : *va < *vb;
    return a->def.id < b->def.id;
  });
  if (q.top_k && out.size() > *q.top_k) out.resize(*q.top_k);
  return out;
}

// ---------------------------------------------------------------------------
// Wire format

struct SliceSummary {
  std::string id;
  std::vector<std::pair<std::string, std::string>> predicates;  // (feature, value)
  std::size_t degree = 0;
  std::size_t size = 0;
  MetricBundle metrics;
  std::optional<double> effect_size;
  std::optional<double> log_loss_pct_diff;
  Performance classification = Performance::neutral;
  bool degenerate = false;
};

inline SliceSummary summarize(const Dataset& dataset, const SliceStats& s) {
  SliceSummary out;
  out.id = s.def.id;
  for (const auto& p : s.def.predicates) {
    const auto& schema = dataset.schemas[p.feature];
    out.predicates.emplace_back(schema.name, schema.value_label(p.value));
  }
  out.degree = s.def.degree();
  out.size = s.size;
  out.metrics = s.metrics;
  out.effect_size = s.effect_size;
  out.log_loss_pct_diff = s.log_loss_pct_diff;
  out.classification = s.classification;
  out.degenerate = s.metrics.degenerate || !s.effect_size || !s.log_loss_pct_diff;
  return out;
}

inline std::vector<SliceSummary> summarize(const Dataset& dataset, std::span<const SliceStats* const> slices) {
  std::vector<SliceSummary> out;
  out.reserve(slices.size());
  for (const auto* s : slices) out.push_back(summarize(dataset, *s));
  return out;
}

/// Undefined values become null; infinite effect sizes become the strings
/// "inf" / "-inf" so the document stays valid JSON.
inline Json number_or_null(std::optional<double> v) {
  if (!v) return nullptr;
  if (std::isinf(*v)) return *v > 0 ? "inf" : "-inf";
  if (std::isnan(*v)) return nullptr;
  return *v;
}

inline Json to_json(const MetricBundle& m) {
  Json j;
  j["log_loss"] = m.log_loss;
  j["accuracy"] = m.accuracy;
  j["balanced_accuracy"] = m.balanced_accuracy;
  j["precision"] = number_or_null(m.precision);
  j["recall"] = number_or_null(m.recall);
  j["size"] = m.size;
  return j;
}

inline Json overall_to_json(const MetricBundle& m) {
  Json j = to_json(m);
  j["degenerate"] = m.degenerate;
  return j;
}

inline Json to_json(const SliceSummary& s) {
  Json preds = Json::array();
  for (const auto& [feature, value] : s.predicates) {
    Json p;
    p["feature"] = feature;
    p["value"] = value;
    preds.push_back(std::move(p));
  }
  Json j;
  j["id"] = s.id;
  j["predicates"] = std::move(preds);
  j["degree"] = s.degree;
  j["size"] = s.size;
  j["metrics"] = to_json(s.metrics);
  j["effect_size"] = number_or_null(s.effect_size);
  j["log_loss_pct_diff"] = number_or_null(s.log_loss_pct_diff);
  j["classification"] = to_string(s.classification);
  j["degenerate"] = s.degenerate;
  return j;
}

inline Json to_json(std::span<const SliceSummary> summaries) {
  Json arr = Json::array();
  for (const auto& s : summaries) arr.push_back(to_json(s));
  return arr;
}

inline Json to_json(const OverlapGraph& g) {
  Json edges = Json::array();
  for (const auto& e : g.edges) {
    Json je;
    je["a"] = e.a;
    je["b"] = e.b;
    je["overlap"] = e.overlap;
    edges.push_back(std::move(je));
  }
  Json j;
  j["nodes"] = g.node_ids;
  j["edges"] = std::move(edges);
  return j;
}

inline Json schema_to_json(const Dataset& dataset) {
  Json features = Json::array();
  for (const auto& s : dataset.schemas) {
    Json f;
    f["name"] = s.name;
    f["kind"] = to_string(s.kind);
    Json values = Json::array();
    for (ValueIndex v = 0; v < s.cardinality(); ++v) values.push_back(s.value_label(v));
    f["values"] = std::move(values);
    if (s.kind == ColumnKind::continuous) f["bin_edges"] = s.bin_edges;
    features.push_back(std::move(f));
  }
  Json j;
  j["label"] = dataset.label_column;
  j["row_count"] = dataset.row_count;
  j["features"] = std::move(features);
  return j;
}

/// Compact, key-ordered JSON with shortest round-trip floats.
inline std::string dump(const Json& j) { return j.dump(); }

/// The full analysis document:
/// {"config"?, "overall", "slices", "graph"?}.
inline std::string serialize_analysis(std::span<const SliceSummary> summaries, const MetricBundle& overall,
                                      const std::optional<OverlapGraph>& graph = std::nullopt,
                                      const std::optional<Json>& config = std::nullopt) {
  Json doc;
  if (config) doc["config"] = *config;
  doc["overall"] = overall_to_json(overall);
  doc["slices"] = to_json(summaries);
  if (graph) doc["graph"] = to_json(*graph);
  return dump(doc);
}

}  // namespace sliceaudit
