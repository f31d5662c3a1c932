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
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>

#include "sliceaudit/error.hpp"

namespace sliceaudit {

/// Probabilities are clamped to [eps, 1 - eps] before taking logs.
inline constexpr double kProbabilityEpsilon = 1e-15;

/// Binary confusion counts.
struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }

  void add(std::uint8_t y_true, std::uint8_t y_pred) {
    if (y_true) {
      y_pred ? ++tp : ++fn;
    } else {
      y_pred ? ++fp : ++tn;
    }
  }
};

struct ClassificationMetrics {
  double accuracy = 0;
  double balanced_accuracy = 0;
  std::optional<double> precision;  // nullopt when TP + FP = 0
  std::optional<double> recall;     // nullopt when TP + FN = 0
  bool degenerate = false;          // one-class input or an undefined ratio
};

/// Metrics for one slice, or for the whole model.
struct MetricBundle {
  double log_loss = 0;  // nats
  double accuracy = 0;
  double balanced_accuracy = 0;
  std::optional<double> precision;
  std::optional<double> recall;
  std::size_t size = 0;
  bool degenerate = false;
};

/// Negative log-likelihood of a single row.
inline double row_log_loss(std::uint8_t y_true, double p_pos) {
  const double p = std::clamp(p_pos, kProbabilityEpsilon, 1.0 - kProbabilityEpsilon);
  return y_true ? -std::log(p) : -std::log1p(-p);
}

inline double log_loss(std::span<const std::uint8_t> y_true, std::span<const double> p_pos) {
  if (y_true.empty() || y_true.size() != p_pos.size())
    throw UndefinedMetric("log loss needs non-empty inputs of equal length");
  double sum = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) sum += row_log_loss(y_true[i], p_pos[i]);
  return sum / static_cast<double>(y_true.size());
}

/// Balanced accuracy falls back to the present class's recall when only one
/// true class occurs; such results are flagged degenerate.
inline ClassificationMetrics classification_metrics(const Confusion& c) {
  if (c.total() == 0) throw UndefinedMetric("classification metrics need at least one row");
  const auto ratio = [](std::size_t num, std::size_t den) -> std::optional<double> {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
  };
  ClassificationMetrics m;
  m.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
  m.precision = ratio(c.tp, c.tp + c.fp);
  m.recall = ratio(c.tp, c.tp + c.fn);
  const auto tpr = m.recall;
  const auto tnr = ratio(c.tn, c.tn + c.fp);
  if (tpr && tnr) {
    m.balanced_accuracy = (*tpr + *tnr) / 2;
  } else {
    m.balanced_accuracy = tpr ? *tpr : *tnr;
    m.degenerate = true;
  }
  if (!m.precision || !m.recall) m.degenerate = true;
  return m;
}

inline ClassificationMetrics classification_metrics(std::span<const std::uint8_t> y_true,
                                                    std::span<const std::uint8_t> y_pred) {
  if (y_true.empty() || y_true.size() != y_pred.size())
    throw UndefinedMetric("classification metrics need non-empty inputs of equal length");
  Confusion c;
  for (std::size_t i = 0; i < y_true.size(); ++i) c.add(y_true[i], y_pred[i]);
  return classification_metrics(c);
}

inline MetricBundle make_bundle(double mean_log_loss, const Confusion& c) {
  const auto cm = classification_metrics(c);
  MetricBundle b;
  b.log_loss = mean_log_loss;
  b.accuracy = cm.accuracy;
  b.balanced_accuracy = cm.balanced_accuracy;
  b.precision = cm.precision;
  b.recall = cm.recall;
  b.size = c.total();
  b.degenerate = cm.degenerate;
  return b;
}

/// Signed percent difference of a slice value relative to the overall value.
inline double pct_diff(double slice_value, double overall_value) {
  if (overall_value == 0) throw UndefinedMetric("percent difference against a zero reference value");
  return (100.0 * slice_value - 100.0 * overall_value) / overall_value;
}

}  // namespace sliceaudit
