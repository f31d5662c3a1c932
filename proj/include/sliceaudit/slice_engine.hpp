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
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sliceaudit/bitset.hpp"
#include "sliceaudit/error.hpp"
#include "sliceaudit/ingest.hpp"
#include "sliceaudit/metrics.hpp"

namespace sliceaudit {

struct Predicate {
  std::size_t feature = 0;
  ValueIndex value = 0;

  friend bool operator==(const Predicate&, const Predicate&) = default;
};

/// A conjunction of one or two feature = value predicates.
struct SliceDef {
  std::vector<Predicate> predicates;  // sorted by (feature name, value label)
  std::string id;                     // "feature:value" terms joined by '|'

  std::size_t degree() const { return predicates.size(); }
};

enum class Performance { underperforming, overperforming, neutral };

inline std::string_view to_string(Performance p) {
  switch (p) {
    case Performance::underperforming:
      return "underperforming";
    case Performance::overperforming:
      return "overperforming";
    case Performance::neutral:
      break;
  }
  return "neutral";
}

struct SliceStats {
  SliceDef def;
  RowBitset membership;
  std::size_t size = 0;
  MetricBundle metrics;
  std::optional<double> effect_size;  // nullopt when either side has < 2 rows
  std::optional<double> log_loss_pct_diff;
  Performance classification = Performance::neutral;
};

struct EngineOptions {
  std::size_t min_size = 30;
  double effect_threshold = 0.4;
  int max_degree = 2;
  unsigned threads = 1;
};

/// Membership bitsets per (feature, value). by_feature[f][v] holds the rows
/// whose feature f encodes to v.
struct SliceIndex {
  std::vector<std::vector<RowBitset>> by_feature;

  const RowBitset& rows(const Predicate& p) const { return by_feature[p.feature][p.value]; }
};

inline SliceIndex build_index(const Dataset& dataset) {
  SliceIndex index;
  index.by_feature.resize(dataset.feature_count());
  for (std::size_t f = 0; f < dataset.feature_count(); ++f)
    index.by_feature[f].assign(dataset.schemas[f].cardinality(), RowBitset(dataset.row_count));
  for (std::size_t r = 0; r < dataset.row_count; ++r) {
    for (std::size_t f = 0; f < dataset.feature_count(); ++f) {
      const ValueIndex v = dataset.at(r, f);
      if (v != kMissing) index.by_feature[f][v].set(r);
    }
  }
  return index;
}

/// Welford accumulator for mean and unbiased variance.
///
/// A run of identical values yields exactly that value as the mean and an
/// exactly zero variance.
struct RunningStats {
  std::size_t n = 0;
  double mean = 0;
  double m2 = 0;

  void add(double x) {
    ++n;
    const double delta = x - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (x - mean);
  }

  double variance() const { return n < 2 ? 0.0 : m2 / static_cast<double>(n - 1); }
};

/// Pooled-variance standardized mean difference, slice minus complement.
/// Zero spread on both sides gives 0 for equal means and +/-infinity otherwise.
inline double effect_size(const RunningStats& slice, const RunningStats& complement) {
  if (slice.n < 2 || complement.n < 2)
    throw UndefinedMetric("effect size needs at least 2 rows in both the slice and its complement");
  const double var_s = slice.variance();
  const double var_c = complement.variance();
  const double diff = slice.mean - complement.mean;
  if (var_s == 0 && var_c == 0) {
    if (diff == 0) return 0.0;
    return diff > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
  }
  return diff / std::sqrt((var_s + var_c) / 2);
}

inline double effect_size(std::span<const double> slice_losses, std::span<const double> complement_losses) {
  RunningStats s;
  RunningStats c;
  for (double x : slice_losses) s.add(x);
  for (double x : complement_losses) c.add(x);
  return effect_size(s, c);
}

inline Performance classify(std::optional<double> effect, double threshold) {
  if (!effect) return Performance::neutral;
  if (*effect >= threshold) return Performance::underperforming;
  if (*effect <= -threshold) return Performance::overperforming;
  return Performance::neutral;
}

/// Canonical definition: predicates ordered by (feature name, value label).
inline SliceDef make_slice_def(const Dataset& dataset, std::vector<Predicate> predicates) {
  const auto key = [&](const Predicate& p) {
    const auto& schema = dataset.schemas.at(p.feature);
    return std::pair<const std::string&, const std::string&>(schema.name, schema.value_label(p.value));
  };
  std::sort(predicates.begin(), predicates.end(),
            [&](const Predicate& a, const Predicate& b) { return key(a) < key(b); });
  SliceDef def;
  for (const auto& p : predicates) {
    if (!def.id.empty()) def.id += '|';
    const auto [name, label] = key(p);
    def.id += name;
    def.id += ':';
    def.id += label;
  }
  def.predicates = std::move(predicates);
  return def;
}

inline MetricBundle overall_metrics(const PredictionSet& preds) {
  if (preds.row_count() == 0) throw UndefinedMetric("overall metrics need at least one prediction");
  double sum = 0;
  Confusion c;
  for (std::size_t r = 0; r < preds.row_count(); ++r) {
    sum += row_log_loss(preds.y_true[r], preds.p_pos[r]);
    c.add(preds.y_true[r], preds.y_pred[r]);
  }
  return make_bundle(sum / static_cast<double>(preds.row_count()), c);
}

/// Deterministic output order: larger |effect_size| first, undefined last,
/// then id ascending.
inline bool slice_order(const SliceStats& a, const SliceStats& b) {
  if (a.effect_size.has_value() != b.effect_size.has_value()) return a.effect_size.has_value();
  if (a.effect_size) {
    const double ma = std::abs(*a.effect_size);
    const double mb = std::abs(*b.effect_size);
    if (ma != mb) return ma > mb;
  }
  return a.def.id < b.def.id;
}

namespace detail {

struct Candidate {
  std::vector<Predicate> predicates;
  RowBitset membership;
};

inline SliceStats evaluate(const Dataset& dataset, const PredictionSet& preds, std::span<const double> losses,
                           const MetricBundle& overall, double threshold, Candidate candidate) {
  SliceStats out;
  out.def = make_slice_def(dataset, std::move(candidate.predicates));
  out.membership = std::move(candidate.membership);

  RunningStats in_slice;
  RunningStats in_complement;
  double loss_sum = 0;
  Confusion confusion;
  const auto words = out.membership.words();
  const std::size_t n = out.membership.size();
  for (std::size_t wi = 0; wi < words.size(); ++wi) {
    const std::size_t base = wi * RowBitset::kWordBits;
    const std::size_t limit = std::min(RowBitset::kWordBits, n - base);
    const RowBitset::word_type w = words[wi];
    for (std::size_t b = 0; b < limit; ++b) {
      const std::size_t r = base + b;
      if ((w >> b) & 1u) {
        in_slice.add(losses[r]);
        loss_sum += losses[r];
        confusion.add(preds.y_true[r], preds.y_pred[r]);
      } else {
        in_complement.add(losses[r]);
      }
    }
  }

  out.size = in_slice.n;
  out.metrics = make_bundle(loss_sum / static_cast<double>(out.size), confusion);
  if (overall.log_loss > 0) out.log_loss_pct_diff = pct_diff(out.metrics.log_loss, overall.log_loss);
  if (in_slice.n >= 2 && in_complement.n >= 2) out.effect_size = effect_size(in_slice, in_complement);
  out.classification = classify(out.effect_size, threshold);
  return out;
}

}  // namespace detail

/// Enumerates every slice of degree <= max_degree with at least min_size
/// rows and scores it. The result is ordered by slice_order.
inline std::vector<SliceStats> enumerate_slices(const Dataset& dataset, const PredictionSet& preds,
                                                const EngineOptions& options) {
  if (dataset.row_count == 0) throw Error("dataset has no rows");
  if (preds.row_count() != dataset.row_count)
    throw Error("prediction row count " + std::to_string(preds.row_count()) + " does not match dataset row count " +
                std::to_string(dataset.row_count));
  if (options.min_size < 1) throw ValidationError("min_size must be at least 1");
  if (!(options.effect_threshold > 0)) throw ValidationError("effect_threshold must be positive");
  if (options.max_degree != 1 && options.max_degree != 2) throw ValidationError("max_degree must be 1 or 2");

  std::vector<double> losses(preds.row_count());
  for (std::size_t r = 0; r < losses.size(); ++r) losses[r] = row_log_loss(preds.y_true[r], preds.p_pos[r]);
  const MetricBundle overall = overall_metrics(preds);
  const SliceIndex index = build_index(dataset);

  std::vector<detail::Candidate> candidates;
  std::vector<std::vector<std::size_t>> counts(dataset.feature_count());
  for (std::size_t f = 0; f < dataset.feature_count(); ++f) {
    for (ValueIndex v = 0; v < index.by_feature[f].size(); ++v) {
      counts[f].push_back(index.by_feature[f][v].count());
      if (counts[f][v] >= options.min_size) candidates.push_back({{{f, v}}, index.by_feature[f][v]});
    }
  }
  if (options.max_degree == 2) {
    for (std::size_t f = 0; f < dataset.feature_count(); ++f) {
      for (std::size_t g = f + 1; g < dataset.feature_count(); ++g) {
        for (ValueIndex v = 0; v < counts[f].size(); ++v) {
          if (counts[f][v] < options.min_size) continue;
          for (ValueIndex w = 0; w < counts[g].size(); ++w) {
            if (counts[g][w] < options.min_size) continue;
            const auto& a = index.by_feature[f][v];
            const auto& b = index.by_feature[g][w];
            if (intersect_count(a, b) < options.min_size) continue;
            candidates.push_back({{{f, v}, {g, w}}, a & b});
          }
        }
      }
    }
  }

  std::vector<SliceStats> slices(candidates.size());
  const auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      slices[i] = detail::evaluate(dataset, preds, losses, overall, options.effect_threshold, std::move(candidates[i]));
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(options.threads, candidates.size()));
  if (workers == 1) {
    run(0, candidates.size());
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (candidates.size() + workers - 1) / workers;
    for (std::size_t t = 0; t < workers; ++t) {
      const std::size_t begin = t * chunk;
      const std::size_t end = std::min(candidates.size(), begin + chunk);
      if (begin < end) pool.emplace_back(run, begin, end);
    }
  }

  std::sort(slices.begin(), slices.end(), slice_order);
  return slices;
}

/// Immutable result of one analysis run: the encoded dataset, overall
/// metrics and every scored slice, with an id lookup.
class Analysis {
 public:
  Analysis(Dataset dataset, const PredictionSet& preds, EngineOptions options)
      : dataset_(std::move(dataset)),
        options_(options),
        overall_(overall_metrics(preds)),
        slices_(enumerate_slices(dataset_, preds, options_)) {
    index_ids();
  }

  /// Wraps slices scored elsewhere; they are re-sorted into engine order.
  Analysis(Dataset dataset, MetricBundle overall, std::vector<SliceStats> slices, EngineOptions options)
      : dataset_(std::move(dataset)), options_(options), overall_(overall), slices_(std::move(slices)) {
    std::sort(slices_.begin(), slices_.end(), slice_order);
    index_ids();
  }

  const Dataset& dataset() const { return dataset_; }
  const EngineOptions& options() const { return options_; }
  const MetricBundle& overall() const { return overall_; }
  std::span<const SliceStats> slices() const { return slices_; }

  const SliceStats* find(std::string_view id) const {
    const auto it = by_id_.find(std::string(id));
    return it == by_id_.end() ? nullptr : &slices_[it->second];
  }

 private:
  void index_ids() {
    by_id_.reserve(slices_.size());
    for (std::size_t i = 0; i < slices_.size(); ++i) {
      if (!by_id_.emplace(slices_[i].def.id, i).second) throw Error("duplicate slice id: " + slices_[i].def.id);
    }
  }

  Dataset dataset_;
  EngineOptions options_;
  MetricBundle overall_;
  std::vector<SliceStats> slices_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

}  // namespace sliceaudit
