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
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "sliceaudit/csv.hpp"
#include "sliceaudit/error.hpp"

namespace sliceaudit {

using ValueIndex = std::uint32_t;
inline constexpr ValueIndex kMissing = std::numeric_limits<ValueIndex>::max();

enum class ColumnKind { categorical, continuous };

inline std::string_view to_string(ColumnKind kind) {
  return kind == ColumnKind::categorical ? "categorical" : "continuous";
}

struct ColumnSchema {
  std::string name;
  ColumnKind kind = ColumnKind::categorical;
  std::vector<std::string> categories;  // categorical only, first-seen order
  std::vector<double> bin_edges;        // continuous only, strictly increasing
  std::vector<std::string> bin_labels;  // continuous only, one per bin

  std::size_t cardinality() const {
    return kind == ColumnKind::categorical ? categories.size() : bin_edges.size() + 1;
  }

  const std::string& value_label(ValueIndex v) const {
    return kind == ColumnKind::categorical ? categories.at(v) : bin_labels.at(v);
  }
};

/// Encoded feature table. Row-major; one ValueIndex (or kMissing) per cell.
struct Dataset {
  std::vector<ColumnSchema> schemas;
  std::vector<ValueIndex> encoded;
  std::size_t row_count = 0;
  std::string label_column;

  std::size_t feature_count() const { return schemas.size(); }

  ValueIndex at(std::size_t row, std::size_t feature) const { return encoded[row * schemas.size() + feature]; }

  std::optional<std::size_t> feature_index(std::string_view name) const {
    for (std::size_t i = 0; i < schemas.size(); ++i)
      if (schemas[i].name == name) return i;
    return std::nullopt;
  }

  std::size_t non_missing_count(std::size_t feature) const {
    std::size_t n = 0;
    for (std::size_t r = 0; r < row_count; ++r) n += at(r, feature) != kMissing;
    return n;
  }
};

struct PredictionSet {
  std::vector<std::uint8_t> y_true;
  std::vector<double> p_pos;
  std::vector<std::uint8_t> y_pred;

  std::size_t row_count() const { return y_true.size(); }
};

/// Per-column override read from the optional schema sidecar.
struct ColumnOverride {
  ColumnKind kind = ColumnKind::categorical;
  std::optional<int> bins;
};

using SchemaOverrides = std::map<std::string, ColumnOverride, std::less<>>;

struct BinningResult {
  std::vector<double> edges;
  std::vector<ValueIndex> indices;
  std::vector<std::string> labels;
};

namespace detail {

inline bool is_missing_token(std::string_view s) { return s.empty() || s == "?"; }

inline std::optional<double> parse_number(std::string_view s) {
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(value)) return std::nullopt;
  return value;
}

inline int decimal_places(std::string_view s) {
  const auto dot = s.find('.');
  if (dot == std::string_view::npos) return 0;
  std::size_t n = 0;
  for (std::size_t i = dot + 1; i < s.size() && s[i] >= '0' && s[i] <= '9'; ++i) ++n;
  return static_cast<int>(n);
}

inline std::string shortest(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

/// Fixed formatting at the column's own precision when that is exact,
/// otherwise the shortest round-trip form.
inline std::string format_bound(double v, int decimals) {
  if (v == 0) v = 0;  // no "-0"
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, decimals);
  std::string fixed(buf, ptr);
  const auto back = parse_number(fixed);
  if (back && *back == v) return fixed;
  return shortest(v);
}

/// Linear-interpolation quantile of sorted data (q in [0,1]).
inline double quantile_sorted(std::span<const double> sorted, double q) {
  const double h = static_cast<double>(sorted.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace detail

/// Equal-frequency binning of a numeric column.
///
/// Edges sit at the i/bins quantiles of the non-missing values; repeated
/// edges collapse, and an edge at the maximum (which would leave the top bin
/// empty) is dropped. A value falls in the first bin whose upper edge is
/// >= the value; the last bin is unbounded above. `decimals` controls label
/// precision.
inline BinningResult bin_continuous(std::span<const std::optional<double>> values, int bins, int decimals = 0) {
  if (bins < 2) throw ValidationError("bins must be at least 2, got " + std::to_string(bins));
  std::vector<double> sorted;
  sorted.reserve(values.size());
  for (const auto& v : values)
    if (v) sorted.push_back(*v);
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> uniq = sorted;
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  if (uniq.size() < 2)
    throw IngestError("column has fewer than 2 distinct numeric values; declare it categorical instead");

  BinningResult out;
  for (int i = 1; i < bins; ++i) {
    const double edge = detail::quantile_sorted(sorted, static_cast<double>(i) / bins);
    if (edge >= uniq.back()) continue;
    if (!out.edges.empty() && edge <= out.edges.back()) continue;
    out.edges.push_back(edge);
  }
  if (out.edges.empty()) out.edges.push_back(uniq[uniq.size() - 2]);

  out.indices.reserve(values.size());
  for (const auto& v : values) {
    if (!v) {
      out.indices.push_back(kMissing);
      continue;
    }
    const auto it = std::lower_bound(out.edges.begin(), out.edges.end(), *v);
    out.indices.push_back(static_cast<ValueIndex>(it - out.edges.begin()));
  }

  const std::size_t n_bins = out.edges.size() + 1;
  for (std::size_t b = 0; b < n_bins; ++b) {
    const double lo = b == 0 ? uniq.front() : out.edges[b - 1];
    const double hi = b + 1 == n_bins ? uniq.back() : out.edges[b];
    out.labels.push_back(detail::format_bound(lo, decimals) + "\xE2\x80\x93" + detail::format_bound(hi, decimals));
  }
  return out;
}

/// Reads the schema sidecar: a JSON array of {name, kind, bins?}.
inline SchemaOverrides load_schema_overrides(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestError("file not found: " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IngestError("invalid schema file " + path.string() + ": " + e.what());
  }
  if (!doc.is_array()) throw IngestError("schema file must hold a JSON array: " + path.string());
  SchemaOverrides out;
  for (const auto& entry : doc) {
    if (!entry.is_object() || !entry.contains("name") || !entry.contains("kind"))
      throw IngestError("schema entries need \"name\" and \"kind\": " + entry.dump());
    const auto name = entry.at("name").get<std::string>();
    const auto kind = entry.at("kind").get<std::string>();
    ColumnOverride o;
    if (kind == "categorical") {
      o.kind = ColumnKind::categorical;
    } else if (kind == "continuous") {
      o.kind = ColumnKind::continuous;
    } else {
      throw IngestError("unknown kind \"" + kind + "\" for column " + name + " (expected categorical or continuous)");
    }
    if (entry.contains("bins")) {
      o.bins = entry.at("bins").get<int>();
      if (*o.bins < 2) throw IngestError("bins for column " + name + " must be at least 2");
    }
    out.emplace(name, o);
  }
  return out;
}

/// Builds a Dataset from an already parsed table.
inline Dataset encode_table(const csv::Table& table, std::string_view label_column, int bins,
                            const SchemaOverrides& overrides = {}) {
  if (bins < 2) throw ValidationError("bins must be at least 2, got " + std::to_string(bins));
  const auto& header = table.header;
  {
    std::set<std::string_view> seen;
    for (const auto& h : header)
      if (!seen.insert(h).second) throw IngestError("duplicate column name: " + h);
  }
  const auto label_it = std::find(header.begin(), header.end(), label_column);
  if (label_it == header.end()) throw IngestError("label column not found: " + std::string(label_column));
  for (const auto& [name, _] : overrides)
    if (std::find(header.begin(), header.end(), name) == header.end())
      throw IngestError("schema file names unknown column: " + name);

  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    if (table.rows[r].size() != header.size())
      throw IngestError("row " + std::to_string(r) + " (line " + std::to_string(table.lines[r]) + ") has " +
                        std::to_string(table.rows[r].size()) + " fields, expected " + std::to_string(header.size()));
  }

  Dataset ds;
  ds.row_count = table.rows.size();
  ds.label_column = std::string(label_column);
  std::vector<std::size_t> source_cols;
  for (std::size_t c = 0; c < header.size(); ++c)
    if (header[c] != label_column) source_cols.push_back(c);
  ds.encoded.assign(ds.row_count * source_cols.size(), kMissing);

  for (std::size_t f = 0; f < source_cols.size(); ++f) {
    const std::size_t c = source_cols[f];
    ColumnSchema schema;
    schema.name = header[c];

    std::vector<std::optional<double>> numbers(ds.row_count);
    bool all_numeric = true;
    int decimals = 0;
    std::set<double> distinct;
    for (std::size_t r = 0; r < ds.row_count; ++r) {
      const auto& cell = table.rows[r][c];
      if (detail::is_missing_token(cell)) continue;
      numbers[r] = detail::parse_number(cell);
      if (!numbers[r]) {
        all_numeric = false;
        continue;
      }
      distinct.insert(*numbers[r]);
      decimals = std::max(decimals, detail::decimal_places(cell));
    }

    int column_bins = bins;
    const auto ov = overrides.find(schema.name);
    if (ov != overrides.end()) {
      schema.kind = ov->second.kind;
      if (ov->second.bins) column_bins = *ov->second.bins;
      if (schema.kind == ColumnKind::continuous && !all_numeric)
        throw IngestError("column " + schema.name + " is declared continuous but holds non-numeric values");
    } else {
      schema.kind = all_numeric && distinct.size() > static_cast<std::size_t>(bins) ? ColumnKind::continuous
                                                                                     : ColumnKind::categorical;
    }

    if (schema.kind == ColumnKind::continuous) {
      BinningResult binned;
      try {
        binned = bin_continuous(numbers, column_bins, decimals);
      } catch (const IngestError& e) {
        throw IngestError("column " + schema.name + ": " + e.what());
      }
      schema.bin_edges = std::move(binned.edges);
      schema.bin_labels = std::move(binned.labels);
      for (std::size_t r = 0; r < ds.row_count; ++r) ds.encoded[r * source_cols.size() + f] = binned.indices[r];
    } else {
      std::unordered_map<std::string, ValueIndex> index;
      for (std::size_t r = 0; r < ds.row_count; ++r) {
        const auto& cell = table.rows[r][c];
        if (detail::is_missing_token(cell)) continue;
        auto [it, inserted] = index.try_emplace(cell, static_cast<ValueIndex>(schema.categories.size()));
        if (inserted) schema.categories.push_back(cell);
        ds.encoded[r * source_cols.size() + f] = it->second;
      }
    }
    ds.schemas.push_back(std::move(schema));
  }
  return ds;
}

inline Dataset load_dataset(const std::filesystem::path& path, std::string_view label_column, int bins,
                            const SchemaOverrides& overrides = {}) {
  return encode_table(csv::read_file(path), label_column, bins, overrides);
}

inline PredictionSet load_predictions(const std::filesystem::path& path, std::size_t n_rows) {
  const csv::Table table = csv::read_file(path);
  const auto column = [&](std::string_view name) -> std::optional<std::size_t> {
    const auto it = std::find(table.header.begin(), table.header.end(), name);
    if (it == table.header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - table.header.begin());
  };
  const auto y_col = column("y_true");
  const auto p_col = column("p_pos");
  const auto yp_col = column("y_pred");
  if (!y_col || !p_col) throw IngestError("prediction file needs y_true and p_pos columns: " + path.string());
  if (table.rows.size() != n_rows)
    throw IngestError("prediction file has " + std::to_string(table.rows.size()) + " rows but the dataset has " +
                      std::to_string(n_rows));

  const auto label = [&](std::size_t r, std::size_t c, std::string_view what) -> std::uint8_t {
    const auto v = detail::parse_number(table.rows[r][c]);
    if (!v || (*v != 0 && *v != 1))
      throw IngestError("row " + std::to_string(r) + ": " + std::string(what) + " must be 0 or 1, got \"" +
                        table.rows[r][c] + "\"");
    return static_cast<std::uint8_t>(*v);
  };

  PredictionSet preds;
  preds.y_true.reserve(n_rows);
  preds.p_pos.reserve(n_rows);
  preds.y_pred.reserve(n_rows);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    if (table.rows[r].size() != table.header.size())
      throw IngestError("prediction row " + std::to_string(r) + " (line " + std::to_string(table.lines[r]) +
                        ") has " + std::to_string(table.rows[r].size()) + " fields, expected " +
                        std::to_string(table.header.size()));
    preds.y_true.push_back(label(r, *y_col, "y_true"));
    const auto p = detail::parse_number(table.rows[r][*p_col]);
    if (!p || *p < 0.0 || *p > 1.0)
      throw IngestError("row " + std::to_string(r) + ": p_pos must lie in [0,1], got \"" + table.rows[r][*p_col] +
                        "\"");
    preds.p_pos.push_back(*p);
    preds.y_pred.push_back(yp_col ? label(r, *yp_col, "y_pred") : static_cast<std::uint8_t>(*p >= 0.5));
  }
  return preds;
}

}  // namespace sliceaudit
