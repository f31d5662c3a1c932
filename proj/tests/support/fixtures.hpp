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

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "sliceaudit/csv.hpp"
#include "sliceaudit/ingest.hpp"
#include "sliceaudit/slice_engine.hpp"
#include "support/synthetic.hpp"

namespace testing_support {

/// Categorical-only dataset from string cells; an unused "label" column is
/// appended so the normal encoder can be reused. "?" cells are missing.
inline sliceaudit::Dataset categorical_dataset(const std::vector<std::string>& header,
                                               const std::vector<std::vector<std::string>>& rows) {
  sliceaudit::csv::Table t;
  t.header = header;
  t.header.push_back("label");
  for (std::size_t r = 0; r < rows.size(); ++r) {
    t.rows.push_back(rows[r]);
    t.rows.back().push_back("0");
    t.lines.push_back(r + 2);
  }
  sliceaudit::SchemaOverrides all_categorical;
  for (const auto& h : header) all_categorical[h] = sliceaudit::ColumnOverride{sliceaudit::ColumnKind::categorical, {}};
  return sliceaudit::encode_table(t, "label", 4, all_categorical);
}

/// Percent-encodes everything outside the RFC 3986 unreserved set.
inline std::string percent_encode(std::string_view s) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if ((c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '_' ||
        c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 15]);
    }
  }
  return out;
}

inline sliceaudit::PredictionSet predictions(std::vector<std::uint8_t> y, std::vector<double> p) {
  sliceaudit::PredictionSet out;
  out.y_true = std::move(y);
  out.p_pos = std::move(p);
  for (double v : out.p_pos) out.y_pred.push_back(v >= 0.5 ? 1 : 0);
  return out;
}

struct LoadedCase {
  SyntheticCase recipe;
  sliceaudit::Dataset dataset;
  sliceaudit::PredictionSet preds;
};

/// Materializes a synthetic case through the real file loaders.
inline LoadedCase load_case(std::uint64_t seed, std::size_t max_rows = 500, std::size_t max_features = 5) {
  TempDir dir;
  LoadedCase c;
  c.recipe = make_case(seed, max_rows, max_features);
  c.dataset = sliceaudit::load_dataset(dir.write("data.csv", c.recipe.data_csv), c.recipe.label, c.recipe.bins);
  c.preds = sliceaudit::load_predictions(dir.write("preds.csv", c.recipe.predictions_csv), c.dataset.row_count);
  return c;
}

}  // namespace testing_support
