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

#include <map>
#include <string>
#include <string_view>

#include "sliceaudit/error.hpp"
#include "sliceaudit/overlap_graph.hpp"
#include "sliceaudit/query.hpp"
#include "sliceaudit/slice_engine.hpp"

namespace sliceaudit {

struct Response {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

/// Read-only JSON API over one analysis snapshot. Transport independent;
/// safe to call from many threads at once.
class Service {
 public:
  using Params = std::multimap<std::string, std::string>;

  explicit Service(const Analysis& analysis) : analysis_(analysis) {}

  /// `path` is the decoded request path.
  Response get(std::string_view path, const Params& params = {}) const {
    try {
      if (path == "/api/schema") return ok(dump(schema_to_json(analysis_.dataset())));
      if (path == "/api/overall") return ok(dump(overall_to_json(analysis_.overall())));
      if (path == "/api/slices") return ok(slices(parse_query(params)));
      if (path == "/api/graph") return ok(graph(parse_query(params)));
      constexpr std::string_view kSlicePrefix = "/api/slice/";
      if (path.starts_with(kSlicePrefix)) return slice(path.substr(kSlicePrefix.size()));
      return error(404, "no such endpoint: " + std::string(path));
    } catch (const ValidationError& e) {
      return error(400, e.what());
    }
  }

  std::string slices(const SliceQuery& q) const {
    const auto selected = apply_query(analysis_, q);
    return dump(to_json(summarize(analysis_.dataset(), selected)));
  }

  std::string graph(const SliceQuery& q) const {
    const auto selected = apply_query(analysis_, q);
    return dump(to_json(build_graph(std::span<const SliceStats* const>(selected), q.min_overlap)));
  }

  const Analysis& analysis() const { return analysis_; }

 private:
  Response slice(std::string_view id) const {
    const SliceStats* s = analysis_.find(id);
    if (s == nullptr) return error(404, "unknown slice id: " + std::string(id));
    return ok(dump(to_json(summarize(analysis_.dataset(), *s))));
  }

  static Response ok(std::string body) { return {200, std::move(body)}; }

  static Response error(int status, const std::string& message) {
    Json j;
    j["error"] = message;
    return {status, dump(j)};
  }

  const Analysis& analysis_;
};

}  // namespace sliceaudit
