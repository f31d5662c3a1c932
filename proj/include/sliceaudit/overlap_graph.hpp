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
#include <cstddef>
#include <iterator>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "sliceaudit/bitset.hpp"
#include "sliceaudit/error.hpp"
#include "sliceaudit/slice_engine.hpp"

namespace sliceaudit {

struct OverlapEdge {
  std::string a;  // a < b
  std::string b;
  std::size_t overlap = 0;

  friend bool operator==(const OverlapEdge&, const OverlapEdge&) = default;
};

struct OverlapGraph {
  std::vector<std::string> node_ids;
  std::vector<OverlapEdge> edges;  // sorted by (a, b)
};

/// Connects every pair of slices sharing at least min_overlap rows. Nodes
/// keep the input order; isolated slices are still nodes.
inline OverlapGraph build_graph(std::span<const SliceStats* const> slices, std::size_t min_overlap) {
  if (min_overlap < 1) throw ValidationError("min_overlap must be at least 1");
  OverlapGraph g;
  g.node_ids.reserve(slices.size());
  for (const auto* s : slices) g.node_ids.push_back(s->def.id);

  for (std::size_t i = 0; i < slices.size(); ++i) {
    for (std::size_t j = i + 1; j < slices.size(); ++j) {
      const auto& si = *slices[i];
      const auto& sj = *slices[j];
      if (si.def.id == sj.def.id) continue;
      const std::size_t shared = intersect_count(si.membership, sj.membership);
      if (shared < min_overlap) continue;
      if (si.def.id < sj.def.id) {
        g.edges.push_back({si.def.id, sj.def.id, shared});
      } else {
        g.edges.push_back({sj.def.id, si.def.id, shared});
      }
    }
  }
  std::sort(g.edges.begin(), g.edges.end(),
            [](const OverlapEdge& x, const OverlapEdge& y) { return std::tie(x.a, x.b) < std::tie(y.a, y.b); });
  return g;
}

inline OverlapGraph build_graph(std::span<const SliceStats> slices, std::size_t min_overlap) {
  std::vector<const SliceStats*> ptrs;
  ptrs.reserve(slices.size());
  for (const auto& s : slices) ptrs.push_back(&s);
  return build_graph(std::span<const SliceStats* const>(ptrs), min_overlap);
}

/// Drops edges below min_overlap; the node set is unchanged.
inline OverlapGraph filter_graph(const OverlapGraph& graph, std::size_t min_overlap) {
  if (min_overlap < 1) throw ValidationError("min_overlap must be at least 1");
  OverlapGraph out;
  out.node_ids = graph.node_ids;
  std::copy_if(graph.edges.begin(), graph.edges.end(), std::back_inserter(out.edges),
               [&](const OverlapEdge& e) { return e.overlap >= min_overlap; });
  return out;
}

}  // namespace sliceaudit
