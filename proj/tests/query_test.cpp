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

#include "sliceaudit/query.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "support/fixtures.hpp"

namespace sliceaudit {
namespace {

using testing_support::categorical_dataset;

Dataset two_feature_dataset() {
  return categorical_dataset({"g", "h"}, {{"a", "x"}, {"b", "y"}, {"c", "x"}, {"d", "y"}});
}

struct StatsRow {
  std::vector<Predicate> predicates;
  std::size_t size = 10;
  std::optional<double> effect = 1.0;
  double accuracy = 0.5;
  std::optional<double> precision = 0.5;
};

SliceStats make_stats(const Dataset& ds, const StatsRow& row, double threshold = 0.4) {
  SliceStats s;
  s.def = make_slice_def(ds, row.predicates);
  s.membership = RowBitset(ds.row_count);
  s.size = row.size;
  s.metrics.size = row.size;
  s.metrics.log_loss = 0.5;
  s.metrics.accuracy = row.accuracy;
  s.metrics.balanced_accuracy = row.accuracy;
  s.metrics.precision = row.precision;
  s.metrics.recall = 0.5;
  s.effect_size = row.effect;
  s.log_loss_pct_diff = 10.0;
  s.classification = classify(row.effect, threshold);
  return s;
}

Analysis hand_built(std::vector<StatsRow> rows_in) {
  Dataset ds = two_feature_dataset();
  std::vector<SliceStats> slices;
  for (const auto& row : rows_in) slices.push_back(make_stats(ds, row));
  MetricBundle overall;
  overall.log_loss = 0.4;
  overall.size = ds.row_count;
  return Analysis(std::move(ds), overall, std::move(slices), EngineOptions{});
}

std::vector<std::string> ids(const std::vector<const SliceStats*>& v) {
  std::vector<std::string> out;
  for (const auto* s : v) out.push_back(s->def.id);
  return out;
}

Analysis engine_analysis(std::uint64_t seed, double threshold = 0.1) {
  const auto c = testing_support::load_case(seed);
  EngineOptions o;
  o.min_size = 1;
  o.effect_threshold = threshold;
  return Analysis(c.dataset, c.preds, o);
}

TEST(ApplyQuery, MinSizeSortTopK) {
  const Analysis a = hand_built({{{{0, 0}}, 10}, {{{0, 1}}, 50}, {{{0, 2}}, 200}});
  SliceQuery q;
  q.min_size = 30;
  q.sort_by = SortKey::size;
  q.top_k = 1;
  EXPECT_EQ(ids(apply_query(a, q)), (std::vector<std::string>{"g:c"}));
}

TEST(ApplyQuery, AllReturnsEveryRequestedSlice) {
  const Analysis a = hand_built({{{{0, 0}}, 10, 0.9}, {{{0, 1}}, 50, -0.9}, {{{0, 2}}, 200, 0.5}, {{{0, 3}}, 5, 0.1}});
  SliceQuery q;
  EXPECT_EQ(ids(apply_query(a, q)), (std::vector<std::string>{"g:a", "g:c"}));
  q.performance_class = Performance::overperforming;
  EXPECT_EQ(ids(apply_query(a, q)), (std::vector<std::string>{"g:b"}));
}

TEST(ApplyQuery, Validation) {
  const Analysis a = hand_built({});
  SliceQuery q;
  q.top_k = 0;
  EXPECT_THROW(apply_query(a, q), ValidationError);
  q.top_k.reset();
  q.min_size = 0;
  EXPECT_THROW(apply_query(a, q), ValidationError);
  q.min_size = 1;
  q.features_include = {"nope"};
  try {
    apply_query(a, q);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("g, h"), std::string::npos) << e.what();
  }
  try {
    parse_sort_key("bogus");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("balanced_accuracy"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_performance_class("neutral"), ValidationError);
}

TEST(ParseQuery, ReadsEveryParameter) {
  const auto q = parse_query({{"sort_by", "size"},
                              {"top_k", "5"},
                              {"min_size", "30"},
                              {"features", "sex,race"},
                              {"class", "overperforming"},
                              {"min_overlap", "4"}});
  EXPECT_EQ(q.sort_by, SortKey::size);
  EXPECT_EQ(q.top_k, 5u);
  EXPECT_EQ(q.min_size, 30u);
  EXPECT_EQ(q.features_include, (std::vector<std::string>{"sex", "race"}));
  EXPECT_EQ(q.performance_class, Performance::overperforming);
  EXPECT_EQ(q.min_overlap, 4u);
  EXPECT_FALSE(parse_query({{"top_k", "all"}}).top_k.has_value());
  EXPECT_THROW(parse_query({{"top_k", "-1"}}), ValidationError);
  EXPECT_THROW(parse_query({{"min_size", "3x"}}), ValidationError);
  EXPECT_THROW(parse_query({{"colour", "red"}}), ValidationError);
}

TEST(ApplyQuery, AccuracyFamilySortsWorstFirstForUnderperformers) {
  const Analysis a = hand_built(
      {{{{0, 0}}, 10, 0.9, 0.7}, {{{0, 1}}, 10, 0.9, 0.2}, {{{0, 2}}, 10, -0.9, 0.9}, {{{0, 3}}, 10, -0.9, 0.6}});
  SliceQuery q;
  q.sort_by = SortKey::accuracy;
  EXPECT_EQ(ids(apply_query(a, q)), (std::vector<std::string>{"g:b", "g:a"}));
  q.performance_class = Performance::overperforming;
  EXPECT_EQ(ids(apply_query(a, q)), (std::vector<std::string>{"g:c", "g:d"}));
}

TEST(ApplyQuery, UndefinedSortsLastAndTiesByIdAscending) {
  const Analysis a = hand_built({{{{0, 2}}, 10, 0.9, 0.5, std::nullopt},
                                 {{{0, 1}}, 10, 0.9, 0.5, 0.3},
                                 {{{0, 0}}, 10, 0.9, 0.5, 0.3},
                                 {{{0, 3}}, 10, 0.9, 0.5, 0.1}});
  SliceQuery q;
  q.sort_by = SortKey::precision;
  EXPECT_EQ(ids(apply_query(a, q)), (std::vector<std::string>{"g:d", "g:a", "g:b", "g:c"}));
  q.sort_by = SortKey::size;
  EXPECT_EQ(ids(apply_query(a, q)), (std::vector<std::string>{"g:a", "g:b", "g:c", "g:d"}));
}

TEST(ApplyQuery, UndefinedEffectSortsLast) {
  const Analysis a = hand_built({{{{0, 0}}, 10, std::numeric_limits<double>::infinity()},
                                 {{{0, 1}}, 10, 2.0},
                                 {{{0, 2}}, 10, std::nullopt}});
  SliceQuery q;
  EXPECT_EQ(ids(apply_query(a, q)), (std::vector<std::string>{"g:a", "g:b"}));
  EXPECT_EQ(a.slices().back().def.id, "g:c");
}

TEST(ApplyQuery, FeatureFilterKeepsAnyMatch) {
  const Analysis a = hand_built({{{{0, 0}}}, {{{1, 0}}}, {{{0, 1}, {1, 1}}}});
  SliceQuery q;
  q.features_include = {"h"};
  EXPECT_EQ(ids(apply_query(a, q)), (std::vector<std::string>{"g:b|h:y", "h:x"}));
  q.features_include = {"g", "h"};
  EXPECT_EQ(apply_query(a, q).size(), 3u);
}

TEST(QueryProperties, PrefixCommutativityDisjointnessPurity) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const Analysis a = engine_analysis(seed);
    const auto names = [&] {
      std::vector<std::string> n;
      for (const auto& s : a.dataset().schemas) n.push_back(s.name);
      return n;
    }();
    for (const auto& [key, _] : kSortKeys) {
      for (auto cls : {Performance::underperforming, Performance::overperforming}) {
        SliceQuery q;
        q.sort_by = key;
        q.performance_class = cls;
        const auto all = apply_query(a, q);
        for (std::size_t k = 1; k <= all.size(); ++k) {
          q.top_k = k;
          const auto top = apply_query(a, q);
          ASSERT_EQ(top.size(), k);
          EXPECT_TRUE(std::equal(top.begin(), top.end(), all.begin()));
        }
      }
    }

    // Filters commute: (min_size then features) == (features then min_size).
    SliceQuery base;
    const auto every = apply_query(a, base);
    const std::size_t min_size = 5;
    const std::vector<std::string> feats{names.front()};
    const auto has_feature = [&](const SliceStats* s) {
      return std::any_of(s->def.predicates.begin(), s->def.predicates.end(),
                         [&](const Predicate& p) { return a.dataset().schemas[p.feature].name == feats[0]; });
    };
    const auto big = [&](const SliceStats* s) { return s->size >= min_size; };
    std::vector<const SliceStats*> size_then_feature;
    std::vector<const SliceStats*> feature_then_size;
    std::vector<const SliceStats*> tmp;
    std::copy_if(every.begin(), every.end(), std::back_inserter(tmp), big);
    std::copy_if(tmp.begin(), tmp.end(), std::back_inserter(size_then_feature), has_feature);
    tmp.clear();
    std::copy_if(every.begin(), every.end(), std::back_inserter(tmp), has_feature);
    std::copy_if(tmp.begin(), tmp.end(), std::back_inserter(feature_then_size), big);
    EXPECT_EQ(size_then_feature, feature_then_size);
    SliceQuery both;
    both.min_size = min_size;
    both.features_include = feats;
    EXPECT_EQ(apply_query(a, both), size_then_feature);

    SliceQuery over;
    over.performance_class = Performance::overperforming;
    std::set<std::string> under_ids;
    for (const auto* s : every) under_ids.insert(s->def.id);
    for (const auto* s : apply_query(a, over)) EXPECT_FALSE(under_ids.count(s->def.id));

    EXPECT_EQ(apply_query(a, both), apply_query(a, both));
  }
}

TEST(Serialize, EmptySliceList) {
  MetricBundle overall;
  overall.log_loss = 0.25;
  overall.accuracy = 1;
  overall.balanced_accuracy = 1;
  overall.precision = 1;
  overall.recall = 1;
  overall.size = 4;
  EXPECT_EQ(serialize_analysis({}, overall),
            R"({"overall":{"log_loss":0.25,"accuracy":1.0,"balanced_accuracy":1.0,"precision":1.0,"recall":1.0,)"
            R"("size":4,"degenerate":false},"slices":[]})");
}

TEST(Serialize, RoundTripIsByteStable) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const Analysis a = engine_analysis(seed);
    std::vector<const SliceStats*> all;
    for (const auto& s : a.slices()) all.push_back(&s);
    const auto graph = build_graph(std::span<const SliceStats* const>(all.data(), std::min<std::size_t>(all.size(), 30)), 1);
    const std::string doc = serialize_analysis(summarize(a.dataset(), all), a.overall(), graph);
    EXPECT_EQ(Json::parse(doc).dump(), doc);
  }
}

TEST(Serialize, SingleIsolatedNode) {
  const Analysis a = hand_built({{{{0, 0}}}});
  std::vector<const SliceStats*> one{&a.slices()[0]};
  const auto graph = build_graph(std::span<const SliceStats* const>(one), 1);
  const auto doc = Json::parse(serialize_analysis(summarize(a.dataset(), one), a.overall(), graph));
  EXPECT_EQ(doc["graph"]["nodes"].size(), 1u);
  EXPECT_TRUE(doc["graph"]["edges"].empty());
  EXPECT_EQ(doc["slices"][0]["predicates"][0]["feature"], "g");
  EXPECT_EQ(doc["slices"][0]["predicates"][0]["value"], "a");
}

TEST(Serialize, UndefinedAndInfiniteValues) {
  const Analysis a = hand_built({{{{0, 0}}, 10, std::nullopt, 0.5, std::nullopt},
                                 {{{0, 1}}, 10, -std::numeric_limits<double>::infinity()}});
  const auto j0 = to_json(summarize(a.dataset(), *a.find("g:a")));
  EXPECT_TRUE(j0["effect_size"].is_null());
  EXPECT_TRUE(j0["metrics"]["precision"].is_null());
  EXPECT_EQ(j0["degenerate"], true);
  EXPECT_EQ(j0["classification"], "neutral");
  const auto j1 = to_json(summarize(a.dataset(), *a.find("g:b")));
  EXPECT_EQ(j1["effect_size"], "-inf");
  EXPECT_EQ(j1["classification"], "overperforming");
  EXPECT_EQ(j1["degree"], 1);
}

TEST(Serialize, KeyOrderIsFixed) {
  const Analysis a = hand_built({{{{0, 0}, {1, 0}}}});
  const auto dumped = to_json(summarize(a.dataset(), a.slices()[0])).dump();
  std::vector<std::string> keys{"\"id\"", "\"predicates\"", "\"degree\"", "\"size\"", "\"metrics\"",
                                "\"effect_size\"", "\"log_loss_pct_diff\"", "\"classification\"", "\"degenerate\""};
  std::size_t pos = 0;
  for (const auto& k : keys) {
    const auto next = dumped.find(k, pos);
    ASSERT_NE(next, std::string::npos) << k;
    pos = next;
  }
}

}  // namespace
}  // namespace sliceaudit
