// Copyright 2026 The rtdeploy Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "generators.hpp"
#include "oracles.hpp"
#include "rtdeploy/mapper.hpp"

using namespace rtdeploy;

namespace {

SubtaskGraph bare_graph(int n, std::vector<SubtaskEdge> edges) {
  SubtaskGraph sg;
  for (int id = 1; id <= n; ++id) {
    Subtask s;
    s.id = id;
    s.layer_id = "l";
    sg.subtasks.push_back(s);
  }
  sg.edges = std::move(edges);
  return sg;
}

}  // namespace

TEST_CASE("heavy producer joins its consumer, light one goes elsewhere") {
  const auto sg = bare_graph(3, {{kDramNode, 1, 50}, {kDramNode, 2, 50}, {1, 3, 1000}, {2, 3, 10}, {3, kDramNode, 4}});
  const auto m = map_subtasks(sg, 2);
  CHECK(m.load_cap == 2);
  CHECK(m.core(3) == 0);
  CHECK(m.core(1) == 0);
  CHECK(m.core(2) == 1);
  CHECK(cross_core_bytes(sg, m) == 50 + 50 + 4 + 10);
}

TEST_CASE("single subtask lands on core 0") {
  const auto m = map_subtasks(bare_graph(1, {{kDramNode, 1, 8}}), 4);
  CHECK(m.core(1) == 0);
  CHECK(m.load_per_core() == std::vector<int>{1, 0, 0, 0});
}

TEST_CASE("one core takes the whole chain and only DRAM bytes cross") {
  const auto sg = bare_graph(4, {{kDramNode, 1, 8}, {1, 2, 5}, {2, 3, 5}, {3, 4, 5}, {4, kDramNode, 2}});
  const auto m = map_subtasks(sg, 1);
  for (int id = 1; id <= 4; ++id) CHECK(m.core(id) == 0);
  CHECK(cross_core_bytes(sg, m) == 10);
}

TEST_CASE("4-clique on 2 cores: exact value by enumeration") {
  std::vector<SubtaskEdge> edges;
  for (int a = 1; a <= 4; ++a)
    for (int b = a + 1; b <= 4; ++b) edges.push_back({a, b, 1});
  const auto sg = bare_graph(4, edges);
  const auto m = map_subtasks(sg, 2);
  const auto v = cross_core_bytes(sg, m);
  CHECK(v <= 6);
  CHECK(v == testing::brute_cross_bytes(sg, m.core_of));
  // Cap 2 forces a 2 + 2 split: 4 of the 6 edges cross.
  const auto range = testing::enumerate_mappings(sg, 2, 2);
  CHECK(range.min == 4);
  CHECK(range.max == 4);
  CHECK(v == 4);
}

TEST_CASE("property: mappings are complete, capped, balanced and deterministic") {
  testing::Rng rng(31);
  int checked = 0;
  while (checked < 200) {
    auto p = testing::random_pipeline(rng, 200);
    if (!p) continue;
    ++checked;
    const auto& sg = p->compiled.subtasks;
    const auto& m = p->compiled.mapping;
    const int n = static_cast<int>(sg.subtasks.size());
    REQUIRE(m.core_of.size() == sg.subtasks.size() + 1);
    const auto load = m.load_per_core();
    CHECK(std::accumulate(load.begin(), load.end(), 0) == n);
    for (int id = 1; id <= n; ++id) {
      CHECK(m.core(id) >= 0);
      CHECK(m.core(id) < p->hw.n_cores);
    }
    CHECK(*std::max_element(load.begin(), load.end()) <= m.load_cap);
    CHECK(*std::max_element(load.begin(), load.end()) - *std::min_element(load.begin(), load.end()) <= m.load_cap);
    CHECK(map_subtasks(sg, p->hw.n_cores) == m);
    CHECK(cross_core_bytes(sg, m) == testing::brute_cross_bytes(sg, m.core_of));
  }
}
