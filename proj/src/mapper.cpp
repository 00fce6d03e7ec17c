// Copyright 2026 The rtdeploy Authors
// SPDX-License-Identifier: Apache-2.0

#include "rtdeploy/mapper.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace rtdeploy {

std::vector<int> Mapping::load_per_core() const {
  std::vector<int> load(static_cast<std::size_t>(n_cores), 0);
  for (std::size_t id = 1; id < core_of.size(); ++id) ++load[static_cast<std::size_t>(core_of[id])];
  return load;
}

Mapping map_subtasks(const SubtaskGraph& sg, int n_cores) {
  if (n_cores < 1) throw std::invalid_argument("map_subtasks: n_cores must be >= 1");
  const auto n = sg.subtasks.size();
  Mapping m;
  m.n_cores = n_cores;
  m.core_of.assign(n + 1, -1);
  m.load_cap = static_cast<int>((n + static_cast<std::size_t>(n_cores) - 1) / static_cast<std::size_t>(n_cores));
  if (n == 0) return m;

  struct Neighbour {
    int id;
    std::uint64_t bytes;
  };
  std::vector<std::vector<Neighbour>> adj(n + 1);
  std::vector<std::vector<int>> preds(n + 1);
  std::vector<std::uint64_t> weight(n + 1, 0);
  for (const auto& e : sg.edges) {
    if (e.producer == kDramNode || e.consumer == kDramNode) continue;
    adj[static_cast<std::size_t>(e.producer)].push_back({e.consumer, e.bytes});
    adj[static_cast<std::size_t>(e.consumer)].push_back({e.producer, e.bytes});
    preds[static_cast<std::size_t>(e.consumer)].push_back(e.producer);
    weight[static_cast<std::size_t>(e.producer)] += e.bytes;
    weight[static_cast<std::size_t>(e.consumer)] += e.bytes;
  }

  // Subtask ids follow layer order, which is topological, so one forward
  // sweep yields longest-path depths.
  std::vector<int> depth(n + 1, 0);
  for (std::size_t id = 1; id <= n; ++id) {
    for (int p : preds[id]) depth[id] = std::max(depth[id], depth[static_cast<std::size_t>(p)] + 1);
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 1);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const auto ua = static_cast<std::size_t>(a), ub = static_cast<std::size_t>(b);
    if (depth[ua] != depth[ub]) return depth[ua] > depth[ub];
    if (weight[ua] != weight[ub]) return weight[ua] > weight[ub];
    return a < b;
  });

  std::vector<int> load(static_cast<std::size_t>(n_cores), 0);
  std::vector<std::uint64_t> affinity(static_cast<std::size_t>(n_cores));
  for (int id : order) {
    std::fill(affinity.begin(), affinity.end(), 0);
    for (const auto& nb : adj[static_cast<std::size_t>(id)]) {
      const int c = m.core_of[static_cast<std::size_t>(nb.id)];
      if (c >= 0) affinity[static_cast<std::size_t>(c)] += nb.bytes;
    }
    int best = -1;
    for (int c = 0; c < n_cores; ++c) {
      const auto uc = static_cast<std::size_t>(c);
      if (load[uc] >= m.load_cap) continue;
      if (best < 0) {
        best = c;
        continue;
      }
      const auto ub = static_cast<std::size_t>(best);
      if (affinity[uc] > affinity[ub] || (affinity[uc] == affinity[ub] && load[uc] < load[ub]))
        best = c;
    }
    m.core_of[static_cast<std::size_t>(id)] = best;
    ++load[static_cast<std::size_t>(best)];
  }
  return m;
}

std::uint64_t cross_core_bytes(const SubtaskGraph& sg, const Mapping& m) {
  std::uint64_t total = 0;
  for (const auto& e : sg.edges) {
    if (e.producer == kDramNode || e.consumer == kDramNode || m.core(e.producer) != m.core(e.consumer))
      total += e.bytes;
  }
  return total;
}

}  // namespace rtdeploy
