// Copyright 2026 The rtdeploy Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "rtdeploy/partitioner.hpp"

namespace rtdeploy {

/// Subtask -> worker core assignment.
struct Mapping {
  /// Indexed by subtask id; entry 0 (the DRAM node) is unused and -1.
  std::vector<int> core_of;
  int n_cores = 1;
  int load_cap = 0;

  int core(int subtask_id) const { return core_of.at(static_cast<std::size_t>(subtask_id)); }
  std::vector<int> load_per_core() const;

  bool operator==(const Mapping&) const = default;
};

/// Greedy affinity mapping. Subtasks are visited deepest first (reverse
/// topological order); within one depth by descending bytes on their
/// subtask-to-subtask edges, then ascending id. Each goes to the core holding
/// the most bytes of its already-placed neighbours, among cores below the cap
/// ceil(|subtasks| / n_cores); ties go to the least loaded, then lowest index.
Mapping map_subtasks(const SubtaskGraph& sg, int n_cores);

/// Bytes that cross a core boundary: inter-core edges plus every DRAM edge.
std::uint64_t cross_core_bytes(const SubtaskGraph& sg, const Mapping& m);

}  // namespace rtdeploy
