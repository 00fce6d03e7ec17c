// Copyright 2026 The rtdeploy Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "rtdeploy/hardware.hpp"
#include "rtdeploy/mapper.hpp"
#include "rtdeploy/model_ir.hpp"
#include "rtdeploy/partitioner.hpp"
#include "rtdeploy/timing_model.hpp"

namespace rtdeploy::testing {

/// Every output cell of the m x n grid is covered exactly once.
bool tiles_partition(const GemmDims& dims, const std::vector<TileExtent>& tiles);

using EdgeMap = std::map<std::pair<int, int>, std::uint64_t>;

/// Edge bytes recomputed element by element: for each consumer tile the set
/// of source elements read, intersected with each producer tile's outputs.
/// DRAM edges add the weight slice. Zero-byte edges are omitted.
EdgeMap brute_force_edges(const ModelGraph& g, const SubtaskGraph& sg);

EdgeMap edge_map(const SubtaskGraph& sg);

/// Bytes on edges whose endpoints sit on different cores, DRAM edges included.
std::uint64_t brute_cross_bytes(const SubtaskGraph& sg, const std::vector<int>& core_of);

struct MappingRange {
  std::uint64_t min = 0;
  std::uint64_t max = 0;
  std::uint64_t feasible = 0;  // assignments respecting the load cap
};

/// All n_cores^|subtasks| assignments with per-core count <= cap.
MappingRange enumerate_mappings(const SubtaskGraph& sg, int n_cores, int cap);

/// Precedence DAG of computes and the transfers they need (no resource
/// sharing). Node weights are WCETs and transfer durations.
struct TaskDag {
  std::vector<std::uint64_t> weight;
  std::vector<std::vector<int>> succ;
};

TaskDag dependency_dag(const SubtaskGraph& sg, const Mapping& m, const std::vector<CostEstimate>& costs,
                       const HardwareConfig& hw);

/// Heaviest path found by enumerating every path from every node.
std::uint64_t brute_longest_path(const TaskDag& dag);

}  // namespace rtdeploy::testing
