// Copyright 2026 The rtdeploy Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rtdeploy/hardware.hpp"
#include "rtdeploy/model_ir.hpp"

namespace rtdeploy {

/// Implicit-GEMM view of a layer. For Conv2D m = output pixels,
/// n = output channels, k = in_channels * kernel_h * kernel_w.
///
/// Streaming ops (ElementwiseAdd, MaxPool2D, standalone ReLU) are pseudo-GEMMs
/// with k = 1; `fan_in` counts input elements read per output element and is
/// 0 for real GEMMs.
struct GemmDims {
  std::int64_t m = 1;
  std::int64_t n = 1;
  std::int64_t k = 1;
  std::int64_t fan_in = 0;

  bool streaming() const { return fan_in > 0; }
  bool operator==(const GemmDims&) const = default;
};

/// Output rectangle [m0, m0+mt) x [n0, n0+nt) of a tile; k is never split.
struct TileExtent {
  std::int64_t m0 = 0;
  std::int64_t mt = 0;
  std::int64_t n0 = 0;
  std::int64_t nt = 0;

  bool operator==(const TileExtent&) const = default;
};

/// Peak scratchpad bytes of an mt x nt tile: im2col input + weights + int32
/// accumulators for GEMMs, inputs + outputs for streaming ops.
std::uint64_t tile_footprint(const GemmDims& dims, std::int64_t mt, std::int64_t nt);

/// Empty for Flatten, which is a pure view.
std::optional<GemmDims> lower_to_gemm(const Layer& layer);

/// Lane-aligned greedy tiling. Throws InfeasibleBudgetError carrying the
/// minimum budget when even a 1 x min(n, lanes) tile does not fit.
std::vector<TileExtent> tile_layer(const GemmDims& dims, std::uint64_t budget_bytes, int lanes);

/// Node id of the virtual DRAM endpoint in SubtaskGraph edges.
inline constexpr int kDramNode = 0;

struct Subtask {
  int id = 0;
  std::string layer_id;
  TileExtent tile;
  std::uint64_t dram_in_bytes = 0;
  std::uint64_t spm_footprint_bytes = 0;
  std::uint64_t out_bytes = 0;
  /// Weight slice (k * nt) included in dram_in_bytes.
  std::uint64_t weight_bytes = 0;

  bool operator==(const Subtask&) const = default;
};

struct SubtaskEdge {
  int producer = 0;
  int consumer = 0;
  std::uint64_t bytes = 0;

  bool operator==(const SubtaskEdge&) const = default;
};

struct LayerTiling {
  std::string layer_id;
  GemmDims dims;
  std::vector<int> subtasks;

  bool operator==(const LayerTiling&) const = default;
};

/// Tile subtasks of all compute layers. Subtask ids start at 1 and are dense;
/// `layers` follows model order.
struct SubtaskGraph {
  std::vector<Subtask> subtasks;
  std::vector<SubtaskEdge> edges;
  std::vector<LayerTiling> layers;
  /// Graph input / output tensor sizes, used to lay out DRAM.
  std::uint64_t input_bytes = 0;
  std::uint64_t output_bytes = 0;

  bool empty() const { return subtasks.empty(); }
  const Subtask& subtask(int id) const { return subtasks.at(static_cast<std::size_t>(id - 1)); }
  const GemmDims& dims_of(const Subtask& s) const;
  /// Index of the subtask's layer in `layers`.
  std::size_t layer_index(const Subtask& s) const;

  bool operator==(const SubtaskGraph&) const = default;
};

/// Tile every compute layer with hw.tile_budget() and derive exact
/// producer->consumer overlap bytes (im2col duplication excluded).
SubtaskGraph build_subtask_graph(const ModelGraph& g, const HardwareConfig& hw);

}  // namespace rtdeploy
