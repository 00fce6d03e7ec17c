// Copyright 2026 The rtdeploy Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "cli.hpp"
#include "rtdeploy/hardware.hpp"
#include "rtdeploy/model_ir.hpp"

namespace rtdeploy::testing {

using Rng = std::mt19937_64;

struct RandomModelOptions {
  int min_layers = 1;
  int max_layers = 6;
  std::int64_t max_spatial = 10;
  std::int64_t max_channels = 16;
  std::int64_t max_features = 40;
  /// Chance that a Conv2D/Dense carries a fused ReLU epilogue already.
  double epilogue_chance = 0.15;
};

/// Random valid graph: chains of Conv2D, ReLU, MaxPool2D, residual Adds and
/// Flatten + Dense heads. Returned graph has been through validate().
ModelGraph random_model(Rng& rng, const RandomModelOptions& opt = {});

WeightStore random_weights(const ModelGraph& g, Rng& rng);
Int8Tensor random_input(const TensorShape& shape, Rng& rng);

struct RandomHwOptions {
  int max_cores = 16;
  std::uint64_t min_spm = 1024;
  std::uint64_t max_spm = 262144;
  double program_load_chance = 0.25;
};

HardwareConfig random_hw(Rng& rng, const RandomHwOptions& opt = {});

struct Pipeline {
  ModelGraph model;
  HardwareConfig hw;
  CompileResult compiled;
};

/// One randomized compile. Empty when the draw is infeasible (budget below
/// the minimum tile, overflow) or exceeds `max_subtasks`.
std::optional<Pipeline> random_pipeline(Rng& rng, std::size_t max_subtasks = 200,
                                        const RandomModelOptions& mopt = {},
                                        const RandomHwOptions& hopt = {});

/// The documented two-subtask chain on one core: S1 load 100 B, S2 weights
/// 800 B, local S1 -> S2 reuse, 128 B final store, WCETs 1000 / 2000.
struct ChainExample {
  SubtaskGraph sg;
  Mapping mapping;
  std::vector<CostEstimate> costs;
  HardwareConfig hw;
};
ChainExample chain_example();

}  // namespace rtdeploy::testing
