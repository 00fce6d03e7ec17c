// Copyright 2026 The rtdeploy Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <vector>

#include "rtdeploy/mapper.hpp"
#include "rtdeploy/model_ir.hpp"
#include "rtdeploy/partitioner.hpp"
#include "rtdeploy/scheduler.hpp"
#include "rtdeploy/timing_model.hpp"

namespace rtdeploy {

/// Every intermediate of one compile, kept for reports and tests.
struct CompileResult {
  ModelGraph graph;  // after fusion
  SubtaskGraph subtasks;
  Mapping mapping;
  std::vector<CostEstimate> costs;
  Schedule schedule;
};

/// fuse -> partition -> map -> cost -> schedule.
CompileResult compile_pipeline(const ModelGraph& model, const HardwareConfig& hw,
                               const WcetOverrides& overrides = {});

/// Exit codes: 0 ok, 1 internal error, 2 malformed or invalid input,
/// 3 infeasible tile budget or scratchpad overflow, 4 simulate/check FAIL.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv);

}  // namespace rtdeploy
