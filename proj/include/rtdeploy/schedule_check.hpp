// Copyright 2026 The rtdeploy Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rtdeploy/scheduler.hpp"

namespace rtdeploy {

struct CheckResult {
  std::string name;
  bool pass = true;
  std::vector<std::string> findings;
};

struct CheckReport {
  std::vector<CheckResult> checks;
  /// Makespan recomputed from durations, WCETs and dependency lists alone.
  std::uint64_t replayed_makespan = 0;

  bool ok() const;
  const CheckResult* find(const std::string& name) const;
};

/// Shape checks only: ids, references, durations, cores, sort order.
/// Throws ValidationError with the first problem found.
void validate_structure(const Schedule& s);

/// All invariants: structure, dma_exclusive, compute_exclusive,
/// spm_capacity, spm_disjoint, dependencies, makespan, replay.
CheckReport check_schedule(const Schedule& s);

}  // namespace rtdeploy
