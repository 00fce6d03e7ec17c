// Copyright 2026 The rtdeploy Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "rtdeploy/scheduler.hpp"

namespace rtdeploy {

/// Actual execution time of a subtask is ceil(factor * wcet).
struct ExecutionProfile {
  enum class Mode { WorstCase, Scaled, Random, Fault };

  Mode mode = Mode::WorstCase;
  double factor = 1.0;        // Scaled
  std::uint64_t seed = 0;     // Random
  double min_factor = 1.0;    // Random: factors drawn from [min_factor, 1]
  std::map<int, double> faults;  // Fault: subtask -> factor > 1

  double factor_for(int subtask) const;
  std::uint64_t actual_cycles(int subtask, std::uint64_t wcet) const;
  std::string describe() const;
};

/// Accepts worst-case, scaled:F, random:SEED:MIN and fault:ID=F[,ID=F...]
/// where ID is "S3" or "3". Throws ParseError.
ExecutionProfile parse_profile(const std::string& text);

struct TraceEvent {
  std::string type;  // "transfer" or "compute"
  int id = 0;        // transfer id or subtask id
  std::string label;
  int core = 0;
  std::uint64_t scheduled_start = 0;
  std::uint64_t scheduled_end = 0;
  std::uint64_t actual_start = 0;
  std::uint64_t actual_end = 0;
};

struct Violation {
  std::string kind;   // wcet_overrun, dependency_unready, dma_overlap, spm_overflow
  std::string event;  // "S3", "T7" or "core2"
  std::uint64_t cycle = 0;
  std::string detail;
};

struct SimTrace {
  std::vector<TraceEvent> events;
  std::vector<Violation> violations;
  std::uint64_t observed_makespan = 0;
  std::uint64_t predicted_makespan = 0;
  ExecutionProfile profile;

  bool pass() const { return violations.empty(); }
  std::size_t count(const std::string& kind) const;
};

/// Replays the schedule at its fixed start cycles. Throws ValidationError
/// for a structurally malformed schedule; timing problems become violations.
SimTrace simulate(const Schedule& s, const ExecutionProfile& p);

struct VerifyReport {
  bool pass = false;
  bool equality_required = false;
  std::uint64_t observed = 0;
  std::uint64_t predicted = 0;
  std::vector<std::string> reasons;
};

/// PASS iff no violations and observed <= predicted; worst-case runs must
/// match the prediction exactly.
VerifyReport verify_against_prediction(const SimTrace& t, const Schedule& s);

void to_json(nlohmann::json& j, const SimTrace& t);

/// Plot-ready rows: row_type,row_id,label,start,end.
std::string gantt_csv(const SimTrace& t);

}  // namespace rtdeploy
