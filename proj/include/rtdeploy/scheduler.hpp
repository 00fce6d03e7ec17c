// Copyright 2026 The rtdeploy Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rtdeploy/hardware.hpp"
#include "rtdeploy/mapper.hpp"
#include "rtdeploy/partitioner.hpp"
#include "rtdeploy/timing_model.hpp"

namespace rtdeploy {

enum class TransferKind { LoadDram, StoreDram, CopySpm };
enum class MemSpace { Dram, Spm, InstrSpm };

std::string to_string(TransferKind k);
std::string to_string(MemSpace s);

/// One end of a DMA transfer. `core` is -1 for DRAM; `addr` is the DRAM
/// address or the scratchpad offset.
struct Location {
  MemSpace space = MemSpace::Dram;
  int core = -1;
  std::uint64_t addr = 0;
  std::uint64_t len = 0;

  bool operator==(const Location&) const = default;
};

struct TransferEvent {
  int id = 0;
  TransferKind kind = TransferKind::LoadDram;
  Location src;
  Location dst;
  std::uint64_t bytes = 0;
  std::uint64_t start = 0;
  std::uint64_t duration = 0;
  /// Consumer subtask for loads/copies, the stored subtask for stores.
  std::vector<int> serves;
  /// Core whose turn this transfer takes in the round-robin arbitration.
  int core = 0;
  /// Subtask whose output region is read (copies and stores), else 0.
  int source_subtask = 0;
  bool spill = false;
  /// Must start after these computes / transfers have ended.
  std::vector<int> after_computes;
  std::vector<int> after_transfers;
  /// Double-buffer gate: may not start before this compute has started.
  std::optional<int> gate_compute;

  std::uint64_t end() const { return start + duration; }
  bool operator==(const TransferEvent&) const = default;
};

struct ComputeEvent {
  int subtask = 0;
  int core = 0;
  std::string layer_id;
  std::uint64_t start = 0;
  std::uint64_t wcet = 0;
  CostInputs cost;
  /// Same-core producers whose output is reused in place.
  std::vector<int> after_computes;
  /// Serving transfers (and the core's program image load, if any).
  std::vector<int> after_transfers;

  std::uint64_t end() const { return start + wcet; }
  bool operator==(const ComputeEvent&) const = default;
};

enum class RegionRole { Work, Output };

/// Scratchpad allocation live over [live_start, live_end).
struct SpmRegion {
  int core = 0;
  std::uint64_t offset = 0;
  std::uint64_t length = 0;
  std::uint64_t live_start = 0;
  std::uint64_t live_end = 0;
  int subtask = 0;
  RegionRole role = RegionRole::Work;

  bool operator==(const SpmRegion&) const = default;
};

struct Schedule {
  /// Sorted by start, then id.
  std::vector<TransferEvent> transfers;
  /// Sorted by start, then subtask id.
  std::vector<ComputeEvent> computes;
  std::vector<SpmRegion> spm_regions;
  std::uint64_t predicted_makespan = 0;
  HardwareConfig hw;
  Mapping mapping;

  const ComputeEvent* compute(int subtask) const;
  const TransferEvent* transfer(int id) const;
  std::size_t spill_count() const;

  bool operator==(const Schedule&) const = default;
};

/// Rescheduling directives produced by the scratchpad allocator.
struct SpillPlan {
  /// Subtasks whose output goes to DRAM right after compute and is reloaded
  /// by every consumer.
  std::set<int> spilled;
  /// Subtasks whose inputs may only arrive after the previous compute on
  /// the same core has finished.
  std::set<int> no_prefetch;

  bool operator==(const SpillPlan&) const = default;
};

/// Time-triggered list schedule without scratchpad offsets: one DMA timeline,
/// n_cores compute timelines, ASAP transfers arbitrated round-robin over cores.
Schedule schedule_skeleton(const SubtaskGraph& sg, const Mapping& m,
                           const std::vector<CostEstimate>& costs, const HardwareConfig& hw,
                           const SpillPlan& plan = {});

struct SpmAllocation {
  bool ok = false;
  std::vector<SpmRegion> regions;
  // Failure details; `remedy` is empty when nothing is left to try.
  int core = -1;
  std::uint64_t cycle = 0;
  std::uint64_t deficit = 0;
  std::optional<SpillPlan> remedy;
};

/// First-fit offsets for every work/output region of the skeleton. On
/// failure returns the plan extended by one remedy: spill the idle output
/// region with the furthest next use, else stop prefetching the failing
/// work region.
SpmAllocation allocate_spm(const SubtaskGraph& sg, const Mapping& m, const Schedule& skeleton,
                           const SpillPlan& plan);

/// Full pipeline: skeleton + allocation, re-run with spills until every
/// core fits. Throws SpmOverflowError (core, cycle, deficit).
Schedule build_schedule(const SubtaskGraph& sg, const Mapping& m,
                        const std::vector<CostEstimate>& costs, const HardwareConfig& hw);

}  // namespace rtdeploy
