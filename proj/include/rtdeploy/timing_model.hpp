// Copyright 2026 The rtdeploy Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "rtdeploy/hardware.hpp"
#include "rtdeploy/partitioner.hpp"

namespace rtdeploy {

/// Inputs the estimate was computed from, kept in the schedule artifact so a
/// reviewer can trace every WCET back to its formula.
struct CostInputs {
  std::string model;  // "gemm", "stream" or "override"
  std::int64_t mt = 0;
  std::int64_t nt = 0;
  std::int64_t k = 0;
  int lanes = 0;
  std::uint64_t c0 = 0;
  std::uint64_t c1 = 0;

  bool operator==(const CostInputs&) const = default;
};

struct CostEstimate {
  std::uint64_t wcet_cycles = 1;
  CostInputs derived_from;

  bool operator==(const CostEstimate&) const = default;
};

void to_json(nlohmann::json& j, const CostInputs& c);
void from_json(const nlohmann::json& j, CostInputs& c);

/// GEMM tiles: c0 + mt * k * ceil(nt / lanes) * c1.
/// Streaming tiles: c0 + mt * ceil(nt / lanes) * stream_c1.
CostEstimate wcet_subtask(const Subtask& tile, const GemmDims& dims, const HardwareConfig& hw);

enum class TransferPath { Dram, ScratchpadToScratchpad };

/// Worst-case DMA duration: setup + (DRAM latency) + ceil(bytes / bus width).
/// Throws std::invalid_argument for zero bytes.
std::uint64_t transfer_cycles(std::uint64_t bytes, const HardwareConfig& hw,
                              TransferPath path = TransferPath::Dram);

/// Externally analysed WCETs keyed by subtask id.
using WcetOverrides = std::map<int, std::uint64_t>;

WcetOverrides parse_wcet_overrides(const nlohmann::json& doc);
WcetOverrides load_wcet_overrides(const std::filesystem::path& path);

/// Estimates indexed by subtask id (entry 0 unused).
std::vector<CostEstimate> estimate_costs(const SubtaskGraph& sg, const HardwareConfig& hw,
                                         const WcetOverrides& overrides = {});

}  // namespace rtdeploy
