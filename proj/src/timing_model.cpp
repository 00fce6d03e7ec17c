// Copyright 2026 The rtdeploy Authors
// SPDX-License-Identifier: Apache-2.0

#include "rtdeploy/timing_model.hpp"

#include <fstream>
#include <stdexcept>

#include "rtdeploy/error.hpp"

namespace rtdeploy {

namespace {

std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }

}  // namespace

void to_json(nlohmann::json& j, const CostInputs& c) {
  j = nlohmann::json{{"model", c.model}, {"mt", c.mt}, {"nt", c.nt}, {"k", c.k},
                     {"lanes", c.lanes}, {"c0", c.c0}, {"c1", c.c1}};
}

void from_json(const nlohmann::json& j, CostInputs& c) {
  j.at("model").get_to(c.model);
  j.at("mt").get_to(c.mt);
  j.at("nt").get_to(c.nt);
  j.at("k").get_to(c.k);
  j.at("lanes").get_to(c.lanes);
  j.at("c0").get_to(c.c0);
  j.at("c1").get_to(c.c1);
}

CostEstimate wcet_subtask(const Subtask& tile, const GemmDims& dims, const HardwareConfig& hw) {
  const auto mt = static_cast<std::uint64_t>(tile.tile.mt);
  const auto groups = ceil_div(static_cast<std::uint64_t>(tile.tile.nt),
                               static_cast<std::uint64_t>(hw.lanes()));
  CostEstimate est;
  est.derived_from.mt = tile.tile.mt;
  est.derived_from.nt = tile.tile.nt;
  est.derived_from.k = dims.k;
  est.derived_from.lanes = hw.lanes();
  est.derived_from.c0 = hw.gemm_c0;
  if (dims.streaming()) {
    est.derived_from.model = "stream";
    est.derived_from.c1 = hw.stream_c1;
    est.wcet_cycles = hw.gemm_c0 + mt * groups * hw.stream_c1;
  } else {
    est.derived_from.model = "gemm";
    est.derived_from.c1 = hw.gemm_c1;
    est.wcet_cycles = hw.gemm_c0 + mt * static_cast<std::uint64_t>(dims.k) * groups * hw.gemm_c1;
  }
  return est;
}

std::uint64_t transfer_cycles(std::uint64_t bytes, const HardwareConfig& hw, TransferPath path) {
  if (bytes == 0) throw std::invalid_argument("transfer_cycles: bytes must be >= 1");
  const std::uint64_t latency = path == TransferPath::Dram ? hw.dram_latency_cycles : 0;
  return hw.dma_setup_cycles + latency + ceil_div(bytes, hw.bus_bytes_per_cycle);
}

WcetOverrides parse_wcet_overrides(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ParseError("timing_model", "WCET override file must be a JSON object");
  WcetOverrides out;
  for (const auto& [key, value] : doc.items()) {
    // "3" and "S3" both name subtask 3.
    const std::string digits = !key.empty() && key[0] == 'S' ? key.substr(1) : key;
    std::size_t used = 0;
    int id = 0;
    try {
      id = std::stoi(digits, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (digits.empty() || used != digits.size() || id < 1)
      throw ParseError("timing_model", "WCET override key '" + key + "' is not a subtask id");
    if (!value.is_number_unsigned() || value.get<std::uint64_t>() == 0)
      throw ParseError("timing_model", "WCET override for subtask " + key + " must be a positive integer");
    out[id] = value.get<std::uint64_t>();
  }
  return out;
}

WcetOverrides load_wcet_overrides(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("timing_model", "cannot open WCET override file " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("timing_model", "malformed WCET override file: " + std::string(e.what()));
  }
  return parse_wcet_overrides(doc);
}

std::vector<CostEstimate> estimate_costs(const SubtaskGraph& sg, const HardwareConfig& hw,
                                         const WcetOverrides& overrides) {
  std::vector<CostEstimate> costs(sg.subtasks.size() + 1);
  for (const auto& s : sg.subtasks) {
    auto& c = costs[static_cast<std::size_t>(s.id)];
    c = wcet_subtask(s, sg.dims_of(s), hw);
    if (auto it = overrides.find(s.id); it != overrides.end()) {
      c.wcet_cycles = it->second;
      c.derived_from.model = "override";
    }
  }
  for (const auto& [id, _] : overrides) {
    if (id > static_cast<int>(sg.subtasks.size()))
      throw ValidationError("timing_model", "WCET override for unknown subtask " + std::to_string(id));
  }
  return costs;
}

}  // namespace rtdeploy
