// Copyright 2026 The rtdeploy Authors
// SPDX-License-Identifier: Apache-2.0

#include "rtdeploy/hardware.hpp"

#include <fstream>
#include <string>

#include "rtdeploy/error.hpp"

namespace rtdeploy {

void HardwareConfig::validate() const {
  auto fail = [](const std::string& field) {
    throw ValidationError("timing_model", "hardware config: " + field + " must be > 0");
  };
  if (n_cores < 1) fail("n_cores");
  if (spm_data_bytes == 0) fail("spm_data_bytes");
  if (spm_instr_bytes == 0) fail("spm_instr_bytes");
  if (vlen_bits < 1) fail("vlen_bits");
  if (sew_bits < 1) fail("sew_bits");
  if (bus_bytes_per_cycle == 0) fail("bus_bytes_per_cycle");
  if (dma_setup_cycles == 0) fail("dma_setup_cycles");
  if (dram_latency_cycles == 0) fail("dram_latency_cycles");
  if (gemm_c0 == 0) fail("gemm_c0");
  if (gemm_c1 == 0) fail("gemm_c1");
  if (stream_c1 == 0) fail("stream_c1");
  if (program_image_bytes == 0) fail("program_image_bytes");
  if (tile_budget_bytes && *tile_budget_bytes == 0) fail("tile_budget_bytes");
  if (vlen_bits % sew_bits != 0)
    throw ValidationError("timing_model", "hardware config: vlen_bits must be divisible by sew_bits");
  if (include_program_load && program_image_bytes > spm_instr_bytes)
    throw ValidationError("timing_model",
                          "hardware config: program_image_bytes exceeds spm_instr_bytes");
}

void to_json(nlohmann::json& j, const HardwareConfig& hw) {
  j = nlohmann::json{
      {"n_cores", hw.n_cores},
      {"spm_data_bytes", hw.spm_data_bytes},
      {"spm_instr_bytes", hw.spm_instr_bytes},
      {"vlen_bits", hw.vlen_bits},
      {"sew_bits", hw.sew_bits},
      {"bus_bytes_per_cycle", hw.bus_bytes_per_cycle},
      {"dma_setup_cycles", hw.dma_setup_cycles},
      {"dram_latency_cycles", hw.dram_latency_cycles},
      {"gemm_c0", hw.gemm_c0},
      {"gemm_c1", hw.gemm_c1},
      {"stream_c1", hw.stream_c1},
      {"program_image_bytes", hw.program_image_bytes},
      {"include_program_load", hw.include_program_load},
  };
  if (hw.tile_budget_bytes) j["tile_budget_bytes"] = *hw.tile_budget_bytes;
}

void from_json(const nlohmann::json& j, HardwareConfig& hw) {
  if (!j.is_object()) throw ParseError("timing_model", "hardware config must be a JSON object");
  try {
    hw.n_cores = j.value("n_cores", hw.n_cores);
    hw.spm_data_bytes = j.value("spm_data_bytes", hw.spm_data_bytes);
    hw.spm_instr_bytes = j.value("spm_instr_bytes", hw.spm_instr_bytes);
    hw.vlen_bits = j.value("vlen_bits", hw.vlen_bits);
    hw.sew_bits = j.value("sew_bits", hw.sew_bits);
    hw.bus_bytes_per_cycle = j.value("bus_bytes_per_cycle", hw.bus_bytes_per_cycle);
    hw.dma_setup_cycles = j.value("dma_setup_cycles", hw.dma_setup_cycles);
    hw.dram_latency_cycles = j.value("dram_latency_cycles", hw.dram_latency_cycles);
    hw.gemm_c0 = j.value("gemm_c0", hw.gemm_c0);
    hw.gemm_c1 = j.value("gemm_c1", hw.gemm_c1);
    hw.stream_c1 = j.value("stream_c1", hw.stream_c1);
    hw.program_image_bytes = j.value("program_image_bytes", hw.program_image_bytes);
    hw.include_program_load = j.value("include_program_load", hw.include_program_load);
    if (j.contains("tile_budget_bytes") && !j.at("tile_budget_bytes").is_null())
      hw.tile_budget_bytes = j.at("tile_budget_bytes").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("timing_model", std::string("malformed hardware config: ") + e.what());
  }
}

HardwareConfig load_hardware_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("timing_model", "cannot open hardware config " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("timing_model", "malformed hardware config " + path.string() + ": " + e.what());
  }
  HardwareConfig hw = doc.get<HardwareConfig>();
  hw.validate();
  return hw;
}

}  // namespace rtdeploy
