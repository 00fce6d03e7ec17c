// Copyright 2026 The rtdeploy Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include <json.hpp>

namespace rtdeploy {

/// Worker-core array, scratchpads, DMA and DRAM timing. Defaults describe the
/// 16-core, 512-bit, 1 MiB-per-core configuration. One clock domain.
struct HardwareConfig {
  int n_cores = 16;
  std::uint64_t spm_data_bytes = 524288;
  std::uint64_t spm_instr_bytes = 524288;
  int vlen_bits = 512;
  int sew_bits = 8;
  std::uint64_t bus_bytes_per_cycle = 8;
  std::uint64_t dma_setup_cycles = 20;
  std::uint64_t dram_latency_cycles = 30;
  std::uint64_t gemm_c0 = 200;
  std::uint64_t gemm_c1 = 2;
  std::uint64_t stream_c1 = 1;
  std::uint64_t program_image_bytes = 65536;
  bool include_program_load = false;
  /// Per-tile scratchpad budget; unset means half of spm_data_bytes, leaving
  /// the other half for the next tile's inputs.
  std::optional<std::uint64_t> tile_budget_bytes;

  int lanes() const { return vlen_bits / sew_bits; }
  std::uint64_t tile_budget() const {
    return tile_budget_bytes.value_or(spm_data_bytes / 2);
  }

  /// Throws ValidationError on non-positive fields or vlen % sew != 0.
  void validate() const;

  bool operator==(const HardwareConfig&) const = default;
};

void to_json(nlohmann::json& j, const HardwareConfig& hw);
/// Missing fields keep their defaults.
void from_json(const nlohmann::json& j, HardwareConfig& hw);

HardwareConfig load_hardware_config(const std::filesystem::path& path);

}  // namespace rtdeploy
