// Copyright 2026 The rtdeploy Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace rtdeploy {

/// Base of every error raised by the toolchain. `module()` names the stage
/// that raised it so the CLI can prefix messages.
class Error : public std::runtime_error {
 public:
  Error(std::string module, const std::string& what)
      : std::runtime_error(what), module_(std::move(module)) {}

  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

/// Malformed input file (bad JSON, wrong field types, missing file).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Structurally parseable input that violates a model or schedule invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A layer cannot be tiled within the scratchpad tile budget.
class InfeasibleBudgetError : public Error {
 public:
  InfeasibleBudgetError(const std::string& what, std::uint64_t required)
      : Error("partitioner", what), required_(required) {}

  std::uint64_t required_bytes() const noexcept { return required_; }

 private:
  std::uint64_t required_;
};

/// Scratchpad allocation failed after the spill policy ran out of options.
class SpmOverflowError : public Error {
 public:
  SpmOverflowError(const std::string& what, int core, std::uint64_t cycle,
                   std::uint64_t deficit)
      : Error("scheduler", what), core_(core), cycle_(cycle), deficit_(deficit) {}

  int core() const noexcept { return core_; }
  std::uint64_t cycle() const noexcept { return cycle_; }
  std::uint64_t deficit() const noexcept { return deficit_; }

 private:
  int core_;
  std::uint64_t cycle_;
  std::uint64_t deficit_;
};

}  // namespace rtdeploy
