// Copyright 2026 The rtdeploy Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "rtdeploy/mapper.hpp"
#include "rtdeploy/scheduler.hpp"

namespace rtdeploy {

void to_json(nlohmann::json& j, const Mapping& m);
void from_json(const nlohmann::json& j, Mapping& m);

void to_json(nlohmann::json& j, const Location& l);
void from_json(const nlohmann::json& j, Location& l);

void to_json(nlohmann::json& j, const Schedule& s);
/// Throws ParseError on missing keys, wrong types or unknown enum names.
void from_json(const nlohmann::json& j, Schedule& s);

/// Canonical text of the artifact; identical schedules give identical bytes.
std::string schedule_to_string(const Schedule& s);
Schedule parse_schedule(const std::string& text);

void emit_schedule(const Schedule& s, const std::filesystem::path& path);
Schedule load_schedule(const std::filesystem::path& path);

}  // namespace rtdeploy
