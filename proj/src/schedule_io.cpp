// Copyright 2026 The rtdeploy Authors
// SPDX-License-Identifier: Apache-2.0

#include "rtdeploy/schedule_io.hpp"

#include <fstream>
#include <sstream>

#include "rtdeploy/error.hpp"

namespace rtdeploy {

using nlohmann::json;

namespace {

TransferKind kind_from_string(const std::string& s) {
  if (s == "load_dram") return TransferKind::LoadDram;
  if (s == "store_dram") return TransferKind::StoreDram;
  if (s == "copy_spm") return TransferKind::CopySpm;
  throw ParseError("scheduler", "unknown transfer kind '" + s + "'");
}

MemSpace space_from_string(const std::string& s) {
  if (s == "dram") return MemSpace::Dram;
  if (s == "spm") return MemSpace::Spm;
  if (s == "ispm") return MemSpace::InstrSpm;
  throw ParseError("scheduler", "unknown memory space '" + s + "'");
}

std::string role_name(RegionRole r) { return r == RegionRole::Work ? "work" : "output"; }

RegionRole role_from_string(const std::string& s) {
  if (s == "work") return RegionRole::Work;
  if (s == "output") return RegionRole::Output;
  throw ParseError("scheduler", "unknown region role '" + s + "'");
}

}  // namespace

void to_json(json& j, const Mapping& m) {
  json pairs = json::array();
  for (std::size_t id = 1; id < m.core_of.size(); ++id) pairs.push_back({id, m.core_of[id]});
  j = json{{"n_cores", m.n_cores}, {"load_cap", m.load_cap}, {"core_of", pairs}};
}

void from_json(const json& j, Mapping& m) {
  m.n_cores = j.at("n_cores").get<int>();
  m.load_cap = j.at("load_cap").get<int>();
  const auto& pairs = j.at("core_of");
  m.core_of.assign(pairs.size() + 1, -1);
  for (const auto& p : pairs) {
    const auto id = p.at(0).get<std::size_t>();
    if (id == 0 || id > pairs.size())
      throw ParseError("scheduler", "mapping: subtask id " + std::to_string(id) + " out of range");
    m.core_of[id] = p.at(1).get<int>();
  }
}

void to_json(json& j, const Location& l) {
  j = json{{"mem", to_string(l.space)}};
  if (l.space == MemSpace::Dram) {
    j["addr"] = l.addr;
  } else {
    j["core"] = l.core;
    j["offset"] = l.addr;
  }
  j["len"] = l.len;
}

void from_json(const json& j, Location& l) {
  l.space = space_from_string(j.at("mem").get<std::string>());
  if (l.space == MemSpace::Dram) {
    l.core = -1;
    l.addr = j.at("addr").get<std::uint64_t>();
  } else {
    l.core = j.at("core").get<int>();
    l.addr = j.at("offset").get<std::uint64_t>();
  }
  l.len = j.at("len").get<std::uint64_t>();
}

void to_json(json& j, const Schedule& s) {
  json transfers = json::array();
  for (const auto& t : s.transfers) {
    json e{{"id", t.id},
           {"kind", to_string(t.kind)},
           {"src", t.src},
           {"dst", t.dst},
           {"bytes", t.bytes},
           {"start", t.start},
           {"dur", t.duration},
           {"serves", t.serves},
           {"core", t.core},
           {"source_subtask", t.source_subtask},
           {"spill", t.spill},
           {"after_computes", t.after_computes},
           {"after_transfers", t.after_transfers}};
    e["gate_compute"] = t.gate_compute ? json(*t.gate_compute) : json(nullptr);
    transfers.push_back(std::move(e));
  }
  json computes = json::array();
  for (const auto& c : s.computes) {
    computes.push_back({{"subtask", c.subtask},
                        {"core", c.core},
                        {"layer", c.layer_id},
                        {"start", c.start},
                        {"wcet", c.wcet},
                        {"cost", c.cost},
                        {"after_computes", c.after_computes},
                        {"after_transfers", c.after_transfers}});
  }
  json regions = json::array();
  for (const auto& r : s.spm_regions) {
    regions.push_back({{"core", r.core},
                       {"offset", r.offset},
                       {"length", r.length},
                       {"start", r.live_start},
                       {"end", r.live_end},
                       {"subtask", r.subtask},
                       {"role", role_name(r.role)}});
  }
  j = json{{"hw", s.hw},
           {"mapping", s.mapping},
           {"makespan", s.predicted_makespan},
           {"spills", s.spill_count()},
           {"transfers", std::move(transfers)},
           {"computes", std::move(computes)},
           {"spm_regions", std::move(regions)}};
}

void from_json(const json& j, Schedule& s) {
  if (!j.is_object()) throw ParseError("scheduler", "schedule artifact must be a JSON object");
  try {
    s = Schedule{};
    s.hw = j.at("hw").get<HardwareConfig>();
    s.mapping = j.at("mapping").get<Mapping>();
    s.predicted_makespan = j.at("makespan").get<std::uint64_t>();
    for (const auto& e : j.at("transfers")) {
      TransferEvent t;
      t.id = e.at("id").get<int>();
      t.kind = kind_from_string(e.at("kind").get<std::string>());
      t.src = e.at("src").get<Location>();
      t.dst = e.at("dst").get<Location>();
      t.bytes = e.at("bytes").get<std::uint64_t>();
      t.start = e.at("start").get<std::uint64_t>();
      t.duration = e.at("dur").get<std::uint64_t>();
      t.serves = e.at("serves").get<std::vector<int>>();
      t.core = e.value("core", 0);
      t.source_subtask = e.value("source_subtask", 0);
      t.spill = e.value("spill", false);
      t.after_computes = e.value("after_computes", std::vector<int>{});
      t.after_transfers = e.value("after_transfers", std::vector<int>{});
      if (e.contains("gate_compute") && !e.at("gate_compute").is_null())
        t.gate_compute = e.at("gate_compute").get<int>();
      s.transfers.push_back(std::move(t));
    }
    for (const auto& e : j.at("computes")) {
      ComputeEvent c;
      c.subtask = e.at("subtask").get<int>();
      c.core = e.at("core").get<int>();
      c.layer_id = e.value("layer", std::string{});
      c.start = e.at("start").get<std::uint64_t>();
      c.wcet = e.at("wcet").get<std::uint64_t>();
      if (e.contains("cost")) c.cost = e.at("cost").get<CostInputs>();
      c.after_computes = e.value("after_computes", std::vector<int>{});
      c.after_transfers = e.value("after_transfers", std::vector<int>{});
      s.computes.push_back(std::move(c));
    }
    for (const auto& e : j.at("spm_regions")) {
      SpmRegion r;
      r.core = e.at("core").get<int>();
      r.offset = e.at("offset").get<std::uint64_t>();
      r.length = e.at("length").get<std::uint64_t>();
      r.live_start = e.at("start").get<std::uint64_t>();
      r.live_end = e.at("end").get<std::uint64_t>();
      r.subtask = e.at("subtask").get<int>();
      r.role = role_from_string(e.at("role").get<std::string>());
      s.spm_regions.push_back(r);
    }
  } catch (const json::exception& e) {
    throw ParseError("scheduler", std::string("malformed schedule artifact: ") + e.what());
  }
}

std::string schedule_to_string(const Schedule& s) { return json(s).dump(2) + "\n"; }

Schedule parse_schedule(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError("scheduler", std::string("malformed schedule artifact: ") + e.what());
  }
  return doc.get<Schedule>();
}

void emit_schedule(const Schedule& s, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("scheduler", "cannot write " + path.string());
  out << schedule_to_string(s);
  if (!out) throw Error("scheduler", "write failed for " + path.string());
}

Schedule load_schedule(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("scheduler", "cannot open schedule " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_schedule(buf.str());
}

}  // namespace rtdeploy
