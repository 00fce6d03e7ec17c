// Copyright 2026 The rtdeploy Authors
// SPDX-License-Identifier: Apache-2.0

#include "rtdeploy/schedule_check.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <tuple>

#include "rtdeploy/error.hpp"
#include "rtdeploy/timing_model.hpp"

namespace rtdeploy {

bool CheckReport::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

const CheckResult* CheckReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

namespace {

std::vector<std::string> structural_findings(const Schedule& s) {
  std::vector<std::string> out;
  auto fail = [&](std::string msg) { out.push_back(std::move(msg)); };
  try {
    s.hw.validate();
  } catch (const Error& e) {
    fail(e.what());
    return out;
  }
  const int n_cores = s.hw.n_cores;
  if (s.mapping.n_cores != n_cores) fail("mapping core count differs from hw.n_cores");

  std::set<int> subtasks;
  for (const auto& c : s.computes) {
    const std::string tag = "compute S" + std::to_string(c.subtask);
    if (!subtasks.insert(c.subtask).second) fail(tag + ": duplicate");
    if (c.core < 0 || c.core >= n_cores) fail(tag + ": core out of range");
    if (c.wcet == 0) fail(tag + ": zero WCET");
    if (c.subtask <= 0 || static_cast<std::size_t>(c.subtask) >= s.mapping.core_of.size() ||
        s.mapping.core(c.subtask) != c.core)
      fail(tag + ": core disagrees with mapping");
  }
  if (subtasks.size() + 1 != std::max<std::size_t>(s.mapping.core_of.size(), 1))
    fail("mapping and compute list cover different subtasks");

  std::set<int> ids;
  for (const auto& t : s.transfers) ids.insert(t.id);
  if (ids.size() != s.transfers.size()) fail("duplicate transfer ids");

  for (const auto& t : s.transfers) {
    const std::string tag = "transfer T" + std::to_string(t.id);
    if (t.bytes == 0) {
      fail(tag + ": zero bytes");
      continue;
    }
    if (t.src.len != t.bytes || t.dst.len != t.bytes) fail(tag + ": location length differs from bytes");
    const bool spm_path = t.kind == TransferKind::CopySpm;
    if (t.duration != transfer_cycles(t.bytes, s.hw,
                                      spm_path ? TransferPath::ScratchpadToScratchpad : TransferPath::Dram))
      fail(tag + ": duration differs from transfer cost");
    switch (t.kind) {
      case TransferKind::LoadDram:
        if (t.src.space != MemSpace::Dram || t.dst.space == MemSpace::Dram) fail(tag + ": load must read DRAM into a scratchpad");
        break;
      case TransferKind::StoreDram:
        if (t.src.space != MemSpace::Spm || t.dst.space != MemSpace::Dram) fail(tag + ": store must write scratchpad to DRAM");
        break;
      case TransferKind::CopySpm:
        if (t.src.space != MemSpace::Spm || t.dst.space != MemSpace::Spm) fail(tag + ": copy must be scratchpad to scratchpad");
        break;
    }
    for (const Location* l : {&t.src, &t.dst}) {
      if (l->space == MemSpace::Dram) continue;
      if (l->core < 0 || l->core >= n_cores) fail(tag + ": core out of range");
      const auto cap = l->space == MemSpace::Spm ? s.hw.spm_data_bytes : s.hw.spm_instr_bytes;
      if (l->addr + l->len > cap) fail(tag + ": scratchpad range exceeds capacity");
    }
    if (t.core < 0 || t.core >= n_cores) fail(tag + ": arbitration core out of range");
    for (int id : t.serves)
      if (!subtasks.count(id)) fail(tag + ": serves unknown subtask " + std::to_string(id));
    for (int id : t.after_computes)
      if (!subtasks.count(id)) fail(tag + ": depends on unknown compute " + std::to_string(id));
    for (int id : t.after_transfers)
      if (!ids.count(id) || id == t.id) fail(tag + ": depends on unknown transfer " + std::to_string(id));
    if (t.gate_compute && !subtasks.count(*t.gate_compute)) fail(tag + ": gated on unknown compute");
    if (t.source_subtask != 0 && !subtasks.count(t.source_subtask)) fail(tag + ": unknown source subtask");
  }
  for (const auto& c : s.computes) {
    for (int id : c.after_computes)
      if (!subtasks.count(id) || id == c.subtask) fail("compute S" + std::to_string(c.subtask) + ": unknown producer");
    for (int id : c.after_transfers)
      if (!ids.count(id)) fail("compute S" + std::to_string(c.subtask) + ": unknown transfer " + std::to_string(id));
  }

  const bool transfers_sorted = std::is_sorted(
      s.transfers.begin(), s.transfers.end(),
      [](const TransferEvent& a, const TransferEvent& b) { return std::tie(a.start, a.id) < std::tie(b.start, b.id); });
  if (!transfers_sorted) fail("transfers not sorted by start, id");
  const bool computes_sorted = std::is_sorted(
      s.computes.begin(), s.computes.end(), [](const ComputeEvent& a, const ComputeEvent& b) {
        return std::tie(a.start, a.subtask) < std::tie(b.start, b.subtask);
      });
  if (!computes_sorted) fail("computes not sorted by start, subtask");

  for (const auto& r : s.spm_regions) {
    const std::string tag = "region S" + std::to_string(r.subtask);
    if (r.core < 0 || r.core >= n_cores) fail(tag + ": core out of range");
    if (r.live_end < r.live_start) fail(tag + ": negative lifetime");
    if (r.length == 0) fail(tag + ": zero length");
  }
  return out;
}

std::vector<std::string> overlap_findings(std::vector<std::tuple<std::uint64_t, std::uint64_t, std::string>> iv,
                                          const std::string& what) {
  std::vector<std::string> out;
  std::sort(iv.begin(), iv.end());
  std::uint64_t max_end = 0;
  std::string holder;
  for (const auto& [start, end, label] : iv) {
    if (start == end) continue;
    if (!holder.empty() && start < max_end)
      out.push_back(what + ": " + label + " starts at " + std::to_string(start) + " while " + holder +
                    " runs until " + std::to_string(max_end));
    if (end > max_end) {
      max_end = end;
      holder = label;
    }
  }
  return out;
}

}  // namespace

void validate_structure(const Schedule& s) {
  auto findings = structural_findings(s);
  if (!findings.empty()) throw ValidationError("scheduler", "malformed schedule: " + findings.front());
}

CheckReport check_schedule(const Schedule& s) {
  CheckReport report;
  auto add = [&](std::string name, std::vector<std::string> findings) {
    CheckResult r{std::move(name), findings.empty(), std::move(findings)};
    report.checks.push_back(std::move(r));
  };

  auto structure = structural_findings(s);
  const bool sound = structure.empty();
  add("structure", std::move(structure));

  {
    std::vector<std::tuple<std::uint64_t, std::uint64_t, std::string>> iv;
    for (const auto& t : s.transfers) iv.emplace_back(t.start, t.end(), "T" + std::to_string(t.id));
    add("dma_exclusive", overlap_findings(std::move(iv), "dma_overlap"));
  }
  {
    std::map<int, std::vector<std::tuple<std::uint64_t, std::uint64_t, std::string>>> per_core;
    for (const auto& c : s.computes)
      per_core[c.core].emplace_back(c.start, c.end(), "S" + std::to_string(c.subtask));
    std::vector<std::string> findings;
    for (auto& [core, iv] : per_core) {
      for (auto& f : overlap_findings(std::move(iv), "core " + std::to_string(core) + " overlap"))
        findings.push_back(std::move(f));
    }
    add("compute_exclusive", std::move(findings));
  }
  {
    std::vector<std::string> cap_findings, disjoint_findings;
    std::map<int, std::vector<const SpmRegion*>> per_core;
    for (const auto& r : s.spm_regions) per_core[r.core].push_back(&r);
    for (const auto& [core, regions] : per_core) {
      std::vector<std::pair<std::uint64_t, std::int64_t>> deltas;
      for (const SpmRegion* r : regions) {
        if (r->offset + r->length > s.hw.spm_data_bytes)
          cap_findings.push_back("core " + std::to_string(core) + ": region S" + std::to_string(r->subtask) +
                                 " ends beyond the scratchpad");
        if (r->live_start == r->live_end) continue;
        deltas.emplace_back(r->live_end, -static_cast<std::int64_t>(r->length));
        deltas.emplace_back(r->live_start, static_cast<std::int64_t>(r->length));
      }
      std::sort(deltas.begin(), deltas.end());  // frees sort before allocs at equal cycles
      std::int64_t live = 0;
      for (const auto& [cycle, d] : deltas) {
        live += d;
        if (live > static_cast<std::int64_t>(s.hw.spm_data_bytes)) {
          cap_findings.push_back("core " + std::to_string(core) + " holds " + std::to_string(live) +
                                 " B at cycle " + std::to_string(cycle));
          break;
        }
      }
      for (std::size_t a = 0; a < regions.size(); ++a) {
        for (std::size_t b = a + 1; b < regions.size(); ++b) {
          const SpmRegion& x = *regions[a];
          const SpmRegion& y = *regions[b];
          const bool in_time = x.live_start < y.live_end && y.live_start < x.live_end;
          const bool in_space = x.offset < y.offset + y.length && y.offset < x.offset + x.length;
          if (in_time && in_space)
            disjoint_findings.push_back("core " + std::to_string(core) + ": regions of S" +
                                        std::to_string(x.subtask) + " and S" + std::to_string(y.subtask) +
                                        " share addresses while both live");
        }
      }
    }
    add("spm_capacity", std::move(cap_findings));
    add("spm_disjoint", std::move(disjoint_findings));
  }

  if (!sound) {
    add("dependencies", {"skipped: structure check failed"});
    add("makespan", {"skipped: structure check failed"});
    add("replay", {"skipped: structure check failed"});
    return report;
  }

  std::map<int, const ComputeEvent*> compute_of;
  for (const auto& c : s.computes) compute_of[c.subtask] = &c;
  std::map<int, const TransferEvent*> transfer_of;
  for (const auto& t : s.transfers) transfer_of[t.id] = &t;

  {
    std::vector<std::string> findings;
    for (const auto& c : s.computes) {
      const std::string tag = "compute S" + std::to_string(c.subtask);
      for (int id : c.after_transfers)
        if (transfer_of[id]->end() > c.start) findings.push_back(tag + " starts before T" + std::to_string(id) + " ends");
      for (int id : c.after_computes)
        if (compute_of[id]->end() > c.start) findings.push_back(tag + " starts before S" + std::to_string(id) + " ends");
    }
    for (const auto& t : s.transfers) {
      const std::string tag = "transfer T" + std::to_string(t.id);
      for (int id : t.after_transfers)
        if (transfer_of[id]->end() > t.start) findings.push_back(tag + " starts before T" + std::to_string(id) + " ends");
      for (int id : t.after_computes)
        if (compute_of[id]->end() > t.start) findings.push_back(tag + " starts before S" + std::to_string(id) + " ends");
      if (t.gate_compute && compute_of[*t.gate_compute]->start > t.start)
        findings.push_back(tag + " starts before S" + std::to_string(*t.gate_compute) + " starts");
    }
    add("dependencies", std::move(findings));
  }

  std::uint64_t max_end = 0;
  for (const auto& t : s.transfers) max_end = std::max(max_end, t.end());
  for (const auto& c : s.computes) max_end = std::max(max_end, c.end());
  if (max_end != s.predicted_makespan)
    add("makespan", {"recorded makespan " + std::to_string(s.predicted_makespan) + " != max event end " +
                     std::to_string(max_end)});
  else
    add("makespan", {});

  // Replay: every start is the earliest cycle its resource predecessor,
  // dependencies and gate allow. Resource order is the recorded order.
  {
    std::map<int, int> prev_transfer;
    for (std::size_t i = 1; i < s.transfers.size(); ++i)
      prev_transfer[s.transfers[i].id] = s.transfers[i - 1].id;
    std::map<int, int> prev_compute;
    std::map<int, int> last_on_core;
    for (const auto& c : s.computes) {
      if (auto it = last_on_core.find(c.core); it != last_on_core.end()) prev_compute[c.subtask] = it->second;
      last_on_core[c.core] = c.subtask;
    }

    std::map<int, std::uint64_t> t_start, c_start;
    std::set<std::pair<int, int>> on_stack;
    bool cyclic = false;
    std::function<std::uint64_t(int)> transfer_start, compute_start;
    auto guard = [&](std::pair<int, int> key) {
      if (!on_stack.insert(key).second) {
        cyclic = true;
        return false;
      }
      return true;
    };
    compute_start = [&](int id) -> std::uint64_t {
      if (auto it = c_start.find(id); it != c_start.end()) return it->second;
      if (!guard({1, id})) return 0;
      const ComputeEvent& c = *compute_of[id];
      std::uint64_t t = 0;
      if (auto p = prev_compute.find(id); p != prev_compute.end())
        t = std::max(t, compute_start(p->second) + compute_of[p->second]->wcet);
      for (int d : c.after_computes) t = std::max(t, compute_start(d) + compute_of[d]->wcet);
      for (int d : c.after_transfers) t = std::max(t, transfer_start(d) + transfer_of[d]->duration);
      on_stack.erase({1, id});
      return c_start[id] = t;
    };
    transfer_start = [&](int id) -> std::uint64_t {
      if (auto it = t_start.find(id); it != t_start.end()) return it->second;
      if (!guard({0, id})) return 0;
      const TransferEvent& tr = *transfer_of[id];
      std::uint64_t t = 0;
      if (auto p = prev_transfer.find(id); p != prev_transfer.end())
        t = std::max(t, transfer_start(p->second) + transfer_of[p->second]->duration);
      for (int d : tr.after_computes) t = std::max(t, compute_start(d) + compute_of[d]->wcet);
      for (int d : tr.after_transfers) t = std::max(t, transfer_start(d) + transfer_of[d]->duration);
      if (tr.gate_compute) t = std::max(t, compute_start(*tr.gate_compute));
      on_stack.erase({0, id});
      return t_start[id] = t;
    };

    std::vector<std::string> findings;
    std::uint64_t replayed = 0;
    for (const auto& t : s.transfers) {
      const auto st = transfer_start(t.id);
      replayed = std::max(replayed, st + t.duration);
      if (st != t.start)
        findings.push_back("T" + std::to_string(t.id) + " recorded at " + std::to_string(t.start) +
                           ", replay gives " + std::to_string(st));
    }
    for (const auto& c : s.computes) {
      const auto st = compute_start(c.subtask);
      replayed = std::max(replayed, st + c.wcet);
      if (st != c.start)
        findings.push_back("S" + std::to_string(c.subtask) + " recorded at " + std::to_string(c.start) +
                           ", replay gives " + std::to_string(st));
    }
    if (cyclic) findings.push_back("dependency cycle in the artifact");
    if (replayed != s.predicted_makespan)
      findings.push_back("replayed makespan " + std::to_string(replayed) + " != recorded " +
                         std::to_string(s.predicted_makespan));
    report.replayed_makespan = replayed;
    add("replay", std::move(findings));
  }
  return report;
}

}  // namespace rtdeploy
