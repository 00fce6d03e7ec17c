// Copyright 2026 The rtdeploy Authors
// SPDX-License-Identifier: Apache-2.0

#include "rtdeploy/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <random>
#include <sstream>
#include <tuple>

#include "rtdeploy/error.hpp"
#include "rtdeploy/schedule_check.hpp"

namespace rtdeploy {

double ExecutionProfile::factor_for(int subtask) const {
  switch (mode) {
    case Mode::WorstCase: return 1.0;
    case Mode::Scaled: return factor;
    case Mode::Random: {
      std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                        static_cast<std::uint32_t>(subtask)};
      std::mt19937_64 gen(seq);
      return std::uniform_real_distribution<double>(min_factor, 1.0)(gen);
    }
    case Mode::Fault: {
      auto it = faults.find(subtask);
      return it == faults.end() ? 1.0 : it->second;
    }
  }
  return 1.0;
}

std::uint64_t ExecutionProfile::actual_cycles(int subtask, std::uint64_t wcet) const {
  // The epsilon keeps factor * wcet from rounding up past an exact integer.
  const double cycles = std::ceil(factor_for(subtask) * static_cast<double>(wcet) - 1e-9);
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::max(cycles, 1.0)));
}

std::string ExecutionProfile::describe() const {
  std::ostringstream os;
  switch (mode) {
    case Mode::WorstCase: os << "worst-case"; break;
    case Mode::Scaled: os << "scaled:" << factor; break;
    case Mode::Random: os << "random:" << seed << ":" << min_factor; break;
    case Mode::Fault: {
      os << "fault:";
      bool first = true;
      for (const auto& [id, f] : faults) {
        os << (first ? "" : ",") << "S" << id << "=" << f;
        first = false;
      }
      break;
    }
  }
  return os.str();
}

namespace {

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("simulator", "profile: bad " + what + " '" + s + "'");
  }
}

std::uint64_t parse_u64(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    if (s.empty() || s[0] == '-') throw std::invalid_argument(s);
    const auto v = std::stoull(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("simulator", "profile: bad " + what + " '" + s + "'");
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

ExecutionProfile parse_profile(const std::string& text) {
  ExecutionProfile p;
  if (text == "worst-case" || text == "worst_case") return p;
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (head == "scaled" && !rest.empty()) {
    p.mode = ExecutionProfile::Mode::Scaled;
    p.factor = parse_double(rest, "scale factor");
    if (!(p.factor > 0.0 && p.factor <= 1.0))
      throw ParseError("simulator", "profile: scale factor must be in (0, 1]");
    return p;
  }
  if (head == "random") {
    const auto parts = split(rest, ':');
    if (parts.size() != 2) throw ParseError("simulator", "profile: expected random:SEED:MIN");
    p.mode = ExecutionProfile::Mode::Random;
    p.seed = parse_u64(parts[0], "seed");
    p.min_factor = parse_double(parts[1], "minimum factor");
    if (!(p.min_factor > 0.0 && p.min_factor <= 1.0))
      throw ParseError("simulator", "profile: minimum factor must be in (0, 1]");
    return p;
  }
  if (head == "fault" && !rest.empty()) {
    p.mode = ExecutionProfile::Mode::Fault;
    for (const auto& item : split(rest, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw ParseError("simulator", "profile: expected ID=FACTOR, got '" + item + "'");
      std::string id = item.substr(0, eq);
      if (!id.empty() && (id[0] == 'S' || id[0] == 's')) id.erase(0, 1);
      const auto sid = parse_u64(id, "subtask id");
      const double f = parse_double(item.substr(eq + 1), "fault factor");
      if (sid == 0) throw ParseError("simulator", "profile: subtask ids start at 1");
      if (!(f > 1.0)) throw ParseError("simulator", "profile: fault factor must exceed 1");
      p.faults[static_cast<int>(sid)] = f;
    }
    return p;
  }
  throw ParseError("simulator", "unknown profile '" + text + "'");
}

std::size_t SimTrace::count(const std::string& kind) const {
  return static_cast<std::size_t>(
      std::count_if(violations.begin(), violations.end(), [&](const Violation& v) { return v.kind == kind; }));
}

namespace {

// Lower value fires first at equal cycles.
enum class EventKind { TransferEnd = 0, ComputeEnd, RegionFree, RegionAlloc, TransferStart, ComputeStart };

struct QueuedEvent {
  std::uint64_t cycle;
  EventKind kind;
  int index;

  bool operator>(const QueuedEvent& o) const {
    return std::tie(cycle, kind, index) > std::tie(o.cycle, o.kind, o.index);
  }
};

}  // namespace

SimTrace simulate(const Schedule& s, const ExecutionProfile& p) {
  validate_structure(s);
  SimTrace trace;
  trace.profile = p;
  trace.predicted_makespan = s.predicted_makespan;

  std::map<int, std::size_t> compute_idx, transfer_idx;
  for (std::size_t i = 0; i < s.computes.size(); ++i) compute_idx[s.computes[i].subtask] = i;
  for (std::size_t i = 0; i < s.transfers.size(); ++i) transfer_idx[s.transfers[i].id] = i;

  std::vector<std::uint64_t> actual(s.computes.size());
  for (std::size_t i = 0; i < s.computes.size(); ++i)
    actual[i] = p.actual_cycles(s.computes[i].subtask, s.computes[i].wcet);
  const auto compute_end = [&](int subtask) {
    const auto i = compute_idx.at(subtask);
    return s.computes[i].start + actual[i];
  };

  // Regions stay resident until whatever still touches them has finished.
  std::vector<std::uint64_t> region_free(s.spm_regions.size());
  for (std::size_t r = 0; r < s.spm_regions.size(); ++r) {
    const auto& reg = s.spm_regions[r];
    std::uint64_t end = reg.live_end;
    if (reg.role == RegionRole::Work) {
      if (compute_idx.count(reg.subtask)) end = std::max(end, compute_end(reg.subtask));
    } else {
      for (const auto& c : s.computes)
        if (std::find(c.after_computes.begin(), c.after_computes.end(), reg.subtask) != c.after_computes.end())
          end = std::max(end, compute_end(c.subtask));
    }
    region_free[r] = end;
  }

  std::priority_queue<QueuedEvent, std::vector<QueuedEvent>, std::greater<>> queue;
  for (std::size_t i = 0; i < s.transfers.size(); ++i)
    queue.push({s.transfers[i].start, EventKind::TransferStart, static_cast<int>(i)});
  for (std::size_t i = 0; i < s.computes.size(); ++i)
    queue.push({s.computes[i].start, EventKind::ComputeStart, static_cast<int>(i)});
  for (std::size_t r = 0; r < s.spm_regions.size(); ++r) {
    if (s.spm_regions[r].live_start == region_free[r]) continue;
    queue.push({s.spm_regions[r].live_start, EventKind::RegionAlloc, static_cast<int>(r)});
  }

  std::vector<bool> transfer_done(s.transfers.size(), false), compute_done(s.computes.size(), false);
  std::vector<int> core_busy(static_cast<std::size_t>(s.hw.n_cores), -1);
  int dma_busy = -1;
  std::vector<std::uint64_t> resident(static_cast<std::size_t>(s.hw.n_cores), 0);
  std::vector<bool> core_overflowing(static_cast<std::size_t>(s.hw.n_cores), false);

  auto violate = [&](std::string kind, std::string event, std::uint64_t cycle, std::string detail) {
    trace.violations.push_back({std::move(kind), std::move(event), cycle, std::move(detail)});
  };

  while (!queue.empty()) {
    const QueuedEvent ev = queue.top();
    queue.pop();
    const auto idx = static_cast<std::size_t>(ev.index);
    switch (ev.kind) {
      case EventKind::TransferStart: {
        const auto& t = s.transfers[idx];
        const std::string tag = "T" + std::to_string(t.id);
        if (dma_busy >= 0)
          violate("dma_overlap", tag, ev.cycle,
                  "DMA still busy with T" + std::to_string(s.transfers[static_cast<std::size_t>(dma_busy)].id));
        for (int d : t.after_computes)
          if (!compute_done[compute_idx.at(d)])
            violate("dependency_unready", tag, ev.cycle, "S" + std::to_string(d) + " has not finished");
        for (int d : t.after_transfers)
          if (!transfer_done[transfer_idx.at(d)])
            violate("dependency_unready", tag, ev.cycle, "T" + std::to_string(d) + " has not finished");
        // Compute starts are time-triggered, so a start at this very cycle
        // has already released the buffer even though it is queued later.
        if (t.gate_compute && s.computes[compute_idx.at(*t.gate_compute)].start > ev.cycle)
          violate("dependency_unready", tag, ev.cycle,
                  "buffer of S" + std::to_string(*t.gate_compute) + " not yet released");
        dma_busy = ev.index;
        queue.push({t.end(), EventKind::TransferEnd, ev.index});
        break;
      }
      case EventKind::TransferEnd:
        transfer_done[idx] = true;
        if (dma_busy == ev.index) dma_busy = -1;
        break;
      case EventKind::ComputeStart: {
        const auto& c = s.computes[idx];
        const std::string tag = "S" + std::to_string(c.subtask);
        const auto core = static_cast<std::size_t>(c.core);
        if (core_busy[core] >= 0)
          violate("dependency_unready", tag, ev.cycle,
                  "core " + std::to_string(c.core) + " still runs S" +
                      std::to_string(s.computes[static_cast<std::size_t>(core_busy[core])].subtask));
        for (int d : c.after_computes)
          if (!compute_done[compute_idx.at(d)])
            violate("dependency_unready", tag, ev.cycle, "S" + std::to_string(d) + " has not finished");
        for (int d : c.after_transfers)
          if (!transfer_done[transfer_idx.at(d)])
            violate("dependency_unready", tag, ev.cycle, "T" + std::to_string(d) + " has not finished");
        core_busy[core] = ev.index;
        if (actual[idx] > c.wcet)
          violate("wcet_overrun", tag, c.start + c.wcet,
                  "runs " + std::to_string(actual[idx]) + " cycles, bound " + std::to_string(c.wcet));
        queue.push({c.start + actual[idx], EventKind::ComputeEnd, ev.index});
        break;
      }
      case EventKind::ComputeEnd: {
        compute_done[idx] = true;
        const auto core = static_cast<std::size_t>(s.computes[idx].core);
        if (core_busy[core] == ev.index) core_busy[core] = -1;
        break;
      }
      case EventKind::RegionAlloc: {
        const auto& r = s.spm_regions[idx];
        const auto core = static_cast<std::size_t>(r.core);
        resident[core] += r.length;
        if (resident[core] > s.hw.spm_data_bytes && !core_overflowing[core]) {
          core_overflowing[core] = true;
          violate("spm_overflow", "core" + std::to_string(r.core), ev.cycle,
                  std::to_string(resident[core]) + " B resident, capacity " +
                      std::to_string(s.hw.spm_data_bytes));
        }
        queue.push({region_free[idx], EventKind::RegionFree, ev.index});
        break;
      }
      case EventKind::RegionFree: {
        const auto core = static_cast<std::size_t>(s.spm_regions[idx].core);
        resident[core] -= s.spm_regions[idx].length;
        if (resident[core] <= s.hw.spm_data_bytes) core_overflowing[core] = false;
        break;
      }
    }
  }

  for (const auto& t : s.transfers) {
    trace.events.push_back({"transfer", t.id, "T" + std::to_string(t.id) + " " + to_string(t.kind), t.core,
                            t.start, t.end(), t.start, t.end()});
    trace.observed_makespan = std::max(trace.observed_makespan, t.end());
  }
  for (std::size_t i = 0; i < s.computes.size(); ++i) {
    const auto& c = s.computes[i];
    trace.events.push_back({"compute", c.subtask, "S" + std::to_string(c.subtask) + " " + c.layer_id, c.core,
                            c.start, c.end(), c.start, c.start + actual[i]});
    trace.observed_makespan = std::max(trace.observed_makespan, c.start + actual[i]);
  }
  std::sort(trace.events.begin(), trace.events.end(), [](const TraceEvent& a, const TraceEvent& b) {
    return std::tie(a.scheduled_start, a.type, a.id) < std::tie(b.scheduled_start, b.type, b.id);
  });
  std::stable_sort(trace.violations.begin(), trace.violations.end(),
                   [](const Violation& a, const Violation& b) { return a.cycle < b.cycle; });
  return trace;
}

VerifyReport verify_against_prediction(const SimTrace& t, const Schedule& s) {
  VerifyReport r;
  r.observed = t.observed_makespan;
  r.predicted = s.predicted_makespan;
  r.equality_required = t.profile.mode == ExecutionProfile::Mode::WorstCase;
  for (const auto& v : t.violations)
    r.reasons.push_back(v.kind + " " + v.event + " @" + std::to_string(v.cycle) + ": " + v.detail);
  if (r.observed > r.predicted)
    r.reasons.push_back("observed makespan " + std::to_string(r.observed) + " exceeds predicted " +
                        std::to_string(r.predicted));
  if (r.equality_required && r.observed != r.predicted)
    r.reasons.push_back("worst-case makespan " + std::to_string(r.observed) + " differs from predicted " +
                        std::to_string(r.predicted));
  r.pass = r.reasons.empty();
  return r;
}

void to_json(nlohmann::json& j, const SimTrace& t) {
  nlohmann::json events = nlohmann::json::array();
  for (const auto& e : t.events) {
    events.push_back({{"type", e.type},
                      {"id", e.id},
                      {"label", e.label},
                      {"core", e.core},
                      {"scheduled", {e.scheduled_start, e.scheduled_end}},
                      {"actual", {e.actual_start, e.actual_end}}});
  }
  nlohmann::json violations = nlohmann::json::array();
  for (const auto& v : t.violations)
    violations.push_back({{"kind", v.kind}, {"event", v.event}, {"cycle", v.cycle}, {"detail", v.detail}});
  j = nlohmann::json{{"profile", t.profile.describe()},
                     {"pass", t.pass()},
                     {"observed_makespan", t.observed_makespan},
                     {"predicted_makespan", t.predicted_makespan},
                     {"violations", std::move(violations)},
                     {"events", std::move(events)}};
}

std::string gantt_csv(const SimTrace& t) {
  std::ostringstream os;
  os << "row_type,row_id,label,start,end\n";
  for (const auto& e : t.events) {
    if (e.type == "compute")
      os << "core," << e.core << ",S" << e.id << "," << e.actual_start << "," << e.actual_end << "\n";
    else
      os << "dma,0,T" << e.id << "," << e.actual_start << "," << e.actual_end << "\n";
  }
  return os.str();
}

}  // namespace rtdeploy
