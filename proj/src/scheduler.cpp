// Copyright 2026 The rtdeploy Authors
// SPDX-License-Identifier: Apache-2.0

#include "rtdeploy/scheduler.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <stdexcept>
#include <tuple>

#include "rtdeploy/error.hpp"

namespace rtdeploy {

std::string to_string(TransferKind k) {
  switch (k) {
    case TransferKind::LoadDram: return "load_dram";
    case TransferKind::StoreDram: return "store_dram";
    case TransferKind::CopySpm: return "copy_spm";
  }
  return "?";
}

std::string to_string(MemSpace s) {
  switch (s) {
    case MemSpace::Dram: return "dram";
    case MemSpace::Spm: return "spm";
    case MemSpace::InstrSpm: return "ispm";
  }
  return "?";
}

const ComputeEvent* Schedule::compute(int subtask) const {
  for (const auto& c : computes)
    if (c.subtask == subtask) return &c;
  return nullptr;
}

const TransferEvent* Schedule::transfer(int id) const {
  for (const auto& t : transfers)
    if (t.id == id) return &t;
  return nullptr;
}

std::size_t Schedule::spill_count() const {
  return static_cast<std::size_t>(std::count_if(transfers.begin(), transfers.end(),
                                                [](const TransferEvent& t) { return t.spill; }));
}

namespace {

// Arbitration priority among transfers of one core in the same round.
enum Priority { kProgram = 0, kStore = 1, kCopy = 2, kLoad = 3 };

struct TransferSpec {
  TransferKind kind = TransferKind::LoadDram;
  MemSpace dst_space = MemSpace::Spm;
  int key_core = 0;
  int priority = kLoad;
  int owner = 0;  // subtask whose order position breaks ties
  std::uint64_t bytes = 0;
  std::uint64_t duration = 0;
  std::uint64_t dram_addr = 0;
  std::vector<int> serves;
  int source_subtask = 0;
  int src_core = -1;
  bool spill = false;
  std::vector<int> after_computes;
  std::vector<int> after_specs;
  std::optional<int> gate;

  bool placed = false;
  std::uint64_t start = 0;
  int id = 0;

  std::uint64_t end() const { return start + duration; }
};

void check_inputs(const SubtaskGraph& sg, const Mapping& m, const std::vector<CostEstimate>& costs,
                  const HardwareConfig& hw) {
  hw.validate();
  const auto n = sg.subtasks.size();
  if (m.core_of.size() != n + 1)
    throw std::invalid_argument("schedule: mapping does not cover the subtask graph");
  if (costs.size() != n + 1)
    throw std::invalid_argument("schedule: cost vector does not cover the subtask graph");
  if (m.n_cores != hw.n_cores)
    throw std::invalid_argument("schedule: mapping core count differs from hardware config");
  for (std::size_t id = 1; id <= n; ++id) {
    if (sg.subtasks[id - 1].id != static_cast<int>(id))
      throw std::invalid_argument("schedule: subtask ids must be dense and start at 1");
    if (m.core_of[id] < 0 || m.core_of[id] >= hw.n_cores)
      throw std::invalid_argument("schedule: subtask mapped outside the core range");
    if (costs[id].wcet_cycles == 0) throw std::invalid_argument("schedule: WCET must be >= 1");
  }
}

}  // namespace

Schedule schedule_skeleton(const SubtaskGraph& sg, const Mapping& m,
                           const std::vector<CostEstimate>& costs, const HardwareConfig& hw,
                           const SpillPlan& plan) {
  check_inputs(sg, m, costs, hw);
  Schedule out;
  out.hw = hw;
  out.mapping = m;
  const auto n = sg.subtasks.size();
  if (n == 0) return out;
  const int n_cores = hw.n_cores;
  const auto core_of = [&](int id) { return m.core(id); };
  const auto wcet = [&](int id) { return costs[static_cast<std::size_t>(id)].wcet_cycles; };

  std::vector<std::vector<int>> seq(static_cast<std::size_t>(n_cores));
  std::vector<int> prev_on_core(n + 1, 0);
  for (int id = 1; id <= static_cast<int>(n); ++id) {
    auto& s = seq[static_cast<std::size_t>(core_of(id))];
    if (!s.empty()) prev_on_core[static_cast<std::size_t>(id)] = s.back();
    s.push_back(id);
  }

  std::vector<std::vector<const SubtaskEdge*>> in_edges(n + 1), to_dram(n + 1);
  for (const auto& e : sg.edges) {
    if (e.consumer == kDramNode) to_dram[static_cast<std::size_t>(e.producer)].push_back(&e);
    else in_edges[static_cast<std::size_t>(e.consumer)].push_back(&e);
  }

  // DRAM layout: weights per layer, graph input, graph output, spill slots.
  std::map<std::string, std::uint64_t> weight_base;
  std::uint64_t cursor = 0;
  for (const auto& lt : sg.layers) {
    weight_base[lt.layer_id] = cursor;
    if (!lt.dims.streaming()) cursor += static_cast<std::uint64_t>(lt.dims.k * lt.dims.n);
  }
  const std::uint64_t input_base = cursor;
  const std::uint64_t output_base = input_base + sg.input_bytes;
  std::uint64_t spill_cursor = output_base + sg.output_bytes;
  std::vector<std::uint64_t> spill_addr(n + 1, 0);

  std::vector<TransferSpec> specs;
  std::vector<int> program_spec(static_cast<std::size_t>(n_cores), -1);
  if (hw.include_program_load) {
    for (int c = 0; c < n_cores; ++c) {
      if (seq[static_cast<std::size_t>(c)].empty()) continue;
      TransferSpec sp;
      sp.dst_space = MemSpace::InstrSpm;
      sp.key_core = c;
      sp.priority = kProgram;
      sp.bytes = hw.program_image_bytes;
      sp.duration = transfer_cycles(sp.bytes, hw);
      program_spec[static_cast<std::size_t>(c)] = static_cast<int>(specs.size());
      specs.push_back(std::move(sp));
    }
  }

  std::vector<std::vector<int>> inbound(n + 1), local_producers(n + 1);
  std::vector<int> spill_store(n + 1, -1);
  for (int id = 1; id <= static_cast<int>(n); ++id) {
    const auto uid = static_cast<std::size_t>(id);
    const Subtask& st = sg.subtask(id);
    const int core = core_of(id);
    const int prev = prev_on_core[uid];

    auto add_inbound = [&](TransferSpec sp) {
      sp.key_core = core;
      sp.owner = id;
      sp.serves = {id};
      if (prev != 0) {
        if (plan.no_prefetch.count(id)) sp.after_computes.push_back(prev);
        else sp.gate = prev;
      }
      inbound[uid].push_back(static_cast<int>(specs.size()));
      specs.push_back(std::move(sp));
    };

    for (const SubtaskEdge* e : in_edges[uid]) {
      TransferSpec sp;
      sp.bytes = e->bytes;
      if (e->producer == kDramNode) {
        sp.priority = kLoad;
        sp.duration = transfer_cycles(e->bytes, hw);
        sp.dram_addr = st.weight_bytes > 0
                           ? weight_base[st.layer_id] +
                                 static_cast<std::uint64_t>(st.tile.n0 * sg.dims_of(st).k)
                           : input_base;
        add_inbound(std::move(sp));
      } else if (plan.spilled.count(e->producer)) {
        sp.priority = kLoad;
        sp.duration = transfer_cycles(e->bytes, hw);
        sp.dram_addr = spill_addr[static_cast<std::size_t>(e->producer)];
        sp.after_specs.push_back(spill_store[static_cast<std::size_t>(e->producer)]);
        add_inbound(std::move(sp));
      } else if (core_of(e->producer) == core) {
        local_producers[uid].push_back(e->producer);
      } else {
        sp.kind = TransferKind::CopySpm;
        sp.priority = kCopy;
        sp.duration = transfer_cycles(e->bytes, hw, TransferPath::ScratchpadToScratchpad);
        sp.source_subtask = e->producer;
        sp.src_core = core_of(e->producer);
        sp.after_computes.push_back(e->producer);
        add_inbound(std::move(sp));
      }
    }

    auto add_store = [&](std::uint64_t bytes, std::uint64_t addr, bool spill) {
      TransferSpec sp;
      sp.kind = TransferKind::StoreDram;
      sp.dst_space = MemSpace::Dram;
      sp.key_core = core;
      sp.priority = kStore;
      sp.owner = id;
      sp.bytes = bytes;
      sp.duration = transfer_cycles(bytes, hw);
      sp.dram_addr = addr;
      sp.serves = {id};
      sp.source_subtask = id;
      sp.src_core = core;
      sp.spill = spill;
      sp.after_computes.push_back(id);
      specs.push_back(std::move(sp));
      return static_cast<int>(specs.size()) - 1;
    };
    for (const SubtaskEdge* e : to_dram[uid]) {
      add_store(e->bytes,
                output_base + static_cast<std::uint64_t>(st.tile.m0 * sg.dims_of(st).n + st.tile.n0),
                false);
    }
    if (plan.spilled.count(id)) {
      spill_addr[uid] = spill_cursor;
      spill_cursor += st.out_bytes;
      spill_store[uid] = add_store(st.out_bytes, spill_addr[uid], true);
    }
  }

  // List scheduling. Every dependency points at a smaller subtask id, so
  // whenever the DMA picks its next transfer at cycle t, any transfer whose
  // release time is still unknown cannot be released before t.
  std::vector<std::optional<std::uint64_t>> cstart(n + 1);
  std::vector<std::size_t> next_on_core(static_cast<std::size_t>(n_cores), 0);
  std::vector<std::uint64_t> core_free(static_cast<std::size_t>(n_cores), 0);

  const auto propagate = [&] {
    for (bool progress = true; progress;) {
      progress = false;
      for (int c = 0; c < n_cores; ++c) {
        const auto uc = static_cast<std::size_t>(c);
        if (next_on_core[uc] >= seq[uc].size()) continue;
        const int id = seq[uc][next_on_core[uc]];
        const auto uid = static_cast<std::size_t>(id);
        std::uint64_t t = core_free[uc];
        bool ready = true;
        for (int si : inbound[uid]) {
          const auto& sp = specs[static_cast<std::size_t>(si)];
          if (!sp.placed) ready = false;
          else t = std::max(t, sp.end());
        }
        if (const int ps = program_spec[uc]; ps >= 0) {
          const auto& sp = specs[static_cast<std::size_t>(ps)];
          if (!sp.placed) ready = false;
          else t = std::max(t, sp.end());
        }
        for (int p : local_producers[uid]) {
          const auto& s = cstart[static_cast<std::size_t>(p)];
          if (!s) ready = false;
          else t = std::max(t, *s + wcet(p));
        }
        if (!ready) continue;
        cstart[uid] = t;
        core_free[uc] = t + wcet(id);
        ++next_on_core[uc];
        progress = true;
      }
    }
  };

  const auto release = [&](const TransferSpec& sp) -> std::optional<std::uint64_t> {
    std::uint64_t r = 0;
    for (int p : sp.after_computes) {
      const auto& s = cstart[static_cast<std::size_t>(p)];
      if (!s) return std::nullopt;
      r = std::max(r, *s + wcet(p));
    }
    for (int j : sp.after_specs) {
      const auto& dep = specs[static_cast<std::size_t>(j)];
      if (!dep.placed) return std::nullopt;
      r = std::max(r, dep.end());
    }
    if (sp.gate) {
      const auto& s = cstart[static_cast<std::size_t>(*sp.gate)];
      if (!s) return std::nullopt;
      r = std::max(r, *s);
    }
    return r;
  };

  std::uint64_t dma_free = 0;
  int rr_last = n_cores - 1;
  int next_id = 1;
  std::size_t unplaced = specs.size();
  std::vector<std::optional<std::uint64_t>> ready(specs.size());
  std::vector<int> best(static_cast<std::size_t>(n_cores));
  while (unplaced > 0) {
    propagate();
    std::uint64_t earliest = std::numeric_limits<std::uint64_t>::max();
    for (std::size_t i = 0; i < specs.size(); ++i) {
      ready[i] = specs[i].placed ? std::nullopt : release(specs[i]);
      if (ready[i]) earliest = std::min(earliest, *ready[i]);
    }
    if (earliest == std::numeric_limits<std::uint64_t>::max())
      throw std::logic_error("schedule: no transfer can be released (dependency cycle)");
    const std::uint64_t t = std::max(dma_free, earliest);

    std::fill(best.begin(), best.end(), -1);
    for (std::size_t i = 0; i < specs.size(); ++i) {
      if (!ready[i] || *ready[i] > t) continue;
      const auto& sp = specs[i];
      int& b = best[static_cast<std::size_t>(sp.key_core)];
      if (b < 0) {
        b = static_cast<int>(i);
        continue;
      }
      const auto& cur = specs[static_cast<std::size_t>(b)];
      if (std::tie(sp.priority, sp.owner) < std::tie(cur.priority, cur.owner)) b = static_cast<int>(i);
    }
    int chosen = -1;
    for (int step = 1; step <= n_cores && chosen < 0; ++step) {
      const int c = (rr_last + step) % n_cores;
      if (best[static_cast<std::size_t>(c)] >= 0) {
        chosen = best[static_cast<std::size_t>(c)];
        rr_last = c;
      }
    }
    auto& sp = specs[static_cast<std::size_t>(chosen)];
    sp.placed = true;
    sp.start = t;
    sp.id = next_id++;
    dma_free = sp.end();
    --unplaced;
  }
  propagate();
  for (std::size_t id = 1; id <= n; ++id) {
    if (!cstart[id]) throw std::logic_error("schedule: compute " + std::to_string(id) + " was never placed");
  }

  std::vector<const TransferSpec*> by_id(specs.size());
  for (const auto& sp : specs) by_id[static_cast<std::size_t>(sp.id - 1)] = &sp;
  for (const TransferSpec* sp : by_id) {
    TransferEvent ev;
    ev.id = sp->id;
    ev.kind = sp->kind;
    ev.bytes = sp->bytes;
    ev.start = sp->start;
    ev.duration = sp->duration;
    ev.serves = sp->serves;
    ev.core = sp->key_core;
    ev.source_subtask = sp->source_subtask;
    ev.spill = sp->spill;
    ev.after_computes = sp->after_computes;
    for (int j : sp->after_specs) ev.after_transfers.push_back(specs[static_cast<std::size_t>(j)].id);
    ev.gate_compute = sp->gate;
    switch (sp->kind) {
      case TransferKind::LoadDram:
        ev.src = {MemSpace::Dram, -1, sp->dram_addr, sp->bytes};
        ev.dst = {sp->dst_space, sp->key_core, 0, sp->bytes};
        break;
      case TransferKind::CopySpm:
        ev.src = {MemSpace::Spm, sp->src_core, 0, sp->bytes};
        ev.dst = {MemSpace::Spm, sp->key_core, 0, sp->bytes};
        break;
      case TransferKind::StoreDram:
        ev.src = {MemSpace::Spm, sp->src_core, 0, sp->bytes};
        ev.dst = {MemSpace::Dram, -1, sp->dram_addr, sp->bytes};
        break;
    }
    out.transfers.push_back(std::move(ev));
  }

  for (int id = 1; id <= static_cast<int>(n); ++id) {
    const auto uid = static_cast<std::size_t>(id);
    ComputeEvent ce;
    ce.subtask = id;
    ce.core = core_of(id);
    ce.layer_id = sg.subtask(id).layer_id;
    ce.start = *cstart[uid];
    ce.wcet = wcet(id);
    ce.cost = costs[uid].derived_from;
    ce.after_computes = local_producers[uid];
    for (int si : inbound[uid]) ce.after_transfers.push_back(specs[static_cast<std::size_t>(si)].id);
    if (const int ps = program_spec[static_cast<std::size_t>(ce.core)]; ps >= 0)
      ce.after_transfers.push_back(specs[static_cast<std::size_t>(ps)].id);
    std::sort(ce.after_transfers.begin(), ce.after_transfers.end());
    out.computes.push_back(std::move(ce));
  }
  std::sort(out.computes.begin(), out.computes.end(), [](const ComputeEvent& a, const ComputeEvent& b) {
    return std::tie(a.start, a.subtask) < std::tie(b.start, b.subtask);
  });

  for (const auto& t : out.transfers) out.predicted_makespan = std::max(out.predicted_makespan, t.end());
  for (const auto& c : out.computes) out.predicted_makespan = std::max(out.predicted_makespan, c.end());
  return out;
}

namespace {

struct Interval {
  std::uint64_t start;
  std::uint64_t end;
};

bool overlaps(const SpmRegion& a, const SpmRegion& b) {
  return a.live_start < b.live_end && b.live_start < a.live_end;
}

bool live_at(const SpmRegion& r, std::uint64_t t) { return r.live_start <= t && t < r.live_end; }

}  // namespace

SpmAllocation allocate_spm(const SubtaskGraph& sg, const Mapping& m, const Schedule& skeleton,
                           const SpillPlan& plan) {
  const std::uint64_t capacity = skeleton.hw.spm_data_bytes;
  SpmAllocation result;

  std::map<int, std::vector<Interval>> uses;  // output region readers
  std::map<int, std::uint64_t> first_in;      // earliest inbound transfer start
  for (const auto& t : skeleton.transfers) {
    if (t.source_subtask != 0) uses[t.source_subtask].push_back({t.start, t.end()});
    if (t.dst.space == MemSpace::Spm) {
      const int s = t.serves.at(0);
      auto [it, fresh] = first_in.emplace(s, t.start);
      if (!fresh) it->second = std::min(it->second, t.start);
    }
  }
  for (const auto& c : skeleton.computes) {
    for (int p : c.after_computes) uses[p].push_back({c.start, c.end()});
  }

  std::vector<SpmRegion> regions;
  for (const auto& c : skeleton.computes) {
    const Subtask& st = sg.subtask(c.subtask);
    SpmRegion w;
    w.core = c.core;
    w.length = st.spm_footprint_bytes;
    w.live_start = c.start;
    if (auto it = first_in.find(c.subtask); it != first_in.end()) w.live_start = std::min(w.live_start, it->second);
    w.live_end = c.end();
    w.subtask = c.subtask;
    w.role = RegionRole::Work;
    regions.push_back(w);

    auto u = uses.find(c.subtask);
    if (u == uses.end() || st.out_bytes == 0) continue;
    SpmRegion o = w;
    o.role = RegionRole::Output;
    o.length = st.out_bytes;
    o.live_start = c.end();
    o.live_end = c.end();
    for (const auto& iv : u->second) o.live_end = std::max(o.live_end, iv.end);
    if (o.live_end > o.live_start) regions.push_back(o);
  }
  std::sort(regions.begin(), regions.end(), [](const SpmRegion& a, const SpmRegion& b) {
    return std::tie(a.core, a.live_start, a.role, a.subtask) <
           std::tie(b.core, b.live_start, b.role, b.subtask);
  });

  std::vector<SpmRegion> placed;
  for (auto r : regions) {
    std::vector<const SpmRegion*> busy;
    for (const auto& p : placed)
      if (p.core == r.core && overlaps(p, r)) busy.push_back(&p);
    std::sort(busy.begin(), busy.end(),
              [](const SpmRegion* a, const SpmRegion* b) { return a->offset < b->offset; });
    std::uint64_t offset = 0;
    for (const SpmRegion* p : busy) {
      if (p->offset >= offset + r.length) break;
      offset = std::max(offset, p->offset + p->length);
    }
    if (offset + r.length <= capacity) {
      r.offset = offset;
      placed.push_back(r);
      continue;
    }

    // Pressure peak inside r's lifetime decides the reported cycle.
    result.core = r.core;
    result.cycle = r.live_start;
    std::uint64_t peak = 0;
    for (const SpmRegion* probe : busy) {
      const std::uint64_t t = std::max(probe->live_start, r.live_start);
      std::uint64_t live = 0;
      for (const SpmRegion* q : busy)
        if (live_at(*q, t)) live += q->length;
      if (live > peak) {
        peak = live;
        result.cycle = t;
      }
    }
    result.deficit = std::max<std::uint64_t>(1, peak + r.length > capacity ? peak + r.length - capacity : 1);

    const auto next_use_after = [&](int subtask, std::uint64_t t) -> std::optional<std::uint64_t> {
      std::optional<std::uint64_t> next;
      for (const auto& iv : uses[subtask]) {
        if (iv.start <= t && t < iv.end) return std::nullopt;  // in use
        if (iv.start > t && (!next || iv.start < *next)) next = iv.start;
      }
      return next;
    };

    SpillPlan remedy = plan;
    // 1. Idle output region resident at r's start with the furthest next use.
    const SpmRegion* victim = nullptr;
    std::uint64_t victim_next = 0;
    for (const SpmRegion* p : busy) {
      if (p->role != RegionRole::Output || plan.spilled.count(p->subtask) || !live_at(*p, r.live_start))
        continue;
      auto nu = next_use_after(p->subtask, r.live_start);
      if (!nu) continue;
      if (!victim || *nu > victim_next || (*nu == victim_next && p->subtask < victim->subtask)) {
        victim = p;
        victim_next = *nu;
      }
    }
    if (victim) {
      remedy.spilled.insert(victim->subtask);
      result.remedy = remedy;
      return result;
    }
    // 2. Stop prefetching into the failing work region.
    const bool has_prev = [&] {
      for (int id = 1; id < r.subtask; ++id)
        if (m.core(id) == r.core) return true;
      return false;
    }();
    if (r.role == RegionRole::Work && has_prev && !plan.no_prefetch.count(r.subtask)) {
      remedy.no_prefetch.insert(r.subtask);
      result.remedy = remedy;
      return result;
    }
    // 3. Any overlapping output region not yet spilled, longest-lived first.
    for (const SpmRegion* p : busy) {
      if (p->role != RegionRole::Output || plan.spilled.count(p->subtask)) continue;
      if (!victim || p->live_end > victim->live_end ||
          (p->live_end == victim->live_end && p->subtask < victim->subtask))
        victim = p;
    }
    if (victim) {
      remedy.spilled.insert(victim->subtask);
      result.remedy = remedy;
      return result;
    }
    if (r.role == RegionRole::Output && !plan.spilled.count(r.subtask)) {
      remedy.spilled.insert(r.subtask);
      result.remedy = remedy;
    }
    return result;
  }

  std::sort(placed.begin(), placed.end(), [](const SpmRegion& a, const SpmRegion& b) {
    return std::tie(a.core, a.live_start, a.offset, a.subtask) <
           std::tie(b.core, b.live_start, b.offset, b.subtask);
  });
  result.ok = true;
  result.regions = std::move(placed);
  return result;
}

Schedule build_schedule(const SubtaskGraph& sg, const Mapping& m,
                        const std::vector<CostEstimate>& costs, const HardwareConfig& hw) {
  SpillPlan plan;
  for (;;) {
    Schedule s = schedule_skeleton(sg, m, costs, hw, plan);
    SpmAllocation alloc = allocate_spm(sg, m, s, plan);
    if (!alloc.ok) {
      if (!alloc.remedy) {
        throw SpmOverflowError("scratchpad overflow on core " + std::to_string(alloc.core) +
                                   " at cycle " + std::to_string(alloc.cycle) + ": short by " +
                                   std::to_string(alloc.deficit) + " B",
                               alloc.core, alloc.cycle, alloc.deficit);
      }
      plan = std::move(*alloc.remedy);
      continue;
    }

    std::map<std::tuple<int, RegionRole>, std::uint64_t> offset_of;
    for (const auto& r : alloc.regions) offset_of[{r.subtask, r.role}] = r.offset;
    for (auto& t : s.transfers) {
      if (t.dst.space == MemSpace::Spm) t.dst.addr = offset_of.at({t.serves.at(0), RegionRole::Work});
      if (t.source_subtask != 0) t.src.addr = offset_of.at({t.source_subtask, RegionRole::Output});
    }
    s.spm_regions = std::move(alloc.regions);
    return s;
  }
}

}  // namespace rtdeploy
