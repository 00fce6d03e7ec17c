// Copyright 2026 The rtdeploy Authors
// SPDX-License-Identifier: Apache-2.0

// Runs every acceptance criterion and prints one PASS/FAIL line for each.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "generators.hpp"
#include "oracles.hpp"
#include "rtdeploy/error.hpp"
#include "rtdeploy/schedule_check.hpp"
#include "rtdeploy/schedule_io.hpp"
#include "rtdeploy/simulator.hpp"

using namespace rtdeploy;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int digits = 2) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

// Shared randomized corpus for criteria 1 and 2.
struct Corpus {
  std::vector<testing::Pipeline> pipelines;
  std::size_t rejected = 0;
  std::size_t max_subtasks = 0;
  double build_seconds = 0;
};

Corpus build_corpus(std::size_t count) {
  Corpus c;
  testing::Rng rng(20260101);
  testing::RandomModelOptions mopt;
  mopt.max_layers = 8;
  mopt.max_spatial = 16;
  mopt.max_channels = 24;
  const auto t0 = Clock::now();
  while (c.pipelines.size() < count) {
    auto p = testing::random_pipeline(rng, 200, mopt);
    if (!p) {
      ++c.rejected;
      continue;
    }
    c.max_subtasks = std::max(c.max_subtasks, p->compiled.subtasks.subtasks.size());
    c.pipelines.push_back(std::move(*p));
  }
  c.build_seconds = seconds_since(t0);
  return c;
}

Outcome interference_freedom(const Corpus& corpus) {
  const auto t0 = Clock::now();
  std::size_t bad = 0, transfers = 0;
  for (const auto& p : corpus.pipelines) {
    auto iv = p.compiled.schedule.transfers;
    transfers += iv.size();
    std::sort(iv.begin(), iv.end(), [](const TransferEvent& a, const TransferEvent& b) { return a.start < b.start; });
    for (std::size_t i = 1; i < iv.size(); ++i)
      if (iv[i].start < iv[i - 1].end()) {
        ++bad;
        break;
      }
  }
  const double total = corpus.build_seconds + seconds_since(t0);
  Outcome o;
  o.pass = bad == 0 && corpus.pipelines.size() >= 1000 && total < 60.0;
  o.detail = std::to_string(corpus.pipelines.size()) + " schedules (" + std::to_string(transfers) +
             " transfers, up to " + std::to_string(corpus.max_subtasks) + " subtasks, " +
             std::to_string(corpus.rejected) + " infeasible draws skipped), " + std::to_string(bad) +
             " with overlapping transfers, " + fmt(total) + " s";
  return o;
}

Outcome compositionality(const Corpus& corpus) {
  std::size_t wc_mismatch = 0, rnd_bad = 0, runs = 0;
  for (std::size_t i = 0; i < corpus.pipelines.size(); ++i) {
    const auto& s = corpus.pipelines[i].compiled.schedule;
    const auto wc = simulate(s, parse_profile("worst-case"));
    if (!wc.pass() || wc.observed_makespan != s.predicted_makespan) ++wc_mismatch;
    for (const char* min : {"0.05", "0.5", "1"}) {
      const auto t = simulate(s, parse_profile("random:" + std::to_string(i) + ":" + min));
      ++runs;
      if (!t.pass() || t.observed_makespan > s.predicted_makespan) ++rnd_bad;
    }
  }
  Outcome o;
  o.pass = wc_mismatch == 0 && rnd_bad == 0;
  o.detail = "worst-case mismatches " + std::to_string(wc_mismatch) + "/" + std::to_string(corpus.pipelines.size()) +
             ", random-profile runs with violations or observed > predicted " + std::to_string(rnd_bad) + "/" +
             std::to_string(runs);
  return o;
}

Outcome fault_detection(const Corpus& corpus) {
  testing::Rng rng(7);
  std::size_t cases = 0, exact = 0;
  std::uniform_int_distribution<std::size_t> pick(0, corpus.pipelines.size() - 1);
  while (cases < 100) {
    const auto& s = corpus.pipelines[pick(rng)].compiled.schedule;
    if (s.computes.empty()) continue;
    const auto& victim = s.computes[std::uniform_int_distribution<std::size_t>(0, s.computes.size() - 1)(rng)];
    ExecutionProfile p;
    p.mode = ExecutionProfile::Mode::Fault;
    p.faults[victim.subtask] = 1.0 + 1.0 / static_cast<double>(victim.wcet);
    ++cases;
    if (p.actual_cycles(victim.subtask, victim.wcet) != victim.wcet + 1) continue;
    const auto t = simulate(s, p);
    const auto overruns = t.count("wcet_overrun");
    const auto hit = std::find_if(t.violations.begin(), t.violations.end(),
                                  [](const Violation& v) { return v.kind == "wcet_overrun"; });
    if (overruns == 1 && hit->event == "S" + std::to_string(victim.subtask) &&
        hit->cycle == victim.start + victim.wcet && !verify_against_prediction(t, s).pass)
      ++exact;
  }
  Outcome o;
  o.pass = exact == cases;
  o.detail = std::to_string(exact) + "/" + std::to_string(cases) +
             " single-cycle overruns reported as exactly one wcet_overrun on the faulted subtask";
  return o;
}

Outcome tiling_exactness(const Corpus& corpus) {
  std::size_t layers = 0, cover_bad = 0, oracle_models = 0, oracle_bad = 0;
  auto cover = [&](const SubtaskGraph& sg) {
    for (const auto& lt : sg.layers) {
      std::vector<TileExtent> tiles;
      for (int id : lt.subtasks) tiles.push_back(sg.subtask(id).tile);
      ++layers;
      if (!testing::tiles_partition(lt.dims, tiles)) ++cover_bad;
    }
  };
  for (const auto& p : corpus.pipelines) cover(p.compiled.subtasks);
  for (const char* name : {"tiny_cnn", "two_layer", "residual"}) {
    const auto g = fuse_operators(load_model(fs::path(RTDEPLOY_MODELS_DIR) / (std::string(name) + ".json")));
    for (std::uint64_t budget : {std::uint64_t{0}, std::uint64_t{16384}}) {
      HardwareConfig hw;
      if (budget) hw.tile_budget_bytes = budget;
      const auto sg = build_subtask_graph(g, hw);
      cover(sg);
      ++oracle_models;
      if (testing::edge_map(sg) != testing::brute_force_edges(g, sg)) ++oracle_bad;
    }
  }

  testing::Rng rng(4);
  testing::RandomModelOptions mopt;
  mopt.max_layers = 5;
  while (oracle_models < 500) {
    const auto g = fuse_operators(testing::random_model(rng, mopt));
    const auto hw = testing::random_hw(rng, {4, 256, 16384, 0.0});
    SubtaskGraph sg;
    try {
      sg = build_subtask_graph(g, hw);
    } catch (const InfeasibleBudgetError&) {
      continue;
    }
    cover(sg);
    ++oracle_models;
    if (testing::edge_map(sg) != testing::brute_force_edges(g, sg)) ++oracle_bad;
  }
  Outcome o;
  o.pass = cover_bad == 0 && oracle_bad == 0;
  o.detail = std::to_string(layers - cover_bad) + "/" + std::to_string(layers) + " layers exactly covered; " +
             std::to_string(oracle_models - oracle_bad) + "/" + std::to_string(oracle_models) +
             " models (<= 5 layers) with edge bytes equal to the element-level oracle";
  return o;
}

Outcome structural_sanity() {
  const auto ex = testing::chain_example();
  const auto chain = build_schedule(ex.sg, ex.mapping, ex.costs, ex.hw);
  const bool chain_ok = chain.predicted_makespan == 3129 && chain.transfers.size() == 3 &&
                        chain.transfers[0].start == 0 && chain.transfers[0].end() == 63 &&
                        chain.transfers[1].start == 63 && chain.transfers[1].end() == 213 &&
                        chain.compute(1)->start == 63 && chain.compute(1)->end() == 1063 &&
                        chain.compute(2)->start == 1063 && chain.compute(2)->end() == 3063 &&
                        chain.transfers[2].start == 3063 && chain.transfers[2].end() == 3129;

  testing::Rng rng(5);
  testing::RandomModelOptions mopt;
  mopt.max_layers = 3;
  std::size_t dags = 0, below = 0;
  std::size_t attempts = 0;
  while (dags < 300 && attempts < 200000) {
    ++attempts;
    auto p = testing::random_pipeline(rng, 10, mopt, {4, 4096, 262144, 0.0});
    if (!p) continue;
    const auto& c = p->compiled;
    const auto dag = testing::dependency_dag(c.subtasks, c.mapping, c.costs, p->hw);
    if (dag.weight.size() > 10 || dag.weight.empty()) continue;
    ++dags;
    if (c.schedule.predicted_makespan < testing::brute_longest_path(dag)) ++below;
  }
  Outcome o;
  o.pass = chain_ok && below == 0 && dags >= 300;
  o.detail = "chain example makespan " + std::to_string(chain.predicted_makespan) + (chain_ok ? " (timeline exact)" : " (timeline differs)") +
             "; " + std::to_string(dags - below) + "/" + std::to_string(dags) +
             " DAGs (<= 10 nodes) with makespan >= brute-force longest path";
  return o;
}

Outcome mapping_oracle() {
  testing::Rng rng(6);
  testing::RandomModelOptions mopt;
  mopt.max_layers = 4;
  std::size_t instances = 0, outside = 0, nondet = 0, cap_bad = 0, optimal = 0;
  double ratio_sum = 0, ratio_max = 1;
  std::size_t attempts = 0;
  while (instances < 600 && attempts < 100000) {
    ++attempts;
    const auto g = fuse_operators(testing::random_model(rng, mopt));
    auto hw = testing::random_hw(rng, {3, 512, 8192, 0.0});
    SubtaskGraph sg;
    try {
      sg = build_subtask_graph(g, hw);
    } catch (const InfeasibleBudgetError&) {
      continue;
    }
    if (sg.subtasks.empty() || sg.subtasks.size() > 8) continue;
    ++instances;
    const auto m = map_subtasks(sg, hw.n_cores);
    if (!(map_subtasks(sg, hw.n_cores) == m)) ++nondet;
    const auto load = m.load_per_core();
    if (*std::max_element(load.begin(), load.end()) > m.load_cap) ++cap_bad;
    const auto v = cross_core_bytes(sg, m);
    const auto range = testing::enumerate_mappings(sg, hw.n_cores, m.load_cap);
    if (v < range.min || v > range.max) ++outside;
    if (v == range.min) ++optimal;
    const double ratio = range.min == 0 ? 1.0 : static_cast<double>(v) / static_cast<double>(range.min);
    ratio_sum += ratio;
    ratio_max = std::max(ratio_max, ratio);
  }
  Outcome o;
  o.pass = instances > 0 && outside == 0 && nondet == 0 && cap_bad == 0;
  o.detail = std::to_string(instances) + " instances (<= 8 subtasks, <= 3 cores): " + std::to_string(outside) +
             " outside the enumerated range, " + std::to_string(nondet) + " nondeterministic; greedy/optimum ratio mean " +
             fmt(ratio_sum / static_cast<double>(std::max<std::size_t>(instances, 1)), 4) + ", max " + fmt(ratio_max, 4) +
             ", optimal on " + std::to_string(optimal);
  return o;
}

Outcome functional_oracle() {
  using nlohmann::ordered_json;
  bool examples = true;
  {
    const auto g = parse_model(ordered_json::parse(R"({"input": {"dims": [4, 4, 1]}, "weight_sizes": {"w": 1},
      "layers": [{"id": "c", "op": "Conv2D", "inputs": ["input"], "weights": "w",
                  "attrs": {"in_channels": 1, "out_channels": 1, "kernel": 1}}]})"));
    examples &= execute_reference(g, Int8Tensor{g.input_shape, std::vector<std::int8_t>(16, 5)}, WeightStore{{"w", {1}}}).data ==
                std::vector<std::int8_t>(16, 5);
  }
  {
    const auto g = parse_model(ordered_json::parse(R"({"input": {"dims": [2]}, "weight_sizes": {"w": 4},
      "layers": [{"id": "d", "op": "Dense", "inputs": ["input"], "weights": "w",
                  "attrs": {"in_features": 2, "out_features": 2}}]})"));
    examples &= execute_reference(g, Int8Tensor{g.input_shape, {1, 1}}, WeightStore{{"w", {1, 2, 3, 4}}}).data ==
                std::vector<std::int8_t>{3, 7};
  }
  {
    const auto g = parse_model(ordered_json::parse(R"({"input": {"dims": [1]}, "weight_sizes": {"w": 1},
      "layers": [{"id": "d", "op": "Dense", "inputs": ["input"], "weights": "w",
                  "attrs": {"in_features": 1, "out_features": 1}}]})"));
    examples &= execute_reference(g, Int8Tensor{g.input_shape, {127}}, WeightStore{{"w", {127}}}).data ==
                std::vector<std::int8_t>{127};
  }

  testing::Rng rng(8);
  std::size_t graphs = 0, equal = 0, fused_any = 0;
  for (; graphs < 1000; ++graphs) {
    const auto g = testing::random_model(rng);
    const auto w = testing::random_weights(g, rng);
    const auto x = testing::random_input(g.input_shape, rng);
    const auto f = fuse_operators(g);
    if (f.layers.size() < g.layers.size()) ++fused_any;
    if (execute_reference(f, x, w) == execute_reference(g, x, w)) ++equal;
  }
  Outcome o;
  o.pass = examples && equal == graphs;
  o.detail = std::string("hand examples ") + (examples ? "match" : "differ") + "; fusion preserved outputs on " +
             std::to_string(equal) + "/" + std::to_string(graphs) + " random graphs (<= 6 layers, " +
             std::to_string(fused_any) + " actually fused)";
  return o;
}

int cli(std::vector<std::string> args, std::string& captured) {
  args.insert(args.begin(), "rtdeploy");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  captured = out.str() + err.str();
  return code;
}

Outcome end_to_end() {
  const auto out = fs::temp_directory_path() / "rtdeploy_acceptance_e2e";
  fs::remove_all(out);
  const auto model = fs::path(RTDEPLOY_MODELS_DIR) / "tiny_cnn.json";
  const auto t0 = Clock::now();
  std::string log;
  const int c1 = cli({"compile", "--model", model.string(), "--out", out.string()}, log);
  const int c2 = c1 == 0 ? cli({"check", (out / "schedule.json").string()}, log) : -1;
  const int c3 = c2 == 0 ? cli({"simulate", (out / "schedule.json").string(), "--profile", "worst-case"}, log) : -1;
  const double secs = seconds_since(t0);

  bool shape_ok = false, config_ok = false;
  std::uint64_t makespan = 0;
  if (c1 == 0) {
    const auto g = load_model(model);
    shape_ok = g.input_shape.dims == std::vector<std::int64_t>{16, 16, 8} && g.layers.size() == 7;
    const auto s = load_schedule(out / "schedule.json");
    config_ok = s.hw == HardwareConfig{} && s.hw.n_cores == 16 && s.hw.lanes() == 64 &&
                s.hw.spm_data_bytes + s.hw.spm_instr_bytes == 1 << 20;
    makespan = s.predicted_makespan;
  }
  Outcome o;
  o.pass = c1 == 0 && c2 == 0 && c3 == 0 && shape_ok && config_ok && secs < 10.0;
  o.detail = "compile/check/simulate exit codes " + std::to_string(c1) + "/" + std::to_string(c2) + "/" +
             std::to_string(c3) + ", makespan " + std::to_string(makespan) + " cycles, " + fmt(secs, 3) + " s";
  return o;
}

}  // namespace

int main() {
  std::vector<std::pair<std::string, Outcome>> results;
  auto run = [&](const std::string& name, const std::function<Outcome()>& f) {
    Outcome o;
    try {
      o = f();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << name << ": " << o.detail << std::endl;
    results.emplace_back(name, o);
  };

  const Corpus corpus = build_corpus(1000);
  run("1 interference freedom", [&] { return interference_freedom(corpus); });
  run("2 WCET compositionality", [&] { return compositionality(corpus); });
  run("3 fault detection", [&] { return fault_detection(corpus); });
  run("4 tiling exactness", [&] { return tiling_exactness(corpus); });
  run("5 schedule structure", [&] { return structural_sanity(); });
  run("6 mapping oracle", [&] { return mapping_oracle(); });
  run("7 functional oracle", [&] { return functional_oracle(); });
  run("8 end-to-end tiny CNN", [&] { return end_to_end(); });

  const auto failed = std::count_if(results.begin(), results.end(), [](const auto& r) { return !r.second.pass; });
  std::cout << (failed == 0 ? "ALL PASS" : std::to_string(failed) + " FAILED") << std::endl;
  return failed == 0 ? 0 : 1;
}
