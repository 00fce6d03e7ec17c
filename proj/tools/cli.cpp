// Copyright 2026 The rtdeploy Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "rtdeploy/error.hpp"
#include "rtdeploy/schedule_check.hpp"
#include "rtdeploy/schedule_io.hpp"
#include "rtdeploy/simulator.hpp"

namespace rtdeploy {

namespace fs = std::filesystem;

CompileResult compile_pipeline(const ModelGraph& model, const HardwareConfig& hw,
                               const WcetOverrides& overrides) {
  hw.validate();
  CompileResult r;
  r.graph = fuse_operators(model);
  r.subtasks = build_subtask_graph(r.graph, hw);
  for (const auto& [id, cycles] : overrides) {
    if (id < 1 || static_cast<std::size_t>(id) > r.subtasks.subtasks.size())
      throw ValidationError("timing_model", "WCET override for unknown subtask S" + std::to_string(id));
  }
  r.mapping = map_subtasks(r.subtasks, hw.n_cores);
  r.costs = estimate_costs(r.subtasks, hw, overrides);
  r.schedule = build_schedule(r.subtasks, r.mapping, r.costs, hw);
  return r;
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cli", "cannot write " + path.string());
  f << text;
}

struct CompileOptions {
  std::string model;
  std::string hw;
  std::string overrides;
  std::string out = "out";
  bool program_load = false;
  std::optional<std::uint64_t> budget;
};

int cmd_compile(const CompileOptions& o, std::ostream& out) {
  HardwareConfig hw = o.hw.empty() ? HardwareConfig{} : load_hardware_config(o.hw);
  if (o.program_load) hw.include_program_load = true;
  if (o.budget) hw.tile_budget_bytes = *o.budget;
  hw.validate();
  const WcetOverrides overrides = o.overrides.empty() ? WcetOverrides{} : load_wcet_overrides(o.overrides);
  const ModelGraph model = load_model(o.model);
  const CompileResult r = compile_pipeline(model, hw, overrides);

  std::error_code ec;
  fs::create_directories(o.out, ec);
  if (ec) throw Error("cli", "cannot create " + o.out + ": " + ec.message());
  emit_schedule(r.schedule, fs::path(o.out) / "schedule.json");

  const auto xbytes = cross_core_bytes(r.subtasks, r.mapping);
  nlohmann::json report = r.mapping;
  report["load_per_core"] = r.mapping.load_per_core();
  report["cross_core_bytes"] = xbytes;
  nlohmann::json subtasks = nlohmann::json::array();
  for (const auto& st : r.subtasks.subtasks) {
    subtasks.push_back({{"id", st.id},
                        {"layer", st.layer_id},
                        {"core", r.mapping.core(st.id)},
                        {"tile", {st.tile.m0, st.tile.mt, st.tile.n0, st.tile.nt}},
                        {"wcet", r.costs[static_cast<std::size_t>(st.id)].wcet_cycles}});
  }
  report["subtasks"] = std::move(subtasks);
  write_text(fs::path(o.out) / "mapping.json", report.dump(2) + "\n");

  out << "layers:           " << r.graph.layers.size() << "\n"
      << "subtasks:         " << r.subtasks.subtasks.size() << "\n"
      << "transfers:        " << r.schedule.transfers.size() << "\n"
      << "spills:           " << r.schedule.spill_count() << "\n"
      << "cross-core bytes: " << xbytes << "\n"
      << "makespan:         " << r.schedule.predicted_makespan << " cycles\n"
      << "wrote " << (fs::path(o.out) / "schedule.json").string() << "\n";
  return 0;
}

int cmd_simulate(const std::string& schedule_path, const std::string& profile_text, std::string out_dir,
                 std::ostream& out) {
  const ExecutionProfile profile = parse_profile(profile_text);
  const Schedule s = load_schedule(schedule_path);
  const SimTrace trace = simulate(s, profile);
  const VerifyReport v = verify_against_prediction(trace, s);

  if (out_dir.empty()) out_dir = fs::path(schedule_path).parent_path().string();
  if (out_dir.empty()) out_dir = ".";
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  write_text(fs::path(out_dir) / "trace.json", nlohmann::json(trace).dump(2) + "\n");
  write_text(fs::path(out_dir) / "gantt.csv", gantt_csv(trace));

  out << "profile:  " << profile.describe() << "\n"
      << "observed: " << v.observed << " cycles\n"
      << "predicted: " << v.predicted << " cycles\n";
  if (v.equality_required && v.observed == v.predicted) out << "observed == predicted\n";
  for (const auto& viol : trace.violations)
    out << "violation " << viol.kind << " " << viol.event << " @" << viol.cycle << ": " << viol.detail << "\n";
  if (!v.pass && trace.violations.empty())
    for (const auto& reason : v.reasons) out << reason << "\n";
  out << (v.pass ? "PASS" : "FAIL") << "\n";
  return v.pass ? 0 : 4;
}

int cmd_check(const std::string& schedule_path, std::ostream& out) {
  const Schedule s = load_schedule(schedule_path);
  const CheckReport report = check_schedule(s);
  for (const auto& c : report.checks) {
    out << std::left << std::setw(18) << c.name << (c.pass ? "PASS" : "FAIL") << "\n";
    for (const auto& f : c.findings) out << "  " << f << "\n";
  }
  out << (report.ok() ? "PASS" : "FAIL") << "\n";
  return report.ok() ? 0 : 4;
}

int cmd_report(const std::string& schedule_path, std::ostream& out) {
  const Schedule s = load_schedule(schedule_path);
  validate_structure(s);
  std::map<int, std::uint64_t> busy, count;
  for (const auto& c : s.computes) {
    busy[c.core] += c.wcet;
    ++count[c.core];
  }
  std::uint64_t dma = 0, bytes = 0;
  std::map<std::string, std::size_t> kinds;
  for (const auto& t : s.transfers) {
    dma += t.duration;
    bytes += t.bytes;
    ++kinds[to_string(t.kind)];
  }
  const double span = s.predicted_makespan == 0 ? 1.0 : static_cast<double>(s.predicted_makespan);
  out << "makespan:  " << s.predicted_makespan << " cycles\n"
      << "computes:  " << s.computes.size() << "\n"
      << "transfers: " << s.transfers.size();
  for (const auto& [k, n] : kinds) out << " " << k << "=" << n;
  out << "\n"
      << "spills:    " << s.spill_count() << "\n"
      << "dma bytes: " << bytes << "\n"
      << std::fixed << std::setprecision(1) << "dma busy:  " << 100.0 * static_cast<double>(dma) / span << "%\n";
  for (const auto& [core, cycles] : busy) {
    out << "core " << std::setw(2) << core << ": " << count[core] << " subtasks, busy "
        << 100.0 * static_cast<double>(cycles) / span << "%\n";
  }
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Compile, check and simulate static multicore schedules for int8 CNNs"};
  app.require_subcommand(1);

  CompileOptions co;
  auto* compile = app.add_subcommand("compile", "Build a time-triggered schedule for a model");
  compile->add_option("--model", co.model, "Model JSON")->required();
  compile->add_option("--hw", co.hw, "Hardware config JSON");
  compile->add_option("--wcet-overrides", co.overrides, "Per-subtask WCET overrides JSON");
  compile->add_option("--out", co.out, "Output directory")->capture_default_str();
  compile->add_flag("--include-program-load", co.program_load, "Load a program image per core first");
  compile->add_option("--tile-budget-bytes", co.budget, "Scratchpad bytes per tile");

  std::string schedule_path, profile = "worst-case", sim_out;
  auto add_schedule = [&](CLI::App* sub) {
    auto* flag = sub->add_option("--schedule", schedule_path, "Schedule artifact");
    auto* pos = sub->add_option("schedule_file", schedule_path, "Schedule artifact (positional form)");
    flag->excludes(pos);
    sub->callback([sub, flag, pos] {
      if (flag->count() + pos->count() == 0) throw CLI::RequiredError(sub->get_name() + ": schedule path");
    });
  };
  auto* sim = app.add_subcommand("simulate", "Execute a schedule under an execution-time profile");
  add_schedule(sim);
  sim->add_option("--profile", profile, "worst-case | scaled:F | random:SEED:MIN | fault:ID=F,...")
      ->capture_default_str();
  sim->add_option("--out", sim_out, "Directory for trace.json and gantt.csv");
  auto* check = app.add_subcommand("check", "Re-verify every schedule invariant offline");
  add_schedule(check);
  auto* report = app.add_subcommand("report", "Summarise a schedule");
  add_schedule(report);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error [cli]: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*compile) return cmd_compile(co, out);
    if (*sim) return cmd_simulate(schedule_path, profile, sim_out, out);
    if (*check) return cmd_check(schedule_path, out);
    if (*report) return cmd_report(schedule_path, out);
  } catch (const InfeasibleBudgetError& e) {
    err << "error [" << e.module() << "]: " << e.what() << " (required minimum " << e.required_bytes()
        << " B)\n";
    return 3;
  } catch (const SpmOverflowError& e) {
    err << "error [" << e.module() << "]: " << e.what() << "\n";
    return 3;
  } catch (const ParseError& e) {
    err << "error [" << e.module() << "]: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    err << "error [" << e.module() << "]: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error [" << e.module() << "]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

int run_cli(int argc, const char* const* argv) { return run_cli(argc, argv, std::cout, std::cerr); }

}  // namespace rtdeploy
