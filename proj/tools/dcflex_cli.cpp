// dcflex: workload generation, scenario runs, sweeps and re-aggregation.
//
// Settings are layered: built-in defaults, then --config, then each --set in
// order, then the dedicated flags (--seed, --out, --scheduler, --dump-lp).

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dcflex/config.hpp"
#include "dcflex/errors.hpp"
#include "dcflex/experiment.hpp"
#include "dcflex/workload.hpp"

namespace {

using namespace dcflex;

struct Common {
  std::string config;
  std::vector<std::string> sets;
  std::vector<std::uint64_t> seeds;
  std::string out;
  std::string scheduler;
  std::string dump_lp;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "key = value configuration file");
  cmd->add_option("--set", c.sets, "override one setting, key=value (repeatable)");
  cmd->add_option("--seed", c.seeds, "workload seed (repeatable; replaces the seed list)");
  cmd->add_option("--out", c.out, "output directory (jobs.csv path for generate)");
}

ParsedConfig resolve(const Common& c) {
  ParsedConfig cfg;
  if (!c.config.empty()) cfg = load_config(c.config);
  for (const auto& s : c.sets) apply_override(cfg, s);
  auto& sc = cfg.scenario;
  if (!c.seeds.empty()) sc.seeds = c.seeds;
  if (!c.out.empty()) sc.out_dir = c.out;
  if (!c.scheduler.empty()) apply_setting(sc, "scheduler", c.scheduler);
  if (!c.dump_lp.empty()) sc.dump_lp = c.dump_lp;
  return cfg;
}

void print_rows(const std::vector<ComparisonRow>& rows) {
  std::printf("%-6s %-5s %-5s %-5s %10s %8s %9s %10s %8s\n", "seed", "sched", "price", "iv",
              "power_kw", "util", "occupancy", "revenue", "flex_kw");
  for (const auto& r : rows)
    std::printf("%-6llu %-5s %-5s %-5s %10.2f %8.4f %9.4f %10.2f %8.2f\n",
                static_cast<unsigned long long>(r.seed), to_string(r.scheduler), to_string(r.price),
                r.interval.c_str(), r.metrics.avg_power_kw, r.metrics.gpu_util,
                r.metrics.node_occupancy, r.metrics.revenue, r.flexibility_kw);
}

int cmd_generate(const Common& c) {
  const auto cfg = resolve(c).scenario;
  cfg.validate();
  WorkloadSpec spec = cfg.workload;
  spec.seed = cfg.seeds.front();
  const auto jobs = generate_workload(spec);
  if (c.out.empty()) {
    write_jobs_csv(std::cout, jobs);
    return 0;
  }
  std::ofstream out(c.out);
  if (!out) throw IoError("cannot open " + c.out + " for writing");
  write_jobs_csv(out, jobs);
  out.flush();
  if (!out) throw IoError("write failed: " + c.out);
  std::fprintf(stderr, "%zu jobs -> %s\n", jobs.size(), c.out.c_str());
  return 0;
}

int cmd_run(const Common& c) {
  const auto cfg = resolve(c).scenario;
  const auto rows = run_scenario(cfg);
  print_rows(rows);
  std::fprintf(stderr, "results in %s\n", cfg.out_dir.c_str());
  return 0;
}

int cmd_sweep(const Common& c, const std::string& axis, const std::string& values) {
  auto cfg = resolve(c);
  SweepSpec sweep;
  sweep.axis = !axis.empty() ? axis : cfg.sweep_axis.value_or("");
  if (sweep.axis.empty()) throw ConfigError("sweep needs an axis (sweep_axis or --axis)");
  sweep.values = !values.empty() ? split_sweep_values(sweep.axis, values) : cfg.sweep_values;
  sweep.base = cfg.scenario;
  const auto rows = run_sweep(sweep);
  std::printf("%-16s %-5s %10s %8s %9s %10s %9s\n", "value", "sched", "power_kw", "util", "occupancy",
              "revenue", "reduction");
  for (const auto& r : rows) {
    std::printf("%-16s %-5s %10.2f %8.4f %9.4f %10.2f", r.axis_value.c_str(), to_string(r.scheduler),
                r.peak_avg_power_kw, r.gpu_util, r.occupancy, r.revenue);
    if (r.has_reduction) std::printf(" %8.2f%%\n", r.pct_power_reduction_vs_fifo);
    else std::printf(" %9s\n", "-");
  }
  std::fprintf(stderr, "results in %s\n", sweep.base.out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GPU data-center scheduling simulator: FIFO backfilling vs rolling-horizon MILP"};
  app.require_subcommand(1);

  Common gen, run, sweep;
  auto* g = app.add_subcommand("generate", "write the synthetic workload as CSV");
  add_common(g, gen);

  auto* r = app.add_subcommand("run", "run one scenario for every configured seed");
  add_common(r, run);
  r->add_option("--scheduler", run.scheduler, "fifo, milp or both")
      ->check(CLI::IsMember({"fifo", "milp", "both"}));
  r->add_option("--dump-lp", run.dump_lp, "write each window model to <path>.seed<s>.<price>.w<k>.lp");

  std::string axis, values;
  auto* s = app.add_subcommand("sweep", "run one scenario per axis value and aggregate sweep.csv");
  add_common(s, sweep);
  s->add_option("--scheduler", sweep.scheduler, "fifo, milp or both")
      ->check(CLI::IsMember({"fifo", "milp", "both"}));
  s->add_option("--axis", axis, "peak_multiplier, num_jobs, util_mode or gpu_mode");
  s->add_option("--values", values, "axis values, ';'-separated for modes, ',' for numbers");

  std::string report_dir;
  auto* rep = app.add_subcommand("report", "rebuild comparison.csv / sweep.csv from stored runs");
  rep->add_option("dir", report_dir, "scenario or sweep output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*g) return cmd_generate(gen);
    if (*r) return cmd_run(run);
    if (*s) return cmd_sweep(sweep, axis, values);
    if (*rep) {
      report(report_dir, std::cerr);
      return 0;
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const InfeasibleError& e) {
    std::fprintf(stderr, "infeasible: %s\n", e.what());
    return 3;
  } catch (const IoError& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
