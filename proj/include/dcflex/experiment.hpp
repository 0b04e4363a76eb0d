#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "dcflex/config.hpp"
#include "dcflex/rolling.hpp"
#include "dcflex/sim.hpp"
#include "dcflex/workload.hpp"

namespace dcflex {

enum class PriceCase { kFlat, kPeak };

const char* to_string(PriceCase p);

struct RunResult {
  SchedulerKind scheduler = SchedulerKind::kFifo;
  PriceCase price = PriceCase::kFlat;
  PriceSignal prices;
  SimulationResult sim;
  Metrics all;
  Metrics peak;
  std::vector<WindowDiagnostics> windows;  // empty for FIFO
};

struct SeedResult {
  std::uint64_t seed = 0;
  std::vector<Job> jobs;
  std::vector<RunResult> runs;  // scheduler-major, flat before peak

  // nullptr when that combination was not run.
  const RunResult* find(SchedulerKind s, PriceCase p) const;
};

// Generates the workload for `seed` and runs every configured scheduler under
// the flat and the peak price signal. No files are touched unless
// cfg.dump_lp is set.
SeedResult run_seed(const ScenarioConfig& cfg, std::uint64_t seed);

// MILP schedule for one workload and price signal, with the scenario's
// solver settings.
RollingResult plan_milp(const ScenarioConfig& cfg, std::span<const Job> jobs, const PriceSignal& prices,
                        const std::string& lp_prefix = {});

struct ComparisonRow {
  std::uint64_t seed = 0;
  SchedulerKind scheduler = SchedulerKind::kFifo;
  PriceCase price = PriceCase::kFlat;
  std::string interval;  // "all" or "peak"
  Metrics metrics;
  double flexibility_kw = 0.0;
};

// Rows as they appear in comparison.csv; values carry the persisted precision.
std::vector<ComparisonRow> comparison_rows(const SeedResult& r, const ScenarioConfig& cfg);

// Writes jobs.csv and one directory per run (timeseries.csv, summary.json,
// schedule.csv, windows.csv for the MILP) below `dir`.
void write_seed_artifacts(const SeedResult& r, const ScenarioConfig& cfg,
                          const std::filesystem::path& dir);

void write_comparison_csv(std::ostream& out, const std::vector<ComparisonRow>& rows);

// All seeds of a scenario, artifacts under cfg.out_dir plus comparison.csv
// and config.txt. Seeds may run concurrently (see worker_count).
std::vector<ComparisonRow> run_scenario(const ScenarioConfig& cfg);

struct SweepRow {
  std::string axis_value;
  SchedulerKind scheduler = SchedulerKind::kFifo;
  double peak_avg_power_kw = 0.0;
  double gpu_util = 0.0;
  double occupancy = 0.0;
  double revenue = 0.0;
  double pct_power_reduction_vs_fifo = 0.0;
  bool has_reduction = false;  // false when FIFO was not part of the point
};

// Peak-interval metrics under peak prices, averaged over seeds.
std::vector<SweepRow> sweep_rows(const std::string& axis_value, const std::vector<ComparisonRow>& rows);

// One scenario per axis value under base.out_dir/point_<i>, then sweep.csv.
std::vector<SweepRow> run_sweep(const SweepSpec& sweep);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

// Rebuilds comparison.csv (and sweep.csv for sweep directories) from the
// persisted summaries and time series below `dir`.
void report(const std::filesystem::path& dir, std::ostream& log);

// DCFLEX_THREADS when set and positive, otherwise the hardware concurrency.
unsigned worker_count();

// Runs fn(0..n-1) on up to `workers` threads; the first exception is rethrown.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn);

}  // namespace dcflex
