#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dcflex/facility.hpp"
#include "dcflex/milp.hpp"
#include "dcflex/pricing.hpp"
#include "dcflex/sim.hpp"
#include "dcflex/workload.hpp"

namespace dcflex {

enum class SchedulerKind { kFifo, kMilp };

const char* to_string(SchedulerKind s);

struct ScenarioConfig {
  WorkloadSpec workload;
  DataCenterConfig facility;
  double price_base = 0.45;
  std::optional<int> peak_start;  // centred on the horizon when unset
  int peak_duration = 1;
  double peak_multiplier = 3.0;
  std::vector<SchedulerKind> schedulers{SchedulerKind::kFifo, SchedulerKind::kMilp};
  int window_h = 24;
  double wait_cost = 0.40;  // $ per GPU-hour of queueing in the MILP objective
  bool relax_deadlines = false;  // soften deadlines in windows that are otherwise infeasible
  int horizon_h = 120;
  std::vector<std::uint64_t> seeds{42};
  std::string out_dir = "out";
  // Per-window solver budget; a node limit keeps reruns deterministic.
  milp::SolveOptions solver{1e-4, std::numeric_limits<double>::infinity(), 5000};
  std::string dump_lp;  // LP dump path prefix, empty for none

  // Throws ConfigError.
  void validate() const;

  int resolved_peak_start() const;
  Interval peak_interval() const;
  Interval all_interval() const;
  PriceSignal flat_prices() const;
  PriceSignal peak_prices() const;
};

// Sweepable axes: peak_multiplier, num_jobs, util_mode, gpu_mode.
struct SweepSpec {
  std::string axis;
  std::vector<std::string> values;
  ScenarioConfig base;

  void validate() const;
};

// Applies one `key = value` setting. Throws ConfigError on unknown keys or
// unparsable values.
void apply_setting(ScenarioConfig& cfg, std::string_view key, std::string_view value);

struct ParsedConfig {
  ScenarioConfig scenario;
  std::optional<std::string> sweep_axis;
  std::vector<std::string> sweep_values;
};

// Flat `key = value` lines; `#` starts a comment.
ParsedConfig parse_config(std::istream& in, ParsedConfig base = {});
ParsedConfig load_config(const std::string& path, ParsedConfig base = {});

// Applies `key=value` (used by --set and sweep points) to a parsed config.
void apply_override(ParsedConfig& cfg, std::string_view assignment);

std::vector<std::string> split_sweep_values(std::string_view axis, std::string_view text);

UtilMode parse_util_mode(std::string_view text);
GpuMode parse_gpu_mode(std::string_view text);

// Every effective setting, in the same syntax parse_config reads.
void write_config(std::ostream& out, const ScenarioConfig& cfg);

}  // namespace dcflex
