#include "dcflex/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "dcflex/errors.hpp"

namespace dcflex {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = s.find(sep, pos);
    const auto piece = trim(s.substr(pos, next == std::string_view::npos ? next : next - pos));
    if (!piece.empty()) out.emplace_back(piece);
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

double to_double(std::string_view key, std::string_view v) {
  const std::string s(trim(v));
  char* end = nullptr;
  const double d = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(d))
    throw ConfigError(std::string(key) + ": expected a number, got '" + s + "'");
  return d;
}

long long to_int(std::string_view key, std::string_view v) {
  const auto s = trim(v);
  long long out = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size())
    throw ConfigError(std::string(key) + ": expected an integer, got '" + std::string(s) + "'");
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  const auto s = trim(v);
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ConfigError(std::string(key) + ": expected true or false, got '" + std::string(s) + "'");
}

std::vector<std::uint64_t> parse_seeds(std::string_view v) {
  std::vector<std::uint64_t> seeds;
  for (const auto& item : split(v, ',')) {
    const auto dash = item.find('-');
    if (dash != std::string::npos && dash > 0) {
      const auto lo = to_int("seeds", std::string_view(item).substr(0, dash));
      const auto hi = to_int("seeds", std::string_view(item).substr(dash + 1));
      if (lo < 0 || hi < lo) throw ConfigError("seeds: bad range '" + item + "'");
      for (auto s = lo; s <= hi; ++s) seeds.push_back(static_cast<std::uint64_t>(s));
    } else {
      const auto s = to_int("seeds", item);
      if (s < 0) throw ConfigError("seeds must be non-negative");
      seeds.push_back(static_cast<std::uint64_t>(s));
    }
  }
  if (seeds.empty()) throw ConfigError("seeds: empty list");
  return seeds;
}

std::pair<std::string_view, std::string_view> split_mode(std::string_view text) {
  const auto t = trim(text);
  const auto colon = t.find(':');
  if (colon == std::string_view::npos) return {t, {}};
  return {trim(t.substr(0, colon)), trim(t.substr(colon + 1))};
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

const char* to_string(SchedulerKind s) { return s == SchedulerKind::kFifo ? "fifo" : "milp"; }

UtilMode parse_util_mode(std::string_view text) {
  const auto [kind, args] = split_mode(text);
  if (kind == "fixed") return FixedUtil{to_double("util_mode", args)};
  if (kind == "normal") {
    const auto parts = split(args, ',');
    if (parts.size() != 2) throw ConfigError("util_mode: expected normal:<mean>,<sd>");
    return TruncatedNormalUtil{to_double("util_mode", parts[0]), to_double("util_mode", parts[1])};
  }
  throw ConfigError("util_mode: unknown law '" + std::string(text) + "'");
}

GpuMode parse_gpu_mode(std::string_view text) {
  const auto [kind, args] = split_mode(text);
  if (kind == "fixed") return FixedGpus{static_cast<int>(to_int("gpu_mode", args))};
  if (kind == "poisson") return PoissonGpus{to_double("gpu_mode", args)};
  if (kind == "inverse") {
    const auto dash = args.find('-');
    if (dash != std::string_view::npos && args.find(',') == std::string_view::npos) {
      const auto lo = to_int("gpu_mode", args.substr(0, dash));
      const auto hi = to_int("gpu_mode", args.substr(dash + 1));
      if (lo < 1 || hi < lo) throw ConfigError("gpu_mode: bad inverse range");
      InverseWeightedGpus m;
      for (auto g = lo; g <= hi; ++g) m.support.push_back(static_cast<int>(g));
      return m;
    }
    InverseWeightedGpus m;
    for (const auto& g : split(args, ',')) m.support.push_back(static_cast<int>(to_int("gpu_mode", g)));
    return m;
  }
  throw ConfigError("gpu_mode: unknown law '" + std::string(text) + "'");
}

void ScenarioConfig::validate() const {
  facility.validate();
  workload.validate();
  if (workload.gpus_per_node != facility.gpus_per_node)
    throw ConfigError("workload and facility disagree on gpus_per_node");
  if (!(price_base > 0.0)) throw ConfigError("price_base must be > 0");
  if (horizon_h < 1) throw ConfigError("horizon_h must be >= 1");
  if (window_h < 1) throw ConfigError("window_h must be >= 1");
  if (peak_duration < 0) throw ConfigError("peak_duration_h must be >= 0");
  if (!(peak_multiplier > 0.0)) throw ConfigError("peak_multiplier must be > 0");
  const int ps = resolved_peak_start();
  if (ps < 0 || ps + peak_duration > horizon_h)
    throw ConfigError("peak window [" + std::to_string(ps) + ", " +
                      std::to_string(ps + peak_duration) + ") lies outside the horizon");
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  if (schedulers.empty()) throw ConfigError("at least one scheduler is required");
  if (!(solver.rel_gap >= 0.0)) throw ConfigError("mip_gap must be >= 0");
  if (solver.node_limit < 1) throw ConfigError("node_limit must be >= 1");
  if (!(solver.time_limit_s > 0.0)) throw ConfigError("time_limit_s must be > 0");
  if (!(wait_cost >= 0.0) || !std::isfinite(wait_cost)) throw ConfigError("wait_cost_gpu_h must be >= 0");
}

int ScenarioConfig::resolved_peak_start() const {
  return peak_start ? *peak_start : (horizon_h - peak_duration + 1) / 2;
}

Interval ScenarioConfig::peak_interval() const {
  const int s = resolved_peak_start();
  return Interval{s, s + std::max(peak_duration, 1)};
}

Interval ScenarioConfig::all_interval() const { return steady_interval(horizon_h, window_h); }

PriceSignal ScenarioConfig::flat_prices() const { return PriceSignal::flat(price_base, horizon_h); }

PriceSignal ScenarioConfig::peak_prices() const {
  return flat_prices().with_peak(resolved_peak_start(), peak_duration, peak_multiplier);
}

void SweepSpec::validate() const {
  if (axis != "peak_multiplier" && axis != "num_jobs" && axis != "util_mode" && axis != "gpu_mode")
    throw ConfigError("sweep_axis must be one of peak_multiplier, num_jobs, util_mode, gpu_mode");
  if (values.empty()) throw ConfigError("sweep_values is empty");
  for (const auto& v : values) {
    ScenarioConfig probe = base;
    apply_setting(probe, axis, v);
    probe.validate();
  }
}

void apply_setting(ScenarioConfig& cfg, std::string_view key, std::string_view value) {
  auto i = [&] { return static_cast<int>(to_int(key, value)); };
  auto d = [&] { return to_double(key, value); };
  if (key == "nodes") cfg.facility.num_nodes = i();
  else if (key == "gpus_per_node") cfg.facility.gpus_per_node = cfg.workload.gpus_per_node = i();
  else if (key == "node_max_kw") cfg.facility.node_max_kw = d();
  else if (key == "node_idle_kw") cfg.facility.node_idle_kw = d();
  else if (key == "cooling_alpha") cfg.facility.cooling_alpha = d();
  else if (key == "gpu_hour_price") cfg.facility.gpu_hour_price = d();
  else if (key == "max_wait_h") cfg.facility.max_wait_h = i();
  else if (key == "price_base") cfg.price_base = d();
  else if (key == "peak_start_h") {
    if (trim(value) == "auto") cfg.peak_start.reset();
    else cfg.peak_start = i();
  }
  else if (key == "peak_duration_h") cfg.peak_duration = i();
  else if (key == "peak_multiplier") cfg.peak_multiplier = d();
  else if (key == "num_jobs") cfg.workload.num_jobs = i();
  else if (key == "arrival_span_h") cfg.workload.arrival_span = i();
  else if (key == "duration_mean_h") cfg.workload.duration_mean = d();
  else if (key == "duration_sd_h") cfg.workload.duration_sd = d();
  else if (key == "duration_max_h") cfg.workload.duration_max = i();
  else if (key == "util_mode") cfg.workload.util = parse_util_mode(value);
  else if (key == "gpu_mode") cfg.workload.gpus = parse_gpu_mode(value);
  else if (key == "early_term_fraction") cfg.workload.early_term_fraction = d();
  else if (key == "scheduler") {
    const auto v = trim(value);
    if (v == "fifo") cfg.schedulers = {SchedulerKind::kFifo};
    else if (v == "milp") cfg.schedulers = {SchedulerKind::kMilp};
    else if (v == "both") cfg.schedulers = {SchedulerKind::kFifo, SchedulerKind::kMilp};
    else throw ConfigError("scheduler must be fifo, milp or both");
  }
  else if (key == "window_h") cfg.window_h = i();
  else if (key == "wait_cost_gpu_h") cfg.wait_cost = d();
  else if (key == "relax_deadlines") cfg.relax_deadlines = parse_bool(key, value);
  else if (key == "horizon_h") cfg.horizon_h = i();
  else if (key == "seeds" || key == "seed") cfg.seeds = parse_seeds(value);
  else if (key == "out_dir") cfg.out_dir = std::string(trim(value));
  else if (key == "mip_gap") cfg.solver.rel_gap = d();
  else if (key == "node_limit") cfg.solver.node_limit = static_cast<long>(to_int(key, value));
  else if (key == "time_limit_s") cfg.solver.time_limit_s = d();
  else throw ConfigError("unknown configuration key '" + std::string(key) + "'");
}

std::vector<std::string> split_sweep_values(std::string_view axis, std::string_view text) {
  auto values = split(text, ';');
  const bool numeric = axis == "peak_multiplier" || axis == "num_jobs";
  if (numeric && values.size() == 1 && values[0].find(',') != std::string::npos)
    values = split(values[0], ',');
  return values;
}

void apply_override(ParsedConfig& cfg, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos)
    throw ConfigError("expected key=value, got '" + std::string(assignment) + "'");
  const auto key = trim(assignment.substr(0, eq));
  const auto value = trim(assignment.substr(eq + 1));
  if (key == "sweep_axis") cfg.sweep_axis = std::string(value);
  else if (key == "sweep_values") {
    if (!cfg.sweep_axis) throw ConfigError("sweep_values given before sweep_axis");
    cfg.sweep_values = split_sweep_values(*cfg.sweep_axis, value);
  } else {
    apply_setting(cfg.scenario, key, value);
  }
}

ParsedConfig parse_config(std::istream& in, ParsedConfig base) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    if (trim(view).empty()) continue;
    try {
      apply_override(base, view);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return base;
}

ParsedConfig load_config(const std::string& path, ParsedConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  try {
    return parse_config(in, std::move(base));
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void write_config(std::ostream& out, const ScenarioConfig& c) {
  const auto& f = c.facility;
  const auto& w = c.workload;
  out << "# facility\n"
      << "nodes = " << f.num_nodes << "\n"
      << "gpus_per_node = " << f.gpus_per_node << "\n"
      << "node_max_kw = " << fmt_double(f.node_max_kw) << "\n"
      << "node_idle_kw = " << fmt_double(f.node_idle_kw) << "\n"
      << "cooling_alpha = " << fmt_double(f.cooling_alpha) << "\n"
      << "gpu_hour_price = " << fmt_double(f.gpu_hour_price) << "\n"
      << "max_wait_h = " << f.max_wait_h << "\n"
      << "# pricing\n"
      << "price_base = " << fmt_double(c.price_base) << "\n"
      << "peak_start_h = " << (c.peak_start ? std::to_string(*c.peak_start) : "auto") << "\n"
      << "peak_duration_h = " << c.peak_duration << "\n"
      << "peak_multiplier = " << fmt_double(c.peak_multiplier) << "\n"
      << "# workload\n"
      << "num_jobs = " << w.num_jobs << "\n"
      << "arrival_span_h = " << w.arrival_span << "\n"
      << "duration_mean_h = " << fmt_double(w.duration_mean) << "\n"
      << "duration_sd_h = " << fmt_double(w.duration_sd) << "\n"
      << "duration_max_h = " << w.duration_max << "\n"
      << "util_mode = " << describe(w.util) << "\n"
      << "gpu_mode = " << describe(w.gpus) << "\n"
      << "early_term_fraction = " << fmt_double(w.early_term_fraction) << "\n"
      << "# scenario\n"
      << "scheduler = "
      << (c.schedulers.size() == 2 ? "both" : to_string(c.schedulers.front())) << "\n"
      << "window_h = " << c.window_h << "\n"
      << "wait_cost_gpu_h = " << fmt_double(c.wait_cost) << "\n"
      << "relax_deadlines = " << (c.relax_deadlines ? "true" : "false") << "\n"
      << "horizon_h = " << c.horizon_h << "\n"
      << "seeds = ";
  for (std::size_t i = 0; i < c.seeds.size(); ++i) out << (i ? "," : "") << c.seeds[i];
  out << "\n"
      << "mip_gap = " << fmt_double(c.solver.rel_gap) << "\n";
  if (c.solver.node_limit != std::numeric_limits<long>::max())
    out << "node_limit = " << c.solver.node_limit << "\n";
  if (std::isfinite(c.solver.time_limit_s))
    out << "time_limit_s = " << fmt_double(c.solver.time_limit_s) << "\n";
}

}  // namespace dcflex
