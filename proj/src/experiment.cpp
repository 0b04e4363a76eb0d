#include "dcflex/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "dcflex/errors.hpp"
#include "dcflex/fifo.hpp"

namespace dcflex {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string run_dir_name(SchedulerKind s, PriceCase p) {
  return std::string(to_string(s)) + "_" + to_string(p);
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  return in;
}

void make_dirs(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

void check_written(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

// Values exactly as persisted, so in-memory and re-read aggregates agree.
Metrics persisted(const Metrics& m) {
  const auto j = ordered_json::parse(metrics_json(m));
  Metrics out;
  out.interval = Interval{j["interval"][0].get<int>(), j["interval"][1].get<int>()};
  out.avg_power_kw = j["avg_power_kw"].get<double>();
  out.gpu_util = j["gpu_util"].get<double>();
  out.node_occupancy = j["node_occupancy"].get<double>();
  out.avg_wait_h = j["avg_wait_h"].get<double>();
  out.revenue = j["revenue"].get<double>();
  out.started_jobs = j["started_jobs"].get<int>();
  return out;
}

Metrics metrics_from_json(const ordered_json& j) {
  Metrics out;
  out.interval = Interval{j.at("interval").at(0).get<int>(), j.at("interval").at(1).get<int>()};
  out.avg_power_kw = j.at("avg_power_kw").get<double>();
  out.gpu_util = j.at("gpu_util").get<double>();
  out.node_occupancy = j.at("node_occupancy").get<double>();
  out.avg_wait_h = j.at("avg_wait_h").get<double>();
  out.revenue = j.at("revenue").get<double>();
  out.started_jobs = j.at("started_jobs").get<int>();
  return out;
}

std::vector<StepRecord> persisted_steps(const SimulationResult& sim) {
  std::stringstream ss;
  write_timeseries_csv(ss, sim);
  return read_timeseries_csv(ss);
}

std::string summary_json(const RunResult& r, std::uint64_t seed) {
  ordered_json j;
  j["seed"] = seed;
  j["scheduler"] = to_string(r.scheduler);
  j["price"] = to_string(r.price);
  j["all"] = ordered_json::parse(metrics_json(r.all));
  j["peak"] = ordered_json::parse(metrics_json(r.peak));
  if (!r.windows.empty()) {
    int gap_limited = 0;
    for (const auto& w : r.windows) gap_limited += w.status == milp::SolveStatus::kGapLimit;
    j["windows"] = r.windows.size();
    j["gap_limited_windows"] = gap_limited;
    int relaxed = 0;
    for (const auto& w : r.windows) relaxed += w.relaxed;
    j["relaxed_windows"] = relaxed;
  }
  return j.dump(2) + "\n";
}

SchedulerKind parse_scheduler(const std::string& s) {
  if (s == "fifo") return SchedulerKind::kFifo;
  if (s == "milp") return SchedulerKind::kMilp;
  throw IoError("unknown scheduler '" + s + "' in summary");
}

PriceCase parse_price(const std::string& s) {
  if (s == "flat") return PriceCase::kFlat;
  if (s == "peak") return PriceCase::kPeak;
  throw IoError("unknown price case '" + s + "' in summary");
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

bool seed_dir_name(const std::string& name, std::uint64_t& seed) {
  if (name.rfind("seed_", 0) != 0) return false;
  try {
    std::size_t used = 0;
    seed = std::stoull(name.substr(5), &used);
    return used == name.size() - 5;
  } catch (const std::exception&) {
    return false;
  }
}

std::vector<fs::path> sorted_children(const fs::path& dir) {
  std::vector<fs::path> out;
  std::error_code ec;
  for (const auto& e : fs::directory_iterator(dir, ec))
    if (e.is_directory()) out.push_back(e.path());
  if (ec) throw IoError("cannot list " + dir.string() + ": " + ec.message());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<ComparisonRow> rows_from_disk(const fs::path& dir) {
  std::vector<std::pair<std::uint64_t, fs::path>> seeds;
  for (const auto& p : sorted_children(dir)) {
    std::uint64_t seed = 0;
    if (seed_dir_name(p.filename().string(), seed)) seeds.emplace_back(seed, p);
  }
  std::sort(seeds.begin(), seeds.end());

  std::vector<ComparisonRow> rows;
  for (const auto& [seed, seed_dir] : seeds) {
    struct Stored {
      Metrics all, peak;
      std::vector<StepRecord> steps;
    };
    std::map<std::pair<SchedulerKind, PriceCase>, Stored> runs;
    for (auto s : {SchedulerKind::kFifo, SchedulerKind::kMilp}) {
      for (auto p : {PriceCase::kFlat, PriceCase::kPeak}) {
        const fs::path run = seed_dir / run_dir_name(s, p);
        if (!fs::exists(run / "summary.json")) continue;
        auto in = open_in(run / "summary.json");
        ordered_json j;
        try {
          j = ordered_json::parse(in);
        } catch (const std::exception& e) {
          throw IoError((run / "summary.json").string() + ": " + e.what());
        }
        if (parse_scheduler(j.at("scheduler").get<std::string>()) != s ||
            parse_price(j.at("price").get<std::string>()) != p)
          throw IoError((run / "summary.json").string() + " does not match its directory");
        auto ts = open_in(run / "timeseries.csv");
        runs[{s, p}] = Stored{metrics_from_json(j.at("all")), metrics_from_json(j.at("peak")),
                              read_timeseries_csv(ts)};
      }
    }
    for (auto s : {SchedulerKind::kFifo, SchedulerKind::kMilp}) {
      const auto flat = runs.find({s, PriceCase::kFlat});
      const auto dyn = runs.find({s, PriceCase::kPeak});
      for (auto p : {PriceCase::kFlat, PriceCase::kPeak}) {
        const auto it = runs.find({s, p});
        if (it == runs.end()) continue;
        double flex = 0.0;
        if (p == PriceCase::kPeak && flat != runs.end())
          flex = flexibility(dyn->second.steps, flat->second.steps, it->second.peak.interval);
        rows.push_back(ComparisonRow{seed, s, p, "all", it->second.all, flex});
        rows.push_back(ComparisonRow{seed, s, p, "peak", it->second.peak, flex});
      }
    }
  }
  return rows;
}

void write_point_json(const fs::path& path, const std::string& axis, const std::string& value) {
  ordered_json j;
  j["axis"] = axis;
  j["value"] = value;
  auto out = open_out(path);
  out << j.dump(2) << "\n";
  check_written(out, path);
}

}  // namespace

const char* to_string(PriceCase p) { return p == PriceCase::kFlat ? "flat" : "peak"; }

const RunResult* SeedResult::find(SchedulerKind s, PriceCase p) const {
  for (const auto& r : runs)
    if (r.scheduler == s && r.price == p) return &r;
  return nullptr;
}

RollingResult plan_milp(const ScenarioConfig& cfg, std::span<const Job> jobs, const PriceSignal& prices,
                        const std::string& lp_prefix) {
  RollingOptions opts;
  opts.window_h = cfg.window_h;
  opts.solver = cfg.solver;
  opts.wait_cost = cfg.wait_cost;
  opts.relax_deadlines = cfg.relax_deadlines;
  if (!lp_prefix.empty()) {
    opts.on_model = [&](int k, const milp::MilpInstance& inst) {
      const fs::path path = lp_prefix + ".w" + std::to_string(k) + ".lp";
      auto out = open_out(path);
      inst.write_lp(out);
      check_written(out, path);
    };
  }
  return rolling_horizon(jobs, cfg.facility, prices, opts);
}

SeedResult run_seed(const ScenarioConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  SeedResult out;
  out.seed = seed;
  WorkloadSpec spec = cfg.workload;
  spec.seed = seed;
  out.jobs = generate_workload(spec);

  const PriceSignal flat = cfg.flat_prices();
  const PriceSignal peak = cfg.peak_prices();
  const Interval all_iv = cfg.all_interval();
  const Interval peak_iv = cfg.peak_interval();

  for (auto s : cfg.schedulers) {
    for (auto p : {PriceCase::kFlat, PriceCase::kPeak}) {
      RunResult r;
      r.scheduler = s;
      r.price = p;
      r.prices = p == PriceCase::kFlat ? flat : peak;
      ScheduleState plan;
      if (s == SchedulerKind::kFifo) {
        // FIFO ignores prices; the peak run differs only in its cost view.
        plan = fifo_execute(out.jobs, cfg.facility, cfg.horizon_h);
      } else {
        std::string prefix;
        if (!cfg.dump_lp.empty())
          prefix = cfg.dump_lp + ".seed" + std::to_string(seed) + "." + to_string(p);
        auto rr = plan_milp(cfg, out.jobs, r.prices, prefix);
        plan = std::move(rr.state);
        r.windows = std::move(rr.windows);
      }
      r.sim = run(out.jobs, plan, cfg.facility, r.prices);
      r.all = metrics(r.sim, out.jobs, cfg.facility, all_iv);
      r.peak = metrics(r.sim, out.jobs, cfg.facility, peak_iv);
      out.runs.push_back(std::move(r));
    }
  }
  return out;
}

std::vector<ComparisonRow> comparison_rows(const SeedResult& r, const ScenarioConfig& cfg) {
  std::vector<ComparisonRow> rows;
  for (auto s : cfg.schedulers) {
    const RunResult* flat = r.find(s, PriceCase::kFlat);
    const RunResult* dyn = r.find(s, PriceCase::kPeak);
    std::vector<StepRecord> flat_steps, dyn_steps;
    if (flat && dyn) {
      flat_steps = persisted_steps(flat->sim);
      dyn_steps = persisted_steps(dyn->sim);
    }
    for (const RunResult* run : {flat, dyn}) {
      if (!run) continue;
      double flex = 0.0;
      if (run->price == PriceCase::kPeak && flat)
        flex = flexibility(dyn_steps, flat_steps, run->peak.interval);
      rows.push_back(ComparisonRow{r.seed, s, run->price, "all", persisted(run->all), flex});
      rows.push_back(ComparisonRow{r.seed, s, run->price, "peak", persisted(run->peak), flex});
    }
  }
  return rows;
}

void write_seed_artifacts(const SeedResult& r, const ScenarioConfig& cfg, const fs::path& dir) {
  (void)cfg;
  make_dirs(dir);
  {
    const auto path = dir / "jobs.csv";
    auto out = open_out(path);
    write_jobs_csv(out, r.jobs);
    check_written(out, path);
  }
  for (const auto& run : r.runs) {
    const fs::path rd = dir / run_dir_name(run.scheduler, run.price);
    make_dirs(rd);
    {
      auto out = open_out(rd / "timeseries.csv");
      write_timeseries_csv(out, run.sim);
      check_written(out, rd / "timeseries.csv");
    }
    {
      auto out = open_out(rd / "summary.json");
      out << summary_json(run, r.seed);
      check_written(out, rd / "summary.json");
    }
    {
      auto out = open_out(rd / "schedule.csv");
      write_schedule_csv(out, r.jobs, run.sim.schedule);
      check_written(out, rd / "schedule.csv");
    }
    if (run.scheduler == SchedulerKind::kMilp) {
      auto out = open_out(rd / "windows.csv");
      write_windows_csv(out, run.windows);
      check_written(out, rd / "windows.csv");
    }
  }
}

void write_comparison_csv(std::ostream& out, const std::vector<ComparisonRow>& rows) {
  out << "seed,scheduler,price,interval,avg_power_kw,gpu_util,node_occupancy,avg_wait_h,revenue,"
         "flexibility_kw\n";
  char buf[320];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%llu,%s,%s,%s,%.2f,%.4f,%.4f,%.2f,%.2f,%.2f\n",
                  static_cast<unsigned long long>(r.seed), to_string(r.scheduler), to_string(r.price),
                  r.interval.c_str(), r.metrics.avg_power_kw, r.metrics.gpu_util,
                  r.metrics.node_occupancy, r.metrics.avg_wait_h, r.metrics.revenue,
                  r.flexibility_kw + 0.0);
    out << buf;
  }
}

std::vector<ComparisonRow> run_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  const fs::path root(cfg.out_dir);
  make_dirs(root);
  {
    auto out = open_out(root / "config.txt");
    write_config(out, cfg);
    check_written(out, root / "config.txt");
  }

  std::vector<std::vector<ComparisonRow>> per_seed(cfg.seeds.size());
  parallel_for(cfg.seeds.size(), worker_count(), [&](std::size_t i) {
    const auto seed = cfg.seeds[i];
    const SeedResult r = run_seed(cfg, seed);
    write_seed_artifacts(r, cfg, root / ("seed_" + std::to_string(seed)));
    per_seed[i] = comparison_rows(r, cfg);
  });

  std::vector<ComparisonRow> rows;
  for (auto& v : per_seed) rows.insert(rows.end(), v.begin(), v.end());
  auto out = open_out(root / "comparison.csv");
  write_comparison_csv(out, rows);
  check_written(out, root / "comparison.csv");
  return rows;
}

std::vector<SweepRow> sweep_rows(const std::string& axis_value, const std::vector<ComparisonRow>& rows) {
  std::vector<SweepRow> out;
  double fifo_power = 0.0;
  bool have_fifo = false;
  for (auto s : {SchedulerKind::kFifo, SchedulerKind::kMilp}) {
    SweepRow row;
    row.axis_value = axis_value;
    row.scheduler = s;
    int n = 0;
    for (const auto& r : rows) {
      if (r.scheduler != s || r.price != PriceCase::kPeak || r.interval != "peak") continue;
      row.peak_avg_power_kw += r.metrics.avg_power_kw;
      row.gpu_util += r.metrics.gpu_util;
      row.occupancy += r.metrics.node_occupancy;
      row.revenue += r.metrics.revenue;
      ++n;
    }
    if (n == 0) continue;
    row.peak_avg_power_kw /= n;
    row.gpu_util /= n;
    row.occupancy /= n;
    row.revenue /= n;
    if (s == SchedulerKind::kFifo) {
      fifo_power = row.peak_avg_power_kw;
      have_fifo = true;
    }
    if (have_fifo && fifo_power > 0.0) {
      row.pct_power_reduction_vs_fifo = 100.0 * (fifo_power - row.peak_avg_power_kw) / fifo_power;
      row.has_reduction = true;
    }
    out.push_back(row);
  }
  return out;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "axis_value,scheduler,peak_avg_power_kw,gpu_util,occupancy,revenue,pct_power_reduction_vs_fifo\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, ",%s,%.2f,%.4f,%.4f,%.2f,", to_string(r.scheduler),
                  r.peak_avg_power_kw, r.gpu_util, r.occupancy, r.revenue);
    out << csv_field(r.axis_value) << buf;
    if (r.has_reduction) {
      std::snprintf(buf, sizeof buf, "%.2f", r.pct_power_reduction_vs_fifo + 0.0);
      out << buf;
    }
    out << '\n';
  }
}

std::vector<SweepRow> run_sweep(const SweepSpec& sweep) {
  sweep.validate();
  const fs::path root(sweep.base.out_dir);
  make_dirs(root);

  std::vector<ScenarioConfig> points;
  for (const auto& v : sweep.values) {
    ScenarioConfig c = sweep.base;
    apply_setting(c, sweep.axis, v);
    c.out_dir = (root / ("point_" + std::to_string(points.size()))).string();
    if (!c.dump_lp.empty()) c.dump_lp += ".p" + std::to_string(points.size());
    c.validate();
    points.push_back(std::move(c));
  }

  // Every (point, seed) pair is an independent task.
  struct Task {
    std::size_t point;
    std::size_t seed;
  };
  std::vector<Task> tasks;
  for (std::size_t p = 0; p < points.size(); ++p)
    for (std::size_t s = 0; s < points[p].seeds.size(); ++s) tasks.push_back({p, s});

  std::vector<std::vector<std::vector<ComparisonRow>>> rows(points.size());
  for (std::size_t p = 0; p < points.size(); ++p) {
    make_dirs(points[p].out_dir);
    rows[p].resize(points[p].seeds.size());
    write_point_json(fs::path(points[p].out_dir) / "point.json", sweep.axis, sweep.values[p]);
    auto out = open_out(fs::path(points[p].out_dir) / "config.txt");
    write_config(out, points[p]);
    check_written(out, fs::path(points[p].out_dir) / "config.txt");
  }
  parallel_for(tasks.size(), worker_count(), [&](std::size_t i) {
    const auto& c = points[tasks[i].point];
    const auto seed = c.seeds[tasks[i].seed];
    const SeedResult r = run_seed(c, seed);
    write_seed_artifacts(r, c, fs::path(c.out_dir) / ("seed_" + std::to_string(seed)));
    rows[tasks[i].point][tasks[i].seed] = comparison_rows(r, c);
  });

  std::vector<SweepRow> out;
  for (std::size_t p = 0; p < points.size(); ++p) {
    std::vector<ComparisonRow> flat_rows;
    for (auto& v : rows[p]) flat_rows.insert(flat_rows.end(), v.begin(), v.end());
    auto f = open_out(fs::path(points[p].out_dir) / "comparison.csv");
    write_comparison_csv(f, flat_rows);
    check_written(f, fs::path(points[p].out_dir) / "comparison.csv");
    const auto sr = sweep_rows(sweep.values[p], flat_rows);
    out.insert(out.end(), sr.begin(), sr.end());
  }
  auto f = open_out(root / "sweep.csv");
  write_sweep_csv(f, out);
  check_written(f, root / "sweep.csv");
  return out;
}

void report(const fs::path& dir, std::ostream& log) {
  if (!fs::is_directory(dir)) throw IoError(dir.string() + " is not a directory");

  std::vector<fs::path> point_dirs;
  for (const auto& p : sorted_children(dir))
    if (fs::exists(p / "point.json")) point_dirs.push_back(p);
  // Numeric point order, not lexicographic.
  auto index_of = [](const fs::path& p) {
    const auto name = p.filename().string();
    return name.rfind("point_", 0) == 0 ? std::strtoull(name.c_str() + 6, nullptr, 10) : 0ull;
  };
  std::stable_sort(point_dirs.begin(), point_dirs.end(),
                   [&](const fs::path& a, const fs::path& b) { return index_of(a) < index_of(b); });

  if (point_dirs.empty()) {
    const auto rows = rows_from_disk(dir);
    if (rows.empty()) throw IoError("no seed_<n> run directories below " + dir.string());
    auto out = open_out(dir / "comparison.csv");
    write_comparison_csv(out, rows);
    check_written(out, dir / "comparison.csv");
    log << "wrote " << (dir / "comparison.csv").string() << " (" << rows.size() << " rows)\n";
    return;
  }

  std::vector<SweepRow> sweep;
  for (const auto& pd : point_dirs) {
    auto in = open_in(pd / "point.json");
    ordered_json j;
    try {
      j = ordered_json::parse(in);
    } catch (const std::exception& e) {
      throw IoError((pd / "point.json").string() + ": " + e.what());
    }
    const auto rows = rows_from_disk(pd);
    auto out = open_out(pd / "comparison.csv");
    write_comparison_csv(out, rows);
    check_written(out, pd / "comparison.csv");
    const auto sr = sweep_rows(j.at("value").get<std::string>(), rows);
    sweep.insert(sweep.end(), sr.begin(), sr.end());
  }
  auto out = open_out(dir / "sweep.csv");
  write_sweep_csv(out, sweep);
  check_written(out, dir / "sweep.csv");
  log << "wrote " << (dir / "sweep.csv").string() << " (" << sweep.size() << " rows from "
      << point_dirs.size() << " points)\n";
}

unsigned worker_count() {
  if (const char* env = std::getenv("DCFLEX_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn) {
  workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, workers), n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto body = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      {
        std::lock_guard lock(error_mu);
        if (error) return;
      }
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace dcflex
