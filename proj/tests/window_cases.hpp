#pragma once

// Random single-window scheduling problems small enough for exhaustive
// checks, plus a direct enumerator that scores start-time combinations from
// the job data without going through the MILP model.

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "dcflex/facility.hpp"
#include "dcflex/pricing.hpp"
#include "dcflex/schedule.hpp"
#include "dcflex/workload.hpp"

namespace oracle {

struct WindowCase {
  std::vector<dcflex::Job> jobs;
  dcflex::DataCenterConfig cfg;
  dcflex::PriceSignal prices;
  double wait_cost = 0.2;
};

inline WindowCase random_window_case(std::mt19937_64& rng) {
  WindowCase c;
  std::uniform_int_distribution<int> steps_d(3, 8), jobs_d(1, 4), dur_d(1, 4), gpu_d(1, 12),
      wait_d(1, 8), peak_d(0, 7);
  std::uniform_real_distribution<double> util_d(0.05, 1.0), mult_d(1.0, 40.0);
  const int steps = steps_d(rng);
  c.cfg.num_nodes = 4;
  c.cfg.max_wait_h = wait_d(rng);
  auto prices = dcflex::PriceSignal::flat(0.45, steps);
  const int peak = std::min(peak_d(rng), steps - 1);
  c.prices = prices.with_peak(peak, 1, std::round(mult_d(rng)));
  const int n = jobs_d(rng);
  std::uniform_int_distribution<int> arr_d(0, steps - 1);
  for (int i = 0; i < n; ++i) {
    dcflex::Job j;
    j.arrival = arr_d(rng);
    j.dur_est = j.dur_act = dur_d(rng);
    j.gpus = gpu_d(rng);
    j.nodes = dcflex::derive_nodes(j.gpus, 4);
    j.util = std::round(util_d(rng) * 100) / 100;
    c.jobs.push_back(j);
  }
  std::stable_sort(c.jobs.begin(), c.jobs.end(),
                   [](const auto& a, const auto& b) { return a.arrival < b.arrival; });
  for (int i = 0; i < n; ++i) c.jobs[static_cast<std::size_t>(i)].id = i;
  return c;
}

struct DirectResult {
  bool feasible = false;
  double objective = -std::numeric_limits<double>::infinity();
};

// Best profit when the window spans the whole price horizon: each job starts
// at most once in [arrival, horizon - duration], jobs whose deadline falls in
// the horizon must start by it, and nodes never exceed capacity.
inline DirectResult direct_window_optimum(const WindowCase& c) {
  const int horizon = c.prices.horizon();
  const double cool = 1.0 + c.cfg.cooling_alpha;
  const double per_gpu = (c.cfg.node_max_kw - c.cfg.node_idle_kw) / c.cfg.gpus_per_node;
  double base = 0.0;
  for (int t = 0; t < horizon; ++t) base -= cool * c.prices[static_cast<std::size_t>(t)] * c.cfg.node_idle_kw * c.cfg.num_nodes;

  const std::size_t n = c.jobs.size();
  std::vector<int> choice(n, -1);  // -1: not started
  std::vector<int> used(static_cast<std::size_t>(horizon), 0);
  DirectResult best;

  auto value = [&](const dcflex::Job& j, int s) {
    double v = c.cfg.gpu_hour_price * j.gpus * j.dur_est - c.wait_cost * j.gpus * (s - j.arrival);
    for (int t = s; t < s + j.dur_est; ++t) v -= cool * c.prices[static_cast<std::size_t>(t)] * j.gpus * j.util * per_gpu;
    return v;
  };

  auto rec = [&](auto&& self, std::size_t k, double acc) -> void {
    if (k == n) {
      best.feasible = true;
      best.objective = std::max(best.objective, acc);
      return;
    }
    const auto& j = c.jobs[k];
    const int deadline = j.arrival + c.cfg.max_wait_h;
    const int last = horizon - j.dur_est;
    const bool must = deadline <= horizon - 1 && last >= j.arrival;
    if (!must) self(self, k + 1, acc);
    const int hi = must ? std::min(last, deadline) : last;
    for (int s = j.arrival; s <= hi; ++s) {
      bool fits = true;
      for (int t = s; t < s + j.dur_est; ++t) fits &= used[static_cast<std::size_t>(t)] + j.nodes <= c.cfg.num_nodes;
      if (!fits) continue;
      for (int t = s; t < s + j.dur_est; ++t) used[static_cast<std::size_t>(t)] += j.nodes;
      self(self, k + 1, acc + value(j, s));
      for (int t = s; t < s + j.dur_est; ++t) used[static_cast<std::size_t>(t)] -= j.nodes;
    }
  };
  rec(rec, 0, base);
  return best;
}

}  // namespace oracle
