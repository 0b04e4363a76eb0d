#include "dcflex/rolling.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "dcflex/errors.hpp"

namespace dcflex {

namespace {


std::vector<std::size_t> arrival_order(std::span<const Job> jobs) {
  std::vector<std::size_t> order(jobs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (jobs[a].arrival != jobs[b].arrival) return jobs[a].arrival < jobs[b].arrival;
    return jobs[a].id < jobs[b].id;
  });
  return order;
}

std::string window_label(int index, Window w) {
  return "window " + std::to_string(index) + " [" + std::to_string(w.start) + ", " +
         std::to_string(w.end) + "]";
}

}  // namespace

std::vector<Window> rolling_windows(int horizon, int window_h) {
  if (window_h < 1) throw ConfigError("rolling window length must be >= 1");
  if (horizon < 1) throw ConfigError("horizon must be >= 1");
  std::vector<Window> out;
  for (int k = 0; k <= (horizon - 1) / window_h; ++k)
    out.push_back(Window{k * window_h, std::min((k + 1) * window_h - 1, horizon - 1)});
  return out;
}

std::vector<int> active_start_set(int arrival, int duration, int t, Window window) {
  std::vector<int> out;
  const int lo = std::max({arrival, t - duration + 1, window.start});
  const int hi = std::min(t, window.end);
  for (int s = lo; s <= hi; ++s) out.push_back(s);
  return out;
}

std::vector<std::vector<std::uint8_t>> continuing_status(std::span<const Job> jobs,
                                                         const ScheduleState& state,
                                                         Window window) {
  std::vector<std::vector<std::uint8_t>> cont(
      jobs.size(), std::vector<std::uint8_t>(static_cast<std::size_t>(window.length()), 0));
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    const auto& slot = state[j];
    if (!slot.scheduled || *slot.start >= window.start) continue;
    const int s = *slot.start;
    if (s + jobs[j].dur_act <= window.start) continue;  // already observed to finish
    const int stop = std::min(s + jobs[j].dur_est, window.end + 1);
    for (int t = window.start; t < stop; ++t) cont[j][static_cast<std::size_t>(t - window.start)] = 1;
  }
  return cont;
}

WindowModel build_window_model(const WindowProblem& p) {
  if (p.state == nullptr || p.prices == nullptr)
    throw std::invalid_argument("window problem needs schedule state and prices");
  const Window w = p.window;
  const int len = w.length();
  const int horizon = p.prices->horizon();
  if (w.start < 0 || w.end >= horizon || len < 1)
    throw ConfigError("window exceeds the price horizon");
  const auto& cfg = p.cfg;
  const auto& prices = *p.prices;
  const double per_gpu = gpu_active_power(cfg);
  const double cost_factor = 1.0 + cfg.cooling_alpha;
  const int capacity = cfg.num_nodes;
  // Prices are known up to the window end; later hours are assumed to keep
  // the last known price.
  auto planning_price = [&](int t) { return prices[static_cast<std::size_t>(std::min(t, w.end))]; };

  // Node load of continuing jobs from the window start to the horizon end.
  // Past the window they are assumed to run to their estimate.
  const int span = horizon - w.start;
  std::vector<int> cont_nodes(static_cast<std::size_t>(span), 0);
  std::vector<double> cont_power(static_cast<std::size_t>(len), 0.0);
  for (std::size_t j = 0; j < p.jobs.size(); ++j) {
    if (p.cont.empty()) break;
    for (int k = 0; k < len; ++k) {
      if (!p.cont[j][static_cast<std::size_t>(k)]) continue;
      cont_nodes[k] += p.jobs[j].nodes;
      cont_power[k] += p.jobs[j].gpus * p.jobs[j].util * per_gpu;
    }
    if (p.cont[j][0]) {
      const int stop = std::min(*(*p.state)[j].start + p.jobs[j].dur_est, horizon);
      for (int t = w.end + 1; t < stop; ++t) cont_nodes[t - w.start] += p.jobs[j].nodes;
    }
  }

  WindowModel model;
  auto& inst = model.instance;
  double constant = 0.0;
  for (int k = 0; k < len; ++k) {
    if (cont_nodes[k] > capacity)
      throw InfeasibleError("continuing jobs occupy " + std::to_string(cont_nodes[k]) +
                            " nodes at hour " + std::to_string(w.start + k));
    constant -= cost_factor * prices[static_cast<std::size_t>(w.start + k)] *
                (idle_power(cfg) + cont_power[k]);
  }
  inst.set_objective_constant(constant);

  struct JobVars {
    int job;
    bool forced;
    int first_var;
    int count;
  };
  std::vector<JobVars> per_job;

  // Larger jobs and their best starts come first so that branching on the
  // lowest fractional index settles the hardest packing decisions early.
  auto order = arrival_order(p.jobs);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return p.jobs[a].nodes > p.jobs[b].nodes;
  });

  struct Candidate {
    int t;
    double coef;
  };
  std::vector<Candidate> candidates;
  for (std::size_t j : order) {
    const Job& job = p.jobs[j];
    const auto& slot = (*p.state)[j];
    if (slot.scheduled || slot.rejected || job.arrival > w.end) continue;

    const int deadline = job.arrival + cfg.max_wait_h;
    const bool forced = deadline <= w.end;
    const int lo = std::max(job.arrival, w.start);
    const int last_finishing = horizon - job.dur_est;
    int hi = std::min(w.end, last_finishing);
    if (hi < lo) continue;  // cannot complete inside the horizon any more
    if (forced && p.relax_deadlines) {
      if (job.nodes > capacity) continue;
    } else if (forced) {
      hi = std::min(hi, deadline);
      if (job.nodes > capacity)
        throw InfeasibleError("job " + std::to_string(job.id) + " needs " +
                              std::to_string(job.nodes) + " nodes but only " +
                              std::to_string(capacity) + " exist, and its deadline is forced");
      if (hi < lo)
        throw InfeasibleError("job " + std::to_string(job.id) + " missed its deadline " +
                              std::to_string(deadline));
    } else if (job.nodes > capacity) {
      continue;
    }

    const double revenue = cfg.gpu_hour_price * job.gpus * job.dur_est;
    const double draw = job.gpus * job.util * per_gpu;
    auto fits_at = [&](int s) {
      for (int t = s; t < s + job.dur_est; ++t)
        if (cont_nodes[t - w.start] + job.nodes > capacity) return false;
      return true;
    };
    auto value_at = [&](int s) {
      double energy = 0.0;
      for (int t = s; t < s + job.dur_est; ++t)
        energy += cost_factor * planning_price(t) * draw;
      double v = revenue - energy - p.wait_cost * job.gpus * (s - job.arrival);
      if (forced && p.relax_deadlines)
        v += job.gpus * (kMissPenalty - kLatePenalty * std::max(0, s - deadline));
      return v;
    };
    candidates.clear();
    for (int s = lo; s <= hi; ++s)
      if (fits_at(s)) candidates.push_back({s, value_at(s)});
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) { return a.coef > b.coef; });

    JobVars jv{static_cast<int>(j), forced, inst.num_variables(), 0};
    for (const auto& c : candidates) {
      inst.add_variable("x_j" + std::to_string(job.id) + "_t" + std::to_string(c.t), c.coef);
      model.vars.push_back(StartVar{static_cast<int>(j), c.t, false});
      ++jv.count;
    }

    // Starts after the window up to the deadline hold capacity for jobs that
    // are deferred, valued as if run there. They are never committed.
    if (!forced) {
      const int reserve_hi = std::min(deadline, last_finishing);
      for (int s = w.end + 1; s <= reserve_hi; ++s) {
        if (!fits_at(s)) continue;
        inst.add_variable("r_j" + std::to_string(job.id) + "_t" + std::to_string(s), value_at(s));
        model.vars.push_back(StartVar{static_cast<int>(j), s, true});
        ++jv.count;
      }
    }
    if (forced) {
      model.forced_jobs.push_back(static_cast<int>(j));
      if (jv.count == 0 && !p.relax_deadlines)
        throw InfeasibleError("job " + std::to_string(job.id) +
                              " is forced but continuing jobs block every start before hour " +
                              std::to_string(hi + 1));
    }
    if (jv.count > 0) per_job.push_back(jv);
  }

  // At most one start per job; exactly one for forced jobs.
  for (const auto& jv : per_job) {
    std::vector<milp::Term> terms;
    for (int v = jv.first_var; v < jv.first_var + jv.count; ++v) terms.push_back({v, 1.0});
    const bool exact = jv.forced && !p.relax_deadlines;
    inst.add_constraint(std::move(terms), exact ? milp::Sense::kEqual : milp::Sense::kLessEqual,
                        1.0, "start_j" + std::to_string(p.jobs[jv.job].id));
  }

  // Node capacity per hour, skipping rows no assignment could violate.
  for (int k = 0; k < span; ++k) {
    const int t = w.start + k;
    std::vector<milp::Term> terms;
    int worst = 0;
    for (const auto& jv : per_job) {
      const Job& job = p.jobs[jv.job];
      bool any = false;
      for (int v = jv.first_var; v < jv.first_var + jv.count; ++v) {
        const int s = model.vars[v].t;
        if (s <= t && t < s + job.dur_est) {
          terms.push_back({v, static_cast<double>(job.nodes)});
          any = true;
        }
      }
      if (any) worst += job.nodes;
    }
    const int room = capacity - cont_nodes[k];
    if (terms.empty() || worst <= room) continue;
    inst.add_constraint(std::move(terms), milp::Sense::kLessEqual, room, "cap_t" + std::to_string(t));
  }
  return model;
}

StartDecision decode_decision(const WindowModel& model, std::span<const std::uint8_t> assignment) {
  StartDecision out;
  for (std::size_t v = 0; v < model.vars.size(); ++v)
    if (assignment[v] && !model.vars[v].tentative) out.push_back(JobStart{model.vars[v].job, model.vars[v].t});
  return out;
}

ScheduleState commit_solution(ScheduleState state, const StartDecision& decision,
                              std::span<const Job> jobs) {
  for (const auto& d : decision)
    state.start(static_cast<std::size_t>(d.job), d.t, jobs[static_cast<std::size_t>(d.job)].dur_est);
  return state;
}

RollingResult rolling_horizon(std::span<const Job> jobs, const DataCenterConfig& cfg,
                              const PriceSignal& prices, const RollingOptions& opts) {
  cfg.validate();
  RollingResult out;
  out.state = ScheduleState(jobs.size());
  const auto windows = rolling_windows(prices.horizon(), opts.window_h);

  for (std::size_t k = 0; k < windows.size(); ++k) {
    const Window w = windows[k];
    WindowDiagnostics diag{static_cast<int>(k), w};
    // An early exit inside the window frees nodes; the rest of the window is
    // then re-solved from that hour with everything before it kept.
    for (int from = w.start; from <= w.end;) {
      const Window part{from, w.end};
      WindowProblem problem{part, jobs, &out.state, continuing_status(jobs, out.state, part), &prices, cfg,
                            opts.wait_cost, false};
      const auto t0 = std::chrono::steady_clock::now();
      WindowModel model;
      milp::SolveResult res;
      std::string failure;
      for (;;) {
        try {
          model = build_window_model(problem);
          if (opts.on_model && from == w.start) opts.on_model(static_cast<int>(k), model.instance);
          res = milp::solve(model.instance, opts.solver);
          if (res.assignment.size() == static_cast<std::size_t>(model.instance.num_variables())) break;
          std::string forced;
          for (int j : model.forced_jobs)
            forced += (forced.empty() ? "" : ",") + std::to_string(jobs[static_cast<std::size_t>(j)].id);
          failure = "solver status " + std::string(milp::to_string(res.status)) + "; forced jobs {" + forced + "}";
        } catch (const InfeasibleError& e) {
          failure = e.what();
        }
        if (!opts.relax_deadlines || problem.relax_deadlines)
          throw InfeasibleError(window_label(static_cast<int>(k), part) + ": " + failure);
        problem.relax_deadlines = true;
      }
      const std::chrono::duration<double, std::milli> elapsed = std::chrono::steady_clock::now() - t0;
      diag.solve_ms += elapsed.count();
      diag.relaxed = diag.relaxed || problem.relax_deadlines;
      if (from == w.start) {
        diag.objective = res.objective_value;
        diag.vars = model.instance.num_variables();
        diag.constraints = model.instance.num_constraints();
        diag.status = res.status;
        diag.nodes = res.nodes;
        diag.best_bound = res.best_bound;
      } else {
        ++diag.resolves;
      }

      auto decision = decode_decision(model, res.assignment);
      // First hour after `from` at which a running or newly started job ends early.
      int exit_at = w.end + 1;
      auto note_exit = [&](int j, int s) {
        const auto& job = jobs[static_cast<std::size_t>(j)];
        if (job.dur_act < job.dur_est && s + job.dur_act > from) exit_at = std::min(exit_at, s + job.dur_act);
      };
      for (std::size_t j = 0; j < jobs.size(); ++j)
        if (out.state[j].scheduled) note_exit(static_cast<int>(j), *out.state[j].start);
      for (const auto& d : decision) note_exit(d.job, d.t);
      std::erase_if(decision, [&](const JobStart& d) { return d.t >= exit_at; });
      out.state = commit_solution(std::move(out.state), decision, jobs);
      from = exit_at;
    }
    out.windows.push_back(diag);
  }
  return out;
}

void write_windows_csv(std::ostream& out, const std::vector<WindowDiagnostics>& windows) {
  out << "window_index,solve_ms,objective,vars,constraints,status\n";
  char buf[200];
  for (const auto& w : windows) {
    std::snprintf(buf, sizeof buf, "%d,%.1f,%.2f,%d,%d,%s\n", w.index, w.solve_ms, w.objective,
                  w.vars, w.constraints, milp::to_string(w.status));
    out << buf;
  }
}

}  // namespace dcflex
