#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dcflex/facility.hpp"
#include "dcflex/milp.hpp"
#include "dcflex/pricing.hpp"
#include "dcflex/schedule.hpp"
#include "dcflex/workload.hpp"

namespace dcflex {

inline constexpr double kDefaultWaitCost = 0.40;
inline constexpr double kMissPenalty = 1000.0;  // $ per GPU
inline constexpr double kLatePenalty = 10.0;    // $ per GPU-hour

// Inclusive hour range [start, end].
struct Window {
  int start = 0;
  int end = 0;
  int length() const { return end - start + 1; }
  bool operator==(const Window&) const = default;
};

// Window k covers [k*H, min((k+1)*H - 1, horizon - 1)], k = 0..floor((horizon-1)/H).
std::vector<Window> rolling_windows(int horizon, int window_h);

// Start times s inside `window` that leave a job of `duration` hours arrived
// at `arrival` running at hour t: max(arrival, t - duration + 1) <= s <= t.
std::vector<int> active_start_set(int arrival, int duration, int t, Window window);

// Jobs still running at window start from earlier commitments. A job whose
// actual end lies at or before the window start is known to have finished;
// otherwise the planner assumes it runs to its estimated end.
std::vector<std::vector<std::uint8_t>> continuing_status(std::span<const Job> jobs,
                                                         const ScheduleState& state,
                                                         Window window);

struct WindowProblem {
  Window window;
  std::span<const Job> jobs;
  const ScheduleState* state = nullptr;
  std::vector<std::vector<std::uint8_t>> cont;  // [job][t - window.start]
  const PriceSignal* prices = nullptr;          // full horizon series
  DataCenterConfig cfg;
  double wait_cost = kDefaultWaitCost;           // $ per GPU-hour between arrival and start
  bool relax_deadlines = false;
};

struct StartVar {
  int job = 0;  // index into WindowProblem::jobs
  int t = 0;
  bool tentative = false;  // start after the window; reserves capacity, never committed
};

struct WindowModel {
  milp::MilpInstance instance;
  std::vector<StartVar> vars;     // parallel to the instance's variables
  std::vector<int> forced_jobs;   // jobs whose wait deadline falls in the window
};

// Builds the profit-maximising start-time model for one window.
//
// A start earns c_gpu * g * d_est and pays the cooled energy of its whole
// estimated run plus wait_cost per GPU-hour of queueing. Capacity rows cover
// every hour a start can still occupy, so commitments never overfill a later
// window. Unscheduled jobs whose deadline (arrival + max wait) is inside the
// window must start by it. Other pending jobs may instead take a tentative
// start after the window (up to their deadline); tentative starts hold
// capacity but are dropped by decode_decision. Starts that would run past
// the horizon are not offered.
// Throws InfeasibleError when a forced job can never fit.
//
// With relax_deadlines, forced jobs may start anywhere in the window or not
// at all; the objective then charges kMissPenalty per GPU for leaving one
// unstarted and kLatePenalty per GPU-hour past its deadline.
WindowModel build_window_model(const WindowProblem& p);

struct JobStart {
  int job = 0;
  int t = 0;
};

using StartDecision = std::vector<JobStart>;

StartDecision decode_decision(const WindowModel& model, std::span<const std::uint8_t> assignment);

// Marks each started job scheduled with end = start + estimated duration.
// Throws std::logic_error when a job is committed twice.
ScheduleState commit_solution(ScheduleState state, const StartDecision& decision,
                              std::span<const Job> jobs);

// Solver figures are those of the whole-window solve; solve_ms includes re-solves.
struct WindowDiagnostics {
  int index = 0;
  Window window;
  double solve_ms = 0.0;
  double objective = 0.0;
  int vars = 0;
  int constraints = 0;
  milp::SolveStatus status = milp::SolveStatus::kOptimal;
  long nodes = 0;
  double best_bound = 0.0;
  bool relaxed = false;  // deadlines were softened after a hard failure
  int resolves = 0;      // re-solves after early exits inside the window
};

struct RollingOptions {
  int window_h = 24;
  double wait_cost = kDefaultWaitCost;
  // Retry an infeasible window with softened deadlines instead of aborting.
  bool relax_deadlines = false;
  milp::SolveOptions solver;
  // Called with every built window model before it is solved.
  std::function<void(int, const milp::MilpInstance&)> on_model;
};

struct RollingResult {
  ScheduleState state;  // planned ends (start + estimated duration)
  std::vector<WindowDiagnostics> windows;
};

// Solves the windows in order and commits their starts. When a job ends
// before its estimate inside a window, only starts before that hour are kept
// and the remainder of the window is solved again.
// Throws InfeasibleError naming the window and its forced jobs when a window
// model has no feasible solution.
RollingResult rolling_horizon(std::span<const Job> jobs, const DataCenterConfig& cfg,
                              const PriceSignal& prices, const RollingOptions& opts);

// windows.csv: window_index,solve_ms,objective,vars,constraints,status
void write_windows_csv(std::ostream& out, const std::vector<WindowDiagnostics>& windows);

}  // namespace dcflex
