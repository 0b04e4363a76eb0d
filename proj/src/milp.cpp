#include "dcflex/milp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "dual_simplex.hpp"

namespace dcflex::milp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kIntTol = 1e-6;
constexpr double kFeasTol = 1e-9;
constexpr long kLpIterationsPerNode = 100000;

double row_activity(const Constraint& c, std::span<const std::uint8_t> x) {
  double a = 0.0;
  for (const auto& t : c.terms)
    if (x[t.var]) a += t.coef;
  return a;
}

double violation(Sense sense, double activity, double rhs) {
  switch (sense) {
    case Sense::kLessEqual: return std::max(0.0, activity - rhs);
    case Sense::kGreaterEqual: return std::max(0.0, rhs - activity);
    case Sense::kEqual: return std::fabs(activity - rhs);
  }
  return 0.0;
}

double tie_tolerance(double value) { return 1e-9 * std::max(1.0, std::fabs(value)); }

class BranchAndBound {
 public:
  BranchAndBound(const MilpInstance& inst, const SolveOptions& opts)
      : inst_(inst), opts_(opts), lp_(inst), start_(std::chrono::steady_clock::now()),
        cols_(static_cast<std::size_t>(inst.num_variables())) {
    const auto& rows = inst.constraints();
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (const auto& t : rows[i].terms) cols_[t.var].push_back({static_cast<int>(i), t.coef});
    by_objective_.resize(cols_.size());
    for (std::size_t j = 0; j < cols_.size(); ++j) by_objective_[j] = static_cast<int>(j);
    std::stable_sort(by_objective_.begin(), by_objective_.end(),
                     [&](int a, int b) { return inst.objective()[a] > inst.objective()[b]; });
  }

  SolveResult run() {
    search();
    SolveResult res;
    res.nodes = nodes_;
    res.lp_iterations = lp_.iterations();
    if (have_incumbent_) {
      res.objective_value = incumbent_value_;
      res.assignment = incumbent_;
      res.best_bound = aborted_ ? std::max(open_bound_, incumbent_value_) : incumbent_value_;
      res.status = aborted_ && open_bound_ > incumbent_value_ + prune_tolerance()
                       ? SolveStatus::kGapLimit
                       : SolveStatus::kOptimal;
    } else {
      res.status = aborted_ ? SolveStatus::kGapLimit : SolveStatus::kInfeasible;
      res.best_bound = aborted_ ? open_bound_ : -kInf;
    }
    return res;
  }

 private:
  // An open subproblem: variable fixings (-1 free) and the basis to resume from.
  struct Node {
    double bound = kInf;
    long seq = 0;
    std::vector<std::int8_t> fix;
    detail::DualSimplex::Basis basis;
  };

  struct WorseNode {
    bool operator()(const Node& a, const Node& b) const {
      if (a.bound != b.bound) return a.bound < b.bound;
      return a.seq > b.seq;
    }
  };

  double prune_tolerance() const {
    const double scale = std::max(1.0, std::fabs(incumbent_value_));
    return std::max(opts_.rel_gap * scale, 1e-9 * scale);
  }

  bool dominated(double bound) const {
    return have_incumbent_ && bound <= incumbent_value_ + prune_tolerance();
  }

  bool out_of_budget() {
    if (nodes_ >= opts_.node_limit) return true;
    if ((nodes_ & 63) == 0 && std::isfinite(opts_.time_limit_s)) {
      const std::chrono::duration<double> el = std::chrono::steady_clock::now() - start_;
      if (el.count() > opts_.time_limit_s) return true;
    }
    return false;
  }

  void apply(const std::vector<std::int8_t>& fix) {
    for (int j = 0; j < inst_.num_variables(); ++j) {
      const double lo = fix[j] == 1 ? 1.0 : 0.0, hi = fix[j] == 0 ? 0.0 : 1.0;
      if (lp_.lower(j) != lo || lp_.upper(j) != hi) lp_.set_bounds(j, lo, hi);
    }
  }

  // Depth-first until the first incumbent, then best bound with plunging:
  // after each node the search dives into its 1-branch and queues the
  // 0-branch, resuming from the open node with the highest bound once a
  // dive ends.
  void search() {
    std::vector<Node> open;
    bool heap = false;
    long seq = 0;
    std::vector<std::int8_t> fix(static_cast<std::size_t>(inst_.num_variables()), -1);
    double parent_bound = kInf;
    bool diving = true;
    for (;;) {
      if (!diving) {
        if (have_incumbent_ && !heap) {
          std::erase_if(open, [&](const Node& n) { return dominated(n.bound); });
          std::make_heap(open.begin(), open.end(), WorseNode{});
          heap = true;
        }
        Node node;
        for (;;) {
          if (open.empty()) return;
          if (heap) std::pop_heap(open.begin(), open.end(), WorseNode{});
          node = std::move(open.back());
          open.pop_back();
          if (!dominated(node.bound)) break;
        }
        fix = std::move(node.fix);
        parent_bound = node.bound;
        apply(fix);
        lp_.load_basis(node.basis);
      }
      if (out_of_budget()) {
        aborted_ = true;
        open_bound_ = std::max(open_bound_, parent_bound);
        for (const auto& n : open) open_bound_ = std::max(open_bound_, n.bound);
        return;
      }
      diving = process(fix, parent_bound, open, heap, seq);
    }
  }

  // Solves the node under the current bounds. Returns true with `fix` and
  // `parent_bound` set to the 1-branch child when the dive continues.
  bool process(std::vector<std::int8_t>& fix, double& parent_bound, std::vector<Node>& open,
               bool heap, long& seq) {
    const bool root = nodes_ == 0;
    ++nodes_;
    auto status = lp_.solve(kLpIterationsPerNode);
    if (status == detail::DualSimplex::Status::kIterationLimit) {
      lp_.refactor();
      status = lp_.solve(kLpIterationsPerNode);
    }
    if (status == detail::DualSimplex::Status::kInfeasible) return false;
    if (status == detail::DualSimplex::Status::kIterationLimit) {
      // Give the node up unsolved; its bound stays open.
      aborted_ = true;
      open_bound_ = std::max(open_bound_, parent_bound);
      return false;
    }

    const double lp_value = lp_.objective() + inst_.objective_constant();
    const double bound = std::min(parent_bound, lp_value);
    if (dominated(bound)) return false;

    const int n = inst_.num_variables();
    int branch_var = -1;
    for (int j = 0; j < n; ++j) {
      const double v = lp_.value(j);
      if (v > kIntTol && v < 1.0 - kIntTol) {
        branch_var = j;
        break;
      }
    }
    if (branch_var < 0) {
      offer_integral();
      return false;
    }
    if (root) {
      round_greedily();
      if (dominated(bound)) return false;
    }

    // Reduced-cost fixing: a nonbasic column whose move off its bound would
    // drop the LP bound below the incumbent stays put in this subtree.
    if (have_incumbent_) {
      const double slack = lp_value - incumbent_value_ - prune_tolerance();
      for (int j = 0; j < n; ++j) {
        if (lp_.is_basic(j) || lp_.lower(j) == lp_.upper(j)) continue;
        const double v = lp_.value(j);
        const double rc = lp_.reduced_cost(j);
        if (v < 0.5 && -rc > slack) {
          lp_.set_bounds(j, 0.0, 0.0);
          fix[j] = 0;
        } else if (v > 0.5 && rc > slack) {
          lp_.set_bounds(j, 1.0, 1.0);
          fix[j] = 1;
        }
      }
    }

    Node zero{bound, seq++, fix, {}};
    zero.fix[branch_var] = 0;
    lp_.save_basis(zero.basis);
    open.push_back(std::move(zero));
    if (heap) std::push_heap(open.begin(), open.end(), WorseNode{});
    fix[branch_var] = 1;
    lp_.set_bounds(branch_var, 1.0, 1.0);
    parent_bound = bound;
    return true;
  }

  // Packing rounding: switch variables on in order of LP value while every
  // row stays within its right-hand side. Only meaningful when all
  // coefficients are nonnegative and no row is a lower bound.
  void round_greedily() {
    const int n = inst_.num_variables();
    const auto& rows = inst_.constraints();
    std::vector<std::vector<std::pair<int, double>>> cols(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].sense == Sense::kGreaterEqual) return;
      for (const auto& t : rows[i].terms) {
        if (t.coef < 0.0) return;
        cols[t.var].push_back({static_cast<int>(i), t.coef});
      }
    }
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) order[j] = j;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      const double va = lp_.value(a), vb = lp_.value(b);
      if (va != vb) return va > vb;
      return inst_.objective()[a] > inst_.objective()[b];
    });
    std::vector<double> activity(rows.size(), 0.0);
    candidate_.assign(static_cast<std::size_t>(n), 0);
    for (int j : order) {
      if (lp_.upper(j) < 0.5 || (inst_.objective()[j] <= 0.0 && lp_.value(j) < 0.5)) continue;
      bool fits = true;
      for (const auto& [i, a] : cols[j]) fits = fits && activity[i] + a <= rows[i].rhs + kFeasTol;
      if (!fits) continue;
      for (const auto& [i, a] : cols[j]) activity[i] += a;
      candidate_[j] = 1;
    }
    offer_candidate();
  }

  void offer_integral() {
    const int n = inst_.num_variables();
    candidate_.assign(static_cast<std::size_t>(n), 0);
    for (int j = 0; j < n; ++j) candidate_[j] = lp_.value(j) > 0.5 ? 1 : 0;
    offer_candidate();
  }

  // Local search from a new best solution: single flips, and swaps that turn
  // one variable off and another on, taken while they gain and stay feasible.
  void improve(std::vector<std::uint8_t>& x) {
    const auto& rows = inst_.constraints();
    const auto& c = inst_.objective();
    std::vector<double> activity(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) activity[i] = row_activity(rows[i], x);
    auto shift = [&](int j, double sign) {
      for (const auto& [i, a] : cols_[j]) activity[i] += sign * a;
    };
    auto rows_ok = [&](int j) {
      for (const auto& [i, a] : cols_[j])
        if (violation(rows[i].sense, activity[i], rows[i].rhs) > kFeasTol) return false;
      return true;
    };
    const int n = inst_.num_variables();
    for (int pass = 0; pass < 1000; ++pass) {
      bool moved = false;
      for (int j = 0; j < n; ++j) {
        const double gain = x[j] ? -c[j] : c[j];
        if (gain <= kFeasTol) continue;
        const double sign = x[j] ? -1.0 : 1.0;
        shift(j, sign);
        if (rows_ok(j)) {
          x[j] ^= 1;
          moved = true;
        } else {
          shift(j, -sign);
        }
      }
      for (int i = 0; i < n; ++i) {
        if (!x[i]) continue;
        shift(i, -1.0);
        for (int j : by_objective_) {
          if (c[j] - c[i] <= kFeasTol) break;
          if (x[j]) continue;
          shift(j, 1.0);
          if (rows_ok(i) && rows_ok(j)) {
            x[i] = 0;
            x[j] = 1;
            moved = true;
            break;
          }
          shift(j, -1.0);
        }
        if (x[i]) shift(i, 1.0);
      }
      if (!moved) break;
    }
  }

  void offer_candidate() {
    if (inst_.max_violation(candidate_) > kFeasTol) return;
    double value = inst_.evaluate(candidate_);
    if (!have_incumbent_ || value > incumbent_value_ + tie_tolerance(value)) {
      improve(candidate_);
      value = inst_.evaluate(candidate_);
    }
    const bool better = !have_incumbent_ || value > incumbent_value_ + tie_tolerance(value);
    const bool tie = have_incumbent_ && std::fabs(value - incumbent_value_) <= tie_tolerance(value);
    if (better || (tie && candidate_ < incumbent_)) {
      have_incumbent_ = true;
      incumbent_value_ = value;
      incumbent_ = candidate_;
    }
  }

  const MilpInstance& inst_;
  SolveOptions opts_;
  detail::DualSimplex lp_;
  std::chrono::steady_clock::time_point start_;
  long nodes_ = 0;
  bool aborted_ = false;
  double open_bound_ = -kInf;
  bool have_incumbent_ = false;
  double incumbent_value_ = -kInf;
  std::vector<std::uint8_t> incumbent_;
  std::vector<std::uint8_t> candidate_;
  std::vector<std::vector<std::pair<int, double>>> cols_;
  std::vector<int> by_objective_;  // variables by decreasing objective coefficient
};

}  // namespace

int MilpInstance::add_variable(std::string name, double objective) {
  if (!std::isfinite(objective)) throw std::invalid_argument("non-finite objective coefficient");
  objective_.push_back(objective);
  names_.push_back(std::move(name));
  return static_cast<int>(objective_.size()) - 1;
}

void MilpInstance::add_constraint(std::vector<Term> terms, Sense sense, double rhs,
                                  std::string name) {
  if (!std::isfinite(rhs)) throw std::invalid_argument("non-finite right-hand side");
  for (const auto& t : terms) {
    if (t.var < 0 || t.var >= num_variables())
      throw std::invalid_argument("constraint references undeclared variable " +
                                  std::to_string(t.var));
    if (!std::isfinite(t.coef)) throw std::invalid_argument("non-finite constraint coefficient");
  }
  constraints_.push_back(Constraint{std::move(terms), sense, rhs, std::move(name)});
}

double MilpInstance::evaluate(std::span<const std::uint8_t> x) const {
  double z = constant_;
  for (std::size_t j = 0; j < objective_.size(); ++j)
    if (x[j]) z += objective_[j];
  return z;
}

double MilpInstance::max_violation(std::span<const std::uint8_t> x) const {
  double worst = 0.0;
  for (const auto& c : constraints_)
    worst = std::max(worst, violation(c.sense, row_activity(c, x), c.rhs));
  return worst;
}

void MilpInstance::write_lp(std::ostream& out) const {
  auto var_name = [&](int j) {
    return names_[j].empty() ? "x" + std::to_string(j) : names_[j];
  };
  auto write_coef = [&](double c, bool first) {
    if (c < 0) out << (first ? "- " : " - ");
    else if (!first) out << " + ";
    out << std::abs(c) << ' ';
  };
  out.precision(17);
  out << "Maximize\n obj:";
  bool first = true;
  for (int j = 0; j < num_variables(); ++j) {
    out << (first ? " " : "");
    write_coef(objective_[j], first);
    out << var_name(j);
    first = false;
  }
  if (constant_ != 0.0 || first) {
    if (first) out << ' ';
    write_coef(constant_, first);
    out << "constant";
  }
  out << "\nSubject To\n";
  for (std::size_t i = 0; i < constraints_.size(); ++i) {
    const auto& c = constraints_[i];
    const std::string name = c.name.empty() ? "c" + std::to_string(i) : c.name;
    if (c.terms.empty()) {
      out << "\\ " << name << ": empty row, rhs " << c.rhs << '\n';
      continue;
    }
    out << ' ' << name << ": ";
    bool f = true;
    for (const auto& t : c.terms) {
      write_coef(t.coef, f);
      out << var_name(t.var);
      f = false;
    }
    out << (c.sense == Sense::kLessEqual ? " <= " : c.sense == Sense::kGreaterEqual ? " >= " : " = ")
        << c.rhs << '\n';
  }
  if (constant_ != 0.0 || num_variables() == 0) out << "Bounds\n constant = 1\n";
  out << "Binaries\n";
  for (int j = 0; j < num_variables(); ++j) out << ' ' << var_name(j) << '\n';
  out << "End\n";
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kGapLimit: return "gap-limit";
  }
  return "unknown";
}

SolveResult solve(const MilpInstance& inst, const SolveOptions& opts) {
  if (!(opts.rel_gap >= 0.0)) throw std::invalid_argument("rel_gap must be >= 0");
  return BranchAndBound(inst, opts).run();
}

SolveResult brute_force(const MilpInstance& inst) {
  const int n = inst.num_variables();
  if (n > kBruteForceMaxVars)
    throw std::invalid_argument("brute_force refuses " + std::to_string(n) + " variables");
  const int m = inst.num_constraints();

  // Variable j maps to bit n-1-j so numeric order on masks is lexicographic
  // order on assignment vectors.
  std::vector<double> column(static_cast<std::size_t>(n) * m, 0.0);
  for (int i = 0; i < m; ++i)
    for (const auto& t : inst.constraints()[i].terms) column[t.var * m + i] += t.coef;
  std::vector<double> activity(static_cast<std::size_t>(m), 0.0);

  auto feasible = [&] {
    for (int i = 0; i < m; ++i) {
      const auto& c = inst.constraints()[i];
      if (violation(c.sense, activity[i], c.rhs) > kFeasTol) return false;
    }
    return true;
  };

  SolveResult res;
  res.status = SolveStatus::kInfeasible;
  bool found = false;
  std::uint32_t best_mask = 0;
  double best = -kInf;
  std::uint32_t mask = 0;
  double value = inst.objective_constant();
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t step = 0; step < total; ++step) {
    if (step > 0) {
      const int bit = __builtin_ctzll(step);
      const int j = n - 1 - bit;
      const bool on = !(mask >> bit & 1u);
      mask ^= 1u << bit;
      const double sign = on ? 1.0 : -1.0;
      value += sign * inst.objective()[j];
      for (int i = 0; i < m; ++i) activity[i] += sign * column[j * m + i];
    }
    if (!feasible()) continue;
    const double tol = tie_tolerance(value);
    if (!found || value > best + tol || (std::fabs(value - best) <= tol && mask < best_mask)) {
      found = true;
      best = value;
      best_mask = mask;
    }
    ++res.nodes;
  }
  if (!found) return res;

  res.status = SolveStatus::kOptimal;
  res.assignment.assign(static_cast<std::size_t>(n), 0);
  for (int j = 0; j < n; ++j) res.assignment[j] = best_mask >> (n - 1 - j) & 1u;
  // Recomputed from scratch so accumulated floating error cannot leak out.
  res.objective_value = inst.evaluate(res.assignment);
  res.best_bound = res.objective_value;
  return res;
}

}  // namespace dcflex::milp
