#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace dcflex::milp {

enum class Sense { kLessEqual, kGreaterEqual, kEqual };

struct Term {
  int var = 0;
  double coef = 0.0;
};

struct Constraint {
  std::vector<Term> terms;
  Sense sense = Sense::kLessEqual;
  double rhs = 0.0;
  std::string name;
};

// Maximization over binary variables: objective_constant + sum(c_i x_i)
// subject to linear rows. Immutable once handed to a solver.
class MilpInstance {
 public:
  int add_variable(std::string name, double objective);

  // Throws std::invalid_argument for undeclared variables or non-finite data.
  void add_constraint(std::vector<Term> terms, Sense sense, double rhs, std::string name = {});

  void set_objective_constant(double c) { constant_ = c; }

  int num_variables() const { return static_cast<int>(objective_.size()); }
  int num_constraints() const { return static_cast<int>(constraints_.size()); }
  const std::vector<double>& objective() const { return objective_; }
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }
  double objective_constant() const { return constant_; }

  double evaluate(std::span<const std::uint8_t> x) const;

  // Largest amount by which any row is violated (0 when feasible).
  double max_violation(std::span<const std::uint8_t> x) const;

  // CPLEX LP text format, readable by most external solvers.
  void write_lp(std::ostream& out) const;

 private:
  std::vector<double> objective_;
  std::vector<std::string> names_;
  std::vector<Constraint> constraints_;
  double constant_ = 0.0;
};

enum class SolveStatus { kOptimal, kInfeasible, kGapLimit };

const char* to_string(SolveStatus s);

struct SolveResult {
  SolveStatus status = SolveStatus::kInfeasible;
  double objective_value = 0.0;
  std::vector<std::uint8_t> assignment;  // empty when no incumbent exists
  double best_bound = 0.0;
  long nodes = 0;
  long lp_iterations = 0;
};

struct SolveOptions {
  double rel_gap = 1e-6;
  double time_limit_s = std::numeric_limits<double>::infinity();
  long node_limit = std::numeric_limits<long>::max();
};

// Branch and bound over LP relaxations solved by a bounded dual simplex.
// Branches on the lowest-index fractional variable and dives into the
// 1-branch; open 0-branches are resumed last in first out until an incumbent
// exists, then best bound first. The root LP is
// rounded greedily for a first incumbent, each new incumbent is polished by
// flip and swap moves, and reduced costs fix columns inside each subtree.
// Among incumbents of equal value the lexicographically smaller one is kept.
SolveResult solve(const MilpInstance& inst, const SolveOptions& opts = {});

inline constexpr int kBruteForceMaxVars = 24;

// Exhaustive enumeration; returns the lexicographically smallest optimum.
// Throws std::invalid_argument above kBruteForceMaxVars variables.
SolveResult brute_force(const MilpInstance& inst);

}  // namespace dcflex::milp
