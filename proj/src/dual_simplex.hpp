#pragma once

#include <vector>

#include "dcflex/milp.hpp"

namespace dcflex::milp::detail {

// Bounded-variable dual simplex with an explicit dense basis inverse and
// sparse columns, specialised to LP
// relaxations of binary programs: every structural column is boxed, so the
// all-slack starting basis is dual feasible and no phase one is needed.
// Bounds may be tightened or relaxed between calls; the next solve warm
// starts from the current basis.
class DualSimplex {
 public:
  enum class Status { kOptimal, kInfeasible, kIterationLimit };

  explicit DualSimplex(const MilpInstance& inst);

  Status solve(long max_iterations);

  void set_bounds(int j, double lo, double hi);
  double lower(int j) const { return lo_[j]; }
  double upper(int j) const { return hi_[j]; }

  double value(int j) const;
  double reduced_cost(int j) const { return -d_[j]; }  // in maximisation sense
  bool is_basic(int j) const { return pos_[j] >= 0; }

  // Maximisation objective of the current basic solution, constant excluded.
  double objective() const;

  long iterations() const { return iterations_; }

  // Recomputes the basis inverse and reduced costs from the original columns.
  void refactor();

  // Basis to resume from elsewhere in the search tree; bounds are not part of it.
  struct Basis {
    std::vector<int> basis;
    std::vector<char> at_upper;
  };
  void save_basis(Basis& out) const;
  // Installs a saved basis and refactors.
  void load_basis(const Basis& in);

 private:
  double nonbasic_value(int k) const { return at_upper_[k] ? hi_[k] : lo_[k]; }
  void compute_primal();
  void compute_row(int r);
  void pivot(int r, int q);
  int choose_leaving_row() const;
  int choose_entering(bool increase) const;

  int m_ = 0;
  int n_ = 0;
  int cols_ = 0;
  std::vector<int> col_start_;  // CSC structural columns
  std::vector<int> col_row_;
  std::vector<double> col_val_;
  std::vector<double> b_;
  std::vector<double> cost_;  // minimisation costs, slacks zero
  std::vector<double> lo_, hi_;
  std::vector<double> binv_;  // m x m, row r belongs to basis position r
  std::vector<double> d_;     // reduced costs
  std::vector<double> xb_;    // basic values
  std::vector<int> basis_;
  std::vector<int> pos_;
  std::vector<char> at_upper_;
  std::vector<double> alpha_row_;  // row r of B^-1 [A I]
  std::vector<double> alpha_col_;  // B^-1 a_q
  std::vector<double> work_;
  long iterations_ = 0;
  int since_refactor_ = 0;
};

}  // namespace dcflex::milp::detail
