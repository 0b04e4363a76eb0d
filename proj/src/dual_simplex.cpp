#include "dual_simplex.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace dcflex::milp::detail {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPrimalTol = 1e-9;
constexpr double kDualTol = 1e-9;
constexpr double kPivotTol = 1e-9;
constexpr int kRefactorEvery = 200;

}  // namespace

DualSimplex::DualSimplex(const MilpInstance& inst)
    : m_(inst.num_constraints()), n_(inst.num_variables()), cols_(n_ + m_) {
  const auto m = static_cast<std::size_t>(m_);
  const auto cols = static_cast<std::size_t>(cols_);
  b_.resize(m);
  cost_.assign(cols, 0.0);
  lo_.assign(cols, 0.0);
  hi_.assign(cols, 1.0);
  for (int j = 0; j < n_; ++j) cost_[j] = -inst.objective()[j];

  std::vector<std::vector<std::pair<int, double>>> cols_tmp(static_cast<std::size_t>(n_));
  for (int i = 0; i < m_; ++i) {
    const auto& row = inst.constraints()[i];
    for (const auto& t : row.terms) {
      auto& c = cols_tmp[t.var];
      if (!c.empty() && c.back().first == i) c.back().second += t.coef;
      else c.emplace_back(i, t.coef);
    }
    b_[i] = row.rhs;
    const int s = n_ + i;
    switch (row.sense) {
      case Sense::kLessEqual: lo_[s] = 0.0; hi_[s] = kInf; break;
      case Sense::kGreaterEqual: lo_[s] = -kInf; hi_[s] = 0.0; break;
      case Sense::kEqual: lo_[s] = 0.0; hi_[s] = 0.0; break;
    }
  }
  col_start_.assign(static_cast<std::size_t>(n_) + 1, 0);
  for (int j = 0; j < n_; ++j) {
    for (const auto& [i, v] : cols_tmp[j]) {
      if (v == 0.0) continue;
      col_row_.push_back(i);
      col_val_.push_back(v);
    }
    col_start_[j + 1] = static_cast<int>(col_row_.size());
  }

  binv_.assign(m * m, 0.0);
  for (std::size_t i = 0; i < m; ++i) binv_[i * m + i] = 1.0;
  d_ = cost_;
  basis_.resize(m);
  pos_.assign(cols, -1);
  at_upper_.assign(cols, 0);
  for (int i = 0; i < m_; ++i) {
    basis_[i] = n_ + i;
    pos_[n_ + i] = i;
  }
  for (int j = 0; j < n_; ++j) at_upper_[j] = d_[j] < 0.0;
  xb_.resize(m);
  work_.resize(m);
  alpha_row_.resize(cols);
  alpha_col_.resize(m);
}

void DualSimplex::set_bounds(int j, double lo, double hi) {
  lo_[j] = lo;
  hi_[j] = hi;
  if (pos_[j] < 0) at_upper_[j] = lo == hi ? 0 : d_[j] < 0.0;
}

double DualSimplex::value(int j) const {
  return pos_[j] >= 0 ? xb_[pos_[j]] : nonbasic_value(j);
}

double DualSimplex::objective() const {
  double z = 0.0;
  for (int j = 0; j < n_; ++j) z -= cost_[j] * value(j);
  return z;
}

void DualSimplex::compute_primal() {
  const auto m = static_cast<std::size_t>(m_);
  work_ = b_;
  for (int k = 0; k < cols_; ++k) {
    if (pos_[k] >= 0) continue;
    const double v = nonbasic_value(k);
    if (v == 0.0) continue;
    if (k < n_) {
      for (int e = col_start_[k]; e < col_start_[k + 1]; ++e) work_[col_row_[e]] -= col_val_[e] * v;
    } else {
      work_[k - n_] -= v;
    }
  }
  for (std::size_t r = 0; r < m; ++r) {
    const double* row = &binv_[r * m];
    double x = 0.0;
    for (std::size_t i = 0; i < m; ++i) x += row[i] * work_[i];
    xb_[r] = x;
  }
}

int DualSimplex::choose_leaving_row() const {
  int best = -1;
  double worst = kPrimalTol;
  for (int r = 0; r < m_; ++r) {
    const int p = basis_[r];
    const double scale = 1.0 + std::fabs(xb_[r]);
    const double infeas = std::max(lo_[p] - xb_[r], xb_[r] - hi_[p]) / scale;
    if (infeas > worst) {
      worst = infeas;
      best = r;
    }
  }
  return best;
}

void DualSimplex::compute_row(int r) {
  const double* rho = &binv_[static_cast<std::size_t>(r) * m_];
  for (int k = 0; k < n_; ++k) {
    if (pos_[k] >= 0) {
      alpha_row_[k] = 0.0;
      continue;
    }
    double a = 0.0;
    for (int e = col_start_[k]; e < col_start_[k + 1]; ++e) a += rho[col_row_[e]] * col_val_[e];
    alpha_row_[k] = a;
  }
  for (int i = 0; i < m_; ++i) alpha_row_[n_ + i] = pos_[n_ + i] >= 0 ? 0.0 : rho[i];
  alpha_row_[basis_[r]] = 1.0;
}

int DualSimplex::choose_entering(bool increase) const {
  const double* row = alpha_row_.data();
  const double dir = increase ? 1.0 : -1.0;

  // Harris two-pass ratio test: relax dual feasibility by kDualTol to find
  // the admissible step, then take the largest pivot inside it.
  double bound = kInf;
  for (int k = 0; k < cols_; ++k) {
    if (pos_[k] >= 0 || lo_[k] == hi_[k]) continue;
    const double s = at_upper_[k] ? -1.0 : 1.0;
    const double alpha = row[k];
    if (dir * alpha * s >= -kPivotTol) continue;
    const double ratio = (std::max(s * d_[k], 0.0) + kDualTol) / std::fabs(alpha);
    if (ratio < bound) bound = ratio;
  }
  if (bound == kInf) return -1;

  int best = -1;
  double best_alpha = 0.0;
  for (int k = 0; k < cols_; ++k) {
    if (pos_[k] >= 0 || lo_[k] == hi_[k]) continue;
    const double s = at_upper_[k] ? -1.0 : 1.0;
    const double alpha = row[k];
    if (dir * alpha * s >= -kPivotTol) continue;
    const double ratio = std::max(s * d_[k], 0.0) / std::fabs(alpha);
    if (ratio <= bound && std::fabs(alpha) > best_alpha) {
      best_alpha = std::fabs(alpha);
      best = k;
    }
  }
  return best;
}

void DualSimplex::pivot(int r, int q) {
  const auto m = static_cast<std::size_t>(m_);
  // Entering column in the current basis.
  if (q < n_) {
    for (std::size_t i = 0; i < m; ++i) {
      const double* row = &binv_[i * m];
      double a = 0.0;
      for (int e = col_start_[q]; e < col_start_[q + 1]; ++e) a += row[col_row_[e]] * col_val_[e];
      alpha_col_[i] = a;
    }
  } else {
    for (std::size_t i = 0; i < m; ++i) alpha_col_[i] = binv_[i * m + static_cast<std::size_t>(q - n_)];
  }

  const double inv = 1.0 / alpha_col_[r];
  double* prow = &binv_[static_cast<std::size_t>(r) * m];
  for (std::size_t k = 0; k < m; ++k) prow[k] *= inv;
  for (std::size_t i = 0; i < m; ++i) {
    if (i == static_cast<std::size_t>(r)) continue;
    const double f = alpha_col_[i];
    if (f == 0.0) continue;
    double* row = &binv_[i * m];
    for (std::size_t k = 0; k < m; ++k) row[k] -= f * prow[k];
  }

  const double theta = d_[q] / alpha_row_[q];
  if (theta != 0.0) {
    for (int k = 0; k < cols_; ++k)
      if (alpha_row_[k] != 0.0) d_[k] -= theta * alpha_row_[k];
  }
  d_[q] = 0.0;

  const int p = basis_[r];
  pos_[p] = -1;
  basis_[r] = q;
  pos_[q] = r;
  ++since_refactor_;
}

void DualSimplex::refactor() {
  const auto m = static_cast<std::size_t>(m_);
  if (m == 0) {
    d_ = cost_;
    since_refactor_ = 0;
    return;
  }

  // Gauss-Jordan inverse of the basis matrix with partial pivoting.
  std::vector<double> bmat(m * m, 0.0);
  std::fill(binv_.begin(), binv_.end(), 0.0);
  for (std::size_t c = 0; c < m; ++c) {
    const int k = basis_[c];
    if (k < n_) {
      for (int e = col_start_[k]; e < col_start_[k + 1]; ++e)
        bmat[static_cast<std::size_t>(col_row_[e]) * m + c] = col_val_[e];
    } else {
      bmat[static_cast<std::size_t>(k - n_) * m + c] = 1.0;
    }
    binv_[c * m + c] = 1.0;
  }
  for (std::size_t c = 0; c < m; ++c) {
    std::size_t piv = c;
    for (std::size_t i = c + 1; i < m; ++i)
      if (std::fabs(bmat[i * m + c]) > std::fabs(bmat[piv * m + c])) piv = i;
    if (std::fabs(bmat[piv * m + c]) < 1e-12) throw std::runtime_error("singular simplex basis");
    if (piv != c)
      for (std::size_t k = 0; k < m; ++k) {
        std::swap(bmat[c * m + k], bmat[piv * m + k]);
        std::swap(binv_[c * m + k], binv_[piv * m + k]);
      }
    const double inv = 1.0 / bmat[c * m + c];
    for (std::size_t k = 0; k < m; ++k) {
      bmat[c * m + k] *= inv;
      binv_[c * m + k] *= inv;
    }
    for (std::size_t i = 0; i < m; ++i) {
      if (i == c) continue;
      const double f = bmat[i * m + c];
      if (f == 0.0) continue;
      for (std::size_t k = 0; k < m; ++k) {
        bmat[i * m + k] -= f * bmat[c * m + k];
        binv_[i * m + k] -= f * binv_[c * m + k];
      }
    }
  }

  // Duals y = c_B B^-1, then d = c - y [A I].
  std::vector<double> y(m, 0.0);
  for (std::size_t r = 0; r < m; ++r) {
    const double cb = cost_[basis_[r]];
    if (cb == 0.0) continue;
    for (std::size_t i = 0; i < m; ++i) y[i] += cb * binv_[r * m + i];
  }
  for (int k = 0; k < n_; ++k) {
    double a = 0.0;
    for (int e = col_start_[k]; e < col_start_[k + 1]; ++e) a += y[col_row_[e]] * col_val_[e];
    d_[k] = cost_[k] - a;
  }
  for (int i = 0; i < m_; ++i) d_[n_ + i] = -y[i];
  for (int r = 0; r < m_; ++r) d_[basis_[r]] = 0.0;
  since_refactor_ = 0;
}

void DualSimplex::save_basis(Basis& out) const {
  out.basis = basis_;
  out.at_upper = at_upper_;
}

void DualSimplex::load_basis(const Basis& in) {
  basis_ = in.basis;
  at_upper_ = in.at_upper;
  std::fill(pos_.begin(), pos_.end(), -1);
  for (int r = 0; r < m_; ++r) pos_[basis_[r]] = r;
  refactor();
}

DualSimplex::Status DualSimplex::solve(long max_iterations) {
  // Dual feasibility is restored by bound flips, available to every boxed
  // column; slack reduced costs never change sign between solves.
  for (int k = 0; k < n_; ++k)
    if (pos_[k] < 0 && lo_[k] != hi_[k]) at_upper_[k] = d_[k] < 0.0;
  compute_primal();

  for (long it = 0; it < max_iterations; ++it) {
    if (since_refactor_ >= kRefactorEvery) {
      refactor();
      for (int k = 0; k < n_; ++k)
        if (pos_[k] < 0 && lo_[k] != hi_[k]) at_upper_[k] = d_[k] < 0.0;
      compute_primal();
    }
    const int r = choose_leaving_row();
    if (r < 0) return Status::kOptimal;
    const int p = basis_[r];
    const bool increase = xb_[r] < lo_[p];
    compute_row(r);
    const int q = choose_entering(increase);
    if (q < 0) return Status::kInfeasible;

    pivot(r, q);
    at_upper_[p] = (!increase && lo_[p] != hi_[p]) ? 1 : 0;
    for (int k = 0; k < n_; ++k) {
      if (pos_[k] >= 0 || lo_[k] == hi_[k]) continue;
      if (!at_upper_[k] && d_[k] < -kDualTol) at_upper_[k] = 1;
      else if (at_upper_[k] && d_[k] > kDualTol) at_upper_[k] = 0;
    }
    compute_primal();
    ++iterations_;
  }
  return Status::kIterationLimit;
}

}  // namespace dcflex::milp::detail
