#include "gridplan/lp.hpp"

#include <algorithm>
#include <cmath>

#include "gridplan/errors.hpp"

namespace gridplan::lp {

int Problem::add_var(double lo, double up, double cost) {
  if (lo > up) throw InputError("variable with lo > up");
  obj_.push_back(cost);
  col_lo_.push_back(lo);
  col_up_.push_back(up);
  return num_vars() - 1;
}

int Problem::add_row(double lo, double up,
                     std::span<const std::pair<int, double>> entries) {
  if (lo > up) throw InputError("row with lo > up");
  const int r = num_rows();
  row_lo_.push_back(lo);
  row_up_.push_back(up);
  for (const auto& [col, val] : entries) {
    if (col < 0 || col >= num_vars()) throw InputError("row references unknown variable");
    if (val != 0.0) entries_.emplace_back(r, col, val);
  }
  return r;
}

Eigen::SparseMatrix<double> Problem::matrix() const {
  Eigen::SparseMatrix<double> a(num_rows(), num_vars());
  a.setFromTriplets(entries_.begin(), entries_.end());  // duplicates summed
  a.makeCompressed();
  return a;
}

double Problem::objective_value(std::span<const double> x) const {
  double v = 0.0;
  for (int j = 0; j < num_vars(); ++j) v += obj_[j] * x[j];
  return v;
}

double Problem::max_bound_violation(std::span<const double> x) const {
  double worst = 0.0;
  for (int j = 0; j < num_vars(); ++j) {
    const double lo = col_lo_[j], up = col_up_[j];
    double v = 0.0;
    if (x[j] < lo) v = (lo - x[j]) / std::max(1.0, std::fabs(lo));
    if (x[j] > up) v = (x[j] - up) / std::max(1.0, std::fabs(up));
    worst = std::max(worst, v);
  }
  std::vector<double> act(num_rows(), 0.0);
  for (const auto& t : entries_) act[t.row()] += t.value() * x[t.col()];
  for (int i = 0; i < num_rows(); ++i) {
    const double lo = row_lo_[i], up = row_up_[i];
    double v = 0.0;
    if (act[i] < lo) v = (lo - act[i]) / std::max(1.0, std::fabs(lo));
    if (act[i] > up) v = (act[i] - up) / std::max(1.0, std::fabs(up));
    worst = std::max(worst, v);
  }
  return worst;
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::IterationLimit: return "iteration_limit";
    case SolveStatus::TimeLimit: return "time_limit";
    case SolveStatus::NumericalFailure: return "numerical_failure";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
  }
  return "unknown";
}

}  // namespace gridplan::lp
