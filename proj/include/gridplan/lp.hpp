#pragma once

#include <Eigen/SparseCore>

#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace gridplan::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Linear program in the form
//
//   minimize    c'x
//   subject to  row_lo <= A x <= row_up
//               col_lo <=   x <= col_up
//
// Rows with row_lo == row_up are equalities; any bound may be +-infinity.
class Problem {
 public:
  int add_var(double lo, double up, double cost);
  // Entries may be in any column order; duplicate columns are summed.
  int add_row(double lo, double up,
              std::span<const std::pair<int, double>> entries);

  int num_vars() const { return static_cast<int>(obj_.size()); }
  int num_rows() const { return static_cast<int>(row_lo_.size()); }

  const std::vector<double>& obj() const { return obj_; }
  const std::vector<double>& col_lo() const { return col_lo_; }
  const std::vector<double>& col_up() const { return col_up_; }
  const std::vector<double>& row_lo() const { return row_lo_; }
  const std::vector<double>& row_up() const { return row_up_; }

  // Column-major constraint matrix (built on demand).
  Eigen::SparseMatrix<double> matrix() const;

  // Objective value of a given point (no feasibility check).
  double objective_value(std::span<const double> x) const;

  // Max-norm violation of row and column bounds at x, each scaled by
  // 1/max(1,|bound|); used by tests and the model layer's invariant checks.
  double max_bound_violation(std::span<const double> x) const;

 private:
  std::vector<double> obj_, col_lo_, col_up_;
  std::vector<double> row_lo_, row_up_;
  std::vector<Eigen::Triplet<double>> entries_;
};

enum class SolveStatus {
  Optimal,
  IterationLimit,
  TimeLimit,
  NumericalFailure,
  Infeasible,
  Unbounded,
};

const char* to_string(SolveStatus s);

struct Solution {
  SolveStatus status = SolveStatus::NumericalFailure;
  double objective = 0.0;
  std::vector<double> x;        // primal values
  std::vector<double> y;        // row duals
  std::vector<double> reduced_costs;  // c - A'y
  int iterations = 0;
  double primal_infeasibility = kInf;  // relative, max-norm
  double dual_infeasibility = kInf;
  double gap = kInf;  // relative duality gap
  std::string message;
};

struct SolverOptions {
  double tolerance = 1e-8;   // relative primal/dual residual and gap target
  // When iterations stall before reaching `tolerance`, the best iterate is
  // still declared optimal if every residual is below this looser bound
  // (the usual reduced-accuracy exit of interior-point codes).
  double acceptable_tolerance = 1e-6;
  int max_iterations = 200;  // interior point; simplex uses a pivot budget
  int max_pivots = 0;        // simplex pivot cap; 0 means scale with size
  double time_limit_seconds = kInf;
  bool verbose = false;
};

// Primal-dual interior-point solve (Mehrotra predictor-corrector on the
// regularized augmented system). Intended for all production solves.
Solution solve_interior_point(const Problem& p, const SolverOptions& opts = {});

// Dense bounded-variable revised simplex. Exact vertex solutions for small
// problems; used by tests as an independent engine.
Solution solve_simplex(const Problem& p, const SolverOptions& opts = {});

}  // namespace gridplan::lp
