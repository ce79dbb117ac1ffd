// Shared plumbing for the two LP engines: bound-preserving presolve
// (fixed-column elimination, empty/free row handling) and Ruiz row/column
// equilibration with global cost and bound scales.  Both engines operate on
// the reduced, scaled core problem and map solutions back through these
// structures.
#pragma once

#include <Eigen/Sparse>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "gridplan/lp.hpp"

namespace gridplan::lp::detail {

struct Core {
  // reduced problem: min c'x + obj_const  s.t.  rl <= Ax <= ru, cl <= x <= cu
  Eigen::SparseMatrix<double> a;  // compressed, column-major
  Eigen::VectorXd c, cl, cu, rl, ru;
  double obj_const = 0.0;
  std::vector<int> col_of;          // core col -> original col
  std::vector<int> row_of;          // core row -> original row
  std::vector<double> fixed_value;  // size = original n, NaN if not fixed
  int orig_n = 0, orig_m = 0;
};

// Removes fixed columns (lo == up) and rows that end up empty or unbounded on
// both sides.  Returns nullopt together with an infeasible status when a row
// emptied by fixing has bounds excluding zero.
inline std::optional<Core> reduce(const Problem& p, Solution* infeasible_out) {
  Core core;
  core.orig_n = p.num_vars();
  core.orig_m = p.num_rows();
  core.fixed_value.assign(core.orig_n, std::numeric_limits<double>::quiet_NaN());

  std::vector<int> new_col(core.orig_n, -1);
  for (int j = 0; j < core.orig_n; ++j) {
    if (p.col_lo()[j] == p.col_up()[j]) {
      core.fixed_value[j] = p.col_lo()[j];
      core.obj_const += p.obj()[j] * p.col_lo()[j];
    } else {
      new_col[j] = static_cast<int>(core.col_of.size());
      core.col_of.push_back(j);
    }
  }
  const int n = static_cast<int>(core.col_of.size());

  const Eigen::SparseMatrix<double> a_full = p.matrix();
  std::vector<double> shift(core.orig_m, 0.0);
  std::vector<int> live_count(core.orig_m, 0);
  for (int j = 0; j < a_full.outerSize(); ++j) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(a_full, j); it; ++it) {
      if (new_col[j] < 0) {
        shift[it.row()] += it.value() * core.fixed_value[j];
      } else {
        ++live_count[it.row()];
      }
    }
  }

  std::vector<int> new_row(core.orig_m, -1);
  for (int i = 0; i < core.orig_m; ++i) {
    const double lo = p.row_lo()[i] - shift[i];
    const double up = p.row_up()[i] - shift[i];
    if (live_count[i] == 0) {
      const double slack = 1e-9 * std::max(1.0, std::fabs(p.row_lo()[i]));
      if (lo > slack || up < -slack) {
        if (infeasible_out) {
          infeasible_out->status = SolveStatus::Infeasible;
          infeasible_out->message = "row becomes empty with bounds excluding zero";
        }
        return std::nullopt;
      }
      continue;  // trivially satisfied
    }
    if (lo == -kInf && up == kInf) continue;  // free row carries no information
    new_row[i] = static_cast<int>(core.row_of.size());
    core.row_of.push_back(i);
  }
  const int m = static_cast<int>(core.row_of.size());

  core.c.resize(n);
  core.cl.resize(n);
  core.cu.resize(n);
  for (int k = 0; k < n; ++k) {
    const int j = core.col_of[k];
    core.c[k] = p.obj()[j];
    core.cl[k] = p.col_lo()[j];
    core.cu[k] = p.col_up()[j];
  }
  core.rl.resize(m);
  core.ru.resize(m);
  for (int k = 0; k < m; ++k) {
    const int i = core.row_of[k];
    core.rl[k] = p.row_lo()[i] - shift[i];
    core.ru[k] = p.row_up()[i] - shift[i];
  }

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(a_full.nonZeros());
  for (int j = 0; j < a_full.outerSize(); ++j) {
    if (new_col[j] < 0) continue;
    for (Eigen::SparseMatrix<double>::InnerIterator it(a_full, j); it; ++it) {
      if (new_row[it.row()] >= 0)
        trips.emplace_back(new_row[it.row()], new_col[j], it.value());
    }
  }
  core.a.resize(m, n);
  core.a.setFromTriplets(trips.begin(), trips.end());
  core.a.makeCompressed();
  return core;
}

struct Scaling {
  Eigen::VectorXd row;   // R: scaled A = diag(row) * A * diag(col)
  Eigen::VectorXd col;   // C
  double primal = 1.0;   // bounds divided by this
  double cost = 1.0;     // costs divided by this
};

// Ruiz equilibration: iteratively divide rows and columns by the square root
// of their max absolute entry, then pull out single scalar cost/bound scales.
inline Scaling equilibrate(Core& core, int sweeps = 10) {
  const int m = static_cast<int>(core.a.rows());
  const int n = static_cast<int>(core.a.cols());
  Scaling s;
  s.row = Eigen::VectorXd::Ones(m);
  s.col = Eigen::VectorXd::Ones(n);

  for (int pass = 0; pass < sweeps; ++pass) {
    Eigen::VectorXd rmax = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd cmax = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < n; ++j) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(core.a, j); it; ++it) {
        const double v = std::fabs(it.value());
        rmax[it.row()] = std::max(rmax[it.row()], v);
        cmax[j] = std::max(cmax[j], v);
      }
    }
    double drift = 0.0;
    Eigen::VectorXd rdiv(m), cdiv(n);
    for (int i = 0; i < m; ++i) {
      rdiv[i] = rmax[i] > 0 ? std::sqrt(rmax[i]) : 1.0;
      drift = std::max(drift, std::fabs(rmax[i] - 1.0));
    }
    for (int j = 0; j < n; ++j) {
      cdiv[j] = cmax[j] > 0 ? std::sqrt(cmax[j]) : 1.0;
      drift = std::max(drift, std::fabs(cmax[j] - 1.0));
    }
    if (drift < 1e-3 && pass > 0) break;
    for (int j = 0; j < n; ++j) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(core.a, j); it; ++it)
        it.valueRef() /= rdiv[it.row()] * cdiv[j];
    }
    s.row.array() /= rdiv.array();
    s.col.array() /= cdiv.array();
  }

  // variable change x = C * x'; bounds divide by C, costs multiply by C
  for (int j = 0; j < n; ++j) {
    const double cj = s.col[j];
    core.c[j] *= cj;
    if (core.cl[j] != -kInf) core.cl[j] /= cj;
    if (core.cu[j] != kInf) core.cu[j] /= cj;
  }
  for (int i = 0; i < m; ++i) {
    const double ri = s.row[i];
    if (core.rl[i] != -kInf) core.rl[i] *= ri;
    if (core.ru[i] != kInf) core.ru[i] *= ri;
  }

  double bmax = 0.0;
  auto scan = [&bmax](const Eigen::VectorXd& v) {
    for (int i = 0; i < v.size(); ++i)
      if (std::isfinite(v[i])) bmax = std::max(bmax, std::fabs(v[i]));
  };
  scan(core.cl);
  scan(core.cu);
  scan(core.rl);
  scan(core.ru);
  s.primal = bmax > 0 ? bmax : 1.0;
  core.cl /= s.primal;
  core.cu /= s.primal;
  core.rl /= s.primal;
  core.ru /= s.primal;

  s.cost = std::max(1e-12, core.c.cwiseAbs().maxCoeff());
  if (core.c.size() == 0) s.cost = 1.0;
  core.c /= s.cost;
  return s;
}

// Expands a core-space primal/dual point (already unscaled by the caller)
// into original indexing, recomputing duals of dropped rows as zero and
// reduced costs from scratch.
inline void expand_solution(const Problem& p, const Core& core,
                            const Eigen::VectorXd& x_core,
                            const Eigen::VectorXd& y_core, Solution& out) {
  out.x.assign(core.orig_n, 0.0);
  for (int j = 0; j < core.orig_n; ++j)
    if (!std::isnan(core.fixed_value[j])) out.x[j] = core.fixed_value[j];
  for (size_t k = 0; k < core.col_of.size(); ++k)
    out.x[core.col_of[k]] = x_core[static_cast<int>(k)];

  out.y.assign(core.orig_m, 0.0);
  for (size_t k = 0; k < core.row_of.size(); ++k)
    out.y[core.row_of[k]] = y_core[static_cast<int>(k)];

  out.reduced_costs.assign(core.orig_n, 0.0);
  for (int j = 0; j < core.orig_n; ++j) out.reduced_costs[j] = p.obj()[j];
  const auto a = p.matrix();
  for (int j = 0; j < a.outerSize(); ++j)
    for (Eigen::SparseMatrix<double>::InnerIterator it(a, j); it; ++it)
      out.reduced_costs[j] -= it.value() * out.y[it.row()];

  out.objective = p.objective_value(out.x);
}

}  // namespace gridplan::lp::detail
