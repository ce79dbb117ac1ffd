// Bounded-variable revised simplex used as an independent reference engine.
// Works on the same reduced/scaled core as the interior-point solver but
// shares no algorithmic machinery with it: logical variables carry the row
// activities ([A -I][x;w] = 0), the basis is refactorized with a sparse LU
// and updated between refactorizations with product-form eta vectors.
// Phase 1 drives the summed bound violation of basic variables to zero with
// a composite objective; phase 2 is textbook bounded simplex with Dantzig
// pricing and a Bland fallback after long degenerate runs.
#include <Eigen/SparseLU>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <vector>

#include "gridplan/lp.hpp"
#include "lp_internal.hpp"

namespace gridplan::lp {
namespace {

using detail::Core;
using Eigen::VectorXd;
using Sp = Eigen::SparseMatrix<double>;

constexpr double kFeasTol = 1e-9;
constexpr double kCostTol = 1e-9;
constexpr double kPivotTol = 1e-11;
constexpr double kPivotPrefer = 1e-7;
constexpr int kRefactorEvery = 100;

enum class VStat : std::uint8_t { AtLower, AtUpper, Basic, FreeZero };

struct Eta {
  int row;
  VectorXd col;  // pivot column at the time of the basis change
};

class SimplexEngine {
 public:
  SimplexEngine(const Core& core, const SolverOptions& opts)
      : core_(core),
        opts_(opts),
        m_(static_cast<int>(core.a.rows())),
        n_(static_cast<int>(core.a.cols())),
        nt_(m_ + n_) {
    lo_.resize(nt_);
    up_.resize(nt_);
    cost_.resize(nt_);
    for (int j = 0; j < n_; ++j) {
      lo_[j] = core_.cl[j];
      up_[j] = core_.cu[j];
      cost_[j] = core_.c[j];
    }
    for (int i = 0; i < m_; ++i) {
      lo_[n_ + i] = core_.rl[i];
      up_[n_ + i] = core_.ru[i];
      cost_[n_ + i] = 0.0;
    }
    stat_.assign(nt_, VStat::AtLower);
    xval_ = VectorXd::Zero(nt_);
    basic_.resize(m_);
    for (int j = 0; j < n_; ++j) {
      if (lo_[j] == -kInf && up_[j] == kInf) {
        stat_[j] = VStat::FreeZero;
        xval_[j] = 0.0;
      } else if (lo_[j] == -kInf) {
        stat_[j] = VStat::AtUpper;
        xval_[j] = up_[j];
      } else if (up_[j] == kInf) {
        stat_[j] = VStat::AtLower;
        xval_[j] = lo_[j];
      } else {
        const bool lower = std::fabs(lo_[j]) <= std::fabs(up_[j]);
        stat_[j] = lower ? VStat::AtLower : VStat::AtUpper;
        xval_[j] = lower ? lo_[j] : up_[j];
      }
    }
    for (int i = 0; i < m_; ++i) {
      basic_[i] = n_ + i;
      stat_[n_ + i] = VStat::Basic;
    }
  }

  SolveStatus run() {
    const auto t0 = std::chrono::steady_clock::now();
    auto out_of_time = [&] {
      return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                           t0)
                 .count() > opts_.time_limit_seconds;
    };

    if (!refactorize()) return SolveStatus::NumericalFailure;
    recompute_basics();

    const long budget =
        opts_.max_pivots > 0 ? opts_.max_pivots
                             : std::max<long>(20000, 60L * nt_);
    bool phase1 = infeasibility() > kFeasTol;
    int degenerate_run = 0;

    for (long pivot = 0; pivot < budget; ++pivot) {
      if (out_of_time()) return SolveStatus::TimeLimit;
      if (phase1 && infeasibility() <= kFeasTol) phase1 = false;

      const bool bland = degenerate_run > 200;
      const VectorXd y = btran(phase1 ? phase1_cost_basic() : real_cost_basic());
      int q = -1, dir = 0;
      double best_score = 0.0;
      for (int j = 0; j < nt_; ++j) {
        if (stat_[j] == VStat::Basic) continue;
        const double cj = phase1 ? 0.0 : cost_[j];
        const double dj = cj - dot_column(j, y);
        int d = 0;
        if (stat_[j] == VStat::AtLower && dj < -kCostTol) d = +1;
        else if (stat_[j] == VStat::AtUpper && dj > kCostTol) d = -1;
        else if (stat_[j] == VStat::FreeZero && std::fabs(dj) > kCostTol)
          d = dj < 0 ? +1 : -1;
        if (d == 0) continue;
        if (bland) {
          q = j;
          dir = d;
          break;
        }
        if (std::fabs(dj) > best_score) {
          best_score = std::fabs(dj);
          q = j;
          dir = d;
        }
      }
      if (q < 0) {
        if (phase1) return SolveStatus::Infeasible;
        return SolveStatus::Optimal;
      }

      VectorXd u = ftran(column(q));

      // ratio test: how far can x_q move in direction `dir`
      double t_max = kInf;
      int leave = -1;       // basis position of blocking variable
      double leave_pivot = 0.0;
      double leave_target = 0.0;
      const bool entering_ranged = lo_[q] != -kInf && up_[q] != kInf;
      if (entering_ranged) t_max = up_[q] - lo_[q];

      for (int i = 0; i < m_; ++i) {
        const double ui = u[i];
        if (std::fabs(ui) < kPivotTol) continue;
        const int b = basic_[i];
        const double delta = -dir * ui;  // basic value rate per unit step
        const double v = xval_[b];
        double bound = 0.0;
        bool blocks = false;
        if (phase1 && v < lo_[b] - kFeasTol) {
          if (delta > 0) {
            bound = lo_[b];
            blocks = true;
          }
        } else if (phase1 && v > up_[b] + kFeasTol) {
          if (delta < 0) {
            bound = up_[b];
            blocks = true;
          }
        } else {
          if (delta > 0 && up_[b] != kInf) {
            bound = up_[b];
            blocks = true;
          } else if (delta < 0 && lo_[b] != -kInf) {
            bound = lo_[b];
            blocks = true;
          }
        }
        if (!blocks) continue;
        const double ratio = std::max(0.0, (bound - v) / delta);
        bool better;
        if (ratio < t_max - 1e-12) better = true;
        else if (ratio > t_max + 1e-12) better = false;
        else if (leave < 0) better = true;
        else if (bland) better = b < basic_[leave];
        else better = std::fabs(ui) > std::fabs(leave_pivot) + kPivotPrefer;
        if (better) {
          t_max = std::min(t_max, ratio);
          leave = i;
          leave_pivot = ui;
          leave_target = bound;
        }
      }

      if (t_max == kInf) {
        // a missing block in phase 1 contradicts the bounded composite
        // objective and can only come from numerical drift
        return phase1 ? SolveStatus::NumericalFailure : SolveStatus::Unbounded;
      }
      if (t_max <= 1e-10) ++degenerate_run;
      else degenerate_run = 0;

      // apply the step to basic values and the entering variable
      if (t_max > 0.0) {
        for (int i = 0; i < m_; ++i)
          if (std::fabs(u[i]) >= kPivotTol)
            xval_[basic_[i]] -= t_max * dir * u[i];
      }
      const double enter_from =
          stat_[q] == VStat::AtUpper ? up_[q]
          : stat_[q] == VStat::AtLower ? lo_[q] : xval_[q];
      const double enter_val = enter_from + dir * t_max;

      if (leave < 0) {
        // entering variable travelled to its opposite bound; basis unchanged
        xval_[q] = enter_val;
        stat_[q] = stat_[q] == VStat::AtLower ? VStat::AtUpper : VStat::AtLower;
        continue;
      }

      if (std::fabs(leave_pivot) < kPivotTol) {
        if (!refactorize()) return SolveStatus::NumericalFailure;
        recompute_basics();
        continue;  // retry with a fresh factorization
      }

      const int leaving_var = basic_[leave];
      xval_[leaving_var] = leave_target;
      stat_[leaving_var] =
          leave_target == lo_[leaving_var] ? VStat::AtLower : VStat::AtUpper;
      xval_[q] = enter_val;
      stat_[q] = VStat::Basic;
      basic_[leave] = q;
      etas_.push_back({leave, u});

      if (static_cast<int>(etas_.size()) >= kRefactorEvery) {
        if (!refactorize()) return SolveStatus::NumericalFailure;
        recompute_basics();
      }
    }
    return SolveStatus::IterationLimit;
  }

  double infeasibility() const {
    double f = 0.0;
    for (int i = 0; i < m_; ++i) {
      const int b = basic_[i];
      if (xval_[b] < lo_[b]) f += lo_[b] - xval_[b];
      if (xval_[b] > up_[b]) f += xval_[b] - up_[b];
    }
    return f;
  }

  // final primal point / duals in core (scaled) space
  VectorXd primal() const { return xval_.head(n_); }
  VectorXd duals() { return btran(real_cost_basic()); }

 private:
  VectorXd real_cost_basic() const {
    VectorXd cb(m_);
    for (int i = 0; i < m_; ++i) cb[i] = cost_[basic_[i]];
    return cb;
  }
  VectorXd phase1_cost_basic() const {
    VectorXd cb = VectorXd::Zero(m_);
    for (int i = 0; i < m_; ++i) {
      const int b = basic_[i];
      if (xval_[b] < lo_[b] - kFeasTol) cb[i] = -1.0;
      else if (xval_[b] > up_[b] + kFeasTol) cb[i] = 1.0;
    }
    return cb;
  }

  VectorXd column(int var) const {
    VectorXd a = VectorXd::Zero(m_);
    if (var < n_) {
      for (Sp::InnerIterator it(core_.a, var); it; ++it) a[it.row()] = it.value();
    } else {
      a[var - n_] = -1.0;
    }
    return a;
  }

  double dot_column(int var, const VectorXd& y) const {
    if (var >= n_) return -y[var - n_];
    double acc = 0.0;
    for (Sp::InnerIterator it(core_.a, var); it; ++it)
      acc += it.value() * y[it.row()];
    return acc;
  }

  bool refactorize() {
    std::vector<Eigen::Triplet<double>> trips;
    for (int i = 0; i < m_; ++i) {
      const int b = basic_[i];
      if (b < n_) {
        for (Sp::InnerIterator it(core_.a, b); it; ++it)
          trips.emplace_back(it.row(), i, it.value());
      } else {
        trips.emplace_back(b - n_, i, -1.0);
      }
    }
    Sp b_mat(m_, m_);
    b_mat.setFromTriplets(trips.begin(), trips.end());
    b_mat.makeCompressed();
    lu_.compute(b_mat);
    etas_.clear();
    return lu_.info() == Eigen::Success;
  }

  // Basic values solve B x_B = -N x_N (right-hand side is zero).
  void recompute_basics() {
    VectorXd rhs = VectorXd::Zero(m_);
    for (int j = 0; j < nt_; ++j) {
      if (stat_[j] == VStat::Basic || xval_[j] == 0.0) continue;
      if (j < n_) {
        for (Sp::InnerIterator it(core_.a, j); it; ++it)
          rhs[it.row()] -= it.value() * xval_[j];
      } else {
        rhs[j - n_] += xval_[j];
      }
    }
    const VectorXd xb = ftran(rhs);
    for (int i = 0; i < m_; ++i) xval_[basic_[i]] = xb[i];
  }

  VectorXd ftran(const VectorXd& rhs) {
    VectorXd z = lu_.solve(rhs);
    for (const Eta& e : etas_) {
      const double zr = z[e.row] / e.col[e.row];
      for (int i = 0; i < m_; ++i)
        if (i != e.row) z[i] -= e.col[i] * zr;
      z[e.row] = zr;
    }
    return z;
  }

  VectorXd btran(const VectorXd& rhs) {
    VectorXd z = rhs;
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      double acc = z[it->row];
      for (int i = 0; i < m_; ++i)
        if (i != it->row) acc -= it->col[i] * z[i];
      z[it->row] = acc / it->col[it->row];
    }
    return lu_.transpose().solve(z);
  }

  const Core& core_;
  const SolverOptions& opts_;
  int m_, n_, nt_;
  VectorXd lo_, up_, cost_, xval_;
  std::vector<VStat> stat_;
  std::vector<int> basic_;
  std::vector<Eta> etas_;
  Eigen::SparseLU<Sp> lu_;
};

}  // namespace

Solution solve_simplex(const Problem& p, const SolverOptions& opts) {
  Solution out;
  auto core_opt = detail::reduce(p, &out);
  if (!core_opt) return out;
  Core core = *core_opt;
  const int n = static_cast<int>(core.a.cols());
  const int m = static_cast<int>(core.a.rows());
  const detail::Scaling sc = detail::equilibrate(core);

  if (n == 0) {
    out.status = SolveStatus::Optimal;
    detail::expand_solution(p, core, VectorXd(0), VectorXd::Zero(m), out);
    return out;
  }
  if (m == 0) {
    // box-only: each variable sits at whichever finite bound its cost prefers
    VectorXd x(n);
    for (int j = 0; j < n; ++j) {
      const double c = core.c[j];
      if (c > 0) {
        if (core.cl[j] == -kInf) {
          out.status = SolveStatus::Unbounded;
          return out;
        }
        x[j] = core.cl[j] * sc.col[j] * sc.primal;
      } else if (c < 0) {
        if (core.cu[j] == kInf) {
          out.status = SolveStatus::Unbounded;
          return out;
        }
        x[j] = core.cu[j] * sc.col[j] * sc.primal;
      } else {
        x[j] = std::clamp(0.0, core.cl[j], core.cu[j]) * sc.col[j] * sc.primal;
      }
    }
    out.status = SolveStatus::Optimal;
    detail::expand_solution(p, core, x, VectorXd::Zero(m), out);
    return out;
  }

  SimplexEngine engine(core, opts);
  const SolveStatus status = engine.run();
  out.status = status;
  out.iterations = 0;
  if (status != SolveStatus::Optimal && status != SolveStatus::IterationLimit) {
    if (status == SolveStatus::Infeasible)
      out.message = "phase 1 could not remove all bound violations";
    else if (status == SolveStatus::Unbounded)
      out.message = "improving direction without blocking bound";
    else if (status == SolveStatus::TimeLimit)
      out.message = "time limit reached";
    else
      out.message = "basis factorization failed";
    if (status != SolveStatus::Infeasible && status != SolveStatus::Unbounded)
      return out;
    // for infeasible/unbounded still report the last point for diagnostics
  }

  const VectorXd xs = engine.primal();
  const VectorXd ys = engine.duals();
  VectorXd x_usc(n), y_usc(m);
  for (int j = 0; j < n; ++j) x_usc[j] = xs[j] * sc.col[j] * sc.primal;
  for (int i = 0; i < m; ++i) y_usc[i] = ys[i] * sc.row[i] * sc.cost;
  detail::expand_solution(p, core, x_usc, y_usc, out);

  if (status == SolveStatus::Optimal) {
    out.primal_infeasibility = p.max_bound_violation(out.x);
    out.dual_infeasibility = 0.0;
    out.gap = 0.0;
  }
  return out;
}

}  // namespace gridplan::lp
