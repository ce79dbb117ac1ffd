// Mehrotra predictor-corrector interior-point method for the row-activity
// form  min c'x  s.t.  rl <= Ax <= ru, cl <= x <= cu.  Row activities are
// kept as barrier-bounded quantities instead of adding slack columns, so the
// Newton step reduces to a symmetric quasi-definite system
//
//   [ -(Dx + rho) A' ] [dx]   [rhs_x]
//   [  A   inv(Dw)+d ] [dy] = [rhs_y]
//
// factorized once per iteration with a sparse LDLT whose symbolic analysis is
// done a single time.  Convergence is always measured on the original
// (unscaled) problem.
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <vector>

#include "gridplan/lp.hpp"
#include "lp_internal.hpp"

namespace gridplan::lp {
namespace {

using detail::Core;
using detail::Scaling;
using Eigen::VectorXd;

constexpr double kRegPrimal = 1e-9;
constexpr double kRegPrimalFree = 1e-8;  // free columns need a firmer pivot
constexpr double kRegDual = 1e-9;

struct Sides {
  std::vector<char> xlo, xup;  // finite-bound flags per column
  std::vector<char> rlo, rup;  // per row (ineq rows only)
  std::vector<char> eq;        // row is an equality
  int count = 0;               // total finite sides
};

Sides classify(const Core& core) {
  Sides s;
  const int n = static_cast<int>(core.a.cols());
  const int m = static_cast<int>(core.a.rows());
  s.xlo.resize(n);
  s.xup.resize(n);
  s.rlo.assign(m, 0);
  s.rup.assign(m, 0);
  s.eq.resize(m);
  for (int j = 0; j < n; ++j) {
    s.xlo[j] = core.cl[j] != -kInf;
    s.xup[j] = core.cu[j] != kInf;
    s.count += s.xlo[j] + s.xup[j];
  }
  for (int i = 0; i < m; ++i) {
    s.eq[i] = core.rl[i] == core.ru[i];
    if (!s.eq[i]) {
      s.rlo[i] = core.rl[i] != -kInf;
      s.rup[i] = core.ru[i] != kInf;
      s.count += s.rlo[i] + s.rup[i];
    }
  }
  return s;
}

// Box-only problem (no live rows): solved coordinatewise.
Solution solve_box(const Problem& p, const Core& core, const SolverOptions&) {
  const int n = static_cast<int>(core.a.cols());
  VectorXd x(n);
  for (int j = 0; j < n; ++j) {
    const double c = core.c[j];
    if (c > 0) {
      if (core.cl[j] == -kInf) {
        Solution bad;
        bad.status = SolveStatus::Unbounded;
        bad.message = "free variable with positive cost and no constraints";
        return bad;
      }
      x[j] = core.cl[j];
    } else if (c < 0) {
      if (core.cu[j] == kInf) {
        Solution bad;
        bad.status = SolveStatus::Unbounded;
        bad.message = "free variable with negative cost and no constraints";
        return bad;
      }
      x[j] = core.cu[j];
    } else {
      x[j] = std::clamp(0.0, core.cl[j], core.cu[j]);
    }
  }
  Solution out;
  out.status = SolveStatus::Optimal;
  VectorXd y_empty(core.a.rows());
  y_empty.setZero();
  detail::expand_solution(p, core, x, y_empty, out);
  return out;
}

struct State {
  VectorXd x, w, y;
  VectorXd zxl, zxu, zwl, zwu;
};

double mu_of(const State& st, const Core& core, const Sides& sd) {
  if (sd.count == 0) return 0.0;
  double acc = 0.0;
  const int n = static_cast<int>(core.a.cols());
  const int m = static_cast<int>(core.a.rows());
  for (int j = 0; j < n; ++j) {
    if (sd.xlo[j]) acc += (st.x[j] - core.cl[j]) * st.zxl[j];
    if (sd.xup[j]) acc += (core.cu[j] - st.x[j]) * st.zxu[j];
  }
  for (int i = 0; i < m; ++i) {
    if (sd.rlo[i]) acc += (st.w[i] - core.rl[i]) * st.zwl[i];
    if (sd.rup[i]) acc += (core.ru[i] - st.w[i]) * st.zwu[i];
  }
  return acc / sd.count;
}

}  // namespace

Solution solve_interior_point(const Problem& p, const SolverOptions& opts) {
  const auto t_start = std::chrono::steady_clock::now();
  auto elapsed = [&t_start] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         t_start)
        .count();
  };

  Solution out;
  auto core_opt = detail::reduce(p, &out);
  if (!core_opt) return out;
  Core core = *core_opt;
  const int n = static_cast<int>(core.a.cols());
  const int m = static_cast<int>(core.a.rows());

  if (n == 0) {
    out.status = SolveStatus::Optimal;
    detail::expand_solution(p, core, VectorXd(0), VectorXd::Zero(m), out);
    return out;
  }

  if (m == 0) return solve_box(p, core, opts);  // before any scaling
  const Scaling sc = detail::equilibrate(core);
  const Sides sd = classify(core);

  // norms of the original problem for relative convergence tests
  double cnorm = 0.0, bnorm = 0.0;
  for (int j = 0; j < p.num_vars(); ++j) cnorm = std::max(cnorm, std::fabs(p.obj()[j]));
  for (int i = 0; i < p.num_rows(); ++i) {
    if (p.row_lo()[i] != -kInf) bnorm = std::max(bnorm, std::fabs(p.row_lo()[i]));
    if (p.row_up()[i] != kInf) bnorm = std::max(bnorm, std::fabs(p.row_up()[i]));
  }

  // ---- augmented matrix with fixed pattern, diagonal rewritten per iteration
  using Sp = Eigen::SparseMatrix<double>;
  Sp K(n + m, n + m);
  {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(core.a.nonZeros() + n + m);
    for (int j = 0; j < n; ++j) trips.emplace_back(j, j, -1.0);
    for (int j = 0; j < n; ++j)
      for (Sp::InnerIterator it(core.a, j); it; ++it)
        trips.emplace_back(n + it.row(), j, it.value());
    for (int i = 0; i < m; ++i) trips.emplace_back(n + i, n + i, 1.0);
    K.setFromTriplets(trips.begin(), trips.end());
    K.makeCompressed();
  }
  // diagonal entry of column q is its first stored entry (lower triangle,
  // rows sorted ascending within a column)
  std::vector<int> diag_pos(n + m);
  for (int q = 0; q < n + m; ++q) diag_pos[q] = K.outerIndexPtr()[q];

  Eigen::SimplicialLDLT<Sp, Eigen::Lower> ldlt;
  ldlt.analyzePattern(K);

  // ---- starting point
  State st;
  st.x.resize(n);
  for (int j = 0; j < n; ++j) {
    if (sd.xlo[j] && sd.xup[j]) st.x[j] = 0.5 * (core.cl[j] + core.cu[j]);
    else if (sd.xlo[j]) st.x[j] = core.cl[j] + 0.5;
    else if (sd.xup[j]) st.x[j] = core.cu[j] - 0.5;
    else st.x[j] = 0.0;
  }
  st.w.resize(m);
  for (int i = 0; i < m; ++i) {
    if (sd.eq[i]) st.w[i] = core.rl[i];
    else if (sd.rlo[i] && sd.rup[i]) st.w[i] = 0.5 * (core.rl[i] + core.ru[i]);
    else if (sd.rlo[i]) st.w[i] = core.rl[i] + 0.5;
    else st.w[i] = core.ru[i] - 0.5;
  }
  st.y = VectorXd::Zero(m);
  st.zxl = VectorXd::Zero(n);
  st.zxu = VectorXd::Zero(n);
  st.zwl = VectorXd::Zero(m);
  st.zwu = VectorXd::Zero(m);
  for (int j = 0; j < n; ++j) {
    if (sd.xlo[j]) st.zxl[j] = 1.0;
    if (sd.xup[j]) st.zxu[j] = 1.0;
  }
  for (int i = 0; i < m; ++i) {
    if (sd.rlo[i]) st.zwl[i] = 1.0;
    if (sd.rup[i]) st.zwu[i] = 1.0;
  }

  double reg_p = kRegPrimal, reg_d = kRegDual;
  int factor_bumps = 0;

  State best = st;
  double best_err = kInf;
  double best_p = kInf, best_d = kInf, best_g = kInf;
  double best_mu = kInf;  // smallest barrier parameter reached so far
  int stall = 0;

  VectorXd dx(n), dy(m), dw(m);
  VectorXd dzxl(n), dzxu(n), dzwl(m), dzwu(m);
  VectorXd dx_aff(n), dw_aff(m);
  VectorXd dzxl_aff(n), dzxu_aff(n), dzwl_aff(m), dzwu_aff(m);

  auto slack = [&](const State& s, int kind, int idx) -> double {
    switch (kind) {
      case 0: return s.x[idx] - core.cl[idx];
      case 1: return core.cu[idx] - s.x[idx];
      case 2: return s.w[idx] - core.rl[idx];
      default: return core.ru[idx] - s.w[idx];
    }
  };

  int it_count = 0;
  std::string fail_msg;
  bool failed = false, timed_out = false;

  for (; it_count < opts.max_iterations; ++it_count) {
    if (elapsed() > opts.time_limit_seconds) {
      timed_out = true;
      break;
    }

    // residuals in scaled space
    VectorXd r_p = core.a * st.x - st.w;
    VectorXd r_dx = core.c - core.a.transpose() * st.y - st.zxl + st.zxu;
    VectorXd r_dw(m);
    for (int i = 0; i < m; ++i)
      r_dw[i] = sd.eq[i] ? 0.0 : st.y[i] - st.zwl[i] + st.zwu[i];
    const double mu = mu_of(st, core, sd);

    // unscaled convergence metrics
    double p_err = 0.0, d_err = 0.0;
    for (int i = 0; i < m; ++i)
      p_err = std::max(p_err, std::fabs(r_p[i] / sc.row[i]) * sc.primal);
    p_err /= 1.0 + bnorm;
    for (int j = 0; j < n; ++j)
      d_err = std::max(d_err, std::fabs(r_dx[j] / sc.col[j]) * sc.cost);
    for (int i = 0; i < m; ++i)
      d_err = std::max(d_err, std::fabs(r_dw[i] * sc.row[i]) * sc.cost);
    d_err /= 1.0 + cnorm;

    double pobj = sc.cost * sc.primal * core.c.dot(st.x) + core.obj_const;
    double dobj = 0.0;
    for (int j = 0; j < n; ++j) {
      if (sd.xlo[j]) dobj += core.cl[j] * st.zxl[j];
      if (sd.xup[j]) dobj -= core.cu[j] * st.zxu[j];
    }
    for (int i = 0; i < m; ++i) {
      if (sd.eq[i]) dobj += core.rl[i] * st.y[i];
      else {
        if (sd.rlo[i]) dobj += core.rl[i] * st.zwl[i];
        if (sd.rup[i]) dobj -= core.ru[i] * st.zwu[i];
      }
    }
    dobj = sc.cost * sc.primal * dobj + core.obj_const;
    double g_err = std::fabs(pobj - dobj) / (1.0 + std::fabs(pobj));
    // For a pair that is feasible to tolerance the gap equals the sum of the
    // complementarity products, and that sum — all nonnegative terms — is free
    // of the cancellation that floors the direct objective difference near
    // n*eps*|obj|. Prefer it once feasibility is established.
    if (p_err <= opts.tolerance && d_err <= opts.tolerance) {
      const double comp =
          sc.cost * sc.primal * mu * static_cast<double>(sd.count);
      g_err = std::min(g_err, comp / (1.0 + std::fabs(pobj)));
    }

    const double err = std::max({p_err, d_err, g_err});
    bool improved = false;
    if (err < best_err) {
      if (err < 0.9 * best_err) improved = true;
      best_err = err;
      best_p = p_err;
      best_d = d_err;
      best_g = g_err;
      best = st;
    }
    // the duality gap lags the barrier parameter on degenerate problems, so
    // a steadily falling mu counts as progress even while the gap oscillates
    if (mu < 0.7 * best_mu) {
      best_mu = mu;
      improved = true;
    }
    if (improved) {
      stall = 0;
    } else if (++stall > 12) {
      failed = true;
      fail_msg = "no progress over 12 iterations";
      break;
    }
    if (opts.verbose) {
      std::ostringstream os;
      os << "ipm it=" << it_count << " mu=" << mu << " p=" << p_err
         << " d=" << d_err << " g=" << g_err << "\n";
      std::fputs(os.str().c_str(), stderr);
    }
    if (p_err <= opts.tolerance && d_err <= opts.tolerance &&
        g_err <= opts.tolerance) {
      best = st;
      best_err = err;
      best_p = p_err;
      best_d = d_err;
      best_g = g_err;
      break;
    }
    if (dobj > 1e13 * (1.0 + std::fabs(pobj)) && p_err > 1e-4) {
      failed = true;
      fail_msg = "dual objective diverging; problem is likely infeasible";
      break;
    }

    // diagonal blocks
    VectorXd dx_diag(n), e_diag(m);
    for (int j = 0; j < n; ++j) {
      double d = (sd.xlo[j] || sd.xup[j]) ? reg_p : kRegPrimalFree;
      if (sd.xlo[j]) d += st.zxl[j] / std::max(slack(st, 0, j), 1e-14);
      if (sd.xup[j]) d += st.zxu[j] / std::max(slack(st, 1, j), 1e-14);
      dx_diag[j] = d;
    }
    VectorXd dw_diag(m);  // barrier weight on row activities (ineq only)
    for (int i = 0; i < m; ++i) {
      if (sd.eq[i]) {
        dw_diag[i] = 0.0;
        e_diag[i] = reg_d;
      } else {
        double d = 0.0;
        if (sd.rlo[i]) d += st.zwl[i] / std::max(slack(st, 2, i), 1e-14);
        if (sd.rup[i]) d += st.zwu[i] / std::max(slack(st, 3, i), 1e-14);
        dw_diag[i] = d;
        e_diag[i] = 1.0 / d + reg_d;
      }
    }
    double* kv = K.valuePtr();
    for (int j = 0; j < n; ++j) kv[diag_pos[j]] = -dx_diag[j];
    for (int i = 0; i < m; ++i) kv[diag_pos[n + i]] = e_diag[i];

    ldlt.factorize(K);
    if (ldlt.info() != Eigen::Success) {
      if (++factor_bumps > 4) {
        failed = true;
        fail_msg = "LDLT factorization failed repeatedly";
        break;
      }
      reg_p *= 100.0;
      reg_d *= 100.0;
      --it_count;
      continue;
    }

    auto solve_kkt = [&](const VectorXd& rhs) -> VectorXd {
      VectorXd d = ldlt.solve(rhs);
      for (int pass = 0; pass < 2; ++pass) {
        VectorXd r = rhs - K.selfadjointView<Eigen::Lower>() * d;
        if (r.lpNorm<Eigen::Infinity>() <=
            1e-11 * (1.0 + rhs.lpNorm<Eigen::Infinity>()))
          break;
        d += ldlt.solve(r);
      }
      return d;
    };

    // generic direction computation from complementarity targets
    auto direction = [&](const VectorXd& rcxl, const VectorXd& rcxu,
                         const VectorXd& rcwl, const VectorXd& rcwu,
                         VectorXd& odx, VectorXd& ody, VectorXd& odw,
                         VectorXd& ozxl, VectorXd& ozxu, VectorXd& ozwl,
                         VectorXd& ozwu) {
      VectorXd fx = -r_dx, fw(m);
      for (int j = 0; j < n; ++j) {
        if (sd.xlo[j]) fx[j] += rcxl[j] / std::max(slack(st, 0, j), 1e-14);
        if (sd.xup[j]) fx[j] -= rcxu[j] / std::max(slack(st, 1, j), 1e-14);
      }
      for (int i = 0; i < m; ++i) {
        if (sd.eq[i]) {
          fw[i] = 0.0;
          continue;
        }
        double v = -r_dw[i];
        if (sd.rlo[i]) v += rcwl[i] / std::max(slack(st, 2, i), 1e-14);
        if (sd.rup[i]) v -= rcwu[i] / std::max(slack(st, 3, i), 1e-14);
        fw[i] = v;
      }
      VectorXd rhs(n + m);
      rhs.head(n) = -fx;
      for (int i = 0; i < m; ++i)
        rhs[n + i] = -r_p[i] + (sd.eq[i] ? 0.0 : fw[i] / dw_diag[i]);
      const VectorXd sol = solve_kkt(rhs);
      odx = sol.head(n);
      ody = sol.tail(m);
      for (int i = 0; i < m; ++i)
        odw[i] = sd.eq[i] ? 0.0 : (fw[i] - ody[i]) / dw_diag[i];
      for (int j = 0; j < n; ++j) {
        ozxl[j] = sd.xlo[j] ? (rcxl[j] - st.zxl[j] * odx[j]) /
                                  std::max(slack(st, 0, j), 1e-14)
                            : 0.0;
        ozxu[j] = sd.xup[j] ? (rcxu[j] + st.zxu[j] * odx[j]) /
                                  std::max(slack(st, 1, j), 1e-14)
                            : 0.0;
      }
      for (int i = 0; i < m; ++i) {
        ozwl[i] = sd.rlo[i] ? (rcwl[i] - st.zwl[i] * odw[i]) /
                                  std::max(slack(st, 2, i), 1e-14)
                            : 0.0;
        ozwu[i] = sd.rup[i] ? (rcwu[i] + st.zwu[i] * odw[i]) /
                                  std::max(slack(st, 3, i), 1e-14)
                            : 0.0;
      }
    };

    auto max_primal_step = [&](const VectorXd& odx, const VectorXd& odw) {
      double a = kInf;
      for (int j = 0; j < n; ++j) {
        if (sd.xlo[j] && odx[j] < 0) a = std::min(a, -slack(st, 0, j) / odx[j]);
        if (sd.xup[j] && odx[j] > 0) a = std::min(a, slack(st, 1, j) / odx[j]);
      }
      for (int i = 0; i < m; ++i) {
        if (sd.rlo[i] && odw[i] < 0) a = std::min(a, -slack(st, 2, i) / odw[i]);
        if (sd.rup[i] && odw[i] > 0) a = std::min(a, slack(st, 3, i) / odw[i]);
      }
      return a;
    };
    auto max_dual_step = [&](const VectorXd& ozxl, const VectorXd& ozxu,
                             const VectorXd& ozwl, const VectorXd& ozwu) {
      double a = kInf;
      for (int j = 0; j < n; ++j) {
        if (sd.xlo[j] && ozxl[j] < 0) a = std::min(a, -st.zxl[j] / ozxl[j]);
        if (sd.xup[j] && ozxu[j] < 0) a = std::min(a, -st.zxu[j] / ozxu[j]);
      }
      for (int i = 0; i < m; ++i) {
        if (sd.rlo[i] && ozwl[i] < 0) a = std::min(a, -st.zwl[i] / ozwl[i]);
        if (sd.rup[i] && ozwu[i] < 0) a = std::min(a, -st.zwu[i] / ozwu[i]);
      }
      return a;
    };

    // predictor: pure Newton towards complementarity zero
    VectorXd rcxl(n), rcxu(n), rcwl(m), rcwu(m);
    for (int j = 0; j < n; ++j) {
      rcxl[j] = sd.xlo[j] ? -slack(st, 0, j) * st.zxl[j] : 0.0;
      rcxu[j] = sd.xup[j] ? -slack(st, 1, j) * st.zxu[j] : 0.0;
    }
    for (int i = 0; i < m; ++i) {
      rcwl[i] = sd.rlo[i] ? -slack(st, 2, i) * st.zwl[i] : 0.0;
      rcwu[i] = sd.rup[i] ? -slack(st, 3, i) * st.zwu[i] : 0.0;
    }
    direction(rcxl, rcxu, rcwl, rcwu, dx_aff, dy, dw_aff, dzxl_aff, dzxu_aff,
              dzwl_aff, dzwu_aff);
    const double ap_aff = std::min(1.0, max_primal_step(dx_aff, dw_aff));
    const double ad_aff =
        std::min(1.0, max_dual_step(dzxl_aff, dzxu_aff, dzwl_aff, dzwu_aff));

    double mu_aff = 0.0;
    if (sd.count > 0) {
      for (int j = 0; j < n; ++j) {
        if (sd.xlo[j])
          mu_aff += (slack(st, 0, j) + ap_aff * dx_aff[j]) *
                    (st.zxl[j] + ad_aff * dzxl_aff[j]);
        if (sd.xup[j])
          mu_aff += (slack(st, 1, j) - ap_aff * dx_aff[j]) *
                    (st.zxu[j] + ad_aff * dzxu_aff[j]);
      }
      for (int i = 0; i < m; ++i) {
        if (sd.rlo[i])
          mu_aff += (slack(st, 2, i) + ap_aff * dw_aff[i]) *
                    (st.zwl[i] + ad_aff * dzwl_aff[i]);
        if (sd.rup[i])
          mu_aff += (slack(st, 3, i) - ap_aff * dw_aff[i]) *
                    (st.zwu[i] + ad_aff * dzwu_aff[i]);
      }
      mu_aff /= sd.count;
    }
    double sigma = mu > 0 ? std::pow(mu_aff / mu, 3) : 0.0;
    sigma = std::clamp(sigma, 1e-8, 1.0 - 1e-8);
    const double target = sigma * mu;

    // corrector: recenter and compensate the predictor's second-order error
    for (int j = 0; j < n; ++j) {
      if (sd.xlo[j]) rcxl[j] += target - dx_aff[j] * dzxl_aff[j];
      if (sd.xup[j]) rcxu[j] += target + dx_aff[j] * dzxu_aff[j];
    }
    for (int i = 0; i < m; ++i) {
      if (sd.rlo[i]) rcwl[i] += target - dw_aff[i] * dzwl_aff[i];
      if (sd.rup[i]) rcwu[i] += target + dw_aff[i] * dzwu_aff[i];
    }
    direction(rcxl, rcxu, rcwl, rcwu, dx, dy, dw, dzxl, dzxu, dzwl, dzwu);

    // Extra centrality correctors (Gondzio): when blocking constraints keep
    // the combined step short — typical on the degenerate optimal faces of
    // weighted/linked planning LPs — push outlier complementarity products
    // back toward the central path and re-solve against the same
    // factorization, keeping the corrected direction only while it lengthens
    // the steps.
    double sp = max_primal_step(dx, dw);
    double sdl = max_dual_step(dzxl, dzxu, dzwl, dzwu);
    if (target > 0.0) {
      VectorXd dx2(n), dy2(m), dw2(m);
      VectorXd dzxl2(n), dzxu2(n), dzwl2(m), dzwu2(m);
      for (int cc = 0;
           cc < 3 && std::min(std::min(1.0, sp), std::min(1.0, sdl)) < 0.99;
           ++cc) {
        const double ap_t = std::min(1.0, 1.1 * std::min(1.0, sp) + 0.1);
        const double ad_t = std::min(1.0, 1.1 * std::min(1.0, sdl) + 0.1);
        bool any = false;
        auto centering = [&](double v) {
          double t = 0.0;
          if (v < 0.1 * target)
            t = 0.1 * target - v;
          else if (v > 10.0 * target)
            t = std::max(10.0 * target - v, -10.0 * target);
          if (t != 0.0) any = true;
          return t;
        };
        VectorXd rcxl2 = rcxl, rcxu2 = rcxu, rcwl2 = rcwl, rcwu2 = rcwu;
        for (int j = 0; j < n; ++j) {
          if (sd.xlo[j])
            rcxl2[j] += centering((slack(st, 0, j) + ap_t * dx[j]) *
                                  (st.zxl[j] + ad_t * dzxl[j]));
          if (sd.xup[j])
            rcxu2[j] += centering((slack(st, 1, j) - ap_t * dx[j]) *
                                  (st.zxu[j] + ad_t * dzxu[j]));
        }
        for (int i = 0; i < m; ++i) {
          if (sd.rlo[i])
            rcwl2[i] += centering((slack(st, 2, i) + ap_t * dw[i]) *
                                  (st.zwl[i] + ad_t * dzwl[i]));
          if (sd.rup[i])
            rcwu2[i] += centering((slack(st, 3, i) - ap_t * dw[i]) *
                                  (st.zwu[i] + ad_t * dzwu[i]));
        }
        if (!any) break;
        direction(rcxl2, rcxu2, rcwl2, rcwu2, dx2, dy2, dw2, dzxl2, dzxu2,
                  dzwl2, dzwu2);
        const double sp2 = max_primal_step(dx2, dw2);
        const double sdl2 = max_dual_step(dzxl2, dzxu2, dzwl2, dzwu2);
        const bool longer = std::min(1.0, sp2) >= std::min(1.0, sp) + 0.01 ||
                            std::min(1.0, sdl2) >= std::min(1.0, sdl) + 0.01;
        if (sp2 < sp - 1e-12 || sdl2 < sdl - 1e-12 || !longer) break;
        rcxl = rcxl2;
        rcxu = rcxu2;
        rcwl = rcwl2;
        rcwu = rcwu2;
        dx = dx2;
        dy = dy2;
        dw = dw2;
        dzxl = dzxl2;
        dzxu = dzxu2;
        dzwl = dzwl2;
        dzwu = dzwu2;
        sp = sp2;
        sdl = sdl2;
      }
    }

    const double ap = std::min(1.0, 0.9995 * sp);
    const double ad = std::min(1.0, 0.9995 * sdl);
    if (ap < 1e-10 && ad < 1e-10) {
      failed = true;
      fail_msg = "step length collapsed";
      break;
    }

    st.x += ap * dx;
    for (int i = 0; i < m; ++i)
      if (!sd.eq[i]) st.w[i] += ap * dw[i];
    st.y += ad * dy;
    st.zxl += ad * dzxl;
    st.zxu += ad * dzxu;
    st.zwl += ad * dzwl;
    st.zwu += ad * dzwu;
  }

  // unscale the best iterate and expand
  VectorXd x_usc(n), y_usc(m);
  for (int j = 0; j < n; ++j) x_usc[j] = best.x[j] * sc.col[j] * sc.primal;
  for (int i = 0; i < m; ++i) y_usc[i] = best.y[i] * sc.row[i] * sc.cost;
  detail::expand_solution(p, core, x_usc, y_usc, out);
  out.iterations = it_count;

  out.primal_infeasibility = best_p;
  out.dual_infeasibility = best_d;
  out.gap = best_g;

  if (best_err <= opts.tolerance) {
    out.status = SolveStatus::Optimal;
  } else if (best_err <= opts.acceptable_tolerance && !timed_out) {
    // stalled short of the target but well inside validation accuracy
    out.status = SolveStatus::Optimal;
    out.message = "converged to reduced accuracy";
  } else if (timed_out) {
    out.status = SolveStatus::TimeLimit;
    out.message = "time limit reached";
  } else if (failed) {
    out.status = SolveStatus::NumericalFailure;
    out.message = fail_msg;
  } else {
    out.status = SolveStatus::IterationLimit;
    out.message = "iteration limit reached";
  }
  if (!out.message.empty()) {
    std::ostringstream os;
    os << out.message << " (best max residual " << best_err << ")";
    out.message = os.str();
  }
  return out;
}

}  // namespace gridplan::lp
