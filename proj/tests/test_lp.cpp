#include <array>
#include <cmath>
#include <utility>
#include <vector>

#include "doctest.h"
#include "gridplan/lp.hpp"
#include "gridplan/rng.hpp"

using namespace gridplan;
using lp::kInf;
using lp::Problem;
using lp::Solution;
using lp::SolveStatus;

namespace {

using Entry = std::pair<int, double>;

void check_optimal(const Solution& s) {
  CAPTURE(s.message);
  REQUIRE(s.status == SolveStatus::Optimal);
}

// Random box-bounded LP that is feasible by construction: row bounds are
// drawn as a band around the activities of a random interior point.
Problem random_lp(Rng& rng, int n, int m, double eq_fraction) {
  Problem p;
  std::vector<double> x0(n);
  for (int j = 0; j < n; ++j) {
    const double cost = rng.uniform(-1.0, 1.0);
    p.add_var(0.0, rng.uniform(2.0, 10.0), cost);
    x0[j] = rng.uniform(0.0, 2.0);
  }
  for (int i = 0; i < m; ++i) {
    std::vector<Entry> entries;
    double act = 0.0;
    for (int j = 0; j < n; ++j) {
      if (rng.uniform01() < 0.4) {
        const double a = rng.uniform(-2.0, 2.0);
        entries.push_back({j, a});
        act += a * x0[j];
      }
    }
    if (entries.empty()) entries.push_back({0, 1.0});
    if (rng.uniform01() < eq_fraction) {
      p.add_row(act, act, entries);
    } else {
      const double below = rng.uniform(0.1, 3.0);
      const double above = rng.uniform(0.1, 3.0);
      const double lo = rng.uniform01() < 0.2 ? -kInf : act - below;
      const double up = rng.uniform01() < 0.2 ? kInf : act + above;
      if (lo == -kInf && up == kInf) {
        p.add_row(act - below, act + above, entries);
      } else {
        p.add_row(lo, up, entries);
      }
    }
  }
  return p;
}

}  // namespace

TEST_SUITE("lp") {

TEST_CASE("two variable maximization via both engines") {
  // min -x - 2y  s.t. x + y <= 4, 0 <= x <= 3, 0 <= y <= 2  =>  x=2, y=2
  Problem p;
  p.add_var(0.0, 3.0, -1.0);
  p.add_var(0.0, 2.0, -2.0);
  const std::array<Entry, 2> row{{{0, 1.0}, {1, 1.0}}};
  p.add_row(-kInf, 4.0, row);

  for (auto solve : {lp::solve_interior_point, lp::solve_simplex}) {
    const Solution s = solve(p, {});
    check_optimal(s);
    CHECK(s.objective == doctest::Approx(-6.0).epsilon(1e-7));
    CHECK(s.x[0] == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(s.x[1] == doctest::Approx(2.0).epsilon(1e-6));
  }
}

TEST_CASE("equality row and degenerate optimal face") {
  // min x1 + x2  s.t. x1 + x2 = 1, x >= 0: any point on the face is optimal
  Problem p;
  p.add_var(0.0, kInf, 1.0);
  p.add_var(0.0, kInf, 1.0);
  const std::array<Entry, 2> row{{{0, 1.0}, {1, 1.0}}};
  p.add_row(1.0, 1.0, row);

  for (auto solve : {lp::solve_interior_point, lp::solve_simplex}) {
    const Solution s = solve(p, {});
    check_optimal(s);
    CHECK(s.objective == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(s.x[0] + s.x[1] == doctest::Approx(1.0).epsilon(1e-7));
  }
}

TEST_CASE("pure box problem with no rows") {
  Problem p;
  p.add_var(-1.0, 5.0, 2.0);    // cost > 0: settles at -1
  p.add_var(-4.0, -2.0, -1.0);  // cost < 0: settles at -2
  p.add_var(-3.0, 3.0, 0.0);    // no cost: stays at 0
  for (auto solve : {lp::solve_interior_point, lp::solve_simplex}) {
    const Solution s = solve(p, {});
    check_optimal(s);
    CHECK(s.objective == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(s.x[0] == doctest::Approx(-1.0));
    CHECK(s.x[1] == doctest::Approx(-2.0));
    CHECK(s.x[2] == doctest::Approx(0.0));
  }
}

TEST_CASE("fixed columns are eliminated and restored") {
  // x0 fixed at 2 shifts the row bound seen by x1
  Problem p;
  p.add_var(2.0, 2.0, 3.0);
  p.add_var(0.0, 10.0, 1.0);
  const std::array<Entry, 2> row{{{0, 1.0}, {1, 1.0}}};
  p.add_row(5.0, kInf, row);  // x1 >= 3 after the shift
  for (auto solve : {lp::solve_interior_point, lp::solve_simplex}) {
    const Solution s = solve(p, {});
    check_optimal(s);
    CHECK(s.x[0] == doctest::Approx(2.0));
    CHECK(s.x[1] == doctest::Approx(3.0).epsilon(1e-7));
    CHECK(s.objective == doctest::Approx(9.0).epsilon(1e-7));
  }
}

TEST_CASE("free variable pinned only through a row") {
  // min x  s.t. x - y = 3, y in [-1, 1], x >= 0  =>  x = 2 at y = -1
  Problem p;
  p.add_var(0.0, kInf, 1.0);
  p.add_var(-1.0, 1.0, 0.0);
  const std::array<Entry, 2> row{{{0, 1.0}, {1, -1.0}}};
  p.add_row(3.0, 3.0, row);
  for (auto solve : {lp::solve_interior_point, lp::solve_simplex}) {
    const Solution s = solve(p, {});
    check_optimal(s);
    CHECK(s.objective == doctest::Approx(2.0).epsilon(1e-7));
  }

  // with y fully free the x >= 0 bound takes over:  x = 0, y = -3
  Problem q;
  q.add_var(0.0, kInf, 1.0);
  q.add_var(-kInf, kInf, 0.0);
  q.add_row(3.0, 3.0, row);
  for (auto solve : {lp::solve_interior_point, lp::solve_simplex}) {
    const Solution s = solve(q, {});
    check_optimal(s);
    CHECK(s.objective == doctest::Approx(0.0).epsilon(1e-7));
    CHECK(s.x[1] == doctest::Approx(-3.0).epsilon(1e-6));
  }
}

TEST_CASE("simplex reports infeasible and unbounded") {
  Problem p;
  p.add_var(0.0, 1.0, 1.0);
  const std::array<Entry, 1> row{{{0, 1.0}}};
  p.add_row(2.0, kInf, row);  // x >= 2 conflicts with x <= 1
  CHECK(lp::solve_simplex(p, {}).status == SolveStatus::Infeasible);
  CHECK(lp::solve_interior_point(p, {}).status != SolveStatus::Optimal);

  Problem q;
  q.add_var(0.0, kInf, -1.0);
  q.add_var(0.0, kInf, 0.0);
  const std::array<Entry, 2> row2{{{0, 1.0}, {1, -1.0}}};
  q.add_row(-kInf, 0.0, row2);  // x <= y, both unbounded above
  CHECK(lp::solve_simplex(q, {}).status == SolveStatus::Unbounded);
}

TEST_CASE("empty row after fixing is accepted or rejected by its bounds") {
  Problem p;
  p.add_var(1.0, 1.0, 0.0);
  p.add_var(0.0, 2.0, 1.0);
  const std::array<Entry, 1> row{{{0, 2.0}}};
  p.add_row(2.0, 2.0, row);  // satisfied exactly by the fixed column
  for (auto solve : {lp::solve_interior_point, lp::solve_simplex}) {
    const Solution s = solve(p, {});
    check_optimal(s);
    CHECK(s.objective == doctest::Approx(0.0));
  }

  Problem q;
  q.add_var(1.0, 1.0, 0.0);
  q.add_var(0.0, 2.0, 1.0);
  q.add_row(3.0, 3.0, row);  // 2 != 3: infeasible
  CHECK(lp::solve_interior_point(q, {}).status == SolveStatus::Infeasible);
  CHECK(lp::solve_simplex(q, {}).status == SolveStatus::Infeasible);
}

TEST_CASE("engines agree on random feasible instances") {
  Rng rng(20240811);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 5 + static_cast<int>(rng.next_below(21));
    const int m = 3 + static_cast<int>(rng.next_below(18));
    Problem p = random_lp(rng, n, m, trial % 3 == 0 ? 0.3 : 0.0);

    const Solution ipm = lp::solve_interior_point(p, {});
    const Solution spx = lp::solve_simplex(p, {});
    CAPTURE(trial);
    CAPTURE(ipm.message);
    check_optimal(ipm);
    check_optimal(spx);
    CHECK(std::fabs(ipm.objective - spx.objective) <=
          1e-7 * (1.0 + std::fabs(spx.objective)));
    CHECK(p.max_bound_violation(ipm.x) < 1e-6);
    CHECK(p.max_bound_violation(spx.x) < 1e-7);
  }
}

TEST_CASE("simplex optimal basis satisfies dual sign conditions") {
  Rng rng(77);
  Problem p = random_lp(rng, 12, 8, 0.25);
  const Solution s = lp::solve_simplex(p, {});
  check_optimal(s);
  for (int j = 0; j < p.num_vars(); ++j) {
    const double rc = s.reduced_costs[j];
    const bool at_lo = std::fabs(s.x[j] - p.col_lo()[j]) < 1e-7;
    const bool at_up = std::fabs(s.x[j] - p.col_up()[j]) < 1e-7;
    if (at_lo && !at_up) CHECK(rc > -1e-6);
    if (at_up && !at_lo) CHECK(rc < 1e-6);
    if (!at_lo && !at_up) CHECK(std::fabs(rc) < 1e-6);
  }
}

TEST_CASE("interior point handles a mid-size sparse instance") {
  Rng rng(5150);
  Problem p = random_lp(rng, 220, 160, 0.2);
  const Solution s = lp::solve_interior_point(p, {});
  check_optimal(s);
  CHECK(s.iterations < 100);
  const Solution ref = lp::solve_simplex(p, {});
  check_optimal(ref);
  CHECK(std::fabs(s.objective - ref.objective) <=
        1e-6 * (1.0 + std::fabs(ref.objective)));
}

}  // TEST_SUITE
