#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "builders.hpp"
#include "conic_bnb/admm.hpp"
#include "conic_bnb/instances.hpp"
#include "conic_bnb/ipm.hpp"

using namespace conic_bnb;
using namespace builders;

namespace {

IpmResult run_to_verdict(IpmSolver& solver, int max_iter = 200) {
  IpmResult r = solver.status();
  while (r.status == SolveStatus::Running && solver.iter() < max_iter) {
    solver.iterate();
    r = solver.status();
  }
  return r;
}

} // namespace

TEST_CASE("box qp converges with the hand-solved bound multiplier") {
  // min 1/2 x^2 on [1, 2]: x* = 1, active lower bound, y_- = 1
  ConicProgram prog = box_toy();
  IpmSettings st;
  st.tol = 1e-9;
  IpmSolver solver(prog, st);
  IpmResult r = run_to_verdict(solver);
  CHECK(r.status == SolveStatus::Optimal);
  CHECK(solver.iter() < 30);
  CHECK(r.objective == doctest::Approx(0.5).epsilon(1e-7));
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-7));
  const DualIterate& it = solver.current();
  CHECK(it.convention == Convention::IPM);
  CHECK(it.y_minus[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(it.y_plus[0]) < 1e-6);
  CHECK(std::abs(solver.dual_estimate() - 0.5) < 1e-8);
}

TEST_CASE("lp lower bound multiplier equals the cost gradient") {
  // min x on [0, 1]: optimum 0, multiplier on the lower bound = 1
  ConicProgram prog = empty_program(1);
  prog.q[0] = 1.0;
  prog.l[0] = 0.0;
  prog.u[0] = 1.0;
  IpmSettings st;
  st.tol = 1e-9;
  IpmSolver solver(prog, st);
  IpmResult r = run_to_verdict(solver);
  CHECK(r.status == SolveStatus::Optimal);
  CHECK(std::abs(r.objective) < 1e-8);
  CHECK(std::abs(r.x[0]) < 1e-7);
  CHECK(solver.current().y_minus[0] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("an index with l = u is pinned through an equality row") {
  // min 1/2|x|^2 + x_1 - 3 x_2, x_1 pinned at 0.5, x_2 in [-1, 2]
  // by hand: x = (0.5, 2), obj = -3.375, y_b = (-1.5, 1)
  ConicProgram prog = empty_program(2);
  prog.P.insert(0, 0) = 1.0;
  prog.P.insert(1, 1) = 1.0;
  prog.q << 1.0, -3.0;
  prog.l << 0.5, -1.0;
  prog.u << 0.5, 2.0;
  IpmSettings st;
  st.tol = 1e-9;
  IpmSolver solver(prog, st);
  IpmResult r = run_to_verdict(solver);
  CHECK(r.status == SolveStatus::Optimal);
  CHECK(r.objective == doctest::Approx(-3.375).epsilon(1e-7));
  CHECK(r.x[0] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(r.x[1] == doctest::Approx(2.0).epsilon(1e-7));
  const DualIterate& it = solver.current();
  CHECK(it.y_minus[0] == doctest::Approx(1.5).epsilon(1e-6));
  CHECK(std::abs(it.y_plus[0]) < 1e-9);
  CHECK(it.y_plus[1] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(it.y_minus[1]) < 1e-6);
  CHECK(std::abs(solver.dual_estimate() - (-3.375)) < 1e-7);
}

TEST_CASE("an infinite upper bound carries no multiplier") {
  // min 1/2|x|^2 - 3 x_1 - 3 x_2, x in [0,1] x [0,inf):
  // x = (1, 3), upper multiplier (2, 0), obj = -7
  ConicProgram prog = empty_program(2);
  prog.P.insert(0, 0) = 1.0;
  prog.P.insert(1, 1) = 1.0;
  prog.q << -3.0, -3.0;
  prog.l << 0.0, 0.0;
  prog.u << 1.0, inf;
  IpmSettings st;
  st.tol = 1e-9;
  IpmSolver solver(prog, st);

  // identically zero on the skipped side at every iterate, not just the limit
  IpmResult r = solver.status();
  while (r.status == SolveStatus::Running && solver.iter() < 200) {
    const DualIterate& it = solver.iterate();
    CHECK(it.y_plus[1] == 0.0);
    r = solver.status();
  }
  CHECK(r.status == SolveStatus::Optimal);
  CHECK(r.objective == doctest::Approx(-7.0).epsilon(1e-7));
  CHECK(solver.current().y_plus[0] == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(std::abs(solver.dual_estimate() - (-7.0)) < 1e-6);
}

TEST_CASE("equality multiplier matches the hand kkt solution") {
  // min 1/2|x|^2 s.t. x_1 + x_2 = 2: x = (1,1), z = -1, obj 1
  ConicProgram prog = empty_program(2);
  prog.P.insert(0, 0) = 1.0;
  prog.P.insert(1, 1) = 1.0;
  prog.G.resize(1, 2);
  prog.G.insert(0, 0) = 1.0;
  prog.G.insert(0, 1) = 1.0;
  prog.h = Vec::Constant(1, 2.0);
  IpmSolver solver(prog);
  IpmResult r = run_to_verdict(solver);
  CHECK(r.status == SolveStatus::Optimal);
  CHECK(r.objective == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(solver.current().z[0] == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK(std::abs(solver.dual_estimate() - 1.0) < 1e-7);
}

TEST_CASE("a zero cone row behaves like the same equality in G") {
  ConicProgram prog = empty_program(2);
  prog.P.insert(0, 0) = 1.0;
  prog.P.insert(1, 1) = 1.0;
  prog.A.resize(1, 2);
  prog.A.insert(0, 0) = 1.0;
  prog.A.insert(0, 1) = 1.0;
  prog.b = Vec::Constant(1, 2.0);
  prog.cones = {{ConeKind::Zero, 1}};
  IpmSolver solver(prog);
  IpmResult r = run_to_verdict(solver);
  CHECK(r.status == SolveStatus::Optimal);
  CHECK(r.objective == doctest::Approx(1.0).epsilon(1e-7));
  const DualIterate& it = solver.current();
  CHECK(it.s[0] == 0.0);
  CHECK(it.y[0] == doctest::Approx(-1.0).epsilon(1e-6));
  // stationarity in the exposed convention: Px + q + A'y + y_b = 0
  Vec stat = prog.P * it.x + prog.q + prog.A.transpose() * it.y + it.y_b;
  CHECK(stat.lpNorm<Eigen::Infinity>() < 1e-7);
}

TEST_CASE("a second-order block with an empty head row folds to equalities") {
  // rows (s0; s1; s2) = (0; x - 1; 0) with s0 >= ||(s1, s2)|| force x = 1;
  // the feasible slice has no cone interior, so the tails act as equalities
  ConicProgram prog = empty_program(1);
  prog.q[0] = 1.0;
  prog.A.resize(3, 1);
  prog.A.insert(1, 0) = -1.0;
  prog.b = Vec::Zero(3);
  prog.b[1] = -1.0;
  prog.cones = {{ConeKind::SecondOrder, 3}};
  prog.l[0] = -10.0;
  prog.u[0] = 10.0;
  IpmSolver solver(prog);
  IpmResult r = run_to_verdict(solver);
  CHECK(r.status == SolveStatus::Optimal);
  CHECK(r.objective == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-7));
  const DualIterate& it = solver.current();
  // the head multiplier is rebuilt as the tail norm, the smallest value that
  // keeps y inside the dual cone
  CHECK(it.y[0] == doctest::Approx(it.y.segment(1, 2).norm()).epsilon(1e-12));
  CHECK(it.y[1] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(in_dual_cone(prog.cones, it.y, 1e-9));
  Vec stat = prog.P * it.x + prog.q + prog.A.transpose() * it.y + it.y_b;
  CHECK(stat.lpNorm<Eigen::Infinity>() < 1e-6);
}

TEST_CASE("an empty head row with negative offset is infeasible outright") {
  // the head slack is pinned at -1, which no second-order member allows
  ConicProgram prog = empty_program(1);
  prog.A.resize(2, 1);
  prog.A.insert(1, 0) = -1.0;
  prog.b = Vec::Zero(2);
  prog.b[0] = -1.0;
  prog.cones = {{ConeKind::SecondOrder, 2}};
  IpmSolver solver(prog);
  IpmResult r = run_to_verdict(solver, 3);
  CHECK(r.status == SolveStatus::PrimalInfeasible);
  REQUIRE(r.certificate.size() == 3); // stacked (z, y, y_b)
  Vec y = r.certificate.segment(0, 2);
  CHECK(in_dual_cone(prog.cones, y, 1e-12));
  CHECK((prog.A.transpose() * y).lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK(-prog.b.dot(y) > 1e-3);
}

TEST_CASE("factorization breakdown freezes the iterate instead of throwing") {
  // a pinned binary plus a risk budget at the minimum variance leaves the
  // node relaxation without an interior; the scaling eventually degenerates
  PortfolioConfig cfg = random_portfolio_config(8, 6, 2);
  Vec w = Vec::Zero(cfg.n);
  for (Index i = 0; i < cfg.K; ++i) w[i] = 1.0 / static_cast<double>(cfg.K);
  cfg.rho = 1.5 * (cfg.F * w).squaredNorm();
  ConicProgram prog = gen_portfolio(cfg).relaxation;
  prog.l[2 * cfg.n] = 0.0;
  prog.u[2 * cfg.n] = 0.0;
  IpmSolver solver(prog);
  IpmResult r;
  REQUIRE_NOTHROW(r = run_to_verdict(solver, 80));
  CHECK(solver.stalled());
  CHECK(r.status == SolveStatus::Running); // a caller cap turns this into a limit
  // frozen for good: further iterates advance the count but not the point
  Vec x_frozen = solver.current().x;
  solver.iterate();
  CHECK(solver.iter() == 81);
  CHECK((solver.current().x - x_frozen).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("iterates stay strictly conic and newton solves stay tight") {
  std::mt19937_64 rng(71);
  ConicProgram prog = random_program(rng, 6, 2, 3, 3);
  IpmSolver solver(prog);
  std::vector<double> destimates;
  IpmResult r = solver.status();
  while (r.status == SolveStatus::Running && solver.iter() < 200) {
    const DualIterate& it = solver.iterate();
    REQUIRE(in_cone(prog.cones, it.s, 1e-12));
    REQUIRE(in_dual_cone(prog.cones, it.y, 1e-12));
    REQUIRE((it.y_plus.array() >= 0.0).all());
    REQUIRE((it.y_minus.array() >= 0.0).all());
    REQUIRE(solver.last_kkt_residual() <= 1e-8);
    destimates.push_back(solver.dual_estimate());
    r = solver.status();
  }
  CHECK(r.status == SolveStatus::Optimal);

  // primal feasibility of the reported solution
  Vec slack = prog.b - prog.A * r.x;
  CHECK(in_cone(prog.cones, slack, 1e-6));
  CHECK((prog.G * r.x - prog.h).lpNorm<Eigen::Infinity>() < 1e-6);

  // the uncorrected dual estimate tends to climb into the optimum; the paper
  // treats this as a heuristic, so regressions only warn
  const size_t k = destimates.size();
  for (size_t i = k >= 5 ? k - 5 : 1; i < k; ++i) {
    WARN_MESSAGE(destimates[i] >= destimates[i - 1] - 1e-9,
                 "dual estimate dipped near convergence at step " << i);
  }
}

TEST_CASE("dual estimate is finite from the first iterate") {
  std::mt19937_64 rng(5);
  ConicProgram prog = random_program(rng, 5, 1, 2, 3);
  prog.u[0] = inf;
  prog.l[1] = -inf;
  IpmSolver solver(prog);
  CHECK(std::isfinite(solver.dual_estimate()));
  solver.iterate();
  CHECK(std::isfinite(solver.dual_estimate()));
}

TEST_CASE("with no duals the estimate reduces to the quadratic term") {
  ConicProgram prog = empty_program(2);
  prog.P.insert(0, 0) = 2.0;
  prog.P.insert(1, 1) = 4.0;
  prog.q << 1.0, 1.0;
  IpmSolver solver(prog);
  DualIterate it;
  it.convention = Convention::IPM;
  it.x = Vec(2);
  it.x << 2.0, -1.0;
  it.s = Vec(0);
  it.y = Vec(0);
  it.z = Vec(0);
  it.y_b = Vec::Zero(2);
  solver.warm_start(it);
  // -1/2 x'Px = -(4 + 2) = -6, no other term survives
  CHECK(solver.dual_estimate() == doctest::Approx(-6.0));
}

TEST_CASE("inconsistent equality against the box is flagged primal infeasible") {
  ConicProgram prog = empty_program(1);
  prog.G.resize(1, 1);
  prog.G.insert(0, 0) = 1.0;
  prog.h = Vec::Constant(1, 2.0);
  prog.l[0] = 0.0;
  prog.u[0] = 1.0;
  IpmSolver solver(prog);
  IpmResult r = run_to_verdict(solver);
  CHECK(r.status == SolveStatus::PrimalInfeasible);
  REQUIRE(r.certificate.size() == 2); // stacked (z, y, y_b)
  // the certificate satisfies the Farkas conditions of the exposed problem
  const double z = r.certificate[0];
  const double yb = r.certificate[1];
  CHECK(std::abs(z + yb) < 1e-6);
  Vec ybv = Vec::Constant(1, yb);
  const double gain = -prog.h[0] * z - support_box(prog.l, prog.u, ybv);
  CHECK(gain > 1e-3);
}

TEST_CASE("unbounded descent is flagged dual infeasible") {
  // min -x with only x >= 0 through a cone row: primal unbounded
  ConicProgram prog = empty_program(1);
  prog.q[0] = -1.0;
  prog.A.resize(1, 1);
  prog.A.insert(0, 0) = -1.0;
  prog.b = Vec::Zero(1);
  prog.cones = {{ConeKind::Nonnegative, 1}};
  IpmSolver solver(prog);
  IpmResult r = run_to_verdict(solver);
  CHECK(r.status == SolveStatus::DualInfeasible);
  REQUIRE(r.certificate.size() == 1);
  CHECK(prog.q.dot(r.certificate) == doctest::Approx(-1.0));
  CHECK(r.certificate[0] > 0.0);
}

TEST_CASE("constructor rejects an invalid program") {
  ConicProgram prog = empty_program(1);
  prog.l[0] = 2.0;
  prog.u[0] = 1.0;
  CHECK_THROWS_AS(IpmSolver{prog}, std::invalid_argument);
}

TEST_CASE("warm starting from the solved point converges at least as fast") {
  ConicProgram prog = box_toy();
  IpmSolver cold(prog);
  IpmResult rc = run_to_verdict(cold);
  REQUIRE(rc.status == SolveStatus::Optimal);

  IpmSolver warm(prog);
  warm.warm_start(cold.current());
  IpmResult rw = run_to_verdict(warm);
  CHECK(rw.status == SolveStatus::Optimal);
  CHECK(warm.iter() <= cold.iter());
  CHECK(rw.objective == doctest::Approx(rc.objective).epsilon(1e-7));
}

TEST_CASE("warm start accepts a splitting-convention iterate") {
  std::mt19937_64 rng(19);
  ConicProgram prog = random_program(rng, 5, 1, 3, 0);
  AdmmSolver admm(prog);
  AdmmResult ra;
  for (int k = 0; k < 20000; ++k) {
    admm.iterate();
    if (k % 25 == 24) {
      ra = admm.status();
      if (ra.status != SolveStatus::Running) break;
    }
  }
  REQUIRE(ra.status == SolveStatus::Optimal);

  IpmSolver ipm(prog);
  ipm.warm_start(admm.current());
  IpmResult ri = run_to_verdict(ipm);
  CHECK(ri.status == SolveStatus::Optimal);
  CHECK(ri.objective == doctest::Approx(ra.objective).epsilon(1e-5));
}

TEST_CASE("warm start rejects mismatched dimensions") {
  IpmSolver solver(box_toy());
  DualIterate bad;
  bad.x = Vec::Zero(3);
  bad.s = Vec(0);
  bad.y = Vec(0);
  bad.z = Vec(0);
  bad.y_b = Vec::Zero(3);
  CHECK_THROWS_AS(solver.warm_start(bad), std::invalid_argument);
}

TEST_CASE("interior-point and splitting solvers agree on random relaxations") {
  std::mt19937_64 rng(2026);
  for (int trial = 0; trial < 5; ++trial) {
    ConicProgram prog = random_program(rng, 6, 2, 3, trial % 2 ? 3 : 0);
    IpmSolver ipm(prog);
    IpmResult ri = run_to_verdict(ipm);
    REQUIRE(ri.status == SolveStatus::Optimal);

    AdmmSolver admm(prog);
    AdmmResult ra;
    for (int k = 0; k < 200000; ++k) {
      admm.iterate();
      if (k % 25 == 24) {
        ra = admm.status();
        if (ra.status != SolveStatus::Running) break;
      }
    }
    REQUIRE(ra.status == SolveStatus::Optimal);
    const double denom = 1.0 + std::max(std::abs(ri.objective), std::abs(ra.objective));
    CHECK(std::abs(ri.objective - ra.objective) / denom < 1e-5);
  }
}
