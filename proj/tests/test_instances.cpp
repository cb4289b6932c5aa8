#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "builders.hpp"
#include "conic_bnb/admm.hpp"
#include "conic_bnb/branch_bound.hpp"
#include "conic_bnb/correction.hpp"
#include "conic_bnb/instances.hpp"
#include "conic_bnb/ipm.hpp"
#include "oracles.hpp"

using namespace conic_bnb;

namespace {

IpmResult solve_ipm(const ConicProgram& prog, int max_iter = 400) {
  IpmSolver solver(prog);
  for (int k = 0; k < max_iter; ++k) {
    IpmResult r = solver.status();
    if (r.status != SolveStatus::Running) return r;
    solver.iterate();
  }
  return solver.status();
}

bool same_program(const ConicProgram& a, const ConicProgram& b) {
  return Mat(a.P) == Mat(b.P) && a.q == b.q && Mat(a.G) == Mat(b.G) && a.h == b.h &&
         Mat(a.A) == Mat(b.A) && a.b == b.b && a.l == b.l && a.u == b.u &&
         a.cones.size() == b.cones.size();
}

} // namespace

TEST_CASE("mpc generator dimensions match the stacked forms") {
  MpcConfig cfg = random_mpc_config(5, 12, 6, 8, MpcForm::Condensed);
  MicpProblem cond = gen_mpc(cfg);
  CHECK(cond.relaxation.n() == 48);
  CHECK(cond.relaxation.p() == 0);
  CHECK(cond.integers.size() == 48);
  CHECK(validate(cond).empty());

  cfg.form = MpcForm::Sparse;
  MicpProblem sp = gen_mpc(cfg);
  CHECK(sp.relaxation.n() == 156);
  CHECK(sp.relaxation.p() == 108);
  CHECK(sp.integers.size() == 48);
  CHECK(sp.relaxation.m() == 2 * 6 * 8);
  REQUIRE(sp.relaxation.cones.size() == 1);
  CHECK(sp.relaxation.cones[0].kind == ConeKind::Nonnegative);
  CHECK(validate(sp).empty());

  // states are unconstrained, inputs carry the value-set box
  for (Index i = 0; i < 12 * 9; ++i) {
    CHECK(sp.relaxation.l[i] == -inf);
    CHECK(sp.relaxation.u[i] == inf);
  }
  for (Index k = 0; k < 48; ++k) {
    CHECK(sp.relaxation.l[108 + k] == -1.0);
    CHECK(sp.relaxation.u[108 + k] == 1.0);
    CHECK(sp.integers[k].index == 108 + k);
  }
}

TEST_CASE("sparse mpc always satisfies the correction rank condition") {
  for (int s = 0; s < 20; ++s) {
    MpcConfig cfg = random_mpc_config(100 + s, 3 + s % 3, 1 + s % 2, 2 + s % 3);
    if (s % 2 == 1) cfg.Abar *= 1.3; // unstable dynamics must not matter
    MicpProblem prob = gen_mpc(cfg);
    CAPTURE(s);
    CHECK(rank_check(prob.relaxation.P, default_bounded_set(prob.relaxation),
                     prob.relaxation.G));
  }
}

TEST_CASE("condensed and sparse mpc agree after the eliminated constant") {
  for (std::uint64_t seed : {11, 12, 13}) {
    MpcConfig cfg = random_mpc_config(seed, 2 + seed % 3, 1 + seed % 2, 2 + seed % 3);
    cfg.form = MpcForm::Sparse;
    MicpProblem sp = gen_mpc(cfg);
    cfg.form = MpcForm::Condensed;
    MicpProblem cond = gen_mpc(cfg);

    BnbConfig bc;
    BnbResult rs = bnb_solve(sp, bc);
    BnbResult rc = bnb_solve(cond, bc);
    REQUIRE(rs.status == BnbStatus::Optimal);
    REQUIRE(rc.status == BnbStatus::Optimal);
    CAPTURE(seed);
    // the condensed form drops the input-independent cost term; add it back
    const double offset = mpc_condensed_offset(cfg);
    CHECK(rs.objective == doctest::Approx(rc.objective + offset).epsilon(1e-5));

    // applied input sequences match too
    const Index nu_t = cond.relaxation.n();
    const Index state_len = sp.relaxation.n() - nu_t;
    for (Index k = 0; k < nu_t; ++k)
      CHECK(rs.x[state_len + k] == doctest::Approx(rc.x[k]).epsilon(1e-4).scale(1.0));
  }
}

TEST_CASE("mpc solutions obey dynamics and ramp limits") {
  MpcConfig cfg = random_mpc_config(7, 3, 2, 3);
  cfg.u_prev = Vec::Constant(2, 1.0); // makes the first ramp row bind both sides
  MicpProblem prob = gen_mpc(cfg);
  BnbResult res = bnb_solve(prob, {});
  REQUIRE(res.status == BnbStatus::Optimal);
  const Index nx = cfg.n_x, nu = cfg.n_u, T = cfg.T;
  auto xt = [&](Index t) { return res.x.segment(t * nx, nx); };
  auto ut = [&](Index t) { return res.x.segment(nx * (T + 1) + t * nu, nu); };
  CHECK((xt(0) - cfg.x_init).lpNorm<Eigen::Infinity>() < 1e-6);
  for (Index t = 0; t < T; ++t) {
    CHECK((xt(t + 1) - cfg.Abar * xt(t) - cfg.Bbar * ut(t)).lpNorm<Eigen::Infinity>() < 1e-6);
    Vec prev = t == 0 ? cfg.u_prev : Vec(ut(t - 1));
    CHECK((ut(t) - prev).lpNorm<Eigen::Infinity>() <= 1.0 + 1e-6);
    for (Index j = 0; j < nu; ++j) {
      const double v = ut(t)[j];
      CHECK(std::min({std::abs(v + 1.0), std::abs(v), std::abs(v - 1.0)}) < 1e-6);
    }
  }
}

TEST_CASE("generators are deterministic in the seed") {
  MicpProblem a = gen_mpc(random_mpc_config(42, 3, 2, 3));
  MicpProblem b = gen_mpc(random_mpc_config(42, 3, 2, 3));
  CHECK(same_program(a.relaxation, b.relaxation));
  MicpProblem c = gen_mpc(random_mpc_config(43, 3, 2, 3));
  CHECK(!same_program(a.relaxation, c.relaxation));

  MicpProblem pa = gen_portfolio(random_portfolio_config(9, 8, 2));
  MicpProblem pb = gen_portfolio(random_portfolio_config(9, 8, 2));
  CHECK(same_program(pa.relaxation, pb.relaxation));

  MicpProblem qa = gen_random_miqp(6, 3, 17, true);
  MicpProblem qb = gen_random_miqp(6, 3, 17, true);
  CHECK(same_program(qa.relaxation, qb.relaxation));
  CHECK(qa.integers.size() == 3);
}

TEST_CASE("portfolio generator structure at the quoted scale") {
  PortfolioConfig cfg = random_portfolio_config(3);
  MicpProblem prob = gen_portfolio(cfg);
  CHECK(prob.relaxation.n() == 63);
  CHECK(prob.integers.size() == 23);
  CHECK(prob.relaxation.p() == 1);
  REQUIRE(prob.relaxation.cones.size() == 2);
  CHECK(prob.relaxation.cones[0].kind == ConeKind::Nonnegative);
  CHECK(prob.relaxation.cones[0].dim == 3 * 20 + 3 + 3);
  CHECK(prob.relaxation.cones[1].kind == ConeKind::SecondOrder);
  CHECK(prob.relaxation.cones[1].dim == 21);
  CHECK(validate(prob).empty());

  // the relaxation is feasible by construction
  IpmResult root = solve_ipm(prob.relaxation);
  CHECK(root.status == SolveStatus::Optimal);
}

TEST_CASE("small portfolio instances solve and satisfy the model") {
  PortfolioConfig cfg = random_portfolio_config(21, 6, 2);
  MicpProblem prob = gen_portfolio(cfg);
  BnbResult res = bnb_solve(prob, {});
  REQUIRE(res.status == BnbStatus::Optimal);
  const Index n = cfg.n, L = cfg.L;
  Vec xp = res.x.segment(0, n), xm = res.x.segment(n, n);
  Vec b = res.x.segment(2 * n, n), l = res.x.segment(3 * n, L);
  const double tol = 1e-5;
  CHECK(std::abs(xp.sum() - xm.sum() - 1.0) < tol);
  CHECK((cfg.F * (xp - xm)).norm() <= std::sqrt(cfg.rho) + tol);
  CHECK(b.sum() <= cfg.K + tol);
  CHECK(l.sum() >= cfg.L_min - tol);
  CHECK(l.sum() <= cfg.L_max + tol);
  for (Index i = 0; i < n; ++i) {
    CHECK(std::min(std::abs(b[i]), std::abs(b[i] - 1.0)) < 1e-6);
    CHECK(xp[i] <= b[i] + tol);
    CHECK(xm[i] <= b[i] + tol);
    CHECK(b[i] <= (cfg.H.row(i) * l)(0) + tol);
  }
  for (Index j = 0; j < L; ++j) {
    CHECK(std::min(std::abs(l[j]), std::abs(l[j] - 1.0)) < 1e-6);
    CHECK(l[j] <= (cfg.H.col(j).transpose() * b)(0) + tol);
  }
}

TEST_CASE("zero risk budget makes the portfolio relaxation infeasible") {
  PortfolioConfig cfg = random_portfolio_config(4, 6, 2);
  cfg.rho = 0.0;
  MicpProblem prob = gen_portfolio(cfg);
  IpmResult root = solve_ipm(prob.relaxation);
  CHECK(root.status == SolveStatus::PrimalInfeasible);

  AdmmSolver admm(prob.relaxation);
  AdmmResult ar = admm.status();
  for (long k = 0; k < 150000 && ar.status == SolveStatus::Running; ++k) {
    admm.iterate();
    if (k % 25 == 0) ar = admm.status();
  }
  CHECK(ar.status == SolveStatus::PrimalInfeasible);
}

TEST_CASE("random miqps match the enumeration oracle") {
  for (bool eq : {false, true}) {
    MicpProblem prob = gen_random_miqp(6, 3, 31, eq);
    CHECK(validate(prob).empty());
    auto ref = oracle::miqp_oracle(prob);
    REQUIRE(ref.has_value());
    BnbResult res = bnb_solve(prob, {});
    CAPTURE(eq);
    CHECK(res.status == BnbStatus::Optimal);
    CHECK(res.objective == doctest::Approx(ref->first).epsilon(1e-6));
  }
  CHECK_THROWS_AS(gen_random_miqp(3, 5, 1), std::invalid_argument);
}
