#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "conic_bnb/problem.hpp"
#include "oracles.hpp"

using namespace conic_bnb;

namespace {

// min 1/2 (2) x^2 - 0.8 x over x in [-2, 2], x integer {0, 1}
MicpProblem tiny_miqp() {
  MicpProblem prob;
  ConicProgram& rel = prob.relaxation;
  rel.P = SpMat(1, 1);
  rel.P.insert(0, 0) = 2.0;
  rel.q = Vec::Constant(1, -0.8);
  rel.G = SpMat(0, 1);
  rel.h = Vec(0);
  rel.A = SpMat(0, 1);
  rel.b = Vec(0);
  rel.l = Vec::Constant(1, -2.0);
  rel.u = Vec::Constant(1, 2.0);
  prob.integers = {{0, {0.0, 1.0}}};
  return prob;
}

} // namespace

TEST_CASE("validate accepts a well-formed MIQP") {
  CHECK(validate(tiny_miqp()).empty());
}

TEST_CASE("validate flags bound and partition violations") {
  auto prob = tiny_miqp();
  prob.relaxation.l[0] = 1.0;
  prob.relaxation.u[0] = 0.0;
  auto v = validate(prob.relaxation);
  REQUIRE(v.size() >= 1);
  CHECK(v[0].message == "l > u");
  CHECK(v[0].index == 0);

  auto prob2 = tiny_miqp();
  prob2.relaxation.cones.push_back({ConeKind::Nonnegative, 1}); // A still has 0 rows
  auto v2 = validate(prob2.relaxation);
  bool found = false;
  for (const auto& viol : v2)
    if (viol.message.find("partition") != std::string::npos) found = true;
  CHECK(found);
}

TEST_CASE("validate checks integer sets") {
  auto prob = tiny_miqp();
  prob.integers[0].values = {1.0, 0.0}; // unsorted
  CHECK_FALSE(validate(prob).empty());

  prob = tiny_miqp();
  prob.integers[0].values = {0.0, 5.0}; // outside root box
  CHECK_FALSE(validate(prob).empty());

  prob = tiny_miqp();
  prob.integers[0].index = 3;
  CHECK_FALSE(validate(prob).empty());
}

TEST_CASE("build_relaxation replaces the box and rejects escapes") {
  auto prob = tiny_miqp();
  auto root = build_relaxation(prob, prob.relaxation.l, prob.relaxation.u);
  CHECK(root.l[0] == -2.0);
  CHECK(root.u[0] == 2.0);

  Vec nl = Vec::Constant(1, -2.0), nu = Vec::Constant(1, 0.0);
  auto node = build_relaxation(prob, nl, nu); // down branch on {0,1}
  CHECK(node.u[0] == 0.0);
  CHECK(node.P.coeff(0, 0) == 2.0); // shared data intact

  Vec bad = Vec::Constant(1, 3.0);
  CHECK_THROWS_AS(build_relaxation(prob, nl, bad), std::invalid_argument);
  Vec crossed_l = Vec::Constant(1, 1.0), crossed_u = Vec::Constant(1, 0.0);
  CHECK_THROWS_AS(build_relaxation(prob, crossed_l, crossed_u), std::invalid_argument);
}

TEST_CASE("primal objective") {
  ConicProgram prog;
  prog.P = SpMat(1, 1);
  prog.P.insert(0, 0) = 1.0;
  prog.q = Vec::Zero(1);
  CHECK(primal_objective(prog, Vec::Constant(1, 1.0)) == doctest::Approx(0.5));
  CHECK(primal_objective(prog, Vec::Zero(1)) == 0.0);

  ConicProgram prog2;
  prog2.P = SpMat(2, 2);
  prog2.P.insert(0, 0) = 2.0;
  prog2.P.insert(1, 1) = 2.0;
  prog2.q = Vec(2);
  prog2.q << 1, -1;
  Vec x(2);
  x << 1, 1;
  CHECK(primal_objective(prog2, x) == doctest::Approx(2.0));
  CHECK_THROWS_AS(primal_objective(prog2, Vec::Zero(3)), std::invalid_argument);
}

TEST_CASE("objective is invariant under symmetrization of P") {
  std::mt19937_64 rng(3);
  const Index n = 5;
  Mat Pd(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) Pd(i, j) = oracle::runif(rng, -1.0, 1.0);
  ConicProgram a, b;
  a.P = Pd.sparseView();
  b.P = Mat(0.5 * (Pd + Pd.transpose())).sparseView();
  a.q = b.q = Vec::Zero(n);
  for (int trial = 0; trial < 20; ++trial) {
    Vec x(n);
    for (Index i = 0; i < n; ++i) x[i] = oracle::runif(rng, -2.0, 2.0);
    CHECK(primal_objective(a, x) == doctest::Approx(primal_objective(b, x)).epsilon(1e-12));
  }
}

TEST_CASE("integer feasibility tolerance is inclusive") {
  auto prob = tiny_miqp();
  CHECK(is_integer_feasible(Vec::Constant(1, 1.0000001), prob, 1e-6));
  CHECK_FALSE(is_integer_feasible(Vec::Constant(1, 0.5), prob, 1e-6));
  // boundary case |x - 1| == tol must pass; use a power of two so the
  // distance is exactly representable
  const double tol = 0x1.0p-20;
  CHECK(is_integer_feasible(Vec::Constant(1, 1.0 - tol), prob, tol));
}

TEST_CASE("symmetrize mirrors one triangle") {
  SpMat tri(3, 3);
  tri.insert(0, 0) = 2.0;
  tri.insert(0, 2) = 1.5;
  tri.insert(1, 2) = -1.0;
  SpMat full = symmetrize(tri);
  CHECK(full.coeff(2, 0) == 1.5);
  CHECK(full.coeff(0, 2) == 1.5);
  CHECK(full.coeff(2, 1) == -1.0);
  CHECK(full.coeff(0, 0) == 2.0);
  SpMat diff = SpMat(full.transpose()) - full;
  CHECK(diff.norm() == 0.0);
}
