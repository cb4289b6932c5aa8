#include "conic_bnb/correction.hpp"

#include <algorithm>
#include <stdexcept>

#include "conic_bnb/cones.hpp"

namespace conic_bnb {

namespace {

// Correction system matrix in full symmetric storage, block order (x, B, G).
SpMat assemble_system(const SpMat& P, const std::vector<Index>& B, const SpMat& G,
                      double eta, double gamma) {
  const Index n = P.cols(), nb = (Index)B.size(), p = G.rows();
  const Index N = n + nb + p;
  std::vector<Triplet> t;
  t.reserve(P.nonZeros() + 4 * nb + 4 * G.nonZeros() + p);
  for (Index c = 0; c < P.outerSize(); ++c)
    for (SpMat::InnerIterator it(P, c); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
  for (Index j = 0; j < nb; ++j) {
    t.emplace_back(n + j, B[(size_t)j], 1.0);
    t.emplace_back(B[(size_t)j], n + j, 1.0);
    t.emplace_back(n + j, n + j, -eta);
  }
  for (Index c = 0; c < G.outerSize(); ++c)
    for (SpMat::InnerIterator it(G, c); it; ++it) {
      t.emplace_back(n + nb + it.row(), it.col(), it.value());
      t.emplace_back(it.col(), n + nb + it.row(), it.value());
    }
  for (Index k = 0; k < p; ++k) t.emplace_back(n + nb + k, n + nb + k, -gamma);
  SpMat M(N, N);
  M.setFromTriplets(t.begin(), t.end());
  return M;
}

void check_bounded_set(const std::vector<Index>& B, Index n) {
  for (size_t j = 0; j < B.size(); ++j) {
    if (B[j] < 0 || B[j] >= n)
      throw std::invalid_argument("correction: bounded-set index out of range");
    if (j > 0 && B[j] <= B[j - 1])
      throw std::invalid_argument("correction: bounded set must be sorted and distinct");
  }
}

void check_iterate_dims(const ConicProgram& prog, const DualIterate& it) {
  bool ok = it.x.size() == prog.n() && it.z.size() == prog.p() && it.y.size() == prog.m() &&
            it.y_b.size() == prog.n();
  if (it.convention == Convention::IPM)
    ok = ok && it.y_plus.size() == prog.n() && it.y_minus.size() == prog.n();
  if (!ok)
    throw std::invalid_argument("correction: iterate dimensions do not match the program");
}

double inf_norm(const Vec& v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; }

} // namespace

Vec dual_residual(const ConicProgram& prog, const DualIterate& it) {
  check_iterate_dims(prog, it);
  Vec r = prog.P * it.x + prog.q + prog.G.transpose() * it.z;
  if (it.convention == Convention::OSM) {
    r -= prog.A.transpose() * it.y;
    r += it.y_b;
  } else {
    r += prog.A.transpose() * it.y;
    r += it.y_plus - it.y_minus;
  }
  return r;
}

std::optional<Correction> simple_correction(const ConicProgram& prog, const Vec& r) {
  const Index n = prog.n();
  if (r.size() != n) throw std::invalid_argument("simple_correction: residual has wrong size");
  for (Index i = 0; i < n; ++i)
    if (!is_finite(prog.l[i]) || !is_finite(prog.u[i])) return std::nullopt;
  Correction c;
  c.method = Correction::Method::Simple;
  c.dx = Vec::Zero(n);
  c.dz = Vec::Zero(prog.p());
  c.dy_b = -r;
  c.dy_plus = c.dy_b.cwiseMax(0.0);
  c.dy_minus = c.dy_plus - c.dy_b;
  return c;
}

std::vector<Index> default_bounded_set(const ConicProgram& prog) {
  std::vector<Index> B;
  for (Index i = 0; i < prog.n(); ++i)
    if (is_finite(prog.l[i]) && is_finite(prog.u[i])) B.push_back(i);
  return B;
}

bool rank_check(const SpMat& P, const std::vector<Index>& B, const SpMat& G) {
  const Index n = P.cols(), nb = (Index)B.size(), p = G.rows();
  check_bounded_set(B, n);
  SpMat M = assemble_system(P, B, G, 1.0, 1.0);
  // Eliminate the -I blocks first: their pivots are exactly -1, and the
  // trailing Schur complement P + I_B'I_B + G'G is PSD, where rank-detect
  // drops are sound. Its positive-definiteness is exactly the rank condition.
  std::vector<int> order;
  order.reserve((size_t)M.rows());
  for (Index j = 0; j < nb + p; ++j) order.push_back((int)(n + j));
  for (Index i = 0; i < n; ++i) order.push_back((int)i);
  LdlFactor f;
  f.analyze(M, order);
  const double drop_tol = 1e-10 * std::max(1.0, f.matrix_max_abs());
  return f.factor_rank_detect(M, drop_tol) == 0;
}

CorrectionEngine::CorrectionEngine(const ConicProgram& prog, std::vector<Index> B,
                                   double eta, double gamma)
    : B_(std::move(B)), eta_(eta), gamma_(gamma), n_(prog.n()), p_(prog.p()) {
  if (!(eta_ > 0.0) || !(gamma_ > 0.0))
    throw std::invalid_argument("CorrectionEngine: eta and gamma must be positive");
  std::sort(B_.begin(), B_.end());
  B_.erase(std::unique(B_.begin(), B_.end()), B_.end());
  check_bounded_set(B_, n_);
  if (!rank_check(prog.P, B_, prog.G))
    throw SingularMatrixError(
        "CorrectionEngine: stacked [P; I_B; G] does not have full column rank, "
        "cannot guarantee a dual-feasible correction; bound more variables or "
        "add equality rows");
  SpMat M = assemble_system(prog.P, B_, prog.G, eta_, gamma_);
  IVec sign(M.rows());
  sign.head(n_).setOnes();
  sign.tail(M.rows() - n_).setConstant(-1);
  kkt_ = qd_factor(M, sign, 1e-8, true);
}

Vec CorrectionEngine::solve(const ConicProgram& prog, const Vec& x, const Vec& r) const {
  if (x.size() != n_ || r.size() != n_ || prog.n() != n_ || prog.p() != p_)
    throw std::invalid_argument("CorrectionEngine::solve: dimension mismatch");
  const Index nb = (Index)B_.size();
  Vec rhs(n_ + nb + p_);
  rhs.head(n_) = -r;
  for (Index j = 0; j < nb; ++j) rhs[n_ + j] = -x[B_[(size_t)j]];
  rhs.tail(p_) = prog.h - prog.G * x;
  return qd_solve(kkt_, rhs);
}

Correction opt_correction(const CorrectionEngine& engine, const ConicProgram& prog,
                          const DualIterate& it, const Vec& r) {
  check_iterate_dims(prog, it);
  const Index n = prog.n(), nb = (Index)engine.bounded_set().size();
  Vec sol = engine.solve(prog, it.x, r);
  Correction c;
  c.method = Correction::Method::OptimizationBased;
  c.dx = sol.head(n);
  c.dyB = sol.segment(n, nb);
  c.dz = sol.tail(prog.p());
  c.dy_b = Vec::Zero(n);
  for (Index j = 0; j < nb; ++j) c.dy_b[engine.bounded_set()[(size_t)j]] = c.dyB[j];
  c.dy_plus = c.dy_b.cwiseMax(0.0);
  c.dy_minus = c.dy_plus - c.dy_b;
  const double res = (prog.P * c.dx + c.dy_b + prog.G.transpose() * c.dz + r)
                         .lpNorm<Eigen::Infinity>();
  if (!(res <= 1e-8 * (1.0 + r.lpNorm<Eigen::Infinity>())))
    throw RefinementError("opt_correction: corrected residual did not cancel");
  return c;
}

double corrected_dual_cost(const ConicProgram& prog, const DualIterate& it,
                           const Correction& corr) {
  check_iterate_dims(prog, it);
  const Vec x = it.x + corr.dx;
  const Vec z = it.z + corr.dz;
  const Vec y_b = it.y_b + corr.dy_b;

  // Guard against internal bugs: the corrected point must be stationary and
  // keep the split multipliers nonnegative, or the value is not a bound.
  Vec rhat = prog.P * x + prog.q + prog.G.transpose() * z;
  if (it.convention == Convention::OSM)
    rhat += -prog.A.transpose() * it.y + y_b;
  else
    rhat += prog.A.transpose() * it.y + (it.y_plus + corr.dy_plus) - (it.y_minus + corr.dy_minus);
  const double scale = 1.0 + inf_norm(x) + inf_norm(z) + inf_norm(y_b) + inf_norm(it.y);
  bool split_ok = corr.dy_plus.size() == prog.n() && corr.dy_minus.size() == prog.n() &&
                  corr.dy_plus.minCoeff() >= -1e-12 && corr.dy_minus.minCoeff() >= -1e-12 &&
                  inf_norm(corr.dy_plus - corr.dy_minus - corr.dy_b) <= 1e-12;
  if (inf_norm(rhat) > 1e-6 * scale || !split_ok)
    throw std::logic_error("corrected_dual_cost: corrected point is not dual feasible");

  // The box term depends on y_plus, y_minus only through their difference,
  // and any nonnegative split of the corrected y_b is dual feasible, so we
  // evaluate the tightest one: the complementary split, i.e. -support(y_b).
  // Summing the iterate and correction splits componentwise would concede
  // overlap'(u - l) of bound for nothing.
  const double sb = support_box(prog.l, prog.u, y_b);
  if (!is_finite(sb)) return -inf;
  const double quad = -0.5 * x.dot(prog.P * x) - prog.h.dot(z) - sb;
  return it.convention == Convention::OSM ? quad + prog.b.dot(it.y) : quad - prog.b.dot(it.y);
}

} // namespace conic_bnb
