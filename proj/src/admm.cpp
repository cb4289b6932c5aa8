#include "conic_bnb/admm.hpp"

#include <cmath>
#include <stdexcept>

namespace conic_bnb {

namespace {

SpMat stack_constraints(const ConicProgram& prog) {
  const Index n = prog.n(), p = prog.p(), m = prog.m();
  std::vector<Triplet> ts;
  ts.reserve(static_cast<size_t>(prog.G.nonZeros() + prog.A.nonZeros() + n));
  for (int k = 0; k < prog.G.outerSize(); ++k)
    for (SpMat::InnerIterator it(prog.G, k); it; ++it)
      ts.emplace_back(it.row(), it.col(), it.value());
  for (int k = 0; k < prog.A.outerSize(); ++k)
    for (SpMat::InnerIterator it(prog.A, k); it; ++it)
      ts.emplace_back(p + it.row(), it.col(), it.value());
  for (Index i = 0; i < n; ++i) ts.emplace_back(p + m + i, i, -1.0);
  SpMat At(p + m + n, n);
  At.setFromTriplets(ts.begin(), ts.end());
  return At;
}

SpMat splitting_kkt(const SpMat& P, const SpMat& At, double sigma, double rho) {
  const Index n = P.rows(), nt = At.rows();
  std::vector<Triplet> ts;
  ts.reserve(static_cast<size_t>(P.nonZeros() + 2 * At.nonZeros() + n + nt));
  for (int k = 0; k < P.outerSize(); ++k)
    for (SpMat::InnerIterator it(P, k); it; ++it)
      ts.emplace_back(it.row(), it.col(), it.value());
  for (Index i = 0; i < n; ++i) ts.emplace_back(i, i, sigma);
  for (int k = 0; k < At.outerSize(); ++k)
    for (SpMat::InnerIterator it(At, k); it; ++it) {
      ts.emplace_back(n + it.row(), it.col(), it.value());
      ts.emplace_back(it.col(), n + it.row(), it.value());
    }
  for (Index i = 0; i < nt; ++i) ts.emplace_back(n + i, n + i, -1.0 / rho);
  SpMat K(n + nt, n + nt);
  K.setFromTriplets(ts.begin(), ts.end());
  return K;
}

} // namespace

AdmmSolver::AdmmSolver(const ConicProgram& prog, AdmmSettings settings)
    : prog_(prog), st_(settings), work_(prog.cones) {
  auto viols = validate(prog_);
  if (!viols.empty())
    throw std::invalid_argument("AdmmSolver: invalid program: " + viols.front().message);
  n_ = prog_.n();
  p_ = prog_.p();
  m_ = prog_.m();
  nt_ = p_ + m_ + n_;
  At_ = stack_constraints(prog_);
  bt_.resize(nt_);
  bt_ << prog_.h, prog_.b, Vec::Zero(n_);

  SpMat K = splitting_kkt(prog_.P, At_, st_.sigma, st_.rho);
  IVec sign(n_ + nt_);
  sign.head(n_).setConstant(1);
  sign.tail(nt_).setConstant(-1);
  kkt_.analyze(K, true);
  if (!kkt_.factor(K, sign, 0.0))
    throw SingularMatrixError("AdmmSolver: splitting system is singular (P not PSD?)");

  x_ = Vec::Zero(n_);
  t_ = Vec::Zero(nt_);
  yt_ = Vec::Zero(nt_);
  prev_x_ = x_;
  prev_yt_ = yt_;
  rhs_.resize(n_ + nt_);
  view_.convention = Convention::OSM;
}

void AdmmSolver::warm_start(const DualIterate& it) {
  if (it.x.size() != n_ || it.y.size() != m_ || it.z.size() != p_ || it.y_b.size() != n_)
    throw std::invalid_argument("AdmmSolver::warm_start: iterate dimensions do not match");
  x_ = it.x;
  t_.head(p_).setZero();
  t_.segment(p_, m_) = it.s;
  t_.tail(n_) = it.x.cwiseMax(prog_.l).cwiseMin(prog_.u);
  yt_.head(p_) = -it.z;
  yt_.segment(p_, m_) = it.convention == Convention::OSM ? it.y : Vec(-it.y);
  yt_.tail(n_) = it.y_b;
  prev_x_ = x_;
  prev_yt_ = yt_;
  view_fresh_ = false;
}

const DualIterate& AdmmSolver::iterate() {
  prev_x_ = x_;
  prev_yt_ = yt_;

  rhs_.head(n_) = st_.sigma * x_ - prog_.q;
  rhs_.tail(nt_) = bt_ - t_ + yt_ / st_.rho;
  sol_ = kkt_.solve(rhs_, st_.refine_steps);

  // over-relaxed proximal step, then project the stacked slack
  const double a = st_.alpha;
  x_ = a * sol_.head(n_) + (1.0 - a) * x_;
  Vec tt = t_ - (yt_ + sol_.tail(nt_)) / st_.rho;
  v_ = a * tt + (1.0 - a) * t_ + yt_ / st_.rho;

  t_ = v_;
  t_.head(p_).setZero();
  if (m_ > 0) {
    Vec seg = t_.segment(p_, m_);
    work_.project(seg);
    t_.segment(p_, m_) = seg;
  }
  t_.tail(n_) = t_.tail(n_).cwiseMax(prog_.l).cwiseMin(prog_.u);
  yt_ = st_.rho * (v_ - t_);

  ++iter_;
  view_fresh_ = false;
  return current();
}

void AdmmSolver::refresh_view() const {
  view_.iter = iter_;
  view_.x = x_;
  view_.s = t_.segment(p_, m_);
  view_.y = yt_.segment(p_, m_);
  view_.y_b = yt_.tail(n_);
  view_.z = -yt_.head(p_);
  view_.y_plus = view_.y_b.cwiseMax(0.0);
  view_.y_minus = view_.y_plus - view_.y_b;
  view_fresh_ = true;
}

const DualIterate& AdmmSolver::current() const {
  if (!view_fresh_) refresh_view();
  return view_;
}

double AdmmSolver::dual_estimate() const {
  const DualIterate& it = current();
  const double sb = support_box(prog_.l, prog_.u, it.y_b);
  if (!is_finite(sb)) return -inf;
  return -0.5 * it.x.dot(prog_.P * it.x) - prog_.h.dot(it.z) + prog_.b.dot(it.y) - sb;
}

AdmmResult AdmmSolver::status() const {
  AdmmResult res;
  res.x = x_;
  res.objective = primal_objective(prog_, x_);

  const Vec Ax = At_ * x_;
  const double rp = (Ax + t_ - bt_).lpNorm<Eigen::Infinity>();
  const double sp = std::max({Ax.lpNorm<Eigen::Infinity>(), t_.lpNorm<Eigen::Infinity>(),
                              bt_.lpNorm<Eigen::Infinity>()});
  const Vec Px = prog_.P * x_;
  const Vec Aty = At_.transpose() * yt_;
  const double rd = (Px + prog_.q - Aty).lpNorm<Eigen::Infinity>();
  const double sd = std::max({Px.lpNorm<Eigen::Infinity>(), Aty.lpNorm<Eigen::Infinity>(),
                              prog_.q.lpNorm<Eigen::Infinity>()});
  if (rp <= st_.eps_abs + st_.eps_rel * sp && rd <= st_.eps_abs + st_.eps_rel * sd) {
    res.status = SolveStatus::Optimal;
    return res;
  }

  const double eps = st_.eps_infeas;

  // Diverging multiplier direction certifies primal infeasibility. The
  // Lagrangian-convention ray is the negative of the stacked multiplier
  // direction, since yt lives in the normal cone of the slack.
  Vec dy = prev_yt_ - yt_;
  double ndy = dy.lpNorm<Eigen::Infinity>();
  if (ndy > 0.0) {
    dy /= ndy;
    if ((At_.transpose() * dy).lpNorm<Eigen::Infinity>() <= eps &&
        in_polar_cone(prog_.cones, -dy.segment(p_, m_), eps)) {
      const double val = prog_.h.dot(dy.head(p_)) + prog_.b.dot(dy.segment(p_, m_)) +
                         support_box(prog_.l, prog_.u, -dy.tail(n_));
      if (val <= -eps) {
        res.status = SolveStatus::PrimalInfeasible;
        res.certificate = dy;
        return res;
      }
    }
  }

  // Diverging primal direction certifies dual infeasibility (unboundedness).
  Vec dx = x_ - prev_x_;
  double ndx = dx.lpNorm<Eigen::Infinity>();
  if (ndx > 0.0) {
    dx /= ndx;
    bool box_ok = true;
    for (Index i = 0; i < n_ && box_ok; ++i) {
      if (is_finite(prog_.u[i]) && dx[i] > eps) box_ok = false;
      if (is_finite(prog_.l[i]) && dx[i] < -eps) box_ok = false;
    }
    if (box_ok && prog_.q.dot(dx) <= -eps &&
        (prog_.P * dx).lpNorm<Eigen::Infinity>() <= eps &&
        (p_ == 0 || (prog_.G * dx).lpNorm<Eigen::Infinity>() <= eps) &&
        in_cone(prog_.cones, -(prog_.A * dx), eps)) {
      res.status = SolveStatus::DualInfeasible;
      res.certificate = dx;
      return res;
    }
  }

  res.status = SolveStatus::Running;
  return res;
}

} // namespace conic_bnb
