#include "conic_bnb/ipm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace conic_bnb {

namespace {

// Jordan product on a second-order cone: u o v = (u'v, u0 v1 + v0 u1).
Vec jordan(const Eigen::Ref<const Vec>& u, const Eigen::Ref<const Vec>& v) {
  const Index d = u.size();
  Vec r(d);
  r[0] = u.dot(v);
  r.tail(d - 1) = u[0] * v.tail(d - 1) + v[0] * u.tail(d - 1);
  return r;
}

// Solve lam o g = v for g (inverse of the arrow matrix of lam).
Vec jordan_div(const Eigen::Ref<const Vec>& lam, const Eigen::Ref<const Vec>& v) {
  const Index d = lam.size();
  const double a = lam[0];
  const auto b = lam.tail(d - 1);
  const auto v1 = v.tail(d - 1);
  double det = a * a - b.squaredNorm();
  if (std::abs(det) < 1e-300) det = det < 0.0 ? -1e-300 : 1e-300;
  Vec g(d);
  g[0] = (a * v[0] - b.dot(v1)) / det;
  g.tail(d - 1) = v1 / a + (b.dot(v1) / (a * det)) * b - (v[0] / det) * b;
  return g;
}

// W = eta [[w0, w1'], [w1, I + w1 w1'/(1+w0)]]; its square is eta^2 (2 ww' - J).
Vec apply_w(const SocScaling& sc, const Eigen::Ref<const Vec>& v) {
  const Index d = v.size();
  const double w0 = sc.wbar[0];
  const auto w1 = sc.wbar.tail(d - 1);
  const double dot1 = w1.dot(v.tail(d - 1));
  Vec r(d);
  r[0] = w0 * v[0] + dot1;
  r.tail(d - 1) = v.tail(d - 1) + (v[0] + dot1 / (1.0 + w0)) * w1;
  return sc.eta * r;
}

Vec apply_winv(const SocScaling& sc, const Eigen::Ref<const Vec>& v) {
  const Index d = v.size();
  const double w0 = sc.wbar[0];
  const auto w1 = sc.wbar.tail(d - 1);
  const double dot1 = w1.dot(v.tail(d - 1));
  Vec r(d);
  r[0] = w0 * v[0] - dot1;
  r.tail(d - 1) = v.tail(d - 1) + (-v[0] + dot1 / (1.0 + w0)) * w1;
  return r / sc.eta;
}

// Smallest positive root of c2 a^2 + c1 a + c0 = 0, +inf when none.
double min_pos_root(double c2, double c1, double c0) {
  const double huge = std::numeric_limits<double>::infinity();
  if (c2 == 0.0) return c1 < 0.0 ? -c0 / c1 : huge;
  const double disc = c1 * c1 - 4.0 * c2 * c0;
  if (disc < 0.0) return huge;
  const double sq = std::sqrt(disc);
  const double qq = -0.5 * (c1 + (c1 >= 0.0 ? sq : -sq));
  double best = huge;
  if (qq != 0.0) {
    const double r = c0 / qq;
    if (r > 0.0) best = std::min(best, r);
  }
  const double r = qq / c2;
  if (r > 0.0) best = std::min(best, r);
  return best;
}

// Largest step keeping v + a dv (componentwise) nonnegative.
double step_pos(const Eigen::Ref<const Vec>& v, const Eigen::Ref<const Vec>& dv) {
  double a = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < v.size(); ++i)
    if (dv[i] < 0.0) a = std::min(a, -v[i] / dv[i]);
  return a;
}

// Largest step keeping s + a d inside one second-order cone.
double step_soc(const Eigen::Ref<const Vec>& s, const Eigen::Ref<const Vec>& d) {
  const Index n = s.size();
  const double c2 = d[0] * d[0] - d.tail(n - 1).squaredNorm();
  const double c1 = 2.0 * (s[0] * d[0] - s.tail(n - 1).dot(d.tail(n - 1)));
  const double c0 = s[0] * s[0] - s.tail(n - 1).squaredNorm();
  return min_pos_root(c2, c1, c0);
}

struct Direction {
  Vec dx, dz, dy, ds, dwp, dyp, dwm, dym;
};

} // namespace

IpmSolver::IpmSolver(const ConicProgram& prog, IpmSettings settings)
    : prog_(prog), st_(settings) {
  auto viol = validate(prog_);
  if (!viol.empty())
    throw std::invalid_argument("IpmSolver: invalid program: " + viol.front().message);
  n_ = prog_.n();
  p_ = prog_.p();
  m_ = prog_.m();

  std::vector<Index> arow_nnz(m_, 0);
  for (int k = 0; k < prog_.A.outerSize(); ++k)
    for (SpMat::InnerIterator it(prog_.A, k); it; ++it) ++arow_nnz[it.row()];

  // split cone rows: zero cones become equalities, zero-width second-order
  // blocks fold their tails the same way (the head is identically zero and
  // would stall the scaling), the rest keep their order
  cone_row_map_.assign(m_, -1);
  zero_row_map_.assign(m_, -1);
  Index row = 0, mbar = 0, nzero = 0;
  for (const auto& c : prog_.cones) {
    const bool bare_head = c.kind == ConeKind::SecondOrder && arow_nnz[row] == 0;
    if (c.kind == ConeKind::Zero) {
      for (Index i = 0; i < c.dim; ++i) zero_row_map_[row + i] = p_ + nzero + i;
      nzero += c.dim;
    } else if (bare_head && prog_.b[row] == 0.0) {
      for (Index i = 1; i < c.dim; ++i) zero_row_map_[row + i] = p_ + nzero + (i - 1);
      nzero += c.dim - 1;
      folded_socs_.emplace_back(row, c.dim);
    } else {
      if (bare_head && prog_.b[row] < 0.0) dead_row_ = row;
      cones_bar_.push_back(c);
      for (Index i = 0; i < c.dim; ++i) cone_row_map_[row + i] = mbar + i;
      mbar += c.dim;
    }
    row += c.dim;
  }

  for (Index i = 0; i < n_; ++i) {
    if (is_finite(prog_.l[i]) && prog_.l[i] == prog_.u[i]) {
      pins_.push_back(i);
    } else {
      if (is_finite(prog_.u[i])) U_.push_back(i);
      if (is_finite(prog_.l[i])) L_.push_back(i);
    }
  }
  uU_.resize((Index)U_.size());
  for (size_t k = 0; k < U_.size(); ++k) uU_[(Index)k] = prog_.u[U_[k]];
  lL_.resize((Index)L_.size());
  for (size_t k = 0; k < L_.size(); ++k) lL_[(Index)k] = prog_.l[L_[k]];

  const Index pt = p_ + nzero + (Index)pins_.size();
  std::vector<Triplet> tg, ta;
  for (int k = 0; k < prog_.G.outerSize(); ++k)
    for (SpMat::InnerIterator it(prog_.G, k); it; ++it)
      tg.emplace_back(it.row(), it.col(), it.value());
  for (int k = 0; k < prog_.A.outerSize(); ++k)
    for (SpMat::InnerIterator it(prog_.A, k); it; ++it) {
      if (zero_row_map_[it.row()] >= 0)
        tg.emplace_back(zero_row_map_[it.row()], it.col(), it.value());
      else
        ta.emplace_back(cone_row_map_[it.row()], it.col(), it.value());
    }
  for (size_t k = 0; k < pins_.size(); ++k)
    tg.emplace_back(p_ + nzero + (Index)k, pins_[k], 1.0);
  Gt_.resize(pt, n_);
  Gt_.setFromTriplets(tg.begin(), tg.end());
  Ab_.resize(mbar, n_);
  Ab_.setFromTriplets(ta.begin(), ta.end());
  ht_.resize(pt);
  ht_.head(p_) = prog_.h;
  for (Index r = 0; r < m_; ++r)
    if (zero_row_map_[r] >= 0) ht_[zero_row_map_[r]] = prog_.b[r];
  for (size_t k = 0; k < pins_.size(); ++k) ht_[p_ + nzero + (Index)k] = prog_.l[pins_[k]];
  bb_.resize(mbar);
  for (Index r = 0; r < m_; ++r)
    if (cone_row_map_[r] >= 0) bb_[cone_row_map_[r]] = prog_.b[r];

  Index off = 0;
  for (const auto& c : cones_bar_) {
    if (c.kind == ConeKind::Nonnegative)
      for (Index i = 0; i < c.dim; ++i) orth_rows_.push_back(off + i);
    else
      soc_spans_.emplace_back(off, c.dim);
    off += c.dim;
  }
  nu_deg_ = double(orth_rows_.size() + soc_spans_.size() + U_.size() + L_.size());

  // interior starting point: box midpoint (or a unit push off the finite
  // side), cone identity for slacks and multipliers, unit box multipliers
  pt_.x.resize(n_);
  for (Index i = 0; i < n_; ++i) {
    const bool fl = is_finite(prog_.l[i]), fu = is_finite(prog_.u[i]);
    if (fl && fu)
      pt_.x[i] = 0.5 * (prog_.l[i] + prog_.u[i]);
    else if (fl)
      pt_.x[i] = prog_.l[i] + 1.0;
    else if (fu)
      pt_.x[i] = prog_.u[i] - 1.0;
    else
      pt_.x[i] = 0.0;
  }
  pt_.s = Vec::Zero(mbar);
  for (Index r : orth_rows_) pt_.s[r] = 1.0;
  for (const auto& span : soc_spans_) pt_.s[span.first] = 1.0;
  pt_.y = pt_.s;
  pt_.z = Vec::Zero(pt);
  pt_.w_plus.resize((Index)U_.size());
  pt_.y_plus = Vec::Ones((Index)U_.size());
  for (size_t k = 0; k < U_.size(); ++k) pt_.w_plus[(Index)k] = prog_.u[U_[k]] - pt_.x[U_[k]];
  pt_.w_minus.resize((Index)L_.size());
  pt_.y_minus = Vec::Ones((Index)L_.size());
  for (size_t k = 0; k < L_.size(); ++k) pt_.w_minus[(Index)k] = pt_.x[L_[k]] - prog_.l[L_[k]];

  sign_.resize(n_ + pt + mbar);
  sign_.head(n_).setConstant(1);
  sign_.tail(pt + mbar).setConstant(-1);
  update_scalings();
  assemble_kkt(K_);
  kkt_.analyze(K_, true);
}

void IpmSolver::update_scalings() {
  pt_.h_orth.resize((Index)orth_rows_.size());
  for (size_t k = 0; k < orth_rows_.size(); ++k) {
    const Index r = orth_rows_[k];
    pt_.h_orth[(Index)k] = pt_.s[r] / pt_.y[r];
  }
  pt_.h_soc.clear();
  for (const auto& span : soc_spans_) {
    const auto s = pt_.s.segment(span.first, span.second);
    const auto y = pt_.y.segment(span.first, span.second);
    const Index d = span.second;
    const double rs = std::sqrt(std::max(1e-300, s[0] * s[0] - s.tail(d - 1).squaredNorm()));
    const double ry = std::sqrt(std::max(1e-300, y[0] * y[0] - y.tail(d - 1).squaredNorm()));
    Vec sb = s / rs, yb = y / ry;
    const double gamma = std::sqrt(0.5 * (1.0 + sb.dot(yb)));
    SocScaling sc;
    sc.eta = std::sqrt(rs / ry);
    sc.wbar.resize(d);
    sc.wbar[0] = (sb[0] + yb[0]) / (2.0 * gamma);
    sc.wbar.tail(d - 1) = (sb.tail(d - 1) - yb.tail(d - 1)) / (2.0 * gamma);
    pt_.h_soc.push_back(std::move(sc));
  }
}

void IpmSolver::assemble_kkt(SpMat& K) const {
  const Index pt = Gt_.rows(), mb = Ab_.rows(), N = n_ + pt + mb;
  std::vector<Triplet> t;
  t.reserve((size_t)(prog_.P.nonZeros() + n_ + 2 * (Gt_.nonZeros() + Ab_.nonZeros()) + mb));
  for (int k = 0; k < prog_.P.outerSize(); ++k)
    for (SpMat::InnerIterator it(prog_.P, k); it; ++it)
      t.emplace_back(it.row(), it.col(), it.value());
  Vec D = Vec::Zero(n_);
  for (size_t k = 0; k < U_.size(); ++k) D[U_[k]] += pt_.y_plus[(Index)k] / pt_.w_plus[(Index)k];
  for (size_t k = 0; k < L_.size(); ++k) D[L_[k]] += pt_.y_minus[(Index)k] / pt_.w_minus[(Index)k];
  for (Index i = 0; i < n_; ++i) t.emplace_back(i, i, D[i]);
  for (int k = 0; k < Gt_.outerSize(); ++k)
    for (SpMat::InnerIterator it(Gt_, k); it; ++it) {
      t.emplace_back(n_ + it.row(), it.col(), it.value());
      t.emplace_back(it.col(), n_ + it.row(), it.value());
    }
  const Index base = n_ + pt;
  for (int k = 0; k < Ab_.outerSize(); ++k)
    for (SpMat::InnerIterator it(Ab_, k); it; ++it) {
      t.emplace_back(base + it.row(), it.col(), it.value());
      t.emplace_back(it.col(), base + it.row(), it.value());
    }
  for (size_t k = 0; k < orth_rows_.size(); ++k)
    t.emplace_back(base + orth_rows_[k], base + orth_rows_[k], -pt_.h_orth[(Index)k]);
  for (size_t b = 0; b < soc_spans_.size(); ++b) {
    const auto& sc = pt_.h_soc[b];
    const Index o = soc_spans_[b].first, d = soc_spans_[b].second;
    Mat H = 2.0 * (sc.wbar * sc.wbar.transpose());
    H(0, 0) -= 1.0;
    H.bottomRightCorner(d - 1, d - 1) += Mat::Identity(d - 1, d - 1);
    H *= sc.eta * sc.eta;
    for (Index i = 0; i < d; ++i)
      for (Index j = 0; j < d; ++j) t.emplace_back(base + o + i, base + o + j, -H(i, j));
  }
  K.resize(N, N);
  K.setFromTriplets(t.begin(), t.end());
}

void IpmSolver::residuals(Vec& rd, Vec& rp, Vec& rc, Vec& ru, Vec& rl) const {
  rd = prog_.P * pt_.x + prog_.q + Gt_.transpose() * pt_.z + Ab_.transpose() * pt_.y;
  for (size_t k = 0; k < U_.size(); ++k) rd[U_[k]] += pt_.y_plus[(Index)k];
  for (size_t k = 0; k < L_.size(); ++k) rd[L_[k]] -= pt_.y_minus[(Index)k];
  rp = Gt_ * pt_.x - ht_;
  rc = Ab_ * pt_.x + pt_.s - bb_;
  ru.resize((Index)U_.size());
  for (size_t k = 0; k < U_.size(); ++k)
    ru[(Index)k] = pt_.x[U_[k]] + pt_.w_plus[(Index)k] - uU_[(Index)k];
  rl.resize((Index)L_.size());
  for (size_t k = 0; k < L_.size(); ++k)
    rl[(Index)k] = pt_.x[L_[k]] - pt_.w_minus[(Index)k] - lL_[(Index)k];
}

double IpmSolver::step_to_boundary(const Vec& ds, const Vec& dy, const Vec& dwp,
                                   const Vec& dyp, const Vec& dwm, const Vec& dym) const {
  double a = std::numeric_limits<double>::infinity();
  for (Index r : orth_rows_) {
    if (ds[r] < 0.0) a = std::min(a, -pt_.s[r] / ds[r]);
    if (dy[r] < 0.0) a = std::min(a, -pt_.y[r] / dy[r]);
  }
  for (const auto& span : soc_spans_) {
    a = std::min(a, step_soc(pt_.s.segment(span.first, span.second),
                             ds.segment(span.first, span.second)));
    a = std::min(a, step_soc(pt_.y.segment(span.first, span.second),
                             dy.segment(span.first, span.second)));
  }
  a = std::min(a, step_pos(pt_.w_plus, dwp));
  a = std::min(a, step_pos(pt_.y_plus, dyp));
  a = std::min(a, step_pos(pt_.w_minus, dwm));
  a = std::min(a, step_pos(pt_.y_minus, dym));
  return a;
}

const DualIterate& IpmSolver::iterate() {
  if (dead_row_ >= 0 || stalled_) { // frozen; status() reports what it can prove
    ++iter_;
    return current();
  }
  const Index pt = Gt_.rows(), mb = Ab_.rows(), N = n_ + pt + mb;
  const Index nU = (Index)U_.size(), nL = (Index)L_.size();

  update_scalings();
  assemble_kkt(K_);
  // absolute regularization: the scaling diagonals blow up near convergence
  // and must not drag the shift with them. A breakdown despite it means the
  // point sits on a cone boundary with no interior to retreat to (pinned
  // slices can lose Slater); freeze there instead of corrupting the iterate.
  if (!kkt_.factor(K_, sign_, st_.reg)) {
    stalled_ = true;
    ++iter_;
    return current();
  }

  Vec rd, rp, rc, ru, rl;
  residuals(rd, rp, rc, ru, rl);
  const double dot = pt_.s.dot(pt_.y) + pt_.w_plus.dot(pt_.y_plus) + pt_.w_minus.dot(pt_.y_minus);
  const double mu = nu_deg_ > 0.0 ? dot / nu_deg_ : 0.0;
  pt_.mu = mu;

  // scaled point lambda = W y = W^{-1} s blockwise
  Vec lam = Vec::Zero(mb);
  for (Index r : orth_rows_) lam[r] = std::sqrt(pt_.s[r] * pt_.y[r]);
  for (size_t b = 0; b < soc_spans_.size(); ++b) {
    const auto& span = soc_spans_[b];
    lam.segment(span.first, span.second) =
        apply_w(pt_.h_soc[b], pt_.y.segment(span.first, span.second));
  }

  auto solve_direction = [&](const Vec& dsc, const Vec& dsu, const Vec& dsl, Direction& d) {
    Vec rhs(N);
    rhs.head(n_) = -rd;
    for (Index k = 0; k < nU; ++k)
      rhs[U_[k]] -= (dsu[k] + pt_.y_plus[k] * ru[k]) / pt_.w_plus[k];
    for (Index k = 0; k < nL; ++k)
      rhs[L_[k]] += (dsl[k] - pt_.y_minus[k] * rl[k]) / pt_.w_minus[k];
    rhs.segment(n_, pt) = -rp;
    Vec wg = Vec::Zero(mb);
    for (Index r : orth_rows_) wg[r] = dsc[r] / pt_.y[r];
    for (size_t b = 0; b < soc_spans_.size(); ++b) {
      const auto& span = soc_spans_[b];
      Vec g = jordan_div(lam.segment(span.first, span.second),
                         dsc.segment(span.first, span.second));
      wg.segment(span.first, span.second) = apply_w(pt_.h_soc[b], g);
    }
    rhs.tail(mb) = -rc - wg;
    Vec sol = kkt_.solve(rhs, st_.refine_steps);
    const double rn = rhs.size() > 0 ? rhs.lpNorm<Eigen::Infinity>() : 0.0;
    last_kkt_res_ = rn > 0.0 ? kkt_.residual_norm(rhs, sol) / rn : 0.0;
    d.dx = sol.head(n_);
    d.dz = sol.segment(n_, pt);
    d.dy = sol.tail(mb);
    d.ds = -rc - Ab_ * d.dx;
    d.dwp.resize(nU);
    d.dyp.resize(nU);
    for (Index k = 0; k < nU; ++k) {
      d.dwp[k] = -ru[k] - d.dx[U_[k]];
      d.dyp[k] = (pt_.y_plus[k] / pt_.w_plus[k]) * d.dx[U_[k]] +
                 (dsu[k] + pt_.y_plus[k] * ru[k]) / pt_.w_plus[k];
    }
    d.dwm.resize(nL);
    d.dym.resize(nL);
    for (Index k = 0; k < nL; ++k) {
      d.dwm[k] = d.dx[L_[k]] + rl[k];
      d.dym[k] = -(pt_.y_minus[k] / pt_.w_minus[k]) * d.dx[L_[k]] +
                 (dsl[k] - pt_.y_minus[k] * rl[k]) / pt_.w_minus[k];
    }
  };

  // predictor: plain affine step aiming at zero complementarity
  Vec dsc = Vec::Zero(mb);
  for (Index r : orth_rows_) dsc[r] = -pt_.s[r] * pt_.y[r];
  for (const auto& span : soc_spans_) {
    const auto lb = lam.segment(span.first, span.second);
    dsc.segment(span.first, span.second) = -jordan(lb, lb);
  }
  Vec dsu = -(pt_.w_plus.array() * pt_.y_plus.array()).matrix();
  Vec dsl = -(pt_.w_minus.array() * pt_.y_minus.array()).matrix();
  Direction aff;
  solve_direction(dsc, dsu, dsl, aff);

  double sigma = 0.0;
  if (mu > 0.0) {
    const double a_aff =
        std::min(1.0, step_to_boundary(aff.ds, aff.dy, aff.dwp, aff.dyp, aff.dwm, aff.dym));
    const double dot_aff = (pt_.s + a_aff * aff.ds).dot(pt_.y + a_aff * aff.dy) +
                           (pt_.w_plus + a_aff * aff.dwp).dot(pt_.y_plus + a_aff * aff.dyp) +
                           (pt_.w_minus + a_aff * aff.dwm).dot(pt_.y_minus + a_aff * aff.dym);
    const double mu_aff = std::max(0.0, dot_aff) / nu_deg_;
    sigma = std::clamp(std::pow(mu_aff / mu, 3.0), 0.0, 1.0);
  }

  // corrector: recenter to sigma*mu and subtract the Mehrotra cross term
  for (Index r : orth_rows_) dsc[r] += sigma * mu - aff.ds[r] * aff.dy[r];
  for (size_t b = 0; b < soc_spans_.size(); ++b) {
    const auto& span = soc_spans_[b];
    Vec u = apply_winv(pt_.h_soc[b], aff.ds.segment(span.first, span.second));
    Vec v = apply_w(pt_.h_soc[b], aff.dy.segment(span.first, span.second));
    Vec corr = jordan(u, v);
    dsc[span.first] += sigma * mu - corr[0];
    dsc.segment(span.first + 1, span.second - 1) -= corr.tail(span.second - 1);
  }
  for (Index k = 0; k < nU; ++k) dsu[k] += sigma * mu - aff.dwp[k] * aff.dyp[k];
  for (Index k = 0; k < nL; ++k) dsl[k] += sigma * mu - aff.dwm[k] * aff.dym[k];
  Direction dir;
  solve_direction(dsc, dsu, dsl, dir);

  const double a_max = step_to_boundary(dir.ds, dir.dy, dir.dwp, dir.dyp, dir.dwm, dir.dym);
  const double alpha = std::min(1.0, st_.ftb * a_max);
  // a solve off a barely factorable matrix can return garbage; keep the last
  // finite point and freeze rather than poison every later residual
  if (!std::isfinite(alpha) || !dir.dx.allFinite() || !dir.dz.allFinite() ||
      !dir.dy.allFinite() || !dir.ds.allFinite() || !dir.dwp.allFinite() ||
      !dir.dyp.allFinite() || !dir.dwm.allFinite() || !dir.dym.allFinite()) {
    stalled_ = true;
    ++iter_;
    return current();
  }
  pt_.x += alpha * dir.dx;
  pt_.z += alpha * dir.dz;
  pt_.y += alpha * dir.dy;
  pt_.s += alpha * dir.ds;
  pt_.w_plus += alpha * dir.dwp;
  pt_.y_plus += alpha * dir.dyp;
  pt_.w_minus += alpha * dir.dwm;
  pt_.y_minus += alpha * dir.dym;
  ++iter_;
  view_fresh_ = false;
  return current();
}

const DualIterate& IpmSolver::current() const {
  if (!view_fresh_) refresh_view();
  return view_;
}

void IpmSolver::refresh_view() const {
  const Index nzero = Gt_.rows() - p_ - (Index)pins_.size();
  view_.convention = Convention::IPM;
  view_.iter = iter_;
  view_.x = pt_.x;
  view_.s = Vec::Zero(m_);
  view_.y = Vec::Zero(m_);
  for (Index r = 0; r < m_; ++r) {
    if (cone_row_map_[r] >= 0) {
      view_.s[r] = pt_.s[cone_row_map_[r]];
      view_.y[r] = pt_.y[cone_row_map_[r]];
    } else if (zero_row_map_[r] >= 0) {
      view_.y[r] = pt_.z[zero_row_map_[r]];
    }
  }
  // heads of folded blocks: smallest multiplier keeping y in the dual cone
  for (const auto& [r0, d] : folded_socs_)
    view_.y[r0] = d > 1 ? view_.y.segment(r0 + 1, d - 1).norm() : 0.0;
  view_.z = pt_.z.head(p_);
  view_.y_plus = Vec::Zero(n_);
  view_.y_minus = Vec::Zero(n_);
  for (size_t k = 0; k < U_.size(); ++k) view_.y_plus[U_[k]] = pt_.y_plus[(Index)k];
  for (size_t k = 0; k < L_.size(); ++k) view_.y_minus[L_[k]] = pt_.y_minus[(Index)k];
  for (size_t k = 0; k < pins_.size(); ++k) {
    const double zeta = pt_.z[p_ + nzero + (Index)k];
    view_.y_plus[pins_[k]] = std::max(zeta, 0.0);
    view_.y_minus[pins_[k]] = std::max(-zeta, 0.0);
  }
  view_.y_b = view_.y_plus - view_.y_minus;
  view_fresh_ = true;
}

double IpmSolver::dual_estimate() const {
  const double quad = pt_.x.dot(prog_.P * pt_.x);
  return -0.5 * quad - ht_.dot(pt_.z) - bb_.dot(pt_.y) - uU_.dot(pt_.y_plus) +
         lL_.dot(pt_.y_minus);
}

void IpmSolver::warm_start(const DualIterate& it) {
  if (it.x.size() != n_ || it.s.size() != m_ || it.y.size() != m_ || it.z.size() != p_ ||
      it.y_b.size() != n_)
    throw std::invalid_argument("IpmSolver::warm_start: iterate dimensions do not match");
  const Index nzero = Gt_.rows() - p_ - (Index)pins_.size();
  const double push = st_.push;
  Vec ycone = it.convention == Convention::OSM ? Vec(-it.y) : it.y;

  for (Index i = 0; i < n_; ++i) {
    const bool fl = is_finite(prog_.l[i]), fu = is_finite(prog_.u[i]);
    double xi = it.x[i];
    if (fl && fu && prog_.l[i] == prog_.u[i]) {
      xi = prog_.l[i];
    } else {
      const double gap = fl && fu ? std::min(push, 0.25 * (prog_.u[i] - prog_.l[i])) : push;
      if (fl) xi = std::max(xi, prog_.l[i] + gap);
      if (fu) xi = std::min(xi, prog_.u[i] - gap);
    }
    pt_.x[i] = xi;
  }
  for (size_t k = 0; k < U_.size(); ++k) {
    pt_.w_plus[(Index)k] = prog_.u[U_[k]] - pt_.x[U_[k]];
    pt_.y_plus[(Index)k] = std::max(it.y_b[U_[k]], push);
  }
  for (size_t k = 0; k < L_.size(); ++k) {
    pt_.w_minus[(Index)k] = pt_.x[L_[k]] - prog_.l[L_[k]];
    pt_.y_minus[(Index)k] = std::max(-it.y_b[L_[k]], push);
  }
  for (Index r = 0; r < m_; ++r) {
    if (cone_row_map_[r] >= 0) {
      pt_.s[cone_row_map_[r]] = it.s[r];
      pt_.y[cone_row_map_[r]] = ycone[r];
    }
  }
  Index off = 0;
  for (const auto& c : cones_bar_) {
    if (c.kind == ConeKind::Nonnegative) {
      for (Index i = 0; i < c.dim; ++i) {
        pt_.s[off + i] = std::max(pt_.s[off + i], push);
        pt_.y[off + i] = std::max(pt_.y[off + i], push);
      }
    } else {
      const Index d = c.dim;
      pt_.s[off] = std::max(pt_.s[off], pt_.s.segment(off + 1, d - 1).norm() + push);
      pt_.y[off] = std::max(pt_.y[off], pt_.y.segment(off + 1, d - 1).norm() + push);
    }
    off += c.dim;
  }
  pt_.z.head(p_) = it.z;
  for (Index r = 0; r < m_; ++r)
    if (zero_row_map_[r] >= 0) pt_.z[zero_row_map_[r]] = ycone[r];
  for (size_t k = 0; k < pins_.size(); ++k)
    pt_.z[p_ + nzero + (Index)k] = it.y_b[pins_[k]];
  view_fresh_ = false;
}

IpmResult IpmSolver::status() const {
  IpmResult res;
  res.x = pt_.x;
  const double pobj = 0.5 * pt_.x.dot(prog_.P * pt_.x) + prog_.q.dot(pt_.x);
  res.objective = pobj;

  if (dead_row_ >= 0) { // a cone head pinned below zero: Farkas ray is a unit
    res.status = SolveStatus::PrimalInfeasible;
    res.certificate = Vec::Zero(p_ + m_ + n_);
    res.certificate[p_ + dead_row_] = 1.0 / -prog_.b[dead_row_];
    return res;
  }

  Vec rd, rp, rc, ru, rl;
  residuals(rd, rp, rc, ru, rl);
  const double dobj = dual_estimate();

  const double norm_rd = rd.size() ? rd.lpNorm<Eigen::Infinity>() : 0.0;
  double scale_d = 1.0;
  scale_d = std::max(scale_d, (prog_.P * pt_.x).lpNorm<Eigen::Infinity>());
  if (n_ > 0) scale_d = std::max(scale_d, prog_.q.lpNorm<Eigen::Infinity>());
  if (Gt_.rows() > 0)
    scale_d = std::max(scale_d, (Gt_.transpose() * pt_.z).lpNorm<Eigen::Infinity>());
  if (Ab_.rows() > 0)
    scale_d = std::max(scale_d, (Ab_.transpose() * pt_.y).lpNorm<Eigen::Infinity>());
  if (pt_.y_plus.size()) scale_d = std::max(scale_d, pt_.y_plus.lpNorm<Eigen::Infinity>());
  if (pt_.y_minus.size()) scale_d = std::max(scale_d, pt_.y_minus.lpNorm<Eigen::Infinity>());

  double norm_rp = 0.0;
  if (rp.size()) norm_rp = std::max(norm_rp, rp.lpNorm<Eigen::Infinity>());
  if (rc.size()) norm_rp = std::max(norm_rp, rc.lpNorm<Eigen::Infinity>());
  if (ru.size()) norm_rp = std::max(norm_rp, ru.lpNorm<Eigen::Infinity>());
  if (rl.size()) norm_rp = std::max(norm_rp, rl.lpNorm<Eigen::Infinity>());
  double scale_p = 1.0 + pt_.x.lpNorm<Eigen::Infinity>();
  if (pt_.s.size()) scale_p = std::max(scale_p, pt_.s.lpNorm<Eigen::Infinity>());
  if (ht_.size()) scale_p = std::max(scale_p, ht_.lpNorm<Eigen::Infinity>());
  if (bb_.size()) scale_p = std::max(scale_p, bb_.lpNorm<Eigen::Infinity>());

  const double gap = std::abs(pobj - dobj);
  const double scale_g = 1.0 + std::max(std::abs(pobj), std::abs(dobj));

  if (norm_rd <= st_.tol * scale_d && norm_rp <= st_.tol * scale_p && gap <= st_.tol * scale_g) {
    res.status = SolveStatus::Optimal;
    return res;
  }

  // primal infeasibility: the dual variables, scaled by the positive gain of
  // the Farkas objective, form a near-exact certificate
  const double tp = -ht_.dot(pt_.z) - bb_.dot(pt_.y) - uU_.dot(pt_.y_plus) +
                    lL_.dot(pt_.y_minus);
  if (tp > 0.0) {
    Vec homo = Gt_.transpose() * pt_.z + Ab_.transpose() * pt_.y;
    for (size_t k = 0; k < U_.size(); ++k) homo[U_[k]] += pt_.y_plus[(Index)k];
    for (size_t k = 0; k < L_.size(); ++k) homo[L_[k]] -= pt_.y_minus[(Index)k];
    if ((homo.size() == 0 ? 0.0 : homo.lpNorm<Eigen::Infinity>()) <= st_.eps_infeas * tp) {
      const DualIterate& v = current();
      res.status = SolveStatus::PrimalInfeasible;
      res.certificate.resize(p_ + m_ + n_);
      res.certificate << v.z, v.y, v.y_b;
      res.certificate /= tp;
      return res;
    }
  }

  // dual infeasibility: x, scaled by its negative objective gain, is a
  // recession direction certifying unboundedness
  const double td = -prog_.q.dot(pt_.x);
  if (td > 0.0) {
    bool ok = (prog_.P * pt_.x).lpNorm<Eigen::Infinity>() <= st_.eps_infeas * td;
    if (ok && Gt_.rows() > 0)
      ok = (Gt_ * pt_.x).lpNorm<Eigen::Infinity>() <= st_.eps_infeas * td;
    if (ok && Ab_.rows() > 0) {
      Vec w = -(Ab_ * pt_.x);
      Vec pw = project_cone(cones_bar_, w);
      ok = (w - pw).lpNorm<Eigen::Infinity>() <= st_.eps_infeas * td;
    }
    for (size_t k = 0; ok && k < U_.size(); ++k) ok = pt_.x[U_[k]] <= st_.eps_infeas * td;
    for (size_t k = 0; ok && k < L_.size(); ++k) ok = pt_.x[L_[k]] >= -st_.eps_infeas * td;
    if (ok) {
      res.status = SolveStatus::DualInfeasible;
      res.certificate = pt_.x / td;
      return res;
    }
  }

  res.status = SolveStatus::Running;
  return res;
}

} // namespace conic_bnb
