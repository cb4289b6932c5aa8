#include "conic_bnb/linalg.hpp"

#include <Eigen/OrderingMethods>
#include <cmath>

namespace conic_bnb {

void LdlFactor::permuted_upper(const SpMat& M, SpMat& out) const {
  out.resize(M.rows(), M.cols());
  out.selfadjointView<Eigen::Upper>() = M.selfadjointView<Eigen::Upper>().twistedBy(P_);
  out.makeCompressed();
}

void LdlFactor::analyze(const SpMat& M, bool amd) {
  if (M.rows() != M.cols()) throw std::invalid_argument("LdlFactor: matrix must be square");
  N_ = M.rows();
  if (amd && N_ > 0) {
    SpMat C = M;
    C.makeCompressed();
    Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> Pinv;
    Eigen::AMDOrdering<int> ordering;
    ordering(C, Pinv);
    P_ = Pinv.inverse();
  } else {
    P_.setIdentity(N_);
  }
  permuted_upper(M, Mu_);
  symbolic(Mu_);
}

void LdlFactor::analyze(const SpMat& M, const std::vector<int>& order) {
  if (M.rows() != M.cols()) throw std::invalid_argument("LdlFactor: matrix must be square");
  N_ = M.rows();
  if (static_cast<Index>(order.size()) != N_)
    throw std::invalid_argument("LdlFactor: order has wrong length");
  // order[j] is eliminated at step j, so sigma(order[j]) = j.
  Eigen::VectorXi sigma(N_);
  for (Index j = 0; j < N_; ++j) sigma[order[j]] = static_cast<int>(j);
  P_ = Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int>(sigma);
  permuted_upper(M, Mu_);
  symbolic(Mu_);
}

// Elimination tree and column counts from the upper-triangular pattern,
// following the classic LDL approach of Davis.
void LdlFactor::symbolic(const SpMat& upper) {
  parent_.assign(N_, -1);
  Lnz_.assign(N_, 0);
  flag_.assign(N_, -1);
  for (Index k = 0; k < N_; ++k) {
    parent_[k] = -1;
    flag_[k] = k;
    for (SpMat::InnerIterator it(upper, k); it; ++it) {
      Index i = it.row();
      if (i >= k) continue;
      for (; flag_[i] != k; i = parent_[i]) {
        if (parent_[i] == -1) parent_[i] = k;
        Lnz_[i]++;
        flag_[i] = k;
      }
    }
  }
  Lp_.assign(N_ + 1, 0);
  for (Index k = 0; k < N_; ++k) Lp_[k + 1] = Lp_[k] + Lnz_[k];
  Li_.assign(Lp_[N_], 0);
  Lx_.assign(Lp_[N_], 0.0);
  D_.resize(N_);
  y_.resize(N_);
  pattern_.assign(N_, 0);
  lnz_cur_.assign(N_, 0);
  numeric_ok_ = false;
}

Index LdlFactor::numeric(const SpMat& upper, const Vec& shift, bool rank_detect, double drop_tol) {
  dropped_.assign(N_, 0);
  std::fill(flag_.begin(), flag_.end(), -1);
  std::fill(lnz_cur_.begin(), lnz_cur_.end(), 0);
  y_.setZero();
  Index n_dropped = 0;

  for (Index k = 0; k < N_; ++k) {
    Index top = N_;
    flag_[k] = k;
    for (SpMat::InnerIterator it(upper, k); it; ++it) {
      Index i = it.row();
      if (i > k) continue;
      y_[i] += it.value();
      Index len = 0;
      for (; flag_[i] != k; i = parent_[i]) {
        pattern_[len++] = i;
        flag_[i] = k;
      }
      while (len > 0) pattern_[--top] = pattern_[--len];
    }
    double dk = y_[k] + shift[k];
    y_[k] = 0.0;
    for (; top < N_; ++top) {
      const Index i = pattern_[top];
      const double yi = y_[i];
      y_[i] = 0.0;
      const Index p2 = Lp_[i] + lnz_cur_[i];
      for (Index p = Lp_[i]; p < p2; ++p) y_[Li_[p]] -= Lx_[p] * yi;
      const double lki = dropped_[i] ? 0.0 : yi / D_[i];
      dk -= lki * yi;
      Li_[p2] = k;
      Lx_[p2] = lki;
      lnz_cur_[i]++;
    }
    if (rank_detect) {
      if (!std::isfinite(dk) || std::abs(dk) <= drop_tol) {
        dk = 0.0;
        dropped_[k] = 1;
        ++n_dropped;
      }
    } else if (!std::isfinite(dk) || dk == 0.0) {
      diag_ = "zero pivot at elimination step " + std::to_string(k);
      numeric_ok_ = false;
      return -1;
    }
    D_[k] = dk;
  }
  numeric_ok_ = true;
  rank_detect_ = rank_detect;
  return n_dropped;
}

bool LdlFactor::factor(const SpMat& M, const IVec& sign, double reg) {
  if (M.rows() != N_ || M.cols() != N_) throw std::invalid_argument("LdlFactor::factor: size mismatch");
  if (sign.size() != N_) throw std::invalid_argument("LdlFactor::factor: sign has wrong length");
  permuted_upper(M, Mu_);
  Morig_ = M;
  Vec s = reg * sign.cast<double>();
  Vec shift = P_ * s;
  return numeric(Mu_, shift, false, 0.0) == 0;
}

Index LdlFactor::factor_rank_detect(const SpMat& M, double drop_tol) {
  if (M.rows() != N_ || M.cols() != N_) throw std::invalid_argument("LdlFactor::factor: size mismatch");
  permuted_upper(M, Mu_);
  Morig_ = M;
  return numeric(Mu_, Vec::Zero(N_), true, drop_tol);
}

void LdlFactor::base_solve(Vec& x) const {
  Vec xp = P_ * x;
  for (Index j = 0; j < N_; ++j) {
    const double xj = xp[j];
    const Index p2 = Lp_[j] + lnz_cur_[j];
    for (Index p = Lp_[j]; p < p2; ++p) xp[Li_[p]] -= Lx_[p] * xj;
  }
  for (Index j = 0; j < N_; ++j) xp[j] /= D_[j];
  for (Index j = N_ - 1; j >= 0; --j) {
    const Index p2 = Lp_[j] + lnz_cur_[j];
    double xj = xp[j];
    for (Index p = Lp_[j]; p < p2; ++p) xj -= Lx_[p] * xp[Li_[p]];
    xp[j] = xj;
  }
  x = P_.transpose() * xp;
}

Vec LdlFactor::solve(const Vec& rhs, int refine_steps) const {
  if (!numeric_ok_ || rank_detect_)
    throw std::logic_error("LdlFactor::solve: no valid numeric factorization");
  if (rhs.size() != N_) throw std::invalid_argument("LdlFactor::solve: rhs has wrong length");
  Vec x = rhs;
  base_solve(x);
  for (int s = 0; s < refine_steps; ++s) {
    Vec r = rhs - Morig_ * x;
    base_solve(r);
    x += r;
  }
  return x;
}

double LdlFactor::residual_norm(const Vec& rhs, const Vec& x) const {
  return (rhs - Morig_ * x).lpNorm<Eigen::Infinity>();
}

double LdlFactor::matrix_max_abs() const {
  double m = 0.0;
  for (int k = 0; k < Morig_.outerSize(); ++k)
    for (SpMat::InnerIterator it(Morig_, k); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

SpMat LdlFactor::l_matrix() const {
  std::vector<Triplet> ts;
  ts.reserve(static_cast<size_t>(Lp_[N_]));
  for (Index j = 0; j < N_; ++j)
    for (Index pidx = Lp_[j]; pidx < Lp_[j] + lnz_cur_[j]; ++pidx)
      ts.emplace_back(Li_[pidx], j, Lx_[pidx]);
  SpMat L(N_, N_);
  L.setFromTriplets(ts.begin(), ts.end());
  return L;
}

LdlFactor qd_factor(const SpMat& M, const IVec& sign, double reg, bool amd) {
  LdlFactor f;
  f.analyze(M, amd);
  if (!f.factor(M, sign, reg))
    throw SingularMatrixError("qd_factor: " + f.diagnostics());
  return f;
}

Vec qd_solve(const LdlFactor& f, const Vec& rhs, int refine_steps) {
  Vec x = f.solve(rhs, refine_steps);
  const double scale = f.matrix_max_abs() * x.lpNorm<Eigen::Infinity>() +
                       rhs.lpNorm<Eigen::Infinity>() + 1.0;
  if (f.residual_norm(rhs, x) > 1e-10 * scale)
    throw RefinementError("qd_solve: iterative refinement did not reach the residual target");
  return x;
}

} // namespace conic_bnb
