#pragma once

#include <stdexcept>
#include <vector>

#include "conic_bnb/types.hpp"

namespace conic_bnb {

struct SingularMatrixError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct RefinementError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Sparse LDL' factorization of a symmetric quasi-definite matrix, up-looking,
/// no numerical pivoting. Stability comes from the quasi-definite structure
/// plus static regularization: the factored matrix is M + reg * diag(sign),
/// and solves apply iterative refinement against the unregularized M.
///
/// The symbolic analysis (fill-reducing ordering, elimination tree, column
/// counts) is computed once per sparsity pattern and reused across numeric
/// refactorizations with identical pattern.
class LdlFactor {
public:
  LdlFactor() = default;

  /// Symbolic analysis. M must be square with full symmetric storage and a
  /// pattern that is a superset of every matrix later passed to factor().
  /// With amd=false the natural order is kept, which makes the factor
  /// reproducible entry-for-entry for hand checks.
  void analyze(const SpMat& M, bool amd = true);

  /// Symbolic analysis under a caller-supplied elimination order:
  /// order[j] = original index eliminated at step j.
  void analyze(const SpMat& M, const std::vector<int>& order);

  /// Numeric factorization of M + reg * diag(sign). sign holds +1/-1 per row.
  /// Returns false on a zero or non-finite pivot (left in diagnostics()).
  bool factor(const SpMat& M, const IVec& sign, double reg);

  /// Rank-revealing variant: pivots with |d| <= drop_tol are treated as exact
  /// zeros and their columns skipped. Sound when the trailing Schur complement
  /// at every drop is positive semidefinite (arrange the elimination order so
  /// this holds). Returns the number of dropped pivots. The factor is for rank
  /// inspection only; solve() is not permitted after it.
  Index factor_rank_detect(const SpMat& M, double drop_tol);

  /// Solve M x = rhs with `refine_steps` rounds of iterative refinement
  /// against the unregularized matrix of the last factor() call.
  Vec solve(const Vec& rhs, int refine_steps = 2) const;

  /// Pivots d_k in elimination order.
  const Vec& d() const { return D_; }
  Index size() const { return N_; }
  const std::string& diagnostics() const { return diag_; }

  /// Residual |rhs - M x|_inf against the unregularized matrix.
  double residual_norm(const Vec& rhs, const Vec& x) const;
  double matrix_max_abs() const;

  /// Strictly lower part of L (unit diagonal implied), in elimination order.
  SpMat l_matrix() const;
  const Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int>& permutation() const {
    return P_;
  }

private:
  void symbolic(const SpMat& upper);
  Index numeric(const SpMat& upper, const Vec& shift, bool rank_detect, double drop_tol);
  void permuted_upper(const SpMat& M, SpMat& out) const;
  void base_solve(Vec& x) const;

  Index N_ = 0;
  Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> P_;
  SpMat Mu_;     // upper triangle of P M P', pattern fixed at analyze time
  SpMat Morig_;  // unregularized input of the last numeric factorization
  std::vector<Index> Lp_, parent_, Lnz_;
  std::vector<Index> Li_;
  std::vector<double> Lx_;
  Vec D_;
  std::vector<char> dropped_;
  bool numeric_ok_ = false;
  bool rank_detect_ = false;
  std::string diag_;

  // scratch for numeric/symbolic passes
  mutable std::vector<Index> flag_, pattern_, lnz_cur_;
  mutable Vec y_;
};

/// Factor M + reg * diag(sign); throws SingularMatrixError on breakdown.
LdlFactor qd_factor(const SpMat& M, const IVec& sign, double reg = 1e-8, bool amd = true);

/// Solve against a factor with refinement and verify the residual of the
/// unregularized system; throws RefinementError when refinement cannot reach
/// a 1e-10 relative residual.
Vec qd_solve(const LdlFactor& f, const Vec& rhs, int refine_steps = 2);

} // namespace conic_bnb
