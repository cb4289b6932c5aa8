#pragma once

#include <optional>

#include "conic_bnb/cones.hpp"
#include "conic_bnb/iterate.hpp"
#include "conic_bnb/linalg.hpp"
#include "conic_bnb/problem.hpp"

namespace conic_bnb {

struct AdmmSettings {
  double rho = 0.1;     // step size on the stacked constraint block, fixed
  double sigma = 1e-6;  // proximal weight keeping the (1,1) block definite
  double alpha = 1.6;   // over-relaxation
  double eps_abs = 1e-8;
  double eps_rel = 1e-8;
  // certificate rays that sit on the dual cone boundary are only approached
  // at O(1/k), so an absolute 1e-8 here would never fire
  double eps_infeas = 1e-5;
  int refine_steps = 1;
};

enum class SolveStatus { Running, Optimal, PrimalInfeasible, DualInfeasible };

struct AdmmResult {
  SolveStatus status = SolveStatus::Running;
  Vec x;
  double objective = 0.0;
  Vec certificate; // infeasibility ray when status is an infeasible verdict
};

/// Two-block splitting solver for a ConicProgram. Equalities, cone rows and
/// the box are stacked into a single constraint
///   [G; A; -I] x + t = [h; b; 0],  t in {0}^p x K x [l, u],
/// so one quasi-definite factorization at setup serves every iteration.
class AdmmSolver {
public:
  AdmmSolver(const ConicProgram& prog, AdmmSettings settings = {});

  /// Start from the final iterate of a related solve instead of zeros.
  void warm_start(const DualIterate& it);

  /// Advance one splitting step; returns the iterate in OSM convention.
  const DualIterate& iterate();

  /// Current iterate without advancing.
  const DualIterate& current() const;

  /// Convergence / infeasibility verdict at the current iterate.
  AdmmResult status() const;

  /// Lower bound estimate: the dual functional
  ///   -1/2 x'Px - h'z + b'y - support_box(l, u, y_b)
  /// evaluated at the current (uncorrected) iterate. -inf until the iterate's
  /// box multiplier is compatible with infinite bounds.
  double dual_estimate() const;

  int iter() const { return iter_; }
  const ConicProgram& program() const { return prog_; }

private:
  void refresh_view() const;

  ConicProgram prog_;
  AdmmSettings st_;
  Index n_, p_, m_;
  Index nt_; // stacked rows p + m + n
  SpMat At_; // stacked constraint matrix
  Vec bt_;   // stacked right-hand side
  ConeWorkspace work_;
  LdlFactor kkt_;

  Vec x_, t_, yt_; // primal, stacked slack, stacked multiplier
  Vec prev_x_, prev_yt_;
  Vec rhs_, sol_, v_;
  int iter_ = 0;

  mutable DualIterate view_;
  mutable bool view_fresh_ = false;
};

} // namespace conic_bnb
