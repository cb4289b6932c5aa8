#pragma once

#include <vector>

#include "conic_bnb/admm.hpp" // SolveStatus
#include "conic_bnb/cones.hpp"
#include "conic_bnb/iterate.hpp"
#include "conic_bnb/linalg.hpp"
#include "conic_bnb/problem.hpp"

namespace conic_bnb {

struct IpmSettings {
  double tol = 1e-8;        // relative residual and gap target
  double eps_infeas = 1e-5; // certificate threshold; stalled iterates leave
                            // a base-point residual the ray never shakes off
  double reg = 1e-8;        // static regularization scale for the KKT factor
  double ftb = 0.99;        // fraction-to-boundary step damping
  double push = 1e-2;       // interior margin applied to warm starts
  int refine_steps = 2;
};

struct IpmResult {
  SolveStatus status = SolveStatus::Running;
  Vec x;
  double objective = 0.0;
  Vec certificate; // infeasibility ray when status is an infeasible verdict
};

/// Nesterov-Todd block for one second-order cone: W = eta (2 wbar wbar' - J)
/// with J = diag(1, -I) and wbar'J wbar = 1.
struct SocScaling {
  double eta = 1.0;
  Vec wbar;
};

/// Strictly interior primal-dual point in the solver's internal layout, plus
/// the scaling blocks computed from it. Box multipliers and slacks live only
/// on the sides with finite bounds.
struct IpmState {
  Vec x;
  Vec s, y;              // cone rows excluding zero cones (those fold into z)
  Vec z;                 // equalities: original G, zero-cone rows, pinned vars
  Vec w_plus, y_plus;    // upper-bound slacks u - x and multipliers
  Vec w_minus, y_minus;  // lower-bound slacks x - l and multipliers
  double mu = 0.0;
  Vec h_orth;                    // diagonal scaling s/y on orthant rows
  std::vector<SocScaling> h_soc; // one block per second-order cone
};

/// Mehrotra predictor-corrector interior-point subsolver. The box enters the
/// Newton system as diagonal terms on the (1,1) block rather than explicit
/// rows, zero cones are merged into the equality block, and an index with
/// l = u is pinned by an equality row; the exposed iterate undoes all three,
/// so callers see the original problem shape with y in K*, y_+/- >= 0 and
///   P x + q + G'z + A'y + y_+ - y_- = 0
/// holding up to the current residual.
///
/// A second-order block whose first row has no matrix entries and offset zero
/// pins its slack head to 0, so the feasible slice has no cone interior and
/// the scaling would degenerate; its tail rows fold into the equality block
/// too, with the head multiplier rebuilt as the tail norm in the view.
class IpmSolver {
public:
  IpmSolver(const ConicProgram& prog, IpmSettings settings = {});

  /// Start near the given iterate, pushed into the interior. Accepts either
  /// convention; an OSM iterate is mapped through y -> -y, y_b -> (y_+, y_-).
  void warm_start(const DualIterate& it);

  /// One predictor-corrector step; returns the iterate in IPM convention.
  const DualIterate& iterate();

  /// Current iterate without advancing.
  const DualIterate& current() const;

  /// Convergence / infeasibility verdict at the current iterate.
  IpmResult status() const;

  /// Lower bound estimate: the dual functional
  ///   -1/2 x'Px - h'z - b'y - u'y_+ + l'y_-
  /// at the current (uncorrected) iterate, with entries on infinite bounds
  /// contributing nothing since their multipliers stay identically zero.
  double dual_estimate() const;

  int iter() const { return iter_; }
  const ConicProgram& program() const { return prog_; }
  const IpmState& state() const { return pt_; }

  /// True once a KKT factorization broke down and the point froze; status()
  /// keeps reporting honestly from the frozen iterate.
  bool stalled() const { return stalled_; }

  /// Relative residual of the last Newton direction against the unregularized
  /// KKT matrix, after refinement.
  double last_kkt_residual() const { return last_kkt_res_; }

private:
  void update_scalings();
  void assemble_kkt(SpMat& K) const;
  void residuals(Vec& rd, Vec& rp, Vec& rc, Vec& ru, Vec& rl) const;
  double step_to_boundary(const Vec& ds, const Vec& dy, const Vec& dwp, const Vec& dyp,
                          const Vec& dwm, const Vec& dym) const;
  void refresh_view() const;

  ConicProgram prog_;
  IpmSettings st_;
  Index n_ = 0, p_ = 0, m_ = 0; // original sizes

  // internal reformulation
  SpMat Gt_; // [G; A_zero; pin rows]
  Vec ht_;
  SpMat Ab_; // cone rows of A excluding zero cones
  Vec bb_;
  std::vector<ConeSpec> cones_bar_;
  std::vector<Index> orth_rows_;                  // internal rows of orthant entries
  std::vector<std::pair<Index, Index>> soc_spans_; // (offset, dim) per SOC block
  std::vector<Index> U_, L_, pins_;
  Vec uU_, lL_;
  std::vector<Index> cone_row_map_; // original cone row -> internal row, -1 if folded
  std::vector<Index> zero_row_map_; // original cone row -> equality row, -1 otherwise
  std::vector<std::pair<Index, Index>> folded_socs_; // (first row, dim) of zero-width blocks
  Index dead_row_ = -1; // first row of a cone block no slack can ever satisfy
  double nu_deg_ = 0.0;

  LdlFactor kkt_;
  IVec sign_;
  mutable SpMat K_; // assembly buffer, fixed pattern

  IpmState pt_;
  int iter_ = 0;
  bool stalled_ = false;
  double last_kkt_res_ = 0.0;

  mutable DualIterate view_;
  mutable bool view_fresh_ = false;
};

} // namespace conic_bnb
