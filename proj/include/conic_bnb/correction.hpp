#pragma once

#include <optional>
#include <vector>

#include "conic_bnb/iterate.hpp"
#include "conic_bnb/linalg.hpp"
#include "conic_bnb/problem.hpp"

namespace conic_bnb {

/// Additive update that restores dual feasibility of a truncated iterate.
/// After applying it the stationarity residual cancels (up to solve accuracy)
/// while the conic multiplier y is left untouched, so the corrected point is
/// dual feasible and its dual objective is a certified lower bound.
struct Correction {
  enum class Method { Simple, OptimizationBased };
  Method method = Method::Simple;
  Vec dx;       // n, zero for Simple
  Vec dz;       // p, zero for Simple
  Vec dyB;      // one entry per bounded index, empty for Simple
  Vec dy_b;     // n, equals dy_plus - dy_minus
  Vec dy_plus;  // n, >= 0
  Vec dy_minus; // n, >= 0
};

/// Stationarity defect of the iterate under its own sign convention:
///   OSM:  r = Px + q + G'z - A'y + y_b
///   IPM:  r = Px + q + G'z + A'y + y_plus - y_minus
/// The two agree after mapping y -> -y.
Vec dual_residual(const ConicProgram& prog, const DualIterate& it);

/// Cancel the residual entirely through the box multiplier: dy_b = -r, split
/// nonnegatively. Needs every bound finite, otherwise the corrected dual cost
/// could silently evaluate to -inf; returns nullopt in that case so callers
/// can fall back to the optimization-based method or skip the check.
std::optional<Correction> simple_correction(const ConicProgram& prog, const Vec& r);

/// Indices whose bounds are finite on both sides; the default bounded set.
std::vector<Index> default_bounded_set(const ConicProgram& prog);

/// True iff the stacked map x -> (Px, x_B, Gx) has trivial kernel, i.e.
/// [P, I_B', G'] has full row rank n. Decided from the pivots of an
/// unregularized factorization eliminating the B and G blocks first, so the
/// trailing Schur complement P + I_B'I_B + G'G is positive semidefinite and
/// a dropped pivot there witnesses a kernel vector.
bool rank_check(const SpMat& P, const std::vector<Index>& B, const SpMat& G);

/// Factorization of the correction system
///   [ P    I_B'  G'  ] [ dx  ]   [ -r      ]
///   [ I_B  -eta I  0  ] [ dyB ] = [ -x_B    ]
///   [ G    0   -gam I ] [ dz  ]   [ h - Gx  ]
/// The matrix depends only on the root problem's P, G and the bounded set,
/// never on node bounds or iterates, so one engine serves the whole tree.
class CorrectionEngine {
public:
  /// Runs rank_check first; throws SingularMatrixError with a diagnostic when
  /// the rank condition fails. eta, gamma must be positive.
  CorrectionEngine(const ConicProgram& prog, std::vector<Index> B,
                   double eta = 1.0, double gamma = 1.0);

  const std::vector<Index>& bounded_set() const { return B_; }
  double eta() const { return eta_; }
  double gamma() const { return gamma_; }
  Index size() const { return kkt_.size(); }

  /// Solve for (dx, dyB, dz) given the iterate's x and residual r. Const and
  /// allocation-local, safe to call concurrently.
  Vec solve(const ConicProgram& prog, const Vec& x, const Vec& r) const;

private:
  std::vector<Index> B_;
  double eta_, gamma_;
  Index n_, p_;
  LdlFactor kkt_;
};

/// Optimization-based correction: spread the cancellation over (dx, dyB, dz)
/// by the engine's quasi-definite solve, zero dy_b off the bounded set, split
/// into dy_plus/dy_minus. Works with infinite bounds as long as the engine's
/// rank condition held. Throws RefinementError if the solve cannot reach
/// residual 1e-8 * (1 + |r|).
Correction opt_correction(const CorrectionEngine& engine, const ConicProgram& prog,
                          const DualIterate& it, const Vec& r);

/// Dual objective at the corrected point (x+dx, y, y_b+dy_b, z+dz):
///   OSM:  -1/2 x'Px - h'z + b'y - support_box(l, u, y_b)
///   IPM:  -1/2 x'Px - h'z - b'y - u'y_plus + l'y_minus
/// The IPM box multipliers enter only through y_plus - y_minus = y_b and any
/// nonnegative split is feasible, so both conventions are evaluated through
/// the support function of the corrected y_b (the tightest split); they agree
/// exactly under the y -> -y mapping. By weak duality the value bounds the
/// node optimum from below. Returns -inf when an infinite bound meets a
/// positive multiplier; throws std::logic_error if the corrected point is not
/// dual feasible (that would be an internal bug, not an input error).
double corrected_dual_cost(const ConicProgram& prog, const DualIterate& it,
                           const Correction& corr);

} // namespace conic_bnb
