#pragma once

#include <vector>

#include "conic_bnb/types.hpp"

namespace conic_bnb {

enum class ConeKind { Zero, Nonnegative, SecondOrder };

struct ConeSpec {
  ConeKind kind;
  Index dim;
};

/// Sum of block dimensions.
Index cone_dim(const std::vector<ConeSpec>& cones);

/// Euclidean projection onto a single second-order cone {(t, w) : |w|_2 <= t}.
Vec project_soc(const Eigen::Ref<const Vec>& v);

/// Euclidean projection onto the product cone K.
Vec project_cone(const std::vector<ConeSpec>& cones, const Eigen::Ref<const Vec>& v);

/// Projection onto the polar cone K° = {y : y'x <= 0 for all x in K}.
/// Via Moreau: v = proj_K(v) + proj_{K°}(v).
Vec project_polar(const std::vector<ConeSpec>& cones, const Eigen::Ref<const Vec>& v);

/// Membership tests, all up to an absolute tolerance on the projection residual.
bool in_cone(const std::vector<ConeSpec>& cones, const Eigen::Ref<const Vec>& v, double tol);
bool in_polar_cone(const std::vector<ConeSpec>& cones, const Eigen::Ref<const Vec>& v, double tol);
/// Dual cone K* = -K°; for self-dual products (orthant, SOC) this equals K.
bool in_dual_cone(const std::vector<ConeSpec>& cones, const Eigen::Ref<const Vec>& v, double tol);

/// Support function of the box [l, u] at y: sum_i u_i max(y_i,0) + l_i min(y_i,0).
/// Returns +inf when an infinite bound meets a multiplier of matching sign;
/// entries with |y_i| <= 0 contribute nothing even for infinite bounds.
double support_box(const Eigen::Ref<const Vec>& l, const Eigen::Ref<const Vec>& u,
                   const Eigen::Ref<const Vec>& y);

/// Scratch shared by solver hot loops so repeated projections do not allocate.
struct ConeWorkspace {
  std::vector<ConeSpec> cones;
  Vec scratch;

  explicit ConeWorkspace(std::vector<ConeSpec> c) : cones(std::move(c)) {
    scratch.resize(cone_dim(cones));
  }
  /// In-place projection of v onto K.
  void project(Vec& v) const;
};

} // namespace conic_bnb
