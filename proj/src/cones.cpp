#include "conic_bnb/cones.hpp"

#include <cmath>
#include <stdexcept>

namespace conic_bnb {

Index cone_dim(const std::vector<ConeSpec>& cones) {
  Index m = 0;
  for (const auto& c : cones) m += c.dim;
  return m;
}

Vec project_soc(const Eigen::Ref<const Vec>& v) {
  const Index d = v.size();
  Vec out(d);
  const double t = v[0];
  const double nw = d > 1 ? v.tail(d - 1).norm() : 0.0;
  if (nw <= t) {
    out = v; // already inside
  } else if (nw <= -t) {
    out.setZero(); // inside the polar of the cone
  } else {
    const double a = 0.5 * (t + nw);
    out[0] = a;
    out.tail(d - 1) = (a / nw) * v.tail(d - 1);
  }
  return out;
}

static void project_block(ConeKind kind, Eigen::Ref<Vec> v) {
  switch (kind) {
    case ConeKind::Zero:
      v.setZero();
      break;
    case ConeKind::Nonnegative:
      v = v.cwiseMax(0.0);
      break;
    case ConeKind::SecondOrder:
      v = project_soc(v);
      break;
  }
}

Vec project_cone(const std::vector<ConeSpec>& cones, const Eigen::Ref<const Vec>& v) {
  if (v.size() != cone_dim(cones))
    throw std::invalid_argument("project_cone: dimension mismatch");
  Vec out = v;
  Index at = 0;
  for (const auto& c : cones) {
    project_block(c.kind, out.segment(at, c.dim));
    at += c.dim;
  }
  return out;
}

Vec project_polar(const std::vector<ConeSpec>& cones, const Eigen::Ref<const Vec>& v) {
  return v - project_cone(cones, v);
}

bool in_cone(const std::vector<ConeSpec>& cones, const Eigen::Ref<const Vec>& v, double tol) {
  return (v - project_cone(cones, v)).lpNorm<Eigen::Infinity>() <= tol;
}

bool in_polar_cone(const std::vector<ConeSpec>& cones, const Eigen::Ref<const Vec>& v, double tol) {
  return project_cone(cones, v).lpNorm<Eigen::Infinity>() <= tol;
}

bool in_dual_cone(const std::vector<ConeSpec>& cones, const Eigen::Ref<const Vec>& v, double tol) {
  return in_polar_cone(cones, -v, tol);
}

double support_box(const Eigen::Ref<const Vec>& l, const Eigen::Ref<const Vec>& u,
                   const Eigen::Ref<const Vec>& y) {
  if (l.size() != y.size() || u.size() != y.size())
    throw std::invalid_argument("support_box: dimension mismatch");
  double s = 0.0;
  for (Index i = 0; i < y.size(); ++i) {
    if (y[i] > 0.0) {
      if (!is_finite(u[i])) return inf;
      s += u[i] * y[i];
    } else if (y[i] < 0.0) {
      if (!is_finite(l[i])) return inf;
      s += l[i] * y[i];
    }
  }
  return s;
}

void ConeWorkspace::project(Vec& v) const {
  Index at = 0;
  for (const auto& c : cones) {
    project_block(c.kind, v.segment(at, c.dim));
    at += c.dim;
  }
}

} // namespace conic_bnb
