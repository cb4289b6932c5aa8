#include "conic_bnb/problem.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace conic_bnb {

static double max_abs_coeff(const SpMat& M) {
  double m = 0.0;
  for (int k = 0; k < M.outerSize(); ++k)
    for (SpMat::InnerIterator it(M, k); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

std::vector<Violation> validate(const ConicProgram& prog) {
  std::vector<Violation> out;
  const Index n = prog.n();

  if (prog.P.rows() != n || prog.P.cols() != n)
    out.push_back({"P must be n x n", -1});
  if (prog.G.rows() != prog.p() || (prog.p() > 0 && prog.G.cols() != n))
    out.push_back({"G must be p x n", -1});
  if (prog.A.rows() != prog.m() || (prog.m() > 0 && prog.A.cols() != n))
    out.push_back({"A must be m x n", -1});
  if (prog.l.size() != n) out.push_back({"l must have length n", -1});
  if (prog.u.size() != n) out.push_back({"u must have length n", -1});

  for (Index k = 0; k < static_cast<Index>(prog.cones.size()); ++k)
    if (prog.cones[k].dim < 1) out.push_back({"cone block with nonpositive dimension", k});
  if (cone_dim(prog.cones) != prog.m())
    out.push_back({"cone dimensions do not partition the rows of A", -1});

  if (prog.P.rows() == n && prog.P.cols() == n) {
    SpMat D = SpMat(prog.P.transpose()) - prog.P;
    if (max_abs_coeff(D) > 1e-12 * std::max(1.0, max_abs_coeff(prog.P)))
      out.push_back({"P is not symmetric", -1});
  }

  if (prog.l.size() == n && prog.u.size() == n) {
    for (Index i = 0; i < n; ++i) {
      if (std::isnan(prog.l[i]) || std::isnan(prog.u[i]))
        out.push_back({"NaN bound", i});
      else if (prog.l[i] > prog.u[i])
        out.push_back({"l > u", i});
    }
  }
  return out;
}

std::vector<Violation> validate(const MicpProblem& prob) {
  std::vector<Violation> out = validate(prob.relaxation);
  const Index n = prob.relaxation.n();
  std::set<Index> seen;
  for (const auto& iv : prob.integers) {
    if (iv.index < 0 || iv.index >= n) {
      out.push_back({"integer index out of range", iv.index});
      continue;
    }
    if (!seen.insert(iv.index).second)
      out.push_back({"duplicate integer index", iv.index});
    if (iv.values.empty()) {
      out.push_back({"empty integer value set", iv.index});
      continue;
    }
    for (size_t k = 0; k < iv.values.size(); ++k) {
      if (!is_finite(iv.values[k]))
        out.push_back({"non-finite integer value", iv.index});
      if (k > 0 && iv.values[k] <= iv.values[k - 1])
        out.push_back({"integer values not sorted ascending and distinct", iv.index});
    }
    if (prob.relaxation.l.size() == n && prob.relaxation.u.size() == n &&
        (iv.values.front() < prob.relaxation.l[iv.index] ||
         iv.values.back() > prob.relaxation.u[iv.index]))
      out.push_back({"integer values outside the root box", iv.index});
  }
  return out;
}

ConicProgram build_relaxation(const MicpProblem& prob, const Vec& node_l, const Vec& node_u) {
  const ConicProgram& root = prob.relaxation;
  const Index n = root.n();
  if (node_l.size() != n || node_u.size() != n)
    throw std::invalid_argument("build_relaxation: node box has wrong length");
  for (Index i = 0; i < n; ++i) {
    if (node_l[i] < root.l[i] || node_u[i] > root.u[i])
      throw std::invalid_argument("build_relaxation: node box not contained in root box");
    if (node_l[i] > node_u[i])
      throw std::invalid_argument("build_relaxation: empty node box");
  }
  ConicProgram node = root;
  node.l = node_l;
  node.u = node_u;
  return node;
}

double primal_objective(const ConicProgram& prog, const Vec& x) {
  if (x.size() != prog.n())
    throw std::invalid_argument("primal_objective: x has wrong length");
  return 0.5 * x.dot(prog.P * x) + prog.q.dot(x);
}

bool is_integer_feasible(const Vec& x, const MicpProblem& prob, double tol) {
  for (const auto& iv : prob.integers) {
    double best = inf;
    for (double v : iv.values) best = std::min(best, std::abs(x[iv.index] - v));
    if (best > tol) return false;
  }
  return true;
}

SpMat symmetrize(const SpMat& tri) {
  if (tri.rows() != tri.cols())
    throw std::invalid_argument("symmetrize: matrix must be square");
  std::vector<Triplet> ts;
  ts.reserve(2 * static_cast<size_t>(tri.nonZeros()));
  for (int k = 0; k < tri.outerSize(); ++k)
    for (SpMat::InnerIterator it(tri, k); it; ++it) {
      ts.emplace_back(it.row(), it.col(), it.value());
      if (it.row() != it.col()) ts.emplace_back(it.col(), it.row(), it.value());
    }
  SpMat full(tri.rows(), tri.cols());
  full.setFromTriplets(ts.begin(), ts.end());
  return full;
}

} // namespace conic_bnb
