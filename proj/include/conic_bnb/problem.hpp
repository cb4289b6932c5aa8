#pragma once

#include <string>
#include <vector>

#include "conic_bnb/cones.hpp"
#include "conic_bnb/types.hpp"

namespace conic_bnb {

/// Continuous conic program
///
///   minimize    1/2 x'Px + q'x
///   subject to  Gx = h
///               Ax + s = b,   s in K
///               l <= x <= u
///
/// K is the product of the blocks in `cones` and must partition the rows of A.
/// Box bounds may be +-inf entrywise.
struct ConicProgram {
  SpMat P; // n x n, symmetric PSD
  Vec q;
  SpMat G; // p x n
  Vec h;
  SpMat A; // m x n
  Vec b;
  std::vector<ConeSpec> cones;
  Vec l;
  Vec u;

  Index n() const { return q.size(); }
  Index p() const { return h.size(); }
  Index m() const { return b.size(); }
};

/// One integer-constrained variable: x[index] must take a value from `values`
/// (finite, sorted ascending, distinct).
struct IntegerVar {
  Index index;
  std::vector<double> values;
};

/// Mixed-integer conic program: the continuous relaxation plus integrality sets.
struct MicpProblem {
  ConicProgram relaxation;
  std::vector<IntegerVar> integers;
};

struct Violation {
  std::string message;
  Index index; // offending row/column/entry, -1 when not applicable
};

/// Structural checks: dimensions, cone partition, l <= u, symmetry of P
/// (within 1e-12 * max|P|), integer sets sorted/distinct/inside the root box.
/// Pure; returns every violation found rather than stopping at the first.
std::vector<Violation> validate(const ConicProgram& prog);
std::vector<Violation> validate(const MicpProblem& prob);

/// Relaxation of a branch-and-bound node: same data with the box replaced by
/// [node_l, node_u]. Throws std::invalid_argument if the node box is not
/// contained in the root box.
ConicProgram build_relaxation(const MicpProblem& prob, const Vec& node_l, const Vec& node_u);

/// 1/2 x'Px + q'x. Invariant under replacing P by (P + P')/2.
double primal_objective(const ConicProgram& prog, const Vec& x);

/// True when every integer-constrained entry of x is within tol of one of its
/// allowed values.
bool is_integer_feasible(const Vec& x, const MicpProblem& prob, double tol = 1e-6);

/// Mirror the given triangle so the result is structurally symmetric.
/// Triplets may address either triangle; diagonal entries are kept once.
SpMat symmetrize(const SpMat& tri);

} // namespace conic_bnb
