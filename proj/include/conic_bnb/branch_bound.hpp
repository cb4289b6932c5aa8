#pragma once

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "conic_bnb/correction.hpp"
#include "conic_bnb/iterate.hpp"
#include "conic_bnb/problem.hpp"

namespace conic_bnb {

enum class SubsolverKind { Ipm, Admm };
enum class CorrectionKind { Simple, OptimizationBased };

struct BnbConfig {
  SubsolverKind subsolver = SubsolverKind::Ipm;
  bool early_termination = true;
  CorrectionKind correction = CorrectionKind::OptimizationBased;
  double eta = 1.0;
  double gamma = 1.0;
  /// Splitting iterations between status / early-termination checks; the
  /// interior-point solver checks every iteration regardless.
  int check_interval = 25;
  bool warm_start = true;
  double tol = 1e-8;     // subsolver convergence tolerance
  double int_tol = 1e-6; // integrality tolerance on relaxation solutions
  long max_nodes = 100000;
  long max_total_iterations = 50'000'000;
  /// Per-node subsolver iteration cap; 0 picks 300 (IPM) / 200000 (ADMM).
  long max_node_iterations = 0;
  /// Initial incumbent value without an incumbent point. Nodes that cannot
  /// beat it are pruned; if nothing does, the run reports Infeasible.
  double cutoff = inf;
  /// Re-solve every early-terminated node to optimality and record
  /// (node optimum, bound at prune time) pairs in the stats. Test aid.
  bool audit_early_prunes = false;
};

enum class BnbStatus { Optimal, Infeasible, NodeLimit, IterationLimit };

struct SolveStats {
  long nodes_solved = 0;       // nodes whose relaxation was iterated on
  long nodes_pruned_early = 0; // stopped by a corrected dual bound
  long nodes_pruned_bound = 0; // dropped by incumbent comparison alone
  long total_subsolver_iterations = 0;
  long iterations_after_first_incumbent = 0;
  /// (total iteration count, new upper bound) at each incumbent improvement.
  std::vector<std::pair<long, double>> incumbent_history;
  /// audit_early_prunes only: (re-solved node optimum, bound at prune time).
  std::vector<std::pair<double, double>> early_prune_audit;
  std::string diagnostics; // nonempty when early termination was degraded
};

struct BnbResult {
  BnbStatus status = BnbStatus::Infeasible;
  double objective = inf; // incumbent value, inf when none was found
  Vec x;                  // incumbent point, empty when none was found
  SolveStats stats;
};

/// One open relaxation in the tree.
struct BnbNode {
  Vec node_l, node_u;
  double parent_bound = -inf; // parent relaxation optimum, a valid lower bound
  int depth = 0;
  long seq = 0; // insertion counter, breaks remaining ties first-in-first-out
  std::shared_ptr<const DualIterate> warm; // parent's final iterate
};

/// Best-first order: smallest parent bound, then deepest, then oldest.
struct NodeOrder {
  bool operator()(const BnbNode& a, const BnbNode& b) const {
    if (a.parent_bound != b.parent_bound) return a.parent_bound < b.parent_bound;
    if (a.depth != b.depth) return a.depth > b.depth;
    return a.seq < b.seq;
  }
};

using NodeQueue = std::multiset<BnbNode, NodeOrder>;

/// Index of the integer variable whose relaxation value sits farthest from
/// its nearest allowed value inside the node box; ties pick the lowest index.
/// Returns -1 when every integer variable is within tol of an allowed value.
Index pick_branch_index(const Vec& x_hat, const MicpProblem& micp, const BnbNode& node,
                        double tol = 1e-6);

/// Split the node at x_hat on the chosen index: the down child caps the
/// variable at the largest allowed value <= x_hat, the up child raises it to
/// the smallest allowed value above. A side with no allowed values left is
/// nullopt. Children inherit bound, depth + 1, and the warm-start iterate
/// from the fields already set on `node`.
std::pair<std::optional<BnbNode>, std::optional<BnbNode>> branch(const BnbNode& node,
                                                                 const Vec& x_hat,
                                                                 const MicpProblem& micp,
                                                                 Index branch_index);

/// Best-first branch-and-bound with optional early termination of node
/// relaxations: when the running dual estimate reaches the incumbent value,
/// the iterate is corrected to dual feasibility and the node is discarded as
/// soon as the certified bound ties the incumbent, without solving to
/// optimality. Throws std::invalid_argument on an invalid problem and
/// std::runtime_error when a node relaxation is unbounded below.
BnbResult bnb_solve(const MicpProblem& micp, const BnbConfig& config = {});

} // namespace conic_bnb
