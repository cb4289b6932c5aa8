#include "conic_bnb/branch_bound.hpp"

#include <algorithm>
#include <stdexcept>

#include "conic_bnb/admm.hpp"
#include "conic_bnb/ipm.hpp"

namespace conic_bnb {

namespace {

constexpr double kValueEps = 1e-12; // slack when testing value-in-box membership

const IntegerVar& integer_entry(const MicpProblem& micp, Index idx) {
  for (const auto& iv : micp.integers)
    if (iv.index == idx) return iv;
  throw std::invalid_argument("branch: index is not integer constrained");
}

struct NodeOutcome {
  enum class Kind { Optimal, Infeasible, Early, IterationCap };
  Kind kind = Kind::IterationCap;
  double objective = 0.0;
  Vec x;
  std::shared_ptr<const DualIterate> final_it;
};

class TreeSolver {
public:
  TreeSolver(const MicpProblem& micp, const BnbConfig& cfg) : micp_(micp), cfg_(cfg) {}

  BnbResult run() {
    auto viols = validate(micp_);
    if (!viols.empty())
      throw std::invalid_argument("bnb_solve: invalid problem: " + viols.front().message);

    if (cfg_.early_termination && cfg_.correction == CorrectionKind::OptimizationBased) {
      try {
        engine_.emplace(micp_.relaxation, default_bounded_set(micp_.relaxation), cfg_.eta,
                        cfg_.gamma);
      } catch (const SingularMatrixError& e) {
        // no safe correction is available, run without early termination
        stats_.diagnostics = std::string("early termination disabled: ") + e.what();
      }
    }

    U_ = cfg_.cutoff;
    BnbNode root;
    root.node_l = micp_.relaxation.l;
    root.node_u = micp_.relaxation.u;
    root.seq = seq_++;
    tree_.insert(std::move(root));

    BnbStatus status = BnbStatus::Infeasible;
    bool stopped = false;
    while (!tree_.empty()) {
      if (stats_.nodes_solved >= cfg_.max_nodes) {
        status = BnbStatus::NodeLimit;
        stopped = true;
        break;
      }
      BnbNode node = *tree_.begin();
      tree_.erase(tree_.begin());
      if (node.parent_bound > U_) { // bound may have dropped since insertion
        ++stats_.nodes_pruned_bound;
        continue;
      }
      ConicProgram prog = build_relaxation(micp_, node.node_l, node.node_u);
      ++stats_.nodes_solved;
      NodeOutcome out = solve_node(prog, node, true);

      if (out.kind == NodeOutcome::Kind::IterationCap) {
        status = BnbStatus::IterationLimit;
        stopped = true;
        break;
      }
      if (out.kind == NodeOutcome::Kind::Infeasible) continue;
      if (out.kind == NodeOutcome::Kind::Early) {
        ++stats_.nodes_pruned_early;
        if (cfg_.audit_early_prunes) audit(prog);
        continue;
      }

      if (out.objective > U_) {
        ++stats_.nodes_pruned_bound;
        continue;
      }
      const Index bi = is_integer_feasible(out.x, micp_, cfg_.int_tol)
                           ? Index(-1)
                           : pick_branch_index(out.x, micp_, node, cfg_.int_tol);
      if (bi < 0) {
        U_ = out.objective;
        x_star_ = out.x;
        stats_.incumbent_history.emplace_back(stats_.total_subsolver_iterations, U_);
        const double bound = U_;
        const size_t before = tree_.size();
        std::erase_if(tree_, [bound](const BnbNode& nd) { return nd.parent_bound > bound; });
        stats_.nodes_pruned_bound += (long)(before - tree_.size());
        continue;
      }
      node.parent_bound = out.objective;
      node.warm = cfg_.warm_start ? out.final_it : nullptr;
      auto [down, up] = branch(node, out.x, micp_, bi);
      if (down) {
        down->seq = seq_++;
        tree_.insert(std::move(*down));
      }
      if (up) {
        up->seq = seq_++;
        tree_.insert(std::move(*up));
      }
    }

    BnbResult res;
    if (x_star_.size() > 0) {
      res.status = stopped ? status : BnbStatus::Optimal;
      res.objective = U_;
      res.x = x_star_;
    } else {
      res.status = stopped ? status : BnbStatus::Infeasible;
    }
    res.stats = std::move(stats_);
    return res;
  }

private:
  NodeOutcome solve_node(const ConicProgram& prog, const BnbNode& node, bool allow_et) {
    const long cap = cfg_.max_node_iterations > 0
                         ? cfg_.max_node_iterations
                         : (cfg_.subsolver == SubsolverKind::Ipm ? 300 : 200000);
    if (cfg_.subsolver == SubsolverKind::Ipm) {
      IpmSettings st;
      st.tol = cfg_.tol;
      IpmSolver solver(prog, st);
      if (node.warm) solver.warm_start(*node.warm);
      return drive(solver, prog, cap, 1, allow_et);
    }
    AdmmSettings st;
    st.eps_abs = st.eps_rel = cfg_.tol;
    AdmmSolver solver(prog, st);
    if (node.warm) solver.warm_start(*node.warm);
    return drive(solver, prog, cap, std::max(1, cfg_.check_interval), allow_et);
  }

  template <class Solver>
  NodeOutcome drive(Solver& solver, const ConicProgram& prog, long cap, int check_every,
                    bool allow_et) {
    for (long k = 0;; ++k) {
      if (k % check_every == 0) {
        auto st = solver.status();
        if (st.status == SolveStatus::Optimal) {
          NodeOutcome out;
          out.kind = NodeOutcome::Kind::Optimal;
          out.objective = st.objective;
          out.x = st.x;
          out.final_it = std::make_shared<DualIterate>(solver.current());
          return out;
        }
        if (st.status == SolveStatus::PrimalInfeasible)
          return {NodeOutcome::Kind::Infeasible, 0.0, {}, nullptr};
        if (st.status == SolveStatus::DualInfeasible)
          throw std::runtime_error("bnb_solve: node relaxation is unbounded below");
        if (allow_et && cfg_.early_termination && U_ < inf && solver.dual_estimate() >= U_) {
          auto bound = corrected_bound(prog, solver.current());
          if (bound && *bound >= U_) {
            NodeOutcome out;
            out.kind = NodeOutcome::Kind::Early;
            out.objective = *bound;
            out.final_it = std::make_shared<DualIterate>(solver.current());
            return out;
          }
        }
      }
      if (k >= cap || stats_.total_subsolver_iterations >= cfg_.max_total_iterations)
        return {NodeOutcome::Kind::IterationCap, 0.0, {}, nullptr};
      solver.iterate();
      ++stats_.total_subsolver_iterations;
      if (U_ < inf) ++stats_.iterations_after_first_incumbent;
    }
  }

  std::optional<double> corrected_bound(const ConicProgram& prog, const DualIterate& it) {
    Vec r = dual_residual(prog, it);
    std::optional<Correction> c;
    if (cfg_.correction == CorrectionKind::Simple) {
      c = simple_correction(prog, r);
    } else if (engine_) {
      try {
        c = opt_correction(*engine_, prog, it, r);
      } catch (const RefinementError&) {
        return std::nullopt;
      }
    }
    if (!c) return std::nullopt;
    return corrected_dual_cost(prog, it, *c);
  }

  void audit(const ConicProgram& prog) {
    BnbNode fresh; // cold start, no early termination: the node's true optimum
    ConicProgram copy = prog;
    NodeOutcome out = solve_node(copy, fresh, false);
    if (out.kind == NodeOutcome::Kind::Optimal)
      stats_.early_prune_audit.emplace_back(out.objective, U_);
  }

  const MicpProblem& micp_;
  BnbConfig cfg_;
  SolveStats stats_;
  NodeQueue tree_;
  std::optional<CorrectionEngine> engine_;
  double U_ = inf;
  Vec x_star_;
  long seq_ = 0;
};

} // namespace

Index pick_branch_index(const Vec& x_hat, const MicpProblem& micp, const BnbNode& node,
                        double tol) {
  Index best = -1;
  double best_dist = tol;
  for (const auto& iv : micp.integers) {
    const Index i = iv.index;
    double dist = inf;
    for (double v : iv.values) {
      if (v < node.node_l[i] - kValueEps || v > node.node_u[i] + kValueEps) continue;
      dist = std::min(dist, std::abs(x_hat[i] - v));
    }
    if (dist > best_dist || (dist == best_dist && best >= 0 && i < best)) {
      best_dist = dist;
      best = i;
    }
  }
  return best;
}

std::pair<std::optional<BnbNode>, std::optional<BnbNode>> branch(const BnbNode& node,
                                                                 const Vec& x_hat,
                                                                 const MicpProblem& micp,
                                                                 Index branch_index) {
  const IntegerVar& iv = integer_entry(micp, branch_index);
  double down_v = -inf, up_v = inf;
  for (double v : iv.values) {
    if (v < node.node_l[branch_index] - kValueEps || v > node.node_u[branch_index] + kValueEps)
      continue;
    if (v <= x_hat[branch_index])
      down_v = std::max(down_v, v);
    else
      up_v = std::min(up_v, v);
  }
  std::pair<std::optional<BnbNode>, std::optional<BnbNode>> children;
  if (is_finite(down_v)) {
    BnbNode child = node;
    child.node_u[branch_index] = down_v;
    ++child.depth;
    children.first = std::move(child);
  }
  if (is_finite(up_v)) {
    BnbNode child = node;
    child.node_l[branch_index] = up_v;
    ++child.depth;
    children.second = std::move(child);
  }
  return children;
}

BnbResult bnb_solve(const MicpProblem& micp, const BnbConfig& config) {
  return TreeSolver(micp, config).run();
}

} // namespace conic_bnb
