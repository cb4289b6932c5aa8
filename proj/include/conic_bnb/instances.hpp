#pragma once

// Deterministic benchmark generators: hybrid MPC (current-tracking flavor),
// cardinality-constrained portfolio selection, and seeded random MIQPs for
// property suites. Pure functions of their configs.

#include <cstdint>
#include <vector>

#include "conic_bnb/problem.hpp"

namespace conic_bnb {

enum class MpcForm {
  Condensed, // states eliminated through the dynamics, variables are inputs only
  Sparse,    // states kept as variables, dynamics as equality rows
};

// Finite-horizon optimal control with discrete-valued inputs:
//
//   min   sum_t gamma^t (x_t' Q x_t + u_t' R u_t) + gamma^T (x_T' Q_T x_T + 2 q_T' x_T)
//   s.t.  x_0 = x_init,  x_{t+1} = Abar x_t + Bbar u_t,
//         u_t componentwise in value_set,  ||u_t - u_{t-1}||_inf <= 1 (ramp).
struct MpcConfig {
  Index n_x = 12;
  Index n_u = 6;
  Index T = 8;
  Mat Abar;
  Mat Bbar;
  Mat Q;   // stage state cost, PSD
  Mat R;   // stage input cost, PSD
  Mat Q_T; // terminal state cost, PSD
  Vec q_T; // terminal linear cost
  double gamma_disc = 1.0;
  Vec x_init;
  Vec u_prev; // u_{-1}, anchors the first ramp constraint
  std::vector<double> value_set{-1.0, 0.0, 1.0};
  bool ramp = true;
  MpcForm form = MpcForm::Sparse;
};

// Sparse form stacks the decision vector as [x_0; ...; x_T; u_0; ...; u_{T-1}]
// with n_x (T+1) equality rows; only inputs carry boxes and integer sets.
// Condensed form substitutes x_t = Abar^t x_init + sum_j Abar^(t-1-j) Bbar u_j
// and keeps the inputs; the resulting constant cost term is dropped (the
// ConicProgram objective has no offset field), so condensed optima sit below
// sparse optima by exactly that constant.
MicpProblem gen_mpc(const MpcConfig& cfg);

// The constant dropped by the condensed form, for comparing the two forms.
double mpc_condensed_offset(const MpcConfig& cfg);

// Synthetic system of the requested dims: random dynamics with Abar rescaled
// to spectral radius 0.98, diagonal PSD costs, random initial state.
MpcConfig random_mpc_config(std::uint64_t seed, Index n_x = 12, Index n_u = 6, Index T = 8,
                            MpcForm form = MpcForm::Sparse);

// Portfolio selection over n assets in L sectors, variables (x+, x-, b, l):
//
//   min   r' (x+ - x-)
//   s.t.  || F (x+ - x-) || <= sqrt(rho)        (Lambda = F'F risk bound)
//         sum(x+ - x-) = 1,  sum(b) <= K,  L_min <= sum(l) <= L_max,
//         b <= H l,  l <= H' b,  0 <= x+- <= b,  b, l binary.
struct PortfolioConfig {
  Index n = 20;
  Index L = 3;
  Index K = 10;
  double rho = 100.0;
  Index L_min = 1;
  Index L_max = 3;
  Vec r;        // expected returns
  Mat F;        // risk factor, Lambda = F' F
  Mat H;        // n x L sector incidence, one 1 per row
  double T = 2000; // scale knob quoted with the source experiments; unused here
};

// Variables stacked as [x+ (n); x- (n); b (n); l (L)], b and l integer {0,1}.
MicpProblem gen_portfolio(const PortfolioConfig& cfg);

// Random returns/factors, round-robin sector assignment, rho sized so the
// equal-weight long-only portfolio is strictly feasible.
PortfolioConfig random_portfolio_config(std::uint64_t seed, Index n = 20, Index L = 3);

// Strictly convex random MIQP: P = F'F + I/10, box [-2,2]^n, the first n_int
// variables binary, optionally one equality row anchored on a feasible point.
MicpProblem gen_random_miqp(Index n, Index n_int, std::uint64_t seed,
                            bool with_equality = false);

} // namespace conic_bnb
