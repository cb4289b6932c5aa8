#include "conic_bnb/instances.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <random>
#include <stdexcept>

namespace conic_bnb {

namespace {

// raw-bit uniform doubles so generated instances are identical across
// platforms and standard library versions
double runif(std::mt19937_64& g, double lo, double hi) {
  const double u = static_cast<double>(g() >> 11) * 0x1.0p-53;
  return lo + u * (hi - lo);
}

Mat random_matrix(std::mt19937_64& g, Index rows, Index cols, double lo, double hi) {
  Mat M(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) M(i, j) = runif(g, lo, hi);
  return M;
}

void check_mpc(const MpcConfig& cfg) {
  if (cfg.n_x < 1 || cfg.n_u < 1 || cfg.T < 1)
    throw std::invalid_argument("gen_mpc: dimensions must be positive");
  if (cfg.Abar.rows() != cfg.n_x || cfg.Abar.cols() != cfg.n_x ||
      cfg.Bbar.rows() != cfg.n_x || cfg.Bbar.cols() != cfg.n_u)
    throw std::invalid_argument("gen_mpc: dynamics dimensions inconsistent");
  if (cfg.Q.rows() != cfg.n_x || cfg.Q.cols() != cfg.n_x || cfg.Q_T.rows() != cfg.n_x ||
      cfg.Q_T.cols() != cfg.n_x || cfg.R.rows() != cfg.n_u || cfg.R.cols() != cfg.n_u)
    throw std::invalid_argument("gen_mpc: cost dimensions inconsistent");
  if (cfg.q_T.size() != cfg.n_x || cfg.x_init.size() != cfg.n_x ||
      cfg.u_prev.size() != cfg.n_u)
    throw std::invalid_argument("gen_mpc: vector dimensions inconsistent");
  if (cfg.value_set.empty()) throw std::invalid_argument("gen_mpc: empty value set");
  if (!(cfg.gamma_disc > 0.0 && cfg.gamma_disc <= 1.0))
    throw std::invalid_argument("gen_mpc: discount must lie in (0, 1]");
}

// ramp rows |u_t - u_{t-1}| <= 1 as 2 n_u T inequalities; `ucol` maps input
// block t to its first column
void add_ramp_rows(std::vector<Triplet>& trips, Vec& b, Index row0, const MpcConfig& cfg,
                   Index ucol0) {
  Index row = row0;
  for (Index t = 0; t < cfg.T; ++t) {
    for (Index j = 0; j < cfg.n_u; ++j) {
      const Index cur = ucol0 + t * cfg.n_u + j;
      trips.emplace_back(row, cur, 1.0);
      if (t > 0) {
        trips.emplace_back(row, cur - cfg.n_u, -1.0);
        b[row] = 1.0;
      } else {
        b[row] = 1.0 + cfg.u_prev[j];
      }
      ++row;
      trips.emplace_back(row, cur, -1.0);
      if (t > 0) {
        trips.emplace_back(row, cur - cfg.n_u, 1.0);
        b[row] = 1.0;
      } else {
        b[row] = 1.0 - cfg.u_prev[j];
      }
      ++row;
    }
  }
}

MicpProblem mpc_sparse(const MpcConfig& cfg) {
  const Index nx = cfg.n_x, nu = cfg.n_u, T = cfg.T;
  const Index n_states = nx * (T + 1);
  const Index n = n_states + nu * T;
  const Index p = nx * (T + 1);

  MicpProblem prob;
  ConicProgram& prog = prob.relaxation;
  prog.q = Vec::Zero(n);
  prog.l = Vec::Constant(n, -inf);
  prog.u = Vec::Constant(n, inf);

  std::vector<Triplet> pt;
  double disc = 1.0;
  for (Index t = 0; t < T; ++t, disc *= cfg.gamma_disc) {
    for (Index i = 0; i < nx; ++i)
      for (Index j = 0; j < nx; ++j)
        if (cfg.Q(i, j) != 0.0) pt.emplace_back(t * nx + i, t * nx + j, 2.0 * disc * cfg.Q(i, j));
    for (Index i = 0; i < nu; ++i)
      for (Index j = 0; j < nu; ++j)
        if (cfg.R(i, j) != 0.0)
          pt.emplace_back(n_states + t * nu + i, n_states + t * nu + j,
                          2.0 * disc * cfg.R(i, j));
  }
  for (Index i = 0; i < nx; ++i) {
    prog.q[T * nx + i] = 2.0 * disc * cfg.q_T[i];
    for (Index j = 0; j < nx; ++j)
      if (cfg.Q_T(i, j) != 0.0) pt.emplace_back(T * nx + i, T * nx + j, 2.0 * disc * cfg.Q_T(i, j));
  }
  prog.P.resize(n, n);
  prog.P.setFromTriplets(pt.begin(), pt.end());

  std::vector<Triplet> gt;
  prog.h = Vec::Zero(p);
  for (Index i = 0; i < nx; ++i) {
    gt.emplace_back(i, i, 1.0);
    prog.h[i] = cfg.x_init[i];
  }
  for (Index t = 0; t < T; ++t) {
    const Index row = nx * (t + 1);
    for (Index i = 0; i < nx; ++i) {
      gt.emplace_back(row + i, (t + 1) * nx + i, -1.0);
      for (Index j = 0; j < nx; ++j)
        if (cfg.Abar(i, j) != 0.0) gt.emplace_back(row + i, t * nx + j, cfg.Abar(i, j));
      for (Index j = 0; j < nu; ++j)
        if (cfg.Bbar(i, j) != 0.0)
          gt.emplace_back(row + i, n_states + t * nu + j, cfg.Bbar(i, j));
    }
  }
  prog.G.resize(p, n);
  prog.G.setFromTriplets(gt.begin(), gt.end());

  const Index m = cfg.ramp ? 2 * nu * T : 0;
  prog.A.resize(m, n);
  prog.b = Vec::Zero(m);
  if (m > 0) {
    std::vector<Triplet> at;
    add_ramp_rows(at, prog.b, 0, cfg, n_states);
    prog.A.setFromTriplets(at.begin(), at.end());
    prog.cones.push_back({ConeKind::Nonnegative, m});
  }

  const double vmin = *std::min_element(cfg.value_set.begin(), cfg.value_set.end());
  const double vmax = *std::max_element(cfg.value_set.begin(), cfg.value_set.end());
  for (Index k = 0; k < nu * T; ++k) {
    prog.l[n_states + k] = vmin;
    prog.u[n_states + k] = vmax;
    prob.integers.push_back({n_states + k, cfg.value_set});
  }
  return prob;
}

MicpProblem mpc_condensed(const MpcConfig& cfg) {
  const Index nx = cfg.n_x, nu = cfg.n_u, T = cfg.T;
  const Index n = nu * T;

  // x_t = c_t + S_t u with c_0 = x_init, S_0 = 0
  Mat S = Mat::Zero(nx, n);
  Vec c = cfg.x_init;
  Mat M = Mat::Zero(n, n);
  Vec q = Vec::Zero(n);
  double disc = 1.0;
  for (Index t = 0; t < T; ++t, disc *= cfg.gamma_disc) {
    if (t > 0) {
      M += disc * S.transpose() * cfg.Q * S;
      q += 2.0 * disc * S.transpose() * (cfg.Q * c);
    }
    M.block(t * nu, t * nu, nu, nu) += disc * cfg.R;
    // advance to t+1
    Mat Snext = cfg.Abar * S;
    Snext.block(0, t * nu, nx, nu) += cfg.Bbar;
    S = std::move(Snext);
    c = cfg.Abar * c;
  }
  M += disc * S.transpose() * cfg.Q_T * S;
  q += 2.0 * disc * S.transpose() * (cfg.Q_T * c + cfg.q_T);

  MicpProblem prob;
  ConicProgram& prog = prob.relaxation;
  Mat P = M + M.transpose();
  prog.P = P.sparseView();
  prog.q = q;
  prog.G.resize(0, n);
  prog.h = Vec(0);

  const Index m = cfg.ramp ? 2 * nu * T : 0;
  prog.A.resize(m, n);
  prog.b = Vec::Zero(m);
  if (m > 0) {
    std::vector<Triplet> at;
    add_ramp_rows(at, prog.b, 0, cfg, 0);
    prog.A.setFromTriplets(at.begin(), at.end());
    prog.cones.push_back({ConeKind::Nonnegative, m});
  }

  const double vmin = *std::min_element(cfg.value_set.begin(), cfg.value_set.end());
  const double vmax = *std::max_element(cfg.value_set.begin(), cfg.value_set.end());
  prog.l = Vec::Constant(n, vmin);
  prog.u = Vec::Constant(n, vmax);
  for (Index k = 0; k < n; ++k) prob.integers.push_back({k, cfg.value_set});
  return prob;
}

} // namespace

MicpProblem gen_mpc(const MpcConfig& cfg) {
  check_mpc(cfg);
  return cfg.form == MpcForm::Sparse ? mpc_sparse(cfg) : mpc_condensed(cfg);
}

double mpc_condensed_offset(const MpcConfig& cfg) {
  check_mpc(cfg);
  Vec c = cfg.x_init;
  double offset = 0.0;
  double disc = 1.0;
  for (Index t = 0; t < cfg.T; ++t, disc *= cfg.gamma_disc) {
    offset += disc * c.dot(cfg.Q * c);
    c = cfg.Abar * c;
  }
  offset += disc * (c.dot(cfg.Q_T * c) + 2.0 * cfg.q_T.dot(c));
  return offset;
}

MpcConfig random_mpc_config(std::uint64_t seed, Index n_x, Index n_u, Index T, MpcForm form) {
  std::mt19937_64 rng(seed);
  MpcConfig cfg;
  cfg.n_x = n_x;
  cfg.n_u = n_u;
  cfg.T = T;
  cfg.form = form;
  cfg.Abar = random_matrix(rng, n_x, n_x, -1.0, 1.0);
  const double radius = cfg.Abar.eigenvalues().cwiseAbs().maxCoeff();
  if (radius > 1e-12) cfg.Abar *= 0.98 / radius;
  cfg.Bbar = random_matrix(rng, n_x, n_u, -1.0, 1.0);
  cfg.Q = Mat::Zero(n_x, n_x);
  for (Index i = 0; i < n_x; ++i) cfg.Q(i, i) = runif(rng, 0.5, 1.5);
  cfg.R = Mat::Zero(n_u, n_u);
  for (Index i = 0; i < n_u; ++i) cfg.R(i, i) = runif(rng, 0.05, 0.15);
  cfg.Q_T = 2.0 * cfg.Q;
  cfg.q_T = Vec(n_x);
  for (Index i = 0; i < n_x; ++i) cfg.q_T[i] = runif(rng, -0.5, 0.5);
  cfg.gamma_disc = 0.95;
  cfg.x_init = Vec(n_x);
  for (Index i = 0; i < n_x; ++i) cfg.x_init[i] = runif(rng, -1.0, 1.0);
  cfg.u_prev = Vec::Zero(n_u);
  return cfg;
}

MicpProblem gen_portfolio(const PortfolioConfig& cfg) {
  const Index n = cfg.n, L = cfg.L;
  if (n < 1 || L < 1) throw std::invalid_argument("gen_portfolio: dimensions must be positive");
  if (cfg.r.size() != n || cfg.F.cols() != n || cfg.H.rows() != n || cfg.H.cols() != L)
    throw std::invalid_argument("gen_portfolio: data dimensions inconsistent");
  if (!(cfg.L_min <= cfg.L_max && cfg.L_max <= L))
    throw std::invalid_argument("gen_portfolio: sector limits out of range");
  if (cfg.rho < 0.0) throw std::invalid_argument("gen_portfolio: negative risk bound");
  for (Index i = 0; i < n; ++i) {
    Index ones = 0;
    for (Index j = 0; j < L; ++j) {
      if (cfg.H(i, j) == 1.0)
        ++ones;
      else if (cfg.H(i, j) != 0.0)
        throw std::invalid_argument("gen_portfolio: H entries must be 0 or 1");
    }
    if (ones != 1) throw std::invalid_argument("gen_portfolio: H needs one sector per asset");
  }

  const Index nv = 3 * n + L;       // [x+; x-; b; l]
  const Index xp0 = 0, xm0 = n, b0 = 2 * n, l0 = 3 * n;
  const Index k = cfg.F.rows();
  const Index m_orth = 3 * n + L + 3;

  MicpProblem prob;
  ConicProgram& prog = prob.relaxation;
  prog.P.resize(nv, nv);
  prog.q = Vec::Zero(nv);
  prog.q.segment(xp0, n) = cfg.r;
  prog.q.segment(xm0, n) = -cfg.r;

  std::vector<Triplet> gt;
  for (Index i = 0; i < n; ++i) {
    gt.emplace_back(0, xp0 + i, 1.0);
    gt.emplace_back(0, xm0 + i, -1.0);
  }
  prog.G.resize(1, nv);
  prog.G.setFromTriplets(gt.begin(), gt.end());
  prog.h = Vec::Constant(1, 1.0);

  std::vector<Triplet> at;
  prog.b = Vec::Zero(m_orth + k + 1);
  Index row = 0;
  for (Index i = 0; i < n; ++i) at.emplace_back(row, b0 + i, 1.0);
  prog.b[row++] = static_cast<double>(cfg.K);
  for (Index j = 0; j < L; ++j) at.emplace_back(row, l0 + j, 1.0);
  prog.b[row++] = static_cast<double>(cfg.L_max);
  for (Index j = 0; j < L; ++j) at.emplace_back(row, l0 + j, -1.0);
  prog.b[row++] = -static_cast<double>(cfg.L_min);
  for (Index i = 0; i < n; ++i) { // x+- <= b
    at.emplace_back(row, xp0 + i, 1.0);
    at.emplace_back(row, b0 + i, -1.0);
    ++row;
    at.emplace_back(row, xm0 + i, 1.0);
    at.emplace_back(row, b0 + i, -1.0);
    ++row;
  }
  for (Index i = 0; i < n; ++i) { // b <= H l
    at.emplace_back(row, b0 + i, 1.0);
    for (Index j = 0; j < L; ++j)
      if (cfg.H(i, j) != 0.0) at.emplace_back(row, l0 + j, -cfg.H(i, j));
    ++row;
  }
  for (Index j = 0; j < L; ++j) { // l <= H' b
    at.emplace_back(row, l0 + j, 1.0);
    for (Index i = 0; i < n; ++i)
      if (cfg.H(i, j) != 0.0) at.emplace_back(row, b0 + i, -cfg.H(i, j));
    ++row;
  }
  // risk: slack (sqrt(rho); F (x+ - x-)) lies in the second-order cone
  prog.b[row++] = std::sqrt(cfg.rho);
  for (Index i = 0; i < k; ++i, ++row)
    for (Index j = 0; j < n; ++j)
      if (cfg.F(i, j) != 0.0) {
        at.emplace_back(row, xp0 + j, -cfg.F(i, j));
        at.emplace_back(row, xm0 + j, cfg.F(i, j));
      }
  prog.A.resize(m_orth + k + 1, nv);
  prog.A.setFromTriplets(at.begin(), at.end());
  prog.cones.push_back({ConeKind::Nonnegative, m_orth});
  prog.cones.push_back({ConeKind::SecondOrder, k + 1});

  prog.l = Vec::Zero(nv);
  prog.u = Vec::Ones(nv);
  for (Index i = 0; i < n; ++i) prob.integers.push_back({b0 + i, {0.0, 1.0}});
  for (Index j = 0; j < L; ++j) prob.integers.push_back({l0 + j, {0.0, 1.0}});
  return prob;
}

PortfolioConfig random_portfolio_config(std::uint64_t seed, Index n, Index L) {
  std::mt19937_64 rng(seed);
  PortfolioConfig cfg;
  cfg.n = n;
  cfg.L = L;
  cfg.K = std::max<Index>(1, n / 2);
  cfg.L_min = 1;
  cfg.L_max = L;
  cfg.r = Vec(n);
  for (Index i = 0; i < n; ++i) cfg.r[i] = runif(rng, -1.0, 1.0);
  cfg.F = random_matrix(rng, n, n, -0.5, 0.5);
  cfg.H = Mat::Zero(n, L);
  for (Index i = 0; i < n; ++i) cfg.H(i, i % L) = 1.0;
  // risk budget sized off an explicit integer-feasible portfolio (equal
  // weight across the first K assets), then made generous: the source
  // experiments run with the risk limit far from active, and budgets near
  // the minimum variance leave node relaxations without an interior
  Vec w = Vec::Zero(n);
  for (Index i = 0; i < cfg.K; ++i) w[i] = 1.0 / static_cast<double>(cfg.K);
  cfg.rho = std::max(25.0 * (cfg.F * w).squaredNorm(), 1.0);
  return cfg;
}

MicpProblem gen_random_miqp(Index n, Index n_int, std::uint64_t seed, bool with_equality) {
  if (n < 1 || n_int < 0 || n_int > n)
    throw std::invalid_argument("gen_random_miqp: bad dimensions");
  std::mt19937_64 rng(seed);
  MicpProblem prob;
  ConicProgram& prog = prob.relaxation;
  Mat F = random_matrix(rng, n, n, -1.0, 1.0);
  Mat P = 2.0 * (F.transpose() * F / static_cast<double>(n) + 0.1 * Mat::Identity(n, n));
  prog.P = P.sparseView();
  prog.q = Vec(n);
  for (Index i = 0; i < n; ++i) prog.q[i] = runif(rng, -1.0, 1.0);
  prog.l = Vec::Constant(n, -2.0);
  prog.u = Vec::Constant(n, 2.0);
  prog.A.resize(0, n);
  prog.b = Vec(0);
  if (with_equality) {
    // anchor the row on a point that respects the integer values so the
    // mixed-integer problem stays feasible
    Vec g(n), x0(n);
    for (Index i = 0; i < n; ++i) g[i] = runif(rng, -1.0, 1.0);
    for (Index i = 0; i < n; ++i)
      x0[i] = i < n_int ? std::floor(runif(rng, 0.0, 2.0)) : runif(rng, -2.0, 2.0);
    std::vector<Triplet> gt;
    for (Index i = 0; i < n; ++i) gt.emplace_back(0, i, g[i]);
    prog.G.resize(1, n);
    prog.G.setFromTriplets(gt.begin(), gt.end());
    prog.h = Vec::Constant(1, g.dot(x0));
  } else {
    prog.G.resize(0, n);
    prog.h = Vec(0);
  }
  for (Index i = 0; i < n_int; ++i) prob.integers.push_back({i, {0.0, 1.0}});
  return prob;
}

} // namespace conic_bnb
