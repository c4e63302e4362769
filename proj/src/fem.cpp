#include "labcap/fem.hpp"

#include <cmath>
#include <stdexcept>

namespace labcap::fem {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

/// In-place Thomas elimination: lower/diag/upper hold the three bands
/// (lower[0] and upper[n-1] unused). diag and rhs are clobbered.
void solve_tridiagonal(const Eigen::VectorXd& lower, Eigen::VectorXd& diag,
                       const Eigen::VectorXd& upper, Eigen::VectorXd& rhs,
                       Eigen::VectorXd& out) {
  const Eigen::Index n = diag.size();
  for (Eigen::Index i = 1; i < n; ++i) {
    if (diag[i - 1] == 0.0)
      throw std::runtime_error("solve_tridiagonal: zero pivot");
    const double m = lower[i] / diag[i - 1];
    diag[i] -= m * upper[i - 1];
    rhs[i] -= m * rhs[i - 1];
  }
  if (diag[n - 1] == 0.0)
    throw std::runtime_error("solve_tridiagonal: zero pivot");
  out.resize(n);
  out[n - 1] = rhs[n - 1] / diag[n - 1];
  for (Eigen::Index i = n - 2; i >= 0; --i)
    out[i] = (rhs[i] - upper[i] * out[i + 1]) / diag[i];
}

/// Adds the P1 stiffness contribution of elementwise-constant coefficients
/// coef_e (size n-1) into the three bands.
void add_stiffness(const Eigen::VectorXd& coef_e, double h,
                   Eigen::VectorXd& lower, Eigen::VectorXd& diag,
                   Eigen::VectorXd& upper) {
  const Eigen::Index ne = coef_e.size();
  for (Eigen::Index e = 0; e < ne; ++e) {
    const double s = coef_e[e] / h;
    diag[e] += s;
    diag[e + 1] += s;
    upper[e] -= s;
    lower[e + 1] -= s;
  }
}

struct Workspace {
  Eigen::VectorXd lumped;      // nodal quadrature weights
  Eigen::VectorXd lower, diag, upper, rhs;
  Eigen::VectorXd coef_e, mid;
  Eigen::VectorXd Lk, Kk, Lprev_it, Kprev_it;
};

void element_midpoints(const Eigen::VectorXd& u, Eigen::VectorXd& mid) {
  const Eigen::Index n = u.size();
  mid.resize(n - 1);
  mid = 0.5 * (u.head(n - 1) + u.tail(n - 1));
}

}  // namespace

Grid Grid::uniform(int n_nodes) {
  if (n_nodes < 3) throw std::invalid_argument("Grid: n_nodes >= 3 required");
  return Grid{n_nodes};
}

Eigen::VectorXd Grid::nodes() const {
  return Eigen::VectorXd::LinSpaced(n_nodes, 0.0, kDomainLength);
}

void SolverConfig::validate() const {
  if (!(tau > 0.0)) throw std::invalid_argument("SolverConfig: tau > 0 required");
  if (!(tol_fp > 0.0)) throw std::invalid_argument("SolverConfig: tol_fp > 0 required");
  if (tol_s < 0.0) throw std::invalid_argument("SolverConfig: tol_s >= 0 required");
  if (max_fp_iters < 1 || max_steps < 1)
    throw std::invalid_argument("SolverConfig: iteration limits must be >= 1");
}

Field initial_condition(const model::Equilibrium& eq, const Grid& grid,
                        double amplitude) {
  Field f;
  f.L.resize(grid.n_nodes);
  f.K.resize(grid.n_nodes);
  for (int i = 0; i < grid.n_nodes; ++i) {
    const double x = grid.node(i);
    f.L[i] = eq.L_star * (1.0 + amplitude * std::sin(10.0 * kPi * x));
    f.K[i] = eq.K_star * (1.0 + amplitude * std::cos(10.0 * kPi * x));
  }
  return f;
}

namespace {

/// One backward-Euler step; shared by step() and run_to_steady().
Field do_step(const Field& state, const model::ScaledModelParams& p,
              const Grid& grid, const SolverConfig& config, Workspace& ws,
              StepStats& stats) {
  const int n = grid.n_nodes;
  const double h = grid.h();
  const double tau = config.tau;

  if (ws.lumped.size() != n) {
    ws.lumped = Eigen::VectorXd::Constant(n, h);
    ws.lumped[0] = 0.5 * h;
    ws.lumped[n - 1] = 0.5 * h;
  }

  ws.Lk = state.L;
  ws.Kk = state.K;
  stats = StepStats{};

  for (int it = 1; it <= config.max_fp_iters; ++it) {
    ws.Lprev_it = ws.Lk;
    ws.Kprev_it = ws.Kk;

    // Capital equation: diffusivity c2 - a2 g(K) and the reaction coefficient
    // use the previous iterate; the unknown enters linearly.
    element_midpoints(ws.Kprev_it, ws.mid);
    ws.coef_e.resize(n - 1);
    for (int e = 0; e < n - 1; ++e)
      ws.coef_e[e] = p.c2 - p.a2 * model::saturation_g(ws.mid[e], p.K_s);
    ws.lower = Eigen::VectorXd::Zero(n);
    ws.upper = Eigen::VectorXd::Zero(n);
    ws.diag = ws.lumped / tau;
    add_stiffness(ws.coef_e, h, ws.lower, ws.diag, ws.upper);
    for (int i = 0; i < n; ++i) {
      const double rcoef = p.alpha2 + ws.Lprev_it[i] - p.beta2 * ws.Kprev_it[i];
      ws.diag[i] -= p.gamma * ws.lumped[i] * rcoef;
    }
    ws.rhs = ws.lumped.cwiseProduct(state.K) / tau;
    solve_tridiagonal(ws.lower, ws.diag, ws.upper, ws.rhs, ws.Kk);

    // Labor equation: diffusivity c1 + a1 L lagged; the cross term uses the
    // capital iterate just computed and lands on the right-hand side.
    element_midpoints(ws.Lprev_it, ws.mid);
    for (int e = 0; e < n - 1; ++e) ws.coef_e[e] = p.c1 + p.a1 * ws.mid[e];
    ws.lower = Eigen::VectorXd::Zero(n);
    ws.upper = Eigen::VectorXd::Zero(n);
    ws.diag = ws.lumped / tau;
    add_stiffness(ws.coef_e, h, ws.lower, ws.diag, ws.upper);
    for (int i = 0; i < n; ++i) {
      const double rcoef = p.alpha1 - p.beta1 * ws.Lprev_it[i] + ws.Kprev_it[i];
      ws.diag[i] -= p.gamma * ws.lumped[i] * rcoef;
    }
    ws.rhs = ws.lumped.cwiseProduct(state.L) / tau;
    for (int e = 0; e < n - 1; ++e) {
      const double flux = p.b * ws.mid[e] * (ws.Kk[e + 1] - ws.Kk[e]) / h;
      ws.rhs[e] -= flux;
      ws.rhs[e + 1] += flux;
    }
    solve_tridiagonal(ws.lower, ws.diag, ws.upper, ws.rhs, ws.Lk);

    const double diff = std::max((ws.Lk - ws.Lprev_it).norm(),
                                 (ws.Kk - ws.Kprev_it).norm());
    if (it == 1)
      stats.first_iterate_diff =
          std::max((ws.Lk - state.L).norm(), (ws.Kk - state.K).norm());
    stats.fp_iterations = it;
    stats.last_residual = diff;
    if (diff < config.tol_fp) break;
    if (it == config.max_fp_iters)
      throw std::runtime_error(
          "fem::step: fixed-point iteration did not converge (residual " +
          std::to_string(diff) + ")");
  }

  stats.has_negative_nodes =
      (ws.Lk.minCoeff() < 0.0) || (ws.Kk.minCoeff() < 0.0);
  return Field{ws.Lk, ws.Kk};
}

}  // namespace

Field step(const Field& state, const model::ScaledModelParams& p,
           const Grid& grid, const SolverConfig& config, StepStats* stats) {
  config.validate();
  if (state.L.size() != grid.n_nodes || state.K.size() != grid.n_nodes)
    throw std::invalid_argument("fem::step: state size does not match grid");
  if (!state.L.allFinite() || !state.K.allFinite())
    throw std::invalid_argument("fem::step: state must be finite");
  Workspace ws;
  StepStats local;
  Field next = do_step(state, p, grid, config, ws, local);
  if (stats) *stats = local;
  return next;
}

Trajectory run_to_steady(const Field& state0, const model::ScaledModelParams& p,
                         const Grid& grid, const SolverConfig& config) {
  config.validate();
  if (state0.L.size() != grid.n_nodes || state0.K.size() != grid.n_nodes)
    throw std::invalid_argument("fem::run_to_steady: state size does not match grid");

  Workspace ws;
  Trajectory traj;
  Field state = state0;
  if (config.snapshot_every > 0) traj.snapshots.emplace_back(0.0, state);

  StepStats stats;
  for (long n = 1; n <= config.max_steps; ++n) {
    state = do_step(state, p, grid, config, ws, stats);
    traj.steps = n;
    traj.total_fp_iterations += stats.fp_iterations;
    traj.max_fp_iterations = std::max(traj.max_fp_iterations, stats.fp_iterations);
    if (stats.has_negative_nodes && !traj.negativity_warning) {
      traj.negativity_warning = true;
      traj.first_negative_step = n;
    }
    if (config.snapshot_every > 0 && n % config.snapshot_every == 0)
      traj.snapshots.emplace_back(n * config.tau, state);

    if (config.tol_s > 0.0 && stats.first_iterate_diff < config.tol_s) {
      traj.T_s = n * config.tau;
      traj.reached_steady = true;
      break;
    }
  }
  traj.t_final = traj.steps * config.tau;
  traj.final_state = state;
  return traj;
}

double cosine_mode_amplitude(const Eigen::VectorXd& f, double k,
                             const Grid& grid) {
  Eigen::VectorXd c(grid.n_nodes);
  for (int i = 0; i < grid.n_nodes; ++i) c[i] = std::cos(k * grid.node(i));
  return lumped_inner_product(f, c, grid) / lumped_inner_product(c, c, grid);
}

double dominant_cosine_mode(const Eigen::VectorXd& f, const Grid& grid,
                            double k_max) {
  double best_k = 0.5, best_amp = -1.0;
  for (int n = 1; n <= static_cast<int>(std::floor(2.0 * k_max)); ++n) {
    const double k = 0.5 * n;
    const double amp = std::abs(cosine_mode_amplitude(f, k, grid));
    if (amp > best_amp) {
      best_amp = amp;
      best_k = k;
    }
  }
  return best_k;
}

}  // namespace labcap::fem
