#pragma once

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <vector>

#include "labcap/model.hpp"

namespace labcap::fem {

inline constexpr double kDomainLength = 6.283185307179586476925286766559;  // 2*pi

/// Uniform 1D grid on [0, 2pi].
struct Grid {
  int n_nodes;

  static Grid uniform(int n_nodes);
  double x_min() const { return 0.0; }
  double x_max() const { return kDomainLength; }
  double h() const { return kDomainLength / (n_nodes - 1); }
  double node(int i) const { return i * h(); }
  Eigen::VectorXd nodes() const;
};

struct Field {
  Eigen::VectorXd L;
  Eigen::VectorXd K;
};

struct SolverConfig {
  double tau = 0.01;       // time step
  double tol_fp = 1e-6;    // fixed-point stopping tolerance
  double tol_s = 1e-8;     // steady-state tolerance (0 disables steady detection)
  int max_fp_iters = 50;
  long max_steps = 1000000;
  int snapshot_every = 100;  // 0 disables snapshots

  void validate() const;
};

struct StepStats {
  int fp_iterations = 0;
  double first_iterate_diff = 0.0;  // max(|L^{n,1}-L^{n-1}|_2, |K^{n,1}-K^{n-1}|_2)
  double last_residual = 0.0;       // fixed-point difference at exit
  bool has_negative_nodes = false;
};

struct Trajectory {
  std::vector<std::pair<double, Field>> snapshots;
  Field final_state;
  double t_final = 0.0;
  long steps = 0;
  std::optional<double> T_s;  // first time the steady criterion fired
  bool reached_steady = false;
  long total_fp_iterations = 0;
  int max_fp_iterations = 0;
  bool negativity_warning = false;
  long first_negative_step = -1;
};

/// L0 = L*(1 + amplitude sin(10 pi x)), K0 = K*(1 + amplitude cos(10 pi x)).
Field initial_condition(const model::Equilibrium& eq, const Grid& grid,
                        double amplitude = 0.05);

/// One backward-Euler step of the lumped P1 scheme, solved by the inner
/// fixed-point sweep (capital equation first, then labor, with lagged
/// coefficients). Throws std::runtime_error if the inner iteration fails to
/// reach tol_fp within max_fp_iters.
Field step(const Field& state, const model::ScaledModelParams& p,
           const Grid& grid, const SolverConfig& config,
           StepStats* stats = nullptr);

/// Advances until max(|L^{n,1}-L^{n-1}|_2, |K^{n,1}-K^{n-1}|_2) < tol_s or
/// max_steps is exhausted (partial trajectory, reached_steady = false).
Trajectory run_to_steady(const Field& state0, const model::ScaledModelParams& p,
                         const Grid& grid, const SolverConfig& config);

/// Trapezoidal (lumped) nodal quadrature sum w_i u_i v_i with
/// w = (h/2, h, ..., h, h/2).
template <class DerivedU, class DerivedV>
double lumped_inner_product(const Eigen::MatrixBase<DerivedU>& u,
                            const Eigen::MatrixBase<DerivedV>& v,
                            const Grid& grid) {
  if (u.size() != grid.n_nodes || v.size() != grid.n_nodes)
    throw std::invalid_argument("lumped_inner_product: length mismatch");
  const double h = grid.h();
  double sum = 0.5 * h * (u[0] * v[0] + u[u.size() - 1] * v[v.size() - 1]);
  for (Eigen::Index i = 1; i + 1 < u.size(); ++i) sum += h * u[i] * v[i];
  return sum;
}

/// Amplitude of the Neumann cosine mode cos(k x), k = n/2, under the lumped
/// quadrature: <f, cos(kx)> / <cos(kx), cos(kx)>.
double cosine_mode_amplitude(const Eigen::VectorXd& f, double k,
                             const Grid& grid);

/// Half-integer mode k = n/2 in (0, k_max] with the largest |amplitude|.
double dominant_cosine_mode(const Eigen::VectorXd& f, const Grid& grid,
                            double k_max = 16.0);

}  // namespace labcap::fem
