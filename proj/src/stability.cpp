#include "labcap/stability.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

namespace labcap::stability {

namespace {

struct Invariants {
  double m1, m2, det_R, det_Q;
  double Q11, Q22;  // c1 + a1 L*, c2 - a2 g(K*)
};

Invariants invariants(const model::ScaledModelParams& p,
                      const model::Equilibrium& eq) {
  Invariants inv;
  inv.Q11 = p.c1 + p.a1 * eq.L_star;
  inv.Q22 = p.c2 - p.a2 * model::saturation_g(eq.K_star, p.K_s);
  inv.m1 = eq.L_star * eq.K_star;
  inv.m2 = p.beta1 * eq.L_star * inv.Q22 + p.beta2 * eq.K_star * inv.Q11;
  inv.det_R = (p.beta1 * p.beta2 - 1.0) * eq.L_star * eq.K_star;
  inv.det_Q = inv.Q11 * inv.Q22;
  return inv;
}

}  // namespace

LinearizedMatrices build_matrices(const model::ScaledModelParams& p,
                                  const model::Equilibrium& eq, double b) {
  LinearizedMatrices m;
  m.R << -p.beta1 * eq.L_star, eq.L_star,
         eq.K_star, -p.beta2 * eq.K_star;
  const Invariants inv = invariants(p, eq);
  m.Q << inv.Q11, -b * eq.L_star,
         0.0, inv.Q22;
  return m;
}

DispersionCurve dispersion(const model::ScaledModelParams& p,
                           const model::Equilibrium& eq, double b,
                           std::span<const double> k_grid) {
  const LinearizedMatrices m = build_matrices(p, eq, b);
  DispersionCurve curve;
  curve.samples.reserve(k_grid.size());
  for (double k : k_grid) {
    const Eigen::Matrix2d A = p.gamma * m.R - k * k * m.Q;
    const double tr = A.trace();
    const double det = A.determinant();
    const std::complex<double> disc =
        std::sqrt(std::complex<double>(tr * tr - 4.0 * det, 0.0));
    const std::complex<double> l1 = 0.5 * (tr - disc);
    const std::complex<double> l2 = 0.5 * (tr + disc);
    curve.samples.push_back({k, det, l1.real(), l2.real()});
  }
  return curve;
}

std::vector<double> default_k_grid(double k_c) {
  constexpr int n = 2048;
  std::vector<double> grid(n);
  for (int i = 0; i < n; ++i) grid[i] = 3.0 * k_c * i / (n - 1);
  return grid;
}

double det_Ak_quadratic(const model::ScaledModelParams& p,
                        const model::Equilibrium& eq, double b, double k) {
  const Invariants inv = invariants(p, eq);
  const double q = inv.m2 - b * inv.m1;
  const double s = k * k;
  return inv.det_Q * s * s + p.gamma * q * s + p.gamma * p.gamma * inv.det_R;
}

StabilityReport critical_threshold(const model::ScaledModelParams& p,
                                   const model::Equilibrium& eq) {
  const Invariants inv = invariants(p, eq);
  if (!(inv.m1 > 0.0))
    throw std::runtime_error("critical_threshold: degenerate equilibrium (m1 = 0)");

  StabilityReport rep;
  rep.m1 = inv.m1;
  rep.m2 = inv.m2;
  rep.det_R = inv.det_R;
  rep.det_Q = inv.det_Q;
  rep.b_c = (inv.m2 + 2.0 * std::sqrt(inv.det_R * inv.det_Q)) / inv.m1;
  rep.k_c = std::sqrt(p.gamma * std::sqrt(inv.det_R / inv.det_Q));
  rep.q = inv.m2 - p.b * inv.m1;
  rep.necessary_condition = p.b > inv.m2 / inv.m1;
  rep.is_turing_unstable = p.b > rep.b_c;
  rep.band = unstable_band(p, eq, p.b);
  rep.sufficient = sufficient_conditions(p, eq, p.b);
  return rep;
}

std::optional<std::pair<double, double>> unstable_band(
    const model::ScaledModelParams& p, const model::Equilibrium& eq, double b) {
  const Invariants inv = invariants(p, eq);
  const double q = inv.m2 - b * inv.m1;
  if (q >= 0.0) return std::nullopt;  // necessary condition b > m2/m1 violated

  // h(s) = det_Q s^2 + gamma q s + gamma^2 det_R, roots via the
  // cancellation-free form.
  double disc = q * q - 4.0 * inv.det_Q * inv.det_R;
  if (disc < 0.0) {
    // Tangency tolerance: at b == b_c the discriminant is zero up to rounding.
    if (disc > -64.0 * std::numeric_limits<double>::epsilon() *
                   (q * q + 4.0 * inv.det_Q * inv.det_R))
      disc = 0.0;
    else
      return std::nullopt;  // below threshold
  }
  const double sq = std::sqrt(disc);
  // q < 0 here, so -q + sq is free of cancellation.
  const double big = 0.5 * (-q + sq);
  const double s2 = p.gamma * big / inv.det_Q;
  const double s1 = p.gamma * inv.det_R / big;
  return std::make_pair(s1, s2);
}

SufficientConditions sufficient_conditions(const model::ScaledModelParams& p,
                                           const model::Equilibrium& eq,
                                           double b) {
  const double gK = model::saturation_g(eq.K_star, p.K_s);
  SufficientConditions out;
  out.bif = 0.5 * b + p.beta1 / eq.K_star * p.a2 * gK >
            p.beta1 / eq.K_star * p.c2 + p.beta2 / eq.L_star * p.c1 +
                p.beta2 * p.a1;

  const double scale = std::max(std::abs(p.alpha1), std::abs(p.alpha2));
  if (std::abs(p.alpha1 - p.alpha2) <= 1e-12 * std::max(scale, 1.0)) {
    const double detB = p.beta1 * p.beta2 - 1.0;
    const double ratio = detB / p.alpha1;
    out.bif2 = 0.5 * b + ratio * p.a2 * gK > ratio * (p.c1 + p.c2) + p.beta2 * p.a1;
  }
  return out;
}

OdeTrajectory reaction_ode_integrate(const model::ScaledModelParams& p,
                                     Eigen::Vector2d initial, double t_end,
                                     double dt) {
  if (!(initial[0] >= 0.0) || !(initial[1] >= 0.0))
    throw std::invalid_argument("reaction_ode_integrate: nonnegative initial state required");
  if (!(dt > 0.0) || !(t_end >= 0.0))
    throw std::invalid_argument("reaction_ode_integrate: dt > 0 and t_end >= 0 required");

  auto f = [&p](const Eigen::Vector2d& u) {
    return model::reaction(p, u[0], u[1]);
  };

  const long n_steps = static_cast<long>(std::ceil(t_end / dt - 1e-12));
  OdeTrajectory traj;
  traj.t.reserve(n_steps + 1);
  traj.state.reserve(n_steps + 1);
  Eigen::Vector2d u = initial;
  traj.t.push_back(0.0);
  traj.state.push_back(u);
  for (long n = 0; n < n_steps; ++n) {
    const double h = std::min(dt, t_end - n * dt);
    const Eigen::Vector2d k1 = f(u);
    const Eigen::Vector2d k2 = f(u + 0.5 * h * k1);
    const Eigen::Vector2d k3 = f(u + 0.5 * h * k2);
    const Eigen::Vector2d k4 = f(u + h * k3);
    u += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!u.allFinite())
      throw std::runtime_error(
          "reaction_ode_integrate: state left the finite range (stiffness)");
    traj.t.push_back(std::min((n + 1) * dt, t_end));
    traj.state.push_back(u);
  }
  return traj;
}

}  // namespace labcap::stability
