#pragma once

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "labcap/model.hpp"

namespace labcap::stability {

/// Linearization of the scaled system about the coexistence equilibrium:
/// perturbation modes obey dw/dt = (gamma R - k^2 Q) w.
struct LinearizedMatrices {
  Eigen::Matrix2d R;  // reaction Jacobian factor
  Eigen::Matrix2d Q;  // diffusion matrix at bifurcation parameter b
};

struct DispersionSample {
  double k;
  double det_Ak;
  double re_lambda1, re_lambda2;
};

struct DispersionCurve {
  std::vector<DispersionSample> samples;
};

struct SufficientConditions {
  bool bif;                  // diffusion-coefficient sufficient condition
  std::optional<bool> bif2;  // kinematic form; only defined when alpha1 == alpha2
};

struct StabilityReport {
  double b_c;   // critical bifurcation value
  double k_c;   // critical wavenumber
  double m1, m2, q;
  double det_R, det_Q;
  bool necessary_condition;  // b > m2/m1 at the configured b
  bool is_turing_unstable;   // b > b_c at the configured b
  std::optional<std::pair<double, double>> band;  // (k1^2, k2^2) when b >= b_c
  SufficientConditions sufficient;
};

LinearizedMatrices build_matrices(const model::ScaledModelParams& p,
                                  const model::Equilibrium& eq, double b);

DispersionCurve dispersion(const model::ScaledModelParams& p,
                           const model::Equilibrium& eq, double b,
                           std::span<const double> k_grid);

/// 2048 uniform samples on [0, 3 k_c].
std::vector<double> default_k_grid(double k_c);

/// Critical threshold and diagnostics; the necessary/unstable/band/sufficient
/// fields are evaluated at the configured p.b.
StabilityReport critical_threshold(const model::ScaledModelParams& p,
                                   const model::Equilibrium& eq);

/// Roots (k1^2, k2^2) of h(s) = det(Q) s^2 + gamma q s + gamma^2 det(R), i.e.
/// the band of unstable squared wavenumbers. Empty below b_c; the tangent
/// double root at b = b_c.
std::optional<std::pair<double, double>> unstable_band(
    const model::ScaledModelParams& p, const model::Equilibrium& eq, double b);

SufficientConditions sufficient_conditions(const model::ScaledModelParams& p,
                                           const model::Equilibrium& eq,
                                           double b);

/// det(A_k) evaluated through the quadratic h(k^2); equals the determinant
/// route in `dispersion` and is used to cross-check it.
double det_Ak_quadratic(const model::ScaledModelParams& p,
                        const model::Equilibrium& eq, double b, double k);

struct OdeTrajectory {
  std::vector<double> t;
  std::vector<Eigen::Vector2d> state;  // (L, K)
};

/// Fixed-step fourth-order Runge-Kutta integration of the reaction-only
/// system. Throws std::runtime_error if the state leaves the finite range.
OdeTrajectory reaction_ode_integrate(const model::ScaledModelParams& p,
                                     Eigen::Vector2d initial, double t_end,
                                     double dt = 1e-3);

}  // namespace labcap::stability
