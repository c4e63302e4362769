#pragma once

#include <Eigen/Dense>

#include "labcap/ces.hpp"

namespace labcap::model {

/// Diffusion coefficients in the raw (pre-scaling) units of the reaction
/// system with explicit mutualistic coefficients.
struct RawDiffusion {
  double c1, c2;    // random-diffusion coefficients
  double a11;       // labor intra-repulsion
  double a12;       // labor -> capital attraction
  double a22;       // capital intra-attraction
  double K_s;       // saturation constant, capital units
};

/// Coefficients of the rescaled system
///   dL/dt - d/dx[(c1 + a1 L) dL/dx - b L dK/dx]  = gamma L (alpha1 - beta1 L + K)
///   dK/dt - d/dx[(c2 - a2 g(K)) dK/dx]           = gamma K (alpha2 + L - beta2 K)
/// on (0, 2pi) with no-flow boundaries, g(K) = K / (K_s^2 + K^2).
struct ScaledModelParams {
  double alpha1, alpha2;  // intrinsic growth rates
  double beta1, beta2;    // intra-competition coefficients, beta1*beta2 > 1
  double c1, c2;          // random diffusion
  double a1;              // labor intra-repulsion
  double a2;              // capital intra-attraction
  double b;               // labor->capital attraction (bifurcation parameter)
  double K_s;             // saturation constant (scaled capital units)
  double gamma;           // time-space scale factor, > 0

  // Checks nonnegativity, ellipticity (c1 + a1 > 0, c2 > a2 g(K_s)),
  // dominance beta1*beta2 > 1 and gamma > 0. Throws std::invalid_argument.
  void validate() const;
};

struct Equilibrium {
  double L_star, K_star;
};

double saturation_g(double K, double K_s);
double saturation_g_prime(double K, double K_s);
double saturation_g_second(double K, double K_s);

/// Change of variables from the raw mutualistic system to the scaled one:
/// Lbar = b21 L, Kbar = b12 K, a1 = a11/b21, a2 = a22*b12, b = a12/b12,
/// beta1 = |b11|/b21, beta2 = |b22|/b12, K_s_bar = b12 K_s.
/// Requires lv.b12_t == lv.b21_t > 0.
ScaledModelParams rescale(const ces::LotkaVolterraCoeffs& lv,
                          const RawDiffusion& diffusion, double gamma);

/// Coexistence equilibrium of the scaled reaction system. Requires
/// beta1*beta2 > 1.
Equilibrium equilibrium(const ScaledModelParams& p);

/// Reaction right-hand side gamma*(L(alpha1 - beta1 L + K), K(alpha2 + L - beta2 K)).
Eigen::Vector2d reaction(const ScaledModelParams& p, double L, double K);

}  // namespace labcap::model
